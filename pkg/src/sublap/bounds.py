"""Lower bounds for the first eigenvalue of the horizontal Laplacian.

The bound machinery works with a one-parameter family of quadratic curvature
forms Q(x) on the frame, two distortion tensors, and a handful of scalar
constants derived from them.  Every theorem evaluator reduces to finite
linear algebra plus a scalar optimization; the optimizer sweeps deterministic
grids (with provably sound upper-bound pruning) and then refines the best
abscissa by golden section, so identical inputs always give identical output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .algebra import ZERO_TOL, HomogeneousSpace
from .connection import (
    Connection,
    canonical_connection,
    nabla_torsion,
    tor2,
    torsion,
    trace_nabla_torsion,
    trace_nabla_torsion_vertical,
    trace_tor2,
)
from .curvature import StructureFlags, classify, seminorm_grams, sub_ricci, rigidity

__all__ = [
    "BGForm",
    "DistortionPack",
    "MConstant",
    "BoundResult",
    "DiscrepancyNote",
    "BoundReport",
    "PseudohermitianBound",
    "bg_form",
    "distortion",
    "feasible_rho1",
    "m_constant",
    "bound_main",
    "bound_t1zero",
    "bound_asn",
    "bound_sntf",
    "bound_pseudohermitian",
    "optimize",
    "report_text",
    "report_csv",
    "CSV_COLUMNS",
]

CSV_COLUMNS = (
    "example",
    "theorem",
    "bound",
    "x",
    "rho1",
    "rho2",
    "omega",
    "chi",
    "psi",
    "m",
)

_PSD_TOL = 1e-12
_BISECT_TOL = 1e-10


# ---------------------------------------------------------------------------
# Quadratic form and distortion tensors


@dataclass(frozen=True)
class BGForm:
    """Curvature quadratic form at parameter x: A @ q @ A over the frame."""

    x: float
    dim_h: int
    q: np.ndarray


@dataclass(frozen=True)
class DistortionPack:
    """Distortion tensors: t1 is the m-by-d mixed form (vertical argument
    first), t2 the symmetric d-by-d pure form on horizontal vectors."""

    t1: np.ndarray
    t2: np.ndarray


def _bg_terms(conn: Connection) -> tuple[np.ndarray, ...]:
    space = conn.space
    d, n = space.dim_h, space.dim
    src = sub_ricci(conn)
    msrc = np.zeros((n, n))
    msrc[:d, :d] = src[:d, :d]

    trnt = trace_nabla_torsion(conn)
    v = np.zeros((n, n))
    v[:d, :] = trnt[:d, :]
    mnt = 0.5 * (v + v.T)

    mtauh = seminorm_grams(conn).tau_h

    trt2 = trace_tor2(conn)
    w = np.zeros((n, n))
    w[d:, :d] = trt2[:d, d:].T
    mcross = 0.5 * (w + w.T)
    return msrc, mnt, mtauh, mcross


def bg_form(space: HomogeneousSpace, x: float) -> BGForm:
    """Quadratic form of the curvature family at parameter x in [0, 1).

    The form combines the sub-Ricci term weighted (1-x), the symmetrized
    torsion-derivative trace weighted (1+x), the horizontal-torsion Gram
    weighted (1+3x)/4, and the vertical/horizontal coupling weighted -(1-x).
    """
    if not 0.0 <= x < 1.0:
        raise ValueError(f"x must lie in [0, 1), got {x!r}")
    conn = canonical_connection(space)
    msrc, mnt, mtauh, mcross = _bg_terms(conn)
    q = (1.0 - x) * (msrc - mcross) + (1.0 + x) * mnt + (1.0 + 3.0 * x) / 4.0 * mtauh
    return BGForm(x=float(x), dim_h=space.dim_h, q=q)


def _distortion(conn: Connection) -> DistortionPack:
    space = conn.space
    d = space.dim_h
    t = torsion(conn)
    t2t = tor2(conn)
    nt = nabla_torsion(conn)
    trt2 = trace_tor2(conn)

    diff = (t2t - nt)[:d, d:, :d, :d]
    t1 = np.einsum("kabk->ab", diff)
    t1 = t1 + np.einsum("abkk->ab", t2t[d:, :d, :d, :d])
    t1 = t1 + 4.0 * trt2[d:, :d]

    g_vh = seminorm_grams(conn).tau_vh
    trv = trace_nabla_torsion_vertical(conn)
    rig = rigidity(conn)
    w3 = np.einsum("puq,u->pq", t[:d, d:, :d], rig[d:])
    t2m = 2.0 * g_vh[:d, :d] + trv[:d, :d] + w3
    t2m = 0.5 * (t2m + t2m.T)
    return DistortionPack(t1=t1, t2=t2m)


def distortion(space: HomogeneousSpace) -> DistortionPack:
    """Mixed and pure distortion tensors of the space."""
    return _distortion(canonical_connection(space))


# ---------------------------------------------------------------------------
# Feasible curvature constants and the penalty constant m


def feasible_rho1(form: BGForm, rho2: float) -> float | None:
    """Largest rho1 with q - diag(rho1 on H, rho2 on V) positive semidefinite.

    Bisection against the minimum eigenvalue to absolute tolerance 1e-10.
    Returns None when even rho1 = 0 is infeasible.
    """
    d = form.dim_h
    n = form.q.shape[0]
    scale = max(1.0, float(np.abs(form.q).max()))

    def feasible(rho1: float) -> bool:
        shift = np.zeros(n)
        shift[:d] = rho1
        shift[d:] = rho2
        w = np.linalg.eigvalsh(form.q - np.diag(shift))
        return bool(w[0] >= -_PSD_TOL * scale)

    if not feasible(0.0):
        return None
    lo = 0.0
    hi = float(np.linalg.eigvalsh(form.q[:d, :d])[0]) + 1.0
    if feasible(hi):  # cannot happen for finite forms, but stay defensive
        return hi
    while hi - lo > _BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


@dataclass(frozen=True)
class MConstant:
    """Value of the torsion penalty m, its minimizer s (None when the
    infimum is only attained in the limit), and a degeneracy flag."""

    value: float
    s: float | None
    degenerate: bool


def _m_arrays(omega: np.ndarray, chi: np.ndarray, psi: np.ndarray):
    """Vectorized m = inf_{s>0} (s*omega + chi/s + psi/s**2) with minimizer."""
    omega = np.asarray(omega, dtype=float)
    chi = np.asarray(chi, dtype=float)
    psi = np.asarray(psi, dtype=float)
    m = np.zeros(np.broadcast(omega, chi, psi).shape)
    s = np.full_like(m, np.nan)
    omega, chi, psi = np.broadcast_arrays(omega, chi, psi)

    pos = omega > 0.0
    chi0 = pos & (chi <= 0.0) & (psi > 0.0)
    psi0 = pos & (psi <= 0.0) & (chi > 0.0)
    both = pos & (chi > 0.0) & (psi > 0.0)
    # omega = 0, or chi = psi = 0: the infimum is 0 in a limit, m stays 0.

    if chi0.any():
        sc = np.cbrt(2.0 * psi[chi0] / omega[chi0])
        s[chi0] = sc
        m[chi0] = np.cbrt(27.0 / 4.0 * omega[chi0] ** 2 * psi[chi0])
    if psi0.any():
        sc = np.sqrt(chi[psi0] / omega[psi0])
        s[psi0] = sc
        m[psi0] = 2.0 * np.sqrt(omega[psi0] * chi[psi0])
    if both.any():
        w, c, p = omega[both], chi[both], psi[both]
        # Unique positive root of w*s^3 - c*s - 2p = 0 (depressed cubic).
        pp = -c / w
        qq = -2.0 * p / w
        disc = (qq / 2.0) ** 2 + (pp / 3.0) ** 3
        r = np.sqrt(-pp / 3.0)
        with np.errstate(invalid="ignore", divide="ignore"):
            arg = np.clip(3.0 * qq / (2.0 * pp) / np.maximum(r, 1e-300), -1.0, 1.0)
            trig = 2.0 * r * np.cos(np.arccos(arg) / 3.0)
            root = np.sqrt(np.maximum(disc, 0.0))
            card = np.cbrt(-qq / 2.0 + root) + np.cbrt(-qq / 2.0 - root)
        sc = np.where(disc < 0.0, trig, card)
        for _ in range(3):  # Newton cleanup on the cubic
            f = w * sc**3 - c * sc - 2.0 * p
            df = 3.0 * w * sc**2 - c
            sc = sc - np.where(df != 0.0, f / df, 0.0)
        s[both] = sc
        m[both] = sc * w + c / sc + p / sc**2
    return m, s


def m_constant(omega: float, chi: float, psi: float) -> MConstant:
    """Torsion penalty m(omega, chi, psi) = inf over s > 0 of
    s*omega + chi/s + psi/s**2, with the minimizing s when attained."""
    if omega < 0 or chi < 0 or psi < 0:
        raise ValueError("m constant requires nonnegative omega, chi, psi")
    if omega == 0.0 or (chi == 0.0 and psi == 0.0):
        # Decreasing (or increasing from 0) in s: infimum 0, never attained.
        return MConstant(value=0.0, s=None, degenerate=True)
    m, s = _m_arrays(np.array(omega), np.array(chi), np.array(psi))
    return MConstant(value=float(m), s=float(s), degenerate=False)


# ---------------------------------------------------------------------------
# Shared workspace for the theorem evaluators


@dataclass
class _Workspace:
    space: HomogeneousSpace
    conn: Connection
    flags: StructureFlags
    msrc: np.ndarray
    mnt: np.ndarray
    mtauh: np.ndarray
    mcross: np.ndarray
    mtt2: np.ndarray  # 2 * symmetrized horizontal trace of TOR2, padded
    g1: np.ndarray  # Gram of the vertical-paired torsion on H
    g2: np.ndarray  # Gram of the horizontal-paired torsion on H
    kappa: float
    sup_t2: float
    sigma: float
    t1_zero: bool
    src_h: np.ndarray
    tau_h_vv: np.ndarray
    trnt_h_zero: bool

    @property
    def d(self) -> int:
        return self.space.dim_h

    @property
    def n(self) -> int:
        return self.space.dim

    def q_of(self, x: float) -> np.ndarray:
        return (
            (1.0 - x) * (self.msrc - self.mcross)
            + (1.0 + x) * self.mnt
            + (1.0 + 3.0 * x) / 4.0 * self.mtauh
        )

    def q_asn_of(self, x: float) -> np.ndarray:
        return self.q_of(x) + self.mtt2

    def delta(self, x: float) -> float:
        return (1.0 - x) * (self.d - 1) / self.d


def _workspace(space: HomogeneousSpace) -> _Workspace:
    conn = canonical_connection(space)
    d, n = space.dim_h, space.dim
    flags = classify(conn)
    grams = seminorm_grams(conn)
    msrc, mnt, mtauh, mcross = _bg_terms(conn)

    trt2 = trace_tor2(conn)
    tt = np.zeros((n, n))
    tt[:d, :d] = trt2[:d, :d] + trt2[:d, :d].T
    dist = _distortion(conn)

    scale = max(1.0, float(np.abs(space.c).max())) ** 3
    kappa = float(np.linalg.eigvalsh(grams.tau_hv[:d, :d])[-1])
    sup_t2 = float(np.linalg.eigvalsh(dist.t2)[-1]) if d else 0.0
    sigma = float(np.linalg.svd(dist.t1, compute_uv=False)[0]) if dist.t1.size else 0.0
    trnt = trace_nabla_torsion(conn)
    return _Workspace(
        space=space,
        conn=conn,
        flags=flags,
        msrc=msrc,
        mnt=mnt,
        mtauh=mtauh,
        mcross=mcross,
        mtt2=tt,
        g1=grams.tau_vh[:d, :d],
        g2=grams.tau_hv[:d, :d],
        kappa=max(kappa, 0.0),
        sup_t2=sup_t2,
        sigma=max(sigma, 0.0),
        t1_zero=bool(np.abs(dist.t1).max(initial=0.0) <= ZERO_TOL * scale),
        src_h=sub_ricci(conn)[:d, :d],
        tau_h_vv=grams.tau_h[d:, d:],
        trnt_h_zero=bool(np.abs(trnt[:d, :]).max(initial=0.0) <= ZERO_TOL * scale),
    )


def _rho2_base_grid(kappa: float, per_decade: int, decades: int = 6) -> np.ndarray:
    count = decades * per_decade + 1
    half = decades / 2.0
    return kappa * np.power(10.0, np.linspace(-half, half, count))


def _rho2_candidates(base: np.ndarray, qhv: np.ndarray, qvv: np.ndarray, scale: float):
    """Admissible rho2 values below the top of the vertical block, plus
    near-boundary refinements and, for decoupled blocks, the boundary."""
    mu_min = float(np.linalg.eigvalsh(qvv)[0])
    if mu_min <= 0.0:
        return np.empty(0), mu_min
    cands = [base[base < mu_min * (1.0 - 1e-12)]]
    cands.append(mu_min * (1.0 - np.power(10.0, -np.arange(2.0, 11.0))))
    if np.abs(qhv).max(initial=0.0) <= _PSD_TOL * scale:
        cands.append(np.array([mu_min]))
    out = np.unique(np.concatenate(cands))
    return out[out > 0.0], mu_min


def _schur_rho1_curve(
    qhh: np.ndarray, qhv: np.ndarray, qvv: np.ndarray, rho2s: np.ndarray
) -> np.ndarray:
    """Largest feasible rho1 for each rho2 via the Schur complement of the
    vertical block; equals the PSD bisection result wherever both apply."""
    mu, u = np.linalg.eigh(qvv)
    w = qhv @ u
    gap = mu[None, :] - rho2s[:, None]
    inv = np.where(gap > 0.0, 1.0 / np.where(gap > 0.0, gap, 1.0), np.inf)
    coupled = (np.abs(w) > 0.0).any(axis=0)
    inv[:, ~coupled] = 0.0  # decoupled vertical directions never penalize H
    bad = ~np.isfinite(inv).all(axis=1)
    inv[bad] = 0.0
    stack = qhh[None, :, :] - np.einsum("aj,bj,rj->rab", w, w, inv)
    rho1 = np.linalg.eigvalsh(stack)[:, 0]
    rho1[bad] = np.nan
    # rho2 beyond the vertical minimum is infeasible outright
    rho1[rho2s > mu[0] + _PSD_TOL * max(1.0, abs(mu[0]))] = np.nan
    return rho1


def _sphere_samples(dim: int, count: int) -> np.ndarray:
    if dim == 1:
        return np.array([[1.0]])
    if dim == 2:
        theta = np.linspace(0.0, math.pi, count, endpoint=False)
        return np.column_stack([np.cos(theta), np.sin(theta)])
    if dim == 3:
        k = np.arange(count, dtype=float)
        phi = math.pi * (3.0 - math.sqrt(5.0)) * k
        z = 1.0 - 2.0 * (k + 0.5) / count
        r = np.sqrt(np.maximum(1.0 - z * z, 0.0))
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    rng = np.random.default_rng(0)
    pts = rng.standard_normal((count, dim))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return pts


def _asn_product_coeffs(ws: _Workspace):
    """Classify the semi-norm product term: zero, isotropic, or general."""
    d = ws.d
    scale = max(1.0, float(np.abs(ws.space.c).max()) ** 2)
    tol = 1e-12 * scale
    if np.abs(ws.g1).max(initial=0.0) <= tol or np.abs(ws.g2).max(initial=0.0) <= tol:
        return "zero", 0.0
    a1 = np.trace(ws.g1) / d
    a2 = np.trace(ws.g2) / d
    if (
        np.abs(ws.g1 - a1 * np.eye(d)).max() <= tol
        and np.abs(ws.g2 - a2 * np.eye(d)).max() <= tol
    ):
        return "isotropic", 2.0 * math.sqrt(a1 * a2)
    return "general", 0.0


def _asn_rho1_curve(
    ws: _Workspace,
    qt: np.ndarray,
    rho2s: np.ndarray,
    samples: int,
) -> np.ndarray:
    """rho1(rho2) for the refined bound: minimize the modified form minus the
    semi-norm product over unit horizontal vectors, after eliminating the
    vertical argument at each rho2."""
    d = ws.d
    qhh, qhv, qvv = qt[:d, :d], qt[:d, d:], qt[d:, d:]
    kind, coeff = _asn_product_coeffs(ws)
    if kind in ("zero", "isotropic"):
        return _schur_rho1_curve(qhh, qhv, qvv, rho2s) - coeff

    mu, u = np.linalg.eigh(qvv)
    w = qhv @ u
    gap = mu[None, :] - rho2s[:, None]
    inv = np.where(gap > 0.0, 1.0 / np.where(gap > 0.0, gap, 1.0), np.inf)
    coupled = (np.abs(w) > 0.0).any(axis=0)
    inv[:, ~coupled] = 0.0
    bad = ~np.isfinite(inv).all(axis=1)
    inv[bad] = 0.0

    h = _sphere_samples(d, samples)
    a = np.einsum("nd,de,ne->n", h, qhh, h)
    p2 = (h @ w) ** 2
    cross = 2.0 * np.sqrt(
        np.maximum(np.einsum("nd,de,ne->n", h, ws.g1, h), 0.0)
        * np.maximum(np.einsum("nd,de,ne->n", h, ws.g2, h), 0.0)
    )
    vals = a[None, :] - inv @ p2.T - cross[None, :]
    rho1 = vals.min(axis=1)
    rho1[bad] = np.nan
    rho1[rho2s > mu[0] + _PSD_TOL * max(1.0, abs(mu[0]))] = np.nan
    return rho1


def _asn_polish(
    ws: _Workspace, qt: np.ndarray, rho2: float, samples: int
) -> tuple[float, float]:
    """Full-budget evaluation of the sphere minimum at one (x, rho2), with
    projected-gradient descent from the best sample.  Returns (rho1, residual)
    where residual is the final projected-gradient norm."""
    d = ws.d
    qhh, qhv, qvv = qt[:d, :d], qt[:d, d:], qt[d:, d:]
    kind, coeff = _asn_product_coeffs(ws)
    mu, u = np.linalg.eigh(qvv)
    w = qhv @ u
    gap = mu - rho2
    inv = np.where(np.abs(w).max(axis=0) > 0.0, 1.0 / np.maximum(gap, 1e-300), 0.0)
    if np.any((gap <= 0.0) & (np.abs(w).max(axis=0) > 0.0)):
        return math.nan, math.inf
    s_mat = qhh - (w * inv) @ w.T
    if kind in ("zero", "isotropic"):
        return float(np.linalg.eigvalsh(s_mat)[0]) - coeff, 0.0

    def f_and_grad(h: np.ndarray) -> tuple[float, np.ndarray]:
        sh = s_mat @ h
        q1 = max(float(h @ ws.g1 @ h), 0.0)
        q2 = max(float(h @ ws.g2 @ h), 0.0)
        root = math.sqrt(q1 * q2)
        val = float(h @ sh) - 2.0 * root
        grad = 2.0 * sh
        if root > 1e-30:
            grad = grad - 2.0 * (
                math.sqrt(q2 / q1) * (ws.g1 @ h) + math.sqrt(q1 / q2) * (ws.g2 @ h)
            )
        return val, grad

    hs = _sphere_samples(d, samples)
    a = np.einsum("nd,de,ne->n", hs, s_mat, hs)
    cross = 2.0 * np.sqrt(
        np.maximum(np.einsum("nd,de,ne->n", hs, ws.g1, hs), 0.0)
        * np.maximum(np.einsum("nd,de,ne->n", hs, ws.g2, hs), 0.0)
    )
    vals = a - cross
    h = hs[int(np.argmin(vals))].copy()
    best, grad = f_and_grad(h)
    scale = max(1.0, float(np.abs(s_mat).max()))
    residual = math.inf
    for _ in range(500):
        pg = grad - float(grad @ h) * h
        residual = float(np.linalg.norm(pg))
        if residual <= 1e-9 * scale:
            break
        step = 0.5 / scale
        improved = False
        for _ in range(40):
            cand = h - step * pg
            cand /= np.linalg.norm(cand)
            val, g2 = f_and_grad(cand)
            if val < best - 1e-18:
                h, best, grad = cand, val, g2
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return best, residual


# ---------------------------------------------------------------------------
# Reported results


@dataclass
class BoundResult:
    theorem: str
    value: float
    x: float
    rho1: float
    rho2: float
    omega: float
    chi: float
    psi: float
    m: float
    aux: dict[str, float] = field(default_factory=dict)


@dataclass
class DiscrepancyNote:
    """A second value for the same theorem under an alternate normalization
    that circulates for this example; reported next to ours, never merged."""

    theorem: str
    value: float
    variant: float
    convention: str


@dataclass
class BoundReport:
    example: str
    entries: list[BoundResult]
    best: BoundResult | None
    discrepancies: list[DiscrepancyNote] = field(default_factory=list)


def _t1zero_values(
    rho1: np.ndarray, delta: float, omega: np.ndarray, chi: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Two-case closed form available when the mixed distortion vanishes.

    Requires rho1^2 > 4*omega*chi.  Below the threshold 4*chi*delta the
    penalty enters through the denominator; at or above it the bound is the
    larger root of the underlying quadratic.  Returns the values and the
    below-threshold mask (NaN where inapplicable).
    """
    rho1 = np.asarray(rho1, dtype=float)
    omega = np.asarray(omega, dtype=float)
    chi = np.asarray(chi, dtype=float)
    base = rho1**2 - 4.0 * omega * chi
    with np.errstate(invalid="ignore", divide="ignore"):
        case1 = rho1 / (delta * (2.0 + 4.0 * chi / base))
        case2 = (rho1 + np.sqrt(np.maximum(base - 4.0 * delta * chi, 0.0))) / (
            2.0 * (delta + omega)
        )
    in1 = (base > 0.0) & (base < 4.0 * chi * delta)
    in2 = (base > 0.0) & (base >= 4.0 * chi * delta)
    vals = np.where(in1, case1, np.where(in2, case2, np.nan))
    vals = np.where(np.isfinite(rho1) & (rho1 > 0.0), vals, np.nan)
    return vals, in1


def _pick_best(
    values: np.ndarray, rho2s: np.ndarray, extras: dict[str, np.ndarray]
) -> tuple[float, float, dict[str, float]] | None:
    ok = np.isfinite(values)
    if not ok.any():
        return None
    idx = int(np.nanargmax(np.where(ok, values, -np.inf)))
    picked = {k: float(v[idx]) for k, v in extras.items()}
    return float(values[idx]), float(rho2s[idx]), picked


def _eval_main_family(
    ws: _Workspace, x: float, rho2s: np.ndarray, want: tuple[str, ...]
) -> dict[str, BoundResult]:
    d = ws.d
    q = ws.q_of(x)
    scale = max(1.0, float(np.abs(q).max()))
    cands, _ = _rho2_candidates(rho2s, q[:d, d:], q[d:, d:], scale)
    out: dict[str, BoundResult] = {}
    if cands.size == 0:
        return out
    rho1 = _schur_rho1_curve(q[:d, :d], q[:d, d:], q[d:, d:], cands)
    delta = ws.delta(x)
    omega = ws.kappa / cands
    chi = np.maximum(cands * ws.sup_t2, 0.0)
    psi = cands * ws.sigma**2
    mvals, svals = _m_arrays(omega, chi, psi)

    if "main" in want:
        vals = np.where(rho1 > mvals, (rho1 - mvals) / (delta + omega), np.nan)
        picked = _pick_best(
            vals,
            cands,
            {"rho1": rho1, "omega": omega, "chi": chi, "psi": psi, "m": mvals, "s": svals},
        )
        if picked is not None:
            value, rho2, ex = picked
            aux = {} if math.isnan(ex["s"]) else {"s": ex["s"]}
            out["main"] = BoundResult(
                "main", value, x, ex["rho1"], rho2, ex["omega"], ex["chi"], ex["psi"], ex["m"], aux
            )
    if "t1zero" in want and ws.t1_zero:
        vals, in1 = _t1zero_values(rho1, delta, omega, chi)
        picked = _pick_best(
            vals,
            cands,
            {
                "rho1": rho1,
                "omega": omega,
                "chi": chi,
                "psi": psi,
                "m": mvals,
                "case": np.where(in1, 1.0, 2.0),
            },
        )
        if picked is not None:
            value, rho2, ex = picked
            out["t1zero"] = BoundResult(
                "t1zero",
                value,
                x,
                ex["rho1"],
                rho2,
                ex["omega"],
                ex["chi"],
                0.0,
                0.0,
                {"case": ex["case"]},
            )
    return out


def _eval_asn(
    ws: _Workspace, x: float, rho2s: np.ndarray, samples: int
) -> BoundResult | None:
    d = ws.d
    qt = ws.q_asn_of(x)
    scale = max(1.0, float(np.abs(qt).max()))
    cands, _ = _rho2_candidates(rho2s, qt[:d, d:], qt[d:, d:], scale)
    if cands.size == 0:
        return None
    rho1 = _asn_rho1_curve(ws, qt, cands, samples)
    delta = ws.delta(x)
    omega = ws.kappa / cands
    vals = np.where(rho1 > 0.0, rho1 / (delta + omega), np.nan)
    picked = _pick_best(vals, cands, {"rho1": rho1, "omega": omega})
    if picked is None:
        return None
    value, rho2, ex = picked
    return BoundResult(
        "asn", value, x, ex["rho1"], rho2, ex["omega"], math.nan, math.nan, math.nan, {}
    )


# ---------------------------------------------------------------------------
# Public theorem evaluators


def bound_main(
    space: HomogeneousSpace,
    x: float,
    *,
    rho2_per_decade: int = 200,
) -> BoundResult | None:
    """General eigenvalue bound (rho1 - m)/(Delta + omega) at parameter x,
    maximized over the rho2 grid.  Returns None when no feasible pair gives
    rho1 above the penalty m."""
    if not 0.0 <= x < 1.0:
        raise ValueError(f"x must lie in [0, 1), got {x!r}")
    ws = _workspace(space)
    if ws.kappa <= 0.0:
        return None
    grid = _rho2_base_grid(ws.kappa, rho2_per_decade)
    return _eval_main_family(ws, x, grid, ("main",)).get("main")


def bound_t1zero(
    space: HomogeneousSpace,
    x: float,
    *,
    rho2_per_decade: int = 200,
) -> BoundResult | None:
    """Sharpened two-case bound available when the mixed distortion tensor
    vanishes; inapplicable (None) otherwise or when rho1^2 <= 4*omega*chi
    for every feasible pair."""
    if not 0.0 <= x < 1.0:
        raise ValueError(f"x must lie in [0, 1), got {x!r}")
    ws = _workspace(space)
    if ws.kappa <= 0.0 or not ws.t1_zero:
        return None
    grid = _rho2_base_grid(ws.kappa, rho2_per_decade)
    return _eval_main_family(ws, x, grid, ("t1zero",)).get("t1zero")


def bound_asn(
    space: HomogeneousSpace,
    x: float,
    *,
    rho2: float | None = None,
    rho2_per_decade: int = 200,
    samples: int = 100_000,
) -> BoundResult | None:
    """Refined bound rho1/(Delta + omega) for almost strictly normal spaces.

    rho1 is extracted by minimizing the modified curvature form minus the
    product of the two mixed torsion semi-norms over the unit sphere
    (deterministic samples plus projected-gradient polish).  None when the
    space is not almost strictly normal.
    """
    if not 0.0 <= x < 1.0:
        raise ValueError(f"x must lie in [0, 1), got {x!r}")
    ws = _workspace(space)
    if not ws.flags.almost_strictly_normal or ws.kappa <= 0.0:
        return None
    qt = ws.q_asn_of(x)
    if rho2 is None:
        grid = _rho2_base_grid(ws.kappa, rho2_per_decade)
        coarse = _eval_asn(ws, x, grid, min(samples, 4096))
        if coarse is None:
            return None
        rho2 = coarse.rho2
    rho1, residual = _asn_polish(ws, qt, float(rho2), samples)
    if not math.isfinite(rho1) or rho1 <= 0.0:
        return None
    omega = ws.kappa / float(rho2)
    value = rho1 / (ws.delta(x) + omega)
    return BoundResult(
        "asn",
        value,
        x,
        rho1,
        float(rho2),
        omega,
        math.nan,
        math.nan,
        math.nan,
        {"residual": residual},
    )


def bound_sntf(space: HomogeneousSpace) -> BoundResult | None:
    """Closed-form bound rho1/((d-1)/d + 3*omega/4) for strictly normal
    spaces with vanishing horizontal torsion-derivative trace and integrable
    vertical distribution; the x-optimization is solved exactly at x = 1/3."""
    ws = _workspace(space)
    applicable = (
        ws.flags.strictly_normal and ws.trnt_h_zero and ws.flags.vm_integrable
    )
    if not applicable or ws.kappa <= 0.0:
        return None
    rho1 = float(np.linalg.eigvalsh(ws.src_h)[0])
    if ws.tau_h_vv.size == 0:
        return None
    rho2 = float(np.linalg.eigvalsh(ws.tau_h_vv)[0]) / 4.0
    if rho2 <= 0.0 or rho1 <= 0.0:
        return None
    omega = ws.kappa / rho2
    d = ws.d
    value = rho1 / ((d - 1) / d + 0.75 * omega)
    return BoundResult("sntf", value, 1.0 / 3.0, rho1, rho2, omega, 0.0, 0.0, 0.0, {})


@dataclass(frozen=True)
class PseudohermitianBound:
    value: float
    x: float


def bound_pseudohermitian(n, rho, c) -> PseudohermitianBound:
    """Closed-form bound for the homogeneous pseudohermitian model with
    dimension parameter n, curvature constant rho, and torsion bound c.

    Exact (Fraction-preserving) in the two rational regimes: c = 0 gives
    n*rho/(n+1) at x = 1/3, and c >= 8/(2n+11) gives 2n*rho*(1-c)/(2n+3)
    at x = 0.  In between, x solves the stationarity quadratic.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if rho <= 0:
        raise ValueError("rho must be positive")
    if not 0 <= c < 1:
        raise ValueError("c must lie in [0, 1)")
    exact = isinstance(rho, (int, Fraction)) and isinstance(c, (int, Fraction))
    if c == 0:
        x = Fraction(1, 3) if exact else 1.0 / 3.0
        return PseudohermitianBound(value=n * rho / (n + 1), x=x)
    if c >= Fraction(8, 2 * n + 11):
        zero = 0 if exact else 0.0
        return PseudohermitianBound(value=2 * n * rho * (1 - c) / (2 * n + 3), x=zero)
    cf = float(c)
    a = 9.0 * cf * (2 * n - 1)
    b = 24.0 + 6.0 * (2 * n - 1) * cf
    c0 = (2 * n + 11) * cf - 8.0
    x = (-b + math.sqrt(b * b - 4.0 * a * c0)) / (2.0 * a)
    num = 2 * n * float(rho) * (-3.0 * x * x + (2.0 - 3.0 * cf) * x + 1.0 - cf)
    den = -3.0 * (2 * n - 1) * x * x + 2.0 * (2 * n - 1) * x + 2 * n + 3
    return PseudohermitianBound(value=num / den, x=x)


# ---------------------------------------------------------------------------
# Sweep optimizer


def _golden_refine(fun, x_lo: float, x_hi: float, iters: int = 60):
    """Golden-section maximization of fun on [x_lo, x_hi]; returns the best
    (x, payload) among every evaluation, so it never regresses."""
    inv = (math.sqrt(5.0) - 1.0) / 2.0
    best_x, best_val, best_payload = math.nan, -math.inf, None

    def probe(x: float):
        nonlocal best_x, best_val, best_payload
        val, payload = fun(x)
        if val > best_val:
            best_x, best_val, best_payload = x, val, payload
        return val

    a, b = x_lo, x_hi
    c = b - inv * (b - a)
    d = a + inv * (b - a)
    fc, fd = probe(c), probe(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = probe(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = probe(d)
    return best_x, best_val, best_payload


def optimize(
    space: HomogeneousSpace,
    *,
    x_points: int = 2000,
    rho2_per_decade: int = 200,
    asn_samples: int = 100_000,
) -> BoundReport:
    """Evaluate every applicable theorem over the (x, rho2) grids, refine the
    winning x by golden section, and report per-theorem bests.

    The x sweep is pruned by a sound per-x upper bound (the horizontal block
    alone, at the most favorable admissible rho2), visiting candidates in
    decreasing order of that bound, so pruning never changes the result.
    """
    ws = _workspace(space)
    report = BoundReport(example=space.name, entries=[], best=None)
    if ws.kappa <= 0.0:
        return report
    d = ws.d
    grid = _rho2_base_grid(ws.kappa, rho2_per_decade)
    rho2_top = float(grid[-1])
    xs = np.arange(x_points, dtype=float) / x_points

    q_stack = (
        (1.0 - xs)[:, None, None] * (ws.msrc - ws.mcross)[None]
        + (1.0 + xs)[:, None, None] * ws.mnt[None]
        + ((1.0 + 3.0 * xs) / 4.0)[:, None, None] * ws.mtauh[None]
    )
    lam_hh = np.linalg.eigvalsh(q_stack[:, :d, :d])[:, 0]
    lam_vv = np.linalg.eigvalsh(q_stack[:, d:, d:])[:, 0]
    deltas = (1.0 - xs) * (d - 1) / d
    rho2_cap = np.minimum(np.where(lam_vv > 0.0, lam_vv, np.nan), rho2_top)
    ub_main = np.where(
        (lam_hh > 0.0) & np.isfinite(rho2_cap),
        lam_hh / (deltas + ws.kappa / rho2_cap),
        -np.inf,
    )
    ub_t1z = np.where(
        np.isfinite(ub_main) & (ub_main > -np.inf),
        lam_hh / np.minimum(deltas + ws.kappa / rho2_cap, 2.0 * deltas + 1.0),
        -np.inf,
    )
    qa_stack = q_stack + ws.mtt2[None]
    lam_hh_a = np.linalg.eigvalsh(qa_stack[:, :d, :d])[:, 0]
    lam_vv_a = np.linalg.eigvalsh(qa_stack[:, d:, d:])[:, 0]
    cap_a = np.minimum(np.where(lam_vv_a > 0.0, lam_vv_a, np.nan), rho2_top)
    ub_asn = np.where(
        (lam_hh_a > 0.0) & np.isfinite(cap_a),
        lam_hh_a / (deltas + ws.kappa / cap_a),
        -np.inf,
    )

    sweep_samples = min(asn_samples, 4096)
    best: dict[str, BoundResult] = {}

    def consider(res: BoundResult | None) -> None:
        if res is None or not math.isfinite(res.value) or res.value <= 0.0:
            return
        cur = best.get(res.theorem)
        if cur is None or res.value > cur.value:
            best[res.theorem] = res

    plans = [("main", ub_main), ("t1zero", ub_t1z)] if ws.t1_zero else [("main", ub_main)]
    for name, ub in plans:
        for i in np.argsort(ub)[::-1]:
            cur = best.get(name)
            if cur is not None and ub[i] <= cur.value + 1e-15:
                break
            if not math.isfinite(ub[i]) or ub[i] <= 0.0:
                break
            res = _eval_main_family(ws, float(xs[i]), grid, (name,)).get(name)
            consider(res)

    if ws.flags.almost_strictly_normal:
        for i in np.argsort(ub_asn)[::-1]:
            cur = best.get("asn")
            if cur is not None and ub_asn[i] <= cur.value + 1e-15:
                break
            if not math.isfinite(ub_asn[i]) or ub_asn[i] <= 0.0:
                break
            consider(_eval_asn(ws, float(xs[i]), grid, sweep_samples))

    # Golden-section refinement of the winning abscissa, one theorem at a time.
    step = 1.0 / x_points
    for name in list(best):
        center = best[name].x

        def fun(x: float, _name=name):
            if not 0.0 <= x < 1.0:
                return -math.inf, None
            if _name == "asn":
                res = _eval_asn(ws, x, grid, sweep_samples)
            else:
                res = _eval_main_family(ws, x, grid, (_name,)).get(_name)
            if res is None or not math.isfinite(res.value):
                return -math.inf, None
            return res.value, res

        lo = max(center - step, 0.0)
        hi = min(center + step, 1.0 - 1e-12)
        _, val, payload = _golden_refine(fun, lo, hi)
        if payload is not None and val > best[name].value:
            best[name] = payload

    if "asn" in best and asn_samples > sweep_samples:
        final = bound_asn(
            space,
            best["asn"].x,
            rho2=best["asn"].rho2,
            samples=asn_samples,
        )
        if final is not None:
            best["asn"] = final  # full-budget value is the honest one

    consider(bound_sntf(space))

    report.entries = [best[k] for k in sorted(best)]
    if report.entries:
        report.best = max(report.entries, key=lambda r: r.value)
    _append_discrepancies(ws, report)
    return report


def _append_discrepancies(ws: _Workspace, report: BoundReport) -> None:
    """For two named examples, recompute the closed-form bound under the
    alternate normalization in circulation and report both values."""
    sntf = next((e for e in report.entries if e.theorem == "sntf"), None)
    if sntf is None:
        return
    d = ws.d
    if ws.space.name == "twisted_spheres":
        # Same data with the horizontal-torsion Gram counted over unordered
        # pairs, which halves rho2 and doubles omega.
        variant = sntf.rho1 / ((d - 1) / d + 0.75 * (2.0 * sntf.omega))
        report.discrepancies.append(
            DiscrepancyNote(
                theorem="sntf",
                value=sntf.value,
                variant=variant,
                convention="unordered-pair torsion Gram (rho2 halved)",
            )
        )
    elif ws.space.name == "so4_alt":
        variant = sntf.rho1 / (d / (d - 1) + 0.75 * sntf.omega)
        report.discrepancies.append(
            DiscrepancyNote(
                theorem="sntf",
                value=sntf.value,
                variant=variant,
                convention="denominator uses d/(d-1)",
            )
        )


# ---------------------------------------------------------------------------
# Serialization


def _fmt(v: float | None) -> str:
    if v is None:
        return ""
    if isinstance(v, float) and math.isnan(v):
        return ""
    return format(v, ".12g")


def report_text(report: BoundReport) -> str:
    lines = [f"example = {report.example}"]
    if not report.entries:
        lines.append("bounds = none (no positive curvature constants)")
        return "\n".join(lines) + "\n"
    for e in report.entries:
        lines.append("")
        lines.append(f"theorem = {e.theorem}")
        lines.append(f"bound = {_fmt(e.value)}")
        lines.append(f"x = {_fmt(e.x)}")
        lines.append(f"rho1 = {_fmt(e.rho1)}")
        lines.append(f"rho2 = {_fmt(e.rho2)}")
        lines.append(f"omega = {_fmt(e.omega)}")
        lines.append(f"chi = {_fmt(e.chi)}")
        lines.append(f"psi = {_fmt(e.psi)}")
        lines.append(f"m = {_fmt(e.m)}")
        for k in sorted(e.aux):
            lines.append(f"{k} = {_fmt(e.aux[k])}")
    for note in report.discrepancies:
        lines.append("")
        lines.append(f"theorem = {note.theorem} [{note.convention}]")
        lines.append(f"bound = {_fmt(note.variant)}")
        lines.append(f"reference = {_fmt(note.value)}")
    if report.best is not None:
        lines.append("")
        lines.append(f"best = {_fmt(report.best.value)} ({report.best.theorem})")
    return "\n".join(lines) + "\n"


def _csv_row(example: str, theorem: str, e: BoundResult | None, value: float) -> str:
    if e is None:
        return ",".join([example, theorem, _fmt(value)] + [""] * 7)
    return ",".join(
        [
            example,
            theorem,
            _fmt(value),
            _fmt(e.x),
            _fmt(e.rho1),
            _fmt(e.rho2),
            _fmt(e.omega),
            _fmt(e.chi),
            _fmt(e.psi),
            _fmt(e.m),
        ]
    )


def report_csv(report: BoundReport, header: bool = True) -> str:
    rows = [",".join(CSV_COLUMNS)] if header else []
    for e in report.entries:
        rows.append(_csv_row(report.example, e.theorem, e, e.value))
    for note in report.discrepancies:
        src = next(e for e in report.entries if e.theorem == note.theorem)
        rows.append(
            _csv_row(report.example, f"{note.theorem}-variant", src, note.variant)
        )
    return "\n".join(rows) + "\n"
