"""Step-2 sub-Riemannian homogeneous spaces given by structure constants.

A space is presented by an adapted orthonormal frame e_1..e_{d+m}: the first d
vectors span the horizontal distribution, the rest span the vertical complement,
and the Lie brackets are [e_i, e_j] = sum_k c[i][j][k] e_k with constant c.
All geometry downstream (connection, curvature, bounds) is finite-dimensional
linear algebra on the array c.
"""

from __future__ import annotations

import ast
import importlib.resources
import math
import operator
from dataclasses import dataclass, field

import numpy as np

ZERO_TOL = 1e-12
JACOBI_SAMPLE_TOL = 1e-10

_BUILTIN_FILES = {
    "so4_twisted": "so4_twisted.txt",
    "so4_alt": "so4_alt.txt",
    "so3_twisted": "so3_twisted.txt",
    "twisted_spheres": "twisted_spheres.txt",
}


@dataclass(frozen=True)
class OracleFactor:
    """One su(2) slot of a spectral oracle: generators g1,g2,g3 with [g1,g2]=g3 cyclic."""

    spins: str  # "all" (half-integers, group-regular SU(2)/S^3) or "integer" (SO(3)/S^2)


@dataclass(frozen=True)
class OracleConfig:
    factors: tuple[OracleFactor, ...]
    # frame_map[i][f] is the length-3 coefficient vector of e_{i+1} in factor f.
    frame_map: tuple[tuple[tuple[float, float, float], ...], ...]
    cutoff: float = 40.0
    integer_sum: bool = False


@dataclass(frozen=True)
class HomogeneousSpace:
    """Structure constants of a homogeneous space in an adapted orthonormal frame."""

    name: str
    dim_h: int
    dim_v: int
    c: np.ndarray = field(repr=False)
    params: dict[str, float] = field(default_factory=dict)
    oracle: OracleConfig | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.dim_h + self.dim_v

    def horizontal_indices(self) -> range:
        return range(self.dim_h)

    def vertical_indices(self) -> range:
        return range(self.dim_h, self.dim)

    def basis_vector(self, i: int) -> np.ndarray:
        v = np.zeros(self.dim)
        v[i] = 1.0
        return v


def bracket(space: HomogeneousSpace, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Lie bracket of two coefficient vectors."""
    return np.einsum("i,j,ijk->k", u, v, space.c)


def project_h(space: HomogeneousSpace, v: np.ndarray) -> np.ndarray:
    out = np.zeros_like(v)
    out[: space.dim_h] = v[: space.dim_h]
    return out


def project_v(space: HomogeneousSpace, v: np.ndarray) -> np.ndarray:
    out = np.zeros_like(v)
    out[space.dim_h :] = v[space.dim_h :]
    return out


def validate(space: HomogeneousSpace) -> list[str]:
    """Check the structural invariants; returns human-readable violations (empty if valid).

    Checks antisymmetry of c, the Jacobi identity, and step-2 bracket generation
    (horizontal frame plus first brackets spans everything). Indices in messages
    are 1-based to match the spec-file syntax.
    """
    problems: list[str] = []
    n = space.dim
    c = space.c
    if c.shape != (n, n, n):
        return [
            f"structure array has shape {c.shape}, expected {(n, n, n)} "
            f"from dim_h={space.dim_h}, dim_v={space.dim_v}"
        ]

    skew = c + c.transpose(1, 0, 2)
    bad = np.argwhere(np.abs(skew) > ZERO_TOL)
    for i, j, k in bad[: len(bad) // 2 + 1]:
        if i <= j:
            problems.append(
                f"antisymmetry violated at ({i + 1},{j + 1},{k + 1}): "
                f"c[{i + 1}][{j + 1}][{k + 1}] + c[{j + 1}][{i + 1}][{k + 1}] = {skew[i, j, k]:.3e}"
            )

    # jac[i,j,k,:] = [[e_i,e_j],e_k] + [[e_j,e_k],e_i] + [[e_k,e_i],e_j]
    comp = np.einsum("ijl,lkm->ijkm", c, c)
    jac = comp + comp.transpose(1, 2, 0, 3) + comp.transpose(2, 0, 1, 3)
    bad = np.argwhere(np.max(np.abs(jac), axis=3) > ZERO_TOL)
    seen = set()
    for i, j, k in bad:
        key = tuple(sorted((int(i), int(j), int(k))))
        if key in seen:
            continue
        seen.add(key)
        defect = float(np.max(np.abs(jac[i, j, k])))
        problems.append(
            f"Jacobi identity violated on ({key[0] + 1},{key[1] + 1},{key[2] + 1}): "
            f"max defect {defect:.3e}"
        )

    d = space.dim_h
    spanning = [space.basis_vector(i) for i in range(d)]
    for i in range(d):
        for j in range(i + 1, d):
            spanning.append(c[i, j])
    rank = np.linalg.matrix_rank(np.array(spanning), tol=1e-10)
    if rank < n:
        problems.append(
            f"step-2 generation fails: span(H + [H,H]) has rank {rank} < {n}"
        )
    return problems


def rescale_vertical(space: HomogeneousSpace, t: float) -> HomogeneousSpace:
    """Rescale the vertical metric by t (replace each vertical frame vector U by U/sqrt(t)).

    In the rescaled orthonormal frame the structure constants become
    c'[i][j][k] = c[i][j][k] * f_i * f_j / f_k with f = 1 on H and 1/sqrt(t) on V.
    """
    if t <= 0:
        raise ValueError(f"rescale factor must be positive, got {t}")
    f = np.ones(space.dim)
    f[space.dim_h :] = 1.0 / math.sqrt(t)
    c = space.c * f[:, None, None] * f[None, :, None] / f[None, None, :]
    return HomogeneousSpace(
        name=space.name,
        dim_h=space.dim_h,
        dim_v=space.dim_v,
        c=c,
        params=dict(space.params),
        oracle=None,  # the oracle frame map describes the unscaled metric only
    )


_ALLOWED_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}


def eval_coefficient(expr: str, params: dict[str, float]) -> float:
    """Evaluate an arithmetic coefficient expression over named parameters.

    Supports numbers, parameter names, + - * / ** and parentheses; '^' is accepted
    as a power alias. Anything else is rejected.
    """
    text = expr.strip().replace("^", "**")
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse coefficient {expr!r}: {exc}") from None

    def walk(node: ast.AST) -> float:
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id not in params:
                raise ValueError(f"unbound parameter {node.id!r} in {expr!r}")
            return float(params[node.id])
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
            val = walk(node.operand)
            return val if isinstance(node.op, ast.UAdd) else -val
        if isinstance(node, ast.BinOp) and type(node.op) in _ALLOWED_BINOPS:
            return _ALLOWED_BINOPS[type(node.op)](walk(node.left), walk(node.right))
        raise ValueError(f"unsupported syntax in coefficient {expr!r}")

    return walk(tree)


class SpecFormatError(ValueError):
    """Raised when a spec file cannot be parsed."""


def _strip_comment(line: str) -> str:
    pos = line.find("#")
    return line if pos < 0 else line[:pos]


def parse_spec_text(
    text: str, overrides: dict[str, float] | None = None
) -> HomogeneousSpace:
    """Parse the structured-text spec format.

    Layout::

        name so3_twisted
        dim_h 2
        dim_v 1
        params { c = 0 }
        bracket 1 2 = -1 3
        bracket 1 3 = -c 1; 1 + c**2 2
        oracle { ... }

    Only i < j bracket lines are allowed; antisymmetric completion is automatic and
    unlisted brackets are zero. Each bracket term is an arithmetic expression over
    the params followed by the 1-based target index.
    """
    name = ""
    dim_h = dim_v = -1
    params: dict[str, float] = {}
    bracket_lines: list[tuple[int, int, str]] = []
    oracle_lines: list[str] = []

    lines = text.splitlines()
    pos = 0
    while pos < len(lines):
        line = _strip_comment(lines[pos]).strip()
        pos += 1
        if not line:
            continue
        if line.startswith("name"):
            name = line[len("name") :].strip()
        elif line.startswith("dim_h"):
            dim_h = _int_field(line)
        elif line.startswith("dim_v"):
            dim_v = _int_field(line)
        elif line.startswith("params"):
            body, pos = _read_block(line[len("params") :], lines, pos)
            for entry in body:
                if "=" not in entry:
                    raise SpecFormatError(f"bad params entry {entry!r}")
                key, _, val = entry.partition("=")
                try:
                    params[key.strip()] = float(val)
                except ValueError as exc:
                    raise SpecFormatError(f"bad params entry {entry!r}") from exc
        elif line.startswith("oracle"):
            oracle_lines, pos = _read_block(line[len("oracle") :], lines, pos)
        elif line.startswith("bracket"):
            head, _, rhs = line.partition("=")
            parts = head.split()
            if len(parts) != 3 or not rhs:
                raise SpecFormatError(f"bad bracket line {line!r}")
            i, j = _index(parts[1], line), _index(parts[2], line)
            if not i < j:
                raise SpecFormatError(
                    f"bracket indices must satisfy i < j, got {i} {j}"
                )
            bracket_lines.append((i, j, rhs))
        else:
            raise SpecFormatError(f"unrecognized line {line!r}")

    if dim_h < 1 or dim_v < 0:
        raise SpecFormatError("dim_h and dim_v must both be declared")
    if overrides:
        unknown = set(overrides) - set(params)
        if unknown:
            raise SpecFormatError(
                f"unknown parameter override(s): {', '.join(sorted(unknown))}"
            )
        params.update(overrides)

    n = dim_h + dim_v
    c = np.zeros((n, n, n))
    for i, j, rhs in bracket_lines:
        if not (1 <= i <= n and 1 <= j <= n):
            raise SpecFormatError(f"bracket index out of range in 'bracket {i} {j}'")
        for term in rhs.split(";"):
            term = term.strip()
            if not term:
                continue
            expr, _, target = term.rpartition(" ")
            if not expr:
                raise SpecFormatError(f"bad bracket term {term!r}")
            k = _index(target, term)
            if not 1 <= k <= n:
                raise SpecFormatError(f"bracket target {k} out of range")
            val = _coeff(expr, params)
            c[i - 1, j - 1, k - 1] += val
            c[j - 1, i - 1, k - 1] -= val

    oracle = _parse_oracle(oracle_lines, params, n) if oracle_lines else None
    return HomogeneousSpace(
        name=name or "unnamed",
        dim_h=dim_h,
        dim_v=dim_v,
        c=c,
        params=params,
        oracle=oracle,
    )


def _read_block(rest: str, lines: list[str], pos: int) -> tuple[list[str], int]:
    """Collect the entries of a `{ ... }` block starting on the current line."""
    rest = rest.strip()
    if not rest.startswith("{"):
        raise SpecFormatError("expected '{' to open a block")
    buf = rest[1:]
    entries: list[str] = []
    while True:
        done = False
        if "}" in buf:
            buf, _, tail = buf.partition("}")
            if tail.strip():
                raise SpecFormatError(f"trailing text after block: {tail!r}")
            done = True
        chunk = buf.strip()
        if chunk:
            entries.extend(s.strip() for s in chunk.splitlines() if s.strip())
        if done:
            return entries, pos
        if pos >= len(lines):
            raise SpecFormatError("unterminated block")
        buf = _strip_comment(lines[pos])
        pos += 1


def _int_field(line: str) -> int:
    """The integer value of a `key N` header line."""
    fields = line.split()
    if len(fields) != 2:
        raise SpecFormatError(f"bad dimension line {line!r}")
    try:
        return int(fields[1])
    except ValueError as exc:
        raise SpecFormatError(f"bad dimension line {line!r}") from exc


def _index(token: str, context: str) -> int:
    try:
        return int(token)
    except ValueError as exc:
        raise SpecFormatError(f"bad index {token!r} in {context!r}") from exc


def _coeff(expr: str, params: dict[str, float]) -> float:
    try:
        return eval_coefficient(expr, params)
    except ValueError as exc:
        raise SpecFormatError(str(exc)) from exc


def _parse_oracle(
    entries: list[str], params: dict[str, float], n: int
) -> OracleConfig:
    factors: list[OracleFactor] = []
    cutoff = 40.0
    integer_sum = False
    raw_maps: dict[int, list[tuple[float, int, int]]] = {}

    for entry in entries:
        if entry.startswith("factor"):
            _, _, rhs = entry.partition("=")
            fields = rhs.split()
            if len(fields) != 2 or fields[0] != "su2" or fields[1] not in (
                "all",
                "integer",
            ):
                raise SpecFormatError(f"bad oracle factor {entry!r}")
            factors.append(OracleFactor(spins=fields[1]))
        elif entry.startswith("cutoff"):
            value = entry.partition("=")[2].strip()
            try:
                cutoff = float(value)
            except ValueError as exc:
                raise SpecFormatError(f"bad oracle cutoff {value!r}") from exc
        elif entry.startswith("constraint"):
            value = entry.partition("=")[2].strip()
            if value != "integer_sum":
                raise SpecFormatError(f"unknown oracle constraint {value!r}")
            integer_sum = True
        elif entry.startswith("map"):
            head, _, rhs = entry.partition("=")
            fields = head.split()
            if len(fields) != 2:
                raise SpecFormatError(f"bad oracle map head {head.strip()!r}")
            idx = _index(fields[1], entry)
            terms: list[tuple[float, int, int]] = []
            for term in rhs.split(";"):
                term = term.strip()
                expr, _, gen = term.rpartition(" ")
                if not gen.startswith("f") or "." not in gen:
                    raise SpecFormatError(f"bad oracle map term {term!r}")
                fpart, _, apart = gen[1:].partition(".")
                coeff = _coeff(expr, params)
                terms.append((coeff, _index(fpart, term) - 1, _index(apart, term) - 1))
            raw_maps[idx] = terms
        else:
            raise SpecFormatError(f"unrecognized oracle entry {entry!r}")

    if not factors:
        raise SpecFormatError("oracle block declares no factors")
    if set(raw_maps) != set(range(1, n + 1)):
        raise SpecFormatError("oracle map must cover every frame vector exactly once")

    frame_map = []
    for i in range(1, n + 1):
        rows = [[0.0, 0.0, 0.0] for _ in factors]
        for coeff, f, a in raw_maps[i]:
            if not (0 <= f < len(factors) and 0 <= a < 3):
                raise SpecFormatError(f"oracle map index out of range in 'map {i}'")
            rows[f][a] += coeff
        frame_map.append(tuple(tuple(r) for r in rows))
    return OracleConfig(
        factors=tuple(factors),
        frame_map=tuple(frame_map),
        cutoff=cutoff,
        integer_sum=integer_sum,
    )


def load_spec(path: str, overrides: dict[str, float] | None = None) -> HomogeneousSpace:
    with open(path, encoding="utf-8") as fh:
        return parse_spec_text(fh.read(), overrides)


def builtin_names() -> list[str]:
    return sorted(_BUILTIN_FILES)


def load_builtin(name: str, **params: float) -> HomogeneousSpace:
    """Load a built-in example by name, optionally binding its parameters."""
    if name not in _BUILTIN_FILES:
        raise KeyError(
            f"unknown builtin {name!r}; available: {', '.join(builtin_names())}"
        )
    text = (
        importlib.resources.files("sublap.data")
        .joinpath(_BUILTIN_FILES[name])
        .read_text(encoding="utf-8")
    )
    return parse_spec_text(text, params or None)
