"""Curvature and torsion invariants of the adapted connection.

Everything here is a constant tensor on the orthonormal frame, so the
invariants are plain numpy arrays: the full curvature tensor, the horizontal
Ricci-type trace, the sub-Riemannian Ricci form, the rigidity one-form, and
the Gram matrices of the three torsion semi-norms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import ZERO_TOL, HomogeneousSpace
from .connection import Connection, tor2, torsion, trace_tor2

__all__ = [
    "SeminormGrams",
    "StructureFlags",
    "riemann",
    "trace_rm",
    "sub_ricci",
    "rigidity",
    "seminorm_grams",
    "classify",
]


def riemann(conn: Connection) -> np.ndarray:
    """Curvature tensor of the adapted connection.

    ``rm[i, j, k, l]`` is the inner product of R(e_i, e_j) e_k with e_l,
    where R is the usual commutator of covariant derivatives minus the
    derivative along the bracket.
    """
    g = conn.gamma
    c = conn.space.c
    return (
        np.einsum("jkl,ilp->ijkp", g, g)
        - np.einsum("ikl,jlp->ijkp", g, g)
        - np.einsum("ija,akp->ijkp", c, g)
    )


def trace_rm(conn: Connection) -> np.ndarray:
    """Horizontal trace of the curvature: ``out[a, b]`` sums the sectional
    terms of R(E_k, e_a) e_b against E_k over the horizontal frame."""
    d = conn.space.dim_h
    rm = riemann(conn)
    return np.einsum("kabk->ab", rm[:d, :, :, :d])


def sub_ricci(conn: Connection) -> np.ndarray:
    """Sub-Riemannian Ricci form as a full matrix on the frame.

    Off the horizontal block the torsion corrections vanish by construction
    and the curvature trace vanishes because the connection preserves the
    splitting, so the matrix is supported on the horizontal block.
    """
    d = conn.space.dim_h
    src = trace_rm(conn)
    t2 = tor2(conn)
    src[:d, :d] -= 0.5 * np.einsum("kabk->ab", t2[:d, :d, :d, :d])
    src[:d, :d] -= trace_tor2(conn)[:d, :d]
    return src


def rigidity(conn: Connection) -> np.ndarray:
    """Rigidity one-form on the frame, as the vector of its components.

    The entry for a horizontal vector traces the mixed torsion against the
    vertical frame; for a vertical vector, against the horizontal frame.
    """
    d = conn.space.dim_h
    t = torsion(conn)
    return np.einsum("kak->a", t[:d, :, :d]) + np.einsum("kak->a", t[d:, :, d:])


@dataclass(frozen=True)
class SeminormGrams:
    """Gram matrices of the torsion semi-norms.

    Each matrix G satisfies ``|tau(A)|^2 = A @ G @ A`` for the corresponding
    semi-norm; all three are positive semidefinite by construction.

    tau_vh: horizontal output of the torsion paired with the vertical frame.
    tau_hv: vertical output of the torsion paired with the horizontal frame.
    tau_h:  pairing of A against the torsion of all ordered horizontal pairs.
    """

    tau_vh: np.ndarray
    tau_hv: np.ndarray
    tau_h: np.ndarray


def seminorm_grams(conn: Connection) -> SeminormGrams:
    d = conn.space.dim_h
    t = torsion(conn)
    mixed_vh = t[:, d:, :d]  # <Tor(e_p, U_k), E_i>
    mixed_hv = t[:, :d, d:]  # <Tor(e_p, E_i), U_k>
    horiz = t[:d, :d, :]  # <Tor(E_i, E_j), e_p>, both orders counted
    return SeminormGrams(
        tau_vh=np.einsum("pki,qki->pq", mixed_vh, mixed_vh),
        tau_hv=np.einsum("pik,qik->pq", mixed_hv, mixed_hv),
        tau_h=np.einsum("ijp,ijq->pq", horiz, horiz),
    )


@dataclass(frozen=True)
class StructureFlags:
    """Boolean geometry of the torsion, decided with a scaled zero test."""

    h_rigid: bool
    v_rigid: bool
    totally_rigid: bool
    h_normal: bool
    v_normal: bool
    strictly_normal: bool
    vm_integrable: bool
    almost_strictly_normal: bool


def classify(conn: Connection, tol: float = ZERO_TOL) -> StructureFlags:
    """Decide the torsion-shape flags used as theorem preconditions.

    h_normal / v_normal record whether mixed torsion values stay vertical,
    respectively horizontal; strictly normal means they vanish outright.
    vm_integrable records whether vertical brackets stay vertical.
    """
    space = conn.space
    d = space.dim_h
    scale = max(1.0, float(np.abs(space.c).max()) ** 2)
    cut = tol * scale

    r = rigidity(conn)
    h_rigid = bool(np.abs(r[:d]).max(initial=0.0) <= cut)
    v_rigid = bool(np.abs(r[d:]).max(initial=0.0) <= cut)

    t = torsion(conn)
    mixed = t[:d, d:, :]  # Tor(X, T)
    h_normal = bool(np.abs(mixed[:, :, :d]).max(initial=0.0) <= cut)
    v_normal = bool(np.abs(mixed[:, :, d:]).max(initial=0.0) <= cut)
    strictly_normal = h_normal and v_normal
    vm_integrable = bool(
        np.abs(space.c[d:, d:, :d]).max(initial=0.0) <= cut
    )
    return StructureFlags(
        h_rigid=h_rigid,
        v_rigid=v_rigid,
        totally_rigid=h_rigid and v_rigid,
        h_normal=h_normal,
        v_normal=v_normal,
        strictly_normal=strictly_normal,
        vm_integrable=vm_integrable,
        almost_strictly_normal=h_rigid and vm_integrable and v_normal,
    )
