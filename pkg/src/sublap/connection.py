"""Canonical metric connection adapted to the horizontal/vertical splitting.

The connection is determined by requiring metric compatibility, that parallel
transport preserve both distributions, and that the torsion exchange the two
distributions on pure pairs.  On an orthonormal adapted frame all coefficients
are constants and come out of Koszul-type closed forms, one per block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import ZERO_TOL, HomogeneousSpace

__all__ = [
    "Connection",
    "canonical_connection",
    "verify_connection",
    "torsion",
    "nabla_torsion",
    "tor2",
    "trace_nabla_torsion",
    "trace_tor2",
    "trace_nabla_torsion_vertical",
]


@dataclass(frozen=True)
class Connection:
    """Connection coefficients on the adapted frame.

    ``gamma[i, j, k]`` is the inner product of the covariant derivative of
    frame vector j along frame vector i with frame vector k.
    """

    space: HomogeneousSpace
    gamma: np.ndarray


def canonical_connection(space: HomogeneousSpace) -> Connection:
    """Build the adapted connection and verify its defining properties.

    Raises RuntimeError if the computed coefficients fail metric
    compatibility, splitting preservation, or the torsion mapping and
    symmetry properties.  That cannot happen for a valid structure tensor,
    so a failure indicates corrupted input rather than a borderline case.
    """
    d, n = space.dim_h, space.dim
    c = space.c
    gamma = np.zeros((n, n, n))

    h = slice(0, d)
    v = slice(d, n)

    # Derivatives along one distribution of vectors in the same distribution:
    # Koszul formula with all brackets projected back onto that distribution.
    for block in (h, v):
        cb = c[block, block, block]
        gamma[block, block, block] = 0.5 * (
            cb - cb.transpose(2, 0, 1) + cb.transpose(1, 2, 0)
        )

    # Mixed derivatives. The direction lives in one distribution, the
    # differentiated vector and the output in the other.
    for direction, block in ((v, h), (h, v)):
        cb = c[block, direction, block]  # cb[j, i, k] with i the direction
        half = 0.5 * (cb.transpose(2, 1, 0) - cb)
        gamma[direction, block, block] = half.transpose(1, 0, 2)

    conn = Connection(space=space, gamma=gamma)
    problems = verify_connection(conn)
    if problems:
        raise RuntimeError("; ".join(problems))
    return conn


def torsion(conn: Connection) -> np.ndarray:
    """Torsion tensor on the frame: ``tor[i, j, k]`` is the k-component
    of Tor(e_i, e_j)."""
    g = conn.gamma
    return g - g.transpose(1, 0, 2) - conn.space.c


def nabla_torsion(conn: Connection) -> np.ndarray:
    """Covariant derivative of the torsion.

    ``nt[a, b, c, k]`` is the k-component of the derivative of Tor along
    frame vector b, evaluated on the pair (e_a, e_c).
    """
    g = conn.gamma
    t = torsion(conn)
    return (
        np.einsum("acl,blk->abck", t, g)
        - np.einsum("bal,lck->abck", g, t)
        - np.einsum("bcl,alk->abck", g, t)
    )


def tor2(conn: Connection) -> np.ndarray:
    """Iterated torsion: ``t2[a, b, c, k]`` is the k-component of
    Tor(e_a, Tor(e_b, e_c))."""
    t = torsion(conn)
    return np.einsum("bcl,alk->abck", t, t)


def trace_nabla_torsion(conn: Connection) -> np.ndarray:
    """Horizontal trace of the torsion derivative over its last two slots.

    Returns ``out[a, k]``, the k-component of the trace evaluated at e_a.
    """
    d = conn.space.dim_h
    nt = nabla_torsion(conn)
    return np.einsum("aiik->ak", nt[:, :d, :d, :])


def trace_tor2(conn: Connection) -> np.ndarray:
    """Horizontal trace of the iterated torsion over its first two slots."""
    d = conn.space.dim_h
    t2 = tor2(conn)
    return np.einsum("iiak->ak", t2[:d, :d, :, :])


def trace_nabla_torsion_vertical(conn: Connection) -> np.ndarray:
    """Vertical trace of the torsion derivative over its last two slots."""
    d = conn.space.dim_h
    nt = nabla_torsion(conn)
    return np.einsum("aiik->ak", nt[:, d:, d:, :])


def verify_connection(conn: Connection) -> list[str]:
    """Check the five defining properties of the adapted connection and
    return a description of each violated one (empty for the genuine
    connection).  Useful for probing perturbed coefficient tensors."""
    space = conn.space
    d, n = space.dim_h, space.dim
    gamma = conn.gamma
    scale = max(1.0, float(np.abs(space.c).max()), float(np.abs(gamma).max()))
    tol = ZERO_TOL * scale
    problems = []

    if np.abs(gamma + gamma.transpose(0, 2, 1)).max() > tol:
        problems.append("connection is not metric compatible")

    hmask = np.zeros(n, dtype=bool)
    hmask[:d] = True
    split = hmask[:, None] ^ hmask[None, :]  # True where j, k mix components
    if np.abs(gamma[:, split]).max() > tol:
        problems.append("connection does not preserve the splitting")

    t = torsion(conn)
    if np.abs(t[:d, :d, :d]).max() > tol:
        problems.append("torsion of two horizontal vectors is not vertical")
    if np.abs(t[d:, d:, d:]).max() > tol:
        problems.append("torsion of two vertical vectors is not horizontal")

    # Mixed-pair symmetries: with one vertical argument fixed, the map on
    # horizontal vectors is self-adjoint, and symmetrically with the roles
    # of the distributions exchanged.
    mixed_h = t[:d, d:, :d]  # tor[x, t, y]
    if np.abs(mixed_h - mixed_h.transpose(2, 1, 0)).max() > tol:
        problems.append("mixed torsion is not symmetric on horizontal pairs")
    mixed_v = t[d:, :d, d:]  # tor[t, x, u]
    if np.abs(mixed_v - mixed_v.transpose(2, 1, 0)).max() > tol:
        problems.append("mixed torsion is not symmetric on vertical pairs")
    return problems
