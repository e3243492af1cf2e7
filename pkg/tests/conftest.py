"""Shared helpers for randomized geometry tests.

Random spaces come from the packaged example families with randomized
parameters, optionally followed by a vertical metric rescaling and a blockwise
rotation of the adapted frame. Both operations preserve antisymmetry, the
Jacobi identity, step-2 generation, and the horizontal/vertical splitting, so
every generated space is valid by construction.
"""

from __future__ import annotations

import numpy as np

from sublap import HomogeneousSpace, load_builtin, rescale_vertical


def random_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def rotate_frame(
    space: HomogeneousSpace, oh: np.ndarray, ov: np.ndarray
) -> HomogeneousSpace:
    """Re-express the structure constants in a rotated adapted frame."""
    n, d = space.dim, space.dim_h
    o = np.zeros((n, n))
    o[:d, :d] = oh
    o[d:, d:] = ov
    c = np.einsum("ai,bj,abg,gk->ijk", o, o, space.c, o)
    return HomogeneousSpace(space.name, d, space.dim_v, c, dict(space.params), None)


def random_space(rng: np.random.Generator) -> HomogeneousSpace:
    kind = int(rng.integers(0, 4))
    if kind == 0:
        space = load_builtin("so4_twisted", b=float(rng.uniform(-0.8, 0.8)))
    elif kind == 1:
        space = load_builtin("so3_twisted", c=float(rng.uniform(-0.9, 0.9)))
    elif kind == 2:
        space = load_builtin("so4_alt")
    else:
        space = load_builtin("twisted_spheres")
    if rng.random() < 0.7:
        space = rescale_vertical(space, float(10.0 ** rng.uniform(-1.0, 1.0)))
    oh = random_orthogonal(rng, space.dim_h)
    ov = random_orthogonal(rng, space.dim_v)
    return rotate_frame(space, oh, ov)
