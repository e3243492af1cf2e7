"""Randomized invariant checks over structure-preserving perturbations."""

from __future__ import annotations

import numpy as np

from sublap import (
    bg_form,
    bound_asn,
    bound_main,
    bound_sntf,
    bound_t1zero,
    canonical_connection,
    classify,
    distortion,
    feasible_rho1,
    load_builtin,
    nabla_torsion,
    optimize,
    rescale_vertical,
    riemann,
    seminorm_grams,
    sub_ricci,
    trace_tor2,
    validate,
    verify_connection,
)
from conftest import random_space

N_CASES = 120


def test_random_spaces_are_valid_and_admit_the_connection():
    rng = np.random.default_rng(101)
    for _ in range(N_CASES):
        space = random_space(rng)
        assert validate(space) == []
        assert verify_connection(canonical_connection(space)) == []


def test_sub_ricci_symmetry_and_block_vanishing():
    rng = np.random.default_rng(102)
    for _ in range(N_CASES):
        space = random_space(rng)
        d = space.dim_h
        src = sub_ricci(canonical_connection(space))
        scale = max(1.0, float(np.max(np.abs(src))))
        assert np.allclose(src[:d, :d], src[:d, :d].T, atol=1e-9 * scale)
        assert np.allclose(src[:d, d:], 0.0, atol=1e-9 * scale)
        assert np.allclose(src[d:, :d], 0.0, atol=1e-9 * scale)


def test_vertical_trace_of_squared_torsion_is_a_gram():
    # For vertical directions the trace of the squared-torsion composition
    # coincides with the Gram matrix of the vertically-paired torsion.
    rng = np.random.default_rng(103)
    for _ in range(N_CASES):
        space = random_space(rng)
        d = space.dim_h
        conn = canonical_connection(space)
        left = trace_tor2(conn)[d:, d:]
        right = seminorm_grams(conn).tau_hv[d:, d:]
        scale = max(1.0, float(np.max(np.abs(right))))
        assert np.allclose(left, right, atol=1e-9 * scale)


def test_rigid_spaces_have_traceless_vertical_derivative():
    rng = np.random.default_rng(104)
    count = 0
    for _ in range(N_CASES):
        space = random_space(rng)
        conn = canonical_connection(space)
        if not classify(conn).h_rigid:
            continue
        count += 1
        d = space.dim_h
        nt = nabla_torsion(conn)
        scale = max(1.0, float(np.max(np.abs(nt))))
        traces = np.einsum("itxi->tx", nt[:d, d:, :d, :d])
        assert np.max(np.abs(traces)) <= 1e-9 * scale
    assert count >= 100


def test_normal_spaces_have_no_distortion():
    rng = np.random.default_rng(105)
    h_normal_count = 0
    for _ in range(N_CASES):
        space = random_space(rng)
        conn = canonical_connection(space)
        flags = classify(conn)
        pack = distortion(space)
        scale = max(1.0, float(np.max(np.abs(space.c)))) ** 3
        if flags.h_normal:
            h_normal_count += 1
            assert np.max(np.abs(pack.t2)) <= 1e-8 * scale
            if flags.vm_integrable:
                assert np.max(np.abs(pack.t1)) <= 1e-8 * scale
    assert h_normal_count >= 50


def test_riemann_tensor_antisymmetries():
    rng = np.random.default_rng(106)
    for _ in range(N_CASES):
        space = random_space(rng)
        rm = riemann(canonical_connection(space))
        scale = max(1.0, float(np.max(np.abs(rm))))
        assert np.allclose(rm, -rm.transpose(1, 0, 2, 3), atol=1e-9 * scale)
        assert np.allclose(rm, -rm.transpose(0, 1, 3, 2), atol=1e-9 * scale)


def test_feasible_rho1_is_sound_and_maximal():
    rng = np.random.default_rng(107)
    feasible = 0
    for _ in range(N_CASES):
        space = random_space(rng)
        d = space.dim_h
        form = bg_form(space, float(rng.uniform(0.0, 0.95)))
        q = form.q
        scale = max(1.0, float(np.max(np.abs(q))))
        rho2 = float(10.0 ** rng.uniform(-2.0, 2.0))
        rho1 = feasible_rho1(form, rho2)
        shifted = q.copy()
        shifted[d:, d:] -= rho2 * np.eye(space.dim - d)
        if rho1 is None:
            assert np.linalg.eigvalsh(shifted).min() < 1e-9 * scale
            continue
        feasible += 1
        shifted[:d, :d] -= rho1 * np.eye(d)
        assert np.linalg.eigvalsh(shifted).min() >= -1e-7 * scale
        shifted[:d, :d] -= 1e-4 * scale * np.eye(d)
        assert np.linalg.eigvalsh(shifted).min() < 0.0
    assert feasible >= 30


def _bound_fingerprint(space):
    rows = {}
    for label, result in (
        ("main", bound_main(space, 0.2)),
        ("t1zero", bound_t1zero(space, 0.2)),
        ("asn", bound_asn(space, 0.2, samples=20000)),
        ("sntf", bound_sntf(space)),
    ):
        if result is None:
            rows[label] = None
        else:
            rows[label] = (result.value, result.omega, result.chi, result.psi)
    best = optimize(space, x_points=200, asn_samples=10000).best
    rows["best"] = None if best is None else best.value
    return rows


def test_bounds_are_invariant_under_vertical_rescaling():
    # full example coverage: every builtin at a reference and a sheared point
    cases = [
        ("so4_twisted", {}),
        ("so4_twisted", {"b": 0.3}),
        ("so3_twisted", {}),
        ("so3_twisted", {"c": 0.2}),
        ("so4_alt", {}),
        ("twisted_spheres", {}),
    ]
    for name, kw in cases:
        space = load_builtin(name, **kw)
        base = _bound_fingerprint(space)
        for t in (0.1, 10.0):
            scaled = _bound_fingerprint(rescale_vertical(space, t))
            assert scaled.keys() == base.keys()
            for key in base:
                a, b = base[key], scaled[key]
                if a is None or b is None:
                    assert a is None and b is None, (name, kw, t, key)
                    continue
                a = np.atleast_1d(np.asarray(a, dtype=float))
                b = np.atleast_1d(np.asarray(b, dtype=float))
                nan = np.isnan(a)
                assert np.array_equal(nan, np.isnan(b)), (name, kw, t, key)
                assert np.allclose(a[~nan], b[~nan], atol=1e-8, rtol=1e-8), (
                    name, kw, t, key,
                )
