import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dualmink import group as grp
from dualmink.body import BodySpec, cone_volume_exact_2d, dual_curvature_exact_2d, wulff_support
from dualmink.conditions import ConditionError, check_mass_inequality
from dualmink.measure import DiscreteMeasure, orbit_partition
from dualmink.quadrature import ball_volume, circle_grid
from dualmink.samplers import random_invariant_measure
from dualmink.solver import (
    SolveConfig,
    SolveResult,
    _Objective,
    entropy,
    phi,
    solve,
    solve_log_with_equality,
    verify,
)

AXES2 = np.array([[1.0, 0], [-1, 0], [0, 1], [0, -1]])
S2 = grp.sign_group(2)
Q2 = circle_grid(100_000)


def polygon(k, h=1.0, phase=0.0):
    a = phase + 2 * np.pi * np.arange(k) / k
    return np.column_stack([np.cos(a), np.sin(a)]), np.full(k, h)


def test_entropy_examples():
    mu = DiscreteMeasure.from_atoms([[1.0, 0], [0, 1]], [1, 3])
    assert entropy(mu, [1, 1]) == 0
    assert entropy(mu, [2.5, 2.5]) == pytest.approx(-math.log(2.5))
    assert entropy(mu, [math.e, math.e ** 2]) == pytest.approx(-7 / 4)
    with pytest.raises(ValueError):
        entropy(mu, [1, 0])


def test_phi_scale_invariance():
    mu = DiscreteMeasure.from_atoms(AXES2, [1, 1, 2, 2])
    B = BodySpec(AXES2, [1, 1.3, 0.8, 0.9])
    base = phi(mu, B, 1.2, Q2)
    for c in (0.5, 2, 10):
        assert phi(mu, B.scaled(c), 1.2, Q2) == pytest.approx(base, abs=1e-9)


def test_phi_ball_closed_form():
    U, h = polygon(360, 2.0)
    mu = DiscreteMeasure.from_atoms(U, np.ones(360))
    for q in (0.5, 1.0, 1.5):
        expect = math.log(ball_volume(2)) / q
        assert phi(mu, BodySpec(U, h), q, Q2) == pytest.approx(expect, abs=1e-4)


def test_phi_wulff_monotone():
    U, _ = polygon(8)
    h = np.array([1, 3.0, 1, 1, 1, 3.0, 1, 1])  # the large values get trimmed
    mu = DiscreteMeasure.from_atoms(U, np.ones(8))
    B = BodySpec(U, h)
    trimmed = B.with_h(wulff_support(B))
    assert np.all(trimmed.h <= h + 1e-12) and np.any(trimmed.h < h - 1e-6)
    assert phi(mu, trimmed, 1.0, Q2) >= phi(mu, B, 1.0, Q2)


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1), st.floats(0.4, 1.8))
def test_gradient_matches_finite_differences(seed, q):
    rng = np.random.default_rng(seed)
    mu = random_invariant_measure(S2, rng, 4)
    if mu.size < 6:
        return
    obj = _Objective(mu, orbit_partition(mu, S2), q, circle_grid(20_000))
    x = rng.uniform(-0.1, 0.1, obj.K)
    _, g = obj(x)[:2]
    eps = 1e-7
    fd = np.array([(obj(x + eps * e)[0] - obj(x - eps * e)[0]) / (2 * eps) for e in np.eye(obj.K)])
    assert np.allclose(g, fd, rtol=1e-5, atol=1e-5 * np.abs(g).max())


def test_square():
    R = solve(DiscreteMeasure.from_atoms(AXES2, np.ones(4)), S2, SolveConfig(q=2.0))
    assert R.converged and R.residual_tv < 1e-3
    assert np.allclose(R.solution.h, 1.0, rtol=1e-6)


def test_triangle():
    U, h = polygon(3, 1.0, np.pi / 2)
    mu = DiscreteMeasure.from_atoms(U, np.full(3, math.sqrt(3)))
    R = solve(mu, grp.cyclic_2d(3), SolveConfig(q=2.0))
    assert R.converged and R.residual_tv < 1e-3
    assert np.allclose(R.solution.h, 1.0, rtol=1e-5)


def test_octagon_q1():
    U, _ = polygon(8)
    mu = DiscreteMeasure.from_atoms(U, np.ones(8))
    R = solve(mu, S2, SolveConfig(q=1.0))
    assert R.converged and R.residual_tv < 1e-3


def test_generic_instance_and_trace():
    mu = random_invariant_measure(S2, np.random.default_rng(3), 3)
    R = solve(mu, S2, SolveConfig(q=1.3))
    assert R.converged and R.residual_tv < 1e-3
    assert all(b >= a - 1e-12 for a, b in zip(R.phi_trace, R.phi_trace[1:]))
    # orbit-constant h and the strict mass inequality for the recovered measure
    for orb in orbit_partition(mu, S2):
        assert np.ptp(R.solution.h[orb]) < 1e-12
    nu = DiscreteMeasure(R.solution.normals, dual_curvature_exact_2d(R.solution, 1.3), 2)
    assert check_mass_inequality(nu, S2, 1.3).satisfied


def test_perturbation_detected():
    mu = DiscreteMeasure.from_atoms(AXES2, np.ones(4))
    R = solve(mu, S2, SolveConfig(q=2.0))
    h = R.body.h.copy()
    h[[0, 1]] *= 1.1
    bad = SolveResult(R.body.with_h(h), R.scale, math.nan, 0, False, [])
    assert verify(mu, bad, 2.0) > 1e-2


def test_condition_failure():
    mu = DiscreteMeasure.from_atoms(AXES2, [3, 3, 1, 1])
    with pytest.raises(ConditionError):
        solve(mu, S2, SolveConfig(q=2.0))
    with pytest.raises(ConditionError):
        solve(mu, grp.trivial_group(2), SolveConfig(q=1.0))


def test_rectangle_equality_split():
    mu = DiscreteMeasure.from_atoms(AXES2, np.full(4, 1.4))
    R = solve_log_with_equality(mu, S2, SolveConfig(q=2.0))
    assert R.residual_tv < 1e-3
    assert np.allclose(cone_volume_exact_2d(R.solution), 1.4, rtol=1e-6)


def test_segment_base_case():
    mu = DiscreteMeasure.from_atoms([[1.0], [-1.0]], [2.0, 2.0], 1)
    R = solve_log_with_equality(mu, grp.sign_group(1), SolveConfig(q=1.0))
    assert np.allclose(R.solution.h, 2.0)


def test_prism_split():
    d = 2 ** -0.5
    U = np.array([[1.0, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [d, d, 0], [-d, -d, 0],
                  [0, 0, 1], [0, 0, -1]])
    # plane mass 6 of 9 = 2/3: equality on the e1e2-plane
    mu = DiscreteMeasure.from_atoms(U, [1, 1, 1, 1, 1, 1, 1.5, 1.5])
    R = solve_log_with_equality(mu, grp.sign_group(3), SolveConfig(q=3.0))
    assert R.residual_tv < 1e-3


def test_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(q=0.0)
    with pytest.raises(ValueError):
        SolveConfig(q=1.0, grad_tol=0.0)
