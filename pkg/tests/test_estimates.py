import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dualmink import group as grp
from dualmink.conditions import check_mass_inequality
from dualmink.estimates import (
    admissible_t0,
    ballblock_exact,
    barrier_bound_check,
    ellipsoid_dual_quermassintegral,
    ellipsoid_entropy,
    entropy_upper_bound,
    spherical_partition,
)
from dualmink.geometry import Subspace
from dualmink.john import axis_blocks, ellipsoid_from_axes
from dualmink.measure import DiscreteMeasure
from dualmink.quadrature import ball_volume, circle_grid, make_quadrature
from dualmink.samplers import random_invariant_measure
from dualmink.solver import degenerating_phi_trace

BLOCKS2 = axis_blocks(2, [1, 1])
AXES2 = np.array([[1.0, 0], [-1, 0], [0, 1], [0, -1]])


def test_partition_examples():
    assert spherical_partition(BLOCKS2, 0.5, [[1.0, 0]]).tolist() == [0]
    assert spherical_partition(BLOCKS2, 0.5, [[2 ** -0.5, 2 ** -0.5]]).tolist() == [1]
    Q = circle_grid(1000)
    cells = spherical_partition(BLOCKS2, 0.5, Q)
    assert len(cells) == Q.size and set(cells) <= {0, 1}
    with pytest.raises(ValueError):
        spherical_partition(BLOCKS2, 0.8, Q)


def test_single_block_entropy():
    rng = np.random.default_rng(0)
    mu = random_invariant_measure(grp.sign_group(3), rng, 4)
    for b in (0.1, 0.5, 1.0):
        E = ellipsoid_from_axes([Subspace.full(3)], [b])
        assert ellipsoid_entropy(mu, E) == pytest.approx(-math.log(b))
        bound = entropy_upper_bound(mu, E, 2.0, 0.5, 0.5)
        assert bound >= -math.log(b)


def test_two_block_bound_formula():
    mu = DiscreteMeasure.from_atoms(AXES2, np.ones(4))
    b1, b2 = 0.1, 0.6
    E = ellipsoid_from_axes(BLOCKS2, [b1, b2])
    t0, delta0 = 0.2, 0.5
    # q = 2 = n: r = 2, so the bound is -(1/2) log b1 - (1/2) log b2 + t0 log b1 + C
    C = -math.log(delta0 / 2) - t0 * math.log(b2)
    expect = -0.5 * math.log(b1) - 0.5 * math.log(b2) + t0 * math.log(b1) + C
    assert entropy_upper_bound(mu, E, 2.0, delta0, t0) == pytest.approx(expect)
    assert ellipsoid_entropy(mu, E) <= expect


@given(st.integers(0, 2**32 - 1), st.floats(0.3, 2.0))
def test_entropy_bound_random(seed, q):
    rng = np.random.default_rng(seed)
    G = grp.sign_group(2)
    mu = random_invariant_measure(G, rng, 3)
    b = np.sort(rng.uniform(0.01, 1, 2))
    E = ellipsoid_from_axes(BLOCKS2, b)
    if not check_mass_inequality(mu, G, q).satisfied:
        return
    for delta0 in (0.6, 0.3, 0.1, 0.03):
        t0 = admissible_t0(mu, E, q, delta0)
        if t0 is not None:
            assert ellipsoid_entropy(mu, E) <= entropy_upper_bound(mu, E, q, delta0, t0) + 1e-12
            return


@pytest.mark.parametrize("b,q", [(0.5, 1.0), (0.2, 1.5), (1.0, 2.0)])
def test_ellipsoid_quermassintegral(b, q):
    E = ellipsoid_from_axes(axis_blocks(3, [1, 2]), [b, 1.0])
    Q = make_quadrature(3, 200_000)
    assert ellipsoid_dual_quermassintegral(E, q) == pytest.approx(
        float(np.dot(Q.weights, E.radial(Q.nodes) ** q)) / 3, rel=2e-3)
    ball = ellipsoid_from_axes([Subspace.full(3)], [b])
    assert ellipsoid_dual_quermassintegral(ball, q) == pytest.approx(ball_volume(3) * b ** q)


def test_ballblock_oracle():
    Q = make_quadrature(3, 200_000)
    r = barrier_bound_check("ballblock", {"d": 2, "m": 1, "alpha": 1.0}, Q, b_grid=(1.0, 0.5))
    for b, lhs in zip(r.b_grid, r.lhs):
        assert lhs == pytest.approx(ballblock_exact(b, 2, 1, 1.0), rel=2e-3)
    assert all(np.isfinite(r.ratios))


@pytest.mark.parametrize("kind,params", [
    ("ballblock", {"d": 2, "m": 1, "alpha": 1.0}),
    ("blockbarrier", {"ellipsoid_axes": [0.5], "d": 1, "q": 1.5}),
    ("q_gt_n", {"dims": [1, 2], "q": 4.0}),
])
def test_barrier_ratios_bounded(kind, params):
    r = barrier_bound_check(kind, params, make_quadrature(3, 50_000))
    assert r and r.ratios[0] > 0 and np.isfinite(r.ratios[0])


def test_barrier_validation():
    Q = make_quadrature(3, 1000)
    with pytest.raises(ValueError):
        barrier_bound_check("ballblock", {"d": 2, "m": 1, "alpha": 3.0}, Q)
    with pytest.raises(ValueError):
        barrier_bound_check("q_gt_n", {"dims": [1, 2], "q": 2.0}, Q)
    with pytest.raises(ValueError):
        barrier_bound_check("nope", {}, Q)


def test_degenerating_trace():
    mu = DiscreteMeasure.from_atoms(AXES2, np.ones(4))
    G = grp.sign_group(2)
    ks = [1, 10, 100, 1e3, 1e4]
    tr = degenerating_phi_trace(mu, G, 1.5, BLOCKS2, [(1 / k, 0.5) for k in ks])
    assert all(y < x for x, y in zip(tr[1:], tr[2:]))
    flat = degenerating_phi_trace(mu, G, 1.5, BLOCKS2, [(0.3, 0.5)] * 3)
    assert flat[0] == flat[1] == flat[2]
    # all mass on the collapsing axis: no decay, Phi grows instead
    bad = DiscreteMeasure.from_atoms(AXES2[:2], np.ones(2))
    tb = degenerating_phi_trace(bad, G, 1.5, BLOCKS2, [(1 / k, 0.5) for k in ks])
    assert all(y > x for x, y in zip(tb, tb[1:]))
