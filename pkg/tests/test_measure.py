import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from dualmink import group as grp
from dualmink.geometry import Subspace, complement, span_of
from dualmink.group import is_invariant_subspace, is_irreducible
from dualmink.measure import (
    DiscreteMeasure,
    atom_span_subspaces,
    candidate_invariant_subspaces,
    is_G_invariant,
    membership,
    restrict_measure,
    second_moment,
    subspace_mass,
    symmetrize,
)
from dualmink.samplers import CORPUS_GROUPS, cross_polytope_measure, random_invariant_measure


def dirac(u, w=1.0):
    return DiscreteMeasure.from_atoms([u], [w])


def test_invariance_examples():
    S = grp.sign_group(2)
    assert is_G_invariant(cross_polytope_measure(2), S)
    assert not is_G_invariant(dirac([1, 0]), S)
    assert is_G_invariant(cross_polytope_measure(3, 1 / 6), grp.cube_rotation_group(3))


def test_symmetrize_examples():
    m = symmetrize(dirac([1.0, 0]), grp.sign_group(2))
    assert m.size == 2 and np.allclose(m.weights, 0.5)
    m = symmetrize(dirac([0.0, 1]), grp.cyclic_2d(3))
    assert m.size == 3 and np.allclose(m.weights, 1 / 3)


def test_subspace_mass_examples():
    for n in (2, 3, 4):
        mu = cross_polytope_measure(n, 1 / (2 * n))
        assert subspace_mass(mu, Subspace.coordinate(n, [0])) == pytest.approx(1 / n)
        assert subspace_mass(mu, Subspace.full(n)) == pytest.approx(1)
        assert subspace_mass(mu, Subspace.zero(n)) == 0


def test_second_moment_examples():
    n = 4
    assert np.allclose(second_moment(cross_polytope_measure(n, 1 / (2 * n))), np.eye(n) / n)
    assert np.allclose(second_moment(dirac([1.0, 0])), [[1, 0], [0, 0]])
    tri = symmetrize(dirac([0.0, 1], 3.0), grp.cyclic_2d(3))
    assert np.allclose(second_moment(tri), 1.5 * np.eye(2))


def test_candidates_examples():
    mu = cross_polytope_measure(3)
    cands = [S for S in candidate_invariant_subspaces(mu, grp.even_sign_changes(3)) if 0 < S.dim < 3]
    coords = [Subspace.coordinate(3, a) for a in ([0], [1], [2], [0, 1], [0, 2], [1, 2])]
    assert len(cands) == 6
    assert all(any(S.equals(C) for C in cands) for S in coords)
    assert not [S for S in candidate_invariant_subspaces(mu, grp.cube_rotation_group(3))
                if 0 < S.dim < 3]
    sq = [S for S in candidate_invariant_subspaces(cross_polytope_measure(2), grp.sign_group(2))
          if 0 < S.dim < 2]
    assert len(sq) == 2


def test_restrict_examples():
    n = 3
    mu = cross_polytope_measure(n, 1 / (2 * n))
    r = restrict_measure(mu, Subspace.coordinate(n, [0, 1]))
    assert r.n == 2 and r.size == 4 and np.allclose(r.weights, 1 / 6)
    assert restrict_measure(mu, span_of([[1, 1, 1]])).size == 0
    full = restrict_measure(mu, Subspace.full(n))
    assert full.size == mu.size and full.total == pytest.approx(mu.total)


@pytest.mark.parametrize("name", sorted(CORPUS_GROUPS))
def test_measure_properties(name):
    G = CORPUS_GROUPS[name]()
    rng = np.random.default_rng(hash(name) % 2**32)
    mu = random_invariant_measure(G, rng, 3)
    M = second_moment(mu)
    assert np.trace(M) == pytest.approx(mu.total, abs=1e-12)
    again = symmetrize(mu, G)
    assert again.total == pytest.approx(mu.total, rel=1e-12)
    assert again.size == mu.size
    for S in candidate_invariant_subspaces(mu, G):
        assert is_invariant_subspace(G, S)
    if is_irreducible(G):
        assert np.linalg.norm(M - mu.total / G.n * np.eye(G.n), 2) < 1e-9
        for xi in atom_span_subspaces(mu):
            r = subspace_mass(mu, xi) / mu.total
            assert r <= xi.dim / G.n + 1e-12
            if r >= xi.dim / G.n - 1e-12:
                assert np.all(membership(mu, xi) | membership(mu, complement(xi)))


@given(st.integers(0, 2**32 - 1), st.sampled_from(["cyclic3", "klein4", "prism4", "cube3"]))
def test_symmetrize_idempotent(seed, name):
    G = CORPUS_GROUPS[name]()
    rng = np.random.default_rng(seed)
    raw = DiscreteMeasure.from_atoms(rng.standard_normal((3, G.n)), rng.uniform(0.5, 2, 3))
    a = symmetrize(raw, G)
    b = symmetrize(a, G)
    assert a.total == pytest.approx(raw.total, rel=1e-12)
    assert is_G_invariant(a, G)
    order = np.lexsort(a.directions.T)
    order_b = np.lexsort(b.directions.T)
    assert np.allclose(a.directions[order], b.directions[order_b], atol=1e-12)
    assert np.allclose(a.weights[order], b.weights[order_b], atol=1e-12)


def test_rejects_bad_weights():
    with pytest.raises(ValueError):
        DiscreteMeasure.from_atoms([[1, 0]], [-1.0])
    assert math.isclose(dirac([3.0, 4.0]).directions[0][0], 0.6)
