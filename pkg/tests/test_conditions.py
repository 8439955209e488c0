import numpy as np
import pytest
from hypothesis import given, strategies as st

from dualmink import group as grp
from dualmink.conditions import (
    ConditionError,
    check_classical,
    check_concentration,
    check_mass_inequality,
    equivalence_audit,
    mass_bound,
)
from dualmink.geometry import Subspace
from dualmink.measure import DiscreteMeasure
from dualmink.samplers import cross_polytope_measure, random_invariant_measure, regression_corpus

S2 = grp.sign_group(2)
AXES2 = np.array([[1.0, 0], [-1, 0], [0, 1], [0, -1]])


def axis_measure(a, b):
    return DiscreteMeasure.from_atoms(AXES2, [a, a, b, b])


def test_mass_inequality_examples():
    mu = cross_polytope_measure(2)
    r = check_mass_inequality(mu, S2, 1.5)
    assert r.satisfied and r.worst_ratio == pytest.approx(0.5) and r.bound == pytest.approx(2 / 3)
    assert not check_mass_inequality(mu, S2, 2.0).satisfied
    assert check_mass_inequality(mu, S2, 1.2).satisfied


def test_irreducible_vacuous():
    mu = random_invariant_measure(grp.cyclic_2d(3), np.random.default_rng(0), 2)
    for q in (0.5, 1.0, 1.9):
        r = check_mass_inequality(mu, grp.cyclic_2d(3), q)
        assert r.satisfied and r.candidates == 0
    assert check_concentration(mu, grp.cyclic_2d(3)).satisfied


def test_concentration_examples():
    r = check_concentration(cross_polytope_measure(2), S2)
    assert r.satisfied and len(r.equality_cases) == 2
    L, M = r.equality_cases[0]
    assert L.dim + M.dim == 2
    r = check_concentration(axis_measure(0.35, 0.15), S2)
    assert not r.satisfied
    assert r.worst_subspace.equals(Subspace.coordinate(2, [0]))
    assert r.worst_ratio == pytest.approx(0.7)


def test_classical_examples():
    cube = grp.cube_rotation_group(3)
    mu = cross_polytope_measure(3, 1 / 6)
    g = check_concentration(mu, cube)
    c = check_classical(mu, "concentration")
    assert g.satisfied and g.candidates == 0
    assert c.satisfied and c.equality_cases
    line = DiscreteMeasure.from_atoms([[0, 0, 1], [0, 0, -1]], [1, 1])
    assert not check_classical(line, "concentration").satisfied
    rng = np.random.default_rng(4)
    generic = DiscreteMeasure.from_atoms(rng.standard_normal((12, 3)), np.ones(12))
    rep = check_classical(generic, "concentration")
    assert rep.satisfied and not rep.equality_cases


def test_audit_examples():
    a = equivalence_audit(cross_polytope_measure(3), grp.even_sign_changes(3))
    assert a.g_report.satisfied and a.classical_report.satisfied and a.consistent
    a = equivalence_audit(axis_measure(0.45, 0.05), S2)
    assert not a.g_report.satisfied and not a.classical_report.satisfied and a.consistent
    with pytest.raises(ConditionError):
        equivalence_audit(cross_polytope_measure(2), grp.trivial_group(2))


def test_requires_invariance():
    with pytest.raises(ConditionError):
        check_concentration(DiscreteMeasure.from_atoms([[1.0, 0]], [1]), S2)


def test_corpus_implication():
    for name, mu, G in regression_corpus(per_group=4):
        a = equivalence_audit(mu, G)
        assert a.implication_holds, name


@given(st.integers(0, 2**32 - 1), st.floats(0.2, 1.9))
def test_classical_matches_sign_group(seed, q):
    rng = np.random.default_rng(seed)
    mu = random_invariant_measure(S2, rng, int(rng.integers(1, 4)))
    a = check_mass_inequality(mu, S2, q)
    b = check_classical(mu, "mass_inequality", q=q)
    assert a.satisfied == b.satisfied
    assert a.worst_ratio == pytest.approx(b.worst_ratio, abs=1e-12)


@given(st.integers(0, 2**32 - 1), st.floats(0.3, 3.0), st.floats(0.05, 1.0))
def test_monotone_in_q(seed, q, frac):
    rng = np.random.default_rng(seed)
    G = grp.klein_four()
    mu = random_invariant_measure(G, rng, int(rng.integers(1, 3)))
    if check_mass_inequality(mu, G, q).satisfied:
        assert check_mass_inequality(mu, G, q * frac).satisfied


def test_mass_bound():
    assert mass_bound(1, 2.0) == 0.5
    assert mass_bound(3, 2.0) == 1.0
