import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from dualmink.geometry import (
    DimensionError,
    Subspace,
    complement,
    grassmann_distance,
    is_orthogonal,
    project,
    random_orthogonal,
    span_of,
)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def test_project_examples():
    e1 = Subspace.coordinate(2, [0])
    assert np.allclose(project(e1, [3, 4]), [3, 0])
    assert np.allclose(project(Subspace.zero(3), [1, 2, 3]), 0)
    d = span_of([[1, 1]])
    assert np.allclose(project(d, [1, 0]), [0.5, 0.5])


def test_span_examples():
    S = span_of([[1, 0], [2, 0]])
    assert S.dim == 1 and S.equals(Subspace.coordinate(2, [0]))
    assert span_of([[1, 0], [0, 1]]).dim == 2
    P = span_of([[1, 1, 0], [1, -1, 0]])
    assert P.dim == 2 and P.equals(Subspace.coordinate(3, [0, 1]))


def test_grassmann_examples():
    e1, e2 = Subspace.coordinate(2, [0]), Subspace.coordinate(2, [1])
    assert grassmann_distance(e1, e1) == pytest.approx(0, abs=1e-12)
    assert grassmann_distance(e1, e2) == pytest.approx(1)
    t = math.pi / 4
    assert grassmann_distance(e1, span_of([[math.cos(t), math.sin(t)]])) == pytest.approx(math.sin(t))


def test_complement_examples():
    assert complement(Subspace.coordinate(3, [0])).equals(Subspace.coordinate(3, [1, 2]))
    assert complement(Subspace.full(4)).dim == 0
    c = complement(span_of([[1, 1]]))
    assert c.dim == 1 and c.equals(span_of([[1, -1]]))


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        project(Subspace.coordinate(3, [0]), [1, 2])


@st.composite
def subspaces(draw, n=4):
    k = draw(st.integers(0, n))
    seed = draw(st.integers(0, 2**32 - 1))
    R = random_orthogonal(n, np.random.default_rng(seed))
    return Subspace(R[:, :k], n)


@given(subspaces(), arrays(float, 4, elements=finite))
def test_projection_idempotent_and_pythagoras(S, x):
    p = project(S, x)
    assert np.allclose(project(S, p), p, atol=1e-10)
    lhs = x @ x
    rhs = p @ p + project(complement(S), x) @ project(complement(S), x)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, lhs)


@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_grassmann_metric(seed, k):
    rng = np.random.default_rng(seed)
    E, F, H = (Subspace(random_orthogonal(4, rng)[:, :k], 4) for _ in range(3))
    assert grassmann_distance(E, F) == grassmann_distance(F, E)
    assert grassmann_distance(E, H) <= grassmann_distance(E, F) + grassmann_distance(F, H) + 1e-9


@given(st.integers(0, 2**32 - 1))
def test_invariant_subspace_commutes_with_map(seed):
    rng = np.random.default_rng(seed)
    R = random_orthogonal(3, rng)
    # g = R diag(1, 1, -1) R^T preserves S = R e1 e2-plane; a generic rotation does not
    g = R @ np.diag([1.0, 1.0, -1.0]) @ R.T
    S = Subspace(R[:, :2], 3)
    assert is_orthogonal(g)
    assert np.allclose(g @ S.projector, S.projector @ g, atol=1e-10)
    h = random_orthogonal(3, rng)
    moved = not np.allclose(h @ S.projector @ h.T, S.projector, atol=1e-8)
    assert moved == (not np.allclose(h @ S.projector, S.projector @ h, atol=1e-8))
