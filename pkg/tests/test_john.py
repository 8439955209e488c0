import numpy as np
import pytest
from hypothesis import given, strategies as st

from dualmink import group as grp
from dualmink.body import BodySpec
from dualmink.geometry import Subspace
from dualmink.john import BlockEllipsoid, axis_blocks, ellipsoid_from_axes, john_ellipsoid, john_sandwich_check
from dualmink.samplers import random_invariant_body

AXES2 = np.array([[1.0, 0], [-1, 0], [0, 1], [0, -1]])


def test_square_gives_disk():
    E = john_ellipsoid(BodySpec(AXES2, np.ones(4)))
    assert E.dims == [2] and E.semi_axes == pytest.approx([1.0])


def test_rectangle_blocks():
    a, b = 2.0, 0.7
    K = BodySpec(AXES2, [a, a, b, b])
    E = john_ellipsoid(K, grp.sign_group(2))
    assert E.dims == [1, 1]
    assert E.semi_axes == pytest.approx([b, a], rel=1e-9)
    assert E.subspaces[0].equals(Subspace.coordinate(2, [1]))
    assert np.allclose(E.support(AXES2), K.h, rtol=1e-9)
    assert john_sandwich_check(K, E)


def test_cube_gives_ball():
    cube = BodySpec(np.vstack([np.eye(3), -np.eye(3)]), np.ones(6))
    E = john_ellipsoid(cube, grp.cube_rotation_group(3))
    assert E.dims == [3] and E.semi_axes == pytest.approx([1.0])


def test_sandwich_violation():
    K = BodySpec(AXES2, np.ones(4))
    big = ellipsoid_from_axes([Subspace.full(2)], [2.0])
    assert not john_sandwich_check(K, big)


def test_block_validation():
    with pytest.raises(ValueError):
        BlockEllipsoid(((Subspace.coordinate(2, [0]), 1.0),), 2)
    E = ellipsoid_from_axes(axis_blocks(3, [1, 2]), [0.5, 2.0])
    assert E.volume_ratio() == pytest.approx(0.5 * 4.0)


@given(st.integers(0, 2**32 - 1), st.sampled_from(["sign2", "cyclic3", "dihedral5"]))
def test_sandwich_random_invariant_polygons(seed, name):
    # with Fix(G) = {0} the John ellipsoid is centred at the origin
    G = {"sign2": grp.sign_group(2), "cyclic3": grp.cyclic_2d(3), "dihedral5": grp.dihedral_2d(5)}[name]
    K = random_invariant_body(G, np.random.default_rng(seed))
    E = john_ellipsoid(K, G)
    assert john_sandwich_check(K, E)


@pytest.mark.parametrize("G", [grp.klein_four(), grp.prism_group(4), grp.dihedral_2d(4)],
                         ids=["klein4", "prism4", "dihedral4"])
def test_invariant_blocks(G):
    rng = np.random.default_rng(9)
    for _ in range(3):
        K = random_invariant_body(G, rng)
        E = john_ellipsoid(K, G)
        assert john_sandwich_check(K, E)
        assert sum(E.dims) == G.n
