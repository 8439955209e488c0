"""Seeded random instances: invariant bodies, measures, and a regression corpus."""
from __future__ import annotations

import numpy as np

from . import group as grp
from scipy.spatial import ConvexHull

from .body import BodySpec, positively_spanning
from .geometry import random_orthogonal, uniform_sphere
from .measure import DiscreteMeasure, orbit_partition, symmetrize


def _seed_directions(n, count, rng, subspace_prob):
    U = uniform_sphere(n, count, rng)
    for i in range(count):
        if rng.random() < subspace_prob:
            k = int(rng.integers(1, n))
            U[i, rng.choice(n, n - k, replace=False)] = 0.0
            U[i] /= np.linalg.norm(U[i])
    return U


def random_invariant_body(G: grp.FiniteGroup, rng: np.random.Generator, seeds: int = 3,
                          h_range=(0.6, 1.4), max_tries: int = 50,
                          subspace_prob: float = 0.0) -> BodySpec:
    """Wulff shape over the G-orbits of random directions, with ``h`` constant
    on each orbit.  Orbits are added until the normals positively span.

    With ``subspace_prob > 0`` a seed is, with that probability, drawn inside a
    random coordinate subspace, which puts normals on the proper invariant
    subspaces of sign-change groups.
    """
    n = G.n
    U = _seed_directions(n, seeds, rng, subspace_prob)
    for _ in range(max_tries):
        mu = symmetrize(DiscreteMeasure.from_atoms(U, rng.uniform(*h_range, len(U)), n), G)
        if positively_spanning(mu.directions):
            # symmetrize spreads each seed value h over its orbit as h/|orbit|
            return BodySpec(mu.directions, mu.weights * _orbit_sizes(mu, G))
        U = np.vstack([U, _seed_directions(n, 1, rng, subspace_prob)])
    raise RuntimeError("could not build a bounded invariant body")


def _orbit_sizes(mu, G):
    size = np.empty(mu.size)
    for orb in orbit_partition(mu, G):
        size[orb] = len(orb)
    return size


def random_invariant_measure(G: grp.FiniteGroup, rng: np.random.Generator, seeds: int = 3,
                             w_range=(0.5, 2.0)) -> DiscreteMeasure:
    U = uniform_sphere(G.n, seeds, rng)
    return symmetrize(DiscreteMeasure.from_atoms(U, rng.uniform(*w_range, seeds), G.n), G)


def random_polygon(rng: np.random.Generator, vertices: int | None = None,
                   r_range=(0.5, 1.5), min_gap: float = 0.0, min_h: float = 0.0) -> BodySpec:
    """Convex hull of points at random angles and radii around the origin.

    Consecutive angles differ by less than pi (so the origin is interior) and
    by at least ``min_gap``; every hull edge therefore subtends at least
    ``min_gap`` at the origin.  ``min_h`` bounds the support values from
    below, keeping every edge away from the origin.
    """
    while True:
        k = vertices or int(rng.integers(3, 9))
        t = np.sort(rng.uniform(0, 2 * np.pi, k))
        gaps = np.diff(np.r_[t, t[0] + 2 * np.pi])
        if gaps.max() >= np.pi or gaps.min() < min_gap:
            continue
        r = rng.uniform(*r_range, k)
        hull = ConvexHull(np.column_stack([r * np.cos(t), r * np.sin(t)]))
        eq = hull.equations
        if np.min(-eq[:, 2]) < max(min_h, 1e-12):
            continue
        return BodySpec(eq[:, :2], -eq[:, 2])


def cross_polytope_measure(n: int, weight: float = 1.0, rotation=None) -> DiscreteMeasure:
    U = np.vstack([np.eye(n), -np.eye(n)])
    if rotation is not None:
        U = U @ np.asarray(rotation).T
    return DiscreteMeasure.from_atoms(U, np.full(2 * n, weight), n)


def conjugate(G: grp.FiniteGroup, R) -> grp.FiniteGroup:
    return grp.FiniteGroup(tuple(R @ g @ R.T for g in G), G.n)


# --------------------------------------------------------------------------
# regression corpus

CORPUS_GROUPS = {
    "sign2": lambda: grp.sign_group(2),
    "sign3": lambda: grp.sign_group(3),
    "cyclic3": lambda: grp.cyclic_2d(3),
    "cyclic4": lambda: grp.cyclic_2d(4),
    "dihedral3": lambda: grp.dihedral_2d(3),
    "klein4": grp.klein_four,
    "even_signs4": lambda: grp.even_sign_changes(4),
    "prism4": lambda: grp.prism_group(4),
    "prism6": lambda: grp.prism_group(6),
    "cube3": lambda: grp.cube_rotation_group(3),
    "diag_rot4": lambda: grp.diagonal_rotation_group(4),
    "sign2xsign1": lambda: grp.product_group(grp.sign_group(2), grp.sign_group(1)),
}


def _lower_dim_measure(G, rng, seeds):
    """Measure living on a proper G-invariant subspace, when one turns up."""
    n = G.n
    # a G-invariant proper subspace from the invariant closure of one vector
    v = uniform_sphere(n, 1, rng)[0]
    S = grp.invariant_closure(G, [v])
    if S.dim == n:
        return None
    U = rng.standard_normal((seeds, S.dim)) @ S.basis.T
    return symmetrize(DiscreteMeasure.from_atoms(U, rng.uniform(0.5, 2, seeds), n), G)


def regression_corpus(seed: int = 20240611, per_group: int = 10) -> list:
    """``(name, mu, G)`` triples of G-invariant measures with Fix(G) = {0}.

    Each group contributes generic measures, a measure with a heavy orbit,
    measures living on a proper invariant subspace when one exists, and the
    cross-polytope measure (invariant under all groups here that permute and
    flip coordinates).
    """
    rng = np.random.default_rng(seed)
    out = []
    for name, make in CORPUS_GROUPS.items():
        G = make()
        for i in range(per_group):
            kind = i % 4
            if kind == 0:
                mu = random_invariant_measure(G, rng, int(rng.integers(1, 4)))
            elif kind == 1:
                mu = random_invariant_measure(G, rng, int(rng.integers(2, 5)), (0.01, 10.0))
            elif kind == 2:
                mu = _lower_dim_measure(G, rng, int(rng.integers(1, 4)))
                if mu is None:
                    mu = random_invariant_measure(G, rng, 1)
            else:
                R = np.eye(G.n) if i < 4 else random_orthogonal(G.n, rng)
                mu = symmetrize(cross_polytope_measure(G.n, 1.0, R), G)
            out.append((f"{name}/{i}", mu, G))
    return out
