"""Finite orthogonal matrix groups.

A :class:`FiniteGroup` is an explicit, deduplicated list of orthogonal
matrices closed under multiplication.  Groups are built from generators by
:func:`close_generators`; a handful of named constructors cover the groups
used throughout the test-suite and the CLI.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    DimensionError,
    Subspace,
    is_orthogonal,
    span_of,
    unit,
)

DEDUP_TOL = 1e-8
MAX_ORDER = 10_000
IRREDUCIBLE_SEED = 20240611


class GroupError(ValueError):
    """Invalid generators or a closure that does not terminate."""


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    elements: tuple
    n: int

    def __post_init__(self):
        els = []
        for g in self.elements:
            g = np.array(g, dtype=float)
            g.setflags(write=False)
            els.append(g)
        object.__setattr__(self, "elements", tuple(els))

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def stack(self) -> np.ndarray:
        """Elements as an array of shape (|G|, n, n)."""
        return np.stack(self.elements)

    def __repr__(self):
        return f"FiniteGroup(n={self.n}, order={self.order})"


def _find(mats, g, tol=DEDUP_TOL):
    for i, h in enumerate(mats):
        if np.max(np.abs(h - g)) < tol:
            return i
    return -1


def close_generators(gens, n: int | None = None, max_order: int = MAX_ORDER) -> FiniteGroup:
    """Smallest multiplicatively closed set containing ``gens`` and I."""
    gens = [np.asarray(g, dtype=float) for g in gens]
    if n is None:
        if not gens:
            raise GroupError("ambient dimension needed when no generators are given")
        n = gens[0].shape[0]
    if max_order < 1:
        raise GroupError("max_order must be >= 1")
    for g in gens:
        if g.shape != (n, n):
            raise DimensionError(f"generator of shape {g.shape}, expected {(n, n)}")
        if not is_orthogonal(g, 1e-8):
            raise GroupError("generator is not orthogonal")
    store = np.empty((64, n, n))
    store[0] = np.eye(n)
    count = 1
    frontier = [np.eye(n)]
    while frontier:
        new = []
        for a in frontier:
            for s in gens:
                g = s @ a
                diff = np.abs(store[:count] - g).reshape(count, -1).max(axis=1)
                if np.any(diff < DEDUP_TOL):
                    continue
                if count >= max_order:
                    raise GroupError(
                        f"infinite or too-large group (closure exceeds {max_order} elements)")
                if count == store.shape[0]:
                    store = np.concatenate([store, np.empty_like(store)])
                store[count] = g
                count += 1
                new.append(g)
        frontier = new
    return FiniteGroup(tuple(store[:count]), n)


def from_elements(mats, n: int | None = None) -> FiniteGroup:
    """Close an explicit element list (duplicates removed)."""
    return close_generators(mats, n)


def fixed_subspace(G: FiniteGroup) -> Subspace:
    """Intersection of the kernels of ``g - I``."""
    n = G.n
    A = np.vstack([g - np.eye(n) for g in G])
    _, s, Vt = np.linalg.svd(A)
    s_full = np.zeros(n)
    s_full[: s.size] = s
    null = Vt[s_full <= 1e-9 * max(1.0, s_full.max())]
    if null.shape[0] == 0:
        return Subspace.zero(n)
    return span_of(null, n)


def orbit(G: FiniteGroup, v, tol: float = 1e-9) -> list[np.ndarray]:
    """Distinct images ``g v``; ``v`` is normalized first."""
    v = unit(v)
    if v.shape[0] != G.n:
        raise DimensionError("vector and group dimensions differ")
    out: list[np.ndarray] = []
    for g in G:
        w = g @ v
        if not any(np.linalg.norm(w - u) < tol for u in out):
            out.append(w)
    return out


def is_irreducible(G: FiniteGroup, trials: int = 8, seed: int = IRREDUCIBLE_SEED,
                   tol: float = 1e-8) -> bool:
    """Probabilistic irreducibility test.

    A real orthogonal representation is irreducible iff every symmetric matrix
    in its commutant is scalar.  Random symmetric matrices are averaged over
    the group; a non-scalar average certifies reducibility.
    """
    n = G.n
    if n == 1:
        return True
    rng = np.random.default_rng(seed)
    stack = G.stack()
    for _ in range(trials):
        A = rng.standard_normal((n, n))
        A = A + A.T
        S = np.einsum("gij,jk,glk->il", stack, A, stack) / G.order
        dev = np.linalg.norm(S - np.trace(S) / n * np.eye(n))
        if dev > tol * np.linalg.norm(A):
            return False
    return True


def is_invariant_subspace(G: FiniteGroup, S: Subspace, tol: float = 1e-8) -> bool:
    """True iff ``P_S`` commutes with every element of ``G``."""
    if S.n != G.n:
        raise DimensionError("subspace and group dimensions differ")
    P = S.projector
    return all(np.linalg.norm(P @ g - g @ P, 2) < tol for g in G)


def invariant_closure(G: FiniteGroup, vectors) -> Subspace:
    """Smallest G-invariant subspace containing ``vectors``."""
    V = np.asarray(vectors, dtype=float)
    if V.size == 0:
        return Subspace.zero(G.n)
    V = np.atleast_2d(V)
    if V.shape[1] != G.n:
        raise DimensionError("vectors and group dimensions differ")
    images = np.einsum("gij,kj->gki", G.stack(), V).reshape(-1, G.n)
    return span_of(images, G.n)


def restrict(G: FiniteGroup, S: Subspace, tol: float = 1e-8) -> FiniteGroup:
    """The action of ``G`` on an invariant subspace, in the basis of ``S``."""
    if not is_invariant_subspace(G, S, tol):
        raise GroupError("subspace is not G-invariant")
    k = S.dim
    if k == 0:
        return FiniteGroup((np.zeros((0, 0)),), 0)
    B = S.basis
    mats = []
    for g in G:
        r = B.T @ g @ B
        if _find(mats, r) < 0:
            mats.append(r)
    return FiniteGroup(tuple(mats), k)


# --------------------------------------------------------------------------
# named groups


def rotation2(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def sign_group(n: int) -> FiniteGroup:
    """{I, -I}."""
    return close_generators([-np.eye(n)], n)


def trivial_group(n: int) -> FiniteGroup:
    return FiniteGroup((np.eye(n),), n)


def cyclic_2d(k: int) -> FiniteGroup:
    """Rotations of the plane by multiples of 2*pi/k."""
    return close_generators([rotation2(2 * math.pi / k)], 2)


def dihedral_2d(k: int) -> FiniteGroup:
    return close_generators([rotation2(2 * math.pi / k), np.diag([1.0, -1.0])], 2)


def even_sign_changes(n: int) -> FiniteGroup:
    """Diagonal sign changes with an even number of minus signs."""
    gens = []
    for i in range(n - 1):
        d = np.ones(n)
        d[i] = d[i + 1] = -1
        gens.append(np.diag(d))
    return close_generators(gens, n)


def klein_four() -> FiniteGroup:
    return close_generators([np.diag([1.0, -1, -1]), np.diag([-1.0, 1, -1])], 3)


def prism_group(m: int) -> FiniteGroup:
    """Rotations of a regular m-gonal prism: <R_{2pi/m} about e3, pi about e1>."""
    R = np.eye(3)
    R[:2, :2] = rotation2(2 * math.pi / m)
    S = np.diag([1.0, -1.0, -1.0])
    return close_generators([R, S], 3)


def cube_rotation_group(n: int) -> FiniteGroup:
    """Rotation group of the cube [-1,1]^n: signed permutations with det +1."""
    if n == 1:
        return trivial_group(1)
    gens = []
    for i in range(n - 1):
        g = np.eye(n)
        g[i, i] = g[i + 1, i + 1] = 0.0
        g[i + 1, i] = 1.0
        g[i, i + 1] = -1.0
        gens.append(g)
    return close_generators(gens, n)


def diagonal_rotation_group(k: int) -> FiniteGroup:
    """Finite surrogate of the diagonal rotation group diag(R, R) on R^4."""
    g = np.zeros((4, 4))
    g[:2, :2] = g[2:, 2:] = rotation2(2 * math.pi / k)
    return close_generators([g], 4)


def product_group(*groups: FiniteGroup) -> FiniteGroup:
    """Block-diagonal direct product G1 x ... x Gm."""
    n = sum(G.n for G in groups)
    mats = []
    for combo in itertools.product(*[G.elements for G in groups]):
        M = np.zeros((n, n))
        o = 0
        for g in combo:
            k = g.shape[0]
            M[o:o + k, o:o + k] = g
            o += k
        mats.append(M)
    return FiniteGroup(tuple(mats), n)


NAMED = {
    "sign": sign_group,
    "cyclic2": cyclic_2d,
    "dihedral2": dihedral_2d,
    "even_signs": even_sign_changes,
    "klein4": lambda: klein_four(),
    "prism": prism_group,
    "cube": cube_rotation_group,
    "diag_rot4": diagonal_rotation_group,
}
