"""Discrete measures on the unit sphere."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import DimensionError, Subspace, project, span_of, subspace_sum, unit_rows
from .group import FiniteGroup, invariant_closure

ATOM_TOL = 1e-9          # angular distance under which two atoms coincide
MEMBER_TOL = 1e-9        # distance-to-projection for "atom lies in L"
MAX_SUBSETS = 2 ** 20


class MeasureError(ValueError):
    pass


class EnumerationOverflow(RuntimeError):
    """Candidate subspace enumeration exceeded its cap."""


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finitely many atoms ``(u_i, w_i)`` with ``|u_i| = 1`` and ``w_i > 0``.

    Construct with :meth:`from_atoms`, which normalizes directions and merges
    coincident atoms.  An empty measure is allowed (it is what restricting to a
    subspace without atoms produces) but is flagged by :attr:`valid`.
    """

    directions: np.ndarray
    weights: np.ndarray
    n: int

    def __post_init__(self):
        U = np.array(self.directions, dtype=float).reshape(-1, self.n)
        w = np.array(self.weights, dtype=float).reshape(-1)
        if U.shape[0] != w.shape[0]:
            raise MeasureError("directions and weights differ in length")
        if np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise MeasureError("atom weights must be finite and > 0")
        U.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "directions", U)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_atoms(cls, directions, weights, n: int | None = None,
                   tol: float = ATOM_TOL) -> "DiscreteMeasure":
        U = np.asarray(directions, dtype=float)
        if n is None:
            n = U.shape[-1]
        if U.size == 0:
            return cls(np.zeros((0, n)), np.zeros(0), n)
        U = unit_rows(U.reshape(-1, n))
        w = np.broadcast_to(np.asarray(weights, dtype=float), (U.shape[0],))
        if np.any(w <= 0):
            raise MeasureError("atom weights must be > 0")
        merged_u, merged_w = _merge(U, w, tol)
        return cls(merged_u, merged_w, n)

    @property
    def size(self) -> int:
        return self.weights.shape[0]

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    @property
    def valid(self) -> bool:
        return self.size > 0 and self.total > 0

    def atom_index(self, u, tol: float = 1e-7) -> int:
        d = np.linalg.norm(self.directions - np.asarray(u, float), axis=1)
        i = int(np.argmin(d))
        return i if d[i] < tol else -1

    def scaled(self, c: float) -> "DiscreteMeasure":
        return DiscreteMeasure(self.directions, self.weights * c, self.n)

    def __repr__(self):
        return f"DiscreteMeasure(n={self.n}, atoms={self.size}, total={self.total:.6g})"


def _merge(U, w, tol):
    out_u, out_w = [], []
    for u, x in zip(U, w):
        for k, v in enumerate(out_u):
            if np.linalg.norm(u - v) < tol:
                out_w[k] += x
                break
        else:
            out_u.append(u)
            out_w.append(float(x))
    return np.array(out_u), np.array(out_w)


def _check(mu: DiscreteMeasure, G: FiniteGroup | None = None, L: Subspace | None = None):
    if G is not None and G.n != mu.n:
        raise DimensionError("measure and group dimensions differ")
    if L is not None and L.n != mu.n:
        raise DimensionError("measure and subspace dimensions differ")


def is_G_invariant(mu: DiscreteMeasure, G: FiniteGroup, tol: float = 1e-9) -> bool:
    """True iff every image atom ``(g u, w)`` is matched by an atom of equal weight."""
    _check(mu, G)
    U, w = mu.directions, mu.weights
    scale = tol * mu.total
    for g in G:
        V = U @ g.T
        D = np.linalg.norm(V[:, None, :] - U[None, :, :], axis=2)
        j = np.argmin(D, axis=1)
        if np.any(D[np.arange(len(j)), j] > 1e-7):
            return False
        if np.any(np.abs(w[j] - w) > scale):
            return False
    return True


def symmetrize(mu: DiscreteMeasure, G: FiniteGroup) -> DiscreteMeasure:
    """Group average ``(1/|G|) sum_g g_* mu``, merged onto a single atom set."""
    _check(mu, G)
    U = np.concatenate([mu.directions @ g.T for g in G])
    w = np.tile(mu.weights, G.order) / G.order
    U, w = _merge(U, w, 1e-7)
    keep = w > 1e-14 * w.sum()
    return DiscreteMeasure(U[keep], w[keep], mu.n)


def membership(mu: DiscreteMeasure, L: Subspace, tol: float = MEMBER_TOL) -> np.ndarray:
    """Boolean mask of atoms lying in ``L``."""
    _check(mu, L=L)
    if mu.size == 0:
        return np.zeros(0, dtype=bool)
    return np.linalg.norm(mu.directions - project(L, mu.directions), axis=1) < tol


def subspace_mass(mu: DiscreteMeasure, L: Subspace, tol: float = MEMBER_TOL) -> float:
    """``mu(S^{n-1} ∩ L)``."""
    return float(mu.weights[membership(mu, L, tol)].sum())


def second_moment(mu: DiscreteMeasure) -> np.ndarray:
    """``sum_i w_i u_i u_i^T``."""
    if not mu.valid:
        raise MeasureError("second moment of an empty measure")
    U = mu.directions
    return (U * mu.weights[:, None]).T @ U


def restrict_measure(mu: DiscreteMeasure, L: Subspace, tol: float = MEMBER_TOL) -> DiscreteMeasure:
    """Atoms of ``mu`` in ``L``, written in the coordinates of ``L``'s basis."""
    mask = membership(mu, L, tol)
    if L.dim == 0 or not mask.any():
        return DiscreteMeasure(np.zeros((0, L.dim)), np.zeros(0), L.dim)
    coords = mu.directions[mask] @ L.basis
    return DiscreteMeasure.from_atoms(coords, mu.weights[mask], L.dim)


def orbit_partition(mu: DiscreteMeasure, G: FiniteGroup) -> list[list[int]]:
    """Indices of atoms grouped into G-orbits (``mu`` must be G-invariant)."""
    _check(mu, G)
    U = mu.directions
    label = -np.ones(mu.size, dtype=int)
    orbits: list[list[int]] = []
    for i in range(mu.size):
        if label[i] >= 0:
            continue
        imgs = np.array([g @ U[i] for g in G])
        D = np.linalg.norm(U[:, None, :] - imgs[None, :, :], axis=2).min(axis=1)
        members = [int(j) for j in np.flatnonzero(D < 1e-7)]
        if any(label[j] >= 0 for j in members):
            raise MeasureError("atoms do not form G-orbits; symmetrize the measure first")
        for j in members:
            label[j] = len(orbits)
        orbits.append(members)
    return orbits


def candidate_invariant_subspaces(mu: DiscreteMeasure, G: FiniteGroup,
                                  max_subsets: int = MAX_SUBSETS) -> list[Subspace]:
    """All proper subspaces ``invariant_closure(G, A)`` with ``A`` ⊆ supp mu.

    The closure of ``A`` is the sum of the closures of its single atoms, so the
    candidates are exactly the proper joins of the per-orbit closures.  They are
    enumerated breadth-first and keyed by the atoms they contain.  For any
    G-invariant ``L`` the closure of ``supp mu ∩ L`` is returned, has the same
    mass and no larger dimension; checking a mass ratio bound on the returned
    list is therefore equivalent to checking it on every G-invariant subspace.
    """
    _check(mu, G)
    gens = [invariant_closure(G, u[None, :]) for u in mu.directions]
    return _join_lattice(mu, gens, max_subsets)


def atom_span_subspaces(mu: DiscreteMeasure, max_subsets: int = MAX_SUBSETS) -> list[Subspace]:
    """All proper subspaces spanned by subsets of supp mu (no symmetry)."""
    gens = [span_of(u[None, :], mu.n) for u in mu.directions]
    return _join_lattice(mu, gens, max_subsets)


def _join_lattice(mu, closures, max_subsets):
    n = mu.n
    generators, found, frontier = [], {}, []
    seen = set()
    for C in closures:
        key = frozenset(np.flatnonzero(membership(mu, C)).tolist())
        if key in seen:
            continue
        seen.add(key)
        generators.append((key, C))
        if 0 < C.dim < n:
            found[key] = C
            frontier.append((key, C))
    visited = 0
    while frontier:
        nxt = []
        for skey, S in frontier:
            if S.dim >= n - 1:
                continue
            for gkey, C in generators:
                if gkey <= skey:
                    continue
                visited += 1
                if visited > max_subsets:
                    raise EnumerationOverflow("support too large for exhaustive check")
                J = subspace_sum(S, C)
                if J.dim >= n:
                    continue
                key = frozenset(np.flatnonzero(membership(mu, J)).tolist())
                if key in found:
                    continue
                found[key] = J
                nxt.append((key, J))
        frontier = nxt
    return sorted(found.values(), key=lambda S: (S.dim, _lex(S)))


def _lex(S: Subspace):
    return tuple(np.round(np.abs(S.projector).ravel(), 9))


def atom_span(mu: DiscreteMeasure, mask) -> Subspace:
    return span_of(mu.directions[np.asarray(mask)], mu.n)
