"""Origin-centred maximal-volume inscribed ellipsoids and their spectral blocks."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .body import BodySpec, vertices
from .geometry import Subspace, project, span_of
from .group import FiniteGroup, is_invariant_subspace

BLOCK_TOL = 1e-7


class JohnError(ArithmeticError):
    """The ellipsoid optimizer did not reach its optimality certificate."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True, eq=False)
class BlockEllipsoid:
    """``{x : sum_j |P_{V_j} x|^2 / b_j^2 <= 1}`` with orthogonal blocks ``V_j``.

    Blocks are sorted by ascending semi-axis ``b_j``.
    """

    blocks: tuple
    n: int
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        blocks = tuple(sorted(self.blocks, key=lambda vb: vb[1]))
        if sum(V.dim for V, _ in blocks) != self.n:
            raise ValueError("block dimensions do not add up to n")
        for V, b in blocks:
            if b <= 0:
                raise ValueError("semi-axes must be positive")
        B = np.hstack([V.basis for V, _ in blocks])
        if np.max(np.abs(B.T @ B - np.eye(self.n))) > 1e-9:
            raise ValueError("blocks are not pairwise orthogonal")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_matrix(cls, A: np.ndarray, tol: float = BLOCK_TOL, diagnostics=None) -> "BlockEllipsoid":
        """Group the eigenpairs of the SPD shape matrix ``A`` (``E = A B^n``)."""
        A = 0.5 * (A + A.T)
        lam, W = np.linalg.eigh(A)
        n = A.shape[0]
        groups = [[0]]
        for i in range(1, n):
            if lam[i] - lam[groups[-1][0]] <= tol * lam[i]:
                groups[-1].append(i)
            else:
                groups.append([i])
        blocks = []
        for g in groups:
            blocks.append((Subspace(W[:, g], n), float(np.mean(lam[g]))))
        return cls(tuple(blocks), n, diagnostics or {})

    @property
    def semi_axes(self) -> np.ndarray:
        return np.array([b for _, b in self.blocks])

    @property
    def dims(self) -> list[int]:
        return [V.dim for V, _ in self.blocks]

    @property
    def subspaces(self) -> list[Subspace]:
        return [V for V, _ in self.blocks]

    def shape_matrix(self) -> np.ndarray:
        return sum(b * V.projector for V, b in self.blocks)

    def gauge(self, X) -> np.ndarray:
        """``sqrt(sum_j |P_j x|^2 / b_j^2)``; the set is ``gauge <= 1``."""
        X = np.atleast_2d(X)
        s = sum(np.sum(project(V, X) ** 2, axis=1) / b ** 2 for V, b in self.blocks)
        return np.sqrt(s)

    def contains(self, x, tol: float = 0.0) -> bool:
        return bool(np.all(self.gauge(x) <= 1 + tol))

    def support(self, U) -> np.ndarray:
        U = np.atleast_2d(U)
        s = sum(b ** 2 * np.sum(project(V, U) ** 2, axis=1) for V, b in self.blocks)
        return np.sqrt(s)

    def radial(self, U) -> np.ndarray:
        return 1.0 / self.gauge(U)

    def volume_ratio(self) -> float:
        """``vol(E) / vol(B^n)``."""
        return float(np.prod([b ** V.dim for V, b in self.blocks]))


def _design_weights(P: np.ndarray, tol: float, max_iters: int):
    """D-optimal design on the points ``P`` by Frank-Wolfe with away steps."""
    m, n = P.shape
    u = np.full(m, 1.0 / m)
    it = 0
    gap = np.inf
    for it in range(1, max_iters + 1):
        X = P.T @ (P * u[:, None])
        g = np.einsum("ij,jk,ik->i", P, np.linalg.inv(X), P)
        jp = int(np.argmax(g))
        supp = np.flatnonzero(u > 0)
        jm = int(supp[np.argmin(g[supp])])
        gap = max(g[jp] / n - 1, 1 - g[jm] / n)
        if gap < tol:
            break
        if g[jp] - n >= n - g[jm]:
            lam = (g[jp] - n) / (n * (g[jp] - 1))
            u *= 1 - lam
            u[jp] += lam
        else:
            drop = -u[jm] / (1 - u[jm])
            # for g <= 1 the objective improves all the way to the drop step
            lam = max((g[jm] - n) / (n * (g[jm] - 1)), drop) if g[jm] > 1 else drop
            u *= 1 - lam
            u[jm] += lam
            if u[jm] < 1e-15:
                u[jm] = 0.0
        u /= u.sum()
    return u, it, gap


def john_ellipsoid(B: BodySpec, G: FiniteGroup | None = None, tol: float = 1e-12,
                   max_iters: int = 100_000, block_tol: float = BLOCK_TOL) -> BlockEllipsoid:
    """Largest origin-centred ellipsoid inside ``K = {<x, v_j> <= h_j}``.

    ``E = A B^n`` lies in ``K`` iff ``|A v_j| <= h_j``.  By polarity this is the
    smallest origin-centred ellipsoid ``{y : y^T A^2 y <= 1}`` containing the
    points ``v_j / h_j``; that problem is solved through its D-optimal design
    dual, whose optimality gap certifies the result.  With ``G`` given, the
    optimum is averaged over the group (the problem is G-invariant and
    strictly concave, so this only removes roundoff) and every block is checked
    for invariance.
    """
    P = B.normals / B.h[:, None]
    n = B.n
    u, iters, gap = _design_weights(P, tol, max_iters)
    diag = {"iterations": iters, "gap": float(gap)}
    if gap >= tol:
        raise JohnError("John ellipsoid optimizer did not converge", diag)
    M = np.linalg.inv(n * (P.T @ (P * u[:, None])))
    if G is not None:
        M = sum(g @ M @ g.T for g in G) / G.order
    M = 0.5 * (M + M.T)
    M /= np.max(np.einsum("ij,jk,ik->i", P, M, P))
    lam, W = np.linalg.eigh(M)
    A = (W * np.sqrt(lam)) @ W.T
    E = BlockEllipsoid.from_matrix(A, block_tol, diag)
    if G is not None:
        for V, _ in E.blocks:
            if not is_invariant_subspace(G, V, 1e-6):
                raise JohnError("spectral block is not G-invariant", diag)
    return E


def john_sandwich_check(B: BodySpec, E: BlockEllipsoid, tol: float = 1e-8) -> bool:
    """``E ⊂ K ⊂ n E``, tested on the facet constraints and on the vertices of K."""
    inside = np.all(E.support(B.normals) <= B.h * (1 + tol))
    outer = np.all(E.gauge(vertices(B)) <= B.n * (1 + tol))
    return bool(inside and outer)


def ellipsoid_from_axes(subspaces, semi_axes) -> BlockEllipsoid:
    n = subspaces[0].n
    return BlockEllipsoid(tuple(zip(subspaces, map(float, semi_axes))), n)


def axis_blocks(n: int, dims) -> list[Subspace]:
    """Consecutive coordinate blocks of the given dimensions."""
    out, o = [], 0
    for d in dims:
        out.append(span_of(np.eye(n)[o:o + d], n))
        o += d
    return out
