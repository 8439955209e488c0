"""Small dense linear algebra: unit vectors, subspaces, projections.

All values are immutable and carry their ambient dimension ``n``.  Operations
check ``n`` at their boundary and raise :class:`DimensionError` on mismatch.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Global tolerances; tweak via ``dualmink.geometry.TOL``.
TOL = {
    "algebraic": 1e-10,   # identities such as A^T A = I
    "subspace": 1e-8,     # subspace equality / projector comparison
    "rank": 1e-9,         # relative singular value cut for spans
}


class DimensionError(ValueError):
    """Ambient dimensions of two operands disagree."""


def as_vector(x, n: int | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {x.shape}")
    if n is not None and x.shape[0] != n:
        raise DimensionError(f"expected length {n}, got {x.shape[0]}")
    return x


def unit(x) -> np.ndarray:
    """Return ``x / |x|`` as a float array; raises on the zero vector."""
    x = as_vector(x)
    if x.shape[0] < 1:
        raise DimensionError("n must be at least 1")
    nrm = np.linalg.norm(x)
    if nrm == 0 or not np.isfinite(nrm):
        raise ValueError("cannot normalize a zero or non-finite vector")
    return x / nrm


def unit_rows(X) -> np.ndarray:
    """Row-normalize a 2-D array of directions."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    nrm = np.linalg.norm(X, axis=1)
    if np.any(nrm == 0):
        raise ValueError("zero direction")
    return X / nrm[:, None]


def is_orthogonal(A, tol: float | None = None) -> bool:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        return False
    tol = TOL["algebraic"] if tol is None else tol
    return bool(np.max(np.abs(A.T @ A - np.eye(A.shape[0]))) < tol)


@dataclass(frozen=True, eq=False)
class Subspace:
    """Linear subspace of R^n stored by an orthonormal basis (columns)."""

    basis: np.ndarray
    n: int = field(default=-1)

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=float)
        if B.ndim == 1:
            B = B.reshape(-1, 0) if B.size == 0 else B[:, None]
        n = B.shape[0] if self.n < 0 else self.n
        if B.shape[0] != n:
            raise DimensionError(f"basis has {B.shape[0]} rows, ambient n={n}")
        if B.shape[1] > n:
            raise ValueError("more basis vectors than ambient dimension")
        if B.shape[1] and np.max(np.abs(B.T @ B - np.eye(B.shape[1]))) > TOL["algebraic"]:
            raise ValueError("basis columns are not orthonormal")
        B = B.copy()
        B.setflags(write=False)
        object.__setattr__(self, "basis", B)
        object.__setattr__(self, "n", n)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(np.zeros((n, 0)), n)

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(np.eye(n), n)

    @classmethod
    def coordinate(cls, n: int, axes) -> "Subspace":
        return cls(np.eye(n)[:, list(axes)], n)

    def contains(self, x, tol: float | None = None) -> bool:
        x = as_vector(x, self.n)
        tol = TOL["subspace"] if tol is None else tol
        return bool(np.linalg.norm(x - project(self, x)) <= tol * max(1.0, np.linalg.norm(x)))

    def equals(self, other: "Subspace", tol: float | None = None) -> bool:
        _check_same_n(self, other)
        if self.dim != other.dim:
            return False
        tol = TOL["subspace"] if tol is None else tol
        return grassmann_distance(self, other) < tol

    def __repr__(self):
        return f"Subspace(n={self.n}, dim={self.dim})"


def _check_same_n(a: Subspace, b: Subspace):
    if a.n != b.n:
        raise DimensionError(f"ambient dimensions differ: {a.n} vs {b.n}")


def project(S: Subspace, x) -> np.ndarray:
    """Orthogonal projection ``B B^T x``; ``x`` may be a vector or rows of vectors."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != S.n:
        raise DimensionError(f"vector length {x.shape[-1]} vs ambient n={S.n}")
    B = S.basis
    return (x @ B) @ B.T


def span_of(vectors, n: int | None = None, tol: float | None = None) -> Subspace:
    """Orthonormal basis of the linear span of ``vectors``.

    Singular values below ``tol * sigma_max`` are discarded.  An empty list
    gives the zero subspace (``n`` must then be supplied).
    """
    tol = TOL["rank"] if tol is None else tol
    V = np.asarray(vectors, dtype=float)
    if V.size == 0:
        if n is None:
            if V.ndim == 2 and V.shape[1] > 0:
                n = V.shape[1]
            else:
                raise ValueError("ambient dimension needed for an empty span")
        return Subspace.zero(n)
    V = np.atleast_2d(V)
    if n is not None and V.shape[1] != n:
        raise DimensionError(f"vectors have length {V.shape[1]}, expected {n}")
    n = V.shape[1]
    U, s, _ = np.linalg.svd(V.T, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return Subspace.zero(n)
    rank = int(np.sum(s > tol * s[0]))
    return Subspace(_reorthonormalize(U[:, :rank]), n)


def _reorthonormalize(B: np.ndarray) -> np.ndarray:
    if B.shape[1] == 0:
        return B
    Q, R = np.linalg.qr(B)
    return Q * np.sign(np.diag(R))


def complement(S: Subspace) -> Subspace:
    """Orthogonal complement of ``S`` in R^n."""
    if S.dim == 0:
        return Subspace.full(S.n)
    if S.dim == S.n:
        return Subspace.zero(S.n)
    U, _, _ = np.linalg.svd(S.basis, full_matrices=True)
    return Subspace(_reorthonormalize(U[:, S.dim:]), S.n)


def subspace_sum(*spaces: Subspace, tol: float | None = None) -> Subspace:
    n = spaces[0].n
    for s in spaces:
        if s.n != n:
            raise DimensionError("ambient dimensions differ")
    cols = [s.basis.T for s in spaces if s.dim]
    if not cols:
        return Subspace.zero(n)
    return span_of(np.vstack(cols), n, tol)


def intersection(A: Subspace, B: Subspace) -> Subspace:
    _check_same_n(A, B)
    # A ∩ B = (A^perp + B^perp)^perp
    return complement(subspace_sum(complement(A), complement(B)))


def operator_norm(M) -> float:
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    return float(np.linalg.svd(M, compute_uv=False)[0])


def grassmann_distance(E: Subspace, F: Subspace) -> float:
    """Operator norm of ``P_E - P_F``."""
    _check_same_n(E, F)
    return operator_norm(E.projector - F.projector)


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random orthogonal matrix."""
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def uniform_sphere(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    X = rng.standard_normal((size, n))
    return X / np.linalg.norm(X, axis=1)[:, None]
