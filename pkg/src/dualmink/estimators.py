"""scikit-learn style wrappers around the solver and the John ellipsoid.

``DualMinkowskiSolver`` treats the rows of ``X`` as the atoms of a discrete
measure (``sample_weight`` gives their masses) and fits the polytope whose
q-th dual curvature measure matches it.  ``JohnEllipsoidEstimator`` fits the
John ellipsoid of the polytope ``{x : <x, X_i> <= y_i}``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .body import BodySpec, vertices
from .group import FiniteGroup, sign_group
from .john import john_ellipsoid
from .measure import DiscreteMeasure
from .quadrature import make_quadrature
from .solver import SolveConfig, SolveResult, solve, solve_log_with_equality, verify


def _measure(X, sample_weight) -> DiscreteMeasure:
    X = check_array(X, ensure_min_samples=2, ensure_min_features=1)
    w = np.ones(X.shape[0]) if sample_weight is None else np.asarray(sample_weight, float)
    if w.shape != (X.shape[0],):
        raise ValueError("sample_weight must have one entry per row of X")
    return DiscreteMeasure.from_atoms(X, w, X.shape[1])


class DualMinkowskiSolver(BaseEstimator):
    """Fit a G-invariant polytope to a discrete measure on the sphere.

    Parameters
    ----------
    q : positive float
    group : FiniteGroup or None
        Symmetry group; ``None`` means ``{I, -I}``.
    split_equality : bool
        For ``q == n``, decompose along equality subspaces if the measure has any.
    """

    def __init__(self, q: float = 1.0, group: FiniteGroup | None = None, max_iters: int = 10_000,
                 grad_tol: float = 1e-6, quad_nodes: int | None = None, quad_scheme: str | None = None,
                 check_conditions: bool = True, split_equality: bool = False, random_state: int = 0):
        self.q = q
        self.group = group
        self.max_iters = max_iters
        self.grad_tol = grad_tol
        self.quad_nodes = quad_nodes
        self.quad_scheme = quad_scheme
        self.check_conditions = check_conditions
        self.split_equality = split_equality
        self.random_state = random_state

    def _config(self):
        quad = {k: v for k, v in (("nodes", self.quad_nodes), ("scheme", self.quad_scheme)) if v is not None}
        return SolveConfig(q=self.q, max_iters=self.max_iters, grad_tol=self.grad_tol, quad=quad,
                           seed=self.random_state, check_conditions=self.check_conditions)

    def fit(self, X, y=None, sample_weight=None):
        mu = _measure(X, sample_weight)
        G = self.group if self.group is not None else sign_group(mu.n)
        cfg = self._config()
        Q = cfg.quadrature(mu.n)
        if self.split_equality and abs(self.q - mu.n) < 1e-12:
            res = solve_log_with_equality(mu, G, cfg, Q)
        else:
            res = solve(mu, G, cfg, Q)
        self.result_ = res
        self.body_ = res.solution
        self.n_features_in_ = mu.n
        self.converged_ = res.converged
        self.residual_tv_ = res.residual_tv
        self.n_iter_ = res.iterations
        return self

    def predict(self, X) -> np.ndarray:
        """Radial function of the fitted body at the directions ``X``."""
        check_is_fitted(self, "body_")
        X = check_array(X)
        return self.body_.radial(X / np.linalg.norm(X, axis=1, keepdims=True))

    def support(self, X) -> np.ndarray:
        check_is_fitted(self, "body_")
        V = check_array(X)
        return np.max(V @ vertices(self.body_).T, axis=1)

    def score(self, X, y=None, sample_weight=None) -> float:
        """``-TV`` distance between the fitted body's measure and ``(X, sample_weight)``."""
        check_is_fitted(self, "body_")
        mu = _measure(X, sample_weight)
        R = SolveResult(self.body_, 1.0, float("nan"), 0, False, [])
        Q = make_quadrature(mu.n, self.quad_nodes, self.quad_scheme, self.random_state)
        return -verify(mu, R, self.q, Q)


class JohnEllipsoidEstimator(BaseEstimator):
    """Fit the John ellipsoid of ``{x : <x, X_i> <= y_i}`` (``y`` defaults to 1)."""

    def __init__(self, group: FiniteGroup | None = None, block_tol: float = 1e-7):
        self.group = group
        self.block_tol = block_tol

    def fit(self, X, y=None):
        X = check_array(X, ensure_min_samples=2)
        h = np.ones(X.shape[0]) if y is None else np.asarray(y, float)
        E = john_ellipsoid(BodySpec(X, h), self.group, block_tol=self.block_tol)
        self.ellipsoid_ = E
        self.semi_axes_ = E.semi_axes
        self.dims_ = E.dims
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X) -> np.ndarray:
        """``1 - gauge``: positive inside the ellipsoid."""
        check_is_fitted(self, "ellipsoid_")
        return 1.0 - self.ellipsoid_.gauge(check_array(X))

    def predict(self, X) -> np.ndarray:
        return self.decision_function(X) >= 0

    def score(self, X=None, y=None) -> float:
        """Volume of the ellipsoid relative to the unit ball."""
        check_is_fitted(self, "ellipsoid_")
        return self.ellipsoid_.volume_ratio()
