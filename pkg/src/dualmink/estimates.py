"""Estimate engine: spherical partitions, entropy bounds and barrier bodies.

These evaluators turn the quantitative estimates used in the compactness
argument into runnable inequalities.  They never enter the solve path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .geometry import Subspace, project
from .john import BlockEllipsoid
from .measure import DiscreteMeasure
from .quadrature import SphereQuadrature, ball_volume


def spherical_partition(blocks, delta: float, nodes) -> np.ndarray:
    """Index of the cell ``Omega_{j,delta}`` containing each node.

    Node ``u`` goes to the largest ``j`` with ``|P_{V_j} u| >= delta``.  Since the
    block norms satisfy ``sum_j |P_j u|^2 = 1`` such a ``j`` exists whenever
    ``delta < 1/sqrt(m)``.
    """
    m = len(blocks)
    if not 0 < delta < 1 / math.sqrt(m):
        raise ValueError(f"delta must lie in (0, 1/sqrt({m}))")
    U = nodes.nodes if isinstance(nodes, SphereQuadrature) else np.atleast_2d(nodes)
    norms = np.column_stack([np.linalg.norm(project(V, U), axis=1) for V in blocks])
    ok = norms >= delta
    # last True along each row
    idx = m - 1 - np.argmax(ok[:, ::-1], axis=1)
    if not np.all(ok[np.arange(len(idx)), idx]):
        raise ValueError("blocks do not sum to R^n")
    return idx


def ellipsoid_entropy(mu: DiscreteMeasure, E: BlockEllipsoid) -> float:
    """``E_mu(h_E) = -(1/|mu|) sum_i w_i log h_E(u_i)``."""
    return -float(np.dot(mu.weights, np.log(E.support(mu.directions)))) / mu.total


def _split_index(dims, q):
    D = np.cumsum([0] + list(dims))
    n = D[-1]
    m = len(dims)
    if q > n:
        return m, D
    for r in range(1, m + 1):
        if D[r - 1] < q <= D[r]:
            return r, D
    raise ValueError("q must be positive")


def admissible_t0(mu: DiscreteMeasure, E: BlockEllipsoid, q: float, delta0: float,
                  shrink: float = 0.5) -> float | None:
    """Largest-margin ``t0`` for which the partition masses stay below the
    thresholds ``min(D_r/q, 1) - t0``, scaled by ``shrink``; None if no positive
    ``t0`` exists for this ``delta0``.
    """
    dims = E.dims
    m = len(dims)
    if m == 1:
        return shrink
    cells = spherical_partition(E.subspaces, delta0, mu.directions)
    lam = np.bincount(cells, weights=mu.weights, minlength=m) / mu.total
    D = np.cumsum(dims)
    slack = [min(D[r] / q, 1.0) - lam[: r + 1].sum() for r in range(m - 1)]
    s = min(slack)
    return shrink * s if s > 0 else None


def entropy_upper_bound(mu: DiscreteMeasure, E: BlockEllipsoid, q: float, delta0: float,
                        t0: float, eps0: float | None = None) -> float:
    """Right-hand side of the block entropy estimate.

    ``-sum_{j<r} d_j/q log b_j - (1 - D_{r-1}/q) log b_r + t0 log b_1 + C`` with
    ``D_{r-1} < q <= D_r`` (``r = m`` when ``q > n``) and
    ``C = -log(delta0/2) - t0 log eps0``; ``eps0`` defaults to the largest
    semi-axis.  Valid whenever ``t0`` is admissible for ``delta0``.
    """
    if q <= 0 or not mu.valid:
        raise ValueError("needs q > 0 and a nonzero measure")
    b = E.semi_axes
    dims = E.dims
    r, D = _split_index(dims, q)
    eps0 = b[-1] if eps0 is None else eps0
    C = -math.log(delta0 / 2) - t0 * math.log(eps0)
    val = -sum(dims[j] / q * math.log(b[j]) for j in range(r - 1))
    val -= (1 - D[r - 1] / q) * math.log(b[r - 1])
    return val + t0 * math.log(b[0]) + C


# --------------------------------------------------------------------------
# dual quermassintegrals of ellipsoids and product bodies


def _beta_expectation(f, a: float, c: float, points=()) -> float:
    """``E f(s)`` for ``s ~ Beta(a, c)``, robust to features near s = 0 and 1."""
    # lower half in log s, upper half in log(1 - s)
    def lower(t):
        s = math.exp(t)
        return f(s) * math.exp(a * t) * (1 - s) ** (c - 1)

    def upper(t):
        s = math.exp(t)
        return f(1 - s) * math.exp(c * t) * (1 - s) ** (a - 1)

    half = math.log(0.5)
    return (_piecewise_quad(lower, half, points) + _piecewise_quad(upper, half, ())) / special.beta(a, c)


def _piecewise_quad(g, top, points):
    pts = sorted(p for p in points if p < top)
    edges = [-np.inf] + pts + [top]
    return sum(integrate.quad(g, lo, hi, limit=400)[0] for lo, hi in zip(edges[:-1], edges[1:]))


def ellipsoid_dual_quermassintegral(E: BlockEllipsoid, q: float,
                                    Q: SphereQuadrature | None = None) -> float:
    """``W_{n-q}(E)`` for a block ellipsoid.

    For a uniform direction, the squared block norms ``|P_j u|^2`` are
    Dirichlet(d/2) distributed, so ``W = omega_n E[(sum_j s_j / b_j^2)^(-q/2)]``.
    One and two blocks are integrated exactly in one variable; more blocks fall
    back to the sphere quadrature ``Q``.
    """
    n = E.n
    b = E.semi_axes
    dims = E.dims
    if len(b) == 1:
        return ball_volume(n) * b[0] ** q
    if len(b) == 2:
        b1, b2 = b
        d1, d2 = dims

        def f(s):
            return (s / b1 ** 2 + (1 - s) / b2 ** 2) ** (-q / 2)

        pts = [2 * math.log(b1 / b2)] if b1 < b2 else []
        return ball_volume(n) * _beta_expectation(f, d1 / 2, d2 / 2, pts)
    if Q is None:
        raise ValueError("more than two blocks need a sphere quadrature")
    return float(np.dot(Q.weights, E.radial(Q.nodes) ** q)) / n


def product_radial(U, factors) -> np.ndarray:
    """Radial function of ``K_1 x ... x K_r`` from the factors' radial functions.

    ``factors`` is a list of ``(subspace, radial_fn)`` where ``radial_fn`` maps
    unit directions of the subspace (in its basis coordinates) to radii.  For a
    unit ``u``, ``rho(u) = min_i rho_i(x_i/|x_i|) / |x_i|`` with ``x_i`` the
    component in the i-th factor; factors with ``x_i = 0`` impose nothing.
    """
    U = np.atleast_2d(U)
    rho = np.full(U.shape[0], np.inf)
    for S, fn in factors:
        X = U @ S.basis
        r = np.linalg.norm(X, axis=1)
        nz = r > 1e-300
        vals = np.full(U.shape[0], np.inf)
        vals[nz] = fn(X[nz] / r[nz, None]) / r[nz]
        rho = np.minimum(rho, vals)
    return rho


def ball_factor(radius: float):
    return lambda X: np.full(X.shape[0], float(radius))


def ellipsoid_factor(semi_axes):
    a = np.asarray(semi_axes, float)
    return lambda X: 1.0 / np.linalg.norm(X / a, axis=1)


def ballblock_exact(b: float, d: int, m: int, alpha: float) -> float:
    """``W_{(d+m)-alpha}(b B^d x B^m)`` by one-dimensional integration (oracle)."""
    n = d + m
    if m == 0:
        return ball_volume(n) * b ** alpha

    def f(s):
        return min(b / math.sqrt(s) if s > 0 else math.inf,
                   1 / math.sqrt(1 - s) if s < 1 else math.inf) ** alpha

    s_star = b * b / (1 + b * b)
    pts = [math.log(s_star)] if s_star < 0.5 else []
    return ball_volume(n) * _beta_expectation(f, d / 2, m / 2, pts)


@dataclass
class BarrierResult:
    kind: str
    b_grid: tuple
    lhs: list
    scale: list
    ratios: list
    variation: float
    bounded: bool

    def __bool__(self):
        return self.bounded


B_GRID = (1.0, 0.5, 0.25, 0.125)


def barrier_bound_check(kind: str, params: dict, Q: SphereQuadrature,
                        b_grid=B_GRID, factor: float = 2.0) -> BarrierResult:
    """Evaluate a barrier body's dual quermassintegral along ``b_grid``.

    ``kind`` is one of

    * ``"ballblock"``: ``bB^d x B^m``, exponent ``alpha`` (``0 < alpha < d``);
    * ``"blockbarrier"``: ``E x bB_V x B_W`` with ``E`` an ellipsoid in a
      k-dimensional block, exponent ``q - k`` (``k < q < k + d``), normalized by
      ``V_k(E)``;
    * ``"q_gt_n"``: block ellipsoid with semi-axes ``(b, rest...)``, ``q > n``,
      normalized by ``b_m^(q-n) prod b_i^(d_i)``.

    The estimates are upper bounds, so ``bounded`` is true when every ratio is
    finite and none exceeds ``factor`` times the ratio at ``b_grid[0]``.
    ``variation`` is the two-sided spread ``max/min - 1``.
    """
    if any(not 0 < b <= 1 for b in b_grid):
        raise ValueError("b must lie in (0, 1]")
    n = Q.n
    lhs, scale = [], []
    if kind == "ballblock":
        d, m, alpha = params["d"], params["m"], params["alpha"]
        if not 0 < alpha < d or d + m != n:
            raise ValueError("ballblock needs 0 < alpha < d and d + m = n")
        V = Subspace(np.eye(n)[:, :d], n)
        W = Subspace(np.eye(n)[:, d:], n)
        for b in b_grid:
            rho = product_radial(Q.nodes, [(V, ball_factor(b))] + ([(W, ball_factor(1.0))] if m else []))
            lhs.append(Q.integrate(rho ** alpha) / n)
            scale.append(b ** alpha)
    elif kind == "blockbarrier":
        axes = list(params["ellipsoid_axes"])
        k, d, q = len(axes), params["d"], params["q"]
        m = n - k - d
        if not k < q < k + d or m < 0:
            raise ValueError("blockbarrier needs k < q < k + d and k + d <= n")
        I = np.eye(n)
        parts = []
        if k:
            parts.append((Subspace(I[:, :k], n), ellipsoid_factor(axes)))
        Vb = Subspace(I[:, k:k + d], n)
        Wb = Subspace(I[:, k + d:], n) if m else None
        vol_E = ball_volume(k) * float(np.prod(axes)) if k else 1.0
        for b in b_grid:
            fac = parts + [(Vb, ball_factor(b))] + ([(Wb, ball_factor(1.0))] if Wb else [])
            rho = product_radial(Q.nodes, fac)
            lhs.append(Q.integrate(rho ** q) / n)
            scale.append(vol_E * b ** (q - k))
    elif kind == "q_gt_n":
        dims, q = list(params["dims"]), params["q"]
        rest = list(params.get("rest_axes", [1.0] * (len(dims) - 1)))
        if q <= n or sum(dims) != n:
            raise ValueError("q_gt_n needs q > n and dims summing to n")
        I = np.eye(n)
        offs = np.cumsum([0] + dims)
        subs = [Subspace(I[:, offs[i]:offs[i + 1]], n) for i in range(len(dims))]
        for b in b_grid:
            axes = [b] + rest
            if any(x < y for x, y in zip(axes[1:], axes[:-1])):
                raise ValueError("semi-axes must be nondecreasing")
            E = BlockEllipsoid(tuple(zip(subs, axes)), n)
            lhs.append(Q.integrate(E.radial(Q.nodes) ** q) / n)
            scale.append(axes[-1] ** (q - n) * float(np.prod([a ** di for a, di in zip(axes, dims)])))
    else:
        raise ValueError(f"unknown barrier kind {kind!r}")
    ratios = [x / s for x, s in zip(lhs, scale)]
    finite = all(np.isfinite(ratios)) and min(ratios) > 0
    variation = max(ratios) / min(ratios) - 1 if finite else math.inf
    growth = max(ratios) / ratios[0] if finite else math.inf
    return BarrierResult(kind, tuple(b_grid), lhs, scale, ratios, variation,
                         bool(finite and growth <= factor))
