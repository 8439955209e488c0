"""Convex bodies given as Wulff shapes over a finite normal set.

A :class:`BodySpec` stores normals ``v_j`` and positive values ``h_j``; the body
is ``K = {x : <x, v_j> <= h_j for all j}``.  Radial evaluation, dual
quermassintegrals and dual curvature measures are computed by assigning each
quadrature node to the facet its ray exits through.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .geometry import DimensionError, unit_rows
from .measure import DiscreteMeasure
from .quadrature import SphereQuadrature, ball_volume, make_quadrature, sphere_area

_CHUNK = 4_000_000


class BodyError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class BodySpec:
    normals: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        V = unit_rows(np.asarray(self.normals, dtype=float))
        h = np.asarray(self.h, dtype=float).reshape(-1)
        if V.shape[0] != h.shape[0]:
            raise BodyError("normals and h differ in length")
        if np.any(h <= 0) or not np.all(np.isfinite(h)):
            raise BodyError("support values must be finite and > 0")
        if not positively_spanning(V):
            raise BodyError("normals do not positively span R^n; the Wulff shape is unbounded")
        V.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "normals", V)
        object.__setattr__(self, "h", h)

    @property
    def n(self) -> int:
        return self.normals.shape[1]

    @property
    def m(self) -> int:
        return self.normals.shape[0]

    def scaled(self, c: float) -> "BodySpec":
        return BodySpec(self.normals, self.h * c)

    def with_h(self, h) -> "BodySpec":
        return BodySpec(self.normals, h)

    def radial(self, U) -> np.ndarray:
        return radial_assign(self, U)[0]

    def transformed(self, g) -> "BodySpec":
        """Image ``g K`` under an orthogonal map."""
        return BodySpec(self.normals @ np.asarray(g).T, self.h)

    def __repr__(self):
        return f"BodySpec(n={self.n}, facets={self.m})"


@dataclass(frozen=True)
class Ball:
    """Centered ball ``r B^n``; exposes the same radial interface."""

    n: int
    r: float = 1.0

    def radial(self, U) -> np.ndarray:
        U = np.atleast_2d(U)
        return np.full(U.shape[0], float(self.r))


def positively_spanning(V: np.ndarray, tol: float = 1e-9) -> bool:
    """Every ``±e_i`` is a nonnegative combination of the rows of ``V``."""
    n = V.shape[1]
    if V.shape[0] < n + 1:
        return False
    for i in range(n):
        for s in (1.0, -1.0):
            e = np.zeros(n)
            e[i] = s
            _, res = optimize.nnls(V.T, e)
            if res > tol:
                return False
    return True


def radial_assign(B: BodySpec, U) -> tuple[np.ndarray, np.ndarray]:
    """Radial function at directions ``U`` and the index of the exit facet.

    ``rho(u) = min over <u, v_j> > 0 of h_j / <u, v_j>``; ties go to the
    smallest index.
    """
    U = np.atleast_2d(np.asarray(U, dtype=float))
    if U.shape[1] != B.n:
        raise DimensionError(f"directions of length {U.shape[1]} for a body in R^{B.n}")
    N = U.shape[0]
    rho = np.empty(N)
    idx = np.empty(N, dtype=np.intp)
    step = max(1, _CHUNK // max(B.m, 1))
    for s in range(0, N, step):
        D = U[s:s + step] @ B.normals.T
        with np.errstate(divide="ignore", invalid="ignore"):
            R = np.where(D > 1e-15, B.h / D, np.inf)
        j = np.argmin(R, axis=1)
        idx[s:s + step] = j
        rho[s:s + step] = R[np.arange(R.shape[0]), j]
    return rho, idx


def radial(B: BodySpec, u) -> float:
    return float(radial_assign(B, np.asarray(u, float)[None, :])[0][0])


def argmin_facet(B: BodySpec, u) -> int:
    return int(radial_assign(B, np.asarray(u, float)[None, :])[1][0])


def default_quadrature(n: int) -> SphereQuadrature:
    return make_quadrature(n)


def dual_quermassintegral(B, q: float, Q: SphereQuadrature | None = None) -> float:
    """``(1/n) * integral of rho^q`` over the sphere."""
    n = B.n
    if isinstance(B, Ball):
        return ball_volume(n) * B.r ** q
    Q = Q or default_quadrature(n)
    rho = B.radial(Q.nodes)
    return float(np.dot(Q.weights, rho ** q)) / n


def ball_dual_quermassintegral(n: int, r: float, q: float) -> float:
    return ball_volume(n) * r ** q


def dual_curvature_masses(B: BodySpec, q: float, Q: SphereQuadrature | None = None) -> np.ndarray:
    """Mass of the q-th dual curvature measure at each normal of ``B``."""
    Q = Q or default_quadrature(B.n)
    rho, idx = radial_assign(B, Q.nodes)
    return np.bincount(idx, weights=Q.weights * rho ** q, minlength=B.m) / B.n


def dual_curvature_measure(B: BodySpec, q: float, Q: SphereQuadrature | None = None) -> DiscreteMeasure:
    """As :func:`dual_curvature_masses`, packed into a measure (zero masses dropped)."""
    c = dual_curvature_masses(B, q, Q)
    keep = c > 0
    return DiscreteMeasure(B.normals[keep], c[keep], B.n)


# --------------------------------------------------------------------------
# exact planar computations


def polygon_vertices(B: BodySpec) -> np.ndarray:
    """Vertices of a planar Wulff shape, counter-clockwise."""
    if B.n != 2:
        raise BodyError("polygon_vertices needs n = 2")
    pts = _pair_vertices(B)
    ang = np.arctan2(pts[:, 1], pts[:, 0])
    return pts[np.argsort(ang)]


def _pair_vertices(B):
    V, h = B.normals, B.h
    scale = float(h.max())
    pts = []
    for i in range(B.m):
        for j in range(i + 1, B.m):
            A = np.array([V[i], V[j]])
            det = np.linalg.det(A)
            if abs(det) < 1e-12:
                continue
            x = np.linalg.solve(A, [h[i], h[j]])
            if np.all(V @ x <= h + 1e-11 * scale):
                pts.append(x)
    pts = np.array(pts)
    # merge coincident vertices (several lines through one point)
    out = []
    for p in pts:
        if not any(np.linalg.norm(p - o) < 1e-10 * scale for o in out):
            out.append(p)
    return np.array(out)


def facet_intervals_2d(B: BodySpec) -> np.ndarray:
    """For each facet, the signed tangential coordinates ``(t_a, t_b)`` of its
    endpoints, measured from the foot point ``h_j v_j`` in units of ``h_j``.

    Trimmed facets get ``t_a = t_b``.
    """
    if B.n != 2:
        raise BodyError("needs n = 2")
    pts = _pair_vertices(B)
    V, h = B.normals, B.h
    scale = float(h.max())
    out = np.zeros((B.m, 2))
    for j in range(B.m):
        on = np.abs(pts @ V[j] - h[j]) < 1e-10 * scale
        if on.sum() < 2:
            continue
        tang = np.array([-V[j, 1], V[j, 0]])
        t = pts[on] @ tang / h[j]
        out[j] = (t.min(), t.max())
    return out


def cone_volume_exact_2d(B: BodySpec) -> np.ndarray:
    """Cone-volume masses ``h_j * length(F_j) / 2`` of a polygon."""
    if B.n != 2:
        raise BodyError("cone_volume_exact_2d supports n = 2 only")
    iv = facet_intervals_2d(B)
    length = (iv[:, 1] - iv[:, 0]) * B.h
    return 0.5 * B.h * length


def dual_curvature_exact_2d(B: BodySpec, q: float) -> np.ndarray:
    """Planar dual curvature masses by closed-form integration over facets.

    Over facet ``j`` the ray at tangential coordinate ``t`` has
    ``rho = h_j sqrt(1 + t^2)`` and ``d theta = dt / (1 + t^2)``, so the mass is
    ``(h_j^q / 2) * integral (1 + t^2)^{q/2 - 1} dt``, a hypergeometric primitive.
    """
    iv = facet_intervals_2d(B)
    a = q / 2 - 1

    def prim(t):
        return t * special.hyp2f1(-a, 0.5, 1.5, -t * t)

    return 0.5 * B.h ** q * (prim(iv[:, 1]) - prim(iv[:, 0]))


def polygon_area(B: BodySpec) -> float:
    P = polygon_vertices(B)
    x, y = P[:, 0], P[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def wulff_support(B: BodySpec) -> np.ndarray:
    """Actual support values ``h_{[f]}(v_j) <= h_j`` of the Wulff shape."""
    if B.n == 2:
        P = polygon_vertices(B)
        return (P @ B.normals.T).max(axis=0)
    out = np.empty(B.m)
    bounds = [(None, None)] * B.n
    for j in range(B.m):
        res = optimize.linprog(-B.normals[j], A_ub=B.normals, b_ub=B.h, bounds=bounds,
                               method="highs")
        out[j] = -res.fun
    return out


def vertices(B: BodySpec) -> np.ndarray:
    """Vertices of the Wulff polytope (any n; origin is interior)."""
    if B.n == 2:
        return polygon_vertices(B)
    if B.n == 1:
        V = B.normals[:, 0]
        return np.array([[B.h[V > 0].min()], [-B.h[V < 0].min()]])
    from scipy.spatial import HalfspaceIntersection

    hs = np.column_stack([B.normals, -B.h])
    pts = HalfspaceIntersection(hs, np.zeros(B.n)).intersections
    out = []
    scale = float(B.h.max())
    for p in pts:
        if not any(np.linalg.norm(p - o) < 1e-9 * scale for o in out):
            out.append(p)
    return np.array(out)


# --------------------------------------------------------------------------
# Gaussian integral identity


def gaussian_constant(n: int, q: float) -> float:
    """``c0(n, q) = n * int_0^inf exp(-r^2) r^(n-q-1) dr`` by 1-D quadrature."""
    val, _ = integrate.quad(lambda r: math.exp(-r * r) * r ** (n - q - 1), 0, np.inf,
                            limit=200)
    return n * val


@dataclass
class GaussianCheck:
    lhs: float
    rhs: float
    rel_err: float
    stderr: float


def gaussian_identity_check(B, q: float, samples: int = 1_000_000, seed: int = 0,
                            Q: SphereQuadrature | None = None) -> GaussianCheck:
    """Monte Carlo ``int rho_B(z)^q exp(-|z|^2) dz`` against ``c0 * W_{n-q}(B)``.

    Samples come from the density proportional to ``|z|^-beta exp(-|z|^2)``,
    the Gaussian tilted radially just enough to keep the estimator's variance
    finite (``beta = 0``, a plain Gaussian, whenever ``2q < n``).
    """
    n = B.n
    if not 0 < q < n:
        raise ValueError("the identity needs 0 < q < n")
    beta = max(0.0, (3 * q - n) / 2)
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((samples, n))
    u /= np.linalg.norm(u, axis=1)[:, None]
    r = np.sqrt(rng.gamma((n - beta) / 2, 1.0, samples))
    rho_u = B.radial(u)
    vals = rho_u ** q * r ** (beta - q)
    norm = sphere_area(n) * math.gamma((n - beta) / 2) / 2
    lhs = norm * float(vals.mean())
    stderr = norm * float(vals.std(ddof=1)) / math.sqrt(samples)
    rhs = gaussian_constant(n, q) * dual_quermassintegral(B, q, Q)
    return GaussianCheck(lhs, rhs, abs(lhs - rhs) / abs(rhs), stderr)
