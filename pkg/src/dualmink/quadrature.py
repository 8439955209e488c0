"""Quadrature rules on the unit sphere S^{n-1}."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import random_orthogonal, uniform_sphere
from .group import FiniteGroup

DEFAULT_NODES = {1: 2, 2: 100_000, 3: 200_000}
MC_DEFAULT_NODES = 400_000


def ball_volume(n: int) -> float:
    """omega_n, the volume of the unit ball in R^n."""
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def sphere_area(n: int) -> float:
    """Surface area of S^{n-1}, equal to n * omega_n."""
    return n * ball_volume(n)


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    nodes: np.ndarray
    weights: np.ndarray
    scheme: str
    seed: int | None = None

    @property
    def n(self) -> int:
        return self.nodes.shape[1]

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    def describe(self) -> dict:
        return {"scheme": self.scheme, "nodes": self.size, "seed": self.seed}


def circle_grid(size: int, phase: float | None = None) -> SphereQuadrature:
    """Uniform angular grid; the trapezoid rule on the circle."""
    if phase is None:
        phase = math.pi / size
    t = phase + 2 * math.pi * np.arange(size) / size
    X = np.column_stack([np.cos(t), np.sin(t)])
    return SphereQuadrature(X, np.full(size, 2 * math.pi / size), "grid")


def fibonacci_sphere(size: int, rotation: np.ndarray | None = None,
                     seed: int | None = None) -> SphereQuadrature:
    """Fibonacci lattice on S^2 with equal weights."""
    i = np.arange(size) + 0.5
    z = 1 - 2 * i / size
    r = np.sqrt(np.clip(1 - z * z, 0, None))
    phi = math.pi * (3 - math.sqrt(5)) * i
    X = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    if rotation is not None:
        X = X @ np.asarray(rotation).T
    return SphereQuadrature(X, np.full(size, 4 * math.pi / size), "fibonacci", seed)


def monte_carlo(n: int, size: int, seed: int = 0) -> SphereQuadrature:
    rng = np.random.default_rng(seed)
    X = uniform_sphere(n, size, rng)
    return SphereQuadrature(X, np.full(size, sphere_area(n) / size), "montecarlo", seed)


def zero_sphere() -> SphereQuadrature:
    """S^0 = {+1, -1} with counting measure."""
    return SphereQuadrature(np.array([[1.0], [-1.0]]), np.ones(2), "points")


def make_quadrature(n: int, size: int | None = None, scheme: str | None = None,
                    seed: int = 0) -> SphereQuadrature:
    """Default rule per dimension: grid (n=2), Fibonacci (n=3), Monte Carlo (n>=4).

    ``scheme`` may be forced to ``"montecarlo"`` in any dimension, or to
    ``"fibonacci-rotated"`` (n=3) for a Fibonacci lattice under a seeded random
    rotation.
    """
    if n == 1:
        return zero_sphere()
    if size is None:
        size = DEFAULT_NODES.get(n, MC_DEFAULT_NODES)
    if scheme is None:
        scheme = {2: "grid", 3: "fibonacci"}.get(n, "montecarlo")
    if scheme == "grid":
        if n != 2:
            raise ValueError("grid scheme is for n=2")
        return circle_grid(size)
    if scheme == "fibonacci":
        if n != 3:
            raise ValueError("fibonacci scheme is for n=3")
        return fibonacci_sphere(size)
    if scheme == "fibonacci-rotated":
        if n != 3:
            raise ValueError("fibonacci scheme is for n=3")
        R = random_orthogonal(3, np.random.default_rng(seed))
        return fibonacci_sphere(size, R, seed)
    if scheme == "montecarlo":
        return monte_carlo(n, size, seed)
    raise ValueError(f"unknown quadrature scheme {scheme!r}")


def independent_quadrature(Q: SphereQuadrature) -> SphereQuadrature:
    """A second rule sharing no nodes with ``Q``: doubled resolution, shifted."""
    n = Q.n
    if n == 1:
        return zero_sphere()
    if Q.scheme == "grid":
        size = 2 * Q.size + 1
        return circle_grid(size, phase=0.25 * 2 * math.pi / size)
    if n == 3 and Q.scheme.startswith("fibonacci"):
        seed = 1 + (Q.seed or 0)
        return make_quadrature(3, 2 * Q.size + 1, "fibonacci-rotated", seed)
    return monte_carlo(n, 2 * Q.size, seed=(Q.seed or 0) + 7919)


def symmetrize_quadrature(Q: SphereQuadrature, G: FiniteGroup) -> SphereQuadrature:
    """Union of the G-images of the nodes, each with weight / |G|."""
    X = np.concatenate([Q.nodes @ g.T for g in G])
    w = np.tile(Q.weights, G.order) / G.order
    return SphereQuadrature(X, w, Q.scheme + "+G", Q.seed)
