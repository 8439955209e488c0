"""Variational solver for the G-invariant discrete dual Minkowski problem.

The unknown body is the Wulff shape over ``supp mu`` with support values
``h = exp(x)``, one coordinate ``x_k`` per G-orbit of atoms.  The functional

    Phi(h) = -(1/|mu|) sum_i w_i log h_i + (1/q) log W_{n-q}([h])

is scale invariant and is maximized by backtracking gradient ascent.  Its
gradient in ``x`` is ``-mu(O_k)/|mu| + C_q(K, O_k)/W_{n-q}(K)``, exact for the
discretized functional, so a stationary point is a body whose dual curvature
measure is proportional to ``mu``; the scale ``c`` with
``c^q W_{n-q}(K) = |mu|`` finishes the solution.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize

from .body import BodySpec, dual_curvature_exact_2d, dual_curvature_masses, radial_assign
from .conditions import (
    EQ_TOL,
    ConditionError,
    check_concentration,
    check_mass_inequality,
)
from .estimates import ellipsoid_dual_quermassintegral, ellipsoid_entropy
from .geometry import Subspace
from .group import FiniteGroup, fixed_subspace, is_invariant_subspace, restrict
from .john import BlockEllipsoid
from .measure import DiscreteMeasure, membership, orbit_partition, restrict_measure
from .quadrature import SphereQuadrature, independent_quadrature, make_quadrature

log = logging.getLogger(__name__)

ARMIJO_C = 1e-4
MIN_STEP = 1e-14
STALL_STEP = 2.0 ** -10
FLOOR_FACTOR = 10.0


class NumericalError(ArithmeticError):
    pass


@dataclass
class SolveConfig:
    q: float
    max_iters: int = 10_000
    step0: float = 0.5
    grad_tol: float = 1e-6
    quad: dict = field(default_factory=dict)
    seed: int = 0
    acceptance: float = 1e-3
    check_conditions: bool = True
    eq_tol: float = EQ_TOL

    def __post_init__(self):
        if not self.q > 0:
            raise ValueError("q must be positive")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if self.max_iters < 0 or not self.step0 > 0:
            raise ValueError("max_iters must be >= 0 and step0 > 0")

    def quadrature(self, n: int) -> SphereQuadrature:
        return make_quadrature(n, self.quad.get("nodes"), self.quad.get("scheme"),
                               self.quad.get("seed", self.seed))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SolveResult:
    body: BodySpec
    scale: float
    residual_tv: float
    iterations: int
    converged: bool
    phi_trace: list
    grad_norm: float = math.nan
    diagnostics: dict = field(default_factory=dict)

    @property
    def solution(self) -> BodySpec:
        """The scaled body ``cK`` whose dual curvature measure is ``mu``."""
        return self.body.scaled(self.scale)

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "residual_tv": self.residual_tv,
            "scale": self.scale,
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "body": {"normals": self.body.normals.tolist(), "h": self.body.h.tolist()},
            "phi_trace": list(self.phi_trace),
            "diagnostics": self.diagnostics,
        }


# --------------------------------------------------------------------------
# functional


def entropy(mu: DiscreteMeasure, f) -> float:
    """``-(1/|mu|) sum_i w_i log f_i`` for values ``f_i`` at the atoms."""
    f = np.asarray(f, dtype=float)
    if f.shape != mu.weights.shape:
        raise ValueError("need one value per atom")
    if np.any(~(f > 0)):
        raise ValueError("entropy needs positive values")
    return -float(np.dot(mu.weights, np.log(f))) / mu.total


def atom_normal_index(mu: DiscreteMeasure, B: BodySpec, tol: float = 1e-7) -> np.ndarray:
    """Index of the normal of ``B`` at each atom of ``mu``."""
    D = np.linalg.norm(mu.directions[:, None, :] - B.normals[None, :, :], axis=2)
    j = np.argmin(D, axis=1)
    if np.any(D[np.arange(mu.size), j] > tol):
        raise ValueError("supp mu is not contained in the normal set of the body")
    return j


def phi(mu: DiscreteMeasure, B: BodySpec, q: float, Q: SphereQuadrature) -> float:
    """``Phi_mu`` at the support values of ``B`` (``[f]`` is the Wulff shape of B)."""
    if q <= 0:
        raise ValueError("q must be positive")
    rho = B.radial(Q.nodes)
    W = Q.integrate(rho ** q) / B.n
    return entropy(mu, B.h[atom_normal_index(mu, B)]) + math.log(W) / q


class _Objective:
    """Phi and its orbit gradient on a fixed normal set and quadrature."""

    def __init__(self, mu, orbits, q, Q):
        self.mu, self.q, self.Q = mu, q, Q
        self.n = mu.n
        self.label = np.empty(mu.size, dtype=int)
        for k, orb in enumerate(orbits):
            self.label[orb] = k
        self.K = len(orbits)
        self.orbit_mass = np.bincount(self.label, weights=mu.weights, minlength=self.K) / mu.total

    def body(self, x):
        return BodySpec(self.mu.directions, np.exp(x[self.label]))

    def __call__(self, x):
        B = self.body(x)
        rho, idx = radial_assign(B, self.Q.nodes)
        contrib = self.Q.weights * rho ** self.q / self.n
        W = float(contrib.sum())
        masses = np.bincount(idx, weights=contrib, minlength=B.m)
        value = -float(np.dot(self.orbit_mass, x)) + math.log(W) / self.q
        grad = -self.orbit_mass + np.bincount(self.label, weights=masses, minlength=self.K) / W
        floor = FLOOR_FACTOR * float(contrib.max()) / W
        return value, grad, B, W, floor


# --------------------------------------------------------------------------
# verification


def tv_residual(mu: DiscreteMeasure, B: BodySpec, masses) -> float:
    """Normalized total variation between per-normal ``masses`` and ``mu``."""
    target = np.zeros(B.m)
    np.add.at(target, atom_normal_index(mu, B), mu.weights)
    return 0.5 * float(np.abs(np.asarray(masses) - target).sum()) / mu.total


def verify(mu: DiscreteMeasure, R: SolveResult, q: float, Q: SphereQuadrature | None = None) -> float:
    """Residual of ``C_q(cK, .)`` against ``mu`` on an independent evaluation path.

    In the plane the masses are integrated in closed form over each edge;
    otherwise an independent quadrature rule derived from ``Q`` is used.
    """
    B = R.solution
    if B.n == 2:
        masses = dual_curvature_exact_2d(B, q)
    else:
        Q = Q or make_quadrature(B.n)
        masses = dual_curvature_masses(B, q, independent_quadrature(Q))
    return tv_residual(mu, B, masses)


# --------------------------------------------------------------------------
# solve


def _preconditions(mu, G, q, cfg):
    report = None
    if not cfg.check_conditions:
        return None
    if fixed_subspace(G).dim != 0:
        raise ConditionError("the group fixes a nonzero vector")
    n = mu.n
    if abs(q - n) < 1e-12:
        report = check_concentration(mu, G, cfg.eq_tol)
    elif q < n:
        report = check_mass_inequality(mu, G, q)
    else:
        log.warning("q > n: existence is not characterized by the mass inequality")
        return None
    if not report.satisfied:
        raise ConditionError(f"{report.kind} condition fails (worst ratio {report.worst_ratio:.6g}"
                             f" vs bound {report.bound:.6g})", report)
    return report


def solve(mu: DiscreteMeasure, G: FiniteGroup, cfg: SolveConfig,
          Q: SphereQuadrature | None = None) -> SolveResult:
    """Maximize ``Phi_mu`` over G-invariant Wulff shapes on ``supp mu``."""
    if mu.n != G.n:
        raise ValueError("measure and group live in different dimensions")
    q = cfg.q
    report = _preconditions(mu, G, q, cfg)
    Q = Q or cfg.quadrature(mu.n)
    orbits = orbit_partition(mu, G)
    obj = _Objective(mu, orbits, q, Q)

    x = np.zeros(obj.K)
    val, grad, B, W, floor = obj(x)
    trace = [val]
    stop = "max_iters"
    it = 0
    for it in range(1, cfg.max_iters + 1):
        gnorm = float(np.abs(grad).max())
        if gnorm < cfg.grad_tol:
            stop, it = "gradient", it - 1
            break
        g2 = float(grad @ grad)
        t = cfg.step0
        while t >= MIN_STEP:
            cand = obj(x + t * grad)
            if cand[0] >= val + ARMIJO_C * t * g2:
                break
            t *= 0.5
        else:
            stop, it = "line_search", it - 1
            break
        x = x + t * grad
        val, grad, B, W, floor = cand
        trace.append(val)
        # only microscopic steps are accepted once the iterate sits on a
        # quadrature kink; the gradient cannot drop below the node resolution
        if t < STALL_STEP * cfg.step0 and float(np.abs(grad).max()) < floor:
            stop = "resolution"
            break
    gnorm = float(np.abs(grad).max())
    gnorm_ok = gnorm < cfg.grad_tol or (stop in ("line_search", "resolution") and gnorm < floor)

    scale = (mu.total / W) ** (1.0 / q)
    res = SolveResult(B, scale, math.nan, it, False, trace, gnorm)
    res.residual_tv = verify(mu, res, q, Q)
    res.converged = bool(gnorm_ok and res.residual_tv < cfg.acceptance)
    res.diagnostics = {
        "stop": stop,
        "resolution_floor": floor,
        "orbits": len(orbits),
        "quadrature": Q.describe(),
        "conditions": report.to_dict() if report is not None else None,
    }
    if not res.converged:
        log.warning("solve did not converge: stop=%s grad=%.3g residual=%.3g",
                    stop, gnorm, res.residual_tv)
    return res


# --------------------------------------------------------------------------
# q = n with an equality case


def _segment_solution(mu: DiscreteMeasure) -> BodySpec:
    """One-dimensional log problem: the segment with cone volume ``w_+, w_-``."""
    plus = mu.directions[:, 0] > 0
    if plus.sum() != 1 or (~plus).sum() != 1:
        raise ConditionError("a one-dimensional measure needs one atom at each of +1 and -1")
    return BodySpec(mu.directions, mu.weights.copy())


def _lift_values(mu: DiscreteMeasure, S: Subspace, B_sub: BodySpec) -> tuple[np.ndarray, np.ndarray]:
    """Support values of a body in ``S`` at the atoms of ``mu`` lying in ``S``."""
    mask = membership(mu, S)
    coords = mu.directions[mask] @ S.basis
    coords /= np.linalg.norm(coords, axis=1)[:, None]
    D = np.linalg.norm(coords[:, None, :] - B_sub.normals[None, :, :], axis=2)
    return mask, B_sub.h[np.argmin(D, axis=1)]


def _log_solution(mu, G, cfg, depth=0):
    """Scaled log-problem solution body (cone volume matching ``mu``)."""
    n = mu.n
    if n == 1:
        return _segment_solution(mu), {"depth": depth, "kind": "segment"}
    sub_cfg = SolveConfig(**{**cfg.to_dict(), "q": float(n)})
    report = check_concentration(mu, G, cfg.eq_tol)
    if not report.satisfied:
        raise ConditionError("concentration condition fails", report)
    if not report.equality_cases:
        R = solve(mu, G, sub_cfg)
        if not R.converged:
            raise NumericalError(f"subproblem in dimension {n} did not converge")
        return R.solution, {"depth": depth, "kind": "solve", "iterations": R.iterations,
                            "residual_tv": R.residual_tv}
    L, M = min(report.equality_cases, key=lambda LM: LM[0].dim)
    parts = []
    for S in (L, M):
        body, info = _log_solution(restrict_measure(mu, S), restrict(G, S), cfg, depth + 1)
        parts.append((S, body, info))
    h = np.empty(mu.size)
    blocks = []
    for S, body, _ in parts:
        mask, vals = _lift_values(mu, S, body)
        h[mask] = vals
        blocks.append(mask)
    return BodySpec(mu.directions, h), {
        "depth": depth, "kind": "split", "dims": [L.dim, M.dim], "masks": blocks,
        "children": [info for _, _, info in parts]}


def solve_log_with_equality(mu: DiscreteMeasure, G: FiniteGroup, cfg: SolveConfig,
                            Q: SphereQuadrature | None = None) -> SolveResult:
    """Log-case (q = n) solver that splits along equality subspaces.

    With equality on a G-invariant ``L`` and complementary ``M``, the measure
    splits into pieces on ``L`` and ``M``; each is solved recursively under the
    restricted group and the body ``aD + a'D'`` assembled from the cylinders
    over the two pieces.  On the joint normal set this body has support values
    ``a h_C`` on the atoms in ``L`` and ``a' h_C'`` on those in ``M``.  The free
    ratio ``a/a'`` is chosen by a bounded golden-section (Brent) search on the
    residual.
    """
    n = mu.n
    if abs(cfg.q - n) > 1e-12:
        raise ValueError("the splitting construction is for q = n")
    if fixed_subspace(G).dim != 0:
        raise ConditionError("the group fixes a nonzero vector")
    report = check_concentration(mu, G, cfg.eq_tol)
    if not report.satisfied:
        raise ConditionError("concentration condition fails", report)
    if not report.equality_cases:
        return solve(mu, G, cfg, Q)
    Q = Q or cfg.quadrature(n)
    B0, info = _log_solution(mu, G, cfg)
    mask_L = info["masks"][0]

    def body_at(s):
        h = B0.h.copy()
        h[mask_L] *= math.exp(s)
        B = BodySpec(mu.directions, h)
        masses = dual_curvature_masses(B, n, Q)
        return B.scaled((mu.total / masses.sum()) ** (1.0 / n))

    def objective(s):
        B = body_at(s)
        return tv_residual(mu, B, dual_curvature_masses(B, n, Q))

    # the residual is often flat in s; a bounded search tolerates that
    opt = optimize.minimize_scalar(objective, bounds=(-1.0, 1.0), method="bounded",
                                   options={"xatol": 1e-3, "maxiter": 60})
    B = body_at(float(opt.x))
    res = SolveResult(B, 1.0, math.nan, int(opt.nit), False, [phi(mu, B, n, Q)])
    res.residual_tv = verify(mu, res, n, Q)
    res.converged = bool(res.residual_tv < cfg.acceptance)
    info = {k: v for k, v in info.items() if k != "masks"}
    res.diagnostics = {"split": info, "log_ratio": float(opt.x), "search_residual": float(opt.fun),
                       "quadrature": Q.describe(), "conditions": report.to_dict()}
    return res


# --------------------------------------------------------------------------
# coercivity witness


def degenerating_phi_trace(mu: DiscreteMeasure, G: FiniteGroup | None, q: float, blocks,
                           b_schedule, Q: SphereQuadrature | None = None) -> list[float]:
    """``Phi_mu(h_E)`` along block ellipsoids with semi-axes from ``b_schedule``.

    ``W_{n-q}(E)`` is integrated exactly for one or two blocks; ``Q`` is only
    needed for three or more.  ``G`` is accepted for symmetry with the other
    entry points and, when given, must leave every block invariant.
    """
    if G is not None:
        if not all(is_invariant_subspace(G, V) for V in blocks):
            raise ValueError("blocks must be G-invariant")
    out = []
    for b in b_schedule:
        E = BlockEllipsoid(tuple(zip(blocks, map(float, b))), mu.n)
        W = ellipsoid_dual_quermassintegral(E, q, Q)
        out.append(ellipsoid_entropy(mu, E) + math.log(W) / q)
    return out
