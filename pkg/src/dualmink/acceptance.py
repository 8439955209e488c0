"""The acceptance suite, runnable from the CLI (``dualmink selftest``) and pytest.

Each ``criterion_k`` returns a :class:`CriterionResult`; thresholds are the
stated ones and are never relaxed here.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import group as grp
from .body import (
    Ball,
    BodySpec,
    cone_volume_exact_2d,
    dual_curvature_masses,
    gaussian_identity_check,
    radial_assign,
)
from .conditions import check_classical, concentrated_on_pair, equivalence_audit
from .estimates import (
    admissible_t0,
    barrier_bound_check,
    ellipsoid_entropy,
    entropy_upper_bound,
)
from .geometry import Subspace, complement, operator_norm, random_orthogonal
from .john import BlockEllipsoid, axis_blocks, john_ellipsoid, john_sandwich_check
from .measure import DiscreteMeasure, candidate_invariant_subspaces, membership, second_moment
from .quadrature import make_quadrature
from .samplers import (
    conjugate,
    cross_polytope_measure,
    random_invariant_body,
    random_invariant_measure,
    random_polygon,
    regression_corpus,
)
from .solver import SolveConfig, degenerating_phi_trace, solve

SEED = 20240611


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    runtime: float = 0.0
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict} criterion {self.number}: {self.title} ({self.runtime:.1f}s)"

    def to_dict(self) -> dict:
        return {"criterion": self.number, "title": self.title, "passed": self.passed,
                "runtime": self.runtime, "details": self.details}


def _timed(number, title, limit=None):
    def deco(fn):
        def run(**kw):
            t = time.perf_counter()
            passed, details = fn(**kw)
            dt = time.perf_counter() - t
            if limit is not None:
                details["runtime_limit"] = limit
                passed = passed and dt < limit
            return CriterionResult(number, title, bool(passed), dt, details)

        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return deco


def _square_measure():
    I = np.eye(2)
    return DiscreteMeasure.from_atoms(np.array([I[0], -I[0], I[1], -I[1]]), np.ones(4), 2)


@_timed(1, "square cone-volume round trip", limit=30.0)
def criterion_1():
    mu = _square_measure()
    R = solve(mu, grp.sign_group(2), SolveConfig(q=2.0, quad={"nodes": 100_000}))
    h = R.solution.h
    h_err = float(np.max(np.abs(h - 1.0)))
    ok = R.converged and R.residual_tv < 1e-3 and h_err < 1e-3
    return ok, {"residual_tv": R.residual_tv, "h_rel_err": h_err, "converged": R.converged}


@_timed(2, "C3-invariant triangle reconstruction")
def criterion_2():
    ang = np.deg2rad([90.0, 210.0, 330.0])
    V = np.column_stack([np.cos(ang), np.sin(ang)])
    target = BodySpec(V, np.ones(3))
    mu = DiscreteMeasure.from_atoms(V, cone_volume_exact_2d(target), 2)
    R = solve(mu, grp.cyclic_2d(3), SolveConfig(q=2.0))
    h = R.solution.h
    shape_err = float(np.max(np.abs(h / h.mean() - 1)))
    ok = R.converged and R.residual_tv < 1e-3 and shape_err < 1e-3
    return ok, {"weights": mu.weights.tolist(), "residual_tv": R.residual_tv,
                "inradius": float(h.mean()), "shape_err": shape_err}


@_timed(3, "subspace mass theorem on random invariant bodies", limit=300.0)
def criterion_3(bodies_per_group: int = 17):
    rng = np.random.default_rng(SEED + 3)
    groups = {"sign2": grp.sign_group(2), "even_signs3": grp.even_sign_changes(3),
              "klein4": grp.klein_four()}
    qs = {2: [0.5, 1.0, 1.7], 3: [0.5, 1.0, 1.7, 2.0]}
    quads = {2: make_quadrature(2), 3: make_quadrature(3)}
    worst_excess, worst_strict, bodies, checks = -math.inf, math.inf, 0, 0
    failures = []
    for gname, G in groups.items():
        n = G.n
        Q = quads[n]
        for _ in range(bodies_per_group):
            B = random_invariant_body(G, rng, seeds=int(rng.integers(2, 5)), subspace_prob=0.5)
            rho, idx = radial_assign(B, Q.nodes)
            bodies += 1
            for q in qs[n]:
                masses = np.bincount(idx, weights=Q.weights * rho ** q, minlength=B.m) / n
                keep = masses > 0
                nu = DiscreteMeasure(B.normals[keep], masses[keep], n)
                for L in candidate_invariant_subspaces(nu, G):
                    if not 0 < L.dim < n:
                        continue
                    r = float(nu.weights[membership(nu, L)].sum() / nu.total)
                    bound = min(L.dim / q, 1.0)
                    checks += 1
                    worst_excess = max(worst_excess, r - bound)
                    if r > bound + 2e-3:
                        failures.append((gname, q, L.dim, r, bound))
                    if q <= L.dim:
                        worst_strict = min(worst_strict, bound - r)
                        if not r < bound - 1e-3:
                            failures.append((gname, q, L.dim, r, bound))
    ok = bodies >= 50 and not failures
    return ok, {"bodies": bodies, "subspace_checks": checks, "max_ratio_minus_bound": worst_excess,
                "min_strict_margin": worst_strict, "failures": failures[:10]}


@_timed(4, "irreducible cube group forces classical concentration", limit=60.0)
def criterion_4(instances: int = 20):
    rng = np.random.default_rng(SEED + 4)
    G = grp.cube_rotation_group(3)
    worst_M, failures = 0.0, []
    for i in range(instances):
        mu = random_invariant_measure(G, rng, seeds=int(rng.integers(1, 4)))
        dev = operator_norm(second_moment(mu) - mu.total / 3 * np.eye(3))
        worst_M = max(worst_M, dev)
        rep = check_classical(mu, "concentration")
        if dev >= 1e-9 or not rep.satisfied:
            failures.append({"instance": i, "moment_dev": dev, "classical": rep.satisfied})
    eq_checked = 0
    for i in range(5):
        R = np.eye(3) if i == 0 else random_orthogonal(3, rng)
        mu = cross_polytope_measure(3, float(rng.uniform(0.5, 2)), R)
        GR = conjugate(G, R)
        from .measure import is_G_invariant

        rep = check_classical(mu, "concentration")
        if not (is_G_invariant(mu, GR) and rep.satisfied and rep.equality_cases):
            failures.append({"equality_instance": i, "satisfied": rep.satisfied})
            continue
        for L, _ in rep.equality_cases:
            eq_checked += 1
            if not concentrated_on_pair(mu, L, complement(L)):
                failures.append({"equality_instance": i, "dim": L.dim})
    return not failures, {"max_moment_deviation": worst_M, "equality_cases_checked": eq_checked,
                          "failures": failures}


@_timed(5, "G-invariant vs classical concentration audit")
def criterion_5():
    corpus = regression_corpus()
    bad = []
    for name, mu, G in corpus:
        a = equivalence_audit(mu, G)
        if a.g_report.satisfied and not a.classical_report.satisfied:
            bad.append(name)
    G = grp.cube_rotation_group(3)
    mu = cross_polytope_measure(3)
    a = equivalence_audit(mu, G)
    ratio = a.classical_report.worst_ratio
    sharp = a.g_report.satisfied and a.classical_report.satisfied and ratio == 1 / 3
    return not bad and sharp, {"corpus_size": len(corpus), "implication_failures": bad,
                               "sharpness_ratio": ratio}


@_timed(6, "Gaussian integral identity")
def criterion_6(samples: int = 1_000_000):
    rng = np.random.default_rng(SEED + 6)
    bodies = [("disk", Ball(2))] + [(f"polygon{i}", random_polygon(rng)) for i in range(5)]
    rows, ok = [], True
    for name, B in bodies:
        for q in (0.5, 1.0, 1.5):
            chk = gaussian_identity_check(B, q, samples, seed=int(rng.integers(2 ** 31)))
            row = {"body": name, "q": q, "rel_err": chk.rel_err}
            ok &= chk.rel_err < 0.02
            if name == "disk":
                closed = math.pi * math.gamma(1 - q / 2)
                row["closed_form_err"] = abs(chk.lhs - closed) / closed
                ok &= row["closed_form_err"] < 0.02
                if q == 1.0:
                    row["pi_3_2_err"] = abs(chk.lhs - math.pi ** 1.5) / math.pi ** 1.5
                    ok &= row["pi_3_2_err"] < 0.02
            rows.append(row)
    return ok, {"checks": rows, "max_rel_err": max(r["rel_err"] for r in rows)}


@_timed(7, "John ellipsoid axes and sandwich", limit=120.0)
def criterion_7(polytopes: int = 50):
    rng = np.random.default_rng(SEED + 7)
    a, b = 2.0, 0.7
    rect = BodySpec(np.array([[1.0, 0], [-1, 0], [0, 1], [0, -1]]), [a, a, b, b])
    E = john_ellipsoid(rect)
    axes_err = float(np.max(np.abs(E.semi_axes - [b, a])))
    groups = [grp.sign_group(2), grp.cyclic_2d(3), grp.dihedral_2d(4), grp.sign_group(3),
              grp.klein_four(), grp.prism_group(4), grp.cube_rotation_group(3)]
    fails = 0
    for i in range(polytopes):
        G = groups[i % len(groups)]
        B = random_invariant_body(G, rng, seeds=int(rng.integers(1, 4)))
        if not john_sandwich_check(B, john_ellipsoid(B, G)):
            fails += 1
    return axes_err < 1e-6 and fails == 0, {"rectangle_axes_err": axes_err,
                                            "sandwich_failures": fails, "polytopes": polytopes}


def _random_block_instance(rng):
    n = int(rng.integers(2, 5))
    m = int(rng.integers(1, n + 1))
    cuts = np.sort(rng.choice(np.arange(1, n), m - 1, replace=False)) if m > 1 else []
    dims = np.diff(np.r_[0, cuts, n]).astype(int)
    Rot = random_orthogonal(n, rng)
    subs = []
    o = 0
    for d in dims:
        subs.append(Subspace(Rot[:, o:o + d], n))
        o += d
    b = np.sort(np.exp(rng.uniform(np.log(1e-4), 0, m)))
    E = BlockEllipsoid(tuple(zip(subs, b)), n)
    U = rng.standard_normal((int(rng.integers(2, 8)), n))
    U = np.vstack([U, -U])
    mu = DiscreteMeasure.from_atoms(U, np.tile(rng.uniform(0.5, 2, len(U) // 2), 2), n)
    q = float(rng.uniform(0.2, n + 1.5))
    return mu, E, q


@_timed(8, "entropy estimate and coercivity witness")
def criterion_8(instances: int = 100):
    rng = np.random.default_rng(SEED + 8)
    held, tried, gaps = 0, 0, []
    while held + len(gaps) < instances and tried < 20 * instances:
        tried += 1
        mu, E, q = _random_block_instance(rng)
        delta0 = 0.9 / math.sqrt(len(E.blocks))
        t0 = None
        while delta0 > 1e-4 and t0 is None:
            t0 = admissible_t0(mu, E, q, delta0)
            if t0 is None:
                delta0 /= 2
        if t0 is None:
            continue
        lhs = ellipsoid_entropy(mu, E)
        rhs = entropy_upper_bound(mu, E, q, delta0, t0)
        if lhs <= rhs + 1e-12:
            held += 1
        else:
            gaps.append(lhs - rhs)
    entropy_ok = held >= instances and not gaps

    I = np.eye(2)
    mu = DiscreteMeasure.from_atoms(np.array([I[0], -I[0], I[1], -I[1]]), np.ones(4), 2)
    ks = [10.0 ** e for e in range(0, 7)]
    trace = degenerating_phi_trace(mu, grp.sign_group(2), 1.5, axis_blocks(2, [1, 1]),
                                   [(1 / k, 0.5) for k in ks])
    monotone = all(y < x for x, y in zip(trace[1:], trace[2:]))
    below = trace[-1] < -50
    return entropy_ok and monotone and below, {
        "entropy_instances": held, "entropy_violations": gaps[:5],
        "trace_b1": [1 / k for k in ks], "trace": trace,
        "eventually_decreasing": monotone, "below_minus_50": below,
        # Phi(h_E) >= -log b_2 + log b_1 + (1/q) log omega_2 along this schedule
        "lower_bound_at_end": -math.log(0.5) + math.log(1e-6) + math.log(math.pi) / 1.5,
    }


@_timed(9, "barrier power laws within 10% on the b-grid")
def criterion_9():
    Q3 = make_quadrature(3)
    samples = [
        ("ballblock", {"d": 2, "m": 1, "alpha": 1.0}),
        ("blockbarrier", {"ellipsoid_axes": [0.5], "d": 1, "q": 1.5}),
        ("q_gt_n", {"dims": [1, 2], "q": 4.0}),
    ]
    rows, ok = [], True
    for kind, params in samples:
        r = barrier_bound_check(kind, params, Q3)
        rows.append({"kind": kind, "ratios": r.ratios, "variation": r.variation,
                     "bounded": r.bounded})
        ok &= r.variation < 0.10
    return ok, {"samples": rows}


@_timed(10, "quadrature vs exact cone volume on polygons")
def criterion_10(polygons: int = 20):
    rng = np.random.default_rng(SEED + 10)
    Q = make_quadrature(2, 100_000)
    worst = 0.0
    for _ in range(polygons):
        B = random_polygon(rng, min_gap=0.1, min_h=0.2)
        ex = cone_volume_exact_2d(B)
        qd = dual_curvature_masses(B, 2.0, Q)
        live = ex > 0
        worst = max(worst, float(np.max(np.abs(qd[live] - ex[live]) / ex[live])))
        worst = max(worst, float(np.max(np.abs(qd[~live]), initial=0.0)))
    return worst < 1e-3, {"max_rel_err": worst, "polygons": polygons}


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def run_all(only=None, echo=print) -> list[CriterionResult]:
    out = []
    for k, fn in enumerate(CRITERIA, start=1):
        if only and k not in only:
            continue
        res = fn()
        if echo:
            echo(res.line())
        out.append(res)
    return out
