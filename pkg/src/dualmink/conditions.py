"""Existence conditions for the group-invariant dual Minkowski problem.

Two families of ratio conditions are decided here, each over a finite list of
candidate subspaces that is provably sufficient for discrete measures (see
:func:`dualmink.measure.candidate_invariant_subspaces`):

* the q-th subspace mass inequality,  ``mu(S ∩ L)/|mu| < min(dim L / q, 1)``;
* the subspace concentration condition, ``mu(S ∩ L)/|mu| <= dim L / n`` with the
  complementary-subspace requirement in the equality case.

The G-invariant versions quantify over G-invariant subspaces only; the
classical versions over every subspace.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Subspace, intersection, span_of
from .group import FiniteGroup, fixed_subspace
from .measure import (
    DiscreteMeasure,
    atom_span_subspaces,
    candidate_invariant_subspaces,
    is_G_invariant,
    membership,
    MAX_SUBSETS,
)

EQ_TOL = 1e-9


class ConditionError(ValueError):
    """A precondition (invariance, trivial fixed space, ...) does not hold."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass
class ConditionReport:
    satisfied: bool
    worst_subspace: Subspace | None
    worst_ratio: float
    bound: float
    equality_cases: list = field(default_factory=list)
    margin: float = math.inf
    kind: str = ""
    q: float | None = None
    candidates: int = 0
    violations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        def basis(S):
            return None if S is None else S.basis.T.tolist()

        return {
            "kind": self.kind,
            "q": self.q,
            "satisfied": self.satisfied,
            "candidates": self.candidates,
            "worst_ratio": self.worst_ratio,
            "bound": self.bound,
            "margin": None if math.isinf(self.margin) else self.margin,
            "worst_subspace": basis(self.worst_subspace),
            "equality_cases": [
                {"L": basis(L), "complement": basis(M)} for L, M in self.equality_cases
            ],
            "violations": [
                {"L": basis(L), "ratio": r, "bound": b} for L, r, b in self.violations
            ],
        }


def mass_bound(dim: int, q: float) -> float:
    return min(dim / q, 1.0)


def _ratios(mu, subspaces):
    tot = mu.total
    for L in subspaces:
        yield L, float(mu.weights[membership(mu, L)].sum()) / tot


def _mass_report(mu, subspaces, q, strict_tol, kind):
    if q <= 0:
        raise ValueError("q must be positive")
    worst, worst_ratio, worst_bound = None, 0.0, mass_bound(1, q)
    margin = math.inf
    violations = []
    for L, r in _ratios(mu, subspaces):
        b = mass_bound(L.dim, q)
        gap = b - r
        if gap < margin:
            margin, worst, worst_ratio, worst_bound = gap, L, r, b
        if not gap > strict_tol:
            violations.append((L, r, b))
    return ConditionReport(
        satisfied=not violations, worst_subspace=worst, worst_ratio=worst_ratio,
        bound=worst_bound, margin=margin, kind=kind, q=q,
        candidates=len(subspaces), violations=violations)


def _concentration_report(mu, subspaces, eq_tol, kind):
    n = mu.n
    worst, worst_ratio, worst_bound = None, 0.0, 1.0 / n
    margin = math.inf
    equality, violations = [], []
    for L, r in _ratios(mu, subspaces):
        b = L.dim / n
        gap = b - r
        if gap < margin:
            margin, worst, worst_ratio, worst_bound = gap, L, r, b
        if r > b + eq_tol:
            violations.append((L, r, b))
        elif abs(r - b) <= eq_tol:
            M = complementary_support(mu, L)
            if M is None:
                violations.append((L, r, b))
            else:
                equality.append((L, M))
    return ConditionReport(
        satisfied=not violations, worst_subspace=worst, worst_ratio=worst_ratio,
        bound=worst_bound, equality_cases=equality, margin=margin, kind=kind,
        candidates=len(subspaces), violations=violations)


def complementary_support(mu: DiscreteMeasure, L: Subspace) -> Subspace | None:
    """``M = span(supp mu \\ L)`` if it is complementary to ``L``, else None."""
    outside = ~membership(mu, L)
    M = span_of(mu.directions[outside], mu.n)
    if M.dim != mu.n - L.dim:
        return None
    if intersection(L, M).dim != 0:
        return None
    return M


def _require_invariant(mu, G):
    if not mu.valid:
        raise ConditionError("measure has no mass")
    if not is_G_invariant(mu, G):
        raise ConditionError("measure is not G-invariant")


def check_mass_inequality(mu: DiscreteMeasure, G: FiniteGroup, q: float,
                          strict_tol: float = 0.0,
                          max_subsets: int = MAX_SUBSETS) -> ConditionReport:
    """G-invariant q-th subspace mass inequality."""
    _require_invariant(mu, G)
    cands = candidate_invariant_subspaces(mu, G, max_subsets)
    return _mass_report(mu, cands, q, strict_tol, "G-mass-inequality")


def check_concentration(mu: DiscreteMeasure, G: FiniteGroup, eq_tol: float = EQ_TOL,
                        max_subsets: int = MAX_SUBSETS) -> ConditionReport:
    """G-invariant subspace concentration condition."""
    _require_invariant(mu, G)
    cands = candidate_invariant_subspaces(mu, G, max_subsets)
    return _concentration_report(mu, cands, eq_tol, "G-concentration")


def check_classical(mu: DiscreteMeasure, mode: str = "concentration", q: float | None = None,
                    strict_tol: float = 0.0, eq_tol: float = EQ_TOL,
                    max_subsets: int = MAX_SUBSETS) -> ConditionReport:
    """Classical conditions, tested on every span of a subset of supp mu.

    ``mode`` is ``"concentration"`` or ``"mass_inequality"`` (needs ``q``).
    """
    if not mu.valid:
        raise ConditionError("measure has no mass")
    cands = atom_span_subspaces(mu, max_subsets)
    if mode == "concentration":
        return _concentration_report(mu, cands, eq_tol, "classical-concentration")
    if mode == "mass_inequality":
        if q is None:
            raise ValueError("mass_inequality mode needs q")
        return _mass_report(mu, cands, q, strict_tol, "classical-mass-inequality")
    raise ValueError(f"unknown mode {mode!r}")


@dataclass
class AuditResult:
    g_report: ConditionReport
    classical_report: ConditionReport
    consistent: bool

    @property
    def implication_holds(self) -> bool:
        """G-condition passing forces the classical condition to pass."""
        return not (self.g_report.satisfied and not self.classical_report.satisfied)

    def to_dict(self):
        return {
            "consistent": self.consistent,
            "implication_holds": self.implication_holds,
            "g_report": self.g_report.to_dict(),
            "classical_report": self.classical_report.to_dict(),
        }


def equivalence_audit(mu: DiscreteMeasure, G: FiniteGroup, eq_tol: float = EQ_TOL) -> AuditResult:
    """Run both concentration checkers; they must agree when Fix(G) = {0}."""
    if fixed_subspace(G).dim != 0:
        raise ConditionError("group has nonzero fixed points")
    g = check_concentration(mu, G, eq_tol)
    c = check_classical(mu, "concentration", eq_tol=eq_tol)
    return AuditResult(g, c, g.satisfied == c.satisfied)


def concentrated_on_pair(mu: DiscreteMeasure, L: Subspace, M: Subspace) -> bool:
    """Every atom lies in ``L ∪ M``."""
    return bool(np.all(membership(mu, L) | membership(mu, M)))
