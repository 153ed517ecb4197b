"""Ex-post representation axioms: JR, EJR, FJR, general JR, EJR-x.

Violations are detected by deprived-voter counting: a cohesive,
all-deprived group exists for a project set T iff the number of deprived
voters d satisfies d * B >= n * cost(T) (any subgroup of that size is
itself cohesive). This keeps the search exponential only in the number of
projects. All comparisons are exact; budget never appears as a divisor.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional

from .limits import ScaleError, project_limit
from .model import (
    IntegralOutcome,
    PBInstance,
    Setting,
    classify,
    rational_str,
    utility,
)


class SettingError(ValueError):
    """The checker's setting precondition does not hold for the instance."""


@dataclass(frozen=True)
class CohesivenessWitness:
    """A cohesive group whose members all miss the satisfaction bound."""

    projects: tuple[int, ...]
    voters: tuple[int, ...]
    beta: Optional[int] = None
    alpha: Optional[Fraction] = None
    note: str = ""

    def to_dict(self, instance: PBInstance) -> dict:
        out = {
            "projects": [instance.project_ids[j] for j in self.projects],
            "voters": [instance.voter_ids[i] for i in self.voters],
            "note": self.note,
        }
        if self.beta is not None:
            out["beta"] = self.beta
        if self.alpha is not None:
            out["alpha"] = rational_str(self.alpha)
        return out


@dataclass(frozen=True)
class ExPostReport:
    axiom: str
    holds: bool
    witness: Optional[CohesivenessWitness] = None

    def to_dict(self, instance: PBInstance) -> dict:
        return {
            "axiom": self.axiom,
            "holds": self.holds,
            "witness": None if self.witness is None else self.witness.to_dict(instance),
        }


def _require_binary(instance: PBInstance, checker: str) -> None:
    if classify(instance) not in (Setting.BINARY, Setting.COMMITTEE):
        raise SettingError(f"{checker} requires binary utilities")


def _cohesive_count(instance: PBInstance, count: int, cost: Fraction) -> bool:
    """A deprived group of this size can host a cohesive subgroup."""
    return count > 0 and count * instance.budget >= instance.n * cost


def check_jr_binary(instance: PBInstance, outcome: IntegralOutcome) -> ExPostReport:
    """Justified representation for binary utilities (polynomial check)."""
    _require_binary(instance, "check_jr_binary")
    approvals = [instance.approval_set(i) for i in range(instance.n)]
    covered = [bool(approvals[i] & outcome.projects) for i in range(instance.n)]
    for j in range(instance.m):
        deprived = [
            i for i in range(instance.n) if j in approvals[i] and not covered[i]
        ]
        if _cohesive_count(instance, len(deprived), instance.cost[j]):
            return ExPostReport(
                axiom="jr",
                holds=False,
                witness=CohesivenessWitness(
                    projects=(j,),
                    voters=tuple(deprived),
                    note="cohesive group with zero represented members",
                ),
            )
    return ExPostReport(axiom="jr", holds=True)


def check_ejr_binary(
    instance: PBInstance, outcome: IntegralOutcome, limit: Optional[int] = None
) -> ExPostReport:
    """Extended justified representation for binary utilities."""
    _require_binary(instance, "check_ejr_binary")
    if instance.m > project_limit(limit):
        raise ScaleError(f"EJR enumeration over 2^{instance.m} project sets")
    approvals = [instance.approval_set(i) for i in range(instance.n)]
    won = [len(approvals[i] & outcome.projects) for i in range(instance.n)]
    for size in range(1, instance.m + 1):
        for group in combinations(range(instance.m), size):
            projects = frozenset(group)
            deprived = [
                i
                for i in range(instance.n)
                if projects <= approvals[i] and won[i] < size
            ]
            if _cohesive_count(
                instance, len(deprived), instance.total_cost(projects)
            ):
                return ExPostReport(
                    axiom="ejr",
                    holds=False,
                    witness=CohesivenessWitness(
                        projects=group,
                        voters=tuple(deprived),
                        note="cohesive group where everyone wins fewer than |T| projects",
                    ),
                )
    return ExPostReport(axiom="ejr", holds=True)


def check_fjr_binary(
    instance: PBInstance, outcome: IntegralOutcome, limit: Optional[int] = None
) -> ExPostReport:
    """Full justified representation for binary utilities."""
    _require_binary(instance, "check_fjr_binary")
    if instance.m > project_limit(limit):
        raise ScaleError(f"FJR enumeration over 2^{instance.m} project sets")
    approvals = [instance.approval_set(i) for i in range(instance.n)]
    won = [len(approvals[i] & outcome.projects) for i in range(instance.n)]
    for size in range(1, instance.m + 1):
        for group in combinations(range(instance.m), size):
            projects = frozenset(group)
            cost = instance.total_cost(projects)
            for beta in range(1, size + 1):
                deprived = [
                    i
                    for i in range(instance.n)
                    if len(approvals[i] & projects) >= beta and won[i] < beta
                ]
                if _cohesive_count(instance, len(deprived), cost):
                    return ExPostReport(
                        axiom="fjr",
                        holds=False,
                        witness=CohesivenessWitness(
                            projects=group,
                            voters=tuple(deprived),
                            beta=beta,
                            note="weakly cohesive group where everyone wins fewer than beta projects",
                        ),
                    )
    return ExPostReport(axiom="fjr", holds=True)


def check_jr_general(instance: PBInstance, outcome: IntegralOutcome) -> ExPostReport:
    """Justified representation for general utilities (singleton T).

    Candidate thresholds per project are the voters' utilities clipped to
    [0, 1]: any violating threshold can be raised to the least clipped
    utility of the deprived group without shrinking it.
    """
    sat = [utility(instance, i, outcome) for i in range(instance.n)]
    for j in range(instance.m):
        candidates = sorted(
            {
                min(Fraction(1), instance.utilities[i][j])
                for i in range(instance.n)
                if instance.utilities[i][j] > 0
            }
        )
        for alpha in candidates:
            deprived = [
                i
                for i in range(instance.n)
                if instance.utilities[i][j] >= alpha and sat[i] < alpha
            ]
            if _cohesive_count(instance, len(deprived), instance.cost[j]):
                return ExPostReport(
                    axiom="jr-general",
                    holds=False,
                    witness=CohesivenessWitness(
                        projects=(j,),
                        voters=tuple(deprived),
                        alpha=alpha,
                        note="(alpha, {j})-cohesive group below threshold alpha",
                    ),
                )
    return ExPostReport(axiom="jr-general", holds=True)


def check_ejrx_cost(
    instance: PBInstance, outcome: IntegralOutcome, limit: Optional[int] = None
) -> ExPostReport:
    """EJR up to any project, for cost utilities."""
    cost_shaped = all(
        u == 0 or u == instance.cost[j]
        for row in instance.utilities
        for j, u in enumerate(row)
    )
    if not cost_shaped:
        raise SettingError("check_ejrx_cost requires cost utilities")
    if instance.m > project_limit(limit):
        raise ScaleError(f"EJR-x enumeration over 2^{instance.m} project sets")
    approvals = [instance.approval_set(i) for i in range(instance.n)]
    base = [utility(instance, i, outcome) for i in range(instance.n)]
    for size in range(1, instance.m + 1):
        for group in combinations(range(instance.m), size):
            projects = frozenset(group)
            members = [i for i in range(instance.n) if projects <= approvals[i]]
            if not members:
                continue
            cost = instance.total_cost(projects)
            missing = projects - outcome.projects
            deprived = []
            for i in members:
                target = sum((instance.utilities[i][c] for c in projects), Fraction(0))
                satisfied = not missing or all(
                    base[i]
                    + (instance.utilities[i][c] if c not in outcome.projects else 0)
                    > target
                    for c in missing
                )
                if not satisfied:
                    deprived.append(i)
            if _cohesive_count(instance, len(deprived), cost):
                return ExPostReport(
                    axiom="ejr-x",
                    holds=False,
                    witness=CohesivenessWitness(
                        projects=group,
                        voters=tuple(deprived),
                        note="cohesive group unsatisfied even up to any missing project",
                    ),
                )
    return ExPostReport(axiom="ejr-x", holds=True)
