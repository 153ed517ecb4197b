"""Ex-ante fair-share hierarchy: IFS, Strong IFS, UFS, Strong UFS, GFS.

Every bound is an exact rational inequality. The group axioms (UFS,
Strong UFS) are checked on the maximal unanimous cells only; both bounds
are monotone in the group size, so any unanimous subgroup's bound is
implied by its cell's.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

from .limits import ScaleError, exponential_limit
from .model import FractionalOutcome, PBInstance, rational_str, utility


@dataclass(frozen=True)
class UnanimousPartition:
    """Maximal groups of voters with identical utility vectors."""

    cells: tuple[tuple[int, ...], ...]


def unanimous_partition(instance: PBInstance) -> UnanimousPartition:
    groups: dict[tuple, list[int]] = {}
    for i in range(instance.n):
        groups.setdefault(instance.utilities[i], []).append(i)
    cells = sorted(tuple(v) for v in groups.values())
    return UnanimousPartition(cells=tuple(cells))


@dataclass(frozen=True)
class Witness:
    """One checked inequality: subject (voter or group), lhs, required rhs."""

    voters: tuple[int, ...]
    lhs: Fraction
    rhs: Fraction

    def to_dict(self, instance: PBInstance) -> dict:
        return {
            "voters": [instance.voter_ids[i] for i in self.voters],
            "lhs": rational_str(self.lhs),
            "rhs": rational_str(self.rhs),
        }


@dataclass(frozen=True)
class ExAnteReport:
    axiom: str
    holds: bool
    witnesses: tuple[Witness, ...]

    def to_dict(self, instance: PBInstance) -> dict:
        return {
            "axiom": self.axiom,
            "holds": self.holds,
            "witnesses": [w.to_dict(instance) for w in self.witnesses],
        }


def optimal_fractional_utility(
    instance: PBInstance, voter: int, budget: Fraction
) -> Fraction:
    """Best fractional-outcome utility for a voter under the given budget.

    Fractional knapsack: zero-cost approved projects first, then descending
    utility per cost (ties: lower cost, then lower index). Spending exactly
    the budget is always attainable by padding with zero-utility mass, so
    the greedy value equals the optimum over equality-feasible outcomes.
    """
    budget = Fraction(budget)
    if not 0 <= budget <= instance.budget:
        raise ValueError(f"budget {budget} outside [0, B]")
    row = instance.utilities[voter]
    value = Fraction(0)
    items = []
    for j in range(instance.m):
        if row[j] == 0:
            continue
        if instance.cost[j] == 0:
            value += row[j]
        else:
            items.append(j)
    items.sort(key=lambda j: (-row[j] / instance.cost[j], instance.cost[j], j))
    remaining = budget
    for j in items:
        if remaining <= 0:
            break
        take = min(Fraction(1), remaining / instance.cost[j])
        value += take * row[j]
        remaining -= take * instance.cost[j]
    return value


def _report(axiom: str, witnesses: list[Witness]) -> ExAnteReport:
    violations = [w for w in witnesses if w.lhs < w.rhs]
    return ExAnteReport(
        axiom=axiom, holds=not violations, witnesses=tuple(violations)
    )


def check_ifs(instance: PBInstance, p: FractionalOutcome) -> ExAnteReport:
    witnesses = [
        Witness(
            voters=(i,),
            lhs=utility(instance, i, p),
            rhs=optimal_fractional_utility(instance, i, instance.budget)
            / instance.n,
        )
        for i in range(instance.n)
    ]
    return _report("ifs", witnesses)


def check_strong_ifs(instance: PBInstance, p: FractionalOutcome) -> ExAnteReport:
    share = instance.budget / instance.n
    witnesses = [
        Witness(
            voters=(i,),
            lhs=utility(instance, i, p),
            rhs=optimal_fractional_utility(instance, i, share),
        )
        for i in range(instance.n)
    ]
    return _report("strong-ifs", witnesses)


def check_ufs(instance: PBInstance, p: FractionalOutcome) -> ExAnteReport:
    witnesses = []
    for cell in unanimous_partition(instance).cells:
        i = cell[0]
        witnesses.append(
            Witness(
                voters=cell,
                lhs=utility(instance, i, p),
                rhs=Fraction(len(cell), instance.n)
                * optimal_fractional_utility(instance, i, instance.budget),
            )
        )
    return _report("ufs", witnesses)


def check_strong_ufs(instance: PBInstance, p: FractionalOutcome) -> ExAnteReport:
    witnesses = []
    for cell in unanimous_partition(instance).cells:
        i = cell[0]
        group_budget = len(cell) * instance.budget / instance.n
        witnesses.append(
            Witness(
                voters=cell,
                lhs=utility(instance, i, p),
                rhs=optimal_fractional_utility(instance, i, group_budget),
            )
        )
    return _report("strong-ufs", witnesses)


def check_gfs(
    instance: PBInstance, p: FractionalOutcome, limit: Optional[int] = None
) -> ExAnteReport:
    """Group fair share, enumerated over all non-empty voter subsets."""
    limit = exponential_limit(limit)
    if instance.n > limit:
        raise ScaleError(
            f"GFS enumeration over 2^{instance.n} groups exceeds limit {limit}"
        )
    opt = [
        optimal_fractional_utility(instance, i, instance.budget)
        for i in range(instance.n)
    ]
    witnesses = []
    worst: Optional[Witness] = None
    for size in range(1, instance.n + 1):
        for group in combinations(range(instance.n), size):
            lhs = sum(
                (
                    p.shares[j]
                    * max(instance.utilities[i][j] for i in group)
                    for j in range(instance.m)
                ),
                Fraction(0),
            )
            rhs = sum((opt[i] for i in group), Fraction(0)) / instance.n
            w = Witness(voters=group, lhs=lhs, rhs=rhs)
            if worst is None or w.lhs - w.rhs < worst.lhs - worst.rhs:
                worst = w
            if lhs < rhs:
                witnesses.append(w)
    if witnesses:
        return ExAnteReport(axiom="gfs", holds=False, witnesses=tuple(witnesses))
    assert worst is not None
    return ExAnteReport(axiom="gfs", holds=True, witnesses=(worst,))
