"""Shared seeded generators for randomized property tests.

Everything is driven by `random.Random` with explicit seeds so failures
replay exactly. All generated numbers are Fractions with small
denominators, keeping exact arithmetic cheap.
"""

from __future__ import annotations

import random
from fractions import Fraction

from pbbobw import FractionalOutcome, IntegralOutcome, PBInstance


def rand_cost(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(1, 12), rng.choice([1, 2, 3, 4]))


def random_instance(
    rng: random.Random,
    n_max: int = 6,
    m_max: int = 6,
    utilities: str = "general",
) -> PBInstance:
    """A small random instance whose budget is always attainable.

    `utilities` is one of "general", "binary", "cost" (cost utilities:
    u_ij = cost(j) on the approval set).
    """
    n = rng.randint(1, n_max)
    m = rng.randint(2, m_max)
    cost = [rand_cost(rng) for _ in range(m)]
    top = max(cost)
    slack = sum(cost) - top
    budget = top + Fraction(rng.randint(0, 12), 12) * slack
    rows = []
    for _ in range(n):
        if utilities == "general":
            row = [
                Fraction(rng.randint(0, 8), rng.choice([1, 2, 3]))
                for _ in range(m)
            ]
            if all(u == 0 for u in row):
                row[rng.randrange(m)] = Fraction(1)
        else:
            approved = rng.sample(range(m), rng.randint(1, m))
            row = [Fraction(0)] * m
            for j in approved:
                row[j] = cost[j] if utilities == "cost" else Fraction(1)
        rows.append(tuple(row))
    return PBInstance(
        budget=budget,
        cost=tuple(cost),
        utilities=tuple(rows),
        project_ids=tuple(f"p{j + 1}" for j in range(m)),
        voter_ids=tuple(f"v{i + 1}" for i in range(n)),
    )


def random_feasible_p(
    rng: random.Random, instance: PBInstance
) -> FractionalOutcome:
    """Random p in [0,1]^m with cost(p) = B exactly.

    Start from uniform-ish shares, then push the cost difference into
    projects (in random order) until it vanishes; always possible since
    cost(C) >= B >= 0.
    """
    m = instance.m
    shares = [Fraction(rng.randint(0, 10), 10) for _ in range(m)]
    diff = instance.budget - sum(
        s * c for s, c in zip(shares, instance.cost)
    )
    order = list(range(m))
    rng.shuffle(order)
    for j in order:
        if diff == 0:
            break
        if instance.cost[j] == 0:
            continue
        if diff > 0:
            room = (1 - shares[j]) * instance.cost[j]
            take = min(room, diff)
            shares[j] += take / instance.cost[j]
            diff -= take
        else:
            room = shares[j] * instance.cost[j]
            take = min(room, -diff)
            shares[j] -= take / instance.cost[j]
            diff += take
    assert diff == 0
    p = FractionalOutcome(shares)
    assert p.is_feasible(instance)
    return p


def random_budget_outcome(
    rng: random.Random, instance: PBInstance
) -> IntegralOutcome:
    """A random within-budget outcome (maximal along a random order)."""
    order = list(range(instance.m))
    rng.shuffle(order)
    chosen: list[int] = []
    spent = Fraction(0)
    for j in order:
        if rng.random() < 0.7 and spent + instance.cost[j] <= instance.budget:
            chosen.append(j)
            spent += instance.cost[j]
    return IntegralOutcome(chosen)


def two_voter_example() -> PBInstance:
    """B = 1; a (cost 1/2) approved by both; b, c (cost 1/2) personal."""
    one, half, zero = Fraction(1), Fraction(1, 2), Fraction(0)
    return PBInstance(
        budget=one,
        cost=(half, half, half),
        utilities=((one, one, zero), (one, zero, one)),
        project_ids=("a", "b", "c"),
        voter_ids=("v1", "v2"),
    )
