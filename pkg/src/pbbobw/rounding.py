"""Dependent rounding of feasible fractional outcomes into BB1 outcomes.

The randomized pairwise update is carried out in integer "spend space":
after a one-time rescaling, each project's current spend w_c = q_c * cost(c)
is an integer in [0, C_c], where C_c is the rescaled cost. The pairwise
update moves an integer amount of spend from one project to the other, so
every intermediate state is exact. Branch decisions compare a 64-bit
uniform draw against the exact rational branch probability by integer
cross-multiplication (per-decision bias at most 2**-64).

Zero-cost projects never affect the spend conservation, so fractional
shares on them are resolved upfront by independent single-index rounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Optional, Sequence

from .model import (
    FractionalOutcome,
    IntegralOutcome,
    PBInstance,
    rational_str,
)

_MASK64 = (1 << 64) - 1
_TWO64 = 1 << 64


def splitmix64(state: int) -> int:
    """One output of the splitmix64 scrambler (used for seed derivation)."""
    z = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Deterministic 64-bit stream; one draw consumed per branch decision."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)


@dataclass(frozen=True)
class Seed:
    value: int

    def __post_init__(self) -> None:
        if not 0 <= self.value < _TWO64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def derive_seed(seed: int, index: int) -> int:
    """Independent per-sample seed stream: splitmix64(seed + index)."""
    return splitmix64((seed + index) & _MASK64)


@dataclass(frozen=True)
class RoundingRound:
    """One round of the process: indices touched, thresholds, branch, state."""

    t: int
    indices: tuple[int, ...]
    alpha: Fraction
    beta: Fraction
    branch: str
    q: tuple[Fraction, ...]

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "indices": list(self.indices),
            "alpha": rational_str(self.alpha),
            "beta": rational_str(self.beta),
            "branch": self.branch,
            "q": [rational_str(v) for v in self.q],
        }


@dataclass(frozen=True)
class RoundingTrace:
    rounds: tuple[RoundingRound, ...]
    outcome: IntegralOutcome
    seed: int

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "rounds": [r.to_dict() for r in self.rounds],
            "outcome": sorted(self.outcome.projects),
        }


class _Process:
    """Shared exact state machine behind the direct and bulk samplers.

    State is (chosen zero-cost set, integer spends); transitions consume one
    64-bit draw each and compare ``u * den < num * 2**64``.
    """

    def __init__(self, instance: PBInstance, p: FractionalOutcome, target: Fraction):
        if len(p.shares) != instance.m:
            raise ValueError("fractional outcome has wrong length")
        spent = p.cost(instance)
        if spent != target:
            raise ValueError(
                f"fractional outcome spends {spent}, expected {target}"
            )
        self.instance = instance
        self.p = p
        denoms = [c.denominator for c in instance.cost]
        denoms += [(s * c).denominator for s, c in zip(p.shares, instance.cost)]
        scale = lcm(*denoms)
        self.costs = [int(c * scale) for c in instance.cost]
        self.spends0 = tuple(
            int(s * c * scale) for s, c in zip(p.shares, instance.cost)
        )
        self.zero_frac = tuple(
            j
            for j in range(instance.m)
            if instance.cost[j] == 0 and 0 < p.shares[j] < 1
        )
        self.zero_fixed = frozenset(
            j
            for j in range(instance.m)
            if instance.cost[j] == 0 and p.shares[j] == 1
        )

    def outcome(self, spends: Sequence[int], zero_chosen: frozenset) -> IntegralOutcome:
        chosen = set(zero_chosen) | set(self.zero_fixed)
        for j in range(self.instance.m):
            if self.costs[j] > 0 and spends[j] == self.costs[j]:
                chosen.add(j)
        return IntegralOutcome(chosen)

    def q_snapshot(
        self, spends: Sequence[int], zero_state: dict[int, Fraction]
    ) -> tuple[Fraction, ...]:
        out = []
        for j in range(self.instance.m):
            if self.costs[j] > 0:
                out.append(Fraction(spends[j], self.costs[j]))
            elif j in zero_state:
                out.append(zero_state[j])
            else:
                out.append(self.p.shares[j])
        return tuple(out)

    def run(
        self, rng: SplitMix64, rounds: Optional[list] = None
    ) -> IntegralOutcome:
        spends = list(self.spends0)
        costs = self.costs
        zero_state: dict[int, Fraction] = {}
        zero_chosen = set()
        t = 0
        for j in self.zero_frac:
            share = self.p.shares[j]
            u = rng.next64()
            to_one = u * share.denominator < share.numerator * _TWO64
            zero_state[j] = Fraction(1 if to_one else 0)
            if to_one:
                zero_chosen.add(j)
            if rounds is not None:
                rounds.append(
                    RoundingRound(
                        t=t,
                        indices=(j,),
                        alpha=1 - share,
                        beta=share,
                        branch="up" if to_one else "down",
                        q=self.q_snapshot(spends, zero_state),
                    )
                )
            t += 1
        while True:
            frac = [c for c in range(len(costs)) if 0 < spends[c] < costs[c]]
            if not frac:
                return self.outcome(spends, frozenset(zero_chosen))
            if len(frac) >= 2:
                i, j = frac[0], frac[1]
                delta_up = min(costs[i] - spends[i], spends[j])
                delta_down = min(spends[i], costs[j] - spends[j])
                assert delta_up > 0 and delta_down > 0
                u = rng.next64()
                # P[up] = delta_down / (delta_up + delta_down)
                up = u * (delta_up + delta_down) < delta_down * _TWO64
                if up:
                    spends[i] += delta_up
                    spends[j] -= delta_up
                else:
                    spends[i] -= delta_down
                    spends[j] += delta_down
                if rounds is not None:
                    rounds.append(
                        RoundingRound(
                            t=t,
                            indices=(i, j),
                            alpha=Fraction(delta_up, costs[i]),
                            beta=Fraction(delta_down, costs[i]),
                            branch="up" if up else "down",
                            q=self.q_snapshot(spends, zero_state),
                        )
                    )
            else:
                ell = frac[0]
                u = rng.next64()
                to_one = u * costs[ell] < spends[ell] * _TWO64
                alpha = Fraction(costs[ell] - spends[ell], costs[ell])
                beta = Fraction(spends[ell], costs[ell])
                spends[ell] = costs[ell] if to_one else 0
                if rounds is not None:
                    rounds.append(
                        RoundingRound(
                            t=t,
                            indices=(ell,),
                            alpha=alpha,
                            beta=beta,
                            branch="up" if to_one else "down",
                            q=self.q_snapshot(spends, zero_state),
                        )
                    )
            t += 1


def dependent_round(
    instance: PBInstance, p: FractionalOutcome, seed: int
) -> tuple[IntegralOutcome, RoundingTrace]:
    """Round a feasible fractional outcome to a BB1 integral outcome.

    Deterministic function of (instance, p, seed). The returned trace
    records every round with exact thresholds and state snapshots.
    """
    proc = _Process(instance, p, instance.budget)
    rounds: list[RoundingRound] = []
    outcome = proc.run(SplitMix64(seed), rounds)
    return outcome, RoundingTrace(rounds=tuple(rounds), outcome=outcome, seed=seed)


def round_with_hard_cap(
    instance: PBInstance, p: FractionalOutcome, seed: int
) -> IntegralOutcome:
    """Round a fractional outcome spending B' = B - max cost; cost(W) <= B always."""
    reduced = instance.budget - max(instance.cost)
    proc = _Process(instance, p, reduced)
    return proc.run(SplitMix64(seed))


def is_bb1(instance: PBInstance, outcome: IntegralOutcome) -> bool:
    """Budget balanced up to one project."""
    w = outcome.projects
    total = instance.total_cost(w)
    budget = instance.budget
    if total <= budget and any(
        total + instance.cost[c] >= budget
        for c in range(instance.m)
        if c not in w
    ):
        return True
    if total >= budget and any(total - instance.cost[c] <= budget for c in w):
        return True
    # Degenerate cases (W = C, or no project outside W reaching B) fall back
    # to exact balance.
    return total == budget


def is_bfx(instance: PBInstance, outcome: IntegralOutcome) -> bool:
    """Budget feasible up to any project: removing any one funds within B."""
    total = instance.total_cost(outcome.projects)
    return all(total - instance.cost[c] <= instance.budget for c in outcome.projects)


class RoundingSampler:
    """Bulk sampler over the rounding process's finite decision tree.

    Building the tree once lets each seed be replayed with the same draw
    sequence and the same exact threshold comparisons as `dependent_round`,
    at a fraction of the cost; sampled outcomes agree seed for seed.
    """

    def __init__(
        self,
        instance: PBInstance,
        p: FractionalOutcome,
        target: Optional[Fraction] = None,
    ) -> None:
        proc = _Process(
            instance, p, instance.budget if target is None else target
        )
        self._proc = proc
        self._root = self._build(proc.spends0, 0, frozenset())
        leaves = set()
        self._collect_leaves(self._root, leaves)
        self.support = sorted(leaves, key=lambda o: sorted(o.projects))

    def _build(self, spends: tuple[int, ...], zero_pos: int, zero_chosen: frozenset):
        proc = self._proc
        if zero_pos < len(proc.zero_frac):
            j = proc.zero_frac[zero_pos]
            share = proc.p.shares[j]
            return (
                share.numerator * _TWO64,
                share.denominator,
                self._build(spends, zero_pos + 1, zero_chosen | {j}),
                self._build(spends, zero_pos + 1, zero_chosen),
            )
        costs = proc.costs
        frac = [c for c in range(len(costs)) if 0 < spends[c] < costs[c]]
        if not frac:
            return proc.outcome(spends, zero_chosen)
        if len(frac) >= 2:
            i, j = frac[0], frac[1]
            delta_up = min(costs[i] - spends[i], spends[j])
            delta_down = min(spends[i], costs[j] - spends[j])
            up_state = list(spends)
            up_state[i] += delta_up
            up_state[j] -= delta_up
            down_state = list(spends)
            down_state[i] -= delta_down
            down_state[j] += delta_down
            num, den = delta_down, delta_up + delta_down
        else:
            ell = frac[0]
            up_state = list(spends)
            up_state[ell] = costs[ell]
            down_state = list(spends)
            down_state[ell] = 0
            num, den = spends[ell], costs[ell]
        return (
            num * _TWO64,
            den,
            self._build(tuple(up_state), zero_pos, zero_chosen),
            self._build(tuple(down_state), zero_pos, zero_chosen),
        )

    def _collect_leaves(self, node, acc: set) -> None:
        if isinstance(node, IntegralOutcome):
            acc.add(node)
            return
        self._collect_leaves(node[2], acc)
        self._collect_leaves(node[3], acc)

    def probabilities(self) -> dict[IntegralOutcome, Fraction]:
        """Exact outcome distribution implied by the branch probabilities.

        Branch probabilities here are the exact rational ones; the 2**-64
        dyadic draw bias is below any statistical tolerance used in tests.
        """
        probs: dict[IntegralOutcome, Fraction] = {}

        def walk(node, weight: Fraction) -> None:
            if isinstance(node, IntegralOutcome):
                probs[node] = probs.get(node, Fraction(0)) + weight
                return
            num, den = node[0] // _TWO64, node[1]
            q = Fraction(num, den)
            if q > 0:
                walk(node[2], weight * q)
            if q < 1:
                walk(node[3], weight * (1 - q))

        walk(self._root, Fraction(1))
        return probs

    def sample(self, seed: int) -> IntegralOutcome:
        state = seed & _MASK64
        node = self._root
        while not isinstance(node, IntegralOutcome):
            state = (state + 0x9E3779B97F4A7C15) & _MASK64
            z = state
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
            u = z ^ (z >> 31)
            node = node[2] if u * node[1] < node[0] else node[3]
        return node

    def sample_counts(self, seeds) -> dict[IntegralOutcome, int]:
        """Sample every seed and tally counts per distinct outcome."""
        counts: dict[IntegralOutcome, int] = {}
        for seed in seeds:
            w = self.sample(seed)
            counts[w] = counts.get(w, 0) + 1
        return counts
