import random
from fractions import Fraction

import pytest

from pbbobw import (
    FractionalOutcome,
    IntegralOutcome,
    PBInstance,
    RoundingSampler,
    dependent_round,
    derive_seed,
    is_bb1,
    is_bfx,
    round_with_hard_cap,
    splitmix64,
)

from conftest import random_feasible_p, random_instance, two_voter_example


def test_splitmix64_reference_vector():
    # First three outputs of the standard splitmix64 stream from state 0:
    # splitmix64(k * gamma) scrambles state (k+1) * gamma.
    gamma = 0x9E3779B97F4A7C15
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    assert splitmix64(gamma) == 0x6E789E6AA1B965F4
    assert splitmix64(2 * gamma & (2**64 - 1)) == 0x06C45D188009454F


def test_derive_seed_distinct_and_stable():
    seeds = [derive_seed(42, k) for k in range(1000)]
    assert len(set(seeds)) == 1000
    assert seeds[:3] == [derive_seed(42, k) for k in range(3)]


def test_rounding_is_deterministic():
    inst = two_voter_example()
    p = FractionalOutcome([1, "1/2", "1/2"])
    w1, t1 = dependent_round(inst, p, 7)
    w2, t2 = dependent_round(inst, p, 7)
    assert w1 == w2
    assert t1.to_dict() == t2.to_dict()


def test_two_voter_example_outcomes():
    inst = two_voter_example()
    p = FractionalOutcome([1, "1/2", "1/2"])
    sampler = RoundingSampler(inst, p)
    probs = sampler.probabilities()
    assert probs == {
        IntegralOutcome({0, 1}): Fraction(1, 2),
        IntegralOutcome({0, 2}): Fraction(1, 2),
    }


def test_exact_marginals_and_bb1_support():
    """The decision tree's exact distribution has marginals equal to p and
    only BB1 outcomes in its support."""
    rng = random.Random(101)
    for _ in range(40):
        inst = random_instance(rng)
        p = random_feasible_p(rng, inst)
        sampler = RoundingSampler(inst, p)
        probs = sampler.probabilities()
        assert sum(probs.values()) == 1
        for j in range(inst.m):
            marginal = sum(
                weight for w, weight in probs.items() if j in w.projects
            )
            assert marginal == p.shares[j]
        for w in probs:
            assert is_bb1(inst, w)


def test_sampler_agrees_with_dependent_round():
    rng = random.Random(55)
    for _ in range(10):
        inst = random_instance(rng)
        p = random_feasible_p(rng, inst)
        sampler = RoundingSampler(inst, p)
        for k in range(200):
            seed = derive_seed(1234, k)
            w, _ = dependent_round(inst, p, seed)
            assert sampler.sample(seed) == w


def test_trace_conserves_expected_spend():
    rng = random.Random(77)
    for _ in range(30):
        inst = random_instance(rng)
        p = random_feasible_p(rng, inst)
        _, trace = dependent_round(inst, p, rng.getrandbits(64))
        previous = None
        for rnd in trace.rounds:
            spend = sum(
                q * c for q, c in zip(rnd.q, inst.cost)
            )
            if previous is not None and len(rnd.indices) >= 2:
                assert spend == previous
            previous = spend
            assert all(0 <= q <= 1 for q in rnd.q)


def test_rounds_terminate_quickly():
    rng = random.Random(13)
    for _ in range(30):
        inst = random_instance(rng)
        p = random_feasible_p(rng, inst)
        _, trace = dependent_round(inst, p, rng.getrandbits(64))
        assert len(trace.rounds) <= inst.m


def test_integral_p_is_fixed_point():
    inst = two_voter_example()
    p = FractionalOutcome([1, 1, 0])
    for seed in range(20):
        w, trace = dependent_round(inst, p, seed)
        assert w == IntegralOutcome({0, 1})
        assert trace.rounds == ()


def test_hard_cap_never_overspends():
    rng = random.Random(31)
    for _ in range(20):
        inst = random_instance(rng)
        reduced = inst.budget - max(inst.cost)
        scale = reduced / inst.budget
        p = FractionalOutcome(
            [s * scale for s in random_feasible_p(rng, inst).shares]
        )
        for seed in range(50):
            w = round_with_hard_cap(inst, p, seed)
            assert w.cost(inst) <= inst.budget


def test_zero_cost_projects_round_independently():
    inst = PBInstance(
        budget=Fraction(1),
        cost=(Fraction(0), Fraction(1), Fraction(1)),
        utilities=((Fraction(1), Fraction(1), Fraction(1)),),
        project_ids=("a", "b", "c"),
        voter_ids=("v1",),
    )
    p = FractionalOutcome(["1/3", "1/2", "1/2"])
    sampler = RoundingSampler(inst, p)
    probs = sampler.probabilities()
    assert sum(probs.values()) == 1
    for j in range(3):
        marginal = sum(w for o, w in probs.items() if j in o.projects)
        assert marginal == p.shares[j]


def test_is_bb1_and_is_bfx():
    inst = two_voter_example()
    assert is_bb1(inst, IntegralOutcome({0, 1}))  # cost exactly B
    assert is_bb1(inst, IntegralOutcome({0}))  # adding any project crosses B
    assert is_bb1(inst, IntegralOutcome({0, 1, 2}))  # dropping one reaches B
    assert is_bfx(inst, IntegralOutcome({0, 1, 2}))
    assert not is_bfx(
        PBInstance(
            budget=Fraction(1),
            cost=(Fraction(1), Fraction(1), Fraction(1)),
            utilities=((Fraction(1), Fraction(1), Fraction(1)),),
            project_ids=("a", "b", "c"),
            voter_ids=("v1",),
        ),
        IntegralOutcome({0, 1, 2}),
    )
