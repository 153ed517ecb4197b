import random
from fractions import Fraction

import pytest

from pbbobw import (
    FractionalOutcome,
    IntegralOutcome,
    PBInstance,
    PaymentMatrix,
    SettingError,
    bw_gcr,
    bw_mes,
    check_ejr_binary,
    check_fjr_binary,
    check_gfs,
    check_strong_ufs,
    fractional_random_dictator,
    gcr,
    gen_gfs_jr_family,
    group_ladder,
    is_bb1,
    mes,
    unanimous_partition,
)

from conftest import random_instance, two_voter_example


# ---------------------------------------------------------------------------
# fractional random dictator


def test_frd_exhausts_budget():
    rng = random.Random(7)
    for _ in range(60):
        inst = random_instance(rng)
        p = fractional_random_dictator(inst)
        assert p.is_feasible(inst)


def test_frd_on_common_plus_personal_family():
    inst = gen_gfs_jr_family(6, Fraction(1), Fraction(1, 12))
    p = fractional_random_dictator(inst)
    shares = {
        inst.project_ids[j]: s for j, s in enumerate(p.shares)
    }
    # Each dictator funds a_i and b_i fully (cost 5/12 each), then puts the
    # remaining 1/6 of the budget into c_i; g never fits first.
    assert shares["g"] == 0
    for i in range(1, 7):
        assert shares[f"a{i}"] == Fraction(1, 6)
        assert shares[f"b{i}"] == Fraction(1, 6)
        assert shares[f"c{i}"] == Fraction(1, 15)


def test_frd_prefers_utility_per_cost():
    inst = PBInstance(
        budget=Fraction(2),
        cost=(Fraction(1), Fraction(2)),
        utilities=((Fraction(2), Fraction(3)),),
        project_ids=("cheap", "big"),
        voter_ids=("v1",),
    )
    p = fractional_random_dictator(inst)
    # cheap has ratio 2, big has ratio 3/2: fund cheap, then half of big.
    assert p.shares == (Fraction(1), Fraction(1, 2))


# ---------------------------------------------------------------------------
# greedy cohesive rule


def test_gcr_two_voter_example():
    inst = two_voter_example()
    trace = gcr(inst)
    assert trace.outcome == IntegralOutcome({0})
    assert len(trace.steps) == 1
    assert trace.steps[0].projects == (0,)
    assert set(trace.steps[0].voters) == {0, 1}


def test_gcr_output_is_fjr():
    rng = random.Random(23)
    for _ in range(50):
        inst = random_instance(rng, n_max=5, m_max=5, utilities="binary")
        trace = gcr(inst)
        assert trace.outcome.cost(inst) <= inst.budget
        assert check_fjr_binary(inst, trace.outcome).holds


def test_gcr_rejects_general_utilities():
    inst = PBInstance(
        budget=Fraction(1),
        cost=(Fraction(1),),
        utilities=((Fraction(1, 2),),),
        project_ids=("a",),
        voter_ids=("v1",),
    )
    with pytest.raises(SettingError):
        gcr(inst)


# ---------------------------------------------------------------------------
# method of equal shares


def test_mes_two_voter_example():
    inst = two_voter_example()
    result = mes(inst)
    assert result.outcome == IntegralOutcome({0})
    # 2 * min(1/2, rho) = cost(a) = 1/2, so a is affordable at rho = 1/4.
    assert result.rho == ((0, Fraction(1, 4)),)
    assert result.payments.y[0][0] == Fraction(1, 4)
    assert result.payments.y[1][0] == Fraction(1, 4)


def test_mes_unit_cost_pair():
    inst = PBInstance(
        budget=Fraction(2),
        cost=(Fraction(1), Fraction(1), Fraction(1)),
        utilities=(
            (Fraction(1), Fraction(1), Fraction(0)),
            (Fraction(1), Fraction(0), Fraction(1)),
        ),
        project_ids=("a", "b", "c"),
        voter_ids=("v1", "v2"),
    )
    result = mes(inst)
    # a at rho = 1/2 (each pays 1/2); afterwards nobody can buy b or c alone.
    assert result.outcome == IntegralOutcome({0})
    assert result.rho == ((0, Fraction(1, 2)),)
    assert result.payments.b == (Fraction(1, 2), Fraction(1, 2))


def test_mes_single_voter_spends_everything():
    inst = PBInstance(
        budget=Fraction(3),
        cost=(Fraction(3),),
        utilities=((Fraction(1),),),
        project_ids=("a",),
        voter_ids=("v1",),
    )
    result = mes(inst)
    assert result.outcome == IntegralOutcome({0})
    assert result.rho == ((0, Fraction(3)),)


def test_mes_never_selects_unapproved_project():
    rng = random.Random(41)
    for _ in range(60):
        inst = random_instance(rng, utilities="binary")
        result = mes(inst)
        for j in result.outcome.projects:
            assert any(
                inst.utilities[i][j] > 0 for i in range(inst.n)
            ) or inst.cost[j] == 0


def test_mes_payments_validate():
    rng = random.Random(43)
    for _ in range(60):
        inst = random_instance(rng, utilities=rng.choice(["binary", "cost"]))
        result = mes(inst)
        result.payments.validate(inst)
        for j in result.outcome.projects:
            paid = sum(result.payments.y[i][j] for i in range(inst.n))
            assert paid == inst.cost[j]


# ---------------------------------------------------------------------------
# group ladder


def test_group_ladder_prefix():
    inst = gen_gfs_jr_family(6, Fraction(1), Fraction(1, 12))
    cell = unanimous_partition(inst).cells[0]
    ladder = group_ladder(inst, cell)
    # One voter, budget 1/6: no project of cost >= 5/12 fits.
    assert ladder.projects == ()
    assert ladder.kappa == 0
    assert 0 < ladder.delta < 1


# ---------------------------------------------------------------------------
# best-of-both-worlds algorithms


def test_bw_gcr_two_voter_example():
    inst = two_voter_example()
    result = bw_gcr(inst, seed=5)
    assert result.fractional.shares == (Fraction(1), Fraction(1), Fraction(0))
    assert result.outcome == IntegralOutcome({0, 1})


def test_bw_mes_two_voter_example():
    inst = two_voter_example()
    result = bw_mes(inst, seed=5)
    assert result.fractional.shares == (
        Fraction(1),
        Fraction(1, 2),
        Fraction(1, 2),
    )
    assert result.outcome.projects >= {0}


def test_bw_gcr_properties_hold():
    rng = random.Random(61)
    for _ in range(30):
        inst = random_instance(rng, n_max=4, m_max=5, utilities="binary")
        result = bw_gcr(inst, seed=rng.getrandbits(32))
        p = result.fractional
        assert p.is_feasible(inst)
        assert check_strong_ufs(inst, p).holds
        assert is_bb1(inst, result.outcome)
        assert check_fjr_binary(inst, result.outcome).holds
        # The deterministic core survives rounding.
        assert result.trace.outcome.projects <= result.outcome.projects


def test_bw_mes_properties_hold():
    rng = random.Random(67)
    for _ in range(30):
        inst = random_instance(rng, n_max=4, m_max=5, utilities="binary")
        result = bw_mes(inst, seed=rng.getrandbits(32))
        p = result.fractional
        assert p.is_feasible(inst)
        assert check_strong_ufs(inst, p).holds
        assert is_bb1(inst, result.outcome)
        assert check_ejr_binary(inst, result.outcome).holds
        assert result.mes.outcome.projects <= result.outcome.projects
        result.payments.validate(inst)


def test_bw_mes_cost_utilities_gfs():
    rng = random.Random(73)
    for _ in range(30):
        inst = random_instance(rng, n_max=4, m_max=5, utilities="cost")
        result = bw_mes(inst, seed=rng.getrandbits(32))
        assert check_gfs(inst, result.fractional).holds
        assert check_strong_ufs(inst, result.fractional).holds
