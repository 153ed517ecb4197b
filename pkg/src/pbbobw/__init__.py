"""Fair lotteries over participatory-budgeting outcomes.

Exact-arithmetic implementations of fractional budgeting rules, a
marginal-preserving dependent-rounding scheme, ex-ante and ex-post
fairness checkers, and brute-force implementability oracles.
"""

from .exante import (
    ExAnteReport,
    UnanimousPartition,
    Witness,
    check_gfs,
    check_ifs,
    check_strong_ifs,
    check_strong_ufs,
    check_ufs,
    optimal_fractional_utility,
    unanimous_partition,
)
from .expost import (
    CohesivenessWitness,
    ExPostReport,
    SettingError,
    check_ejr_binary,
    check_ejrx_cost,
    check_fjr_binary,
    check_jr_binary,
    check_jr_general,
)
from .limits import ScaleError
from .lp import LinearConstraint, solve_feasibility
from .model import (
    FractionalOutcome,
    IntegralOutcome,
    Lottery,
    PBInstance,
    PaymentMatrix,
    Setting,
    ValidationError,
    classify,
    implements,
    instance_to_dict,
    parse_instance,
    parse_rational,
    rational_str,
    serialize_instance,
    utility,
)
from .oracle import (
    FeasibilityVerdict,
    OutcomePredicate,
    enumerate_outcomes,
    gen_bfx_family,
    gen_gfs_jr_family,
    gen_ifs_jr_family,
    gfs_rows,
    ifs_rows,
    lottery_feasible,
    predicate,
)
from .rounding import (
    RoundingSampler,
    RoundingTrace,
    dependent_round,
    derive_seed,
    is_bb1,
    is_bfx,
    round_with_hard_cap,
    splitmix64,
)
from .rules import (
    BWGCRResult,
    BWMESResult,
    GCRTrace,
    GroupLadder,
    InvariantViolation,
    MESResult,
    bw_gcr,
    bw_mes,
    fractional_random_dictator,
    gcr,
    group_ladder,
    mes,
)

__all__ = [
    "BWGCRResult",
    "BWMESResult",
    "CohesivenessWitness",
    "ExAnteReport",
    "ExPostReport",
    "FeasibilityVerdict",
    "FractionalOutcome",
    "GCRTrace",
    "GroupLadder",
    "IntegralOutcome",
    "InvariantViolation",
    "LinearConstraint",
    "Lottery",
    "MESResult",
    "OutcomePredicate",
    "PBInstance",
    "PaymentMatrix",
    "RoundingSampler",
    "RoundingTrace",
    "ScaleError",
    "Setting",
    "SettingError",
    "UnanimousPartition",
    "ValidationError",
    "Witness",
    "bw_gcr",
    "bw_mes",
    "check_ejr_binary",
    "check_ejrx_cost",
    "check_fjr_binary",
    "check_gfs",
    "check_ifs",
    "check_jr_binary",
    "check_jr_general",
    "check_strong_ifs",
    "check_strong_ufs",
    "check_ufs",
    "classify",
    "dependent_round",
    "derive_seed",
    "enumerate_outcomes",
    "fractional_random_dictator",
    "gcr",
    "gen_bfx_family",
    "gen_gfs_jr_family",
    "gen_ifs_jr_family",
    "gfs_rows",
    "group_ladder",
    "ifs_rows",
    "implements",
    "instance_to_dict",
    "is_bb1",
    "is_bfx",
    "lottery_feasible",
    "mes",
    "optimal_fractional_utility",
    "parse_instance",
    "parse_rational",
    "predicate",
    "rational_str",
    "round_with_hard_cap",
    "serialize_instance",
    "solve_feasibility",
    "splitmix64",
    "unanimous_partition",
    "utility",
]

__version__ = "0.1.0"
