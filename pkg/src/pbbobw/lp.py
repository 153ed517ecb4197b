"""Exact rational linear feasibility via phase-one simplex.

Decides whether {x >= 0 : A x (rel) b} is non-empty, returning a feasible
point when one exists. Pivoting uses Bland's rule, so termination is
guaranteed; all arithmetic is over Fractions, so verdicts carry no
tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Optional, Sequence

Relation = Literal["<=", "=", ">="]


@dataclass(frozen=True)
class LinearConstraint:
    coefficients: tuple[Fraction, ...]
    relation: Relation
    bound: Fraction


def solve_feasibility(
    constraints: Sequence[LinearConstraint], num_vars: int
) -> Optional[list[Fraction]]:
    """Return x >= 0 satisfying all constraints, or None if infeasible."""
    rows: list[list[Fraction]] = []
    relations: list[Relation] = []
    rhs: list[Fraction] = []
    for con in constraints:
        if len(con.coefficients) != num_vars:
            raise ValueError("constraint has wrong arity")
        coeffs = [Fraction(c) for c in con.coefficients]
        bound = Fraction(con.bound)
        rel = con.relation
        if bound < 0:
            coeffs = [-c for c in coeffs]
            bound = -bound
            rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
        rows.append(coeffs)
        relations.append(rel)
        rhs.append(bound)

    num_rows = len(rows)
    num_slack = sum(1 for r in relations if r != "=")
    # Columns: structural vars, slack/surplus vars, artificial vars, rhs.
    slack_base = num_vars
    art_base = num_vars + num_slack
    total = art_base + num_rows
    tableau = [[Fraction(0)] * (total + 1) for _ in range(num_rows)]
    basis = [0] * num_rows
    cost = [Fraction(0)] * total

    slack_index = 0
    for r in range(num_rows):
        for j in range(num_vars):
            tableau[r][j] = rows[r][j]
        tableau[r][total] = rhs[r]
        if relations[r] == "<=":
            tableau[r][slack_base + slack_index] = Fraction(1)
            basis[r] = slack_base + slack_index
            slack_index += 1
        elif relations[r] == ">=":
            tableau[r][slack_base + slack_index] = Fraction(-1)
            slack_index += 1
            tableau[r][art_base + r] = Fraction(1)
            basis[r] = art_base + r
            cost[art_base + r] = Fraction(1)
        else:
            tableau[r][art_base + r] = Fraction(1)
            basis[r] = art_base + r
            cost[art_base + r] = Fraction(1)

    while True:
        # Reduced costs under the phase-one objective (sum of artificials).
        duals = [cost[basis[r]] for r in range(num_rows)]
        entering = -1
        for j in range(total):
            if j == basis_member(basis, j):
                continue
            reduced = cost[j] - sum(
                duals[r] * tableau[r][j] for r in range(num_rows)
            )
            if reduced < 0:
                entering = j
                break
        if entering < 0:
            break
        leaving = -1
        best_ratio: Optional[Fraction] = None
        for r in range(num_rows):
            a = tableau[r][entering]
            if a > 0:
                ratio = tableau[r][total] / a
                if (
                    best_ratio is None
                    or ratio < best_ratio
                    or (ratio == best_ratio and basis[r] < basis[leaving])
                ):
                    best_ratio = ratio
                    leaving = r
        if leaving < 0:
            # Phase-one objective is bounded below by 0; unbounded descent
            # cannot happen, but guard against malformed input.
            raise ArithmeticError("phase-one simplex unbounded")
        pivot = tableau[leaving][entering]
        tableau[leaving] = [v / pivot for v in tableau[leaving]]
        for r in range(num_rows):
            if r == leaving:
                continue
            factor = tableau[r][entering]
            if factor != 0:
                row_l = tableau[leaving]
                tableau[r] = [
                    v - factor * w for v, w in zip(tableau[r], row_l)
                ]
        basis[leaving] = entering

    objective = sum(
        cost[basis[r]] * tableau[r][total] for r in range(num_rows)
    )
    if objective != 0:
        return None
    solution = [Fraction(0)] * num_vars
    for r in range(num_rows):
        if basis[r] < num_vars:
            solution[basis[r]] = tableau[r][total]
    return solution


def basis_member(basis: list[int], j: int) -> int:
    """Return j if j is basic (skip pricing it), else -1."""
    return j if j in basis else -1
