"""Weighted Max-SMT: maximize the weighted sum of satisfied soft constraints
subject to hard formulas, by branch-and-bound over plain SMT solves.

Each soft item gets a relaxation selector r with the clause (item or r); the
objective bound "achieved weight >= W" is enforced pseudo-Boolean-style over
the selector literals inside the SAT search (weights are constants, so the
arithmetic theory never sees them). Negative weights are removed up front by
the complement transformation, which preserves every configuration's
objective up to a constant offset. Ties among optimal models are broken by
solver determinism for the given seed; different seeds may return different
optima of equal value.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Optional, Sequence

from .core import (
    BoolLit,
    Configuration,
    Formula,
    Not,
    Problem,
    SoftConstraint,
    eval_atomic,
    eval_formula,
)
from .smt import SharedTheory, SmtSession, conjunction_obviously_impossible

ZERO = Fraction(0)


@dataclass(frozen=True)
class WeightedFormula:
    """A normalized soft item: arbitrary formula with a positive weight."""

    formula: Formula
    weight: Fraction


@dataclass(frozen=True)
class OptResult:
    model: Configuration
    value: Fraction  # original-scale objective


def normalize_weights(soft: Sequence[SoftConstraint]) -> tuple[list[WeightedFormula], Fraction]:
    """Flip negative-weight items to their negation; drop zero weights.

    Returns (items, offset) with all item weights > 0 and, for every
    configuration c: sum of original weights satisfied at c equals
    sum of normalized weights satisfied at c plus offset.
    """
    items: list[WeightedFormula] = []
    offset = ZERO
    for s in soft:
        if s.weight == 0:
            continue
        if s.weight > 0:
            items.append(WeightedFormula(s.formula(), s.weight))
        else:
            items.append(WeightedFormula(Not(s.formula()), -s.weight))
            offset += s.weight
    return items, offset


def _objective(items: Sequence[WeightedFormula], model: Configuration) -> Fraction:
    return sum((it.weight for it in items if eval_formula(it.formula, model)), ZERO)


def _encode(
    problem: Problem,
    extra_hard: Sequence[Formula],
    seed: int,
    shared: Optional[SharedTheory],
    phase: Optional[Configuration],
):
    """Session with relaxation selectors for every live soft item."""
    # a conjunction that can never hold contributes exactly 0 for any model
    live = tuple(
        s for s in problem.soft
        if not conjunction_obviously_impossible(s.atoms, problem.attributes)
    )
    items, offset = normalize_weights(live)
    session = SmtSession((), problem.attributes, seed, shared)

    # Selectors take the lowest variable indices, heaviest item first, so the
    # lowest-index branching rule enumerates feature subsets in roughly
    # value-greedy order and the weight-bound prune fires immediately;
    # keeping an item (selector false) unit-propagates its formula.
    order = sorted(range(len(items)), key=lambda i: (-items[i].weight, i))
    selectors = [0] * len(items)
    for i in order:
        selectors[i] = session.builder.new_var()
    for f in list(problem.hard) + list(extra_hard):
        session.builder.assert_formula(f)
    for r, it in zip(selectors, items):
        implied = session.define_soft(it.formula)
        session.add_clause([implied, r])
    hints = {r: False for r in selectors}
    if phase is not None:
        # polarize only the soft-item atoms toward the phase configuration:
        # attributes outside the objective must keep their seed-randomized
        # branching so successive solves keep probing them
        soft_atoms = set()
        for s in problem.soft:
            for a in s.atoms:
                soft_atoms.add(BoolLit(a.attr_id, True) if isinstance(a, BoolLit) else a)
        for v, atom in session.builder.var_atom.items():
            if atom in soft_atoms:
                hints[v] = eval_atomic(atom, phase)
    return session, items, offset, selectors, hints


def maximize(
    problem: Problem,
    extra_hard: Sequence[Formula] = (),
    seed: int = 0,
    shared: Optional[SharedTheory] = None,
    phase: Optional[Configuration] = None,
) -> Optional[OptResult]:
    """Globally optimal model of the weighted soft constraints under
    hard & extra_hard; None when the hard part is unsatisfiable. A SharedTheory
    lets repeated optimizations over one attribute space reuse theory facts;
    `phase` polarizes atom branching toward a known-good configuration so the
    first incumbents score high."""
    session, items, offset, selectors, hints = _encode(
        problem, extra_hard, seed, shared, phase
    )
    model = session.solve(None, hints)
    if model is None:
        return None
    best, best_val = model, _objective(items, model)

    if items:
        unit = lcm(*(it.weight.denominator for it in items))
        weights_int = [int(it.weight * unit) for it in items]
        step = gcd(*weights_int)
        pb_items = [(-r, w) for r, w in zip(selectors, weights_int)]
        # bound tightening by bisection on the step grid: each round either
        # lifts the incumbent to the achieved value or lowers the ceiling;
        # the final failed solve certifies optimality
        lo = int(best_val * unit)
        hi = sum(weights_int)
        while lo < hi:
            mid = lo + ((hi - lo + step) // (2 * step)) * step
            model = session.solve((pb_items, mid), hints)
            if model is None:
                hi = mid - step
            else:
                value = _objective(items, model)
                assert int(value * unit) >= mid
                best, best_val = model, value
                lo = int(value * unit)

    return OptResult(best, best_val + offset)


def minimize(
    problem: Problem, seed: int = 0, shared: Optional[SharedTheory] = None
) -> Optional[OptResult]:
    """Minimum-objective model: maximize with negated weights, value negated back."""
    flipped = tuple(SoftConstraint(s.atoms, -s.weight) for s in problem.soft)
    res = maximize(Problem(problem.attributes, problem.hard, flipped), seed=seed, shared=shared)
    if res is None:
        return None
    return OptResult(res.model, -res.value)


def certify_optimal(
    problem: Problem,
    value: Fraction,
    extra_hard: Sequence[Formula] = (),
    seed: int = 0,
) -> bool:
    """Independent optimality certificate: demanding one weight step above
    `value` (original scale) must be unsatisfiable."""
    session, items, offset, selectors, hints = _encode(problem, extra_hard, seed, None, None)
    if not items:
        return value == offset
    unit = lcm(*(it.weight.denominator for it in items))
    weights_int = [int(it.weight * unit) for it in items]
    step = gcd(*weights_int)
    pb_items = [(-r, w) for r, w in zip(selectors, weights_int)]
    bound = int((value - offset) * unit) + step
    return session.solve((pb_items, bound), hints) is None
