"""Shared fixtures: small attribute spaces, random instance generators and
brute-force oracles used to cross-check the solvers."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest

from cleo.core import (
    And,
    Atom,
    BoolLit,
    CatalogAttribute,
    Configuration,
    Formula,
    Implies,
    Kind,
    LinearExpr,
    LinearPredicate,
    Not,
    Or,
    Problem,
    Relation,
    SoftConstraint,
    eval_formula,
)


def ordinal(i, name, lo, hi):
    return CatalogAttribute(i, name, Kind.ORDINAL, Fraction(lo), Fraction(hi))


def real(i, name, lo, hi):
    return CatalogAttribute(i, name, Kind.REAL, Fraction(lo), Fraction(hi))


def boolean(i, name):
    return CatalogAttribute(i, name, Kind.BOOLEAN)


def lin(coeffs, rel, rhs, const=0):
    return LinearPredicate(LinearExpr.of(coeffs, const), rel, Fraction(rhs))


@pytest.fixture
def xyz_attrs():
    """Three integer attributes on [-10, 10], as in the worked solver example."""
    return (ordinal(0, "x", -10, 10), ordinal(1, "y", -10, 10), ordinal(2, "z", -10, 10))


def example_delta(xyz_attrs):
    """x+y+z <= 3 and (x <= y or z = 2) and (x >= 2 or x != z)."""
    a_sum = lin({0: 1, 1: 1, 2: 1}, Relation.LE, 3)
    a_xy = lin({0: 1, 1: -1}, Relation.LE, 0)
    a_z2 = lin({2: 1}, Relation.EQ, 2)
    a_x2 = lin({0: 1}, Relation.GE, 2)
    a_ne = lin({0: 1, 2: -1}, Relation.NE, 0)
    return [
        Atom(a_sum),
        Or((Atom(a_xy), Atom(a_z2))),
        Or((Atom(a_x2), Atom(a_ne))),
    ]


def all_configs(attrs):
    """Every configuration of a finite (boolean/ordinal) attribute space."""
    domains = []
    for a in attrs:
        if a.kind == Kind.BOOLEAN:
            domains.append([False, True])
        elif a.kind == Kind.ORDINAL:
            domains.append(list(range(int(a.lo), int(a.hi) + 1)))
        else:
            raise ValueError("grid enumeration needs a finite space")
    for combo in itertools.product(*domains):
        yield Configuration(tuple(combo))


def brute_force_sat(formulas, attrs):
    return any(all(eval_formula(f, c) for f in formulas) for c in all_configs(attrs))


def brute_force_best(problem, maximize=True):
    """Exhaustive optimum of the weighted soft constraints under the hard part."""
    best = None
    for c in all_configs(problem.attributes):
        if not all(eval_formula(f, c) for f in problem.hard):
            continue
        val = sum(
            (s.weight for s in problem.soft if all(eval_formula(Atom(a), c) for a in s.atoms)),
            Fraction(0),
        )
        if best is None or (val > best if maximize else val < best):
            best = val
    return best


def random_formula(rng: random.Random, attrs, depth=3) -> Formula:
    """Random formula tree over boolean literals and small linear predicates."""
    bools = [a for a in attrs if a.kind == Kind.BOOLEAN]
    nums = [a for a in attrs if a.kind != Kind.BOOLEAN]

    def leaf():
        if bools and (not nums or rng.random() < 0.4):
            a = rng.choice(bools)
            return Atom(BoolLit(a.id, rng.random() < 0.5))
        k = rng.randint(1, min(2, len(nums)))
        chosen = rng.sample(nums, k)
        coeffs = {a.id: rng.choice([-2, -1, 1, 2]) for a in chosen}
        rel = rng.choice(list(Relation))
        rhs = rng.randint(-5, 8)
        return Atom(lin(coeffs, rel, rhs))

    def node(d):
        if d == 0 or rng.random() < 0.3:
            return leaf()
        kind = rng.choice(["not", "and", "or", "implies"])
        if kind == "not":
            return Not(node(d - 1))
        if kind == "implies":
            return Implies(node(d - 1), node(d - 1))
        parts = tuple(node(d - 1) for _ in range(rng.randint(2, 3)))
        return And(parts) if kind == "and" else Or(parts)

    return node(depth)


def random_soft_problem(rng: random.Random, max_attrs=3, max_soft=5, with_hard=False):
    """Small finite-space weighted instance for brute-force comparison."""
    n = rng.randint(2, max_attrs)
    attrs = []
    for i in range(n):
        if rng.random() < 0.5:
            attrs.append(boolean(i, f"b{i}"))
        else:
            hi = rng.randint(1, 5)
            attrs.append(ordinal(i, f"o{i}", 0, hi))
    attrs = tuple(attrs)

    def rand_atom():
        a = rng.choice(attrs)
        if a.kind == Kind.BOOLEAN:
            return BoolLit(a.id, rng.random() < 0.5)
        rel = rng.choice([Relation.LT, Relation.LE, Relation.EQ, Relation.NE, Relation.GE, Relation.GT])
        return lin({a.id: rng.choice([-1, 1, 2])}, rel, rng.randint(-1, int(a.hi) + 1))

    soft = []
    for _ in range(rng.randint(1, max_soft)):
        n_atoms = rng.randint(1, 2)
        atoms = set()
        while len(atoms) < n_atoms:
            atoms.add(rand_atom())
        weight = rng.choice([w for w in range(-9, 10) if w != 0])
        soft.append(SoftConstraint.of(atoms, weight))
    hard = ()
    if with_hard and rng.random() < 0.5:
        hard = (random_formula(rng, attrs, depth=2),)
    return Problem(attrs, hard, tuple(soft))
