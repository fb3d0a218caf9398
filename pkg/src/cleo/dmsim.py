"""Simulated decision makers: hidden ground-truth utilities, the
Thurstone-Mosteller (probit) noisy response model, and the three benchmark
instance generators (job scheduling, housing, boolean terms).

All generator constants that the benchmarks leave open (time horizons,
attribute ranges, price coefficients, hard-constraint thresholds) live in
documented records below so experiments are reproducible and tweakable.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Sequence

from .core import (
    And,
    Atom,
    AtomicConstraint,
    BoolLit,
    CatalogAttribute,
    Configuration,
    Formula,
    Implies,
    Kind,
    LinearExpr,
    LinearPredicate,
    Not,
    Relation,
    SoftConstraint,
    atom_from_json,
    atom_to_json,
    eval_atomic,
    rational_str,
    as_rational,
)
from .elicit import REAL_LATTICE, ProblemSkeleton
from .smt import smt_solve


class GenerationError(RuntimeError):
    """The requested instance shape could not be realized."""


# ---------------------------------------------------------------------------
# Probit response model
# ---------------------------------------------------------------------------


def _std_normal_cdf(z: float) -> float:
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


@dataclass(frozen=True)
class NoiseConfig:
    variance: float = 10.0

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("noise variance must be non-negative")


def prob_prefer(f_i: float, f_j: float, variance: float = 10.0) -> float:
    """P(i preferred to j) when both latent utilities carry IID Gaussian
    noise of the given variance; closed form 1 - Phi((f_j-f_i)/(sqrt(2)*sigma))."""
    if variance < 0:
        raise ValueError("variance must be non-negative")
    if variance == 0:
        if f_i > f_j:
            return 1.0
        return 0.5 if f_i == f_j else 0.0
    sigma = math.sqrt(variance)
    return 1.0 - _std_normal_cdf((float(f_j) - float(f_i)) / (math.sqrt(2.0) * sigma))


@dataclass(frozen=True)
class TrueUtility:
    """Hidden weighted conjunctions; the learner never sees these."""

    soft: tuple[SoftConstraint, ...]

    def value(self, c: Configuration) -> Fraction:
        total = Fraction(0)
        for s in self.soft:
            if all(eval_atomic(a, c) for a in s.atoms):
                total += s.weight
        return total

    def decisional_atoms(self) -> frozenset[AtomicConstraint]:
        out: set[AtomicConstraint] = set()
        for s in self.soft:
            out |= set(s.atoms)
        return frozenset(out)


def noisy_compare(
    c_i: Configuration,
    c_j: Configuration,
    utility: TrueUtility,
    variance: float,
    rng: random.Random,
) -> bool:
    """True when the simulated DM prefers c_i; one Gaussian draw per side."""
    if variance == 0:
        return utility.value(c_i) > utility.value(c_j)
    sigma = math.sqrt(variance)
    y_i = float(utility.value(c_i)) + rng.gauss(0.0, sigma)
    y_j = float(utility.value(c_j)) + rng.gauss(0.0, sigma)
    return y_i > y_j


def noisy_rank(
    configs: Sequence[Configuration],
    utility: TrueUtility,
    variance: float,
    rng: random.Random,
) -> list[Configuration]:
    """Rank by latent utility plus one noise draw per configuration."""
    if len(configs) < 2:
        raise ValueError("ranking needs at least two configurations")
    if variance == 0:
        keyed = [(utility.value(c), -i) for i, c in enumerate(configs)]
    else:
        sigma = math.sqrt(variance)
        keyed = [
            (float(utility.value(c)) + rng.gauss(0.0, sigma), -i)
            for i, c in enumerate(configs)
        ]
    order = sorted(range(len(configs)), key=lambda i: keyed[i], reverse=True)
    return [configs[i] for i in order]


# ---------------------------------------------------------------------------
# Ground-truth sampling shared by the generators
# ---------------------------------------------------------------------------


def _sample_truth(
    atoms: Sequence[AtomicConstraint],
    rng: random.Random,
    n_feat: int,
    n_soft: int,
    size_choices: Sequence[int],
    min_size3: int,
    draw_weight: Callable[[random.Random], int],
    retries: int = 1000,
) -> TrueUtility:
    """Weighted conjunctions whose decisional-atom union is exactly n_feat,
    with the required quota of size-3 constraints."""
    if n_feat > len(atoms):
        raise GenerationError(f"need {n_feat} decisional atoms, only {len(atoms)} exist")
    sizes_ok = [s for s in size_choices if s <= n_feat]
    if not sizes_ok or (min_size3 > 0 and 3 > n_feat):
        raise GenerationError("size rules are unsatisfiable for this atom count")

    def draw_sizes():
        return [3] * min(min_size3, n_soft) + [
            rng.choice(sizes_ok) for _ in range(n_soft - min(min_size3, n_soft))
        ]

    # plain rejection first: fully uniform conditional on the union hitting
    # the pool exactly
    for _ in range(retries):
        pool = rng.sample(range(len(atoms)), n_feat)
        sizes = draw_sizes()
        if sum(sizes) < n_feat:
            continue
        chosen = [tuple(sorted(rng.sample(pool, s))) for s in sizes]
        if len(set(chosen)) != n_soft:
            continue
        if len(set().union(*chosen)) != n_feat:
            continue
        soft = tuple(
            SoftConstraint.of([atoms[i] for i in idxs], draw_weight(rng)) for idxs in chosen
        )
        return TrueUtility(soft)

    # coverage-first fallback for shapes rejection almost never hits (e.g.
    # nine constraints that must jointly touch fifteen atoms): deal every
    # pool atom into a random constraint with spare capacity, then fill
    for _ in range(retries):
        pool = rng.sample(range(len(atoms)), n_feat)
        sizes = draw_sizes()
        if sum(sizes) < n_feat:
            continue
        members: list[set[int]] = [set() for _ in range(n_soft)]
        ok = True
        for atom_idx in pool:
            open_slots = [
                i for i in range(n_soft) if len(members[i]) < sizes[i] and atom_idx not in members[i]
            ]
            if not open_slots:
                ok = False
                break
            members[rng.choice(open_slots)].add(atom_idx)
        if not ok:
            continue
        for i in range(n_soft):
            while len(members[i]) < sizes[i]:
                members[i].add(rng.choice([a for a in pool if a not in members[i]]))
        chosen = [tuple(sorted(m)) for m in members]
        if len(set(chosen)) != n_soft:
            continue
        soft = tuple(
            SoftConstraint.of([atoms[i] for i in idxs], draw_weight(rng)) for idxs in chosen
        )
        return TrueUtility(soft)
    raise GenerationError(f"could not realize ({n_feat}, {n_soft}) after {retries} tries")


def _positive_weight(rng: random.Random) -> int:
    return rng.randint(1, 100)


def _signed_weight(rng: random.Random) -> int:
    k = rng.randint(1, 200)
    return k - 101 if k <= 100 else k - 100


# ---------------------------------------------------------------------------
# Scheduling benchmark: 5 jobs, difference-arithmetic overlap atoms
# ---------------------------------------------------------------------------

SCHEDULING_JOBS = 5
SCHEDULING_HORIZON = (0, 50)
SCHEDULING_DURATIONS = (3, 10)


def gen_scheduling(n_feat: int, n_soft: int, rng: random.Random):
    """Start-time attributes for five jobs; for each ordered job pair the two
    atoms 'j starts while i runs' and 'j waits for i' (40 atoms total)."""
    attrs = tuple(
        CatalogAttribute(
            i, f"start_{i + 1}", Kind.ORDINAL,
            Fraction(SCHEDULING_HORIZON[0]), Fraction(SCHEDULING_HORIZON[1]),
        )
        for i in range(SCHEDULING_JOBS)
    )
    durations = [rng.randint(*SCHEDULING_DURATIONS) for _ in range(SCHEDULING_JOBS)]
    atoms: list[AtomicConstraint] = []
    for i in range(SCHEDULING_JOBS):
        for j in range(SCHEDULING_JOBS):
            if i == j:
                continue
            diff = LinearExpr.of({j: 1, i: -1})
            atoms.append(LinearPredicate(diff, Relation.LT, Fraction(durations[i])))
            atoms.append(LinearPredicate(diff, Relation.GE, Fraction(durations[i])))
    truth = _sample_truth(atoms, rng, n_feat, n_soft, (1, 2, 3), 2, _positive_weight)
    skeleton = ProblemSkeleton(attrs, hard=(), atoms=tuple(atoms))
    return skeleton, truth


# ---------------------------------------------------------------------------
# Housing benchmark
# ---------------------------------------------------------------------------

HOUSING_ATTRIBUTES = (
    # (name, kind, lo, hi) — price bounds derive from the coefficients below
    ("house_type", Kind.ORDINAL, 1, 5),
    ("garden", Kind.BOOLEAN, None, None),
    ("garage", Kind.BOOLEAN, None, None),
    ("commercial_nearby", Kind.BOOLEAN, None, None),
    ("green_areas", Kind.BOOLEAN, None, None),
    ("cycling_walking", Kind.BOOLEAN, None, None),
    ("dist_downtown", Kind.REAL, 0, 50),
    ("crime_rate", Kind.REAL, 0, 10),
    ("taxes", Kind.REAL, 0, 5000),
    ("transit_quality", Kind.REAL, 0, 10),
    ("dist_high_schools", Kind.REAL, 0, 50),
    ("dist_free_parking", Kind.REAL, 0, 50),
    ("dist_work", Kind.REAL, 0, 50),
    ("dist_parents", Kind.REAL, 0, 50),
)

# price model: base plus linear terms, one house_type x garden interaction
HOUSING_PRICE = {
    "base": 120000,
    "house_type": 25000,
    "garden": 20000,
    "garage": 15000,
    "green_areas": 10000,
    "transit_quality": 6000,
    "crime_rate": -4000,
    "dist_downtown": -1500,
    "type_garden_interaction": 3000,
}

# hard-constraint thresholds rho_1 .. rho_13
HOUSING_RHO = (300000, 1000, 6, 3, 10, 20, 20, 20, 5, 15, 15, 2, 3)

_HT, _GARDEN, _GARAGE, _COMMERCIAL, _GREEN, _CYCLING = 0, 1, 2, 3, 4, 5
_DOWNTOWN, _CRIME, _TAXES, _TRANSIT = 6, 7, 8, 9
_SCHOOLS, _PARKING, _WORK, _PARENTS, _PRICE = 10, 11, 12, 13, 14


def housing_price(values) -> Fraction:
    p = HOUSING_PRICE
    total = Fraction(p["base"])
    ht_coef = p["house_type"] + (p["type_garden_interaction"] if values[_GARDEN] else 0)
    total += ht_coef * Fraction(values[_HT])
    if values[_GARDEN]:
        total += p["garden"]
    if values[_GARAGE]:
        total += p["garage"]
    if values[_GREEN]:
        total += p["green_areas"]
    total += p["transit_quality"] * Fraction(values[_TRANSIT])
    total += p["crime_rate"] * Fraction(values[_CRIME])
    total += p["dist_downtown"] * Fraction(values[_DOWNTOWN])
    return total


def _housing_price_bounds() -> tuple[Fraction, Fraction]:
    corners = []
    for garden in (False, True):
        for garage in (False, True):
            for green in (False, True):
                for ht in (1, 5):
                    for transit in (0, 10):
                        for crime in (0, 10):
                            for dd in (0, 50):
                                vals = [None] * 15
                                vals[_HT], vals[_GARDEN], vals[_GARAGE] = ht, garden, garage
                                vals[_GREEN] = green
                                vals[_TRANSIT], vals[_CRIME], vals[_DOWNTOWN] = transit, crime, dd
                                corners.append(housing_price(vals))
    return min(corners), max(corners)


def _le(attr_id: int, rhs) -> Formula:
    return Atom(LinearPredicate(LinearExpr.of({attr_id: 1}), Relation.LE, Fraction(rhs)))


def _ge(attr_id: int, rhs) -> Formula:
    return Atom(LinearPredicate(LinearExpr.of({attr_id: 1}), Relation.GE, Fraction(rhs)))


def _price_definition() -> Formula:
    """Case split over the three boolean price inputs; each case pins price
    by a pair of linear bounds (booleans never enter linear expressions, and
    the le/ge pair keeps negations conjunctive for the theory solver)."""
    p = HOUSING_PRICE
    cases = []
    for garden, garage, green in product((False, True), repeat=3):
        const = Fraction(
            p["base"]
            + (p["garden"] if garden else 0)
            + (p["garage"] if garage else 0)
            + (p["green_areas"] if green else 0)
        )
        ht_coef = p["house_type"] + (p["type_garden_interaction"] if garden else 0)
        expr = LinearExpr.of(
            {
                _PRICE: 1,
                _HT: -ht_coef,
                _TRANSIT: -p["transit_quality"],
                _CRIME: -p["crime_rate"],
                _DOWNTOWN: -p["dist_downtown"],
            }
        )
        cube = And(
            (
                Atom(BoolLit(_GARDEN, garden)),
                Atom(BoolLit(_GARAGE, garage)),
                Atom(BoolLit(_GREEN, green)),
            )
        )
        pinned = And(
            (
                Atom(LinearPredicate(expr, Relation.LE, const)),
                Atom(LinearPredicate(expr, Relation.GE, const)),
            )
        )
        cases.append(Implies(cube, pinned))
    return And(tuple(cases))


def housing_hard_formulas() -> tuple[Formula, ...]:
    r = HOUSING_RHO
    sum_ge = lambda a, b, rhs: Atom(
        LinearPredicate(LinearExpr.of({a: 1, b: 1}), Relation.GE, Fraction(rhs))
    )
    return (
        # 1: price cap, bundled with the definitional link that makes price a
        # function of the other attributes
        And((_price_definition(), _le(_PRICE, r[0]))),
        # 2: cheap locations lack green areas and good transit
        Implies(_le(_TAXES, r[1]), And((Not(Atom(BoolLit(_GREEN))), Not(_le(_TRANSIT, r[2]))))),
        # 3: commercial districts exclude garden+garage combos
        Implies(Atom(BoolLit(_COMMERCIAL)), Not(And((Atom(BoolLit(_GARDEN)), Atom(BoolLit(_GARAGE)))))),
        # 4: safe areas are far from downtown
        Implies(_le(_CRIME, r[3]), _ge(_DOWNTOWN, r[4])),
        # 5-7: pairwise distance trade-offs
        sum_ge(_WORK, _PARENTS, r[5]),
        sum_ge(_WORK, _SCHOOLS, r[6]),
        sum_ge(_PARENTS, _SCHOOLS, r[7]),
        # 8: free parking nearby excludes green areas
        Implies(_le(_PARKING, r[8]), Not(Atom(BoolLit(_GREEN)))),
        # 9: living near the parents implies far-from-downtown, nonzero crime
        Implies(_le(_PARENTS, r[9]), And((_ge(_DOWNTOWN, r[10]), _ge(_CRIME, r[11])))),
        # 10: gardens need a house type above the threshold
        Implies(Atom(BoolLit(_GARDEN)), _ge(_HT, r[12])),
    )


def housing_attributes() -> tuple[CatalogAttribute, ...]:
    attrs = []
    for i, (name, kind, lo, hi) in enumerate(HOUSING_ATTRIBUTES):
        if kind == Kind.BOOLEAN:
            attrs.append(CatalogAttribute(i, name, kind))
        else:
            attrs.append(CatalogAttribute(i, name, kind, Fraction(lo), Fraction(hi)))
    lo, hi = _housing_price_bounds()
    attrs.append(CatalogAttribute(_PRICE, "price", Kind.REAL, lo, hi))
    return tuple(attrs)


HOUSING_NUM_ATOMS = 40


def gen_housing(n_feat: int, n_soft: int, rng: random.Random):
    """Fifteen catalog attributes, ten hard formulas, forty atoms: the five
    boolean attributes as positive literals plus 35 threshold predicates."""
    attrs = housing_attributes()
    hard = housing_hard_formulas()
    if not smt_solve(list(hard), attrs, seed=0).is_sat:
        raise GenerationError("default housing thresholds are infeasible")

    atoms: list[AtomicConstraint] = [
        BoolLit(i, True) for i in (_GARDEN, _GARAGE, _COMMERCIAL, _GREEN, _CYCLING)
    ]
    numeric = [_HT, _DOWNTOWN, _CRIME, _TAXES, _TRANSIT, _SCHOOLS, _PARKING, _WORK, _PARENTS, _PRICE]
    seen = set()
    while len(atoms) < HOUSING_NUM_ATOMS:
        attr = attrs[rng.choice(numeric)]
        step = rng.randint(0, REAL_LATTICE)
        theta = attr.lo + (attr.hi - attr.lo) * Fraction(step, REAL_LATTICE)
        key = (attr.id, theta)
        if key in seen:
            continue
        seen.add(key)
        atoms.append(LinearPredicate(LinearExpr.of({attr.id: 1}), Relation.LT, theta))

    truth = _sample_truth(atoms, rng, n_feat, n_soft, (2, 3), 1, _positive_weight)
    skeleton = ProblemSkeleton(
        attrs, hard=hard, atoms=tuple(atoms), derived=((_PRICE, housing_price),)
    )
    return skeleton, truth


# ---------------------------------------------------------------------------
# Boolean-terms benchmark
# ---------------------------------------------------------------------------


def gen_maxsat(n_feat: int, n_soft: int, rng: random.Random):
    """Purely boolean attributes; atoms are the positive literals and weights
    may be negative (dislikes)."""
    attrs = tuple(CatalogAttribute(i, f"x{i + 1}", Kind.BOOLEAN) for i in range(n_feat))
    atoms: list[AtomicConstraint] = [BoolLit(i, True) for i in range(n_feat)]
    truth = _sample_truth(atoms, rng, n_feat, n_soft, (1, 2, 3), 2, _signed_weight)
    skeleton = ProblemSkeleton(attrs, hard=(), atoms=tuple(atoms))
    return skeleton, truth


GENERATORS = {
    "scheduling": gen_scheduling,
    "housing": gen_housing,
    "maxsat": gen_maxsat,
}


# ---------------------------------------------------------------------------
# serialization: problem file (with the atom list) plus hidden truth sidecar
# ---------------------------------------------------------------------------


def skeleton_to_json(sk: ProblemSkeleton) -> dict:
    from .core import problem_to_json

    doc = problem_to_json(sk.problem())
    doc["atoms"] = [atom_to_json(a) for a in sk.atoms]
    return doc


def skeleton_from_json(doc: dict) -> ProblemSkeleton:
    """Rebuild a skeleton; derived hooks do not serialize. When no atom list
    is present, defaults to boolean literals plus the atoms of hard/soft
    formulas."""
    from .core import formula_atoms, problem_from_json

    p = problem_from_json(doc)
    if "atoms" in doc:
        atoms = tuple(atom_from_json(a) for a in doc["atoms"])
    else:
        seen: list[AtomicConstraint] = []
        for a in p.attributes:
            if a.kind == Kind.BOOLEAN:
                seen.append(BoolLit(a.id, True))
        for f in p.hard:
            seen.extend(formula_atoms(f))
        for s in p.soft:
            seen.extend(s.atoms)
        uniq = []
        for a in seen:
            if a not in uniq:
                uniq.append(a)
        atoms = tuple(uniq)
    return ProblemSkeleton(p.attributes, p.hard, atoms)


def truth_to_json(t: TrueUtility) -> dict:
    return {
        "soft": [
            {"atoms": [atom_to_json(a) for a in s.atoms], "weight": rational_str(s.weight)}
            for s in t.soft
        ]
    }


def truth_from_json(doc: dict) -> TrueUtility:
    return TrueUtility(
        tuple(
            SoftConstraint.of([atom_from_json(a) for a in s["atoms"]], as_rational(s["weight"]))
            for s in doc["soft"]
        )
    )
