"""Domain types for hybrid configuration problems.

Attributes are boolean, ordinal (bounded integer) or real (bounded rational)
decision variables. Constraints are boolean literals and linear-arithmetic
predicates over them, combined into formula trees; a problem couples hard
formulas with weighted soft constraints. All arithmetic is exact rational
(`fractions.Fraction`) so strict inequalities and objective-bound comparisons
never suffer round-off.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

Rational = Fraction
Value = Union[bool, int, Fraction]


class StructureError(ValueError):
    """A constraint or configuration refers to attributes inconsistently."""


class Kind(str, Enum):
    BOOLEAN = "boolean"
    ORDINAL = "ordinal"
    REAL = "real"


def as_rational(x) -> Fraction:
    """Parse a rational from int, Fraction, or a decimal / 'p/q' string."""
    if isinstance(x, bool):
        raise StructureError(f"expected a rational, got boolean {x!r}")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        # Floats are accepted for convenience; the decimal repr keeps intent.
        return Fraction(repr(x))
    raise StructureError(f"cannot interpret {x!r} as a rational")


def rational_str(x: Fraction) -> str:
    return str(x)


@dataclass(frozen=True)
class CatalogAttribute:
    """A typed decision variable with a bounded domain."""

    id: int
    name: str
    kind: Kind
    lo: Fraction | None = None
    hi: Fraction | None = None

    def __post_init__(self):
        if self.kind == Kind.BOOLEAN:
            if self.lo is not None or self.hi is not None:
                raise StructureError(f"boolean attribute {self.name!r} takes no bounds")
            return
        if self.lo is None or self.hi is None:
            raise StructureError(f"attribute {self.name!r} needs finite bounds")
        if self.lo > self.hi:
            raise StructureError(f"attribute {self.name!r}: lo > hi")
        if self.kind == Kind.ORDINAL and (self.lo.denominator != 1 or self.hi.denominator != 1):
            raise StructureError(f"ordinal attribute {self.name!r} needs integer bounds")

    def contains(self, value: Value) -> bool:
        if self.kind == Kind.BOOLEAN:
            return isinstance(value, bool)
        if isinstance(value, bool):
            return False
        if self.kind == Kind.ORDINAL:
            return isinstance(value, int) and self.lo <= value <= self.hi
        return isinstance(value, Fraction) and self.lo <= value <= self.hi


@dataclass(frozen=True)
class Configuration:
    """A total assignment of values to the catalog attributes, indexed by id."""

    values: tuple[Value, ...]

    def __getitem__(self, attr_id: int) -> Value:
        try:
            return self.values[attr_id]
        except IndexError:
            raise StructureError(f"configuration has no attribute {attr_id}") from None

    def replace(self, attr_id: int, value: Value) -> "Configuration":
        vals = list(self.values)
        vals[attr_id] = value
        return Configuration(tuple(vals))


def make_configuration(attrs: Sequence[CatalogAttribute], values: Mapping[int, Value]) -> Configuration:
    """Build a total Configuration, checking domains."""
    out = []
    for a in attrs:
        if a.id not in values:
            raise StructureError(f"no value for attribute {a.id} ({a.name})")
        v = values[a.id]
        if a.kind == Kind.REAL and isinstance(v, int):
            v = Fraction(v)
        if not a.contains(v):
            raise StructureError(f"value {v!r} outside domain of {a.name}")
        out.append(v)
    if len(values) != len(attrs):
        raise StructureError("configuration mentions unknown attribute ids")
    return Configuration(tuple(out))


@dataclass(frozen=True)
class LinearExpr:
    """A rational-coefficient linear expression over ordinal/real attributes."""

    coeffs: tuple[tuple[int, Fraction], ...]  # sorted by attribute id
    const: Fraction = Fraction(0)

    @staticmethod
    def of(coeffs: Mapping[int, Fraction | int], const=0) -> "LinearExpr":
        items = tuple(sorted((i, as_rational(c)) for i, c in coeffs.items() if c != 0))
        return LinearExpr(items, as_rational(const))

    def value(self, c: Configuration) -> Fraction:
        total = self.const
        for attr_id, coef in self.coeffs:
            v = c[attr_id]
            if isinstance(v, bool):
                raise StructureError(f"boolean attribute {attr_id} inside a linear expression")
            total += coef * Fraction(v)
        return total

    def attribute_ids(self) -> set[int]:
        return {i for i, _ in self.coeffs}


class Relation(str, Enum):
    LT = "<"
    LE = "<="
    EQ = "="
    NE = "!="
    GE = ">="
    GT = ">"

    def holds(self, lhs: Fraction, rhs: Fraction) -> bool:
        if self is Relation.LT:
            return lhs < rhs
        if self is Relation.LE:
            return lhs <= rhs
        if self is Relation.EQ:
            return lhs == rhs
        if self is Relation.NE:
            return lhs != rhs
        if self is Relation.GE:
            return lhs >= rhs
        return lhs > rhs


@dataclass(frozen=True)
class BoolLit:
    """A boolean attribute used positively or negatively as an atom."""

    attr_id: int
    positive: bool = True


@dataclass(frozen=True)
class LinearPredicate:
    """expr relation rhs, over ordinal/real attributes only."""

    expr: LinearExpr
    rel: Relation
    rhs: Fraction


AtomicConstraint = Union[BoolLit, LinearPredicate]


def atom_sort_key(a: AtomicConstraint):
    """Canonical ordering: by referenced attribute ids, relation, rhs."""
    if isinstance(a, BoolLit):
        return (0, (a.attr_id,), "", Fraction(0), a.positive, ())
    ids = tuple(sorted(a.expr.attribute_ids()))
    return (1, ids, a.rel.value, a.rhs, True, a.expr.coeffs)


@dataclass(frozen=True)
class Atom:
    leaf: AtomicConstraint


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class And:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Implies:
    premise: "Formula"
    conclusion: "Formula"


Formula = Union[Atom, Not, And, Or, Implies]


def atom(a: AtomicConstraint) -> Formula:
    return Atom(a)


def conj(*parts: Formula) -> Formula:
    return And(tuple(parts))


def disj(*parts: Formula) -> Formula:
    return Or(tuple(parts))


@dataclass(frozen=True)
class SoftConstraint:
    """A conjunction of distinct atoms with a rational weight."""

    atoms: tuple[AtomicConstraint, ...]
    weight: Fraction

    @staticmethod
    def of(atoms: Iterable[AtomicConstraint], weight) -> "SoftConstraint":
        ordered = tuple(sorted(set(atoms), key=atom_sort_key))
        if not ordered:
            raise StructureError("soft constraint needs at least one atom")
        return SoftConstraint(ordered, as_rational(weight))

    def formula(self) -> Formula:
        return And(tuple(Atom(a) for a in self.atoms))


@dataclass(frozen=True)
class Problem:
    attributes: tuple[CatalogAttribute, ...]
    hard: tuple[Formula, ...] = ()
    soft: tuple[SoftConstraint, ...] = ()

    def __post_init__(self):
        for i, a in enumerate(self.attributes):
            if a.id != i:
                raise StructureError("attribute ids must be dense 0..n-1 in declaration order")

    def attribute(self, attr_id: int) -> CatalogAttribute:
        try:
            return self.attributes[attr_id]
        except IndexError:
            raise StructureError(f"unknown attribute id {attr_id}") from None


def eval_atomic(a: AtomicConstraint, c: Configuration) -> bool:
    if isinstance(a, BoolLit):
        v = c[a.attr_id]
        if not isinstance(v, bool):
            raise StructureError(f"attribute {a.attr_id} is not boolean")
        return v if a.positive else not v
    return a.rel.holds(a.expr.value(c), a.rhs)


def eval_formula(f: Formula, c: Configuration) -> bool:
    if isinstance(f, Atom):
        return eval_atomic(f.leaf, c)
    if isinstance(f, Not):
        return not eval_formula(f.child, c)
    if isinstance(f, And):
        return all(eval_formula(p, c) for p in f.parts)
    if isinstance(f, Or):
        return any(eval_formula(p, c) for p in f.parts)
    if isinstance(f, Implies):
        return (not eval_formula(f.premise, c)) or eval_formula(f.conclusion, c)
    raise StructureError(f"not a formula: {f!r}")


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    reason: str = ""
    hard_index: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate(p: Problem, c: Configuration) -> ValidationReport:
    """Check totality, domain membership and every hard formula; report the
    first violation found."""
    if len(c.values) != len(p.attributes):
        return ValidationReport(False, f"expected {len(p.attributes)} values, got {len(c.values)}")
    for a in p.attributes:
        if not a.contains(c.values[a.id]):
            return ValidationReport(False, f"value {c.values[a.id]!r} outside domain of {a.name}")
    for i, f in enumerate(p.hard):
        if not eval_formula(f, c):
            return ValidationReport(False, f"hard formula {i} violated", hard_index=i)
    return ValidationReport(True)


def formula_attribute_ids(f: Formula) -> set[int]:
    if isinstance(f, Atom):
        if isinstance(f.leaf, BoolLit):
            return {f.leaf.attr_id}
        return f.leaf.expr.attribute_ids()
    if isinstance(f, Not):
        return formula_attribute_ids(f.child)
    if isinstance(f, (And, Or)):
        out: set[int] = set()
        for p in f.parts:
            out |= formula_attribute_ids(p)
        return out
    return formula_attribute_ids(f.premise) | formula_attribute_ids(f.conclusion)


def formula_atoms(f: Formula) -> list[AtomicConstraint]:
    """All leaf atoms in tree order (duplicates preserved)."""
    if isinstance(f, Atom):
        return [f.leaf]
    if isinstance(f, Not):
        return formula_atoms(f.child)
    if isinstance(f, (And, Or)):
        out = []
        for p in f.parts:
            out.extend(formula_atoms(p))
        return out
    return formula_atoms(f.premise) + formula_atoms(f.conclusion)


# ---------------------------------------------------------------------------
# JSON problem format, shared by CLI, HTTP API and UI.
# ---------------------------------------------------------------------------

_REL_NAMES = {
    Relation.LT: "lt",
    Relation.LE: "leq",
    Relation.EQ: "eq",
    Relation.NE: "neq",
    Relation.GE: "geq",
    Relation.GT: "gt",
}
_REL_BY_NAME = {v: k for k, v in _REL_NAMES.items()}


def _lin_to_json(e: LinearExpr) -> dict:
    return {
        "lin": {
            "coeffs": {str(i): rational_str(c) for i, c in e.coeffs},
            "const": rational_str(e.const),
        }
    }


def _lin_from_json(obj) -> LinearExpr:
    if not isinstance(obj, dict) or "lin" not in obj:
        raise StructureError(f"expected a linear expression object, got {obj!r}")
    lin = obj["lin"]
    coeffs = {int(k): as_rational(v) for k, v in lin.get("coeffs", {}).items()}
    return LinearExpr.of(coeffs, as_rational(lin.get("const", 0)))


def atom_to_json(a: AtomicConstraint) -> list:
    if isinstance(a, BoolLit):
        return ["lit", a.attr_id, a.positive]
    return [_REL_NAMES[a.rel], _lin_to_json(a.expr), rational_str(a.rhs)]


def atom_from_json(node) -> AtomicConstraint:
    if not isinstance(node, list) or not node:
        raise StructureError(f"bad atom encoding: {node!r}")
    tag = node[0]
    if tag == "lit":
        if len(node) not in (2, 3):
            raise StructureError(f"bad literal encoding: {node!r}")
        positive = node[2] if len(node) == 3 else True
        return BoolLit(int(node[1]), bool(positive))
    if tag in _REL_BY_NAME:
        if len(node) != 3:
            raise StructureError(f"bad predicate encoding: {node!r}")
        return LinearPredicate(_lin_from_json(node[1]), _REL_BY_NAME[tag], as_rational(node[2]))
    raise StructureError(f"unknown atom tag {tag!r}")


def formula_to_json(f: Formula) -> list:
    if isinstance(f, Atom):
        return atom_to_json(f.leaf)
    if isinstance(f, Not):
        return ["not", formula_to_json(f.child)]
    if isinstance(f, And):
        return ["and", *[formula_to_json(p) for p in f.parts]]
    if isinstance(f, Or):
        return ["or", *[formula_to_json(p) for p in f.parts]]
    return ["implies", formula_to_json(f.premise), formula_to_json(f.conclusion)]


def formula_from_json(node) -> Formula:
    if not isinstance(node, list) or not node:
        raise StructureError(f"bad formula encoding: {node!r}")
    tag = node[0]
    if tag == "not":
        return Not(formula_from_json(node[1]))
    if tag == "and":
        return And(tuple(formula_from_json(p) for p in node[1:]))
    if tag == "or":
        return Or(tuple(formula_from_json(p) for p in node[1:]))
    if tag == "implies":
        if len(node) != 3:
            raise StructureError("implies takes exactly two children")
        return Implies(formula_from_json(node[1]), formula_from_json(node[2]))
    return Atom(atom_from_json(node))


def attribute_to_json(a: CatalogAttribute) -> dict:
    out = {"name": a.name, "kind": a.kind.value}
    if a.kind != Kind.BOOLEAN:
        out["lo"] = rational_str(a.lo)
        out["hi"] = rational_str(a.hi)
    return out


def attributes_from_json(items) -> tuple[CatalogAttribute, ...]:
    attrs = []
    for i, obj in enumerate(items):
        kind = Kind(obj["kind"])
        if kind == Kind.BOOLEAN:
            attrs.append(CatalogAttribute(i, obj["name"], kind))
        else:
            attrs.append(
                CatalogAttribute(i, obj["name"], kind, as_rational(obj["lo"]), as_rational(obj["hi"]))
            )
    return tuple(attrs)


def problem_to_json(p: Problem) -> dict:
    return {
        "attributes": [attribute_to_json(a) for a in p.attributes],
        "hard": [formula_to_json(f) for f in p.hard],
        "soft": [
            {"atoms": [atom_to_json(a) for a in s.atoms], "weight": rational_str(s.weight)}
            for s in p.soft
        ],
    }


def problem_from_json(obj) -> Problem:
    if not isinstance(obj, dict) or "attributes" not in obj:
        raise StructureError("problem document needs an 'attributes' list")
    attrs = attributes_from_json(obj["attributes"])
    hard = tuple(formula_from_json(f) for f in obj.get("hard", []))
    soft = tuple(
        SoftConstraint.of([atom_from_json(a) for a in s["atoms"]], as_rational(s["weight"]))
        for s in obj.get("soft", [])
    )
    p = Problem(attrs, hard, soft)
    known = set(range(len(attrs)))
    for f in hard:
        if not formula_attribute_ids(f) <= known:
            raise StructureError("hard formula references an unknown attribute id")
    for s in soft:
        for a in s.atoms:
            ids = {a.attr_id} if isinstance(a, BoolLit) else a.expr.attribute_ids()
            if not ids <= known:
                raise StructureError("soft constraint references an unknown attribute id")
    return p


def configuration_to_json(c: Configuration) -> dict:
    vals = {}
    for i, v in enumerate(c.values):
        if isinstance(v, bool):
            vals[str(i)] = v
        elif isinstance(v, int):
            vals[str(i)] = v
        else:
            vals[str(i)] = rational_str(v)
    return {"values": vals}


def configuration_from_json(obj, attrs: Sequence[CatalogAttribute]) -> Configuration:
    if not isinstance(obj, dict) or "values" not in obj:
        raise StructureError("configuration document needs a 'values' map")
    raw = obj["values"]
    values: dict[int, Value] = {}
    for k, v in raw.items():
        i = int(k)
        kind = attrs[i].kind if 0 <= i < len(attrs) else None
        if kind == Kind.BOOLEAN:
            if not isinstance(v, bool):
                raise StructureError(f"attribute {i} expects a boolean")
            values[i] = v
        elif kind == Kind.ORDINAL:
            values[i] = int(v)
        else:
            values[i] = as_rational(v)
    return make_configuration(attrs, values)


def load_problem(path: str) -> Problem:
    with open(path, "r", encoding="utf-8") as fh:
        return problem_from_json(json.load(fh))


def dump_problem(p: Problem, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(problem_to_json(p), fh, indent=2)
        fh.write("\n")
