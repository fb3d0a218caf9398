"""Encoder from finite-domain soft-constraint problems to weighted boolean
optimization (selector variables, exactly-one hard clauses, one weighted
term per constraint tuple), with decoding and brute-force equivalence
checking.

Only the additive combination of preference values is supported end to end;
min-combination problems parse but are rejected, because summing term
weights would not reproduce their global preference order. Hard clauses stay
genuinely hard: folding them into zero-weight soft terms would make
infeasible assignments indistinguishable from feasible worst-preference
ones.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .core import as_rational, rational_str


class ScspError(ValueError):
    pass


class ExportError(RuntimeError):
    """The instance does not fit the clause-only text export."""


@dataclass(frozen=True)
class ScspVariable:
    name: str
    domain: tuple  # finite, nonempty; values are ints or strings


@dataclass(frozen=True)
class ScspConstraint:
    scope: tuple[int, ...]                     # variable indices
    table: tuple[tuple[tuple, Fraction], ...]  # (value tuple per scope) -> preference


@dataclass(frozen=True)
class Scsp:
    variables: tuple[ScspVariable, ...]
    constraints: tuple[ScspConstraint, ...]
    mode: str = "sum"  # "sum" (weighted) or "min" (fuzzy)

    def __post_init__(self):
        if self.mode not in ("sum", "min"):
            raise ScspError(f"unknown combination mode {self.mode!r}")
        for v in self.variables:
            if not v.domain:
                raise ScspError(f"variable {v.name!r} has an empty domain")
        for c in self.constraints:
            if not all(0 <= i < len(self.variables) for i in c.scope):
                raise ScspError("constraint scope references an unknown variable")
            expected = 1
            for i in c.scope:
                expected *= len(self.variables[i].domain)
            if len(c.table) != expected or len({t for t, _ in c.table}) != expected:
                raise ScspError("constraint table must cover every scope tuple exactly once")

    def value_of(self, assignment: Sequence) -> Fraction:
        total = Fraction(0)
        for c in self.constraints:
            key = tuple(assignment[i] for i in c.scope)
            for t, v in c.table:
                if t == key:
                    total += v
                    break
        return total


@dataclass(frozen=True)
class WeightedTerm:
    """Weighted disjunction of selector-literal conjunctions; unmerged terms
    carry a single conjunct."""

    conjuncts: tuple[tuple[int, ...], ...]
    weight: Fraction


@dataclass(frozen=True)
class WeightedSat:
    num_vars: int
    selector: dict[tuple[int, object], int]  # (variable index, value) -> boolean var
    hard_clauses: tuple[tuple[int, ...], ...]
    terms: tuple[WeightedTerm, ...]

    def selector_of(self, var_index: int, value) -> int:
        return self.selector[(var_index, value)]


def encode(s: Scsp, merge_equal_weights: bool = False) -> WeightedSat:
    """Selector encoding: b[i,d] true means variable i takes value d.

    Per variable: one at-least-one clause and |D|(|D|-1)/2 at-most-one
    clauses, all hard. Each constraint tuple becomes one weighted conjunction
    of its selectors; with `merge_equal_weights`, tuples of one constraint
    sharing a preference value merge into a single generalized weighted
    clause (disjunction of conjunctions).
    """
    if s.mode != "sum":
        raise ScspError("only the additive (weighted) combination mode is encodable")
    selector: dict[tuple[int, object], int] = {}
    nv = 0
    for i, v in enumerate(s.variables):
        for d in v.domain:
            nv += 1
            selector[(i, d)] = nv

    hard: list[tuple[int, ...]] = []
    for i, v in enumerate(s.variables):
        lits = [selector[(i, d)] for d in v.domain]
        hard.append(tuple(lits))  # at-least-one
        for a in range(len(lits)):
            for b in range(a + 1, len(lits)):
                hard.append((-lits[a], -lits[b]))  # at-most-one

    terms: list[WeightedTerm] = []
    for c in s.constraints:
        if merge_equal_weights:
            by_weight: dict[Fraction, list[tuple[int, ...]]] = {}
            for tup, w in c.table:
                conj = tuple(selector[(i, d)] for i, d in zip(c.scope, tup))
                by_weight.setdefault(w, []).append(conj)
            for w, conjuncts in by_weight.items():
                terms.append(WeightedTerm(tuple(conjuncts), w))
        else:
            for tup, w in c.table:
                conj = tuple(selector[(i, d)] for i, d in zip(c.scope, tup))
                terms.append(WeightedTerm((conj,), w))
    return WeightedSat(nv, selector, tuple(hard), tuple(terms))


def decode(model: Sequence[bool], s: Scsp, enc: Optional[WeightedSat] = None) -> list:
    """Read the variable assignment off a boolean model (1-indexed truth
    values); exactly one selector per variable must be true."""
    enc = enc if enc is not None else encode(s)
    out = []
    for i, v in enumerate(s.variables):
        chosen = [d for d in v.domain if model[enc.selector[(i, d)]]]
        if len(chosen) != 1:
            raise ScspError(
                f"variable {v.name!r} has {len(chosen)} selected values; model violates exactly-one"
            )
        out.append(chosen[0])
    return out


def _term_value(term: WeightedTerm, model: Sequence[bool]) -> bool:
    return any(all(model[l] for l in conj) for conj in term.conjuncts)


def term_sum(enc: WeightedSat, model: Sequence[bool]) -> Fraction:
    return sum((t.weight for t in enc.terms if _term_value(t, model)), Fraction(0))


@dataclass(frozen=True)
class EquivalenceReport:
    equivalent: bool
    scsp_optimum: Fraction
    encoded_optimum: Fraction
    scsp_optimizers: tuple
    encoded_optimizers: tuple
    detail: str = ""


def check_equivalence(s: Scsp, merge_equal_weights: bool = False) -> EquivalenceReport:
    """Enumerate both sides of the encoding on a small instance: every
    hard-feasible model's term sum must equal the source value of its
    decoding, and the optima (values and optimizer sets) must coincide."""
    space = 1
    for v in s.variables:
        space *= len(v.domain)
    if len(s.variables) > 3 or any(len(v.domain) > 4 for v in s.variables):
        raise ScspError("equivalence check is exhaustive; keep instances small")

    enc = encode(s, merge_equal_weights)
    best_src: Optional[Fraction] = None
    src_opt: list[tuple] = []
    for combo in itertools.product(*[v.domain for v in s.variables]):
        val = s.value_of(combo)
        if best_src is None or val > best_src:
            best_src, src_opt = val, [combo]
        elif val == best_src:
            src_opt.append(combo)

    best_enc: Optional[Fraction] = None
    enc_opt: list[tuple] = []
    for bits in itertools.product([False, True], repeat=enc.num_vars):
        model = (False,) + bits
        if not all(any(model[l] if l > 0 else not model[-l] for l in cl) for cl in enc.hard_clauses):
            continue
        assignment = tuple(decode(model, s, enc))
        val = term_sum(enc, model)
        if val != s.value_of(assignment):
            return EquivalenceReport(
                False, best_src or Fraction(0), val, tuple(src_opt), (assignment,),
                detail=f"model {assignment} sums to {val}, source value {s.value_of(assignment)}",
            )
        if best_enc is None or val > best_enc:
            best_enc, enc_opt = val, [assignment]
        elif val == best_enc:
            enc_opt.append(assignment)

    ok = best_src == best_enc and set(src_opt) == set(enc_opt)
    return EquivalenceReport(
        ok,
        best_src if best_src is not None else Fraction(0),
        best_enc if best_enc is not None else Fraction(0),
        tuple(sorted(src_opt)),
        tuple(sorted(enc_opt)),
        detail="" if ok else "optima or optimizer sets differ",
    )


# ---------------------------------------------------------------------------
# JSON input/output and the clause-only WDIMACS-style text export
# ---------------------------------------------------------------------------


def scsp_from_json(doc: dict) -> Scsp:
    if not isinstance(doc, dict) or "variables" not in doc:
        raise ScspError("document needs a 'variables' list")
    variables = tuple(
        ScspVariable(v["name"], tuple(v["domain"])) for v in doc["variables"]
    )
    constraints = []
    for c in doc.get("constraints", []):
        scope = tuple(int(i) for i in c["scope"])
        table = tuple(
            (tuple(entry["tuple"]), as_rational(entry["value"])) for entry in c["table"]
        )
        constraints.append(ScspConstraint(scope, table))
    return Scsp(variables, tuple(constraints), doc.get("mode", "sum"))


def weighted_sat_to_json(enc: WeightedSat) -> dict:
    return {
        "num_vars": enc.num_vars,
        "selectors": [
            {"variable": i, "value": d, "lit": lit} for (i, d), lit in sorted(
                enc.selector.items(), key=lambda kv: kv[1]
            )
        ],
        "hard_clauses": [list(cl) for cl in enc.hard_clauses],
        "terms": [
            {"conjuncts": [list(c) for c in t.conjuncts], "weight": rational_str(t.weight)}
            for t in enc.terms
        ],
    }


def export_wdimacs(enc: WeightedSat) -> str:
    """Clause-shaped export: every weighted term must be a disjunction of
    single literals; conjunction terms are preserved only by the JSON form."""
    soft_clauses = []
    for t in enc.terms:
        lits = []
        for conj in t.conjuncts:
            if len(conj) != 1:
                raise ExportError(
                    "weighted term contains a multi-literal conjunction; use the JSON export"
                )
            lits.append(conj[0])
        soft_clauses.append((t.weight, lits))
    if any(w.denominator != 1 for w, _ in soft_clauses):
        raise ExportError("text export needs integer weights; use the JSON export")
    top = sum((int(w) for w, _ in soft_clauses), 0) + 1
    lines = [f"p wcnf {enc.num_vars} {len(enc.hard_clauses) + len(soft_clauses)} {top}"]
    for cl in enc.hard_clauses:
        lines.append(" ".join([str(top)] + [str(l) for l in cl] + ["0"]))
    for w, lits in soft_clauses:
        lines.append(" ".join([str(int(w))] + [str(l) for l in lits] + ["0"]))
    return "\n".join(lines) + "\n"
