"""Lazy SMT solving for formulas over bounded hybrid attribute spaces.

A DPLL SAT core enumerates total truth assignments of the propositional
abstraction; a simplex-based theory solver for linear rational arithmetic
(with branch-and-bound integrality for ordinal attributes) certifies each
assignment or refutes it with a deletion-filter-minimal justification that is
learned as a blocking clause. Strict inequalities are handled exactly with
delta-rationals (a + b*delta, ordered lexicographically).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Sequence

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
    LinearPredicate,
    Not,
    Or,
    Relation,
    StructureError,
)

ZERO = Fraction(0)
ONE = Fraction(1)


class SolverError(RuntimeError):
    """Internal solver invariant broken (e.g. unbounded feasible direction)."""


@dataclass(frozen=True)
class DeltaRational:
    """a + b*delta for an infinitesimal positive delta."""

    a: Fraction
    b: Fraction = ZERO

    def __add__(self, other: "DeltaRational") -> "DeltaRational":
        return DeltaRational(self.a + other.a, self.b + other.b)

    def __sub__(self, other: "DeltaRational") -> "DeltaRational":
        return DeltaRational(self.a - other.a, self.b - other.b)

    def scale(self, k: Fraction) -> "DeltaRational":
        return DeltaRational(self.a * k, self.b * k)

    def __lt__(self, other):
        return (self.a, self.b) < (other.a, other.b)

    def __le__(self, other):
        return (self.a, self.b) <= (other.a, other.b)

    def concretize(self, delta: Fraction) -> Fraction:
        return self.a + self.b * delta


DR_ZERO = DeltaRational(ZERO, ZERO)


def dr(a, b=0) -> DeltaRational:
    return DeltaRational(Fraction(a), Fraction(b))


# ---------------------------------------------------------------------------
# Boolean abstraction
# ---------------------------------------------------------------------------


@dataclass
class BoolAbstraction:
    """CNF skeleton plus the bijection between atoms and propositional vars.

    Auxiliary (structural) variables are those absent from `var_atom`.
    """

    num_vars: int
    clauses: list[list[int]]
    var_atom: dict[int, AtomicConstraint]
    atom_var: dict[AtomicConstraint, int]

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.num_vars} {len(self.clauses)}"]
        for v in sorted(self.var_atom):
            lines.append(f"c v{v} = {self.var_atom[v]!r}")
        for cl in self.clauses:
            lines.append(" ".join(str(l) for l in cl) + " 0")
        return "\n".join(lines) + "\n"


class AbstractionBuilder:
    def __init__(self):
        self.num_vars = 0
        self.clauses: list[list[int]] = []
        self.atom_var: dict[AtomicConstraint, int] = {}
        self.var_atom: dict[int, AtomicConstraint] = {}
        self._memo: dict = {}

    def new_var(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def _atom_literal(self, leaf: AtomicConstraint, positive: bool) -> int:
        if isinstance(leaf, BoolLit):
            canon = BoolLit(leaf.attr_id, True)
            if not leaf.positive:
                positive = not positive
        else:
            canon = leaf
        v = self.atom_var.get(canon)
        if v is None:
            v = self.new_var()
            self.atom_var[canon] = v
            self.var_atom[v] = canon
        return v if positive else -v

    def _nnf(self, f: Formula, positive: bool):
        """Negation normal form over ('lit', int) / ('and', ...) / ('or', ...)."""
        if isinstance(f, Atom):
            leaf = f.leaf
            if isinstance(leaf, LinearPredicate) and leaf.rel == Relation.NE:
                lt = Atom(LinearPredicate(leaf.expr, Relation.LT, leaf.rhs))
                gt = Atom(LinearPredicate(leaf.expr, Relation.GT, leaf.rhs))
                return self._nnf(Or((lt, gt)), positive)
            return ("lit", self._atom_literal(leaf, positive))
        if isinstance(f, Not):
            return self._nnf(f.child, not positive)
        if isinstance(f, Implies):
            return self._nnf(Or((Not(f.premise), f.conclusion)), positive)
        if isinstance(f, And):
            kids = tuple(self._nnf(p, positive) for p in f.parts)
            return ("and", kids) if positive else ("or", kids)
        if isinstance(f, Or):
            kids = tuple(self._nnf(p, positive) for p in f.parts)
            return ("or", kids) if positive else ("and", kids)
        raise StructureError(f"not a formula: {f!r}")

    def _as_clause(self, node) -> Optional[list[int]]:
        """Flatten a node into a single clause if it is a disjunction of literals."""
        if node[0] == "lit":
            return [node[1]]
        if node[0] == "or":
            out: list[int] = []
            for k in node[1]:
                part = self._as_clause(k)
                if part is None:
                    return None
                out.extend(part)
            return out
        return None

    def _define(self, node) -> int:
        """Return a literal L with clauses enforcing L -> node (one-sided)."""
        if node[0] == "lit":
            return node[1]
        key = node
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        aux = self.new_var()
        if node[0] == "and":
            for k in node[1]:
                self.clauses.append([-aux, self._define(k)])
        else:
            flat = self._as_clause(node)
            if flat is not None:
                self.clauses.append([-aux] + flat)
            else:
                self.clauses.append([-aux] + [self._define(k) for k in node[1]])
        self._memo[key] = aux
        return aux

    def assert_formula(self, f: Formula) -> None:
        node = self._nnf(f, True)
        stack = [node]
        while stack:
            n = stack.pop()
            if n[0] == "and":
                stack.extend(reversed(n[1]))
                continue
            flat = self._as_clause(n)
            if flat is not None:
                self.clauses.append(flat)
            else:
                self.clauses.append([self._define(n)])

    def define_formula(self, f: Formula) -> int:
        """Literal implying f; used for soft-item selectors."""
        node = self._nnf(f, True)
        flat = self._as_clause(node)
        if flat is not None and len(flat) == 1:
            return flat[0]
        return self._define(node)

    def build(self) -> BoolAbstraction:
        return BoolAbstraction(self.num_vars, self.clauses, dict(self.var_atom), dict(self.atom_var))


def abstract(formulas: Sequence[Formula]) -> BoolAbstraction:
    """Propositional abstraction of a formula set (shared atom table)."""
    b = AbstractionBuilder()
    for f in formulas:
        b.assert_formula(f)
    return b.build()


# ---------------------------------------------------------------------------
# SAT core: DPLL with unit propagation, optional pseudo-Boolean lower bound
# ---------------------------------------------------------------------------


def sat_solve(
    num_vars: int,
    clauses: Sequence[Sequence[int]],
    seed: int = 0,
    polarity_hint: Optional[Mapping[int, bool]] = None,
    pb_at_least: Optional[tuple[Sequence[tuple[int, int]], int]] = None,
    on_model: Optional[Callable[[list[bool]], Optional[list[int]]]] = None,
) -> Optional[list[bool]]:
    """Decide a CNF; returns values indexed 1..num_vars, or None if unsat.

    Conflict-driven search with first-UIP clause learning and backjumping;
    branching picks the lowest-index unassigned variable, polarity comes from
    the seed unless hinted. `pb_at_least` = (items, bound) requires
    sum(weight for lit, weight in items if lit true) >= bound; a potential
    counter detects its violation during propagation and the violating
    assignments are turned into an ordinary conflict clause. `on_model` vets
    every total assignment: returning a (currently falsified) clause rejects
    it and the search resumes from the clause's deepest decision level.
    """
    rng = random.Random(seed)
    polarity = [False] + [rng.random() < 0.5 for _ in range(num_vars)]
    if polarity_hint:
        for v, pol in polarity_hint.items():
            polarity[v] = pol

    assign = [0] * (num_vars + 1)  # 0 unassigned / 1 true / -1 false
    level = [0] * (num_vars + 1)
    reason: list[Optional[list[int]]] = [None] * (num_vars + 1)
    occ: dict[int, list[list[int]]] = {}
    cls = [list(c) for c in clauses]
    for c in cls:
        if not c:
            return None
        for lit in c:
            occ.setdefault(lit, []).append(c)

    pb_items: dict[int, tuple[int, int]] = {}  # var -> (earning sign, weight)
    pb_bound = 0
    pb_potential = 0
    if pb_at_least is not None:
        items, pb_bound = pb_at_least
        for lit, w in items:
            pb_items[abs(lit)] = (1 if lit > 0 else -1, w)
        pb_potential = sum(w for _, w in pb_items.values())
        if pb_potential < pb_bound:
            return None

    trail: list[int] = []
    trail_pot: list[int] = []
    current_level = 0

    def lit_value(lit: int) -> int:
        v = assign[abs(lit)]
        return v if lit > 0 else -v

    def set_lit(lit: int, why: Optional[list[int]]) -> None:
        nonlocal pb_potential
        v = abs(lit)
        trail.append(lit)
        trail_pot.append(pb_potential)
        assign[v] = 1 if lit > 0 else -1
        level[v] = current_level
        reason[v] = why
        item = pb_items.get(v)
        if item is not None and (item[0] > 0) != (lit > 0):
            pb_potential -= item[1]

    def pb_conflict_clause() -> list[int]:
        """Earliest weight-losing assignments whose loss already sinks the
        bound; their joint negation is a valid conflict clause."""
        need = pb_potential_total - pb_bound  # losing more than this is fatal
        lost = 0
        lits = []
        for lit in trail:
            item = pb_items.get(abs(lit))
            if item is not None and (item[0] > 0) != (lit > 0):
                lost += item[1]
                lits.append(-lit)
                if lost > need:
                    break
        return lits

    pb_potential_total = pb_potential

    def propagate(start: int) -> Optional[list[int]]:
        """Unit propagation from trail position `start`; returns a
        conflicting clause or None."""
        i = start
        empty = ()
        while i < len(trail):
            if pb_potential < pb_bound:
                return pb_conflict_clause()
            falsified = -trail[i]
            i += 1
            for c in occ.get(falsified, empty):
                unassigned = 0
                satisfied = False
                for lit in c:
                    val = assign[lit] if lit > 0 else -assign[-lit]
                    if val > 0:
                        satisfied = True
                        break
                    if val == 0:
                        if unassigned != 0:
                            unassigned = -0x7FFFFFFF
                            break
                        unassigned = lit
                if satisfied:
                    continue
                if unassigned == 0:
                    return c
                if unassigned != -0x7FFFFFFF:
                    set_lit(unassigned, c)
        if pb_potential < pb_bound:
            return pb_conflict_clause()
        return None

    def analyze(conflict: list[int]) -> tuple[list[int], int]:
        """First-UIP learned clause and the level to jump back to."""
        seen = [False] * (num_vars + 1)
        learned: list[int] = []
        counter = 0
        lits = conflict
        skip_lit = 0
        idx = len(trail) - 1
        while True:
            for q in lits:
                if q == skip_lit:
                    continue
                v = abs(q)
                if not seen[v] and level[v] > 0:
                    seen[v] = True
                    if level[v] == current_level:
                        counter += 1
                    else:
                        learned.append(q)
            while not seen[abs(trail[idx])]:
                idx -= 1
            uip_lit = trail[idx]
            seen[abs(uip_lit)] = False
            idx -= 1
            counter -= 1
            if counter == 0:
                learned.insert(0, -uip_lit)
                break
            lits = reason[abs(uip_lit)] or []
            skip_lit = uip_lit
        back = 0
        for q in learned[1:]:
            back = max(back, level[abs(q)])
        return learned, back

    def backjump(to_level: int) -> None:
        nonlocal pb_potential, current_level
        while trail and level[abs(trail[-1])] > to_level:
            lit = trail.pop()
            pb_potential = trail_pot.pop()
            v = abs(lit)
            assign[v] = 0
            reason[v] = None
        current_level = to_level

    def add_clause(c: list[int]) -> None:
        cls.append(c)
        for lit in c:
            occ.setdefault(lit, []).append(c)

    # top-level units
    for c in cls:
        if len(c) == 1:
            if lit_value(c[0]) < 0:
                return None
            if lit_value(c[0]) == 0:
                set_lit(c[0], None)
    qhead = 0
    while True:
        conflict = propagate(qhead)
        if conflict is None:
            var = 0
            for v in range(1, num_vars + 1):
                if assign[v] == 0:
                    var = v
                    break
            if var != 0:
                current_level += 1
                qhead = len(trail)
                set_lit(var if polarity[var] else -var, None)
                continue
            assignment = [False] + [assign[v] > 0 for v in range(1, num_vars + 1)]
            if on_model is None:
                return assignment
            conflict = on_model(assignment)
            if conflict is None:
                return assignment
            add_clause(conflict)
            # a vetoed model's clause may live entirely below the current level
            deepest = max(level[abs(q)] for q in conflict)
            if deepest < current_level:
                backjump(deepest)
        if current_level == 0:
            return None
        learned, back = analyze(conflict)
        backjump(back)
        if len(learned) > 1:
            add_clause(learned)
        qhead = len(trail)
        set_lit(learned[0], learned if len(learned) > 1 else None)


# ---------------------------------------------------------------------------
# Theory solver: simplex over delta-rationals + integrality branching
# ---------------------------------------------------------------------------

# Normalized theory constraints: (coeffs, kind, rhs) with kind in
# {"le", "ge", "eq"} and rhs a DeltaRational, or kind "ne" with rhs Fraction.
TheoryCon = tuple[tuple[tuple[int, Fraction], ...], str, object]


def _normalize_atom(a: LinearPredicate, positive: bool) -> TheoryCon:
    coeffs = a.expr.coeffs
    rhs0 = a.rhs - a.expr.const
    rel = a.rel
    if not positive:
        rel = {
            Relation.LT: Relation.GE,
            Relation.LE: Relation.GT,
            Relation.GE: Relation.LT,
            Relation.GT: Relation.LE,
            Relation.EQ: Relation.NE,
            Relation.NE: Relation.EQ,
        }[rel]
    if rel == Relation.LT:
        return (coeffs, "le", DeltaRational(rhs0, Fraction(-1)))
    if rel == Relation.LE:
        return (coeffs, "le", DeltaRational(rhs0))
    if rel == Relation.GT:
        return (coeffs, "ge", DeltaRational(rhs0, Fraction(1)))
    if rel == Relation.GE:
        return (coeffs, "ge", DeltaRational(rhs0))
    if rel == Relation.EQ:
        return (coeffs, "eq", DeltaRational(rhs0))
    return (coeffs, "ne", rhs0)


class _Simplex:
    """Feasibility check for conjunctions of linear bounds (Bland's rule).

    `srcs` carries, per variable, the constraint tags that produced its lower
    and upper bound (None for intrinsic domain bounds); an unsatisfiable
    system yields the violated row's explanation in terms of those tags.
    """

    def __init__(
        self,
        bounds: dict[int, list],
        rows: dict[int, dict[int, Fraction]],
        srcs: Optional[dict[int, list]] = None,
    ):
        self.lower = {v: b[0] for v, b in bounds.items()}
        self.upper = {v: b[1] for v, b in bounds.items()}
        self.srcs = srcs if srcs is not None else {v: [None, None] for v in bounds}
        self.rows = rows  # basic var -> {var: coeff}
        self.beta: dict[int, DeltaRational] = {}
        for v in bounds:
            if v not in rows:
                lo, hi = self.lower[v], self.upper[v]
                if lo is not None:
                    self.beta[v] = lo
                elif hi is not None:
                    self.beta[v] = hi
                else:
                    self.beta[v] = DR_ZERO
        for b, row in rows.items():
            self.beta[b] = self._row_value(row)

    def _row_value(self, row) -> DeltaRational:
        total = DR_ZERO
        for v, c in row.items():
            total = total + self.beta[v].scale(c)
        return total

    def _pivot_and_update(self, xi: int, xj: int, v: DeltaRational) -> None:
        row_i = self.rows[xi]
        aij = row_i[xj]
        theta = (v - self.beta[xi]).scale(ONE / aij)
        self.beta[xi] = v
        self.beta[xj] = self.beta[xj] + theta
        for xk, row_k in self.rows.items():
            if xk != xi:
                akj = row_k.get(xj)
                if akj:
                    self.beta[xk] = self.beta[xk] + theta.scale(akj)
        # pivot: xj becomes basic
        del self.rows[xi]
        del row_i[xj]
        inv = ONE / aij
        new_row = {xi: inv}
        for l, a in row_i.items():
            new_row[l] = -a * inv
        for xk, row_k in list(self.rows.items()):
            akj = row_k.pop(xj, None)
            if akj:
                for l, c in new_row.items():
                    nc = row_k.get(l, ZERO) + akj * c
                    if nc == 0:
                        row_k.pop(l, None)
                    else:
                        row_k[l] = nc
        self.rows[xj] = new_row

    def check(self):
        """None when satisfiable; otherwise the conflicting bound tags."""
        while True:
            xi = None
            direction = 0
            for b in sorted(self.rows):
                lo, hi = self.lower.get(b), self.upper.get(b)
                if lo is not None and self.beta[b] < lo:
                    xi, direction = b, 1
                    break
                if hi is not None and hi < self.beta[b]:
                    xi, direction = b, -1
                    break
            if xi is None:
                return None
            row = self.rows[xi]
            target = self.lower[xi] if direction > 0 else self.upper[xi]
            xj = None
            for v in sorted(row):
                a = row[v]
                increases = (a > 0) == (direction > 0)
                if increases:
                    hi = self.upper.get(v)
                    if hi is None or self.beta[v] < hi:
                        xj = v
                        break
                else:
                    lo = self.lower.get(v)
                    if lo is None or lo < self.beta[v]:
                        xj = v
                        break
            if xj is None:
                conflict = [self.srcs[xi][0 if direction > 0 else 1]]
                for v, a in row.items():
                    pinned_upper = (a > 0) == (direction > 0)
                    conflict.append(self.srcs[v][1 if pinned_upper else 0])
                return [t for t in conflict if t is not None]
            self._pivot_and_update(xi, xj, target)


def _lp_feasible(cons: Sequence[tuple[int, TheoryCon]], box: dict[int, tuple[DeltaRational, DeltaRational]]):
    """Rational-relaxation feasibility over tagged constraints.

    Returns (delta-rational values, None) or (None, conflict tag list); the
    conflict is a (not necessarily minimal) set of constraint tags whose
    conjunction is already LP-infeasible.
    """
    bounds: dict[int, list] = {v: [lo, hi] for v, (lo, hi) in box.items()}
    srcs: dict[int, list] = {v: [None, None] for v in bounds}
    forms: dict[tuple, int] = {}
    rows: dict[int, dict[int, Fraction]] = {}
    next_var = (max(bounds) + 1) if bounds else 0
    clash: list = []

    def tighten(v: int, kind: str, rhs: DeltaRational, tag) -> bool:
        b = bounds[v]
        s = srcs[v]
        if kind in ("le", "eq"):
            if b[1] is None or rhs < b[1]:
                b[1] = rhs
                s[1] = tag
        if kind in ("ge", "eq"):
            if b[0] is None or b[0] < rhs:
                b[0] = rhs
                s[0] = tag
        lo, hi = b
        if lo is not None and hi is not None and hi < lo:
            clash.extend(t for t in s if t is not None)
            return False
        return True

    for tag, (coeffs, kind, rhs) in cons:
        if kind == "ne":
            raise SolverError("disequalities must be split before the LP check")
        if len(coeffs) == 1:
            (v, c), = coeffs
            scaled = rhs.scale(ONE / c)
            k = kind if c > 0 else {"le": "ge", "ge": "le", "eq": "eq"}[kind]
            if not tighten(v, k, scaled, tag):
                return None, clash
        else:
            key = coeffs
            sv = forms.get(key)
            if sv is None:
                sv = next_var
                next_var += 1
                forms[key] = sv
                rows[sv] = {v: c for v, c in coeffs}
                bounds[sv] = [None, None]
                srcs[sv] = [None, None]
            if not tighten(sv, kind, rhs, tag):
                return None, clash

    sx = _Simplex(bounds, rows, srcs)
    conflict = sx.check()
    if conflict is not None:
        return None, conflict
    return {v: sx.beta[v] for v in box}, None


def _concretize(
    values: dict[int, DeltaRational],
    cons: Sequence[tuple[int, TheoryCon]],
    box: dict[int, tuple[DeltaRational, DeltaRational]],
) -> dict[int, Fraction]:
    """Pick a concrete positive delta: half the tightest positive slack, capped at 1."""
    limits: list[Fraction] = []

    def residual(gap: DeltaRational) -> None:
        # need gap.a + gap.b*delta >= 0 for the chosen delta
        if gap.b < 0:
            if gap.a <= 0:
                raise SolverError("symbolically infeasible residual during concretization")
            limits.append(gap.a / (-gap.b))

    def expr_value(coeffs) -> DeltaRational:
        total = DR_ZERO
        for v, c in coeffs:
            total = total + values[v].scale(c)
        return total

    for _, (coeffs, kind, rhs) in cons:
        lhs = expr_value(coeffs)
        if kind in ("le", "eq"):
            residual(rhs - lhs)
        if kind in ("ge", "eq"):
            residual(lhs - rhs)
    for v, (lo, hi) in box.items():
        if lo is not None:
            residual(values[v] - lo)
        if hi is not None:
            residual(hi - values[v])
    delta = min(limits) / 2 if limits else ONE
    if delta > 1:
        delta = ONE
    return {v: val.concretize(delta) for v, val in values.items()}


def _feasible(
    cons: list[tuple[int, TheoryCon]],
    box: dict[int, tuple[DeltaRational, DeltaRational]],
    int_vars: frozenset[int],
    want_conflict: bool = False,
):
    """Full feasibility: disequality splits, LP relaxation, integer
    branching. Returns (values, conflict) where conflict (tag list) is only
    produced for top-level LP infeasibility when requested."""
    for idx, (tag, (coeffs, kind, rhs)) in enumerate(cons):
        if kind == "ne":
            rest = cons[:idx] + cons[idx + 1 :]
            left = rest + [(tag, (coeffs, "le", DeltaRational(rhs, Fraction(-1))))]
            m, _ = _feasible(left, box, int_vars)
            if m is not None:
                return m, None
            right = rest + [(tag, (coeffs, "ge", DeltaRational(rhs, Fraction(1))))]
            m, _ = _feasible(right, box, int_vars)
            return m, None

    relax, conflict = _lp_feasible(cons, box)
    if relax is None:
        return None, (conflict if want_conflict else None)
    values = _concretize(relax, cons, box)
    for v in sorted(int_vars):
        x = values[v]
        if x.denominator != 1:
            floor = Fraction(x.numerator // x.denominator)
            lo, hi = box[v]
            down = dict(box)
            down[v] = (lo, DeltaRational(floor) if hi is None or DeltaRational(floor) < hi else hi)
            m, _ = _feasible(cons, down, int_vars)
            if m is not None:
                return m, None
            up = dict(box)
            ceil = DeltaRational(floor + 1)
            up[v] = (ceil if lo is None or lo < ceil else lo, hi)
            m, _ = _feasible(cons, up, int_vars)
            return m, None
    return values, None


SignedAtom = tuple[LinearPredicate, bool]


@dataclass(frozen=True)
class TheoryResult:
    consistent: bool
    model: Optional[dict[int, Fraction]] = None
    justification: tuple[SignedAtom, ...] = ()


def _theory_box(atoms: Iterable[SignedAtom], attributes: Sequence[CatalogAttribute]):
    referenced: set[int] = set()
    for a, _ in atoms:
        referenced |= a.expr.attribute_ids()
    box = {}
    int_vars = set()
    for i in referenced:
        attr = attributes[i]
        if attr.kind == Kind.BOOLEAN:
            raise StructureError(f"boolean attribute {attr.name} inside a linear predicate")
        box[i] = (DeltaRational(attr.lo), DeltaRational(attr.hi))
        if attr.kind == Kind.ORDINAL:
            int_vars.add(i)
    return box, frozenset(int_vars)


def _minimize_core(candidates: list[int], infeasible) -> list[int]:
    """Minimal infeasible subset of an infeasible candidate set, by
    divide-and-conquer; every returned member is necessary (removing any one
    restores feasibility), matching the deletion-filter contract."""

    def qx(base: list[int], base_changed: bool, cands: list[int]) -> list[int]:
        if base_changed and infeasible(base):
            return []
        if len(cands) == 1:
            return list(cands)
        k = len(cands) // 2
        c1, c2 = cands[:k], cands[k:]
        x2 = qx(base + c1, bool(c1), c2)
        x1 = qx(base + x2, bool(x2), c1)
        return x1 + x2

    return qx([], False, candidates)


def theory_check(
    atoms: Iterable[SignedAtom], attributes: Sequence[CatalogAttribute]
) -> TheoryResult:
    """Check a conjunction of signed linear atoms over bounded attributes.

    Consistent results carry exact rational values for every referenced
    attribute (integer-valued for ordinals). Inconsistent results carry a
    minimal justification: removing any single member makes the rest
    feasible (deletion-filter property). The simplex conflict explanation
    seeds the minimization when the rational relaxation already fails.
    """
    signed = list(atoms)
    box, int_vars = _theory_box(signed, attributes)
    cons = [(i, _normalize_atom(a, pos)) for i, (a, pos) in enumerate(signed)]
    model, conflict = _feasible(cons, box, int_vars, want_conflict=True)
    if model is not None:
        return TheoryResult(True, model=model)

    def infeasible(idx: list[int]) -> bool:
        sub = [signed[k] for k in idx]
        sub_box, sub_ints = _theory_box(sub, attributes)
        m, _ = _feasible([cons[k] for k in idx], sub_box, sub_ints)
        return m is None

    candidates = sorted(set(conflict)) if conflict else list(range(len(signed)))
    if conflict and not infeasible(candidates):
        # the LP explanation is not self-contained (integrality mattered)
        candidates = list(range(len(signed)))
    core = _minimize_core(candidates, infeasible)
    return TheoryResult(False, justification=tuple(signed[k] for k in core))


# ---------------------------------------------------------------------------
# Lazy SMT loop
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SmtResult:
    status: str  # "sat" | "unsat"
    model: Optional[Configuration] = None

    @property
    def is_sat(self) -> bool:
        return self.status == "sat"


class SharedTheory:
    """Theory facts reusable across solver instances over one attribute
    space: memoized consistency checks and justification lemmas (stored as
    signed atoms, translated into clauses wherever the atoms exist)."""

    def __init__(self):
        self.cache: dict[frozenset, TheoryResult] = {}
        self.lemmas: list[tuple[SignedAtom, ...]] = []
        self._lemma_keys: set[frozenset] = set()

    def add_lemma(self, just: tuple[SignedAtom, ...]) -> None:
        key = frozenset(just)
        if key not in self._lemma_keys:
            self._lemma_keys.add(key)
            self.lemmas.append(just)


def _atom_interval(a: LinearPredicate, positive: bool):
    """(lo, hi) delta-rational window the atom puts on its expression, or
    None when the signed atom is not a single interval (disequality)."""
    coeffs, kind, rhs = _normalize_atom(a, positive)
    if kind == "le":
        return (None, rhs)
    if kind == "ge":
        return (rhs, None)
    if kind == "eq":
        return (rhs, rhs)
    return None


def conjunction_obviously_impossible(
    atoms: Iterable[AtomicConstraint], attributes: Sequence[CatalogAttribute]
) -> bool:
    """Cheap sound check (interval arithmetic only) that a conjunction of
    atoms can never hold; used to drop dead soft items before optimization."""
    bool_seen: dict[int, bool] = {}
    windows: dict = {}
    for a in atoms:
        if isinstance(a, BoolLit):
            if bool_seen.setdefault(a.attr_id, a.positive) != a.positive:
                return True
            continue
        w = _atom_interval(a, True)
        if w is None:
            continue
        cur = windows.setdefault(a.expr.coeffs, [None, None])
        if w[0] is not None and (cur[0] is None or cur[0] < w[0]):
            cur[0] = w[0]
        if w[1] is not None and (cur[1] is None or w[1] < cur[1]):
            cur[1] = w[1]
        if cur[0] is not None and cur[1] is not None and cur[1] < cur[0]:
            return True
    for coeffs, (lo, hi) in windows.items():
        range_lo = DR_ZERO
        range_hi = DR_ZERO
        for v, c in coeffs:
            attr = attributes[v]
            a_lo, a_hi = DeltaRational(attr.lo), DeltaRational(attr.hi)
            if c > 0:
                range_lo = range_lo + a_lo.scale(c)
                range_hi = range_hi + a_hi.scale(c)
            else:
                range_lo = range_lo + a_hi.scale(c)
                range_hi = range_hi + a_lo.scale(c)
        if lo is not None and range_hi < lo:
            return True
        if hi is not None and hi < range_lo:
            return True
    return False


class SmtSession:
    """Reusable solving context: one abstraction, learned justification
    clauses and theory-check memoization shared across repeated solves
    (the Max-SMT bound-tightening loop relies on this). Atoms constraining
    the same linear expression are compiled into mutual-exclusion /
    implication clauses up front so the SAT core prunes them without
    theory round-trips."""

    def __init__(
        self,
        formulas: Sequence[Formula],
        attributes: Sequence[CatalogAttribute],
        seed: int = 0,
        shared: Optional[SharedTheory] = None,
    ):
        self.attributes = tuple(attributes)
        self.seed = seed
        self.builder = AbstractionBuilder()
        for f in formulas:
            self.builder.assert_formula(f)
        self.learned: list[list[int]] = []
        self.shared = shared if shared is not None else SharedTheory()
        self._static_done = 0
        self._lemmas_done = 0
        self._clause_keys: set[frozenset] = set()

    def define_soft(self, f: Formula) -> int:
        return self.builder.define_formula(f)

    def add_clause(self, clause: list[int]) -> None:
        self.builder.clauses.append(clause)

    @property
    def abstraction(self) -> BoolAbstraction:
        return self.builder.build()

    def _learn(self, clause: list[int]) -> None:
        key = frozenset(clause)
        if key not in self._clause_keys:
            self._clause_keys.add(key)
            self.learned.append(clause)

    def _static_interval_lemmas(self) -> None:
        """For atom pairs over one linear form, decide all sign combinations
        by interval intersection and learn the impossible ones."""
        linear = sorted(
            (v, a) for v, a in self.builder.var_atom.items() if isinstance(a, LinearPredicate)
        )
        if len(linear) == self._static_done:
            return
        by_expr: dict = {}
        for v, a in linear:
            by_expr.setdefault(a.expr.coeffs, []).append((v, a))
        for group in by_expr.values():
            for i in range(len(group)):
                for j in range(i + 1, len(group)):
                    v1, a1 = group[i]
                    v2, a2 = group[j]
                    for s1 in (True, False):
                        w1 = _atom_interval(a1, s1)
                        if w1 is None:
                            continue
                        for s2 in (True, False):
                            w2 = _atom_interval(a2, s2)
                            if w2 is None:
                                continue
                            lo = w1[0] if w2[0] is None else (w2[0] if w1[0] is None else max(w1[0], w2[0]))
                            hi = w1[1] if w2[1] is None else (w2[1] if w1[1] is None else min(w1[1], w2[1]))
                            if lo is not None and hi is not None and hi < lo:
                                self._learn([(-v1 if s1 else v1), (-v2 if s2 else v2)])
        self._static_done = len(linear)

    def _sync_shared_lemmas(self) -> None:
        while self._lemmas_done < len(self.shared.lemmas):
            just = self.shared.lemmas[self._lemmas_done]
            self._lemmas_done += 1
            lits = []
            for a, pos in just:
                v = self.builder.atom_var.get(a)
                if v is None:
                    lits = None
                    break
                lits.append(-v if pos else v)
            if lits is not None:
                self._learn(lits)

    def solve(
        self,
        pb_at_least=None,
        polarity_hint: Optional[Mapping[int, bool]] = None,
    ) -> Optional[Configuration]:
        self._static_interval_lemmas()
        self._sync_shared_lemmas()
        nv = self.builder.num_vars
        var_atom = self.builder.var_atom
        linear_vars = [
            (v, a) for v, a in var_atom.items() if isinstance(a, LinearPredicate)
        ]
        theory_model: dict[int, Fraction] = {}

        def vet(assignment: list[bool]) -> Optional[list[int]]:
            signed = tuple((a, assignment[v]) for v, a in linear_vars)
            key = frozenset(signed)
            res = self.shared.cache.get(key)
            if res is None:
                res = theory_check(signed, self.attributes)
                self.shared.cache[key] = res
            if res.consistent:
                theory_model.clear()
                theory_model.update(res.model or {})
                return None
            self.shared.add_lemma(res.justification)
            clause = []
            for a, pos in res.justification:
                v = self.builder.atom_var[a]
                clause.append(-v if pos else v)
            self._learn(clause)
            return clause

        clauses = self.builder.clauses + self.learned
        assignment = sat_solve(nv, clauses, self.seed, polarity_hint, pb_at_least, vet)
        if assignment is None:
            return None
        return self._build_model(assignment, theory_model)

    def _build_model(self, assignment: list[bool], theory_model: dict[int, Fraction]) -> Configuration:
        values: list = []
        for attr in self.attributes:
            if attr.kind == Kind.BOOLEAN:
                v = self.builder.atom_var.get(BoolLit(attr.id, True))
                values.append(assignment[v] if v is not None else False)
            elif attr.id in theory_model:
                x = theory_model[attr.id]
                values.append(int(x) if attr.kind == Kind.ORDINAL else x)
            else:
                values.append(int(attr.lo) if attr.kind == Kind.ORDINAL else attr.lo)
        return Configuration(tuple(values))


def smt_solve(
    formulas: Sequence[Formula], attributes: Sequence[CatalogAttribute], seed: int = 0
) -> SmtResult:
    """Decide satisfiability of a conjunction of formulas over bounded attributes."""
    session = SmtSession(formulas, attributes, seed)
    model = session.solve()
    if model is None:
        return SmtResult("unsat")
    return SmtResult("sat", model)
