"""Interactive elicitation loop: initialization, learning, recommendation,
query-pair generation with diversification and random completion.

One session is a strict state machine: an initial feasible triple is ranked,
then each round learns a sparse utility from all collected pairs, recommends
the utility-maximizing feasible configuration, and asks one comparison
between that recommendation and a diversified alternative forced to differ
on at least one currently-relevant feature. Attributes irrelevant to both
hard constraints and the learned model are randomized in every shown
configuration so overlooked decisional attributes can surface. Replaying a
session with the same seed and answers reproduces every query exactly.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .core import (
    And,
    Atom,
    AtomicConstraint,
    BoolLit,
    CatalogAttribute,
    Configuration,
    Formula,
    Kind,
    Not,
    Or,
    Problem,
    SoftConstraint,
    configuration_to_json,
    formula_attribute_ids,
    validate,
)
from .features import FeatureSpace, utility
from .learner import LearnerConfig, RankingDataset, UtilityModel, cross_validate, fit
from .maxsmt import maximize
from .smt import SharedTheory, smt_solve

REAL_LATTICE = 10**6  # real attributes are sampled on this uniform grid


class ProtocolError(RuntimeError):
    """An operation was applied in the wrong session state."""


class SetupError(RuntimeError):
    """The hard constraints admit no configuration."""


@dataclass(frozen=True)
class ProblemSkeleton:
    """What the engine knows up front: attributes, hard formulas and the
    atomic constraints the utility may be built from. `derived` lists
    generator-side attribute definitions (id, fn(values)->value) used to
    complete sampled configurations."""

    attributes: tuple[CatalogAttribute, ...]
    hard: tuple[Formula, ...]
    atoms: tuple[AtomicConstraint, ...]
    derived: tuple[tuple[int, Callable], ...] = ()

    def problem(self, soft: Sequence[SoftConstraint] = ()) -> Problem:
        return Problem(self.attributes, self.hard, tuple(soft))

    def apply_derived(self, values: list) -> None:
        for attr_id, fn in self.derived:
            values[attr_id] = fn(values)

    def hard_attribute_ids(self) -> set[int]:
        out: set[int] = set()
        for f in self.hard:
            out |= formula_attribute_ids(f)
        return out


@dataclass(frozen=True)
class SessionConfig:
    degree: int = 3
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    max_rejections: int = 10000


class Status(str, Enum):
    AWAITING_INITIAL_RANKING = "awaiting_initial_ranking"
    AWAITING_REFINE = "awaiting_refine"
    RECOMMENDED = "recommended"
    AWAITING_PAIR_ANSWER = "awaiting_pair_answer"
    ACCEPTED = "accepted"


@dataclass(frozen=True)
class QueryPair:
    first: Configuration
    second: Configuration


def _draw_value(attr: CatalogAttribute, rng: random.Random):
    if attr.kind == Kind.BOOLEAN:
        return rng.random() < 0.5
    if attr.kind == Kind.ORDINAL:
        return rng.randint(int(attr.lo), int(attr.hi))
    step = rng.randint(0, REAL_LATTICE)
    return attr.lo + (attr.hi - attr.lo) * Fraction(step, REAL_LATTICE)


def sample_feasible(
    skeleton: ProblemSkeleton, rng: random.Random, max_rejections: int = 10000
) -> Configuration:
    """Uniform rejection sampling over the feasible region, with a solver
    fallback (seed-randomized branching, then per-attribute perturbation)."""
    problem = skeleton.problem()
    derived_ids = {i for i, _ in skeleton.derived}
    for _ in range(max_rejections):
        values = [_draw_value(a, rng) for a in skeleton.attributes]
        skeleton.apply_derived(values)
        c = Configuration(tuple(values))
        if validate(problem, c).ok:
            return c

    res = smt_solve(list(skeleton.hard), skeleton.attributes, seed=rng.getrandbits(32))
    if not res.is_sat:
        raise SetupError("hard constraints are infeasible")
    values = list(res.model.values)
    skeleton.apply_derived(values)
    if not validate(problem, Configuration(tuple(values))).ok:
        values = list(res.model.values)  # derived hook disagrees; keep solver model
    order = [a for a in skeleton.attributes if a.id not in derived_ids]
    rng.shuffle(order)
    for a in order:
        candidate = list(values)
        candidate[a.id] = _draw_value(a, rng)
        skeleton.apply_derived(candidate)
        if validate(problem, Configuration(tuple(candidate))).ok:
            values = candidate
    return Configuration(tuple(values))


class EventLog:
    """Append-only JSON-lines log enabling deterministic session replay."""

    def __init__(self, path: Optional[str] = None):
        self.path = path
        self.events: list[dict] = []

    def append(self, event: dict) -> None:
        self.events.append(event)
        if self.path:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, sort_keys=True, separators=(",", ":")) + "\n")


class SessionState:
    """Mutable elicitation session. Use the module-level operations (or the
    equally-named methods) to advance it; they raise ProtocolError out of
    order."""

    def __init__(
        self,
        skeleton: ProblemSkeleton,
        cfg: SessionConfig = SessionConfig(),
        seed: int = 0,
        log: Optional[EventLog] = None,
    ):
        self.skeleton = skeleton
        self.cfg = cfg
        self.seed = seed
        self.rng = random.Random(seed)
        self.space = FeatureSpace(skeleton.atoms, cfg.degree)
        self.dataset: list[tuple[Configuration, Configuration]] = []
        self.model: Optional[UtilityModel] = None
        self.iteration = 0
        self.refine_count = 0
        self.status = Status.AWAITING_INITIAL_RANKING
        self.pending_triple: Optional[tuple[Configuration, ...]] = None
        self.pending_pair: Optional[QueryPair] = None
        self.recommendation: Optional[Configuration] = None
        self.log = log or EventLog()
        self._psi: dict[Configuration, np.ndarray] = {}
        self._hard_ids = skeleton.hard_attribute_ids()
        self._shared_theory = SharedTheory()

    # -- helpers ----------------------------------------------------------

    def psi(self, c: Configuration) -> np.ndarray:
        vec = self._psi.get(c)
        if vec is None:
            vec = self.space.psi(c)
            self._psi[c] = vec
        return vec

    def _require(self, status: Status) -> None:
        if self.status != status:
            raise ProtocolError(f"operation requires status {status.value}, session is {self.status.value}")

    def _ranking_dataset(self) -> RankingDataset:
        rows = [
            self.psi(p).astype(np.float64) - self.psi(q).astype(np.float64)
            for p, q in self.dataset
        ]
        return RankingDataset(np.vstack(rows)) if rows else RankingDataset(np.zeros((0, len(self.space))))

    def _model_attribute_ids(self) -> set[int]:
        if self.model is None:
            return set()
        out: set[int] = set()
        for j in self.model.weights:
            for a in self.space.feature_atoms(j):
                out |= {a.attr_id} if isinstance(a, BoolLit) else a.expr.attribute_ids()
        return out

    def _feature_formula(self, j: int) -> Formula:
        return And(tuple(Atom(a) for a in self.space.feature_atoms(j)))

    # -- operations --------------------------------------------------------

    def issue_initial_triple(self) -> tuple[Configuration, ...]:
        self._require(Status.AWAITING_INITIAL_RANKING)
        if self.pending_triple is not None:
            return self.pending_triple
        if not smt_solve(list(self.skeleton.hard), self.skeleton.attributes, seed=self.rng.getrandbits(32)).is_sat:
            raise SetupError("hard constraints are infeasible")
        triple = tuple(
            sample_feasible(self.skeleton, self.rng, self.cfg.max_rejections) for _ in range(3)
        )
        self.pending_triple = triple
        self.log.append(
            {"type": "initial_triple", "configs": [configuration_to_json(c) for c in triple]}
        )
        return triple

    def record_initial_ranking(self, ordered: Sequence[Configuration]) -> "SessionState":
        self._require(Status.AWAITING_INITIAL_RANKING)
        if self.pending_triple is None:
            raise ProtocolError("no triple has been issued")
        issued = sorted(self.pending_triple, key=lambda c: repr(c.values))
        got = sorted(ordered, key=lambda c: repr(c.values))
        if len(ordered) != 3 or issued != got:
            raise ProtocolError("ranking must be a permutation of the issued triple")
        self.dataset.append((ordered[0], ordered[1]))
        self.dataset.append((ordered[1], ordered[2]))
        self.pending_triple = None
        self.status = Status.AWAITING_REFINE
        self.log.append(
            {"type": "ranking", "order": [configuration_to_json(c) for c in ordered]}
        )
        return self

    def refine_and_recommend(self) -> Configuration:
        self._require(Status.AWAITING_REFINE)
        data = self._ranking_dataset()
        lcfg = replace(self.cfg.learner, seed=self.seed)
        C = 1.0 if self.refine_count == 0 else cross_validate(data, lcfg)
        self.model = fit(data, C, lcfg, space=self.space)
        self.refine_count += 1
        if self.model.is_zero():
            rec = sample_feasible(self.skeleton, self.rng, self.cfg.max_rejections)
        else:
            res = maximize(
                self.skeleton.problem(self.model.soft_constraints()),
                seed=self.rng.getrandbits(32),
                shared=self._shared_theory,
                phase=self.recommendation,
            )
            if res is None:
                raise SetupError("hard constraints became infeasible")
            rec = res.model
            if self.recommendation is not None:
                # the incumbent stays whenever it remains an argmax of the
                # refined model (stable tie-breaking across refinements)
                incumbent_value = utility(
                    self.model.rational_weights(), self.psi(self.recommendation)
                )
                if incumbent_value == res.value:
                    rec = self.recommendation
        self.recommendation = rec
        self.status = Status.RECOMMENDED
        self.log.append(
            {
                "type": "recommendation",
                "config": configuration_to_json(rec),
                "c": C,
                "model_hash": self.model.snapshot_hash(),
            }
        )
        return rec

    def generate_second(self, first: Optional[Configuration] = None) -> Configuration:
        self._require(Status.RECOMMENDED)
        astar = first if first is not None else self.recommendation
        assert astar is not None and self.model is not None
        nonzero = sorted(self.model.weights)
        second: Optional[Configuration] = None
        if nonzero:
            iv = self.psi(astar)
            unsatisfied = [j for j in nonzero if not iv[j]]
            if unsatisfied:
                extra = Or(tuple(self._feature_formula(j) for j in unsatisfied))
            else:
                extra = Or(tuple(Not(self._feature_formula(j)) for j in nonzero))
            res = maximize(
                self.skeleton.problem(self.model.soft_constraints()),
                (extra,),
                seed=self.rng.getrandbits(32),
                shared=self._shared_theory,
                phase=astar,
            )
            if res is not None:
                second = res.model
        if second is None:
            second = sample_feasible(self.skeleton, self.rng, self.cfg.max_rejections)
        pair = QueryPair(
            self.random_completion(astar, self.rng),
            self.random_completion(second, self.rng),
        )
        self.pending_pair = pair
        self.status = Status.AWAITING_PAIR_ANSWER
        self.log.append(
            {
                "type": "query",
                "first": configuration_to_json(pair.first),
                "second": configuration_to_json(pair.second),
            }
        )
        return pair.second

    def random_completion(self, c: Configuration, rng: random.Random) -> Configuration:
        """Re-draw every attribute that no hard formula and no nonzero-weight
        feature mentions; hard constraints cannot see these attributes, so
        feasibility is preserved."""
        derived_ids = {i for i, _ in self.skeleton.derived}
        pinned = self._hard_ids | self._model_attribute_ids() | derived_ids
        values = list(c.values)
        changed = False
        for a in self.skeleton.attributes:
            if a.id not in pinned:
                values[a.id] = _draw_value(a, rng)
                changed = True
        if not changed:
            return c
        self.skeleton.apply_derived(values)
        out = Configuration(tuple(values))
        report = validate(self.skeleton.problem(), out)
        if not report.ok:
            raise SetupError(f"random completion broke feasibility: {report.reason}")
        return out

    def record_answer(self, preferred: str) -> "SessionState":
        self._require(Status.AWAITING_PAIR_ANSWER)
        if preferred not in ("first", "second"):
            raise ProtocolError("answer must be 'first' or 'second'")
        pair = self.pending_pair
        assert pair is not None
        if preferred == "first":
            self.dataset.append((pair.first, pair.second))
        else:
            self.dataset.append((pair.second, pair.first))
        self.pending_pair = None
        self.iteration += 1
        self.status = Status.AWAITING_REFINE
        self.log.append({"type": "answer", "preferred": preferred})
        return self

    def accept(self) -> Configuration:
        # accepting while a pair query is pending abandons that query; the
        # surfaced recommendation is what the decision maker takes
        if self.status not in (Status.RECOMMENDED, Status.AWAITING_PAIR_ANSWER):
            raise ProtocolError(
                f"operation requires a recommendation, session is {self.status.value}"
            )
        assert self.recommendation is not None
        self.pending_pair = None
        self.status = Status.ACCEPTED
        self.log.append(
            {"type": "accept", "config": configuration_to_json(self.recommendation)}
        )
        return self.recommendation


# -- module-level operation aliases (the state machine as free functions) ---


def init_session(
    skeleton: ProblemSkeleton,
    cfg: SessionConfig = SessionConfig(),
    seed: int = 0,
    log: Optional[EventLog] = None,
) -> SessionState:
    state = SessionState(skeleton, cfg, seed, log)
    state.log.append({"type": "created", "seed": seed, "degree": cfg.degree})
    state.issue_initial_triple()
    return state


def record_initial_ranking(state: SessionState, ordered) -> SessionState:
    return state.record_initial_ranking(ordered)


def refine_and_recommend(state: SessionState) -> tuple[SessionState, Configuration]:
    return state, state.refine_and_recommend()


def generate_second(state: SessionState, first: Configuration) -> Configuration:
    return state.generate_second(first)


def record_answer(state: SessionState, preferred: str) -> SessionState:
    return state.record_answer(preferred)


def accept(state: SessionState) -> Configuration:
    return state.accept()
