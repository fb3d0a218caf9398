"""Experiment harness: simulated elicitation sessions, percentage utility
loss trajectories, order-statistic aggregation and CSV output.

Loss is always measured against the hidden true utility, normalized by the
true utility's full range over the feasible region: 100*(f_max - f)/(f_max -
f_min). Trajectories are recorded raw (no clamping or smoothing): entry q is
the loss of the recommendation once q pair queries have been answered (entry
0 follows the initial ranking). Runs derive independent rng streams from
sha256(base_seed, run_index), so an experiment replayed with the same seed
writes byte-identical CSV.
"""

from __future__ import annotations

import csv
import hashlib
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .core import Problem
from .dmsim import GENERATORS, TrueUtility, noisy_compare, noisy_rank
from .elicit import ProblemSkeleton, SessionConfig, init_session
from .maxsmt import maximize, minimize
from .smt import SharedTheory


class DegenerateUtility(RuntimeError):
    """The generated utility is constant over the feasible region."""


@dataclass(frozen=True)
class RunTrajectory:
    run_id: int
    losses: tuple[Fraction, ...]  # loss percentage per query count, from 0
    converged_at: Optional[int]   # first index with loss 0 (DM would accept)


@dataclass(frozen=True)
class Aggregate:
    query_index: tuple[int, ...]
    median: tuple[Fraction, ...]
    p25: tuple[Fraction, ...]
    p75: tuple[Fraction, ...]


class LossScale:
    """Exact loss normalization for one instance: solver-certified best and
    worst achievable true utility under the hard constraints."""

    def __init__(self, truth: TrueUtility, skeleton: ProblemSkeleton, seed: int = 0):
        problem = Problem(skeleton.attributes, skeleton.hard, truth.soft)
        shared = SharedTheory()
        best = maximize(problem, seed=seed, shared=shared)
        worst = minimize(problem, seed=seed + 1, shared=shared)
        if best is None or worst is None:
            raise DegenerateUtility("hard constraints infeasible at scale computation")
        if best.value == worst.value:
            raise DegenerateUtility("flat true utility: loss undefined")
        self.truth = truth
        self.f_max = best.value
        self.f_min = worst.value

    def loss(self, config) -> Fraction:
        return 100 * (self.f_max - self.truth.value(config)) / (self.f_max - self.f_min)


def percentage_loss(truth: TrueUtility, skeleton: ProblemSkeleton, config, seed: int = 0) -> Fraction:
    """One-off percentage loss; experiments reuse a LossScale instead."""
    return LossScale(truth, skeleton, seed).loss(config)


def derive_seed(base_seed: int, run_index: int) -> int:
    digest = hashlib.sha256(f"{base_seed}:{run_index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _converged_at(losses: Sequence[Fraction]) -> Optional[int]:
    """First query count at which the recommendation is a true optimum; an
    interactive session would end here with the DM accepting."""
    for q, loss in enumerate(losses):
        if loss == 0:
            return q
    return None


def run_single(
    benchmark: str,
    n_feat: int,
    n_soft: int,
    budget: int,
    seed: int,
    variance: float = 10.0,
    degree: int = 3,
) -> tuple[Fraction, ...]:
    """One elicitation session against a fresh simulated decision maker;
    returns the loss trajectory (budget+1 entries)."""
    rng = random.Random(seed)
    skeleton, truth = GENERATORS[benchmark](n_feat, n_soft, rng)
    scale = LossScale(truth, skeleton, seed=rng.getrandbits(32))
    dm_rng = random.Random(rng.getrandbits(64))
    state = init_session(skeleton, SessionConfig(degree=degree), seed=rng.getrandbits(32))
    ranked = noisy_rank(list(state.pending_triple), truth, variance, dm_rng)
    state.record_initial_ranking(ranked)
    losses = [scale.loss(state.refine_and_recommend())]
    for _ in range(budget):
        state.generate_second()
        pair = state.pending_pair
        prefers_first = noisy_compare(pair.first, pair.second, truth, variance, dm_rng)
        state.record_answer("first" if prefers_first else "second")
        losses.append(scale.loss(state.refine_and_recommend()))
    return tuple(losses)


def run_experiment(
    benchmark: str,
    n_feat: int,
    n_soft: int,
    runs: int,
    budget: int,
    base_seed: int,
    variance: float = 10.0,
    degree: int = 3,
) -> list[RunTrajectory]:
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if benchmark not in GENERATORS:
        raise ValueError(f"unknown benchmark {benchmark!r}")
    out = []
    for run_id in range(runs):
        losses = run_single(
            benchmark, n_feat, n_soft, budget, derive_seed(base_seed, run_id), variance, degree
        )
        out.append(RunTrajectory(run_id, losses, _converged_at(losses)))
    return out


def aggregate(trajectories: Sequence[RunTrajectory]) -> Aggregate:
    """Exact order statistics per query count (lower-index convention for
    even sample sizes)."""
    if not trajectories:
        raise ValueError("nothing to aggregate")
    horizon = min(len(t.losses) for t in trajectories)

    def order_stat(values: list[Fraction], quarter: int) -> Fraction:
        ranked = sorted(values)
        return ranked[(len(ranked) - 1) * quarter // 4]

    qs, med, lo, hi = [], [], [], []
    for q in range(horizon):
        col = [t.losses[q] for t in trajectories]
        qs.append(q)
        lo.append(order_stat(col, 1))
        med.append(order_stat(col, 2))
        hi.append(order_stat(col, 3))
    return Aggregate(tuple(qs), tuple(med), tuple(lo), tuple(hi))


# ---------------------------------------------------------------------------
# CSV formats: runs (run_id,query_index,loss_pct) and aggregate summaries
# ---------------------------------------------------------------------------


def write_runs_csv(path: str, trajectories: Sequence[RunTrajectory]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("run_id,query_index,loss_pct\n")
        for t in trajectories:
            for q, loss in enumerate(t.losses):
                fh.write(f"{t.run_id},{q},{float(loss):.6f}\n")


def read_runs_csv(path: str) -> list[RunTrajectory]:
    rows: dict[int, dict[int, Fraction]] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            rows.setdefault(int(rec["run_id"]), {})[int(rec["query_index"])] = Fraction(
                rec["loss_pct"]
            )
    out = []
    for run_id in sorted(rows):
        by_q = rows[run_id]
        losses = tuple(by_q[q] for q in sorted(by_q))
        out.append(RunTrajectory(run_id, losses, _converged_at(losses)))
    return out


def write_summary_csv(path: str, agg: Aggregate) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("query_index,median_loss_pct,p25_loss_pct,p75_loss_pct\n")
        for i, q in enumerate(agg.query_index):
            fh.write(
                f"{q},{float(agg.median[i]):.6f},{float(agg.p25[i]):.6f},{float(agg.p75[i]):.6f}\n"
            )
