"""Sparse utility learning from ranked pairs.

Minimizes  ||w||_1 + C * sum_p max(0, 1 - w . delta_p)^2  over difference
vectors delta_p = psi(preferred) - psi(dispreferred); the squared-hinge term
is the exact unconstrained equivalent of the slack-constrained form. The
optimizer is monotone FISTA with soft-thresholding and backtracking, wrapped
in an active-set loop that screens the full coordinate set against the KKT
conditions, so huge feature spaces stay cheap. C is chosen by internal
cross-validation on pairwise holdout accuracy.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .core import SoftConstraint, atom_to_json
from .features import FeatureSpace


@dataclass(frozen=True)
class LearnerConfig:
    c_grid: tuple[float, ...] = (0.01, 0.1, 1.0, 10.0, 100.0)
    folds: int = 5
    tol: float = 1e-9          # relative objective-change stopping threshold
    max_iter: int = 4000
    zero_clip: float = 1e-6
    kkt_tol: float = 5e-5      # screening tolerance on the stationarity residual
    seed: int = 0
    debug_monotone: bool = False


@dataclass
class RankingDataset:
    """Difference vectors of ranked pairs; rows may repeat or contradict."""

    diffs: np.ndarray  # (pairs, features), float64
    _reps: Optional[np.ndarray] = None

    @staticmethod
    def from_pairs(pairs: Sequence[tuple[np.ndarray, np.ndarray]]) -> "RankingDataset":
        if not pairs:
            return RankingDataset(np.zeros((0, 0)))
        rows = [p.astype(np.float64) - q.astype(np.float64) for p, q in pairs]
        return RankingDataset(np.vstack(rows))

    def __len__(self) -> int:
        return self.diffs.shape[0]

    @property
    def num_features(self) -> int:
        return self.diffs.shape[1]

    def column_reps(self) -> np.ndarray:
        """First-occurrence indices of the distinct difference columns.

        Identical columns are objective-equivalent under the L1 penalty (all
        mass may sit on the first of a group without changing the optimum
        value), so fits can run on representatives only.
        """
        if self._reps is None:
            if self.diffs.size == 0:
                self._reps = np.arange(self.diffs.shape[1], dtype=np.int64)
            else:
                _, first = np.unique(self.diffs, axis=1, return_index=True)
                self._reps = np.sort(first.astype(np.int64))
        return self._reps


@dataclass
class UtilityModel:
    """Sparse weights over a feature space (clipped below zero_clip)."""

    weights: dict[int, float]
    space: Optional[FeatureSpace] = None
    residual: float = 0.0
    from_empty_data: bool = False

    def is_zero(self) -> bool:
        return not self.weights

    def rational_weights(self) -> dict[int, Fraction]:
        # 12 significant digits keeps the exact solver arithmetic small
        return {j: Fraction(f"{w:.12g}") for j, w in self.weights.items()}

    def soft_constraints(self) -> list[SoftConstraint]:
        assert self.space is not None
        return [
            SoftConstraint.of(self.space.feature_atoms(j), w)
            for j, w in sorted(self.rational_weights().items())
        ]

    def dump(self) -> list[dict]:
        assert self.space is not None
        items = sorted(self.weights.items(), key=lambda kv: (-abs(kv[1]), kv[0]))
        return [
            {"atoms": [atom_to_json(a) for a in self.space.feature_atoms(j)], "weight": w}
            for j, w in items
        ]

    def snapshot_hash(self) -> str:
        payload = json.dumps(self.dump(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()


def objective(diffs: np.ndarray, w: np.ndarray, C: float) -> float:
    slack = np.maximum(0.0, 1.0 - diffs @ w)
    return float(np.abs(w).sum() + C * (slack * slack).sum())


def _soft_threshold(x: np.ndarray, t: float) -> np.ndarray:
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def _fista(D: np.ndarray, w0: np.ndarray, C: float, cfg: LearnerConfig) -> np.ndarray:
    """Monotone FISTA on the restricted problem (descent enforced by restarts)."""
    Dt = np.ascontiguousarray(D.T)

    def g_and_grad(w):
        slack = np.maximum(0.0, 1.0 - D @ w)
        return C * float(slack @ slack), -2.0 * C * (Dt @ slack)

    def g_only(w):
        slack = np.maximum(0.0, 1.0 - D @ w)
        return C * float(slack @ slack)

    w = w0.copy()
    y = w0.copy()
    t = 1.0
    L = max(1.0, 2.0 * C * float((D * D).sum()) / max(1, D.shape[0]))

    def prox_step(point):
        """One backtracked proximal step; returns (candidate, its objective)."""
        nonlocal L
        gy, grad = g_and_grad(point)
        while True:
            cand = _soft_threshold(point - grad / L, 1.0 / L)
            d = cand - point
            quad = gy + float(grad @ d) + 0.5 * L * float(d @ d)
            g_cand = g_only(cand)
            if g_cand <= quad + 1e-12:
                return cand, g_cand + float(np.abs(cand).sum())
            L *= 2.0

    obj_w = objective(D, w, C)
    for _ in range(cfg.max_iter):
        cand, obj_cand = prox_step(y)
        if obj_cand > obj_w + 1e-15:
            # momentum overshoot: restart from the last accepted iterate
            t = 1.0
            cand, obj_cand = prox_step(w)
            if obj_cand >= obj_w - 1e-15:
                break
        if cfg.debug_monotone:
            assert obj_cand <= obj_w + 1e-12
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = cand + ((t - 1.0) / t_next) * (cand - w)
        done = abs(obj_w - obj_cand) <= cfg.tol * max(1.0, abs(obj_cand))
        w, obj_w, t = cand, obj_cand, t_next
        L = max(L * 0.5, 1e-6)
        if done:
            break
    return w


def stationarity_residual(diffs: np.ndarray, w: np.ndarray, C: float) -> float:
    """Max deviation from the L1 subgradient optimality conditions."""
    slack = np.maximum(0.0, 1.0 - diffs @ w)
    grad = -2.0 * C * (diffs.T @ slack)
    zero = w == 0.0
    res_zero = np.maximum(0.0, np.abs(grad[zero]) - 1.0) if zero.any() else np.zeros(0)
    nz = ~zero
    res_nz = np.abs(grad[nz] + np.sign(w[nz])) if nz.any() else np.zeros(0)
    parts = [r.max() for r in (res_zero, res_nz) if r.size]
    return float(max(parts)) if parts else 0.0


def fit(
    data: RankingDataset,
    C: float,
    cfg: LearnerConfig = LearnerConfig(),
    space: Optional[FeatureSpace] = None,
    warm_active: Optional[Sequence[int]] = None,
    cols: Optional[np.ndarray] = None,
) -> UtilityModel:
    """Solve the ranking problem for a fixed C; returns a sparse model.

    Large feature spaces are reduced to distinct difference columns first
    (`cols` overrides, letting cross-validation reuse the parent dataset's
    reduction); reported weights map back to original feature indices.
    """
    if len(data) == 0:
        return UtilityModel({}, space, residual=0.0, from_empty_data=True)
    if cols is None and data.num_features > 512:
        cols = data.column_reps()
    if cols is not None:
        D = np.ascontiguousarray(data.diffs[:, cols])
        to_orig = cols
    else:
        D = data.diffs
        to_orig = None
    nf = D.shape[1]
    w = np.zeros(nf)
    if warm_active and to_orig is not None:
        pos = {int(j): i for i, j in enumerate(to_orig)}
        warm_active = [pos[j] for j in warm_active if j in pos]
    # the working set only grows, so the loop terminates even when the inner
    # solver runs on a reduced budget (cross-validation fits)
    active: set[int] = set(warm_active or [])

    for _ in range(400):
        if active:
            sub = np.asarray(sorted(active), dtype=np.int64)
            w_sub = _fista(np.ascontiguousarray(D[:, sub]), w[sub], C, cfg)
            w[:] = 0.0
            w[sub] = w_sub
        slack = np.maximum(0.0, 1.0 - D @ w)
        grad = -2.0 * C * (D.T @ slack)
        viol = np.abs(grad) - 1.0
        if active:
            viol[np.asarray(sorted(active), dtype=np.int64)] = -np.inf
        worst = int(np.argmax(viol))
        if viol[worst] <= cfg.kkt_tol:
            break
        order = np.argsort(viol)[::-1]
        active |= {int(j) for j in order[:20] if viol[j] > cfg.kkt_tol}

    nz = np.nonzero(np.abs(w) >= cfg.zero_clip)[0]
    if to_orig is not None:
        weights = {int(to_orig[j]): float(w[j]) for j in nz}
    else:
        weights = {int(j): float(w[j]) for j in nz}
    wc = np.zeros(nf)
    for j in nz:
        wc[j] = w[j]
    return UtilityModel(weights, space, residual=stationarity_residual(D, wc, C))


def cross_validate(data: RankingDataset, cfg: LearnerConfig = LearnerConfig()) -> float:
    """Pick C by k-fold holdout pair accuracy; ties favor the smallest C.

    Fold fits run on a lightened budget (holdout scoring only needs margin
    signs) and warm-start their active sets down the C path.
    """
    n = len(data)
    if n < 2:
        return 1.0
    k = min(cfg.folds, n)
    idx = list(range(n))
    random.Random(cfg.seed).shuffle(idx)
    folds = [idx[i::k] for i in range(k)]
    fold_cfg = replace(cfg, tol=max(cfg.tol, 1e-6), max_iter=min(cfg.max_iter, 500))

    reps = data.column_reps() if data.num_features > 512 else None
    scores = {C: 0 for C in cfg.c_grid}
    for f in folds:
        hold = np.asarray(f, dtype=np.int64)
        train_rows = np.asarray([i for i in idx if i not in set(f)], dtype=np.int64)
        train = RankingDataset(data.diffs[train_rows])
        warm: Optional[list[int]] = None
        for C in sorted(cfg.c_grid, reverse=True):
            model = fit(train, C, fold_cfg, warm_active=warm, cols=reps)
            warm = sorted(model.weights)
            w = np.zeros(data.num_features)
            for j, v in model.weights.items():
                w[j] = v
            scores[C] += int((data.diffs[hold] @ w > 0).sum())

    best_c, best_score = None, -1
    for C in sorted(cfg.c_grid):
        if scores[C] > best_score:
            best_c, best_score = C, scores[C]
    return float(best_c)


def predict(model: UtilityModel, config) -> float:
    """Learned utility of a configuration (real-valued)."""
    assert model.space is not None
    iv = model.space.psi(config)
    return float(sum(w for j, w in model.weights.items() if iv[j]))
