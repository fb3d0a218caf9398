"""Feature space of atomic-constraint conjunctions and indicator vectors.

A feature is a conjunction of 1..d atoms from a fixed atom list; a
configuration maps to the 0/1 vector of feature indicators. The utility of a
configuration under a sparse weight vector is the exact rational dot product.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import AtomicConstraint, Configuration, eval_atomic

MAX_FEATURES = 1_000_000


class FeatureSpace:
    """Ordered conjunctions of up to `degree` atoms.

    Feature order is canonical: sizes ascending, lexicographic by atom index
    within each size. Instances are immutable after construction.
    """

    def __init__(self, atoms: Sequence[AtomicConstraint], degree: int):
        if degree < 1:
            raise ValueError("degree must be at least 1")
        if degree > len(atoms):
            raise ValueError("degree exceeds the number of atoms")
        self.atoms = tuple(atoms)
        self.degree = degree
        feats: list[tuple[int, ...]] = []
        for k in range(1, degree + 1):
            feats.extend(combinations(range(len(self.atoms)), k))
        if len(feats) > MAX_FEATURES:
            raise ValueError(f"feature space too large: {len(feats)} > {MAX_FEATURES}")
        self.features = tuple(feats)
        # padded index matrix: column n_atoms is a constant-true sentinel
        pad = len(self.atoms)
        idx = np.full((len(feats), degree), pad, dtype=np.int64)
        for row, fs in enumerate(feats):
            idx[row, : len(fs)] = fs
        self._index = idx

    def __len__(self) -> int:
        return len(self.features)

    def atom_truths(self, c: Configuration) -> np.ndarray:
        out = np.empty(len(self.atoms) + 1, dtype=bool)
        for i, a in enumerate(self.atoms):
            out[i] = eval_atomic(a, c)
        out[-1] = True  # sentinel
        return out

    def psi(self, c: Configuration) -> np.ndarray:
        """Dense 0/1 indicator vector in feature order."""
        truths = self.atom_truths(c)
        return truths[self._index].all(axis=1).astype(np.uint8)

    def feature_atoms(self, j: int) -> tuple[AtomicConstraint, ...]:
        return tuple(self.atoms[i] for i in self.features[j])


def enumerate_features(atoms: Sequence[AtomicConstraint], degree: int) -> FeatureSpace:
    return FeatureSpace(atoms, degree)


def psi(c: Configuration, fs: FeatureSpace) -> np.ndarray:
    return fs.psi(c)


def utility(weights: Mapping[int, Fraction], iv: Iterable[int]) -> Fraction:
    """Exact weighted sum of indicator entries for the given sparse weights."""
    vec = iv if isinstance(iv, np.ndarray) else np.asarray(list(iv))
    total = Fraction(0)
    for j, w in weights.items():
        if vec[j]:
            total += w
    return total
