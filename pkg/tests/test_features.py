import math
import random
from fractions import Fraction

import numpy as np
import pytest

from cleo.core import BoolLit, Configuration, Relation, eval_atomic
from cleo.features import enumerate_features, psi, utility
from conftest import boolean, lin, ordinal


def _bool_atoms(n):
    return [BoolLit(i, True) for i in range(n)]


def test_enumerate_three_atoms_degree_two():
    fs = enumerate_features(_bool_atoms(3), 2)
    assert fs.features == ((0,), (1,), (2,), (0, 1), (0, 2), (1, 2))


def test_enumerate_forty_atoms_degree_three_count():
    fs = enumerate_features(_bool_atoms(40), 3)
    want = math.comb(40, 1) + math.comb(40, 2) + math.comb(40, 3)
    assert len(fs) == want == 10700


def test_enumerate_degree_one():
    fs = enumerate_features(_bool_atoms(5), 1)
    assert len(fs) == 5


def test_enumerate_rejects_bad_degree():
    with pytest.raises(ValueError):
        enumerate_features(_bool_atoms(3), 0)


def test_psi_two_of_three_atoms():
    fs = enumerate_features(_bool_atoms(3), 2)
    c = Configuration((True, True, False))
    assert psi(c, fs).tolist() == [1, 1, 0, 1, 0, 0]


def test_psi_all_atoms_false():
    fs = enumerate_features(_bool_atoms(3), 2)
    c = Configuration((False, False, False))
    assert psi(c, fs).tolist() == [0, 0, 0, 0, 0, 0]


def test_psi_matches_direct_recomputation():
    rng = random.Random(5)
    attrs = (boolean(0, "a"), ordinal(1, "u", 0, 5), ordinal(2, "v", 0, 5))
    atoms = [
        BoolLit(0, True),
        lin({1: 1}, Relation.LE, 2),
        lin({2: 1}, Relation.GT, 3),
        lin({1: 1, 2: 1}, Relation.LE, 6),
    ]
    fs = enumerate_features(atoms, 3)
    for _ in range(50):
        c = Configuration((rng.random() < 0.5, rng.randint(0, 5), rng.randint(0, 5)))
        vec = psi(c, fs)
        for j, idxs in enumerate(fs.features):
            want = all(eval_atomic(atoms[i], c) for i in idxs)
            assert bool(vec[j]) == want


def test_utility_zero_weights():
    fs = enumerate_features(_bool_atoms(3), 2)
    assert utility({}, psi(Configuration((True, True, True)), fs)) == 0


def test_utility_two_term_sum():
    fs = enumerate_features(_bool_atoms(3), 2)
    iv = psi(Configuration((True, True, False)), fs)
    w = {0: Fraction(2), 1: Fraction(-1), 2: Fraction(9)}
    assert utility(w, iv) == 1


def test_utility_matches_soft_constraint_evaluation():
    rng = random.Random(9)
    atoms = [BoolLit(i, True) for i in range(4)]
    fs = enumerate_features(atoms, 2)
    for _ in range(30):
        c = Configuration(tuple(rng.random() < 0.5 for _ in range(4)))
        weights = {
            j: Fraction(rng.randint(-5, 5)) for j in rng.sample(range(len(fs)), 4)
        }
        direct = Fraction(0)
        for j, w in weights.items():
            if all(eval_atomic(atoms[i], c) for i in fs.features[j]):
                direct += w
        assert utility(weights, psi(c, fs)) == direct


def test_supersets_dominated_pointwise():
    rng = random.Random(13)
    atoms = _bool_atoms(5)
    fs = enumerate_features(atoms, 3)
    subset_of = {
        (j, k)
        for j in range(len(fs))
        for k in range(len(fs))
        if set(fs.features[j]) < set(fs.features[k])
    }
    for _ in range(40):
        c = Configuration(tuple(rng.random() < 0.5 for _ in range(5)))
        vec = psi(c, fs)
        for j, k in subset_of:
            assert vec[j] >= vec[k]


def test_enumeration_order_is_stable():
    atoms = _bool_atoms(4)
    a = enumerate_features(atoms, 3).features
    b = enumerate_features(atoms, 3).features
    golden = (
        (0,), (1,), (2,), (3,),
        (0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3),
        (0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3),
    )
    assert a == b == golden


def test_feature_space_size_guard():
    atoms = _bool_atoms(1500)
    with pytest.raises(ValueError):
        enumerate_features(atoms, 2)  # 1500 + C(1500,2) > 1e6
