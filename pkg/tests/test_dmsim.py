import math
import random
from fractions import Fraction

import pytest

from cleo.core import BoolLit, Configuration, Kind, LinearPredicate, Problem, validate
from cleo.dmsim import (
    GenerationError,
    TrueUtility,
    gen_housing,
    gen_maxsat,
    gen_scheduling,
    housing_price,
    noisy_compare,
    noisy_rank,
    prob_prefer,
    skeleton_from_json,
    skeleton_to_json,
    truth_from_json,
    truth_to_json,
)
from cleo.elicit import sample_feasible
from cleo.core import SoftConstraint


def _phi_by_series(z: float) -> float:
    """Standard normal CDF by Taylor series around 0 (independent of erf)."""
    total = 0.0
    term = z
    n = 0
    while abs(term) > 1e-12 and n < 200:
        total += term
        n += 1
        term = term * (-1) * z * z * (2 * n - 1) / (2 * n * (2 * n + 1))
    return 0.5 + total / math.sqrt(2 * math.pi)


def test_prob_prefer_equal_utilities():
    assert prob_prefer(3.0, 3.0, 10.0) == 0.5


def test_prob_prefer_matches_series_cdf():
    sigma2 = 10.0
    gap = math.sqrt(2 * sigma2)  # f_i - f_j = sqrt(2)*sigma -> Phi(1)
    got = prob_prefer(gap, 0.0, sigma2)
    want = _phi_by_series(1.0)
    assert abs(want - 0.841345) < 5e-7  # sanity on the oracle itself
    assert abs(got - want) < 1e-7


def test_prob_prefer_complement_identity():
    rng = random.Random(3)
    for _ in range(50):
        a, b = rng.uniform(-50, 50), rng.uniform(-50, 50)
        assert abs(prob_prefer(a, b, 10.0) + prob_prefer(b, a, 10.0) - 1.0) < 1e-12


def test_prob_prefer_zero_variance_step():
    assert prob_prefer(2.0, 1.0, 0.0) == 1.0
    assert prob_prefer(1.0, 2.0, 0.0) == 0.0
    assert prob_prefer(2.0, 2.0, 0.0) == 0.5


def _two_point_utility(gap: int):
    # single boolean attribute; satisfied -> utility gap, violated -> 0
    truth = TrueUtility((SoftConstraint.of([BoolLit(0, True)], gap),))
    hi = Configuration((True,))
    lo = Configuration((False,))
    return truth, hi, lo


def test_noisy_compare_deterministic_without_noise():
    truth, hi, lo = _two_point_utility(5)
    rng = random.Random(0)
    assert all(noisy_compare(hi, lo, truth, 0.0, rng) for _ in range(20))


@pytest.mark.parametrize("gap", [0, 1, 5, 10])
def test_noisy_compare_rate_matches_closed_form(gap):
    truth, hi, lo = _two_point_utility(gap) if gap else _two_point_utility(1)
    a, b = (hi, lo) if gap else (hi, hi)
    rng = random.Random(17 + gap)
    n = 20000
    hits = sum(noisy_compare(a, b, truth, 10.0, rng) for _ in range(n))
    p = prob_prefer(float(truth.value(a)), float(truth.value(b)), 10.0)
    sd = math.sqrt(p * (1 - p) / n)
    assert abs(hits / n - p) <= 3 * sd


def test_noisy_rank_exact_order_without_noise():
    truth, hi, lo = _two_point_utility(5)
    rng = random.Random(1)
    assert noisy_rank([lo, hi], truth, 0.0, rng) == [hi, lo]


def test_noisy_rank_symmetric_for_equal_utilities():
    truth, hi, _ = _two_point_utility(5)
    rng = random.Random(9)
    first = 0
    n = 10000
    for _ in range(n):
        order = noisy_rank([hi, Configuration((True,))], truth, 10.0, rng)
        first += order[0] is hi
    sd = math.sqrt(0.25 / n)
    assert abs(first / n - 0.5) <= 3 * sd


def test_noisy_rank_three_way_rate_matches_pairwise_bound():
    # large gaps vs noise: correct full order at least as often as the
    # product of the two adjacent pairwise probabilities suggests
    atoms = [BoolLit(0, True), BoolLit(1, True)]
    truth = TrueUtility(
        (SoftConstraint.of([atoms[0]], 30), SoftConstraint.of([atoms[1]], 15))
    )
    c_hi = Configuration((True, True))
    c_mid = Configuration((True, False))
    c_lo = Configuration((False, False))
    rng = random.Random(4)
    n = 4000
    correct = 0
    for _ in range(n):
        if noisy_rank([c_lo, c_mid, c_hi], truth, 10.0, rng) == [c_hi, c_mid, c_lo]:
            correct += 1
    p_pair = prob_prefer(45.0, 30.0, 10.0) * prob_prefer(30.0, 0.0, 10.0) * prob_prefer(45.0, 0.0, 10.0)
    sd = math.sqrt(p_pair * (1 - p_pair) / n)
    assert correct / n >= p_pair - 3 * sd


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def test_scheduling_atom_count_and_shape():
    rng = random.Random(2)
    sk, truth = gen_scheduling(5, 3, rng)
    assert len(sk.atoms) == 40
    assert len(sk.attributes) == 5
    assert all(a.kind == Kind.ORDINAL for a in sk.attributes)
    assert len(truth.soft) == 3


def test_scheduling_weights_and_sizes():
    rng = random.Random(8)
    for _ in range(20):
        _, truth = gen_scheduling(10, 6, rng)
        sizes = [len(s.atoms) for s in truth.soft]
        assert sum(1 for s in sizes if s == 3) >= 2
        assert all(1 <= int(s.weight) <= 100 for s in truth.soft)
        assert len(truth.decisional_atoms()) == 10


def test_scheduling_deterministic_per_seed():
    a = gen_scheduling(5, 3, random.Random(123))
    b = gen_scheduling(5, 3, random.Random(123))
    assert a[0].atoms == b[0].atoms and a[1] == b[1]


def test_housing_attribute_table():
    rng = random.Random(3)
    sk, truth = gen_housing(5, 3, rng)
    kinds = [a.kind for a in sk.attributes]
    assert len(sk.attributes) == 15
    assert kinds[0] == Kind.ORDINAL
    assert all(k == Kind.BOOLEAN for k in kinds[1:6])
    assert all(k == Kind.REAL for k in kinds[6:15])
    assert len(sk.hard) == 10
    assert len(sk.atoms) == 40


def test_housing_soft_sizes():
    rng = random.Random(5)
    for _ in range(10):
        _, truth = gen_housing(10, 6, rng)
        sizes = [len(s.atoms) for s in truth.soft]
        assert all(s in (2, 3) for s in sizes)
        assert any(s == 3 for s in sizes)
        assert len(truth.decisional_atoms()) == 10


def test_housing_price_is_derived_and_feasible_samples():
    rng = random.Random(11)
    sk, _ = gen_housing(5, 3, rng)
    problem = sk.problem()
    for _ in range(50):
        c = sample_feasible(sk, rng)
        assert validate(problem, c).ok
        assert c[14] == housing_price(list(c.values))


def test_housing_row3_violation_detected():
    rng = random.Random(13)
    sk, _ = gen_housing(5, 3, rng)
    c = sample_feasible(sk, rng)
    vals = list(c.values)
    vals[1] = vals[2] = vals[3] = True  # garden, garage, commercial together
    vals[0] = 5  # keep the garden/house-type rule satisfied
    from cleo.dmsim import housing_price as hp

    vals[14] = hp(vals)
    rep = validate(sk.problem(), Configuration(tuple(vals)))
    assert not rep.ok


def test_maxsat_weights_nonzero_in_range():
    rng = random.Random(19)
    for _ in range(30):
        sk, truth = gen_maxsat(10, 6, rng)
        for s in truth.soft:
            w = int(s.weight)
            assert w != 0 and -100 <= w <= 100
        assert len(truth.decisional_atoms()) == 10


def test_maxsat_five_attribute_space_is_32():
    rng = random.Random(23)
    sk, _ = gen_maxsat(5, 3, rng)
    assert len(sk.attributes) == 5
    assert 2 ** len(sk.attributes) == 32


def test_generation_error_on_impossible_shape():
    with pytest.raises(GenerationError):
        gen_maxsat(2, 9, random.Random(1))  # nine distinct subsets of two atoms


def test_generators_deterministic_and_exact_on_many_seeds():
    # 1000 seeds spread over the three generators
    for seed in range(400):
        for gen, nf, ns in ((gen_scheduling, 5, 3), (gen_maxsat, 10, 6)):
            sk, truth = gen(nf, ns, random.Random(seed))
            again = gen(nf, ns, random.Random(seed))[1]
            assert truth == again
            assert len(truth.soft) == ns
            assert len(truth.decisional_atoms()) == nf
    for seed in range(200):
        sk, truth = gen_housing(10, 6, random.Random(seed))
        assert len(truth.soft) == 6
        assert len(truth.decisional_atoms()) == 10
        sizes = [len(s.atoms) for s in truth.soft]
        assert all(sz in (2, 3) for sz in sizes) and any(sz == 3 for sz in sizes)


def test_truth_and_skeleton_serialization_roundtrip():
    rng = random.Random(29)
    sk, truth = gen_maxsat(5, 3, rng)
    doc = skeleton_to_json(sk)
    sk2 = skeleton_from_json(doc)
    assert sk2.atoms == sk.atoms and sk2.attributes == sk.attributes
    assert truth_from_json(truth_to_json(truth)) == truth
