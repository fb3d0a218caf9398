import random
from fractions import Fraction

import pytest

from cleo.scsp import (
    ExportError,
    Scsp,
    ScspConstraint,
    ScspError,
    ScspVariable,
    check_equivalence,
    decode,
    encode,
    export_wdimacs,
    scsp_from_json,
    term_sum,
    weighted_sat_to_json,
)

# worked binary-constraint example: two variables on {1,2,3}, preference for
# assignments with v1 < v2
PAIR_TABLE = {
    (1, 1): 10, (1, 2): 40, (1, 3): 50,
    (2, 1): 5, (2, 2): 10, (2, 3): 30,
    (3, 1): 5, (3, 2): 5, (3, 3): 10,
}


def pair_instance(mode="sum"):
    table = tuple((t, Fraction(v)) for t, v in PAIR_TABLE.items())
    return Scsp(
        (ScspVariable("v1", (1, 2, 3)), ScspVariable("v2", (1, 2, 3))),
        (ScspConstraint((0, 1), table),),
        mode,
    )


def test_encode_pair_example_terms():
    enc = encode(pair_instance())
    assert len(enc.terms) == 9
    by_conj = {t.conjuncts[0]: t.weight for t in enc.terms}
    key = (enc.selector_of(0, 1), enc.selector_of(1, 3))
    assert by_conj[key] == 50
    for (v1, v2), want in PAIR_TABLE.items():
        assert by_conj[(enc.selector_of(0, v1), enc.selector_of(1, v2))] == want


def test_encode_clause_counts():
    enc = encode(Scsp((ScspVariable("v", (1, 2, 3)),), ()))
    alo = [c for c in enc.hard_clauses if all(l > 0 for l in c)]
    amo = [c for c in enc.hard_clauses if all(l < 0 for l in c)]
    assert len(alo) == 1 and len(amo) == 3


def test_encode_merge_equal_weights():
    enc = encode(pair_instance(), merge_equal_weights=True)
    ten = [t for t in enc.terms if t.weight == 10]
    assert len(ten) == 1
    want = {
        (enc.selector_of(0, 1), enc.selector_of(1, 1)),
        (enc.selector_of(0, 2), enc.selector_of(1, 2)),
        (enc.selector_of(0, 3), enc.selector_of(1, 3)),
    }
    assert set(ten[0].conjuncts) == want
    # distinct weights in the table: 5, 10, 30, 40, 50
    assert len(enc.terms) == 5


def test_encode_rejects_min_mode():
    with pytest.raises(ScspError):
        encode(pair_instance(mode="min"))


def test_encode_rejects_empty_domain():
    with pytest.raises(ScspError):
        Scsp((ScspVariable("v", ()),), ())


def test_decode_unique_selector():
    s = Scsp((ScspVariable("v", (1, 2, 3)),), ())
    enc = encode(s)
    model = [False] * (enc.num_vars + 1)
    model[enc.selector_of(0, 2)] = True
    assert decode(model, s, enc) == [2]


def test_decode_rejects_none_or_two_selected():
    s = Scsp((ScspVariable("v", (1, 2, 3)),), ())
    enc = encode(s)
    empty = [False] * (enc.num_vars + 1)
    with pytest.raises(ScspError):
        decode(empty, s, enc)
    double = list(empty)
    double[enc.selector_of(0, 1)] = True
    double[enc.selector_of(0, 3)] = True
    with pytest.raises(ScspError):
        decode(double, s, enc)


def test_equivalence_pair_example():
    rep = check_equivalence(pair_instance())
    assert rep.equivalent
    assert rep.scsp_optimum == 50
    assert rep.scsp_optimizers == ((1, 3),)


def test_equivalence_single_tuple_constraint():
    s = Scsp(
        (ScspVariable("v", (0,)),),
        (ScspConstraint((0,), (((0,), Fraction(7)),)),),
    )
    rep = check_equivalence(s)
    assert rep.equivalent and rep.scsp_optimum == 7


def _random_scsp(rng):
    n = rng.randint(1, 3)
    variables = tuple(
        ScspVariable(f"v{i}", tuple(range(1, rng.randint(2, 4) + 1))) for i in range(n)
    )
    constraints = []
    for _ in range(rng.randint(1, 3)):
        k = rng.randint(1, min(2, n))
        scope = tuple(sorted(rng.sample(range(n), k)))
        import itertools

        table = tuple(
            (tup, Fraction(rng.randint(0, 50)))
            for tup in itertools.product(*[variables[i].domain for i in scope])
        )
        constraints.append(ScspConstraint(scope, table))
    return Scsp(variables, tuple(constraints))


def test_equivalence_random_instances():
    rng = random.Random(77)
    for trial in range(40):
        s = _random_scsp(rng)
        merge = rng.random() < 0.5
        rep = check_equivalence(s, merge_equal_weights=merge)
        assert rep.equivalent, f"trial {trial}: {rep.detail}"


def test_term_sum_matches_source_value_per_model():
    import itertools

    rng = random.Random(5)
    for _ in range(10):
        s = _random_scsp(rng)
        enc = encode(s)
        for bits in itertools.product([False, True], repeat=enc.num_vars):
            model = (False,) + bits
            if not all(
                any(model[l] if l > 0 else not model[-l] for l in cl)
                for cl in enc.hard_clauses
            ):
                continue
            assignment = decode(model, s, enc)
            assert term_sum(enc, model) == s.value_of(assignment)


def test_json_roundtrip_and_export():
    doc = {
        "variables": [{"name": "v1", "domain": [1, 2]}, {"name": "v2", "domain": [1, 2]}],
        "mode": "sum",
        "constraints": [
            {
                "scope": [0],
                "table": [{"tuple": [1], "value": "3"}, {"tuple": [2], "value": "8"}],
            }
        ],
    }
    s = scsp_from_json(doc)
    enc = encode(s)
    out = weighted_sat_to_json(enc)
    assert out["num_vars"] == 4
    assert len(out["terms"]) == 2
    text = export_wdimacs(enc)  # unary-scope terms are clause-shaped
    assert text.startswith("p wcnf 4")
    assert text.endswith("\n")


def test_export_rejects_conjunction_terms():
    enc = encode(pair_instance())
    with pytest.raises(ExportError):
        export_wdimacs(enc)
