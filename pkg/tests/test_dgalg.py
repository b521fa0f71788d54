import json

import pytest
from hypothesis import given, settings, strategies as st

from cychom.dgalg import (BUNDLED, DgAlgebra, InvalidAlgebra, algebra_from_json, algebra_to_json,
                          bundled_algebra, random_algebra, tensor_product, validate)


def test_bundled_algebras_validate(bundled):
    for a in bundled.values():
        assert validate(a).ok, a.name


def test_bundled_files_match_constructors():
    for name, make in BUNDLED.items():
        assert bundled_algebra(name).content_hash() == make().content_hash()


def test_corrupted_leibniz_is_flagged_with_witness():
    a = BUNDLED["A4"]()
    data = algebra_to_json(a)
    # d(eps*xi) = eps respects parity and d^2 = 0 but breaks the Leibniz rule
    data["diff"].append([3, 1, "1"])
    bad = algebra_from_json(data, check=False)
    rep = validate(bad)
    assert rep.failed_axioms() == {"leibniz"}
    assert all(f["witness"] for f in rep.failures)


def test_validation_flags_each_axiom():
    no_unit = DgAlgebra("nu", [0, 0], 0, [(0, 0, 0, 1), (0, 1, 1, 1)], [])
    assert "unit" in validate(no_unit).failed_axioms()
    bad_parity = DgAlgebra("bp", [0, 1], 0, [(0, 0, 0, 1), (0, 1, 1, 1), (1, 0, 1, 1)],
                           [(0, 1, 1)])
    assert {"d-unit", "leibniz"} <= validate(bad_parity).failed_axioms()
    d_sq = DgAlgebra("dsq", [0, 1, 0], 0, [(0, i, i, 1) for i in range(3)] +
                     [(i, 0, i, 1) for i in (1, 2)], [(1, 2, 1), (2, 1, 1)])
    assert "d-squared" in validate(d_sq).failed_axioms()


def test_tensor_with_ground_field_is_neutral(bundled):
    k = bundled["k"]
    for a in bundled.values():
        t = tensor_product(k, a)
        assert t.parity == a.parity and t.mul == a.mul and t.diff == a.diff


def test_tensor_dual_numbers():
    kd = BUNDLED["kdual"]()
    t = tensor_product(kd, kd)
    # index i*2 + j: eps (x) 1 = 2, 1 (x) eps = 1, eps (x) eps = 3
    assert t.multiply({2: 1}, {1: 1}) == {3: 1}
    assert t.multiply({1: 1}, {2: 1}) == {3: 1}


def test_tensor_clifford_koszul_sign():
    c = BUNDLED["clifford"]()
    t = tensor_product(c, c)
    assert t.multiply({2: 1}, {1: 1}) == {3: 1}
    assert t.multiply({1: 1}, {2: 1}) == {3: -1}


def test_loader_refuses_invalid_and_reports():
    data = algebra_to_json(BUNDLED["grassmann_d"]())
    data["diff"] = [[1, 0, "2"], [0, 1, "1"]]
    with pytest.raises(InvalidAlgebra) as exc:
        algebra_from_json(data)
    assert exc.value.report.failures


def test_loader_rejects_zero_denominator():
    data = algebra_to_json(BUNDLED["kdual"]())
    data["mult"][0][3] = "1/0"
    with pytest.raises(ValueError):
        algebra_from_json(json.loads(json.dumps(data)))


def test_json_round_trip(bundled):
    for a in bundled.values():
        b = algebra_from_json(json.loads(json.dumps(algebra_to_json(a))))
        assert b.content_hash() == a.content_hash()


def test_reduced_basis(bundled):
    for a in bundled.values():
        assert a.unit not in a.reduced and len(a.reduced) == a.dim - 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_random_algebras_validate(seed):
    a = random_algebra(seed)
    assert a.dim <= 3 and validate(a).ok


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6))
def test_tensor_product_validates(s1, s2):
    assert validate(tensor_product(random_algebra(s1), random_algebra(s2))).ok


def test_tensor_associative_up_to_relabeling(bundled):
    names = ["kdual", "kodd", "clifford_d"]
    for x in names:
        for y in names:
            for z in names:
                a, b, c = bundled[x], bundled[y], bundled[z]
                left = tensor_product(tensor_product(a, b), c)
                right = tensor_product(a, tensor_product(b, c))
                # (i*mb + j)*mc + l == i*(mb*mc) + j*mc + l: identical indexing
                assert left.mul == right.mul and left.diff == right.diff
                assert left.parity == right.parity
