import pytest
from hypothesis import given, settings, strategies as st

from cychom.dgalg import BUNDLED, random_algebra
from cychom.hochschild import NORMALIZED, UNNORMALIZED
from cychom.kunneth import (IDENTITIES, SIGN_RULES, Kunneth, bi_basis, mutated_sign_rule,
                            verify_identity)

KD, KODD, K = BUNDLED["kdual"](), BUNDLED["kodd"](), BUNDLED["k"]()
# tensor indices i * dim2 + j; for (kodd, kdual): 1 = 1(x)eps, 2 = xi(x)1, 3 = xi(x)eps


def test_sh_examples():
    Kn = Kunneth(KODD, KD, NORMALIZED)
    assert Kn.sh().image(((1,), (1,))) == {(3,): 1}
    assert Kn.sh().image(((0, 1), (1,))) == {(1, 2): 1}
    assert Kn.sh().image(((0, 1), (0, 1))) == {(0, 1, 2): 1, (0, 2, 1): 1}
    # second factor odd: the prefactor |a''_0| |Pi a'_1| and the transposition sign
    Kr = Kunneth(KD, KODD, NORMALIZED)
    assert Kr.sh().image(((0, 1), (1,))) == {(1, 2): -1}
    assert Kr.sh().image(((0, 1), (0, 1))) == {(0, 1, 2): 1, (0, 2, 1): 1}


def test_Sh_examples():
    Kn = Kunneth(KODD, KD, NORMALIZED)
    assert Kn.Sh().image(((1,), (1,))) == {(0, 2, 1): -1}
    for flavor in (NORMALIZED, UNNORMALIZED):
        Kf = Kunneth(KODD, KD, flavor)
        for total in range(3):
            for bk in bi_basis(KODD, KD, total, flavor):
                for key in Kf.Sh().image(bk):
                    assert key[0] == Kf.unit and len(key) - 1 == total + 2


def test_H_examples():
    Kn = Kunneth(BUNDLED["grassmann_d"](), KD, NORMALIZED)
    assert Kn.H().image(((0,), (1,))) == {}
    assert Kn.H().image(((1,), (0,))) == {}


@pytest.mark.parametrize("name", sorted(IDENTITIES))
def test_identities_on_dual_numbers(name):
    r = verify_identity(name, KD, KD)
    assert r.passed and not r.witnesses, r.to_json()


@pytest.mark.parametrize("pair", [("k", "k"), ("k", "kdual"), ("clifford", "kdual"),
                                  ("A4", "kdual"), ("kdual", "clifford_d")])
def test_identities_on_pairs(pair):
    a1, a2 = (BUNDLED[n]() for n in pair)
    for name in IDENTITIES:
        assert verify_identity(name, a1, a2).passed, (pair, name)


def test_identity_iii_reports_sub_identities():
    r = verify_identity("iii", KD, KODD)
    assert r.passed and len(r.sub_results) >= 2


def test_identity_i_example_max_degree():
    r = verify_identity("i", KD, KD, max_degree=4)
    assert r.passed and r.max_degree_checked == 4 and not r.witnesses


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6), st.sampled_from(["i", "ii", "viii", "xv"]))
def test_main_identities_random_pairs(s1, s2, name):
    a1, a2 = random_algebra(s1), random_algebra(s2)
    assert verify_identity(name, a1, a2, max_degree=3, seed=s1).passed


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6), st.sampled_from(["ix", "x", "xii", "xiv"]))
def test_appendix_identities_random_pairs(s1, s2, name):
    a1, a2 = random_algebra(s1, max_dim=2), random_algebra(s2, max_dim=2)
    assert verify_identity(name, a1, a2, max_degree=2).passed


@pytest.mark.parametrize("mutation,identity", [("koszul_shift", "i"), ("star", "i"),
                                               ("star_star", "ii")])
def test_mutations_are_detected(mutation, identity):
    a1, a2 = BUNDLED["A4"](), KODD
    assert verify_identity(identity, a1, a2).passed
    with mutated_sign_rule(mutation):
        r = verify_identity(identity, a1, a2)
    assert not r.passed and r.witnesses
    assert {"sub", "input", "term", "coefficient"} <= set(r.witnesses[0])
    assert SIGN_RULES == {"koszul_shift": 1, "star": 1, "star_star": 1}


def test_unknown_mutation():
    with pytest.raises(KeyError):
        with mutated_sign_rule("nope"):
            pass


def test_report_json_shape():
    js = verify_identity("i", KD, KODD, seed=7).to_json()
    assert js["identity"] == "i" and js["algebras"] == ["kdual", "kodd"] and js["seed"] == 7
    assert js["flavor"] == NORMALIZED and js["N"] == 5
