from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cychom.dgalg import BUNDLED, random_algebra
from cychom.fastcheck import check_mixed_complex
from cychom.hochschild import (NORMALIZED, UNNORMALIZED, IndexOutOfRange, NormalizedUnsupported,
                               ParityMismatch, TruncationViolation, apply, compose,
                               enumerate_basis, materialize, op_B, op_b, op_b_delta, op_b_mu,
                               op_delta_i, op_delta_i_conj, op_e_delta, op_e_delta_closed,
                               op_E_delta, op_exp_neg_insertion, op_gamma, op_insertion, op_mu_i,
                               op_mu_i_conj, op_projection, op_tau, op_tau_inv)

FLAVORS = (NORMALIZED, UNNORMALIZED)
KD = BUNDLED["kdual"]()     # 0 = 1, 1 = eps
KODD = BUNDLED["kodd"]()    # 0 = 1, 1 = xi (odd)


def test_enumerate_basis_examples():
    k = BUNDLED["k"]()
    assert enumerate_basis(k, 0, NORMALIZED) == [(0,)]
    assert all(enumerate_basis(k, n, NORMALIZED) == [] for n in (1, 2, 3))
    assert sorted(enumerate_basis(KD, 2, NORMALIZED)) == [(0, 1, 1), (1, 1, 1)]
    assert len(enumerate_basis(KD, 1, UNNORMALIZED)) == 4


def test_basis_counts(bundled):
    for a in bundled.values():
        for n in range(4):
            assert len(enumerate_basis(a, n, UNNORMALIZED)) == a.dim ** (n + 1)
            assert len(enumerate_basis(a, n, NORMALIZED)) == a.dim * (a.dim - 1) ** n


def test_tau_examples():
    tau = op_tau(KD)
    assert tau.image((1,)) == {(1,): 1}
    assert tau.image((0, 1)) == {(1, 0): -1}
    with pytest.raises(NormalizedUnsupported):
        op_tau(KD, NORMALIZED)
    with pytest.raises(NormalizedUnsupported):
        op_tau_inv(KD, NORMALIZED)


def test_tau_is_cyclic(bundled):
    for a in bundled.values():
        tau, tinv = op_tau(a), op_tau_inv(a)
        for n in range(4):
            for key in enumerate_basis(a, n, UNNORMALIZED):
                ch = {key: 1}
                assert apply(tinv, apply(tau, ch)) == ch
                for _ in range(n + 1):
                    ch = apply(tau, ch)
                assert ch == {key: 1}


def test_delta_mu_examples():
    ga = BUNDLED["grassmann_d"]()    # d(xi) = 1
    assert op_delta_i(ga, 0, UNNORMALIZED).image((1, 1)) == {(0, 1): 1}
    assert op_mu_i(KD, 0).image((1,)) == {}
    assert op_mu_i(KD, 0).image((1, 1)) == {}
    with pytest.raises(IndexOutOfRange):
        op_mu_i(KD, 2, strict=True).image((1, 1))
    assert op_delta_i(KD, 3).image((1, 1)) == {}


def test_direct_equals_conjugation(bundled):
    for a in bundled.values():
        for flavor in FLAVORS:
            for n in range(4):
                for i in range(n + 1):
                    dd, dc = op_delta_i(a, i, flavor), op_delta_i_conj(a, i, flavor)
                    md, mc = op_mu_i(a, i, flavor), op_mu_i_conj(a, i, flavor)
                    for key in enumerate_basis(a, n, flavor):
                        assert dd.image(key) == dc.image(key), (a.name, i, key)
                        assert md.image(key) == mc.image(key), (a.name, i, key)


def test_b_examples():
    k = BUNDLED["k"]()
    assert op_b(k, NORMALIZED).image((0,)) == {}
    # unnormalized chains of k form the bar resolution: b alternates 0 and id
    assert op_b(k, UNNORMALIZED).image((0, 0)) == {}
    assert op_b(k, UNNORMALIZED).image((0, 0, 0)) == {(0, 0): 1}
    assert op_b(KD).image((1, 1, 1)) == {}


def test_b_is_sum_of_parts(bundled):
    for a in bundled.values():
        for flavor in FLAVORS:
            b, bd, bm = op_b(a, flavor), op_b_delta(a, flavor), op_b_mu(a, flavor)
            for n in range(4):
                for key in enumerate_basis(a, n, flavor):
                    want = dict(bd.image(key))
                    for k2, c in bm.image(key).items():
                        want[k2] = want.get(k2, 0) + c
                    assert b.image(key) == {k2: c for k2, c in want.items() if c}


def test_B_examples():
    B = op_B(KD, NORMALIZED)
    assert B.image((1,)) == {(0, 1): 1}
    assert B.image((0,)) == {}


@pytest.mark.parametrize("flavor", FLAVORS)
def test_mixed_complex_on_bundled(bundled, flavor):
    for a in bundled.values():
        assert check_mixed_complex(a, 4, flavor, use_kernel=False).ok, a.name


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from(FLAVORS))
def test_mixed_complex_random(seed, flavor):
    assert check_mixed_complex(random_algebra(seed), 4, flavor, use_kernel=False).ok


def test_projection_intertwines_b_and_B(bundled):
    for a in bundled.values():
        p = op_projection(a)
        for un, nm in ((op_b(a, UNNORMALIZED), op_b(a, NORMALIZED)),
                       (op_B(a, UNNORMALIZED), op_B(a, NORMALIZED))):
            for n in range(4):
                for key in enumerate_basis(a, n, UNNORMALIZED):
                    assert apply(p, un.image(key)) == apply(nm, p.image(key)), (a.name, key)


def test_gamma_e_E_examples():
    assert op_gamma(KD).image((1, 1, 1, 1)) == {(1, 1, 1, 1): 3}
    assert op_e_delta(KD).image((1,)) == {}
    assert op_E_delta(KD).image((1,)) == {}
    ga = BUNDLED["grassmann_d"]()
    assert op_E_delta(ga, UNNORMALIZED).image((0,)) == {}


def test_e_delta_closed_form(bundled):
    for a in bundled.values():
        for flavor in FLAVORS:
            e, ec = op_e_delta(a, flavor), op_e_delta_closed(a, flavor)
            for n in range(4):
                for key in enumerate_basis(a, n, flavor):
                    assert e.image(key) == ec.image(key)


def test_insertion_examples():
    ins = op_insertion(KODD, {1: 1}, signed=False)
    assert ins.image((0,)) == {(0, 1): 1}
    assert ins.image((0, 1)) == {(0, 1, 1): 2}
    signed = op_insertion(KD, {1: 1}, signed=True)
    assert signed.image((0, 1)) == {}
    with pytest.raises(ParityMismatch):
        op_insertion(KD, {1: 1}, signed=False)
    with pytest.raises(ParityMismatch):
        op_insertion(KODD, {1: 1}, signed=True)
    for n in range(3):
        for key in enumerate_basis(KODD, n, NORMALIZED):
            assert all(len(k2) == len(key) + 1 for k2 in ins.image(key))


def test_exp_neg_insertion():
    ex = op_exp_neg_insertion(KODD, {1: 1}, N=2)
    assert ex.image((0,)) == {(0,): 1, (0, 1): -1, (0, 1, 1): 1}
    assert ex.image((1, 1, 1)) == {(1, 1, 1): 1}
    zero = op_exp_neg_insertion(KODD, {}, N=3)
    assert zero.image((0, 1)) == {(0, 1): 1}
    half = op_exp_neg_insertion(KODD, {1: Fraction(1, 3)}, N=2)
    assert half.image((0,))[(0, 1, 1)] == Fraction(1, 9)


def _dense(m):
    return [[m.get(r, c) for c in range(m.cols)] for r in range(m.rows)]


def test_materialize_examples():
    m, cols, rows = materialize(op_gamma(KD), KD, [2], NORMALIZED, 5)
    assert _dense(m) == [[2, 0], [0, 2]]
    m, cols, rows = materialize(op_tau(KD), KD, [1], UNNORMALIZED, 5)
    dense = _dense(m)
    assert len(dense) == 4
    assert all(sum(1 for x in row if x != 0) == 1 for row in dense)
    assert all(sum(1 for i in range(4) if dense[i][j] != 0) == 1 for j in range(4))
    for j, key in enumerate(cols):
        (k2, c), = op_tau(KD).image(key).items()
        assert dense[rows.index(k2)][j] == c
    k = BUNDLED["k"]()
    m, _, _ = materialize(op_b(k, NORMALIZED), k, [0, 1, 2], NORMALIZED, 5)
    assert m.is_zero()
    with pytest.raises(TruncationViolation):
        materialize(op_B(KD), KD, [5], NORMALIZED, 5)


def test_compose_order():
    # compose(x, y) applies y first
    tau = op_tau(KD)
    b = op_b(KD, UNNORMALIZED)
    c = compose(b, tau)
    for key in enumerate_basis(KD, 2, UNNORMALIZED):
        assert c.image(key) == apply(b, tau.image(key))
