from fractions import Fraction

import pytest

from cychom.dgalg import BUNDLED
from cychom.hochschild import NORMALIZED, UNNORMALIZED
from cychom.kunneth import Kunneth, bi_basis, cyclic_terms, shuffle_patterns
from cychom.oracle import (OracleAlgebra, OraclePair, compare_elementary, compare_shuffles,
                           elementary_cases, shuffle_cases)


def test_elementary_operators_agree_with_oracle():
    res = compare_elementary(rounds=40, seed=3)
    assert set(res) == {name for name, _ in elementary_cases()}
    for name, r in res.items():
        assert r["checked"] == 40 and not r["mismatches"], (name, r["mismatches"])


def test_shuffle_generators_agree_with_oracle():
    res = compare_shuffles(rounds=30, seed=5)
    assert set(res) == {name for name, _ in shuffle_cases()}
    for name, r in res.items():
        assert r["checked"] == 30 and not r["mismatches"], (name, r["mismatches"])


def test_shuffle_pattern_counts():
    from math import comb
    for n in range(5):
        for m in range(5):
            pats = shuffle_patterns(n, m)
            assert len(pats) == comb(n + m, n) == len(set(pats))


@pytest.mark.parametrize("names", [("kdual", "kodd"), ("clifford_d", "kdual"),
                                   ("kodd", "grassmann_d")])
@pytest.mark.parametrize("flavor", (NORMALIZED, UNNORMALIZED))
def test_cyclic_shuffles_term_for_term(names, flavor):
    # generator against the permutation filter, every bi-key of total degree <= 4
    a1, a2 = (BUNDLED[n]() for n in names)
    K = Kunneth(a1, a2, flavor)
    P = OraclePair(OracleAlgebra(a1), OracleAlgebra(a2))
    Sh = K.Sh()
    for total in range(3 if flavor == UNNORMALIZED else 5):
        for k1, k2 in bi_basis(a1, a2, total, flavor):
            l1 = tuple(P.a1.labels[x] for x in k1)
            l2 = tuple(P.a2.labels[x] for x in k2)
            ref = P.Sh(l1, l2)
            if flavor == NORMALIZED:
                ref = {k: c for k, c in ref.items() if P.one not in k[1:]}
            want = P.to_indices(ref, a2.dim, P.a1.index, P.a2.index)
            got = {k: Fraction(c) for k, c in Sh.image((k1, k2)).items()}
            assert got == want, (k1, k2)


def test_cyclic_term_count_small():
    # bidegree (1, 1): two entries per list
    assert len(cyclic_terms(2, 2)) == 12
    assert len(cyclic_terms(1, 1)) == 1
