import pytest

from cychom.hochschild import NORMALIZED, UNNORMALIZED
from cychom.homology import ComplexTooLarge, TruncatedCyclicComplex, compute_homology


def test_hochschild_of_ground_field(bundled):
    r = compute_homology(bundled["k"], "hochschild", 4)
    assert (r.even, r.odd) == (1, 0)
    assert [d["dim"] for d in r.per_degree] == [1, 0, 0, 0, 0]


def test_hochschild_of_dual_numbers_per_degree(bundled):
    # HH_0 = A for commutative A; every higher degree is one dimensional
    r = compute_homology(bundled["kdual"], "hochschild", 4)
    assert [d["dim"] for d in r.per_degree] == [2, 1, 1, 1, 1]
    assert [d["windowed"] for d in r.per_degree] == [False] * 4 + [True]


@pytest.mark.parametrize("name", ["grassmann_d", "clifford_d"])
def test_hochschild_of_acyclic_algebras_vanishes(bundled, name):
    for flavor in (NORMALIZED, UNNORMALIZED):
        r = compute_homology(bundled[name], "hochschild", 3, flavor=flavor)
        assert (r.even, r.odd) == (0, 0)


@pytest.mark.parametrize("name", ["k", "kdual", "kodd", "grassmann_d", "A4"])
@pytest.mark.parametrize("cyclic", [True, False])
def test_truncated_complexes_square_to_zero(bundled, name, cyclic):
    C = TruncatedCyclicComplex(bundled[name], 3, cyclic=cyclic)
    assert C.matrices(False).check()
    if cyclic:
        assert C.matrices(True).check()


def test_plain_truncation_refuses_b_plus_uB(bundled):
    C = TruncatedCyclicComplex(bundled["kdual"], 2, cyclic=False)
    with pytest.raises(ValueError):
        C.matrices(True)


def test_windowed_periodic_and_negative_values(bundled):
    # frozen regression values of the windowed computation at N = 3
    expected = {"k": ((1, 0), {"even": [], "odd": []}),
                "kdual": ((1, 1), {"even": [], "odd": [1, 1]}),
                "kodd": ((1, 0), {"even": [1, 1, 1], "odd": []})}
    for name, (dims, torsion) in expected.items():
        p = compute_homology(bundled[name], "periodic", 3)
        n = compute_homology(bundled[name], "negative", 3, 3)
        assert (p.even, p.odd) == dims
        assert (n.even, n.odd) == dims
        assert n.structure["torsion"] == torsion
        assert "windowed" in p.caveat


def test_complex_too_large(bundled):
    with pytest.raises(ComplexTooLarge):
        compute_homology(bundled["A4"], "periodic", 5, max_dim=100)


def test_unknown_mode(bundled):
    with pytest.raises(ValueError):
        compute_homology(bundled["k"], "cyclic", 2)
