from fractions import Fraction

import pytest

from cychom.dgalg import validate
from cychom.exactnum import LaurentScalar
from cychom.singularity import (ConstantTerm, EndP, NotQuasiHomogeneous, TwistedComplex,
                                VariableClash, WeightedPoly, build_Af, build_If, build_iota,
                                check_closed_extension, check_wedge_intertwines,
                                closed_extension, decompose, direct_sum, gm_connection_matrix,
                                kronecker_sum, milnor_basis, milnor_forms, ts_diagram_check)


def P(text, weights=None):
    return WeightedPoly.parse(text, weights=weights)


# the corpus of quasi-homogeneous polynomials and their weights
CORPUS = {"x^2": None, "x^3": None, "x^2+y^2": None, "x^3+y^2": [2, 3]}


def _exponent_oracle(f):
    """Twisted connection matrix predicted by the exponents of f.

    For a monomial basis form m dx_1...dx_k of a quasi-homogeneous f of degree
    d, reducing f m dx in the twisted de Rham complex gives
    (wt(m) + sum w) / d * u m dx, so the matrix is diagonal with entries
    ((wt(m) + sum w) / d - k / 2) / u.
    """
    d, w = f.degree(), f.weights
    out = []
    basis = milnor_basis(f)
    for i, m in enumerate(basis):
        row = [LaurentScalar() for _ in basis]
        wt = sum(a * b for a, b in zip(m, w))
        row[i] = LaurentScalar.monomial(Fraction(wt + sum(w), d) - Fraction(f.k, 2), -1)
        out.append(row)
    return out


def test_parse_and_weights():
    f = P("x^3+y^2", [2, 3])
    assert f.degree() == 6 and f.is_quasi_homogeneous() and f.k == 2
    assert not P("x^3+y^2").is_quasi_homogeneous()
    with pytest.raises(ConstantTerm):
        decompose(P("1+x^2"))


def test_decompose_examples():
    assert decompose(P("x^2")) == [{(1,): 1}]
    assert decompose(P("x^2+y^3", [3, 2])) == [{(1, 0): 1}, {(0, 2): 1}]
    assert decompose(P("x*y")) == [{(0, 1): 1}, {}]


def test_direct_sum_clash():
    with pytest.raises(VariableClash):
        direct_sum(P("x^2"), P("x^2"))


def test_Af_dimensions_and_validity():
    A = build_Af(P("x^2"), 2)
    assert A.ring.dim == 3 and A.algebra.dim == 12
    assert validate(A.algebra).ok
    assert not A.D_squared_defect()


def test_supertrace_examples():
    E = EndP(1)
    assert E.supertrace(E.matrices[0]) == 0
    assert E.supertrace(E.matrices[E.unit_index[(0, 0)]]) == 1


def test_milnor_anchors():
    assert milnor_basis(P("x^2")) == [(0,)]
    assert milnor_basis(P("x^3")) == [(0,), (1,)]
    assert milnor_basis(P("x^2+y^2")) == [(0, 0)]


def test_milnor_multiplicative():
    mu = {t: len(milnor_basis(P(t, w))) for t, w in CORPUS.items()}
    assert mu == {"x^2": 1, "x^3": 2, "x^2+y^2": 1, "x^3+y^2": 2}
    assert mu["x^2+y^2"] == mu["x^2"] ** 2
    assert mu["x^3+y^2"] == mu["x^3"] * mu["x^2"]


def test_twisted_cohomology_concentrated_in_top_degree():
    for t, w in CORPUS.items():
        f = P(t, w)
        dims = TwistedComplex(f).homology_dims()
        assert dims[f.k] == len(milnor_basis(f)) and not any(dims[:f.k]), (t, dims)


def test_not_quasi_homogeneous_rejected():
    with pytest.raises(NotQuasiHomogeneous):
        TwistedComplex(P("x^3+y^2"))


def test_gm_matrices():
    f = P("x^2")
    assert gm_connection_matrix(f) == [[LaurentScalar.monomial(Fraction(1, 2), -1)]]
    assert gm_connection_matrix(f, mode="twisted") == [[LaurentScalar()]]
    x3 = gm_connection_matrix(P("x^3"), mode="twisted")
    assert x3 == [[LaurentScalar.monomial(Fraction(-1, 6), -1), LaurentScalar()],
                  [LaurentScalar(), LaurentScalar.monomial(Fraction(1, 6), -1)]]
    with pytest.raises(ValueError):
        gm_connection_matrix(f, mode="other")


@pytest.mark.parametrize("text", sorted(CORPUS))
def test_twisted_matrix_matches_exponent_oracle(text):
    f = P(text, CORPUS[text])
    assert gm_connection_matrix(f, mode="twisted") == _exponent_oracle(f)


def test_kronecker_sum_matches_direct_sum():
    f, g = P("x^3"), P("y^2")
    fg = direct_sum(f, g, rescale=True)
    mf, mg = milnor_forms(f), milnor_forms(g)
    from cychom.singularity import wedge_map
    basis = [wedge_map(a, b, f.variables, g.variables) for a in mf for b in mg]
    for mode in ("GM", "twisted"):
        assert kronecker_sum(gm_connection_matrix(f, mf, mode),
                             gm_connection_matrix(g, mg, mode)) == \
            gm_connection_matrix(fg, basis, mode)


def test_iota_is_algebra_map():
    Af, Ag = build_Af(P("x^2"), 2), build_Af(P("y^2"), 2)
    rep = build_iota(Af, Ag).check()
    assert rep["ok"] and rep["pairs"] == 144 * 144
    with pytest.raises(VariableClash):
        build_iota(Af, build_Af(P("x^2"), 2))


def test_trace_map():
    A = build_Af(P("x^2"), 2)
    I = build_If(A, 2, 2)
    e = A.idempotent_index(0)
    # frozen from the slow evaluator: exp(-b(D)) terms die under str or eps
    assert I({(e,): 1}) == I.slow({(e,): 1}) == {((0,), ()): 1}
    assert I.check_chain_map(3)["ok"]


def test_trace_map_stages():
    A = build_Af(P("x^2"), 2)
    assert build_If(A, 2, 3).check_stages(3)["ok"]


def test_wedge_intertwines():
    assert check_wedge_intertwines(P("x^2"), P("y^2"), 4)["ok"]
    assert check_wedge_intertwines(P("x^3"), P("y^2"), 6)["ok"]


@pytest.mark.parametrize("text,mono", [("x^2", (0,)), ("x^3", (0,)), ("x^3", (1,))])
def test_closed_extensions(text, mono):
    ext = closed_extension(P(text), mono, 3)
    assert check_closed_extension(ext, 3)["ok"]


@pytest.mark.slow
def test_thom_sebastiani_squares():
    rep = ts_diagram_check(P("x^2"), P("y^2"))
    assert rep.passed, [s for s in rep.steps if not s["passed"]]
    assert len(rep.steps) == 6
