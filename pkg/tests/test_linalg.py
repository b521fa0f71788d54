import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cychom.exactnum import LaurentScalar, WindowOverflow
from cychom.linalg import (FiniteComplex, NoSolution, NonConstantEntry, SparseMatrix,
                           homology_dims, homology_over_truncated_series, rank_over_Q,
                           rank_over_function_field, solve_linear)

u = LaurentScalar.monomial(1, 1)
uinv = LaurentScalar.monomial(1, -1)


def M(rows):
    return SparseMatrix.from_dense(rows)


def test_rank_over_Q_examples():
    assert rank_over_Q(M([[1, 0], [0, 1]])) == 2
    assert rank_over_Q(SparseMatrix.zero(3, 4)) == 0
    assert rank_over_Q(M([[1, 2], [2, 4]])) == 1
    with pytest.raises(NonConstantEntry):
        rank_over_Q(M([[u]]))


def test_rank_over_function_field_examples():
    assert rank_over_function_field(M([[u]])) == 1
    assert rank_over_function_field(M([[u, u * u], [1, u]])) == 1
    assert rank_over_function_field(M([[u, 0], [0, uinv]])) == 2


def test_solve_examples():
    assert solve_linear(M([[2]]), [4]) == [LaurentScalar.const(2)]
    assert solve_linear(M([[u]]), [1]) == [uinv]
    x = solve_linear(M([[1, 1]]), [3])
    assert x[0] + x[1] == LaurentScalar.const(3)
    with pytest.raises(NoSolution):
        solve_linear(M([[1], [1]]), [1, 2])


def test_solve_window_overflow():
    with pytest.raises(WindowOverflow):
        solve_linear(M([[LaurentScalar.monomial(1, 3)]]), [1], window=(-2, 2))


def test_homology_examples():
    c = FiniteComplex(2, 3, SparseMatrix.zero(3, 2), SparseMatrix.zero(2, 3))
    assert homology_dims(c) == (2, 3)
    c = FiniteComplex(1, 1, M([[1]]), SparseMatrix.zero(1, 1))
    assert homology_dims(c) == (0, 0)


def test_truncated_series_examples():
    c = FiniteComplex(1, 0, SparseMatrix.zero(0, 1), SparseMatrix.zero(1, 0))
    th = homology_over_truncated_series(c, 5)
    assert th.freeRank == (1, 0) and th.torsion == ([], [])
    c = FiniteComplex(1, 1, M([[u]]), SparseMatrix.zero(1, 1))
    th = homology_over_truncated_series(c, 3)
    assert th.freeRank == (0, 0)
    assert th.torsion[1] == [1]


def _random_int_matrix(rng, r, c, density=0.5):
    return [[rng.randint(-3, 3) if rng.random() < density else 0 for _ in range(c)]
            for _ in range(r)]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_rank_Q_agrees_with_function_field_on_constant(seed):
    rng = random.Random(seed)
    rows = _random_int_matrix(rng, rng.randint(1, 5), rng.randint(1, 5))
    m = M(rows)
    assert rank_over_Q(m) == rank_over_function_field(m)


def _sympy_rank(rows):
    import sympy
    return sympy.Matrix(rows).rank()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_rank_Q_matches_independent_rank(seed):
    rng = random.Random(seed)
    rows = _random_int_matrix(rng, rng.randint(1, 6), rng.randint(1, 6))
    assert rank_over_Q(M(rows)) == _sympy_rank(rows)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_rank_function_field_matches_independent_rank(seed):
    import sympy
    rng = random.Random(seed)
    r, c = rng.randint(1, 4), rng.randint(1, 4)
    uu = sympy.Symbol("u")
    ents, sym = {}, []
    for i in range(r):
        row = []
        for j in range(c):
            coeffs = {e: rng.randint(-2, 2) for e in range(-1, 2) if rng.random() < 0.4}
            ents[(i, j)] = LaurentScalar(coeffs)
            row.append(sum(v * uu ** e for e, v in coeffs.items()))
        sym.append(row)
    assert rank_over_function_field(SparseMatrix(r, c, ents)) == sympy.Matrix(sym).rank(
        simplify=True)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_solutions_resubstitute(seed):
    rng = random.Random(seed)
    r, c = rng.randint(1, 4), rng.randint(1, 4)
    ents = {}
    for i in range(r):
        for j in range(c):
            if rng.random() < 0.6:
                ents[(i, j)] = LaurentScalar({rng.randint(-1, 1): rng.randint(-2, 2)})
    m = SparseMatrix(r, c, ents)
    x0 = [LaurentScalar({rng.randint(-1, 1): Fraction(rng.randint(-3, 3), rng.randint(1, 3))})
          for _ in range(c)]
    rhs = [sum((m.entries.get((i, j), LaurentScalar()) * x0[j] for j in range(c)),
               LaurentScalar()) for i in range(r)]
    x = solve_linear(m, rhs)
    for i in range(r):
        got = sum((m.entries.get((i, j), LaurentScalar()) * x[j] for j in range(c)),
                  LaurentScalar())
        assert got == rhs[i]


def _random_complex(rng):
    """Random Z/2 complex: d_eo = A arbitrary, d_oe = B built from ker A and coker A."""
    import sympy
    e, o = rng.randint(1, 4), rng.randint(1, 4)
    A = sympy.Matrix(o, e, lambda i, j: rng.randint(-2, 2))
    ker_A = A.nullspace()
    coker = A.T.nullspace()  # vectors y with y^T A = 0
    B = sympy.zeros(e, o)
    # B = (kernel vectors) * (rows of coker) so that B A = 0 and A B = 0
    for kv in ker_A:
        for cv in coker:
            B += rng.randint(-2, 2) * kv * cv.T
    B = B * sympy.lcm([x.q for x in B] + [1])

    def sm(mat):
        ents = {}
        for i in range(mat.rows):
            for j in range(mat.cols):
                if mat[i, j] != 0:
                    val = Fraction(int(mat[i, j].p), int(mat[i, j].q))
                    ents[(i, j)] = LaurentScalar.const(val)
        return SparseMatrix(mat.rows, mat.cols, ents)
    return FiniteComplex(e, o, sm(A), sm(B))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_euler_characteristic(seed):
    rng = random.Random(seed)
    c = _random_complex(rng)
    assert c.check()
    he, ho = homology_dims(c)
    assert he - ho == c.evenDim - c.oddDim
    he, ho = homology_dims(c, "over-function-field")
    assert he - ho == c.evenDim - c.oddDim
