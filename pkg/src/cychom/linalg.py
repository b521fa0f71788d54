"""Exact sparse linear algebra over Q, Q(u) and the truncated ring Q[u]/(u^K).

Matrices carry :class:`~cychom.exactnum.LaurentScalar` entries.  Internally
rows are converted to integer (or integer-polynomial) dictionaries and reduced
by fraction-free elimination with content removal, which keeps coefficient
growth in check without ever leaving exact arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Mapping, Sequence

from .exactnum import LaurentScalar, WindowOverflow, global_window

__all__ = [
    "SparseMatrix", "FiniteComplex", "NonConstantEntry", "NoSolution",
    "rank_over_Q", "rank_over_function_field", "solve_linear", "homology_dims",
    "homology_over_truncated_series", "TruncatedHomology", "rank_of_rational_rows",
]


class NonConstantEntry(ValueError):
    """A matrix handed to a Q-only routine involves the variable u."""


class NoSolution(ValueError):
    """The linear system has no solution."""


class SparseMatrix:
    """Sparse ``rows x cols`` matrix with Laurent-polynomial entries."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int,
                 entries: Mapping[tuple[int, int], object] | None = None):
        self.rows = rows
        self.cols = cols
        clean: dict[tuple[int, int], LaurentScalar] = {}
        for (r, c), v in (entries or {}).items():
            if not (0 <= r < rows and 0 <= c < cols):
                raise IndexError(f"entry ({r}, {c}) outside {rows}x{cols}")
            v = LaurentScalar.coerce(v)
            if v:
                clean[(r, c)] = v
        self.entries = clean

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence[object]]) -> "SparseMatrix":
        nr = len(rows)
        nc = len(rows[0]) if nr else 0
        return cls(nr, nc, {(i, j): v for i, row in enumerate(rows) for j, v in enumerate(row)})

    @classmethod
    def zero(cls, rows: int, cols: int) -> "SparseMatrix":
        return cls(rows, cols)

    def is_constant(self) -> bool:
        return all(v.is_constant() for v in self.entries.values())

    def get(self, r: int, c: int) -> LaurentScalar:
        return self.entries.get((r, c), LaurentScalar())

    def matmul(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        by_row: dict[int, list[tuple[int, LaurentScalar]]] = {}
        for (r, c), v in other.entries.items():
            by_row.setdefault(r, []).append((c, v))
        out: dict[tuple[int, int], LaurentScalar] = {}
        for (r, k), v in self.entries.items():
            for c, w in by_row.get(k, ()):
                key = (r, c)
                out[key] = out[key] + v * w if key in out else v * w
        return SparseMatrix(self.rows, other.cols, out)

    def is_zero(self) -> bool:
        return not self.entries

    def apply(self, vec: Sequence[LaurentScalar]) -> list[LaurentScalar]:
        out = [LaurentScalar() for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            if vec[c]:
                out[r] = out[r] + v * vec[c]
        return out

    def __repr__(self) -> str:
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={len(self.entries)})"


# ---------------------------------------------------------------------------
# integer rows over Q


def _integer_rows(entries: Iterable[tuple[tuple[int, int], Fraction]]) -> list[dict[int, int]]:
    rows: dict[int, dict[int, Fraction]] = {}
    for (r, c), v in entries:
        if v:
            rows.setdefault(r, {})[c] = Fraction(v)
    out = []
    for row in rows.values():
        den = 1
        for v in row.values():
            den = lcm(den, v.denominator)
        irow = {c: int(v * den) for c, v in row.items()}
        out.append(_primitive(irow))
    return out


def _primitive(row: dict[int, int]) -> dict[int, int]:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            return row
    if g > 1:
        return {c: v // g for c, v in row.items()}
    return row


def _rank_int_rows(rows: list[dict[int, int]]) -> int:
    """Fraction-free sparse elimination; rows are consumed."""
    pivots: dict[int, dict[int, int]] = {}
    rank = 0
    for row in rows:
        row = dict(row)
        while row:
            # reduce by existing pivots on the smallest column present
            col = min(row)
            prow = pivots.get(col)
            if prow is None:
                pivots[col] = _primitive(row)
                rank += 1
                break
            a = row[col]
            p = prow[col]
            g = gcd(a, p)
            fa, fp = p // g, a // g
            new = {c: v * fa for c, v in row.items()}
            for c, v in prow.items():
                nv = new.get(c, 0) - fp * v
                if nv:
                    new[c] = nv
                else:
                    new.pop(c, None)
            row = _primitive(new) if new else new
    return rank


def rank_of_rational_rows(rows: Iterable[Mapping[int, Fraction | int]]) -> int:
    """Rank over Q of a list of sparse rows ``{col: value}``."""
    entries = ((( i, c), Fraction(v)) for i, row in enumerate(rows) for c, v in row.items())
    return _rank_int_rows(_integer_rows(entries))


def rank_over_Q(m: SparseMatrix) -> int:
    if not m.is_constant():
        raise NonConstantEntry("rank_over_Q requires u-free entries")
    return _rank_int_rows(_integer_rows(((k, v.coeff(0)) for k, v in m.entries.items())))


# ---------------------------------------------------------------------------
# polynomial rows over Q[u] (rank over Q(u))

Poly = dict  # exponent -> int, never empty


def _pmul(a: Poly, b: Poly) -> Poly:
    out: dict[int, int] = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
    return {e: c for e, c in out.items() if c}


def _psub(a: Poly, b: Poly) -> Poly:
    out = dict(a)
    for e, c in b.items():
        v = out.get(e, 0) - c
        if v:
            out[e] = v
        else:
            out.pop(e, None)
    return out


def _poly_rows(m: SparseMatrix) -> list[dict[int, Poly]]:
    rows: dict[int, dict[int, LaurentScalar]] = {}
    for (r, c), v in m.entries.items():
        rows.setdefault(r, {})[c] = v
    out = []
    for row in rows.values():
        den = 1
        low = None
        for v in row.values():
            for e, c in v.items():
                den = lcm(den, c.denominator)
                low = e if low is None else min(low, e)
        prow = {c: {e - low: int(x * den) for e, x in v.items()} for c, v in row.items()}
        out.append(_poly_primitive(prow))
    return out


def _poly_primitive(row: dict[int, Poly]) -> dict[int, Poly]:
    g = 0
    low = None
    for p in row.values():
        for e, c in p.items():
            g = gcd(g, c)
            low = e if low is None else min(low, e)
    if g in (0, 1) and not low:
        return row
    g = g or 1
    return {col: {e - low: c // g for e, c in p.items()} for col, p in row.items()}


def _poly_size(p: Poly) -> tuple[int, int]:
    return (max(p) - min(p), len(p))


def rank_over_function_field(m: SparseMatrix) -> int:
    """Rank over Q(u) by fraction-free elimination with polynomial pivots."""
    rows = _poly_rows(m)
    pivots: dict[int, dict[int, Poly]] = {}
    rank = 0
    for row in rows:
        while row:
            col = min(row)
            prow = pivots.get(col)
            if prow is None:
                pivots[col] = row
                rank += 1
                break
            a = row[col]
            p = prow[col]
            new = {c: _pmul(v, p) for c, v in row.items()}
            for c, v in prow.items():
                nv = _psub(new.get(c, {}), _pmul(v, a))
                if nv:
                    new[c] = nv
                else:
                    new.pop(c, None)
            row = _poly_primitive(new) if new else new
    return rank


# ---------------------------------------------------------------------------
# solving inside the Laurent window


def solve_linear(m: SparseMatrix, rhs: Sequence[object],
                 window: tuple[int, int] | None = None) -> list[LaurentScalar]:
    """Find ``x`` with ``m x = rhs`` whose entries are Laurent polynomials.

    The unknown coefficients of ``u^e`` for ``e`` in ``window`` (default: the
    global window) are solved for over Q.  If no such solution exists, the
    system is tested over Q(u): solvable there means the solution needs
    exponents outside the window (``WindowOverflow``), otherwise ``NoSolution``.
    """
    rhs = [LaurentScalar.coerce(v) for v in rhs]
    if len(rhs) != m.rows:
        raise ValueError("rhs length mismatch")
    lo, hi = window or global_window()
    width = hi - lo + 1
    # unknown (c, e) -> column index
    def var(c: int, e: int) -> int:
        return c * width + (e - lo)

    eq_rows: dict[tuple[int, int], dict[int, Fraction]] = {}
    for (r, c), v in m.entries.items():
        for ev, cv in v.items():
            for e in range(lo, hi + 1):
                key = (r, ev + e)
                eq_rows.setdefault(key, {})[var(c, e)] = cv
    rhs_keys = {}
    for r, v in enumerate(rhs):
        for e, cv in v.items():
            rhs_keys[(r, e)] = cv
    for key in rhs_keys:
        eq_rows.setdefault(key, {})
    sol = _solve_rational(list(eq_rows.items()), rhs_keys, m.cols * width)
    if sol is not None:
        out = []
        for c in range(m.cols):
            coeffs = {e: sol.get(var(c, e), 0) for e in range(lo, hi + 1)}
            out.append(LaurentScalar({e: x for e, x in coeffs.items() if x}))
        return out
    # distinguish "outside window" from "no solution at all"
    aug = dict(m.entries)
    for r, v in enumerate(rhs):
        if v:
            aug[(r, m.cols)] = v
    rk = rank_over_function_field(m)
    rk_aug = rank_over_function_field(SparseMatrix(m.rows, m.cols + 1, aug))
    if rk == rk_aug:
        raise WindowOverflow("a solution exists over Q(u) but not inside the u-window")
    raise NoSolution("inconsistent system")


def _solve_rational(eqs: list[tuple[object, dict[int, Fraction]]],
                    rhs: Mapping[object, Fraction], ncols: int) -> dict[int, Fraction] | None:
    """Sparse Gauss-Jordan over Q; returns one solution (free variables 0)."""
    pivots: dict[int, tuple[dict[int, Fraction], Fraction]] = {}
    order: list[int] = []
    for key, row in eqs:
        row = {c: Fraction(v) for c, v in row.items() if v}
        b = Fraction(rhs.get(key, 0))
        while row:
            col = min(row)
            if col in pivots:
                prow, pb = pivots[col]
                f = row[col]
                for c, v in prow.items():
                    nv = row.get(c, 0) - f * v
                    if nv:
                        row[c] = nv
                    else:
                        row.pop(c, None)
                b -= f * pb
                continue
            f = row[col]
            row = {c: v / f for c, v in row.items()}
            pivots[col] = (row, b / f)
            order.append(col)
            break
        else:
            if b:
                return None
    sol: dict[int, Fraction] = {}
    # pivot rows only involve columns >= their pivot, so solve right to left
    for col in sorted(order, reverse=True):
        prow, pb = pivots[col]
        val = pb
        for c, v in prow.items():
            if c != col:
                val -= v * sol.get(c, 0)
        if val:
            sol[col] = val
    return sol


# ---------------------------------------------------------------------------
# complexes


@dataclass
class FiniteComplex:
    """Z/2-graded complex: ``even --dEvenToOdd--> odd --dOddToEven--> even``."""

    evenDim: int
    oddDim: int
    dEvenToOdd: SparseMatrix
    dOddToEven: SparseMatrix

    def __post_init__(self):
        if (self.dEvenToOdd.rows, self.dEvenToOdd.cols) != (self.oddDim, self.evenDim):
            raise ValueError("dEvenToOdd has wrong shape")
        if (self.dOddToEven.rows, self.dOddToEven.cols) != (self.evenDim, self.oddDim):
            raise ValueError("dOddToEven has wrong shape")

    def check(self) -> bool:
        return (self.dOddToEven.matmul(self.dEvenToOdd).is_zero()
                and self.dEvenToOdd.matmul(self.dOddToEven).is_zero())


def homology_dims(c: FiniteComplex, mode: str = "over-Q") -> tuple[int, int]:
    if mode == "over-Q":
        rank = rank_over_Q
    elif mode == "over-function-field":
        rank = rank_over_function_field
    else:
        raise ValueError(f"unknown mode {mode!r}")
    r_eo = rank(c.dEvenToOdd)
    r_oe = rank(c.dOddToEven)
    return c.evenDim - r_eo - r_oe, c.oddDim - r_oe - r_eo


@dataclass
class TruncatedHomology:
    """Homology of a Q[u]-lattice complex reduced to the ring Q[u]/(u^K)."""

    K: int
    freeRank: tuple[int, int]
    torsion: tuple[list[int], list[int]] = field(default_factory=lambda: ([], []))

    def to_json(self) -> dict:
        return {"K": self.K, "freeRank": list(self.freeRank),
                "torsion": {"even": self.torsion[0], "odd": self.torsion[1]}}


def _series_divisors(m: SparseMatrix, K: int) -> list[int]:
    """u-valuations of the elementary divisors of ``m`` over Q[[u]], capped at K.

    Entries are reduced modulo u^K; zero divisors are omitted.  Elimination
    uses pivots of minimal u-valuation, which are units times a power of u in
    the local ring.
    """
    if any(v.window[0] < 0 for v in m.entries.values() if v):
        raise ValueError("lattice complexes need polynomial entries")

    def trunc(v: LaurentScalar) -> list[Fraction]:
        out = [Fraction(0)] * K
        for e, c in v.items():
            if e < K:
                out[e] = c
        return out

    rows: dict[int, dict[int, list[Fraction]]] = {}
    for (r, c), v in m.entries.items():
        t = trunc(v)
        if any(t):
            rows.setdefault(r, {})[c] = t

    def val(p: list[Fraction]) -> int:
        for i, x in enumerate(p):
            if x:
                return i
        return K

    def mul(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
        out = [Fraction(0)] * K
        for i, x in enumerate(a):
            if x:
                for j in range(K - i):
                    if b[j]:
                        out[i + j] += x * b[j]
        return out

    def inv_unit(p: list[Fraction]) -> list[Fraction]:
        out = [Fraction(0)] * K
        out[0] = 1 / p[0]
        for n in range(1, K):
            s = sum((p[i] * out[n - i] for i in range(1, n + 1)), Fraction(0))
            out[n] = -s / p[0]
        return out

    divisors: list[int] = []
    while rows:
        best = None
        for r, row in rows.items():
            for c, p in row.items():
                v = val(p)
                if best is None or v < best[0]:
                    best = (v, r, c)
                    if v == 0:
                        break
            if best is not None and best[0] == 0:
                break
        v, pr, pc = best
        if v >= K:
            break
        divisors.append(v)
        prow = rows.pop(pr)
        piv = prow[pc]
        unit_inv = inv_unit(piv[v:] + [Fraction(0)] * v)
        # clear column pc in all other rows
        for r in list(rows):
            row = rows[r]
            q = row.get(pc)
            if q is None:
                continue
            # factor = q / piv = (q / u^v) * unit_inv; valuation of q >= v
            qs = q[v:] + [Fraction(0)] * v
            factor = mul(qs, unit_inv)
            for c, pv in prow.items():
                sub = mul(factor, pv)
                cur = row.get(c, [Fraction(0)] * K)
                new = [a - b for a, b in zip(cur, sub)]
                if any(new):
                    row[c] = new
                else:
                    row.pop(c, None)
            row.pop(pc, None)
            if not row:
                del rows[r]
        # column operations clear the rest of the pivot row; they never touch
        # other rows because the pivot column is now zero elsewhere
    return divisors


def homology_over_truncated_series(c: FiniteComplex, K: int) -> TruncatedHomology:
    """Homology of the lattice complex over Q[u] reduced to Q[u]/(u^K).

    Free rank per parity is the rank over Q(u); torsion exponents are the
    u-valuations of the elementary divisors of the incoming differential,
    capped at K (a summand Q[u]/(u^e) with e >= K is reported as exponent K).
    """
    if K < 1:
        raise ValueError("K must be positive")
    even, odd = homology_dims(c, "over-function-field")
    tor_even = [v for v in _series_divisors(c.dOddToEven, K) if v > 0]
    tor_odd = [v for v in _series_divisors(c.dEvenToOdd, K) if v > 0]
    return TruncatedHomology(K, (even, odd), (sorted(tor_even), sorted(tor_odd)))
