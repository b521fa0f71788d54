"""Isolated hypersurface singularities: matrix factorization algebras, the
trace map to twisted de Rham forms, Gauss-Manin connections and the
Thom-Sebastiani comparison.

Conventions used throughout:

* Polynomial rings are truncated by weighted degree: ``O_T`` keeps monomials
  of weighted degree ``<= T``.  Forms ``x^a dx_S`` carry the weight of ``x^a``
  plus the weights of the ``dx_i``; ``d`` preserves this weight and ``df``
  raises it, so truncating forms at weight ``T`` is compatible with every map.
* ``P_k`` has basis the monomials ``theta_S`` (``S`` a sorted tuple of
  variable indices) in lexicographic order; ``End P_k`` has basis the
  identity followed by all matrix units except the last diagonal one, so the
  algebra unit is a basis vector.
* A chain entry is described structurally by a pair ``(poly, matrix)`` with
  ``poly`` a dict exponent-vector -> coefficient and ``matrix`` a dict
  ``(row, col) -> int`` in the monomial basis of ``P``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import factorial, lcm
from typing import Iterable, Mapping, Sequence

from .dgalg import DgAlgebra, validate
from .exactnum import LaurentScalar
from .hochschild import NORMALIZED, enumerate_basis, key_parity
from .linalg import _solve_rational, rank_of_rational_rows

__all__ = [
    "WeightedPoly", "ConstantTerm", "TruncationTooSmall", "VariableClash", "NonCommutativeInput",
    "NotQuasiHomogeneous", "BasisNotFree", "NotFiniteWithinBound", "MonomialRing", "EndP",
    "MatrixFactorizationAlgebra", "decompose", "build_Af", "build_iota", "direct_sum",
    "epsilon_hkr", "supertrace_map", "TraceMap", "build_If", "wedge_map", "TwistedComplex",
    "milnor_basis", "gm_connection_matrix", "kronecker_sum", "ts_diagram_check",
    "filtration_level", "in_filtration", "closed_extension", "check_closed_extension",
    "check_wedge_intertwines", "AfTraceMap", "Iota", "milnor_forms", "StepFailedError",
]


class ConstantTerm(ValueError):
    """The polynomial has a nonzero constant term."""


class TruncationTooSmall(ValueError):
    """The truncation bound is below the weighted degree of f."""


class VariableClash(ValueError):
    """Two polynomials that must live on disjoint variables share a name."""


class NonCommutativeInput(ValueError):
    """The HKR map was handed a chain over a non-commutative or odd algebra."""


class NotQuasiHomogeneous(ValueError):
    """f is not homogeneous for the given weights."""


class BasisNotFree(ValueError):
    """The proposed forms do not form a basis of top-degree twisted cohomology."""


class NotFiniteWithinBound(ValueError):
    """The Jacobian ideal does not saturate below the degree bound."""


# ---------------------------------------------------------------------------
# polynomials

Poly = dict  # exponent tuple -> Fraction


def _padd(out: dict, key, c) -> None:
    v = out.get(key, 0) + c
    if v:
        out[key] = v
    else:
        out.pop(key, None)


def poly_mul(p: Mapping, q: Mapping) -> Poly:
    out: Poly = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            _padd(out, tuple(a + b for a, b in zip(e1, e2)), c1 * c2)
    return out


def poly_diff(p: Mapping, i: int) -> Poly:
    out: Poly = {}
    for e, c in p.items():
        if e[i]:
            e2 = list(e)
            e2[i] -= 1
            _padd(out, tuple(e2), c * e[i])
    return out


def _wdeg(exps: Sequence[int], weights: Sequence[int]) -> int:
    return sum(a * w for a, w in zip(exps, weights))


@dataclass(frozen=True)
class WeightedPoly:
    """A polynomial with named variables carrying positive integer weights."""

    variables: tuple[str, ...]
    weights: tuple[int, ...]
    terms: tuple[tuple[tuple[int, ...], Fraction], ...]

    def __post_init__(self):
        if len(self.variables) != len(self.weights):
            raise ValueError("one weight per variable is required")
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variable names")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive")

    @classmethod
    def make(cls, variables: Sequence[str], weights: Sequence[int] | None,
             terms: Mapping[tuple[int, ...], object]) -> "WeightedPoly":
        weights = tuple(int(w) for w in weights) if weights else (1,) * len(variables)
        clean = tuple(sorted((tuple(e), Fraction(c)) for e, c in terms.items() if c))
        return cls(tuple(variables), weights, clean)

    @classmethod
    def parse(cls, text: str, weights: Sequence[int] | None = None,
              variables: Sequence[str] | None = None) -> "WeightedPoly":
        """Parse ``"x^3 + 1/2*x*y^2"``; variables default to the sorted symbol names."""
        import sympy

        try:
            expr = sympy.sympify(text.replace("^", "**"), rational=True)
        except (sympy.SympifyError, SyntaxError, TypeError) as exc:
            raise ValueError(f"cannot parse polynomial {text!r}: {exc}") from exc
        names = sorted(str(s) for s in expr.free_symbols)
        if variables is not None:
            extra = set(names) - set(variables)
            if extra:
                raise ValueError(f"unknown variables {sorted(extra)}")
            names = list(variables)
        if not names:
            raise ValueError("polynomial has no variables")
        gens = [sympy.Symbol(n) for n in names]
        try:
            p = sympy.Poly(expr, *gens, domain="QQ")
        except sympy.PolynomialError as exc:
            raise ValueError(f"not a polynomial: {text!r}") from exc
        terms = {tuple(int(a) for a in mon): Fraction(int(c.p), int(c.q))
                 for mon, c in p.terms()}
        if weights is not None and len(weights) != len(names):
            raise ValueError(f"expected {len(names)} weights, got {len(weights)}")
        return cls.make(names, weights, terms)

    @property
    def k(self) -> int:
        return len(self.variables)

    @property
    def poly(self) -> Poly:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def term_degrees(self) -> list[int]:
        return [_wdeg(e, self.weights) for e, _ in self.terms]

    def degree(self) -> int:
        return max(self.term_degrees(), default=0)

    def is_quasi_homogeneous(self) -> bool:
        return bool(self.terms) and len(set(self.term_degrees())) == 1

    def has_constant_term(self) -> bool:
        return any(not any(e) for e, _ in self.terms)

    def partial(self, i: int) -> Poly:
        return poly_diff(self.poly, i)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms:
            mono = "*".join(v if a == 1 else f"{v}^{a}" for v, a in zip(self.variables, e) if a)
            coef = str(c)
            parts.append(mono if c == 1 and mono else (f"{coef}*{mono}" if mono else coef))
        return " + ".join(parts)


def direct_sum(f: WeightedPoly, g: WeightedPoly, rescale: bool = False) -> WeightedPoly:
    """``f(x) + g(y)`` on the concatenated variables.

    With ``rescale`` the weights are scaled so that quasi-homogeneous f and g
    of different degrees give a quasi-homogeneous sum.
    """
    if set(f.variables) & set(g.variables):
        raise VariableClash(f"shared variables {sorted(set(f.variables) & set(g.variables))}")
    wf, wg = f.weights, g.weights
    if rescale:
        df, dg = f.degree(), g.degree()
        m = lcm(df, dg)
        wf = tuple(w * (m // df) for w in wf)
        wg = tuple(w * (m // dg) for w in wg)
    terms: dict = {}
    for e, c in f.terms:
        _padd(terms, e + (0,) * g.k, c)
    for e, c in g.terms:
        _padd(terms, (0,) * f.k + e, c)
    return WeightedPoly.make(f.variables + g.variables, wf + wg, terms)


def decompose(f: WeightedPoly, rule: str = "lowest") -> list[Poly]:
    """Write ``f = sum_i x_i f_i``.

    Each monomial goes to its lowest-index (``rule="lowest"``) or
    highest-index (``rule="highest"``) dividing variable.
    """
    if f.has_constant_term():
        raise ConstantTerm("f has a constant term")
    if rule not in ("lowest", "highest"):
        raise ValueError(f"unknown decomposition rule {rule!r}")
    parts: list[Poly] = [{} for _ in range(f.k)]
    for e, c in f.terms:
        idx = [i for i, a in enumerate(e) if a]
        i = idx[0] if rule == "lowest" else idx[-1]
        e2 = list(e)
        e2[i] -= 1
        _padd(parts[i], tuple(e2), c)
    return parts


# ---------------------------------------------------------------------------
# truncated polynomial rings and forms


class MonomialRing:
    """Monomials of weighted degree ``<= T`` with truncated multiplication."""

    def __init__(self, variables: Sequence[str], weights: Sequence[int], T: int):
        self.variables = tuple(variables)
        self.weights = tuple(weights)
        self.k = len(self.variables)
        self.T = T
        monos = []
        for exps in itertools.product(*(range(T // w + 1) for w in self.weights)):
            if _wdeg(exps, self.weights) <= T:
                monos.append(exps)
        monos.sort(key=lambda e: (_wdeg(e, self.weights), tuple(-a for a in e)))
        self.monomials = tuple(monos)
        self.index = {e: i for i, e in enumerate(monos)}
        self.dim = len(monos)
        self._alg: DgAlgebra | None = None

    def weight(self, exps) -> int:
        return _wdeg(exps, self.weights)

    def truncate(self, p: Mapping) -> Poly:
        return {e: c for e, c in p.items() if c and self.weight(e) <= self.T}

    def to_vector(self, p: Mapping) -> dict[int, Fraction]:
        return {self.index[e]: c for e, c in self.truncate(p).items()}

    def label(self, exps) -> str:
        s = "*".join(v if a == 1 else f"{v}^{a}" for v, a in zip(self.variables, exps) if a)
        return s or "1"

    def algebra(self) -> DgAlgebra:
        """The ring as a purely even dg algebra with zero differential."""
        if self._alg is None:
            mult = []
            for i, e1 in enumerate(self.monomials):
                for j, e2 in enumerate(self.monomials):
                    e = tuple(a + b for a, b in zip(e1, e2))
                    if e in self.index:
                        mult.append((i, j, self.index[e], 1))
            self._alg = DgAlgebra(f"O_{self.T}({','.join(self.variables)})", [0] * self.dim, 0,
                                  mult, [], [self.label(e) for e in self.monomials])
        return self._alg


Form = dict  # (exps, S) -> Fraction, S a sorted tuple of variable indices


def _wedge_sign(S: Sequence[int], T: Sequence[int]) -> int:
    """Sign of sorting the concatenation S + T (both sorted); 0 if they meet."""
    if set(S) & set(T):
        return 0
    inv = sum(1 for a in S for b in T if a > b)
    return -1 if inv & 1 else 1


def form_weight(key, weights) -> int:
    exps, S = key
    return _wdeg(exps, weights) + sum(weights[i] for i in S)


def truncate_form(w: Mapping, weights, T: int) -> Form:
    return {k: c for k, c in w.items() if c and form_weight(k, weights) <= T}


def form_add(out: Form, w: Mapping, coef=1) -> None:
    for k, c in w.items():
        _padd(out, k, coef * c)


def poly_times_form(p: Mapping, w: Mapping) -> Form:
    out: Form = {}
    for e1, c1 in p.items():
        for (e2, S), c2 in w.items():
            _padd(out, (tuple(a + b for a, b in zip(e1, e2)), S), c1 * c2)
    return out


def wedge(w1: Mapping, w2: Mapping) -> Form:
    out: Form = {}
    for (e1, S1), c1 in w1.items():
        for (e2, S2), c2 in w2.items():
            s = _wedge_sign(S1, S2)
            if s:
                _padd(out, (tuple(a + b for a, b in zip(e1, e2)), tuple(sorted(S1 + S2))),
                      s * c1 * c2)
    return out


def d_form(w: Mapping, k: int) -> Form:
    out: Form = {}
    for (e, S), c in w.items():
        for i in range(k):
            if e[i] and i not in S:
                e2 = list(e)
                e2[i] -= 1
                s = _wedge_sign((i,), S)
                _padd(out, (tuple(e2), tuple(sorted(S + (i,)))), s * c * e[i])
    return out


def exact_form(p: Mapping, k: int) -> Form:
    """The 1-form dp."""
    return d_form({(e, ()): c for e, c in p.items()}, k)


def form_parity(key) -> int:
    return len(key[1]) & 1


# ---------------------------------------------------------------------------
# End P_k


class EndP:
    """Endomorphisms of the exterior algebra on k odd generators."""

    def __init__(self, k: int):
        self.k = k
        subsets = [tuple(c) for r in range(k + 1) for c in itertools.combinations(range(k), r)]
        subsets.sort()
        self.monomials = tuple(subsets)
        self.index = {S: i for i, S in enumerate(subsets)}
        self.n = len(subsets)
        self.mono_parity = tuple(len(S) & 1 for S in subsets)
        last = self.n - 1
        self.units = tuple((r, c) for r in range(self.n) for c in range(self.n)
                           if (r, c) != (last, last))
        # basis 0 is the identity, basis 1 + i is the matrix unit units[i]
        self.dim = 1 + len(self.units)
        self.unit_index = {u: i + 1 for i, u in enumerate(self.units)}
        self.parity = (0,) + tuple((self.mono_parity[r] + self.mono_parity[c]) & 1
                                   for r, c in self.units)
        self.grade = (0,) + tuple(len(subsets[r]) - len(subsets[c]) for r, c in self.units)
        ident = {(i, i): 1 for i in range(self.n)}
        self.matrices = (ident,) + tuple({u: 1} for u in self.units)
        self.ssign = tuple(-1 if p else 1 for p in self.mono_parity)
        self._mul: dict = {}

    def label(self, i: int) -> str:
        if i == 0:
            return "I"
        r, c = self.units[i - 1]
        name = lambda S: "".join(f"t{j + 1}" for j in S) or "1"
        return f"E[{name(self.monomials[r])},{name(self.monomials[c])}]"

    def to_basis(self, M: Mapping) -> dict[int, int]:
        last = self.n - 1
        lam = M.get((last, last), 0)
        out: dict[int, int] = {}
        if lam:
            out[0] = lam
        for (r, c), v in M.items():
            if (r, c) == (last, last):
                continue
            w = v - (lam if r == c else 0)
            if w:
                out[self.unit_index[(r, c)]] = w
        for i in range(last):
            if (i, i) not in M and lam:
                out[self.unit_index[(i, i)]] = -lam
        return out

    @staticmethod
    def matmul(A: Mapping, B: Mapping) -> dict:
        out: dict = {}
        rows: dict = {}
        for (r, c), v in B.items():
            rows.setdefault(r, []).append((c, v))
        for (r, m), v in A.items():
            for c, w in rows.get(m, ()):
                _padd(out, (r, c), v * w)
        return out

    def supertrace(self, M: Mapping) -> int:
        return sum(v * self.ssign[r] for (r, c), v in M.items() if r == c)

    def theta(self, i: int) -> dict:
        """Left multiplication by theta_i."""
        out = {}
        for c, S in enumerate(self.monomials):
            if i not in S:
                s = -1 if sum(1 for j in S if j < i) & 1 else 1
                out[(self.index[tuple(sorted(S + (i,)))], c)] = s
        return out

    def dtheta(self, i: int) -> dict:
        """The odd derivation d/d theta_i."""
        out = {}
        for c, S in enumerate(self.monomials):
            if i in S:
                s = -1 if sum(1 for j in S if j < i) & 1 else 1
                out[(self.index[tuple(j for j in S if j != i)], c)] = s
        return out

    def idempotent(self) -> dict:
        """Projection onto the monomial 1 (even, supertrace 1)."""
        return {(0, 0): 1}

    def product_basis(self, i: int, j: int) -> dict[int, int]:
        key = (i, j)
        r = self._mul.get(key)
        if r is None:
            r = self.to_basis(self.matmul(self.matrices[i], self.matrices[j]))
            self._mul[key] = r
        return r


def kron(A: Mapping, B: Mapping, endA: EndP, endB: EndP, parB: int, big: EndP) -> dict:
    """Matrix of ``A (x) B`` on ``P_k (x) P_l = P_{k+l}`` with the Koszul sign.

    ``(A (x) B)(p (x) q) = (-1)^{|B||p|} A p (x) B q``; the monomial
    ``theta_S theta'_T`` is already in canonical order.
    """
    out = {}
    shift = lambda S: tuple(endA.k + j for j in S)
    for (r1, c1), v1 in A.items():
        for (r2, c2), v2 in B.items():
            s = -1 if (parB and endA.mono_parity[c1]) else 1
            row = big.index[endA.monomials[r1] + shift(endB.monomials[r2])]
            col = big.index[endA.monomials[c1] + shift(endB.monomials[c2])]
            out[(row, col)] = s * v1 * v2
    return out


# ---------------------------------------------------------------------------
# the matrix factorization algebra A_f


class MatrixFactorizationAlgebra:
    """``O_T (x) End P_k`` with differential the supercommutator with ``D_f``.

    Basis index ``m * E + e`` for monomial ``m`` of ``O_T`` and End basis
    element ``e`` (``E = 4^k - ... `` is ``end.dim``).  ``algebra`` carries the
    differential, ``algebra0`` is the same graded algebra with zero
    differential (the target of ``exp(-b(D_f))``).
    """

    def __init__(self, f: WeightedPoly, T: int, rule: str = "lowest", check: bool = True):
        if f.is_zero():
            raise NotFiniteWithinBound("f = 0 has no isolated critical point")
        if T < f.degree():
            raise TruncationTooSmall(f"T = {T} is below the weighted degree {f.degree()} of f")
        self.f = f
        self.T = T
        self.rule = rule
        self.fi = decompose(f, rule)
        self.ring = MonomialRing(f.variables, f.weights, T)
        self.end = EndP(f.k)
        E = self.end.dim
        self.E = E
        self.dim = self.ring.dim * E
        self.unit = 0  # monomial 1 (index 0) times the identity (index 0)
        # structural description of D_f as (poly, matrix) terms
        self.D_terms: list[tuple[Poly, dict]] = []
        for i in range(f.k):
            x_i = tuple(1 if j == i else 0 for j in range(f.k))
            if self.fi[i]:
                self.D_terms.append((dict(self.fi[i]), self.end.theta(i)))
            self.D_terms.append(({x_i: Fraction(1)}, self.end.dtheta(i)))
        self.D = self.element_from_terms(self.D_terms)
        self.f_element = self.element_from_terms([(f.poly, self.end.matrices[0])])
        self._build_algebras()
        if check:
            self.check()

    # -- basis bookkeeping ---------------------------------------------------

    def index(self, mono: int, e: int) -> int:
        return mono * self.E + e

    def parts(self, idx: int) -> tuple[int, int]:
        return divmod(idx, self.E)

    def entry(self, idx: int) -> tuple[Poly, dict, int]:
        m, e = self.parts(idx)
        return ({self.ring.monomials[m]: 1}, self.end.matrices[e], self.end.parity[e])

    def element_from_terms(self, terms: Iterable[tuple[Mapping, Mapping]]) -> dict[int, object]:
        out: dict = {}
        for poly, M in terms:
            eb = self.end.to_basis(M)
            for mono, c in self.ring.to_vector(poly).items():
                for e, v in eb.items():
                    _padd(out, self.index(mono, e), c * v)
        return {k: (int(v) if isinstance(v, Fraction) and v.denominator == 1 else v)
                for k, v in out.items()}

    def idempotent_index(self, mono: int = 0) -> int:
        """Basis index of ``x^mono (x) e`` with e the projection onto 1 in P_k."""
        return self.index(mono, self.end.unit_index[(0, 0)])

    def label(self, idx: int) -> str:
        m, e = self.parts(idx)
        return f"{self.ring.label(self.ring.monomials[m])}*{self.end.label(e)}"

    # -- algebra structure ------------------------------------------------------

    def _build_algebras(self) -> None:
        R, End = self.ring, self.end
        parity = [End.parity[e] for m in range(R.dim) for e in range(End.dim)]
        rmul = {}
        for i, e1 in enumerate(R.monomials):
            for j, e2 in enumerate(R.monomials):
                e = tuple(a + b for a, b in zip(e1, e2))
                if e in R.index:
                    rmul[(i, j)] = R.index[e]
        mult = []
        for (i, j), m in rmul.items():
            for e1 in range(End.dim):
                for e2 in range(End.dim):
                    for e, c in End.product_basis(e1, e2).items():
                        mult.append((self.index(i, e1), self.index(j, e2), self.index(m, e), c))
        labels = [self.label(i) for i in range(self.dim)]
        name = f"A_f[{self.f}; T={self.T}]"
        self.algebra0 = DgAlgebra(name + "^0", parity, self.unit, mult, [], labels)
        diff = []
        a0 = self.algebra0
        for i in range(self.dim):
            basis = {i: 1}
            dl = a0.multiply(self.D, basis)
            dr = a0.multiply(basis, self.D)
            s = -1 if parity[i] else 1
            for k, c in dl.items():
                diff.append((i, k, c))
            for k, c in dr.items():
                diff.append((i, k, -s * c))
        self.algebra = DgAlgebra(name, parity, self.unit, mult, diff, labels)

    def D_squared_defect(self) -> dict:
        """``D_f^2 - f`` in the truncated algebra (zero when the construction is sound)."""
        sq = self.algebra0.multiply(self.D, self.D)
        for k, c in self.f_element.items():
            _padd(sq, k, -c)
        return sq

    def check(self, full: bool | None = None) -> None:
        defect = self.D_squared_defect()
        if defect:
            raise ValueError(f"D_f^2 != f: defect {defect}")
        if full is None:
            full = self.dim <= 64
        if full:
            rep = validate(self.algebra)
            if not rep.ok:
                raise ValueError(f"A_f failed validation: {rep.summary()}")


def build_Af(f: WeightedPoly, T: int, rule: str = "lowest",
             check: bool = True) -> MatrixFactorizationAlgebra:
    return MatrixFactorizationAlgebra(f, T, rule, check)


class Iota:
    """The dg algebra map ``A_f (x) A_g -> A_{f+g}`` (basis ``i * dim_g + j``)."""

    def __init__(self, Af: MatrixFactorizationAlgebra, Ag: MatrixFactorizationAlgebra,
                 target: MatrixFactorizationAlgebra):
        self.Af, self.Ag, self.target = Af, Ag, target
        self.m2 = Ag.dim
        self._cache: dict[int, dict] = {}
        self._ecache: dict[int, tuple] = {}

    def entry(self, t: int) -> tuple[Poly, dict, int]:
        """Structural (poly, matrix, parity) of the image of tensor basis element t."""
        r = self._ecache.get(t)
        if r is None:
            i, j = divmod(t, self.m2)
            p1, M1, q1 = self.Af.entry(i)
            p2, M2, q2 = self.Ag.entry(j)
            (e1,), (e2,) = p1, p2
            mono = e1 + e2
            R = self.target.ring
            poly = {mono: 1} if R.weight(mono) <= R.T else {}
            M = kron(M1, M2, self.Af.end, self.Ag.end, q2, self.target.end)
            r = (poly, M, (q1 + q2) & 1)
            self._ecache[t] = r
        return r

    def __call__(self, t: int) -> dict[int, object]:
        r = self._cache.get(t)
        if r is None:
            poly, M, _ = self.entry(t)
            r = self.target.element_from_terms([(poly, M)]) if poly else {}
            self._cache[t] = r
        return r

    def apply(self, vec: Mapping[int, object]) -> dict:
        out: dict = {}
        for t, c in vec.items():
            for k, v in self(t).items():
                _padd(out, k, c * v)
        return out

    def apply_chain(self, chain: Mapping) -> dict:
        """C(iota) on chains over the tensor algebra, projected to normalized chains."""
        out: dict = {}
        unit = self.target.unit
        for key, c in chain.items():
            images = [self(t) for t in key]
            for combo in itertools.product(*(im.items() for im in images)):
                if any(k == unit for k, _ in combo[1:]):
                    continue
                coef = c
                for _, v in combo:
                    coef *= v
                _padd(out, tuple(k for k, _ in combo), coef)
        return out

    def check(self) -> dict:
        """Exhaustive unit, multiplicativity and differential checks; returns witnesses."""
        from .dgalg import tensor_product

        t = tensor_product(self.Af.algebra, self.Ag.algebra)
        tgt = self.target.algebra
        failures = []
        if self(t.unit) != {tgt.unit: 1}:
            failures.append({"check": "unit"})
        for a in range(t.dim):
            if self.apply(t.d({a: 1})) != tgt.d(self(a)):
                failures.append({"check": "differential", "witness": [a]})
                break
        for a in range(t.dim):
            ia = self(a)
            for b in range(t.dim):
                lhs = self.apply(t.multiply({a: 1}, {b: 1}))
                rhs = tgt.multiply(ia, self(b))
                if lhs != rhs:
                    failures.append({"check": "multiplicative", "witness": [a, b]})
                    break
            if failures and failures[-1]["check"] == "multiplicative":
                break
        m2 = self.m2
        dsum = {}
        for i, c in self.Af.D.items():
            _padd(dsum, i * m2 + self.Ag.unit, c)
        for j, c in self.Ag.D.items():
            _padd(dsum, self.Af.unit * m2 + j, c)
        if self.apply(dsum) != self.target.D:
            failures.append({"check": "D_f(x)1 + 1(x)D_g"})
        return {"ok": not failures, "failures": failures, "pairs": t.dim * t.dim}


def build_iota(Af: MatrixFactorizationAlgebra, Ag: MatrixFactorizationAlgebra,
               check: bool = False) -> Iota:
    if set(Af.f.variables) & set(Ag.f.variables):
        raise VariableClash("f and g share variables")
    if Af.rule != Ag.rule:
        raise ValueError("f and g must use the same decomposition rule")
    fg = direct_sum(Af.f, Ag.f)
    T = min(Af.T, Ag.T)
    target = MatrixFactorizationAlgebra(fg, T, Af.rule, check=False)
    target.check(full=False)
    iota = Iota(Af, Ag, target)
    if check:
        rep = iota.check()
        if not rep["ok"]:
            raise ValueError(f"iota is not a dg algebra map: {rep['failures']}")
    return iota


# ---------------------------------------------------------------------------
# HKR map, supertrace and the trace map to forms


def _eps_polys(polys: Sequence[Mapping], k: int, weights, T: int) -> Form:
    """``(1/n!) p_0 dp_1 ^ ... ^ dp_n`` truncated at form weight T."""
    n = len(polys) - 1
    if n > k:
        return {}
    acc: Form = {(e, ()): c for e, c in polys[0].items()}
    for p in polys[1:]:
        acc = truncate_form(wedge(acc, exact_form(p, k)), weights, T)
        if not acc:
            return {}
    if n > 1:
        inv = Fraction(1, factorial(n))
        acc = {key: c * inv for key, c in acc.items()}
    return truncate_form(acc, weights, T)


def epsilon_hkr(chain: Mapping, ring: MonomialRing | DgAlgebra) -> Form:
    """``phi_0[phi_1|...|phi_n] -> (1/n!) phi_0 dphi_1 ^ ... ^ dphi_n``.

    Keys index monomials of ``ring``.  A :class:`DgAlgebra` argument is only
    accepted to reject non-commutative or odd input explicitly.
    """
    if isinstance(ring, DgAlgebra):
        a = ring
        odd = not a.is_purely_even()
        noncomm = any(a.mul[i][j] != a.mul[j][i] for i in range(a.dim) for j in range(a.dim))
        if odd or noncomm or a.diff and any(a.diff):
            raise NonCommutativeInput(f"{a.name} is not a commutative even algebra")
        raise TypeError("epsilon_hkr needs the MonomialRing describing the algebra")
    out: Form = {}
    mons = ring.monomials
    for key, c in chain.items():
        w = _eps_polys([{mons[i]: 1} for i in key], ring.k, ring.weights, ring.T)
        form_add(out, w, c)
    return out


def supertrace_map(chain: Mapping, Af: MatrixFactorizationAlgebra) -> dict:
    """``str(phi_0 T_0[phi_1 T_1|...]) = (-1)^{sum_{i odd}|T_i|} str(T_0...T_n) phi_0[phi_1|...]``.

    The output is a normalized chain over ``Af.ring`` (keys of monomial indices).
    """
    End = Af.end
    out: dict = {}
    for key, c in chain.items():
        monos, ends = zip(*(Af.parts(i) for i in key))
        if any(m == 0 for m in monos[1:]):
            continue
        sign = sum(End.parity[e] for e in ends[1::2]) & 1
        M = End.matrices[ends[0]]
        for e in ends[1:]:
            M = End.matmul(M, End.matrices[e])
        st = End.supertrace(M)
        if st:
            _padd(out, tuple(monos), -st * c if sign else st * c)
    return out


class TraceMap:
    """The trace map ``I = eps . str . exp(-b(D))`` to truncated forms.

    Works on structural chain entries ``(poly, matrix, parity)``.  ``eps``
    vanishes in tensor degree above the number of variables, so only that
    many insertions of ``D`` ever contribute and the map is exact.
    """

    def __init__(self, k: int, weights, T: int, end: EndP, D_terms, f: Mapping):
        self.k, self.weights, self.T = k, tuple(weights), T
        self.end = end
        self.D_terms = [(dict(p), M) for p, M in D_terms]
        self.f = dict(f)

    def integrate(self, entries: Sequence[tuple[Mapping, Mapping, int]]) -> Form:
        n = len(entries) - 1
        out: Form = {}
        if n > self.k:
            return out
        End = self.end
        for j in range(self.k - n + 1):
            for gaps in itertools.combinations_with_replacement(range(n + 1), j):
                # gaps[g] = index of the entry that a D slot follows
                for choice in itertools.product(self.D_terms, repeat=j):
                    seq = []
                    ci = 0
                    for pos, ent in enumerate(entries):
                        seq.append(ent)
                        while ci < j and gaps[ci] == pos:
                            p, M = choice[ci]
                            seq.append((p, M, 1))
                            ci += 1
                    sign = sum(e[2] for e in seq[1::2]) + j
                    M = seq[0][1]
                    for e in seq[1:]:
                        M = End.matmul(M, e[1])
                        if not M:
                            break
                    st = End.supertrace(M) if M else 0
                    if not st:
                        continue
                    w = _eps_polys([e[0] for e in seq], self.k, self.weights, self.T)
                    form_add(out, w, -st if sign & 1 else st)
        return out

    def apply_entries_chain(self, chain: Mapping, entry) -> Form:
        out: Form = {}
        for key, c in chain.items():
            if len(key) - 1 > self.k:
                continue
            form_add(out, self.integrate([entry(i) for i in key]), c)
        return out

    # twisted differential on forms
    def minus_df(self, w: Mapping) -> Form:
        df = exact_form(self.f, self.k)
        return truncate_form({key: -c for key, c in wedge(df, w).items()}, self.weights, self.T)

    def d(self, w: Mapping) -> Form:
        return truncate_form(d_form(w, self.k), self.weights, self.T)


class AfTraceMap(TraceMap):
    """``I_f`` on normalized chains of ``A_f`` (keys of basis indices)."""

    def __init__(self, Af: MatrixFactorizationAlgebra, N: int):
        super().__init__(Af.f.k, Af.f.weights, Af.T, Af.end, Af.D_terms, Af.f.poly)
        self.Af = Af
        self.N = N
        self._memo: dict = {}

    def image(self, key) -> Form:
        r = self._memo.get(key)
        if r is None:
            r = self.integrate([self.Af.entry(i) for i in key]) if len(key) - 1 <= self.k else {}
            self._memo[key] = r
        return r

    def __call__(self, chain: Mapping) -> Form:
        out: Form = {}
        for key, c in chain.items():
            form_add(out, self.image(key), c)
        return out

    def slow(self, chain: Mapping) -> Form:
        """The same map as an explicit composite of the three stages."""
        from .hochschild import op_exp_neg_insertion

        Af = self.Af
        ex = op_exp_neg_insertion(Af.algebra, Af.D, min(self.N, self.k) + max(
            (len(k) - 1 for k in chain), default=0), NORMALIZED, signed=False)
        return epsilon_hkr(supertrace_map(ex(chain), Af), Af.ring)

    # -- verification ---------------------------------------------------------

    def check_chain_map(self, N: int | None = None) -> dict:
        """``I b = -df ^ I`` and ``I B = d I`` on all normalized keys up to degree N."""
        from .hochschild import op_B, op_b

        N = self.N if N is None else N
        a = self.Af.algebra
        b, B = op_b(a, NORMALIZED), op_B(a, NORMALIZED)
        checked = 0
        for n in range(N + 1):
            for key in enumerate_basis(a, n, NORMALIZED):
                checked += 1
                img = self.image(key)
                if self(b.image(key)) != self.minus_df(img):
                    return {"ok": False, "checked": checked, "witness": {"identity": "I b = -df I",
                                                                        "key": list(key)}}
                if n < N and self(B.image(key)) != self.d(img):
                    return {"ok": False, "checked": checked, "witness": {"identity": "I B = d I",
                                                                        "key": list(key)}}
        return {"ok": True, "checked": checked}

    def check_stages(self, N: int | None = None) -> dict:
        """The three stage intertwining relations, exactly, on safe degrees."""
        from .hochschild import op_B, op_b, op_b_mu, op_exp_neg_insertion, op_insertion

        N = self.N if N is None else N
        Af = self.Af
        a, a0 = Af.algebra, Af.algebra0
        R = Af.ring
        ra = R.algebra()
        ex = op_exp_neg_insertion(a, Af.D, N, NORMALIZED, signed=False)
        b_A, B_A = op_b(a, NORMALIZED), op_B(a, NORMALIZED)
        bmu0, B0 = op_b_mu(a0, NORMALIZED), op_B(a0, NORMALIZED)
        bf0 = op_insertion(a0, Af.f_element, True, NORMALIZED)
        bmuR, BR = op_b_mu(ra, NORMALIZED), op_B(ra, NORMALIZED)
        bfR = op_insertion(ra, R.to_vector(Af.f.poly), True, NORMALIZED)
        low = lambda ch, top: {k: c for k, c in ch.items() if len(k) - 1 <= top}
        res: dict = {}
        counts = {"exp": 0, "str": 0, "eps": 0}

        def fail(name, key):
            res[name] = {"ok": False, "witness": list(key)}

        for n in range(N + 1):
            for key in enumerate_basis(a, n, NORMALIZED):
                counts["exp"] += 1
                e_key = ex.image(key)
                lhs = low(ex(b_A.image(key)), N - 1)
                rhs = low(bmu0(e_key), N - 1)
                add = bf0(e_key)
                for k2, c in add.items():
                    if len(k2) - 1 <= N - 1:
                        _padd(rhs, k2, c)
                if lhs != rhs and "exp(-bD) b = (b_mu + b_f) exp(-bD)" not in res:
                    fail("exp(-bD) b = (b_mu + b_f) exp(-bD)", key)
                if n < N:
                    if low(ex(B_A.image(key)), N) != low(B0(e_key), N) and \
                            "exp(-bD) B = B exp(-bD)" not in res:
                        fail("exp(-bD) B = B exp(-bD)", key)
                    counts["str"] += 1
                    s = supertrace_map({key: 1}, Af)
                    lhs = supertrace_map(bmu0.image(key), Af)
                    for k2, c in supertrace_map(bf0.image(key), Af).items():
                        _padd(lhs, k2, c)
                    rhs = bmuR(s)
                    for k2, c in bfR(s).items():
                        _padd(rhs, k2, c)
                    if lhs != rhs and "str (b_mu + b_f) = (b_mu + b_f) str" not in res:
                        fail("str (b_mu + b_f) = (b_mu + b_f) str", key)
                    if supertrace_map(B0.image(key), Af) != BR(s) and "str B = B str" not in res:
                        fail("str B = B str", key)
        for n in range(N):
            for key in enumerate_basis(ra, n, NORMALIZED):
                counts["eps"] += 1
                e = epsilon_hkr({key: 1}, R)
                if epsilon_hkr(bmuR.image(key), R) and "eps b_mu = 0" not in res:
                    fail("eps b_mu = 0", key)
                if epsilon_hkr(bfR.image(key), R) != self.minus_df(e) and \
                        "eps b_f = -df eps" not in res:
                    fail("eps b_f = -df eps", key)
                if epsilon_hkr(BR.image(key), R) != self.d(e) and "eps B = d eps" not in res:
                    fail("eps B = d eps", key)
        names = ["exp(-bD) b = (b_mu + b_f) exp(-bD)", "exp(-bD) B = B exp(-bD)",
                 "str (b_mu + b_f) = (b_mu + b_f) str", "str B = B str", "eps b_mu = 0",
                 "eps b_f = -df eps", "eps B = d eps"]
        subs = {nm: res.get(nm, {"ok": True}) for nm in names}
        return {"ok": all(v["ok"] for v in subs.values()), "sub_results": subs, "checked": counts}


def build_If(Af: MatrixFactorizationAlgebra, T: int | None = None, N: int = 3) -> AfTraceMap:
    if T is not None and T != Af.T:
        raise ValueError("the trace map uses the truncation of A_f")
    return AfTraceMap(Af, N)


# ---------------------------------------------------------------------------
# forms on a product and the twisted de Rham complex


def wedge_map(w1: Mapping, w2: Mapping, vars1: Sequence[str], vars2: Sequence[str]) -> Form:
    """``omega' (x) omega'' -> omega' ^ omega''`` on the concatenated variables."""
    if set(vars1) & set(vars2):
        raise VariableClash(f"shared variables {sorted(set(vars1) & set(vars2))}")
    k1, k2 = len(vars1), len(vars2)
    a = {(e + (0,) * k2, S): c for (e, S), c in w1.items()}
    b = {((0,) * k1 + e, tuple(k1 + i for i in S)): c for (e, S), c in w2.items()}
    return wedge(a, b)


def all_forms(k: int, weights, T: int, degree: int | None = None) -> list:
    """Basis keys ``(exps, S)`` of forms with form weight ``<= T``."""
    out = []
    subsets = [tuple(c) for r in range(k + 1) for c in itertools.combinations(range(k), r)]
    for S in subsets:
        if degree is not None and len(S) != degree:
            continue
        rest = T - sum(weights[i] for i in S)
        if rest < 0:
            continue
        for e in itertools.product(*(range(rest // w + 1) for w in weights)):
            if _wdeg(e, weights) <= rest:
                out.append((e, S))
    return out


def check_wedge_intertwines(f: WeightedPoly, g: WeightedPoly, T: int) -> dict:
    """``(-d(f+g) + ud) ^ = ^ ((-df + ud) (x) 1 + 1 (x) (-dg + ud))`` on truncated forms.

    Checked separately on the u^0 part (multiplication by -df) and the u^1
    part (the de Rham differential), for all pairs of basis forms.
    """
    fg = direct_sum(f, g)
    w = fg.weights
    k = fg.k
    dfg = exact_form(fg.poly, k)
    df, dg = exact_form(f.poly, f.k), exact_form(g.poly, g.k)
    tr = lambda x: truncate_form(x, w, T)
    checked = 0
    for b1 in all_forms(f.k, f.weights, T):
        for b2 in all_forms(g.k, g.weights, T):
            checked += 1
            w1, w2 = {b1: 1}, {b2: 1}
            s = -1 if form_parity(b1) else 1
            joint = wedge_map(w1, w2, f.variables, g.variables)
            lhs0 = tr({kk: -c for kk, c in wedge(dfg, joint).items()})
            rhs0 = wedge_map({kk: -c for kk, c in wedge(df, w1).items()}, w2,
                             f.variables, g.variables)
            form_add(rhs0, wedge_map(w1, wedge(dg, w2), f.variables, g.variables), -s)
            lhs1 = tr(d_form(joint, k))
            rhs1 = wedge_map(d_form(w1, f.k), w2, f.variables, g.variables)
            form_add(rhs1, wedge_map(w1, d_form(w2, g.k), f.variables, g.variables), s)
            if lhs0 != tr(rhs0) or lhs1 != tr(rhs1):
                return {"ok": False, "checked": checked, "witness": [repr(b1), repr(b2)]}
    return {"ok": True, "checked": checked}


class TwistedComplex:
    """``(Omega[u], -df ^ + u d)`` for quasi-homogeneous f, split by total weight.

    With ``u`` of weight ``d = deg f`` the differential is homogeneous of
    weight ``d``, so each piece ``u^j x^a dx_S`` of fixed total weight and form
    degree is finite dimensional and homology is computed exactly.
    """

    def __init__(self, f: WeightedPoly):
        if not f.is_quasi_homogeneous():
            raise NotQuasiHomogeneous(f"{f} is not quasi-homogeneous for weights {f.weights}")
        self.f = f
        self.k = f.k
        self.w = f.weights
        self.d = f.degree()
        self.df = exact_form(f.poly, f.k)
        self._pieces: dict = {}

    def piece(self, W: int, p: int) -> list:
        """Basis ``(j, (exps, S))`` standing for ``u^j x^exps dx_S`` of total weight W."""
        key = (W, p)
        r = self._pieces.get(key)
        if r is None:
            r = []
            if W >= 0 and 0 <= p <= self.k:
                for j in range(W // self.d + 1):
                    rest = W - j * self.d
                    for fk in all_forms(self.k, self.w, rest, p):
                        if form_weight(fk, self.w) == rest:
                            r.append((j, fk))
            self._pieces[key] = r
        return r

    def apply(self, j: int, form: Mapping) -> dict:
        """``(-df + ud)`` on ``u^j form``; result keyed by ``(power, form key)``."""
        out: dict = {}
        for kk, c in wedge(self.df, form).items():
            _padd(out, (j, kk), -c)
        for kk, c in d_form(form, self.k).items():
            _padd(out, (j + 1, kk), c)
        return out

    def matrix_rows(self, W: int, p: int) -> list[dict[int, Fraction]]:
        """Columns of the differential from piece (W, p) into piece (W + d, p + 1), as rows."""
        tgt = {b: i for i, b in enumerate(self.piece(W + self.d, p + 1))}
        rows = []
        for j, fk in self.piece(W, p):
            rows.append({tgt[b]: c for b, c in self.apply(j, {fk: 1}).items()})
        return rows

    def homology_dim(self, W: int, p: int) -> int:
        """dim of H^p in total weight W (over Q)."""
        dim = len(self.piece(W, p))
        out_rank = rank_of_rational_rows(self.matrix_rows(W, p)) if p < self.k else 0
        in_rank = rank_of_rational_rows(self.matrix_rows(W - self.d, p - 1)) if p > 0 else 0
        return dim - out_rank - in_rank

    def homology_dims(self, max_weight: int | None = None) -> list[int]:
        """Ranks over Q(u) of the homology in each form degree.

        The Q[u]-lattice is graded, so the rank is the sum over residues of
        the total weight modulo d of the stable dimensions at large weight;
        stability is confirmed by comparing weights W and W + d.
        """
        start = sum(self.d - w for w in self.w) + self.d if max_weight is None else max_weight
        dims = []
        for p in range(self.k + 1):
            tot = 0
            for r in range(self.d):
                W = start + r + p * self.d
                a, b = self.homology_dim(W, p), self.homology_dim(W + self.d, p)
                while a != b:
                    W += self.d
                    a, b = b, self.homology_dim(W + self.d, p)
                    if W > start + 20 * self.d:
                        raise NotFiniteWithinBound("homology dimensions do not stabilize")
                tot += a
            dims.append(tot)
        return dims

    # -- reduction to a basis of top-degree cohomology ------------------------

    def reduce(self, form_u: Mapping[int, Mapping], basis: Sequence[Mapping]) -> list[LaurentScalar]:
        """Coefficients ``c_i(u)`` with ``form_u = sum c_i basis_i`` modulo the image.

        ``form_u`` maps a power of u to a top-degree form; basis forms must be
        weight homogeneous.  Raises :class:`BasisNotFree` if the forms do not
        reduce uniquely.
        """
        k = self.k
        bw = []
        for b in basis:
            ws = {form_weight(kk, self.w) for kk in b}
            if len(ws) != 1 or any(len(S) != k for _, S in b):
                raise BasisNotFree("basis forms must be homogeneous top-degree forms")
            bw.append(ws.pop())
        by_weight: dict[int, dict] = {}
        for j, form in form_u.items():
            for kk, c in form.items():
                if len(kk[1]) != k:
                    raise ValueError("only top-degree forms can be reduced")
                W = form_weight(kk, self.w) + j * self.d
                _padd(by_weight.setdefault(W, {}), (j, kk), c)
        coeffs = [dict() for _ in basis]
        for W, vec in sorted(by_weight.items()):
            tgt = {b: i for i, b in enumerate(self.piece(W, k))}
            cols = [{tgt[b]: c for b, c in row_items} for row_items in
                    (self.apply(j, {fk: 1}).items() for j, fk in self.piece(W - self.d, k - 1))]
            bcols, bidx = [], []
            for i, (b, wb) in enumerate(zip(basis, bw)):
                if W >= wb and (W - wb) % self.d == 0:
                    j = (W - wb) // self.d
                    bcols.append({tgt[(j, kk)]: c for kk, c in b.items()})
                    bidx.append((i, j))
            r_img = rank_of_rational_rows(cols)
            if rank_of_rational_rows(cols + bcols) != r_img + len(bcols):
                raise BasisNotFree(f"basis forms are dependent in cohomology at weight {W}")
            eqs: dict[int, dict[int, Fraction]] = {}
            for c_i, col in enumerate(bcols + cols):
                for r, v in col.items():
                    eqs.setdefault(r, {})[c_i] = v
            rhs = {}
            for (j, kk), c in vec.items():
                rhs[tgt[(j, kk)]] = c
                eqs.setdefault(tgt[(j, kk)], {})
            sol = _solve_rational(list(eqs.items()), rhs, len(bcols) + len(cols))
            if sol is None:
                raise BasisNotFree(f"the basis does not span cohomology at weight {W}")
            for c_i, (i, j) in enumerate(bidx):
                v = sol.get(c_i, 0)
                if v:
                    coeffs[i][j] = coeffs[i].get(j, 0) + v
        return [LaurentScalar(c) for c in coeffs]


def milnor_basis(f: WeightedPoly, degree_bound: int | None = None) -> list[tuple[int, ...]]:
    """Monomial basis of ``O / (df/dx_1, ..., df/dx_k)`` by graded linear algebra.

    The quotient is computed weight by weight; it is finite once it vanishes on
    ``max(weights)`` consecutive weights, since every monomial of larger weight
    is a variable times a monomial already in the ideal.
    """
    if not f.is_quasi_homogeneous():
        raise NotQuasiHomogeneous(f"{f} is not quasi-homogeneous for weights {f.weights}")
    w, d, k = f.weights, f.degree(), f.k
    bound = degree_bound if degree_bound is not None else k * d + 2 * max(w)
    parts = [f.partial(i) for i in range(k)]
    run = 0
    basis: list[tuple[int, ...]] = []
    for W in range(bound + 1):
        monos = [e for e in itertools.product(*(range(W // wi + 1) for wi in w))
                 if _wdeg(e, w) == W]
        monos.sort(key=lambda e: tuple(-a for a in e))
        col = {e: i for i, e in enumerate(monos)}
        rows = []
        for i, p in enumerate(parts):
            mw = W - (d - w[i])
            if mw < 0 or not p:
                continue
            for m in itertools.product(*(range(mw // wi + 1) for wi in w)):
                if _wdeg(m, w) == mw:
                    rows.append({col[e]: c for e, c in poly_mul({m: 1}, p).items()})
        pivots = _pivot_columns(rows)
        std = [e for e in monos if col[e] not in pivots]
        if std:
            basis.extend(std)
            run = 0
        else:
            run += 1
            if run >= max(w):
                return basis
    raise NotFiniteWithinBound(f"Jacobian ideal of {f} does not saturate up to weight {bound}")


def _pivot_columns(rows: list[dict[int, Fraction]]) -> set[int]:
    pivots: dict[int, dict[int, Fraction]] = {}
    for row in rows:
        row = {c: Fraction(v) for c, v in row.items() if v}
        while row:
            col = min(row)
            if col in pivots:
                prow = pivots[col]
                fac = row[col]
                for c, v in prow.items():
                    nv = row.get(c, 0) - fac * v
                    if nv:
                        row[c] = nv
                    else:
                        row.pop(c, None)
                continue
            fac = row[col]
            pivots[col] = {c: v / fac for c, v in row.items()}
            break
    return set(pivots)


def milnor_forms(f: WeightedPoly, monomials: Sequence[tuple[int, ...]] | None = None) -> list[Form]:
    mons = milnor_basis(f) if monomials is None else monomials
    top = tuple(range(f.k))
    return [{(tuple(m), top): Fraction(1)} for m in mons]


def gm_connection_matrix(f: WeightedPoly, basis_forms: Sequence[Mapping] | None = None,
                         mode: str = "GM") -> list[list[LaurentScalar]]:
    """Matrix of ``d/du + f/u^2`` (``GM``) or ``d/du + f/u^2 - gamma/(2u)`` (``twisted``).

    Column j holds the coordinates of the connection applied to basis form j.
    """
    if mode not in ("GM", "twisted"):
        raise ValueError(f"unknown mode {mode!r}")
    cx = TwistedComplex(f)
    basis = list(basis_forms) if basis_forms is not None else milnor_forms(f)
    n = len(basis)
    mat = [[LaurentScalar() for _ in range(n)] for _ in range(n)]
    for j, b in enumerate(basis):
        coeffs = cx.reduce({0: poly_times_form(f.poly, b)}, basis)
        for i, c in enumerate(coeffs):
            mat[i][j] = c.shift(-2)
    if mode == "twisted":
        tate = LaurentScalar.monomial(Fraction(f.k, 2), -1)
        for i in range(n):
            mat[i][i] = mat[i][i] - tate
    return mat


def kronecker_sum(A: Sequence[Sequence[LaurentScalar]],
                  B: Sequence[Sequence[LaurentScalar]]) -> list[list[LaurentScalar]]:
    """``A (x) 1 + 1 (x) B`` in the product basis ordered ``(i, j) -> i * len(B) + j``."""
    na, nb = len(A), len(B)
    out = [[LaurentScalar() for _ in range(na * nb)] for _ in range(na * nb)]
    for i1 in range(na):
        for j1 in range(nb):
            for i2 in range(na):
                for j2 in range(nb):
                    v = LaurentScalar()
                    if j1 == j2:
                        v = v + A[i1][i2]
                    if i1 == i2:
                        v = v + B[j1][j2]
                    out[i1 * nb + j1][i2 * nb + j2] = v
    return out


# ---------------------------------------------------------------------------
# filtration


def filtration_level(chain: Mapping) -> int | None:
    """Largest p with the chain in F^p (terms of tensor degree >= p); None for 0."""
    degs = [len(k) - 1 for k, c in chain.items() if c]
    return min(degs) if degs else None


def in_filtration(chain: Mapping, p: int) -> bool:
    lvl = filtration_level(chain)
    return lvl is None or lvl >= p


# ---------------------------------------------------------------------------
# closed lifts of Milnor classes


def _graded_keys(A: MatrixFactorizationAlgebra, n: int, weight: int, grade: int,
                 parity: int) -> list[tuple[int, ...]]:
    """Normalized keys of degree n with given total weight, End grade and chain parity."""
    R, End = A.ring, A.end
    mw = [R.weight(e) for e in R.monomials]
    k = End.k
    out = []

    def rec(pos, acc, w, g):
        slots_left = n + 1 - pos
        if slots_left == 0:
            if w == weight and g == grade and \
                    (sum(A.algebra0.parity[i] for i in acc) + n) & 1 == parity:
                out.append(tuple(acc))
            return
        if abs(grade - g) > k * slots_left:
            return
        for m in range(R.dim):
            if w + mw[m] > weight:
                continue
            for e in range(End.dim):
                idx = A.index(m, e)
                if pos > 0 and idx == A.unit:
                    continue
                acc.append(idx)
                rec(pos + 1, acc, w + mw[m], g + End.grade[e])
                acc.pop()

    rec(0, [], 0, 0)
    return out


def _chain_weight(A: MatrixFactorizationAlgebra, key) -> int:
    return sum(A.ring.weight(A.ring.monomials[A.parts(i)[0]]) for i in key)


def closed_extension(f: WeightedPoly, mono: tuple[int, ...], N: int, rule: str = "lowest"
                     ) -> dict:
    """A (b_mu + b_f + uB)-closed element extending the lift of ``mono dx_1...dx_k``.

    Steps: solve for a b_mu-closed chain over ``O`` of degree k with HKR image
    ``mono dx``; tensor every slot with the idempotent e; then solve
    ``b_mu c_{q+1} = -(b_f + uB) c_{q-1}`` upwards, using that b_mu-closed
    chains above degree k are exact.  The truncation weight is chosen so that
    no product involved is ever cut off.
    """
    from .hochschild import op_B, op_b_mu, op_insertion

    k, w, d = f.k, f.weights, f.degree()
    W0 = _wdeg(mono, w) + sum(w)
    T_ext = max(W0 + d * max(0, (N - k) // 2), d)
    A = build_Af(f, T_ext, rule, check=False)
    R = A.ring
    ra = R.algebra()
    bmuR = op_b_mu(ra, NORMALIZED)
    # 1. b_mu-closed chain over O with the prescribed HKR image
    cand = [key for key in enumerate_basis(ra, k, NORMALIZED)
            if sum(R.weight(R.monomials[i]) for i in key) == W0]
    eqs: dict = {}
    for ci, key in enumerate(cand):
        for k2, c in bmuR.image(key).items():
            eqs.setdefault(("b", k2), {})[ci] = c
        for fk, c in epsilon_hkr({key: 1}, R).items():
            eqs.setdefault(("eps", fk), {})[ci] = c
    target = {(tuple(mono), tuple(range(k))): Fraction(1)}
    rhs = {("eps", fk): c for fk, c in target.items()}
    for key in rhs:
        eqs.setdefault(key, {})
    sol = _solve_rational(list(eqs.items()), rhs, len(cand))
    if sol is None:
        raise StepFailedError("d", {"reason": "no b_mu-closed HKR preimage", "mono": list(mono)})
    fbold = {cand[ci]: v for ci, v in sol.items()}
    # 2. tensor with the idempotent
    e_idx = A.end.unit_index[(0, 0)]
    fdot = {tuple(A.index(m, e_idx) for m in key): c for key, c in fbold.items()}
    # 3. climb the filtration
    a0 = A.algebra0
    bmu, B = op_b_mu(a0, NORMALIZED), op_B(a0, NORMALIZED)
    bf = op_insertion(a0, A.f_element, True, NORMALIZED)
    comps: dict[int, dict[int, dict]] = {k: {0: fdot}}
    par = (key_parity(a0.parity, next(iter(fdot))) if fdot else 0)
    solves = []
    for q in range(k + 1, N, 2):
        prev = comps.get(q - 1, {})
        obstruction: dict[int, dict] = {}
        for p, ch in prev.items():
            for k2, c in bf(ch).items():
                _padd(obstruction.setdefault(p, {}), k2, -c)
            for k2, c in B(ch).items():
                _padd(obstruction.setdefault(p + 1, {}), k2, -c)
        new: dict[int, dict] = {}
        for p, rhs_chain in obstruction.items():
            if not rhs_chain:
                continue
            wts = {_chain_weight(A, kk) for kk in rhs_chain}
            if len(wts) != 1:
                raise StepFailedError("d", {"reason": "inhomogeneous obstruction"})
            wt = wts.pop()
            keys = _graded_keys(A, q + 1, wt, 0, par)
            eqs = {}
            for ci, key in enumerate(keys):
                for k2, c in bmu.image(key).items():
                    eqs.setdefault(k2, {})[ci] = c
            for k2 in rhs_chain:
                eqs.setdefault(k2, {})
            sol = _solve_rational(list(eqs.items()), rhs_chain, len(keys))
            solves.append({"degree": q + 1, "u_power": p, "unknowns": len(keys)})
            if sol is None:
                raise StepFailedError("d", {"reason": "obstruction is not b_mu-exact",
                                            "degree": q, "u_power": p})
            new[p] = {keys[ci]: v for ci, v in sol.items()}
        if new:
            comps[q + 1] = new
    ext: dict[int, dict] = {}
    for deg, byp in comps.items():
        for p, ch in byp.items():
            for kk, c in ch.items():
                _padd(ext.setdefault(p, {}), kk, c)
    return {"algebra": A, "chain": ext, "fdot": fdot, "fbold": fbold, "T": T_ext,
            "solves": solves, "mono": tuple(mono)}


class StepFailedError(RuntimeError):
    """Internal signal carrying the step name and a witness."""

    def __init__(self, step, witness):
        super().__init__(f"step {step}: {witness}")
        self.step, self.witness = step, witness


def check_closed_extension(ext: dict, N: int) -> dict:
    """Closedness below degree N and the HKR image of the extension."""
    from .hochschild import op_B, op_b_mu, op_insertion

    A = ext["algebra"]
    a0 = A.algebra0
    bmu, B = op_b_mu(a0, NORMALIZED), op_B(a0, NORMALIZED)
    bf = op_insertion(a0, A.f_element, True, NORMALIZED)
    total: dict[int, dict] = {}
    for p, ch in ext["chain"].items():
        for op, shift in ((bmu, 0), (bf, 0), (B, 1)):
            for kk, c in op(ch).items():
                if len(kk) - 1 <= N - 1:
                    _padd(total.setdefault(p + shift, {}), kk, c)
    closed = all(not v for v in total.values())
    image = {}
    for p, ch in ext["chain"].items():
        w = epsilon_hkr(supertrace_map(ch, A), A.ring)
        if w:
            image[p] = w
    target = {(ext["mono"], tuple(range(A.f.k))): 1}
    k = A.f.k
    lvl_ok = all(in_filtration(ch, k) for ch in ext["chain"].values())
    diff = {}
    for p, ch in ext["chain"].items():
        rest = {kk: c for kk, c in ch.items() if not (p == 0 and kk in ext["fdot"])}
        if p == 0:
            for kk, c in ext["fdot"].items():
                v = ch.get(kk, 0) - c
                if v:
                    rest[kk] = v
        diff[p] = rest
    higher_ok = all(in_filtration(ch, k + 1) for ch in diff.values())
    return {"closed_below_N": closed, "hkr_image_ok": image == {0: target},
            "in_F_k": lvl_ok, "difference_in_F_k+1": higher_ok,
            "ok": closed and image == {0: target} and lvl_ok and higher_ok}


# ---------------------------------------------------------------------------
# the Thom-Sebastiani comparison


class _TSContext:
    """Shared data for the diagram checks of a pair (f, g)."""

    def __init__(self, f: WeightedPoly, g: WeightedPoly, T: int, N: int, rule: str):
        from .kunneth import Kunneth

        if set(f.variables) & set(g.variables):
            raise VariableClash(f"shared variables {sorted(set(f.variables) & set(g.variables))}")
        self.f, self.g, self.T, self.N, self.rule = f, g, T, N, rule
        self.Af = build_Af(f, T, rule, check=False)
        self.Ag = build_Af(g, T, rule, check=False)
        self.iota = build_iota(self.Af, self.Ag)
        self.tgt = self.iota.target
        self.fg = self.tgt.f
        self.K = Kunneth(self.Af.algebra, self.Ag.algebra, NORMALIZED)
        self.If = AfTraceMap(self.Af, N)
        self.Ig = AfTraceMap(self.Ag, N)
        self.Ifg = TraceMap(self.fg.k, self.fg.weights, T, self.tgt.end, self.tgt.D_terms,
                            self.fg.poly)
        self.Rx, self.Ry, self.Rxy = self.Af.ring, self.Ag.ring, self.tgt.ring

    def bi_keys(self, total: int, a1=None, a2=None):
        a1 = a1 or self.Af.algebra
        a2 = a2 or self.Ag.algebra
        for n in range(total + 1):
            b2 = enumerate_basis(a2, total - n, NORMALIZED)
            for k1 in enumerate_basis(a1, n, NORMALIZED):
                for k2 in b2:
                    yield k1, k2

    def wedge_xy(self, w1: Mapping, w2: Mapping) -> Form:
        return truncate_form(wedge_map(w1, w2, self.f.variables, self.g.variables),
                             self.fg.weights, self.T)

    def ring_map(self, t: int) -> int | None:
        """The multiplication map O_x (x) O_y -> O_xy on tensor basis index t."""
        i, j = divmod(t, self.Ry.dim)
        e = self.Rx.monomials[i] + self.Ry.monomials[j]
        return self.Rxy.index.get(e)

    def ring_chain_map(self, chain: Mapping) -> dict:
        out: dict = {}
        for key, c in chain.items():
            img = tuple(self.ring_map(t) for t in key)
            if None in img or any(i == 0 for i in img[1:]):
                continue
            _padd(out, img, c)
        return out

    def structural_str(self, chain: Mapping) -> dict:
        """str . C(iota) on a chain over the tensor algebra, as a chain over O_xy."""
        End = self.tgt.end
        R = self.Rxy
        out: dict = {}
        for key, c in chain.items():
            ents = [self.iota.entry(t) for t in key]
            if any(not p for p, _, _ in ents):
                continue
            sign = sum(e[2] for e in ents[1::2]) & 1
            M = ents[0][1]
            for e in ents[1:]:
                M = End.matmul(M, e[1])
            st = End.supertrace(M) if M else 0
            if not st:
                continue
            (m0,) = ents[0][0]
            idx = [R.index[m0]] + [R.index[next(iter(p))] for p, _, _ in ents[1:]]
            if any(i == 0 for i in idx[1:]):
                continue
            _padd(out, tuple(idx), -st * c if sign else st * c)
        return out


def _first_mismatch(name: str, checked: int, key) -> dict:
    return {"ok": False, "checked": checked, "witness": {"identity": name, "bikey": repr(key)}}


def _check_a(ctx: _TSContext) -> dict:
    from .hochschild import op_insertion
    from .kunneth import Kunneth

    K, N = ctx.K, ctx.N
    res = {}
    # (a1) b(D_f (x) 1 + 1 (x) D_g) sh = sh (b(D_f) (x) 1 + 1 (x) b(D_g))
    m2 = ctx.Ag.dim
    dsum: dict = {}
    for i, c in ctx.Af.D.items():
        _padd(dsum, i * m2 + ctx.Ag.unit, c)
    for j, c in ctx.Ag.D.items():
        _padd(dsum, ctx.Af.unit * m2 + j, c)
    bD = op_insertion(K.t, dsum, False, NORMALIZED)
    rhs_op = K.tot(op_insertion(ctx.Af.algebra, ctx.Af.D, False, NORMALIZED),
                   op_insertion(ctx.Ag.algebra, ctx.Ag.D, False, NORMALIZED))
    sh = K.sh()
    checked = 0
    r = {"ok": True}
    for total in range(N):
        for bk in ctx.bi_keys(total):
            checked += 1
            if bD(sh.image(bk)) != sh(rhs_op.image(bk)):
                r = _first_mismatch("b(D) sh = sh b(D)", checked, bk)
                break
        if not r["ok"]:
            break
    r.setdefault("checked", checked)
    res["b(D_f+g) sh = sh (b(D_f) x 1 + 1 x b(D_g))"] = r
    # (a2) str . C(iota) . sh = C(mult) . sh . (str (x) str)
    KR = Kunneth(ctx.Rx.algebra(), ctx.Ry.algebra(), NORMALIZED)
    shR = KR.sh()
    checked = 0
    r = {"ok": True}
    for total in range(N + 1):
        for k1, k2 in ctx.bi_keys(total, ctx.Af.algebra0, ctx.Ag.algebra0):
            checked += 1
            lhs = ctx.structural_str(sh.image((k1, k2)))
            s1 = supertrace_map({k1: 1}, ctx.Af)
            s2 = supertrace_map({k2: 1}, ctx.Ag)
            rhs: dict = {}
            for a, ca in s1.items():
                for b, cb in s2.items():
                    for kk, c in ctx.ring_chain_map(shR.image((a, b))).items():
                        _padd(rhs, kk, ca * cb * c)
            if lhs != rhs:
                r = _first_mismatch("str sh = sh (str x str)", checked, (k1, k2))
                break
        if not r["ok"]:
            break
    r.setdefault("checked", checked)
    res["str sh = sh (str x str)"] = r
    # (a3) eps . C(mult) . sh = wedge . (eps (x) eps)
    checked = 0
    r = {"ok": True}
    for total in range(N + 1):
        for k1, k2 in ctx.bi_keys(total, ctx.Rx.algebra(), ctx.Ry.algebra()):
            checked += 1
            lhs = epsilon_hkr(ctx.ring_chain_map(shR.image((k1, k2))), ctx.Rxy)
            rhs = ctx.wedge_xy(epsilon_hkr({k1: 1}, ctx.Rx), epsilon_hkr({k2: 1}, ctx.Ry))
            if lhs != rhs:
                r = _first_mismatch("eps sh = wedge (eps x eps)", checked, (k1, k2))
                break
        if not r["ok"]:
            break
    r.setdefault("checked", checked)
    res["eps sh = wedge (eps x eps)"] = r
    return res


def _check_b(ctx: _TSContext) -> dict:
    sh = ctx.K.sh()
    checked = 0
    nonzero = 0
    for total in range(ctx.N + 1):
        for k1, k2 in ctx.bi_keys(total):
            checked += 1
            if total > ctx.fg.k:
                # both sides vanish: I kills tensor degree above the number of
                # variables and sh preserves tensor degree; evaluate anyway
                lhs = ctx.Ifg.apply_entries_chain(sh.image((k1, k2)), ctx.iota.entry)
                rhs = ctx.wedge_xy(ctx.If.image(k1), ctx.Ig.image(k2))
            else:
                lhs = truncate_form(ctx.Ifg.apply_entries_chain(sh.image((k1, k2)),
                                                                ctx.iota.entry),
                                    ctx.fg.weights, ctx.T)
                rhs = ctx.wedge_xy(ctx.If.image(k1), ctx.Ig.image(k2))
            if lhs != rhs:
                return _first_mismatch("I iota sh = wedge (I x I)", checked, (k1, k2))
            nonzero += bool(lhs)
    return {"ok": True, "checked": checked, "nonzero_images": nonzero}


def _check_c(ctx: _TSContext) -> dict:
    Sh = ctx.K.Sh()
    K = ctx.fg.k
    checked = 0
    min_shift = None
    for k1, k2 in ctx.bi_keys(K):
        checked += 1
        img = Sh.image((k1, k2))
        lvl = filtration_level(img)
        if lvl is not None:
            shift = lvl - (len(k1) + len(k2) - 2)
            min_shift = shift if min_shift is None else min(min_shift, shift)
        if ctx.Ifg.apply_entries_chain(img, ctx.iota.entry):
            return _first_mismatch("I iota Sh (F^p x F^q) = 0, p + q >= k + l", checked, (k1, k2))
    ok = min_shift is None or min_shift >= 1
    return {"ok": ok, "checked": checked, "p+q": K, "min_filtration_shift": min_shift}


def _series_unit(lhs: Sequence[LaurentScalar], rhs: Sequence[LaurentScalar], K: int):
    """lambda in Q[u]/(u^K) with lhs = lambda * rhs, or None."""
    def trunc(v):
        return [v.coeff(i) for i in range(K)]

    L = [trunc(v) for v in lhs]
    Rr = [trunc(v) for v in rhs]
    piv = next((i for i, v in enumerate(Rr) if v[0]), None)
    if piv is None:
        return None
    r, l = Rr[piv], L[piv]
    lam = [Fraction(0)] * K
    for n in range(K):
        s = l[n] - sum((lam[i] * r[n - i] for i in range(n)), Fraction(0))
        lam[n] = s / r[0]
    for lv, rv in zip(L, Rr):
        prod = [sum((lam[i] * rv[n - i] for i in range(n + 1)), Fraction(0)) for n in range(K)]
        if prod != lv:
            return None
    if not lam[0]:
        return None
    return lam


def ts_diagram_check(f: WeightedPoly, g: WeightedPoly, T: int | None = None, N: int = 3,
                     rule: str = "lowest", K_u: int = 3, steps: str = "abcde",
                     raise_on_failure: bool = False):
    """Run the Thom-Sebastiani diagram checks (a)-(e) plus the connection comparison."""
    from .connection import StepFailed, StructuredReport

    for h, name in ((f, "f"), (g, "g")):
        if not h.is_quasi_homogeneous():
            raise NotQuasiHomogeneous(f"{name} = {h} is not quasi-homogeneous")
    T = max(f.degree(), g.degree()) if T is None else T
    ctx = _TSContext(f, g, T, N, rule)
    rep = StructuredReport((str(f), str(g)))

    def record(step, passed, /, **info):
        info.pop("ok", None)
        rep.add(step, passed, **info)
        if not passed and raise_on_failure:
            raise StepFailed(step, info)

    rep.certificates["parameters"] = {"T": T, "N": N, "rule": rule, "K_u": K_u,
                                      "dims": [ctx.Af.dim, ctx.Ag.dim, ctx.tgt.dim]}
    if "a" in steps:
        subs = _check_a(ctx)
        record("a: sh intertwines b(D), str and eps", all(v["ok"] for v in subs.values()),
               sub_results=subs)
    if "b" in steps:
        r = _check_b(ctx)
        record("b: chain-level square I iota sh = wedge (I x I)", r["ok"], **r)
    if "c" in steps:
        r = _check_c(ctx)
        record("c: filtration vanishing of I iota Sh", r["ok"], **r)
    exts: dict = {}
    if "d" in steps or "e" in steps:
        subs = {}
        ok = True
        for h, name in ((f, "f"), (g, "g")):
            exts[name] = []
            for mono in milnor_basis(h):
                try:
                    ext = closed_extension(h, mono, N, rule)
                    chk = check_closed_extension(ext, N)
                except StepFailedError as exc:
                    chk = {"ok": False, "witness": exc.witness}
                    ext = None
                exts[name].append(ext)
                subs[f"{name}:{mono}"] = {**chk, "T_ext": ext["T"] if ext else None,
                                          "solves": ext["solves"] if ext else None}
                ok = ok and chk["ok"]
        if "d" in steps:
            record("d: closed extensions of the Milnor classes", ok, sub_results=subs)
    if "e" in steps:
        r = _check_e(f, g, exts, N, rule, K_u)
        record("e: homology classes of the two paths agree up to a unit", r["ok"], **r)
    # connection matrices transported through the wedge map
    fg_q = direct_sum(f, g, rescale=True)
    mf, mg = milnor_forms(f), milnor_forms(g)
    basis = [wedge_map(a, b, f.variables, g.variables) for a in mf for b in mg]
    gm = {}
    ok = True
    for mode in ("GM", "twisted"):
        direct = gm_connection_matrix(fg_q, basis, mode)
        summed = kronecker_sum(gm_connection_matrix(f, mf, mode), gm_connection_matrix(g, mg, mode))
        same = summed == direct
        gm[mode] = {"equal": same, "direct": [[str(x) for x in row] for row in direct]}
        ok = ok and same
    mu = (len(mf), len(mg), len(basis))
    record("connection matrices: wedge transports nabla_f (x) 1 + 1 (x) nabla_g", ok,
           milnor_numbers=list(mu), matrices=gm)
    return rep


def _check_e(f: WeightedPoly, g: WeightedPoly, exts: dict, N: int, rule: str, K_u: int) -> dict:
    """Push products of closed lifts through both paths and compare classes."""
    from .hochschild import op_exp_neg_insertion

    if any(e is None for lst in exts.values() for e in lst):
        return {"ok": False, "reason": "missing closed extensions"}
    T = max(e["T"] for lst in exts.values() for e in lst)
    ctx = _TSContext(f, g, T, N, rule)
    k_tot = ctx.fg.k
    sh, Sh = ctx.K.sh(), ctx.K.Sh()
    fg_q = direct_sum(f, g, rescale=True)
    cx = TwistedComplex(fg_q)
    basis = [wedge_map(a, b, f.variables, g.variables) for a in milnor_forms(f)
             for b in milnor_forms(g)]

    def transport(ext, A: MatrixFactorizationAlgebra):
        """exp(b(D)) of an extension computed at its own truncation, moved to A."""
        src = ext["algebra"]
        mp = {}
        for i in range(src.dim):
            m, e = src.parts(i)
            mono = src.ring.monomials[m]
            mp[i] = A.index(A.ring.index[mono], e) if mono in A.ring.index else None
        negD = {kk: -c for kk, c in A.D.items()}
        ex = op_exp_neg_insertion(A.algebra, negD, k_tot + 1, NORMALIZED)
        out: dict[int, dict] = {}
        for p, ch in ext["chain"].items():
            moved: dict = {}
            for key, c in ch.items():
                if len(key) - 1 > k_tot:
                    continue
                img = tuple(mp[i] for i in key)
                if None not in img:
                    _padd(moved, img, c)
            out[p] = {kk: c for kk, c in ex(moved).items() if len(kk) - 1 <= k_tot}
        return out

    pairs = []
    ok = True
    for i, ef in enumerate(exts["f"]):
        cf = transport(ef, ctx.Af)
        for j, eg in enumerate(exts["g"]):
            cg = transport(eg, ctx.Ag)
            top: dict[int, Form] = {}
            bottom: dict[int, Form] = {}
            for p1, ch1 in cf.items():
                for p2, ch2 in cg.items():
                    for k1, c1 in ch1.items():
                        for k2, c2 in ch2.items():
                            c = c1 * c2
                            s = sh.image((k1, k2))
                            form_add(top.setdefault(p1 + p2, {}),
                                     ctx.Ifg.apply_entries_chain(s, ctx.iota.entry), c)
                            S = Sh.image((k1, k2))
                            form_add(top.setdefault(p1 + p2 + 1, {}),
                                     ctx.Ifg.apply_entries_chain(S, ctx.iota.entry), c)
                            form_add(bottom.setdefault(p1 + p2, {}),
                                     ctx.wedge_xy(ctx.If.image(k1), ctx.Ig.image(k2)), c)
            top = {p: truncate_form(w, ctx.fg.weights, T) for p, w in top.items()}
            top = {p: w for p, w in top.items() if w}
            bottom = {p: w for p, w in bottom.items() if w}
            lhs = cx.reduce(top, basis)
            rhs = cx.reduce(bottom, basis)
            lam = _series_unit(lhs, rhs, K_u)
            pairs.append({"classes": [i, j], "top": [str(x) for x in lhs],
                          "bottom": [str(x) for x in rhs],
                          "unit": None if lam is None else [str(x) for x in lam]})
            ok = ok and lam is not None
    return {"ok": ok, "pairs": pairs, "T": T}
