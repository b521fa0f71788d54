"""Hochschild, negative cyclic and periodic cyclic homology of truncated complexes.

Chains are restricted to tensor degree at most N.  The degree filtration is
stable under ``b`` but ``B`` raises the degree, so the naive truncation of
``b + uB`` does not square to zero in the top degree.  The complex used here
is the largest subcomplex of the truncation that contains all lower degrees,
namely ``C_{<N} + ker(B restricted to C_N)``.  The kernel splits into small
blocks (chains related by cyclic rotation), each solved exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .dgalg import DgAlgebra
from .exactnum import LaurentScalar
from .hochschild import NORMALIZED, enumerate_basis, key_parity, op_B, op_b
from .linalg import (FiniteComplex, SparseMatrix, homology_dims, homology_over_truncated_series,
                     rank_over_Q)

__all__ = ["ComplexTooLarge", "TruncatedCyclicComplex", "HomologyResult", "hochschild_homology",
           "periodic_homology", "negative_homology", "compute_homology", "MODES"]

MODES = ("hochschild", "negative", "periodic")
DEFAULT_MAX_DIM = 20000


class ComplexTooLarge(ValueError):
    """The truncated complex exceeds the configured dimension bound."""


def _rref(cols: list[dict], rows: list) -> tuple[list[int], dict[int, dict[int, Fraction]]]:
    """Reduced row echelon form of the matrix with the given sparse columns.

    Returns the pivot columns and, for every pivot column p, the row that
    expresses x_p in terms of the free columns: ``x_p = -sum row[f] x_f``.
    """
    mat = [{j: Fraction(col[r]) for j, col in enumerate(cols) if col.get(r)} for r in rows]
    pivots: list[int] = []
    prow: dict[int, dict[int, Fraction]] = {}
    for j in range(len(cols)):
        r = next((i for i, row in enumerate(mat) if row.get(j)), None)
        if r is None:
            continue
        row = mat.pop(r)
        piv = row[j]
        row = {k: v / piv for k, v in row.items()}
        for other in list(prow.values()) + mat:
            c = other.get(j)
            if c:
                for k, v in row.items():
                    nv = other.get(k, 0) - c * v
                    if nv:
                        other[k] = nv
                    else:
                        other.pop(k, None)
        pivots.append(j)
        prow[j] = row
    return pivots, prow


def _components(keys: list, images: list[dict]) -> list[list[int]]:
    parent = list(range(len(keys)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict = {}
    for j, img in enumerate(images):
        for k in img:
            if k in owner:
                ra, rb = find(owner[k]), find(j)
                if ra != rb:
                    parent[ra] = rb
            else:
                owner[k] = j
    groups: dict[int, list[int]] = {}
    for j in range(len(keys)):
        groups.setdefault(find(j), []).append(j)
    return list(groups.values())


class TruncatedCyclicComplex:
    """Basis and differentials of ``C_{<N} + ker(B | C_N)`` for one algebra.

    With ``cyclic=False`` the whole of ``C_{<=N}`` is kept; that is a
    subcomplex for ``b`` alone (``b`` never raises the tensor degree) but not
    for ``b + uB``.
    """

    def __init__(self, a: DgAlgebra, N: int, flavor: str = NORMALIZED,
                 max_dim: int = DEFAULT_MAX_DIM, cyclic: bool = True):
        self.a, self.N, self.flavor, self.cyclic = a, N, flavor, cyclic
        self.b, self.B = op_b(a, flavor), op_B(a, flavor)
        sizes = [len(enumerate_basis(a, n, flavor)) for n in range(N + 1)]
        if sum(sizes) > max_dim:
            raise ComplexTooLarge(f"truncated complex has {sum(sizes)} basis chains "
                                  f"(bound {max_dim})")
        self.low = [k for n in range(N if cyclic else N + 1)
                    for k in enumerate_basis(a, n, flavor)]
        top = enumerate_basis(a, N, flavor) if cyclic else []
        images = [self.B.image(k) for k in top]
        # kernel vectors of B on the top degree, one per free column of each block
        self.kernel: list[dict] = []
        self.free_key: list[tuple] = []
        for comp in _components(top, images):
            cols = [images[j] for j in comp]
            rows = sorted({k for c in cols for k in c})
            pivots, prow = _rref(cols, rows)
            for f in range(len(comp)):
                if f in prow:
                    continue
                vec = {top[comp[f]]: Fraction(1)}
                for p in pivots:
                    c = prow[p].get(f)
                    if c:
                        vec[top[comp[p]]] = -c
                self.kernel.append(vec)
                self.free_key.append(top[comp[f]])
        self.free_index = {k: i for i, k in enumerate(self.free_key)}
        par = a.parity
        self.vectors = [{k: Fraction(1)} for k in self.low] + self.kernel
        self.parity = [key_parity(par, k) for k in self.low] + \
                      [key_parity(par, k) for k in self.free_key]
        self.low_index = {k: i for i, k in enumerate(self.low)}
        self.sizes = sizes

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def _coords(self, chain: dict) -> dict[int, Fraction]:
        """Coordinates of a chain of the subcomplex in the chosen basis."""
        out: dict[int, Fraction] = {}
        nlow = len(self.low)
        for k, c in chain.items():
            if k in self.low_index:
                out[self.low_index[k]] = c
            elif k in self.free_index:
                out[nlow + self.free_index[k]] = c
        return out

    def _apply(self, op, vec: dict) -> dict:
        res: dict = {}
        for k, c in vec.items():
            for k2, c2 in op.image(k).items():
                if len(k2) - 1 > self.N:
                    continue
                v = res.get(k2, 0) + c * c2
                if v:
                    res[k2] = v
                else:
                    res.pop(k2)
        return res

    def matrices(self, with_B: bool) -> FiniteComplex:
        """The Z/2-graded complex with differential ``b`` or ``b + uB``."""
        if with_B and not self.cyclic:
            raise ValueError("b + uB needs the cyclic truncation")
        even = [i for i, p in enumerate(self.parity) if p == 0]
        odd = [i for i, p in enumerate(self.parity) if p == 1]
        pos = {}
        for lst in (even, odd):
            for r, i in enumerate(lst):
                pos[i] = r
        e_eo: dict = {}
        e_oe: dict = {}
        for j, vec in enumerate(self.vectors):
            target = e_eo if self.parity[j] == 0 else e_oe
            for i, c in self._coords(self._apply(self.b, vec)).items():
                target[(pos[i], pos[j])] = LaurentScalar.const(c)
            if with_B:
                for i, c in self._coords(self._apply(self.B, vec)).items():
                    cur = target.get((pos[i], pos[j]), LaurentScalar())
                    target[(pos[i], pos[j])] = cur + LaurentScalar.monomial(c, 1)
        return FiniteComplex(len(even), len(odd), SparseMatrix(len(odd), len(even), e_eo),
                             SparseMatrix(len(even), len(odd), e_oe))


@dataclass
class HomologyResult:
    mode: str
    algebra: str
    N: int
    flavor: str
    even: int | None = None
    odd: int | None = None
    per_degree: list | None = None
    structure: dict | None = None
    chain_dims: list = field(default_factory=list)
    caveat: str = ""

    def to_json(self) -> dict:
        out = {"mode": self.mode, "algebra": self.algebra, "N": self.N, "flavor": self.flavor,
               "chain_dims": self.chain_dims, "caveat": self.caveat}
        if self.even is not None:
            out["dims"] = {"even": self.even, "odd": self.odd}
        if self.per_degree is not None:
            out["per_degree"] = self.per_degree
        if self.structure is not None:
            out["structure"] = self.structure
        return out


_CAVEAT_HH = ("computed on chains of tensor degree <= N; classes in degree N are windowed "
              "(boundaries from degree N + 1 are not seen)")
_CAVEAT = ("computed on chains of tensor degree <= N (top degree restricted to ker B); "
           "dimensions are windowed values, not stable-range statements")


def _per_degree_hochschild(a: DgAlgebra, N: int, flavor: str) -> list[dict]:
    """Per tensor degree Hochschild homology when the differential of A vanishes."""
    b = op_b(a, flavor)
    bases = [enumerate_basis(a, n, flavor) for n in range(N + 1)]
    ranks = [0] * (N + 2)
    for n in range(1, N + 1):
        idx = {k: i for i, k in enumerate(bases[n - 1])}
        ent = {}
        for j, k in enumerate(bases[n]):
            for k2, c in b.image(k).items():
                ent[(idx[k2], j)] = c
        ranks[n] = rank_over_Q(SparseMatrix(len(bases[n - 1]), len(bases[n]), ent))
    return [{"degree": n, "dim": len(bases[n]) - ranks[n] - ranks[n + 1],
             "windowed": n == N} for n in range(N + 1)]


def hochschild_homology(a: DgAlgebra, N: int, flavor: str = NORMALIZED,
                        max_dim: int = DEFAULT_MAX_DIM) -> HomologyResult:
    C = TruncatedCyclicComplex(a, N, flavor, max_dim, cyclic=False)
    even, odd = homology_dims(C.matrices(False), "over-Q")
    res = HomologyResult("hochschild", a.name, N, flavor, even, odd, chain_dims=C.sizes,
                         caveat=_CAVEAT_HH)
    if a.has_zero_differential():
        res.per_degree = _per_degree_hochschild(a, N, flavor)
    return res


def periodic_homology(a: DgAlgebra, N: int, flavor: str = NORMALIZED,
                      max_dim: int = DEFAULT_MAX_DIM) -> HomologyResult:
    C = TruncatedCyclicComplex(a, N, flavor, max_dim)
    even, odd = homology_dims(C.matrices(True), "over-function-field")
    return HomologyResult("periodic", a.name, N, flavor, even, odd, chain_dims=C.sizes,
                          caveat=_CAVEAT)


def negative_homology(a: DgAlgebra, N: int, K: int, flavor: str = NORMALIZED,
                      max_dim: int = DEFAULT_MAX_DIM) -> HomologyResult:
    C = TruncatedCyclicComplex(a, N, flavor, max_dim)
    th = homology_over_truncated_series(C.matrices(True), K)
    return HomologyResult("negative", a.name, N, flavor, th.freeRank[0], th.freeRank[1],
                          structure=th.to_json(), chain_dims=C.sizes, caveat=_CAVEAT)


def compute_homology(a: DgAlgebra, mode: str, N: int, K: int = 3, flavor: str = NORMALIZED,
                     max_dim: int = DEFAULT_MAX_DIM) -> HomologyResult:
    if mode == "hochschild":
        return hochschild_homology(a, N, flavor, max_dim)
    if mode == "periodic":
        return periodic_homology(a, N, flavor, max_dim)
    if mode == "negative":
        return negative_homology(a, N, K, flavor, max_dim)
    raise ValueError(f"unknown homology mode {mode!r}")
