"""Finite-dimensional Z/2-graded unital dg algebras.

An algebra is stored on a basis that contains the unit.  Products and the
differential are sparse: ``mul[i][j]`` and ``diff[i]`` are tuples of
``(k, c)`` pairs.  Coefficients are Python ints when integral and
:class:`~fractions.Fraction` otherwise, so the common integral case stays on
fast integer arithmetic.
"""
from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .exactnum import format_rational, parse_rational

__all__ = [
    "DgAlgebra", "ValidationReport", "InvalidAlgebra", "validate", "tensor_product",
    "load_algebra", "dump_algebra", "algebra_from_json", "algebra_to_json",
    "ground_field", "dual_numbers", "odd_dual_numbers", "clifford", "clifford_d",
    "grassmann_d", "truncated_poly", "square_odd", "koszul_pair", "random_algebra",
    "bundled_algebra", "BUNDLED", "num",
]

Term = tuple[int, object]


def num(x) -> int | Fraction:
    """Canonical coefficient: int when integral, Fraction otherwise."""
    if isinstance(x, int) and not isinstance(x, bool):
        return x
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else x


class InvalidAlgebra(ValueError):
    def __init__(self, report: "ValidationReport"):
        super().__init__(report.summary())
        self.report = report


@dataclass
class ValidationReport:
    ok: bool
    failures: list[dict] = field(default_factory=list)

    def failed_axioms(self) -> set[str]:
        return {f["axiom"] for f in self.failures}

    def summary(self) -> str:
        if self.ok:
            return "valid"
        return "; ".join(f"{f['axiom']} at {f['witness']}" for f in self.failures[:5])

    def to_json(self) -> dict:
        return {"ok": self.ok, "failures": self.failures}


class DgAlgebra:
    """Immutable finite dg algebra with a distinguished unit basis vector."""

    def __init__(self, name: str, parity: Sequence[int], unit: int,
                 mult: Mapping[tuple[int, int], Mapping[int, object]] | Iterable,
                 diff: Mapping[int, Mapping[int, object]] | Iterable,
                 labels: Sequence[str] | None = None):
        self.name = name
        self.parity = tuple(int(p) & 1 for p in parity)
        self.dim = len(self.parity)
        if not 0 <= unit < self.dim:
            raise ValueError("unit index out of range")
        self.unit = unit
        self.labels = tuple(labels) if labels else tuple(f"e{i}" for i in range(self.dim))
        mdict: dict[tuple[int, int], dict[int, object]] = {}
        if isinstance(mult, Mapping):
            for (i, j), row in mult.items():
                for k, c in row.items():
                    _acc(mdict.setdefault((i, j), {}), k, c)
        else:
            for i, j, k, c in mult:
                _acc(mdict.setdefault((i, j), {}), k, c)
        ddict: dict[int, dict[int, object]] = {}
        if isinstance(diff, Mapping):
            for i, row in diff.items():
                for k, c in row.items():
                    _acc(ddict.setdefault(i, {}), k, c)
        else:
            for i, k, c in diff:
                _acc(ddict.setdefault(i, {}), k, c)
        m = self.dim
        for (i, j), row in mdict.items():
            for k in row:
                if not (0 <= i < m and 0 <= j < m and 0 <= k < m):
                    raise ValueError(f"mult index out of range: {(i, j, k)}")
        for i, row in ddict.items():
            for k in row:
                if not (0 <= i < m and 0 <= k < m):
                    raise ValueError(f"diff index out of range: {(i, k)}")
        self.mul: tuple[tuple[tuple[Term, ...], ...], ...] = tuple(
            tuple(tuple(sorted((k, num(c)) for k, c in mdict.get((i, j), {}).items() if c))
                  for j in range(m)) for i in range(m))
        self.diff: tuple[tuple[Term, ...], ...] = tuple(
            tuple(sorted((k, num(c)) for k, c in ddict.get(i, {}).items() if c)) for i in range(m))
        self.reduced = tuple(i for i in range(m) if i != unit)

    # -- basic queries -----------------------------------------------------
    def is_integral(self) -> bool:
        return all(isinstance(c, int) for row in self.mul for t in row for _, c in t) and \
            all(isinstance(c, int) for t in self.diff for _, c in t)

    def has_zero_differential(self) -> bool:
        return not any(self.diff)

    def is_purely_even(self) -> bool:
        return not any(self.parity)

    def multiply(self, x: Mapping[int, object], y: Mapping[int, object]) -> dict[int, object]:
        out: dict[int, object] = {}
        for i, a in x.items():
            for j, b in y.items():
                for k, c in self.mul[i][j]:
                    _acc(out, k, a * b * c)
        return {k: v for k, v in out.items() if v}

    def d(self, x: Mapping[int, object]) -> dict[int, object]:
        out: dict[int, object] = {}
        for i, a in x.items():
            for k, c in self.diff[i]:
                _acc(out, k, a * c)
        return {k: v for k, v in out.items() if v}

    def content_hash(self) -> str:
        return hashlib.sha256(json.dumps(algebra_to_json(self), sort_keys=True).encode()).hexdigest()[:16]

    def __repr__(self) -> str:
        return f"DgAlgebra({self.name!r}, dim={self.dim})"


def _acc(d: dict, k, c) -> None:
    v = d.get(k, 0) + c
    if v:
        d[k] = v
    else:
        d.pop(k, None)


def _basis(i: int) -> dict[int, int]:
    return {i: 1}


def validate(a: DgAlgebra) -> ValidationReport:
    """Check unit, associativity, parity, d^2 = 0, d(1) = 0 and graded Leibniz."""
    fails: list[dict] = []
    m = a.dim
    u = a.unit
    for i in range(m):
        if a.multiply(_basis(u), _basis(i)) != {i: 1}:
            fails.append({"axiom": "unit", "witness": [u, i]})
        if a.multiply(_basis(i), _basis(u)) != {i: 1}:
            fails.append({"axiom": "unit", "witness": [i, u]})
    for i in range(m):
        for j in range(m):
            for k, _ in a.mul[i][j]:
                if a.parity[k] != (a.parity[i] + a.parity[j]) % 2:
                    fails.append({"axiom": "parity-mult", "witness": [i, j, k]})
        for k, _ in a.diff[i]:
            if a.parity[k] != (a.parity[i] + 1) % 2:
                fails.append({"axiom": "parity-diff", "witness": [i, k]})
    for i in range(m):
        for j in range(m):
            ij = a.multiply(_basis(i), _basis(j))
            for l in range(m):
                lhs = a.multiply(ij, _basis(l))
                rhs = a.multiply(_basis(i), a.multiply(_basis(j), _basis(l)))
                if lhs != rhs:
                    fails.append({"axiom": "associativity", "witness": [i, j, l]})
    if a.diff[u]:
        fails.append({"axiom": "d-unit", "witness": [u]})
    for i in range(m):
        if a.d(a.d(_basis(i))):
            fails.append({"axiom": "d-squared", "witness": [i]})
    for i in range(m):
        for j in range(m):
            lhs = a.d(a.multiply(_basis(i), _basis(j)))
            rhs = dict(a.multiply(a.d(_basis(i)), _basis(j)))
            sign = -1 if a.parity[i] else 1
            for k, v in a.multiply(_basis(i), a.d(_basis(j))).items():
                _acc(rhs, k, sign * v)
            if lhs != rhs:
                fails.append({"axiom": "leibniz", "witness": [i, j]})
    return ValidationReport(not fails, fails)


def tensor_product(a: DgAlgebra, b: DgAlgebra, name: str | None = None) -> DgAlgebra:
    """Graded tensor product with the Koszul rule; basis index ``i*b.dim + j``."""
    mb = b.dim
    parity = [(pa + pb) % 2 for pa in a.parity for pb in b.parity]
    mult = []
    for i1 in range(a.dim):
        for j1 in range(mb):
            for i2 in range(a.dim):
                for j2 in range(mb):
                    s = -1 if (b.parity[j1] and a.parity[i2]) else 1
                    for k1, c1 in a.mul[i1][i2]:
                        for k2, c2 in b.mul[j1][j2]:
                            mult.append((i1 * mb + j1, i2 * mb + j2, k1 * mb + k2, s * c1 * c2))
    diff = []
    for i in range(a.dim):
        for j in range(mb):
            for k, c in a.diff[i]:
                diff.append((i * mb + j, k * mb + j, c))
            s = -1 if a.parity[i] else 1
            for k, c in b.diff[j]:
                diff.append((i * mb + j, i * mb + k, s * c))
    labels = [f"{x}*{y}" for x in a.labels for y in b.labels]
    return DgAlgebra(name or f"({a.name})x({b.name})", parity, a.unit * mb + b.unit, mult, diff, labels)


# ---------------------------------------------------------------------------
# file format


def algebra_to_json(a: DgAlgebra) -> dict:
    mult = [[i, j, k, format_rational(c)] for i in range(a.dim) for j in range(a.dim)
            for k, c in a.mul[i][j]]
    diff = [[i, k, format_rational(c)] for i in range(a.dim) for k, c in a.diff[i]]
    return {"name": a.name, "dim": a.dim, "parity": list(a.parity), "unit": a.unit,
            "mult": mult, "diff": diff, "labels": list(a.labels)}


def algebra_from_json(data: Mapping, check: bool = True) -> DgAlgebra:
    for key in ("dim", "parity", "unit"):
        if key not in data:
            raise ValueError(f"algebra file lacks {key!r}")
    dim = int(data["dim"])
    parity = [int(p) for p in data["parity"]]
    if len(parity) != dim or any(p not in (0, 1) for p in parity):
        raise ValueError("parity vector must have length dim with entries 0/1")
    mult = [(int(i), int(j), int(k), parse_rational(c)) for i, j, k, c in data.get("mult", [])]
    diff = [(int(i), int(k), parse_rational(c)) for i, k, c in data.get("diff", [])]
    a = DgAlgebra(str(data.get("name", "unnamed")), parity, int(data["unit"]), mult, diff,
                  data.get("labels"))
    if check:
        rep = validate(a)
        if not rep.ok:
            raise InvalidAlgebra(rep)
    return a


def load_algebra(path: str | Path, check: bool = True) -> DgAlgebra:
    with open(path) as fh:
        return algebra_from_json(json.load(fh), check=check)


def dump_algebra(a: DgAlgebra, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(algebra_to_json(a), fh, indent=1)
        fh.write("\n")


# ---------------------------------------------------------------------------
# corpus


def ground_field() -> DgAlgebra:
    return DgAlgebra("k", [0], 0, [(0, 0, 0, 1)], [], ["1"])


def _unit_mult(dim: int, unit: int = 0) -> list[tuple[int, int, int, int]]:
    out = [(unit, i, i, 1) for i in range(dim)]
    out += [(i, unit, i, 1) for i in range(dim) if i != unit]
    return out


def dual_numbers() -> DgAlgebra:
    """k[eps]/eps^2 with eps even and d = 0."""
    return DgAlgebra("kdual", [0, 0], 0, _unit_mult(2), [], ["1", "eps"])


def odd_dual_numbers() -> DgAlgebra:
    """k[xi]/xi^2 with xi odd and d = 0."""
    return DgAlgebra("kodd", [0, 1], 0, _unit_mult(2), [], ["1", "xi"])


def clifford() -> DgAlgebra:
    """One odd generator theta with theta^2 = 1 and d = 0."""
    return DgAlgebra("clifford", [0, 1], 0, _unit_mult(2) + [(1, 1, 0, 1)], [], ["1", "theta"])


def clifford_d() -> DgAlgebra:
    """theta odd, theta^2 = 1, d(theta) = 1."""
    return DgAlgebra("clifford_d", [0, 1], 0, _unit_mult(2) + [(1, 1, 0, 1)], [(1, 0, 1)],
                     ["1", "theta"])


def grassmann_d() -> DgAlgebra:
    """xi odd, xi^2 = 0, d(xi) = 1 (an acyclic dg algebra)."""
    return DgAlgebra("grassmann_d", [0, 1], 0, _unit_mult(2), [(1, 0, 1)], ["1", "xi"])


def truncated_poly() -> DgAlgebra:
    """k[eps]/eps^3 with eps even, d = 0."""
    return DgAlgebra("kcube", [0, 0, 0], 0, _unit_mult(3) + [(1, 1, 2, 1)], [],
                     ["1", "eps", "eps2"])


def square_odd(d_eps: int = 1) -> DgAlgebra:
    """xi odd with xi^2 = eps, eps even, eps*xi = xi*eps = eps^2 = 0, d(xi) = c*eps."""
    diff = []
    if d_eps:
        diff.append((1, 2, d_eps))
    return DgAlgebra("square_odd", [0, 1, 0], 0, _unit_mult(3) + [(1, 1, 2, 1)], diff,
                     ["1", "xi", "eps"])


def koszul_pair(with_product: bool = True) -> DgAlgebra:
    """Dimension four: k[eps, xi]/(eps^2, xi^2), eps even, xi odd, d(xi) = eps.

    With ``with_product=False`` the basis element eps*xi is dropped, giving the
    three-dimensional quotient spanned by 1, eps, xi.
    """
    if with_product:
        mult = _unit_mult(4) + [(1, 2, 3, 1), (2, 1, 3, 1)]
        return DgAlgebra("A4", [0, 0, 1, 1], 0, mult, [(2, 1, 1)], ["1", "eps", "xi", "eps*xi"])
    return DgAlgebra("koszul3", [0, 0, 1], 0, _unit_mult(3), [(2, 1, 1)], ["1", "eps", "xi"])


_TEMPLATES = (ground_field, dual_numbers, odd_dual_numbers, clifford, clifford_d, grassmann_d,
              truncated_poly, square_odd, lambda: square_odd(0),
              lambda: koszul_pair(False))


def _change_basis(a: DgAlgebra, P: list[list[int]], Pinv: list[list[int]], dscale: int,
                  name: str) -> DgAlgebra:
    """New basis f_i = sum_j P[i][j] e_j; structure constants recomputed exactly."""
    m = a.dim

    def to_new(vec: Mapping[int, object]) -> dict[int, object]:
        # e_j = sum_i Pinv[j][i] f_i
        out: dict[int, object] = {}
        for j, c in vec.items():
            for i in range(m):
                if Pinv[j][i]:
                    _acc(out, i, c * Pinv[j][i])
        return out

    def vec(i: int) -> dict[int, int]:
        return {j: P[i][j] for j in range(m) if P[i][j]}

    mult = []
    for i in range(m):
        for j in range(m):
            for k, c in to_new(a.multiply(vec(i), vec(j))).items():
                mult.append((i, j, k, c))
    diff = []
    for i in range(m):
        for k, c in to_new(a.d(vec(i))).items():
            diff.append((i, k, dscale * c))
    return DgAlgebra(name, a.parity, a.unit, mult, diff)


def random_algebra(seed: int, max_dim: int = 3) -> DgAlgebra:
    """A validated algebra of dimension <= max_dim obtained from a template by a
    random parity-preserving unimodular change of basis fixing the unit, plus a
    random nonzero integer rescaling of the differential."""
    rng = random.Random(seed)
    pool = [t() for t in _TEMPLATES]
    pool = [t for t in pool if t.dim <= max_dim]
    base = rng.choice(pool)
    m = base.dim
    P = [[int(i == j) for j in range(m)] for i in range(m)]
    Pinv = [row[:] for row in P]
    # compose elementary operations row_i += c * row_j between same-parity
    # non-unit vectors, or adding multiples of the unit to even vectors
    for _ in range(3 * m):
        i = rng.randrange(m)
        if i == base.unit:
            continue
        choices = [j for j in range(m) if j != i and (base.parity[j] == base.parity[i])]
        if not choices:
            continue
        j = rng.choice(choices)
        c = rng.choice([-2, -1, 1, 2])
        for col in range(m):
            P[i][col] += c * P[j][col]
        # inverse: apply column operation col_j -= c * col_i on Pinv
        for row in range(m):
            Pinv[row][j] -= c * Pinv[row][i]
    if rng.random() < 0.5 and m > 1:
        # swap two same-parity non-unit vectors
        idx = [i for i in range(m) if i != base.unit]
        i, j = rng.sample(idx, 2) if len(idx) > 1 else (idx[0], idx[0])
        if base.parity[i] == base.parity[j] and i != j:
            P[i], P[j] = P[j], P[i]
            for row in Pinv:
                row[i], row[j] = row[j], row[i]
    dscale = rng.choice([1, 2, -1, 3])
    a = _change_basis(base, P, Pinv, dscale, f"random[{seed}]<{base.name}>")
    rep = validate(a)
    if not rep.ok:  # pragma: no cover - guarded by construction
        raise InvalidAlgebra(rep)
    return a


BUNDLED = {
    "k": ground_field,
    "kdual": dual_numbers,
    "kodd": odd_dual_numbers,
    "clifford": clifford,
    "clifford_d": clifford_d,
    "grassmann_d": grassmann_d,
    "kcube": truncated_poly,
    "square_odd": square_odd,
    "A4": koszul_pair,
}


def bundled_algebra(name: str) -> DgAlgebra:
    """Load a bundled algebra by name, from the packaged data files."""
    path = Path(__file__).with_name("data") / f"{name}.alg"
    if path.exists():
        return load_algebra(path)
    if name in BUNDLED:
        return BUNDLED[name]()
    raise KeyError(name)
