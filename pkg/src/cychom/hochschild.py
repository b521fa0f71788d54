"""Truncated Hochschild chain spaces and the elementary operators on them.

A basis chain ``a0[a1|...|an]`` is the tuple ``(a0, a1, ..., an)`` of basis
indices; its tensor degree is ``len(key) - 1``.  A chain is a dict from keys to
nonzero coefficients.  Chains with coefficients in Laurent polynomials of
``u`` are dicts keyed by ``(power, key)`` (see :class:`UOp`).

Every sign is produced by counting shifted parities |Pi x| = |x| + 1 over
explicit prefixes of a key.  The normalized flavor uses the tuples whose tail
avoids the unit; any operator result with the unit in a tail slot is dropped,
which is exactly the quotient by the span of such tuples.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from math import factorial
from typing import Callable, Iterable, Mapping, Sequence

from .dgalg import DgAlgebra
from .linalg import SparseMatrix

__all__ = [
    "NORMALIZED", "UNNORMALIZED", "Op", "UOp", "ChainSpace", "NormalizedUnsupported",
    "ParityMismatch", "TruncationViolation", "IndexOutOfRange",
    "apply", "add_into", "chain_sub", "clean", "key_parity", "enumerate_basis",
    "op_identity", "op_tau", "op_tau_inv", "op_tau_power", "op_delta_i", "op_mu_i",
    "op_delta_i_conj", "op_mu_i_conj", "op_b_delta", "op_b_mu", "op_b", "op_h", "op_Nsum",
    "op_B", "op_gamma", "op_e_delta", "op_e_delta_closed", "op_E_delta", "op_insertion",
    "op_exp_neg_insertion", "op_projection", "op_b_mu_dagger", "op_mu_star", "materialize",
    "compose", "lincomb", "bracket", "ubracket", "zero_op",
]

NORMALIZED = "normalized"
UNNORMALIZED = "unnormalized"


class NormalizedUnsupported(ValueError):
    pass


class ParityMismatch(ValueError):
    pass


class TruncationViolation(ValueError):
    pass


class IndexOutOfRange(ValueError):
    pass


# ---------------------------------------------------------------------------
# chains


def add_into(out: dict, key, c) -> None:
    v = out.get(key, 0) + c
    if v:
        out[key] = v
    else:
        out.pop(key, None)


def clean(chain: Mapping) -> dict:
    return {k: v for k, v in chain.items() if v}


def chain_sub(a: Mapping, b: Mapping) -> dict:
    out = dict(a)
    for k, v in b.items():
        add_into(out, k, -v)
    return out


def key_parity(par: Sequence[int], key: Sequence[int]) -> int:
    """Parity of a0[a1|...|an]: |a0| + sum(|ai| + 1)."""
    p = par[key[0]]
    for x in key[1:]:
        p += par[x] + 1
    return p & 1


# ---------------------------------------------------------------------------
# operators


class Op:
    """Linear operator given by its value on basis keys.

    ``parity`` is 0 (even) or 1 (odd); ``shift`` bounds the change of tensor
    degree (for bi-chains: relative to the total degree n + m).
    """

    __slots__ = ("fn", "parity", "shift", "name", "_cache")

    def __init__(self, fn: Callable[[tuple], Mapping], parity: int, shift: tuple[int, int],
                 name: str = "op", cache: bool = False):
        self.fn = fn
        self.parity = parity & 1
        self.shift = shift
        self.name = name
        self._cache = {} if cache else None

    def image(self, key) -> Mapping:
        if self._cache is None:
            return self.fn(key)
        r = self._cache.get(key)
        if r is None:
            r = self.fn(key)
            self._cache[key] = r
        return r

    def __call__(self, chain: Mapping) -> dict:
        return apply(self, chain)

    def __repr__(self) -> str:
        return f"Op({self.name}, parity={self.parity}, shift={self.shift})"


def apply(op: Op, chain: Mapping) -> dict:
    out: dict = {}
    img = op.image
    for key, c in chain.items():
        for k2, c2 in img(key).items():
            v = out.get(k2, 0) + c * c2
            if v:
                out[k2] = v
            else:
                del out[k2]
    return out


def zero_op(parity: int = 0, shift=(0, 0)) -> Op:
    return Op(lambda key: {}, parity, shift, "0")


def op_identity(parity_free: bool = True) -> Op:
    return Op(lambda key: {key: 1}, 0, (0, 0), "id")


def compose(*ops: Op, name: str | None = None, cache: bool = False) -> Op:
    """``compose(A, B, C)`` is A o B o C (C applied first)."""
    seq = list(reversed(ops))

    def fn(key):
        ch = {key: 1}
        for op in seq:
            ch = apply(op, ch)
            if not ch:
                break
        return ch

    lo = sum(o.shift[0] for o in ops)
    hi = sum(o.shift[1] for o in ops)
    return Op(fn, sum(o.parity for o in ops), (lo, hi),
              name or "∘".join(o.name for o in ops), cache)


def lincomb(terms: Iterable[tuple[object, Op]], name: str = "sum", cache: bool = False) -> Op:
    terms = [(c, o) for c, o in terms if c]
    pars = {o.parity for _, o in terms}
    if len(pars) > 1:
        raise ParityMismatch("linear combination of operators of different parity")

    def fn(key):
        out: dict = {}
        for c, o in terms:
            for k2, c2 in o.image(key).items():
                add_into(out, k2, c * c2)
        return out

    lo = min((o.shift[0] for _, o in terms), default=0)
    hi = max((o.shift[1] for _, o in terms), default=0)
    return Op(fn, pars.pop() if pars else 0, (lo, hi), name, cache)


def bracket(y: Op, x: Op, y_dom: Op | None = None, name: str | None = None) -> Op:
    """Super-commutator ``y x - (-1)^{|x||y|} x y_dom``.

    When ``x`` maps between different spaces (a shuffle map, say), ``y`` acts
    on its target and ``y_dom`` on its source; by default ``y_dom = y``.
    """
    y_dom = y if y_dom is None else y_dom
    s = -1 if (x.parity and y.parity) else 1
    a = compose(y, x)
    b = compose(x, y_dom)

    def fn(key):
        out = dict(a.image(key))
        for k2, c2 in b.image(key).items():
            add_into(out, k2, -s * c2)
        return out

    lo = min(a.shift[0], b.shift[0])
    hi = max(a.shift[1], b.shift[1])
    return Op(fn, (x.parity + y.parity) & 1, (lo, hi), name or f"[{y.name},{x.name}]")


# ---------------------------------------------------------------------------
# u-linear operators


class UOp:
    """Operator with Laurent-polynomial coefficients: sum of ``c u^p op``.

    It acts on u-chains, i.e. dicts keyed by ``(p, key)``.
    """

    __slots__ = ("terms", "name")

    def __init__(self, terms: Iterable[tuple[int, object, Op]], name: str = "uop"):
        self.terms = [(int(p), c, o) for p, c, o in terms if c]
        self.name = name

    @classmethod
    def lift(cls, op: Op, power: int = 0, coeff=1) -> "UOp":
        return cls([(power, coeff, op)], op.name)

    @property
    def window(self) -> tuple[int, int]:
        ps = [p for p, _, _ in self.terms]
        return (min(ps), max(ps)) if ps else (0, 0)

    @property
    def parity(self) -> int:
        pars = {o.parity for _, _, o in self.terms}
        return pars.pop() if len(pars) == 1 else 0

    @property
    def shift(self) -> tuple[int, int]:
        return (min((o.shift[0] for _, _, o in self.terms), default=0),
                max((o.shift[1] for _, _, o in self.terms), default=0))

    def __call__(self, uchain: Mapping) -> dict:
        out: dict = {}
        for (p, key), c in uchain.items():
            for q, cq, op in self.terms:
                for k2, c2 in op.image(key).items():
                    add_into(out, (p + q, k2), c * cq * c2)
        return out

    def image(self, ukey) -> dict:
        return self({ukey: 1})

    def __add__(self, other: "UOp") -> "UOp":
        return UOp(self.terms + other.terms, f"{self.name}+{other.name}")

    def __neg__(self) -> "UOp":
        return UOp([(p, -c, o) for p, c, o in self.terms], f"-{self.name}")

    def __sub__(self, other: "UOp") -> "UOp":
        return self + (-other)

    def scale(self, c, power: int = 0) -> "UOp":
        return UOp([(p + power, c * cc, o) for p, cc, o in self.terms], self.name)

    def then(self, first: "UOp") -> "UOp":
        """``self o first``."""
        return UOp([(p + q, c * d, compose(o, f)) for p, c, o in self.terms
                    for q, d, f in first.terms], f"{self.name}∘{first.name}")

    def derivative(self) -> "UOp":
        return UOp([(p - 1, c * p, o) for p, c, o in self.terms if p], f"d/du {self.name}")

    def component(self, power: int) -> list[tuple[object, Op]]:
        return [(c, o) for p, c, o in self.terms if p == power]

    def op_at(self, power: int) -> Op:
        return lincomb(self.component(power), f"{self.name}[u^{power}]") if self.component(power) \
            else zero_op(self.parity)


def ubracket(y: UOp, x: UOp, y_dom: UOp | None = None) -> UOp:
    """``y x - (-1)^{|x||y|} x y_dom`` with the conventions of :func:`bracket`."""
    y_dom = y if y_dom is None else y_dom
    s = -1 if (x.parity and y.parity) else 1
    return y.then(x) + x.then(y_dom).scale(-s)


# ---------------------------------------------------------------------------
# spaces


def enumerate_basis(a: DgAlgebra, n: int, flavor: str) -> list[tuple[int, ...]]:
    """All keys of tensor degree n in lexicographic order."""
    tail = a.reduced if flavor == NORMALIZED else tuple(range(a.dim))
    return [(h,) + t for h in range(a.dim) for t in itertools.product(tail, repeat=n)]


class ChainSpace:
    """A truncated chain space: algebra, flavor and truncation degree N."""

    def __init__(self, a: DgAlgebra, flavor: str = NORMALIZED, N: int = 5):
        if flavor not in (NORMALIZED, UNNORMALIZED):
            raise ValueError(f"unknown flavor {flavor!r}")
        self.alg = a
        self.flavor = flavor
        self.N = N

    def basis(self, n: int) -> list[tuple[int, ...]]:
        if n > self.N:
            raise TruncationViolation(f"degree {n} exceeds truncation {self.N}")
        return enumerate_basis(self.alg, n, self.flavor)

    def dim(self, n: int) -> int:
        t = len(self.alg.reduced) if self.flavor == NORMALIZED else self.alg.dim
        return self.alg.dim * t ** n


# ---------------------------------------------------------------------------
# elementary operators


def _pi(a: DgAlgebra) -> tuple[int, ...]:
    return tuple(1 - p for p in a.parity)


def _projector(a: DgAlgebra, flavor: str) -> Callable[[dict], dict]:
    if flavor == UNNORMALIZED:
        return lambda ch: ch
    u = a.unit

    def proj(ch: dict) -> dict:
        return {k: v for k, v in ch.items() if u not in k[1:]}

    return proj


def op_projection(a: DgAlgebra) -> Op:
    """Quotient map from unnormalized to normalized chains."""
    u = a.unit
    return Op(lambda key: {} if u in key[1:] else {key: 1}, 0, (0, 0), "proj")


def _tau_key(pi, key):
    if len(key) == 1:
        return key, 1
    s = 0
    for x in key[1:]:
        s += pi[x]
    sign = -1 if (pi[key[0]] * s) & 1 else 1
    return key[1:] + key[:1], sign


def _tau_inv_key(pi, key):
    if len(key) == 1:
        return key, 1
    s = 0
    for x in key[:-1]:
        s += pi[x]
    sign = -1 if (pi[key[-1]] * s) & 1 else 1
    return key[-1:] + key[:-1], sign


def op_tau(a: DgAlgebra, flavor: str = UNNORMALIZED) -> Op:
    if flavor == NORMALIZED:
        raise NormalizedUnsupported("tau does not preserve the normalized quotient")
    pi = _pi(a)

    def fn(key):
        k2, s = _tau_key(pi, key)
        return {k2: s}

    return Op(fn, 0, (0, 0), "tau")


def op_tau_inv(a: DgAlgebra, flavor: str = UNNORMALIZED) -> Op:
    if flavor == NORMALIZED:
        raise NormalizedUnsupported("tau does not preserve the normalized quotient")
    pi = _pi(a)

    def fn(key):
        k2, s = _tau_inv_key(pi, key)
        return {k2: s}

    return Op(fn, 0, (0, 0), "tau^-1")


def _tau_pow_key(pi, key, r):
    """tau^r for any integer r (reduced modulo n + 1)."""
    n1 = len(key)
    r %= n1
    sign = 1
    for _ in range(r):
        key, s = _tau_key(pi, key)
        sign *= s
    return key, sign


def op_tau_power(a: DgAlgebra, r: int) -> Op:
    pi = _pi(a)

    def fn(key):
        k2, s = _tau_pow_key(pi, key, r)
        return {k2: s}

    return Op(fn, 0, (0, 0), f"tau^{r}")


def _delta_i(a: DgAlgebra, pi, key, i, out, coef=1):
    s = 0
    for x in key[:i]:
        s += pi[x]
    sign = -coef if s & 1 else coef
    ai = key[i]
    pre, post = key[:i], key[i + 1:]
    for k, c in a.diff[ai]:
        add_into(out, pre + (k,) + post, sign * c)


def _mu_i(a: DgAlgebra, pi, key, i, out, coef=1):
    """Direct slot product for 0 <= i <= n - 1; wrap-around i = n via tau^{-1}."""
    n = len(key) - 1
    if n == 0:
        return
    if i == n:
        k2, s = _tau_inv_key(pi, key)
        _mu_i(a, pi, k2, 0, out, coef * s)
        return
    s = 0
    for x in key[:i]:
        s += pi[x]
    s += a.parity[key[i]]
    sign = -coef if s & 1 else coef
    pre, post = key[:i], key[i + 2:]
    for k, c in a.mul[key[i]][key[i + 1]]:
        add_into(out, pre + (k,) + post, sign * c)


def op_delta_i(a: DgAlgebra, i: int, flavor: str = NORMALIZED, strict: bool = False) -> Op:
    pi = _pi(a)
    proj = _projector(a, flavor)

    def fn(key):
        if i > len(key) - 1:
            if strict:
                raise IndexOutOfRange(f"delta^({i}) on degree {len(key) - 1}")
            return {}
        out: dict = {}
        _delta_i(a, pi, key, i, out)
        return proj(out)

    return Op(fn, 1, (0, 0), f"delta^({i})")


def op_mu_i(a: DgAlgebra, i: int, flavor: str = NORMALIZED, strict: bool = False) -> Op:
    pi = _pi(a)
    proj = _projector(a, flavor)

    def fn(key):
        if i > len(key) - 1:
            if strict:
                raise IndexOutOfRange(f"mu^({i}) on degree {len(key) - 1}")
            return {}
        out: dict = {}
        _mu_i(a, pi, key, i, out)
        return proj(out)

    return Op(fn, 1, (-1, -1), f"mu^({i})")


def _conj(a: DgAlgebra, base: Callable, i: int, flavor: str) -> Op:
    """tau^{-i} o base o tau^{i}, with tau powers taken on the current degree."""
    pi = _pi(a)
    proj = _projector(a, flavor)

    def fn(key):
        if i > len(key) - 1:
            return {}
        k1, s1 = _tau_pow_key(pi, key, i)
        mid: dict = {}
        base(k1, mid, s1)
        out: dict = {}
        for k2, c in mid.items():
            k3, s3 = _tau_pow_key(pi, k2, -i)
            add_into(out, k3, c * s3)
        return proj(out)

    return fn


def op_delta_i_conj(a: DgAlgebra, i: int, flavor: str = NORMALIZED) -> Op:
    """delta^(i) computed from its conjugation definition (test oracle)."""
    pi = _pi(a)
    fn = _conj(a, lambda k, out, s: _delta_i(a, pi, k, 0, out, s), i, flavor)
    return Op(fn, 1, (0, 0), f"delta^({i})conj")


def op_mu_i_conj(a: DgAlgebra, i: int, flavor: str = NORMALIZED) -> Op:
    """mu^(i) computed from its conjugation definition (test oracle)."""
    pi = _pi(a)
    fn = _conj(a, lambda k, out, s: _mu_i(a, pi, k, 0, out, s), i, flavor)
    return Op(fn, 1, (-1, -1), f"mu^({i})conj")


def op_b_delta(a: DgAlgebra, flavor: str = NORMALIZED) -> Op:
    pi = _pi(a)
    proj = _projector(a, flavor)

    def fn(key):
        out: dict = {}
        for i in range(len(key)):
            _delta_i(a, pi, key, i, out)
        return proj(out)

    return Op(fn, 1, (0, 0), "b(delta)")


def op_b_mu(a: DgAlgebra, flavor: str = NORMALIZED) -> Op:
    pi = _pi(a)
    proj = _projector(a, flavor)

    def fn(key):
        out: dict = {}
        for i in range(len(key)):
            _mu_i(a, pi, key, i, out)
        return proj(out)

    return Op(fn, 1, (-1, -1), "b(mu)")


def op_b_mu_dagger(a: DgAlgebra, flavor: str = UNNORMALIZED) -> Op:
    """Truncated b(mu): sum of mu^(i) for 1 <= i <= n - 1."""
    pi = _pi(a)
    proj = _projector(a, flavor)

    def fn(key):
        out: dict = {}
        for i in range(1, len(key) - 1):
            _mu_i(a, pi, key, i, out)
        return proj(out)

    return Op(fn, 1, (-1, -1), "b(mu)+")


def op_mu_star(a: DgAlgebra, flavor: str = UNNORMALIZED) -> Op:
    """mu^(n) on degree n (the wrap-around product)."""
    pi = _pi(a)
    proj = _projector(a, flavor)

    def fn(key):
        out: dict = {}
        if len(key) > 1:
            _mu_i(a, pi, key, len(key) - 1, out)
        return proj(out)

    return Op(fn, 1, (-1, -1), "mu^(*)")


def op_b(a: DgAlgebra, flavor: str = NORMALIZED) -> Op:
    pi = _pi(a)
    proj = _projector(a, flavor)

    def fn(key):
        out: dict = {}
        for i in range(len(key)):
            _delta_i(a, pi, key, i, out)
            _mu_i(a, pi, key, i, out)
        return proj(out)

    return Op(fn, 1, (-1, 0), "b")


def op_h(a: DgAlgebra, flavor: str = UNNORMALIZED) -> Op:
    u = a.unit
    if flavor == NORMALIZED:
        return Op(lambda key: {} if key[0] == u else {(u,) + key: 1}, 1, (1, 1), "h")
    return Op(lambda key: {(u,) + key: 1}, 1, (1, 1), "h")


def op_Nsum(a: DgAlgebra) -> Op:
    pi = _pi(a)

    def fn(key):
        out: dict = {}
        k, s = key, 1
        for _ in range(len(key)):
            add_into(out, k, s)
            k, s2 = _tau_key(pi, k)
            s *= s2
        return out

    return Op(fn, 0, (0, 0), "N")


def op_B(a: DgAlgebra, flavor: str = NORMALIZED) -> Op:
    """Connes' operator: (1 - tau^{-1}) h N unnormalized, h N on the quotient."""
    pi = _pi(a)
    u = a.unit

    if flavor == NORMALIZED:
        def fn(key):
            # a unit head lands in a tail slot after any rotation or after h
            if key[0] == u:
                return {}
            out: dict = {}
            k, s = key, 1
            for _ in range(len(key)):
                add_into(out, (u,) + k, s)
                k, s2 = _tau_key(pi, k)
                s *= s2
            return out
    else:
        def fn(key):
            out: dict = {}
            k, s = key, 1
            for _ in range(len(key)):
                hk = (u,) + k
                add_into(out, hk, s)
                k2, s2 = _tau_inv_key(pi, hk)
                add_into(out, k2, -s * s2)
                k, s3 = _tau_key(pi, k)
                s *= s3
            return out

    return Op(fn, 1, (1, 1), "B")


def op_gamma(a: DgAlgebra) -> Op:
    return Op(lambda key: {key: len(key) - 1} if len(key) > 1 else {}, 0, (0, 0), "gamma")


def op_e_delta(a: DgAlgebra, flavor: str = NORMALIZED) -> Op:
    """e(delta) = -mu^(0) delta^(1)."""
    pi = _pi(a)
    proj = _projector(a, flavor)

    def fn(key):
        if len(key) < 2:
            return {}
        mid: dict = {}
        _delta_i(a, pi, key, 1, mid)
        out: dict = {}
        for k2, c in mid.items():
            _mu_i(a, pi, k2, 0, out, -c)
        return proj(out)

    return Op(fn, 0, (-1, -1), "e(delta)")


def op_e_delta_closed(a: DgAlgebra, flavor: str = NORMALIZED) -> Op:
    """Closed form a0 d(a1)[a2|...|an]."""
    proj = _projector(a, flavor)

    def fn(key):
        if len(key) < 2:
            return {}
        out: dict = {}
        a0, a1, rest = key[0], key[1], key[2:]
        for k, c in a.diff[a1]:
            for k2, c2 in a.mul[a0][k]:
                add_into(out, (k2,) + rest, c * c2)
        return proj(out)

    return Op(fn, 0, (-1, -1), "e(delta)closed")


def op_E_delta(a: DgAlgebra, flavor: str = NORMALIZED) -> Op:
    """E(delta) = - sum_{i=1}^{n} sum_{j=0}^{n-i} h tau^{-j} delta^(i)."""
    pi = _pi(a)
    u = a.unit
    proj = _projector(a, flavor)

    def fn(key):
        n = len(key) - 1
        out: dict = {}
        for i in range(1, n + 1):
            mid: dict = {}
            _delta_i(a, pi, key, i, mid)
            for k2, c in mid.items():
                k, s = k2, 1
                for j in range(0, n - i + 1):
                    add_into(out, (u,) + k, -c * s)
                    k, s2 = _tau_inv_key(pi, k)
                    s *= s2
        return proj(out)

    return Op(fn, 0, (1, 1), "E(delta)")


def _element(phi) -> dict[int, object]:
    if isinstance(phi, Mapping):
        return {int(k): v for k, v in phi.items() if v}
    return {int(phi): 1}


def _element_parity(a: DgAlgebra, phi: Mapping[int, object]) -> int | None:
    ps = {a.parity[k] for k in phi}
    if len(ps) > 1:
        return None
    return ps.pop() if ps else None


def op_insertion(a: DgAlgebra, phi, signed: bool, flavor: str = NORMALIZED) -> Op:
    """Insert phi into every gap of the tail.

    ``signed=False`` requires phi odd (no signs); ``signed=True`` requires phi
    even and uses the sign (-1)^{|Pi a0| + ... + |Pi a_{i-1}|} for slot i.
    """
    phi = _element(phi)
    par = _element_parity(a, phi)
    if par is not None and par != (0 if signed else 1):
        raise ParityMismatch("signed insertion needs an even element, unsigned an odd one")
    pi = _pi(a)
    proj = _projector(a, flavor)
    items = list(phi.items())

    def fn(key):
        out: dict = {}
        n = len(key) - 1
        s = 0
        for i in range(1, n + 2):
            s += pi[key[i - 1]]
            sign = -1 if (signed and s & 1) else 1
            pre, post = key[:i], key[i:]
            for k, c in items:
                add_into(out, pre + (k,) + post, sign * c)
        return proj(out)

    # the inserted slot contributes |Pi phi| to the parity of a chain
    return Op(fn, 1 if signed else 0, (1, 1), "b(f)" if signed else "b(D)")


def op_exp_neg_insertion(a: DgAlgebra, phi, N: int, flavor: str = NORMALIZED,
                         signed: bool = False) -> Op:
    """sum_j (-1)^j b(phi)^j / j!, dropping terms of tensor degree above N."""
    ins = op_insertion(a, phi, signed, flavor)

    def fn(key):
        out: dict = {key: 1}
        cur: dict = {key: 1}
        j = 0
        while cur:
            j += 1
            nxt = apply(ins, cur)
            cur = {k: v for k, v in nxt.items() if len(k) - 1 <= N}
            for k, v in cur.items():
                add_into(out, k, Fraction((-1) ** j, factorial(j)) * v)
        return {k: _num(v) for k, v in out.items()}

    return Op(fn, 0, (0, N), "exp(-b(phi))")


def _num(v):
    if isinstance(v, Fraction) and v.denominator == 1:
        return v.numerator
    return v


# ---------------------------------------------------------------------------
# materialization


def materialize(op: Op, a: DgAlgebra, degrees: Iterable[int], flavor: str, N: int) -> tuple[
        SparseMatrix, list, list]:
    """Matrix of ``op`` on the listed input degrees.

    Returns ``(matrix, input_keys, output_keys)``; output keys are all basis
    keys of the degrees the operator can reach, in enumeration order.
    """
    degrees = sorted(set(degrees))
    for n in degrees:
        if n + op.shift[1] > N:
            raise TruncationViolation(f"degree {n} + shift {op.shift[1]} exceeds N = {N}")
    cols = [k for n in degrees for k in enumerate_basis(a, n, flavor)]
    out_degrees = sorted({n + s for n in degrees for s in range(op.shift[0], op.shift[1] + 1)
                          if n + s >= 0})
    rows = [k for n in out_degrees for k in enumerate_basis(a, n, flavor)]
    index = {k: i for i, k in enumerate(rows)}
    entries = {}
    for j, key in enumerate(cols):
        for k2, c in op.image(key).items():
            entries[(index[k2], j)] = c
    return SparseMatrix(len(rows), len(cols), entries), cols, rows
