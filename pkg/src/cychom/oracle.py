"""Naive reference evaluator used to cross-check the fast operators.

Everything here is computed from the defining formulas in the most literal way:
chains are dicts from tuples of element *labels* to Fractions, the rotation
``tau`` is the only primitive that moves entries, slot operators are obtained
by conjugating the slot-0 operators with powers of ``tau``, ``tau^{-1}`` is
``tau`` iterated ``n`` times, and shuffles are found by filtering all
permutations.  The sign code is written independently of
:mod:`cychom.hochschild` and :mod:`cychom.kunneth`.

It is slow by design and only meant for small degrees.
"""
from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Mapping

from .dgalg import DgAlgebra

__all__ = ["OracleAlgebra", "OraclePair", "compare_elementary", "compare_shuffles",
           "elementary_cases", "shuffle_cases"]


def _acc(out: dict, key, c) -> None:
    c = out.get(key, 0) + c
    if c:
        out[key] = c
    else:
        out.pop(key, None)


def _lin(fn, chain: Mapping) -> dict:
    out: dict = {}
    for key, c in chain.items():
        for k2, c2 in fn(key).items():
            _acc(out, k2, c * c2)
    return out


def _sum(*chains: Mapping) -> dict:
    out: dict = {}
    for ch in chains:
        for k, c in ch.items():
            _acc(out, k, c)
    return out


def _scale(c, chain: Mapping) -> dict:
    return {k: c * v for k, v in chain.items() if c * v}


class OracleAlgebra:
    """A dg algebra seen through labels; all operators act on label chains."""

    def __init__(self, a: DgAlgebra, labels: list[str] | None = None):
        labels = list(labels) if labels is not None else [f"e{i}" for i in range(a.dim)]
        if len(set(labels)) != a.dim:
            raise ValueError("labels must be distinct")
        self.labels = labels
        self.index = {l: i for i, l in enumerate(labels)}
        self.deg = {labels[i]: a.parity[i] for i in range(a.dim)}
        self.one = labels[a.unit]
        self.table: dict[tuple[str, str], dict[str, Fraction]] = {}
        for i in range(a.dim):
            for j in range(a.dim):
                self.table[(labels[i], labels[j])] = {labels[k]: Fraction(c) for k, c in a.mul[i][j]}
        self.dtable = {labels[i]: {labels[k]: Fraction(c) for k, c in a.diff[i]}
                       for i in range(a.dim)}

    # element-level data

    def shifted(self, x: str) -> int:
        """|Pi x| = |x| + 1 (mod 2)."""
        return (self.deg[x] + 1) % 2

    def times(self, x: str, y: str) -> dict:
        return self.table[(x, y)]

    def d(self, x: str) -> dict:
        return self.dtable[x]

    # conversions

    def to_labels(self, chain: Mapping) -> dict:
        return {tuple(self.labels[i] for i in key): Fraction(c) for key, c in chain.items()}

    def to_indices(self, chain: Mapping) -> dict:
        return {tuple(self.index[x] for x in key): c for key, c in chain.items()}

    # rotation

    def tau(self, key: tuple) -> dict:
        if len(key) == 1:
            return {key: Fraction(1)}
        e = self.shifted(key[0]) * sum(self.shifted(x) for x in key[1:])
        return {key[1:] + key[:1]: Fraction((-1) ** e)}

    def tau_pow(self, key: tuple, r: int) -> dict:
        """tau^r; negative powers are positive powers modulo n + 1."""
        r %= len(key)
        ch = {key: Fraction(1)}
        for _ in range(r):
            ch = _lin(self.tau, ch)
        return ch

    def tau_inv(self, key: tuple) -> dict:
        return self.tau_pow(key, len(key) - 1)

    # slot-0 operators

    def delta0(self, key: tuple) -> dict:
        return {(y,) + key[1:]: c for y, c in self.d(key[0]).items()}

    def mu0(self, key: tuple) -> dict:
        if len(key) == 1:
            return {}
        s = (-1) ** self.deg[key[0]]
        return {(z,) + key[2:]: s * c for z, c in self.times(key[0], key[1]).items()}

    # conjugated slot operators

    def delta(self, i: int, key: tuple) -> dict:
        if i > len(key) - 1:
            return {}
        ch = self.tau_pow(key, i)
        ch = _lin(self.delta0, ch)
        return _lin(lambda k: self.tau_pow(k, -i), ch)

    def mu(self, i: int, key: tuple) -> dict:
        if i > len(key) - 1:
            return {}
        ch = self.tau_pow(key, i)
        ch = _lin(self.mu0, ch)
        return _lin(lambda k: self.tau_pow(k, -i), ch)

    # composite operators (unnormalized)

    def b_delta(self, key):
        return _sum(*(self.delta(i, key) for i in range(len(key))))

    def b_mu(self, key):
        return _sum(*(self.mu(i, key) for i in range(len(key))))

    def b(self, key):
        return _sum(self.b_delta(key), self.b_mu(key))

    def b_mu_dagger(self, key):
        return _sum(*(self.mu(i, key) for i in range(1, len(key) - 1)))

    def mu_star(self, key):
        return self.mu(len(key) - 1, key) if len(key) > 1 else {}

    def h(self, key):
        return {(self.one,) + key: Fraction(1)}

    def N(self, key):
        return _sum(*(self.tau_pow(key, i) for i in range(len(key))))

    def B(self, key):
        hn = _lin(self.h, self.N(key))
        return _sum(hn, _scale(-1, _lin(self.tau_inv, hn)))

    def gamma(self, key):
        return {key: Fraction(len(key) - 1)} if len(key) > 1 else {}

    def e(self, key):
        return _scale(-1, _lin(self.mu0, self.delta(1, key)))

    def E(self, key):
        n = len(key) - 1
        out: dict = {}
        for i in range(1, n + 1):
            for j in range(0, n - i + 1):
                ch = _lin(lambda k: self.tau_pow(k, -j), self.delta(i, key))
                for k2, c in _lin(self.h, ch).items():
                    _acc(out, k2, -c)
        return out

    def insertion(self, phi: Mapping[str, object], signed: bool, key: tuple) -> dict:
        out: dict = {}
        for i in range(1, len(key) + 1):
            e = sum(self.shifted(x) for x in key[:i]) if signed else 0
            for y, c in phi.items():
                _acc(out, key[:i] + (y,) + key[i:], (-1) ** e * Fraction(c))
        return out

    # normalized flavor: project (unnormalized op) embed

    def project(self, chain: Mapping) -> dict:
        return {k: c for k, c in chain.items() if self.one not in k[1:]}

    def normalized(self, name: str, key: tuple, *args) -> dict:
        if name == "B":
            # hN on the quotient
            return self.project(_lin(self.h, self.N(key)))
        return self.project(getattr(self, name)(*args, key))


class OraclePair:
    """Shuffle maps for a pair of algebras, by brute force over permutations."""

    def __init__(self, a1: OracleAlgebra, a2: OracleAlgebra):
        self.a1, self.a2 = a1, a2
        self.one = (a1.one, a2.one)
        self._target: OracleAlgebra | None = None

    # element data of the tensor product, labels are pairs

    def deg(self, x) -> int:
        return (self.a1.deg[x[0]] + self.a2.deg[x[1]]) % 2

    def shifted(self, x) -> int:
        return (self.deg(x) + 1) % 2

    def left(self, x: str):
        return (x, self.a2.one)

    def right(self, y: str):
        return (self.a1.one, y)

    def _perm_sign(self, seq: list, order: tuple[int, ...]) -> int:
        """Koszul sign of rearranging ``seq`` into ``[seq[i] for i in order]``."""
        e = 0
        for p in range(len(order)):
            for q in range(p + 1, len(order)):
                if order[p] > order[q]:
                    e += self.shifted(seq[order[p]]) * self.shifted(seq[order[q]])
        return (-1) ** (e % 2)

    def _star_star(self, k1) -> int:
        e = self.a1.deg[k1[0]] + sum(self.a1.shifted(x) for x in k1[1:])
        return (-1) ** (e % 2)

    def sh(self, k1: tuple, k2: tuple) -> dict:
        n, m = len(k1) - 1, len(k2) - 1
        e = self.a2.deg[k2[0]] * sum(self.a1.shifted(x) for x in k1[1:])
        pre = (-1) ** (e % 2)
        seq = [self.left(x) for x in k1[1:]] + [self.right(y) for y in k2[1:]]
        head = (k1[0], k2[0])
        out: dict = {}
        for order in itertools.permutations(range(n + m)):
            first = [i for i in order if i < n]
            second = [i for i in order if i >= n]
            if first != sorted(first) or second != sorted(second):
                continue
            key = (head,) + tuple(seq[i] for i in order)
            _acc(out, key, Fraction(pre * self._perm_sign(seq, order)))
        return out

    def _is_rotation(self, idx: list[int], lo: int, size: int) -> int | None:
        """If idx is a cyclic rotation of lo..lo+size-1, return the position of lo."""
        if len(idx) != size:
            return None
        p = idx.index(lo)
        for t in range(size):
            if idx[(p + t) % size] != lo + t:
                return None
        return p

    def _restricted(self, k1, k2, pred) -> dict:
        n1, m1 = len(k1), len(k2)
        seq = [self.left(x) for x in k1] + [self.right(y) for y in k2]
        out: dict = {}
        pre = self._star_star(k1)
        for order in itertools.permutations(range(n1 + m1)):
            if not pred(order, n1, m1):
                continue
            key = (self.one,) + tuple(seq[i] for i in order)
            _acc(out, key, Fraction(pre * self._perm_sign(seq, order)))
        return out

    def Sh(self, k1: tuple, k2: tuple) -> dict:
        def pred(order, n1, m1):
            first = [i for i in order if i < n1]
            second = [i for i in order if i >= n1]
            if self._is_rotation(first, 0, n1) is None:
                return False
            if self._is_rotation(second, n1, m1) is None:
                return False
            return order.index(0) < order.index(n1)
        return self._restricted(k1, k2, pred)

    def sh_rs(self, r: int, s: int, k1: tuple, k2: tuple) -> dict:
        def pred(order, n1, m1):
            first = [i for i in order if i < n1]
            second = [i for i in order if i >= n1]
            if first != sorted(first) or second != sorted(second):
                return False
            return order.index(r) < order.index(n1 + s)
        if r >= len(k1) or s >= len(k2):
            return {}
        return self._restricted(k1, k2, pred)

    def sh_rs0(self, r: int, s: int, k1: tuple, k2: tuple) -> dict:
        def pred(order, n1, m1):
            first = [i for i in order if i < n1]
            second = [i for i in order if i >= n1]
            if first != sorted(first) or second != sorted(second):
                return False
            return order.index(n1 + s) == order.index(r) + 1
        if r >= len(k1) or s >= len(k2):
            return {}
        return self._restricted(k1, k2, pred)

    # the product algebra, for mu on the target

    def times(self, x, y) -> dict:
        s = (-1) ** ((self.a2.deg[x[1]] * self.a1.deg[y[0]]) % 2)
        out: dict = {}
        for p, c1 in self.a1.times(x[0], y[0]).items():
            for q, c2 in self.a2.times(x[1], y[1]).items():
                _acc(out, (p, q), s * c1 * c2)
        return out

    def d(self, x) -> dict:
        out: dict = {}
        for p, c in self.a1.d(x[0]).items():
            _acc(out, (p, x[1]), c)
        s = (-1) ** self.a1.deg[x[0]]
        for q, c in self.a2.d(x[1]).items():
            _acc(out, (x[0], q), s * c)
        return out

    def target(self) -> OracleAlgebra:
        """The tensor product as an :class:`OracleAlgebra` keyed by label pairs."""
        if self._target is not None:
            return self._target
        t = OracleAlgebra.__new__(OracleAlgebra)
        elems = [(x, y) for x in self.a1.labels for y in self.a2.labels]
        t.labels = elems
        t.index = {e: i for i, e in enumerate(elems)}
        t.deg = {e: self.deg(e) for e in elems}
        t.one = self.one
        t.table = {(x, y): self.times(x, y) for x in elems for y in elems}
        t.dtable = {x: self.d(x) for x in elems}
        self._target = t
        return t

    def tilde_sh_rs0(self, r: int, s: int, k1: tuple, k2: tuple) -> dict:
        t = self.target()
        out: dict = {}
        for j1, c1 in self.a1.tau_pow(k1, -r).items():
            for j2, c2 in self.a2.tau_pow(k2, -s).items():
                for k3, c3 in self.sh_rs0(r, s, j1, j2).items():
                    for k4, c4 in t.mu(r + s + 1, k3).items():
                        _acc(out, k4, c1 * c2 * c3 * c4)
        return out

    def H(self, k1: tuple, k2: tuple) -> dict:
        n, m = len(k1) - 1, len(k2) - 1
        a1, a2 = self.a1, self.a2
        x_par = (a1.deg[k1[0]] + sum(a1.shifted(x) for x in k1[1:])) % 2
        out: dict = {}
        for i in range(1, n + 1):
            for r in range(0, n - i + 1):
                for s in range(0, m + 1):
                    left = _lin(lambda k: a1.tau_pow(k, -r), a1.delta(i, k1))
                    right = a2.tau_pow(k2, -s)
                    for j1, c1 in left.items():
                        for j2, c2 in right.items():
                            for k3, c3 in self.sh_rs(r, s, j1, j2).items():
                                _acc(out, k3, c1 * c2 * c3)
        for i in range(1, m + 1):
            for r in range(0, n + 1):
                for s in range(0, m - i + 1):
                    left = a1.tau_pow(k1, -r)
                    right = _lin(lambda k: a2.tau_pow(k, -s), a2.delta(i, k2))
                    for j1, c1 in left.items():
                        for j2, c2 in right.items():
                            for k3, c3 in self.sh_rs(r, s, j1, j2).items():
                                _acc(out, k3, (-1) ** x_par * c1 * c2 * c3)
        return out

    def to_indices(self, chain: Mapping, m2: int, idx1: dict, idx2: dict) -> dict:
        return {tuple(idx1[x] * m2 + idx2[y] for x, y in key): c for key, c in chain.items()}


# ---------------------------------------------------------------------------
# equivalence driver


def _exp_neg(alg: OracleAlgebra, phi, signed: bool, N: int, key: tuple) -> dict:
    out: dict = {key: Fraction(1)}
    cur: dict = {key: Fraction(1)}
    j = 0
    fact = 1
    while cur:
        j += 1
        fact *= j
        cur = _lin(lambda k: alg.insertion(phi, signed, k), cur)
        cur = {k: c for k, c in cur.items() if len(k) - 1 <= N}
        for k, c in cur.items():
            _acc(out, k, Fraction((-1) ** j, fact) * c)
    return out


def _pool(seed: int):
    from .dgalg import BUNDLED, random_algebra
    algs = [build() for build in BUNDLED.values()]
    algs = [a for a in algs if a.dim <= 4]
    algs += [random_algebra(seed * 1000 + i) for i in range(10)]
    return algs


def elementary_cases():
    """(name, flavors) for every elementary operator that is compared."""
    both = ("normalized", "unnormalized")
    return [
        ("tau", ("unnormalized",)), ("tau_inv", ("unnormalized",)),
        ("delta_i", both), ("mu_i", both), ("b_delta", both), ("b_mu", both), ("b", both),
        ("b_mu_dagger", ("unnormalized",)), ("mu_star", ("unnormalized",)), ("h", both),
        ("N", ("unnormalized",)), ("B", both), ("gamma", both), ("e", both),
        ("e_closed", both), ("E", both), ("insertion_unsigned", both),
        ("insertion_signed", both), ("exp_neg_insertion", both), ("projection", ("unnormalized",)),
    ]


def shuffle_cases():
    both = ("normalized", "unnormalized")
    return [("sh", both), ("Sh", both), ("sh_rs", both), ("sh_rs0", both),
            ("tilde_sh_rs0", ("unnormalized",)), ("H", both)]


def _fast_elementary(name, a, flavor, i, phi, N):
    from . import hochschild as hc
    table = {
        "tau": lambda: hc.op_tau(a, flavor), "tau_inv": lambda: hc.op_tau_inv(a, flavor),
        "delta_i": lambda: hc.op_delta_i(a, i, flavor), "mu_i": lambda: hc.op_mu_i(a, i, flavor),
        "b_delta": lambda: hc.op_b_delta(a, flavor), "b_mu": lambda: hc.op_b_mu(a, flavor),
        "b": lambda: hc.op_b(a, flavor), "b_mu_dagger": lambda: hc.op_b_mu_dagger(a, flavor),
        "mu_star": lambda: hc.op_mu_star(a, flavor), "h": lambda: hc.op_h(a, flavor),
        "N": lambda: hc.op_Nsum(a), "B": lambda: hc.op_B(a, flavor),
        "gamma": lambda: hc.op_gamma(a), "e": lambda: hc.op_e_delta(a, flavor),
        "e_closed": lambda: hc.op_e_delta_closed(a, flavor), "E": lambda: hc.op_E_delta(a, flavor),
        "insertion_unsigned": lambda: hc.op_insertion(a, phi, False, flavor),
        "insertion_signed": lambda: hc.op_insertion(a, phi, True, flavor),
        "exp_neg_insertion": lambda: hc.op_exp_neg_insertion(a, phi, N, flavor),
        "projection": lambda: hc.op_projection(a),
    }
    return table[name]()


def _oracle_elementary(name, o: OracleAlgebra, flavor, i, phi, N, key):
    norm = flavor == "normalized"
    ph = {o.labels[k]: c for k, c in phi.items()} if phi is not None else None
    fn = {
        "tau": o.tau, "tau_inv": o.tau_inv, "delta_i": lambda k: o.delta(i, k),
        "mu_i": lambda k: o.mu(i, k), "b_delta": o.b_delta, "b_mu": o.b_mu, "b": o.b,
        "b_mu_dagger": o.b_mu_dagger, "mu_star": o.mu_star, "h": o.h, "N": o.N,
        "gamma": o.gamma, "e": o.e, "e_closed": o.e, "E": o.E,
        "insertion_unsigned": lambda k: o.insertion(ph, False, k),
        "insertion_signed": lambda k: o.insertion(ph, True, k),
        "exp_neg_insertion": lambda k: _exp_neg(o, ph, False, N, k),
        "projection": lambda k: o.project({k: Fraction(1)}),
    }
    if name == "B":
        return o.normalized("B", key) if norm else o.B(key)
    out = fn[name](key)
    return o.project(out) if norm else out


def _random_key(rng, a, n, flavor):
    tail = a.reduced if flavor == "normalized" else tuple(range(a.dim))
    return (rng.randrange(a.dim),) + tuple(rng.choice(tail) for _ in range(n))


def _as_fractions(chain: Mapping) -> dict:
    return {k: Fraction(c) for k, c in chain.items() if c}


def compare_elementary(rounds: int = 500, seed: int = 0, max_degree: int = 3) -> dict:
    """Compare each elementary operator with the oracle on ``rounds`` random inputs.

    Returns ``{name: {"checked": int, "mismatches": [witness, ...]}}``.
    """
    import random
    rng = random.Random(seed)
    pool = _pool(seed)
    oracles = {id(a): OracleAlgebra(a) for a in pool}
    results = {}
    for name, flavors in elementary_cases():
        checked, bad = 0, []
        while checked < rounds:
            a = rng.choice(pool)
            flavor = rng.choice(flavors)
            n = rng.randrange(0, max_degree + 1)
            if flavor == "normalized" and not a.reduced:
                n = 0
            phi = None
            if name.startswith("insertion") or name == "exp_neg_insertion":
                want = 0 if name == "insertion_signed" else 1
                cands = [k for k in range(a.dim) if a.parity[k] == want]
                if not cands:
                    continue
                phi = {rng.choice(cands): rng.choice([1, -1, 2])}
            i = rng.randrange(0, n + 1)
            N = max_degree + 1
            key = _random_key(rng, a, n, flavor)
            fast = _fast_elementary(name, a, flavor, i, phi, N)
            got = _as_fractions(fast.image(key))
            o = oracles[id(a)]
            want_chain = o.to_indices(_oracle_elementary(name, o, flavor, i, phi, N,
                                                         tuple(o.labels[x] for x in key)))
            checked += 1
            if got != want_chain and len(bad) < 5:
                bad.append({"algebra": a.name, "flavor": flavor, "key": key, "i": i,
                            "fast": repr(got), "oracle": repr(want_chain)})
        results[name] = {"checked": checked, "mismatches": bad}
    return results


def compare_shuffles(rounds: int = 500, seed: int = 0, max_total: int = 3) -> dict:
    """Compare each shuffle generator with its permutation-filter version."""
    import random
    from .kunneth import Kunneth
    rng = random.Random(seed + 1)
    pool = [a for a in _pool(seed) if a.dim <= 3]
    oracles = {id(a): OracleAlgebra(a) for a in pool}
    pairs: dict = {}
    results = {}
    for name, flavors in shuffle_cases():
        checked, bad = 0, []
        while checked < rounds:
            a1, a2 = rng.choice(pool), rng.choice(pool)
            flavor = rng.choice(flavors)
            total = rng.randrange(0, max_total + 1)
            n = rng.randrange(0, total + 1)
            m = total - n
            if flavor == "normalized":
                if not a1.reduced:
                    n = 0
                if not a2.reduced:
                    m = 0
            k1 = _random_key(rng, a1, n, flavor)
            k2 = _random_key(rng, a2, m, flavor)
            r, s = rng.randrange(0, n + 1), rng.randrange(0, m + 1)
            pk = (id(a1), id(a2), flavor)
            if pk not in pairs:
                o1, o2 = oracles[id(a1)], oracles[id(a2)]
                pairs[pk] = (Kunneth(a1, a2, flavor), OraclePair(o1, o2))
            K, P = pairs[pk]
            fast = {"sh": K.sh, "Sh": K.Sh, "H": K.H,
                    "sh_rs": lambda: K.sh_rs(r, s), "sh_rs0": lambda: K.sh_rs0(r, s),
                    "tilde_sh_rs0": lambda: K.tilde_sh_rs0(r, s)}[name]()
            got = _as_fractions(fast.image((k1, k2)))
            l1 = tuple(P.a1.labels[x] for x in k1)
            l2 = tuple(P.a2.labels[x] for x in k2)
            ref = {"sh": lambda: P.sh(l1, l2), "Sh": lambda: P.Sh(l1, l2),
                   "H": lambda: P.H(l1, l2), "sh_rs": lambda: P.sh_rs(r, s, l1, l2),
                   "sh_rs0": lambda: P.sh_rs0(r, s, l1, l2),
                   "tilde_sh_rs0": lambda: P.tilde_sh_rs0(r, s, l1, l2)}[name]()
            if flavor == "normalized":
                ref = {k: c for k, c in ref.items() if P.one not in k[1:]}
            want_chain = P.to_indices(ref, a2.dim, P.a1.index, P.a2.index)
            checked += 1
            if got != want_chain and len(bad) < 5:
                bad.append({"algebras": (a1.name, a2.name), "flavor": flavor, "key": (k1, k2),
                            "r": r, "s": s, "fast": repr(got), "oracle": repr(want_chain)})
        results[name] = {"checked": checked, "mismatches": bad}
    return results
