"""Compiled exhaustive checks of the mixed-complex axioms.

The operators ``b`` and ``B`` are re-implemented over integer structure
constants with numba so that ``b^2``, ``B^2`` and ``bB + Bb`` can be verified
on every basis chain of algebras such as ``A_f`` at truncation N = 5, where
the pure Python operators would take far too long.  The sign conventions are
those of :mod:`cychom.hochschild`; ``kernel_image`` exposes single images so
the tests can compare both implementations term by term.  Algebras with
non-integral structure constants fall back to the Python operators.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .dgalg import DgAlgebra
from .hochschild import NORMALIZED, enumerate_basis, op_B, op_b

__all__ = ["AxiomResult", "check_mixed_complex", "kernel_image", "scan_terms", "IDENTITIES",
           "CONNECTION_TERMS", "kernel_supported"]

IDENTITIES = ("b^2", "B^2", "bB+Bb")
# operator codes understood by the kernel
OP_b, OP_B, OP_BDELTA, OP_BMU, OP_E_SMALL, OP_E, OP_GAMMA, OP_ID = range(8)
_OPS = {"b": OP_b, "B": OP_B, "b(delta)": OP_BDELTA, "b(mu)": OP_BMU, "e(delta)": OP_E_SMALL,
        "E(delta)": OP_E, "gamma": OP_GAMMA, "id": OP_ID}
MAXL = 16          # longest chain (tensor degree + 2) the buffers hold
MAXT = 1 << 15     # terms per composite image
HASH = 1 << 14


def _tables(a: DgAlgebra):
    m = a.dim
    mul_ptr = np.zeros(m * m + 1, np.int64)
    mk, mc = [], []
    for i in range(m):
        for j in range(m):
            for k, c in a.mul[i][j]:
                mk.append(k)
                mc.append(int(c))
            mul_ptr[i * m + j + 1] = len(mk)
    d_ptr = np.zeros(m + 1, np.int64)
    dk, dc = [], []
    for i in range(m):
        for k, c in a.diff[i]:
            dk.append(k)
            dc.append(int(c))
        d_ptr[i + 1] = len(dk)
    parity = np.array(a.parity, np.int64)
    return (m, a.unit, parity, 1 - parity, mul_ptr, np.array(mk or [0], np.int64),
            np.array(mc or [0], np.int64), d_ptr, np.array(dk or [0], np.int64),
            np.array(dc or [0], np.int64))


@njit(cache=True)
def _emit(ok, ol, oc, pos, src, L, coef):
    for t in range(L):
        ok[pos, t] = src[t]
    ol[pos] = L
    oc[pos] = coef
    return pos + 1


@njit(cache=True)
def _b_terms(key, L, norm, unit, parity, pi, mul_ptr, mul_k, mul_c, d_ptr, d_k, d_c, m,
             coef, ok, ol, oc, pos, tmp, do_delta, do_mu):
    # b(delta): sum_i delta^(i)
    s = 0
    for i in range(L if do_delta else 0):
        sg = -coef if (s & 1) else coef
        ai = key[i]
        for t in range(d_ptr[ai], d_ptr[ai + 1]):
            k = d_k[t]
            if norm and i > 0 and k == unit:
                continue
            for q in range(L):
                tmp[q] = key[q]
            tmp[i] = k
            pos = _emit(ok, ol, oc, pos, tmp, L, sg * d_c[t])
        s += pi[ai]
    if L < 2 or not do_mu:
        return pos
    # b(mu): direct products mu^(i), 0 <= i <= n - 1
    s = 0
    for i in range(L - 1):
        sg = -coef if ((s + parity[key[i]]) & 1) else coef
        base = key[i] * m + key[i + 1]
        for t in range(mul_ptr[base], mul_ptr[base + 1]):
            k = mul_k[t]
            if norm and i > 0 and k == unit:
                continue
            for q in range(i):
                tmp[q] = key[q]
            tmp[i] = k
            for q in range(i + 2, L):
                tmp[q - 1] = key[q]
            pos = _emit(ok, ol, oc, pos, tmp, L - 1, sg * mul_c[t])
        s += pi[key[i]]
    # wrap-around mu^(n) = mu^(0) tau^{-1}
    last = key[L - 1]
    s = 0
    for q in range(L - 1):
        s += pi[key[q]]
    sg = coef
    if (pi[last] * s) & 1:
        sg = -sg
    if parity[last] & 1:
        sg = -sg
    base = last * m + key[0]
    for t in range(mul_ptr[base], mul_ptr[base + 1]):
        k = mul_k[t]
        tmp[0] = k
        for q in range(1, L - 1):
            tmp[q] = key[q]
        pos = _emit(ok, ol, oc, pos, tmp, L - 1, sg * mul_c[t])
    return pos


@njit(cache=True)
def _B_terms(key, L, norm, unit, pi, coef, ok, ol, oc, pos, tmp, rot):
    if norm and key[0] == unit:
        return pos
    for q in range(L):
        rot[q] = key[q]
    s = coef
    for r in range(L):
        # (unit, rot)
        tmp[0] = unit
        for q in range(L):
            tmp[q + 1] = rot[q]
        pos = _emit(ok, ol, oc, pos, tmp, L + 1, s)
        if not norm:
            # - tau^{-1}(unit, rot) = -(rot[-1], unit, rot[:-1]) with its sign
            acc = pi[unit]
            for q in range(L - 1):
                acc += pi[rot[q]]
            s2 = -s
            if (pi[rot[L - 1]] * acc) & 1:
                s2 = -s2
            tmp[0] = rot[L - 1]
            tmp[1] = unit
            for q in range(L - 1):
                tmp[q + 2] = rot[q]
            pos = _emit(ok, ol, oc, pos, tmp, L + 1, s2)
        # rot <- tau(rot)
        acc = 0
        for q in range(1, L):
            acc += pi[rot[q]]
        if (pi[rot[0]] * acc) & 1:
            s = -s
        first = rot[0]
        for q in range(L - 1):
            rot[q] = rot[q + 1]
        rot[L - 1] = first
    return pos


@njit(cache=True)
def _e_terms(key, L, unit, mul_ptr, mul_k, mul_c, d_ptr, d_k, d_c, m, coef, ok, ol, oc, pos,
             tmp):
    # e(delta)(a0[a1|...|an]) = a0 d(a1)[a2|...|an]
    if L < 2:
        return pos
    for t in range(d_ptr[key[1]], d_ptr[key[1] + 1]):
        base = key[0] * m + d_k[t]
        for t2 in range(mul_ptr[base], mul_ptr[base + 1]):
            tmp[0] = mul_k[t2]
            for q in range(2, L):
                tmp[q - 1] = key[q]
            pos = _emit(ok, ol, oc, pos, tmp, L - 1, coef * d_c[t] * mul_c[t2])
    return pos


@njit(cache=True)
def _E_terms(key, L, norm, unit, pi, d_ptr, d_k, d_c, coef, ok, ol, oc, pos, tmp, rot):
    # E(delta) = - sum_{i>=1} sum_{j=0}^{n-i} h tau^{-j} delta^(i)
    n = L - 1
    if norm and key[0] == unit:
        return pos
    s = 0
    for i in range(1, n + 1):
        s += pi[key[i - 1]]
        ai = key[i]
        for t in range(d_ptr[ai], d_ptr[ai + 1]):
            k = d_k[t]
            if norm and k == unit:
                continue
            for q in range(L):
                rot[q] = key[q]
            rot[i] = k
            sg = -coef * d_c[t]
            if s & 1:
                sg = -sg
            for j in range(n - i + 1):
                tmp[0] = unit
                for q in range(L):
                    tmp[q + 1] = rot[q]
                pos = _emit(ok, ol, oc, pos, tmp, L + 1, sg)
                # rot <- tau^{-1}(rot)
                acc = 0
                for q in range(L - 1):
                    acc += pi[rot[q]]
                if (pi[rot[L - 1]] * acc) & 1:
                    sg = -sg
                last = rot[L - 1]
                for q in range(L - 1, 0, -1):
                    rot[q] = rot[q - 1]
                rot[0] = last
    return pos


@njit(cache=True)
def _apply(which, key, L, norm, unit, parity, pi, mul_ptr, mul_k, mul_c, d_ptr, d_k, d_c, m,
           coef, ok, ol, oc, pos, tmp, rot):
    if which == OP_B:
        return _B_terms(key, L, norm, unit, pi, coef, ok, ol, oc, pos, tmp, rot)
    if which == OP_E:
        return _E_terms(key, L, norm, unit, pi, d_ptr, d_k, d_c, coef, ok, ol, oc, pos, tmp,
                        rot)
    if which == OP_E_SMALL:
        return _e_terms(key, L, unit, mul_ptr, mul_k, mul_c, d_ptr, d_k, d_c, m, coef, ok, ol,
                        oc, pos, tmp)
    if which == OP_ID or which == OP_GAMMA:
        c = coef if which == OP_ID else coef * (L - 1)
        if c == 0:
            return pos
        return _emit(ok, ol, oc, pos, key, L, c)
    return _b_terms(key, L, norm, unit, parity, pi, mul_ptr, mul_k, mul_c, d_ptr, d_k, d_c,
                    m, coef, ok, ol, oc, pos, tmp, which != OP_BMU, which != OP_BDELTA)


@njit(cache=True)
def _encode(row, L, m):
    c = 0
    for q in range(L):
        c = c * m + row[q]
    return c * 32 + L


@njit(cache=True)
def _composite_is_zero(key, L, norm, weight, first, second, unit, parity, pi, mul_ptr, mul_k,
                       mul_c, d_ptr, d_k, d_c, m, k1, l1, c1, k2, l2, c2, tmp, rot, hk, hv, used):
    """Evaluate sum of weight * second(first(key)) over the terms; True if zero."""
    pos2 = 0
    for pair in range(first.shape[0]):
        n1 = _apply(first[pair], key, L, norm, unit, parity, pi, mul_ptr, mul_k, mul_c,
                    d_ptr, d_k, d_c, m, weight[pair], k1, l1, c1, 0, tmp, rot)
        for t in range(n1):
            pos2 = _apply(second[pair], k1[t], l1[t], norm, unit, parity, pi, mul_ptr, mul_k,
                          mul_c, d_ptr, d_k, d_c, m, c1[t], k2, l2, c2, pos2, tmp, rot)
    nused = 0
    zero = True
    mask = hk.shape[0] - 1
    for t in range(pos2):
        code = _encode(k2[t], l2[t], m)
        h = (code * 11400714819323198485) & mask
        while True:
            if hk[h] == -1:
                hk[h] = code
                hv[h] = c2[t]
                used[nused] = h
                nused += 1
                break
            if hk[h] == code:
                hv[h] += c2[t]
                break
            h = (h + 1) & mask
    for q in range(nused):
        if hv[used[q]] != 0:
            zero = False
        hk[used[q]] = -1
        hv[used[q]] = 0
    return zero


@njit(cache=True)
def _scan(n, norm, weight, first, second, unit, parity, pi, mul_ptr, mul_k, mul_c, d_ptr, d_k,
          d_c, m):
    """Run the composite over every key of degree n; returns (count, failing key or [])."""
    L = n + 1
    tail = np.empty(m, np.int64)
    nt = 0
    for i in range(m):
        if not (norm and i == unit):
            tail[nt] = i
            nt += 1
    if L > 1 and nt == 0:
        return 0, np.zeros(0, np.int64)
    key = np.zeros(L, np.int64)
    digits = np.zeros(L, np.int64)
    k1 = np.zeros((MAXT, MAXL), np.int64)
    l1 = np.zeros(MAXT, np.int64)
    c1 = np.zeros(MAXT, np.int64)
    k2 = np.zeros((MAXT * 4, MAXL), np.int64)
    l2 = np.zeros(MAXT * 4, np.int64)
    c2 = np.zeros(MAXT * 4, np.int64)
    tmp = np.zeros(MAXL, np.int64)
    rot = np.zeros(MAXL, np.int64)
    hk = -np.ones(HASH * 8, np.int64)
    hv = np.zeros(HASH * 8, np.int64)
    used = np.zeros(MAXT * 4, np.int64)
    count = 0
    while True:
        key[0] = digits[0]
        for q in range(1, L):
            key[q] = tail[digits[q]]
        count += 1
        if not _composite_is_zero(key, L, norm, weight, first, second, unit, parity, pi, mul_ptr, mul_k,
                                  mul_c, d_ptr, d_k, d_c, m, k1, l1, c1, k2, l2, c2, tmp, rot,
                                  hk, hv, used):
            return count, key.copy()
        q = L - 1
        while q >= 0:
            digits[q] += 1
            lim = m if q == 0 else nt
            if digits[q] < lim:
                break
            digits[q] = 0
            q -= 1
        if q < 0:
            break
    return count, np.zeros(0, np.int64)


def _terms(*triples):
    """Kernel form of a sum of ``weight * second(first(.))`` terms."""
    w, f, g = zip(*triples)
    return (np.array(w, np.int64), np.array([_OPS[x] for x in f], np.int64),
            np.array([_OPS[x] for x in g], np.int64))


_PAIRS = {
    "b^2": _terms((1, "b", "b")),
    "B^2": _terms((1, "B", "B")),
    "bB+Bb": _terms((1, "B", "b"), (1, "b", "B")),
}
_AXIOM = "[A,b+uB]+B = (b+uB)/2u"
_CARTAN = "[e+uE,b+uB] = u b(delta)"
# Each identity of the connection check as "sum of terms = 0", scaled to integer weights.
# The labels are those of the pure Python check in cychom.connection.
CONNECTION_TERMS = {
    f"{_AXIOM}[u^-2]": ((1, "b", "e(delta)"), (-1, "e(delta)", "b")),
    f"{_AXIOM}[u^-1]": ((1, "B", "e(delta)"), (-1, "e(delta)", "B"), (1, "b", "E(delta)"),
                        (-1, "E(delta)", "b"), (-1, "b", "gamma"), (1, "gamma", "b"),
                        (-1, "b", "id")),
    f"{_AXIOM}[u^0]": ((1, "B", "E(delta)"), (-1, "E(delta)", "B"), (-1, "B", "gamma"),
                       (1, "gamma", "B"), (1, "B", "id")),
    "[gamma,b(mu)] = -b(mu)": ((1, "b(mu)", "gamma"), (-1, "gamma", "b(mu)"),
                               (1, "b(mu)", "id")),
    "[gamma,b(delta)] = 0": ((1, "b(delta)", "gamma"), (-1, "gamma", "b(delta)")),
    "[gamma,B] = B": ((1, "B", "gamma"), (-1, "gamma", "B"), (-1, "B", "id")),
    f"{_CARTAN}[u^0]": ((1, "b", "e(delta)"), (-1, "e(delta)", "b")),
    f"{_CARTAN}[u^1]": ((1, "B", "e(delta)"), (-1, "e(delta)", "B"), (1, "b", "E(delta)"),
                        (-1, "E(delta)", "b"), (-1, "b(delta)", "id")),
    f"{_CARTAN}[u^2]": ((1, "B", "E(delta)"), (-1, "E(delta)", "B")),
}

# highest input degree needing only chains up to N
_REACH = {"b^2": 0, "B^2": 2, "bB+Bb": 1}


class AxiomResult(dict):
    """Per-identity results: ``{identity: {"ok", "degrees": {n: keys checked}, "witness"}}``."""

    @property
    def ok(self) -> bool:
        return all(v["ok"] for v in self.values())


def _python_scan(a: DgAlgebra, n: int, flavor: str, name: str):
    b, B = op_b(a, flavor), op_B(a, flavor)
    ops = {"b": b, "B": B}
    pairs = {"b^2": [("b", "b")], "B^2": [("B", "B")], "bB+Bb": [("B", "b"), ("b", "B")]}[name]
    count = 0
    for key in enumerate_basis(a, n, flavor):
        count += 1
        out: dict = {}
        for fst, snd in pairs:
            for k2, c2 in ops[snd](ops[fst].image(key)).items():
                v = out.get(k2, 0) + c2
                if v:
                    out[k2] = v
                else:
                    out.pop(k2)
        if out:
            return count, key
    return count, None


def check_mixed_complex(a: DgAlgebra, N: int, flavor: str = NORMALIZED,
                        use_kernel: bool | None = None) -> AxiomResult:
    """Exhaustively verify b^2 = 0, B^2 = 0 and bB + Bb = 0 on all safe degrees.

    A degree n is safe for an identity when every intermediate chain has
    tensor degree at most N.
    """
    if N + 2 > MAXL:
        raise ValueError(f"N = {N} exceeds the kernel buffer length")
    if use_kernel is None:
        use_kernel = a.is_integral()
    if use_kernel and not a.is_integral():
        raise ValueError("the compiled kernel needs integral structure constants")
    norm = flavor == NORMALIZED
    tabs = _tables(a) if use_kernel else None
    res = AxiomResult()
    for name in IDENTITIES:
        entry = {"ok": True, "degrees": {}, "witness": None, "kernel": bool(use_kernel)}
        for n in range(N - _REACH[name] + 1):
            if use_kernel:
                m, unit, parity, pi, mp, mk, mc, dp, dk, dc = tabs
                weight, first, second = _PAIRS[name]
                count, bad = _scan(n, norm, weight, first, second, unit, parity, pi, mp, mk, mc,
                                   dp, dk, dc, m)
                bad = tuple(int(x) for x in bad) if len(bad) else None
            else:
                count, bad = _python_scan(a, n, flavor, name)
            entry["degrees"][n] = count
            if bad is not None:
                entry["ok"] = False
                entry["witness"] = {"degree": n, "key": list(bad)}
                break
        res[name] = entry
    return res


def kernel_supported(a: DgAlgebra, N: int) -> bool:
    """True when the compiled kernel can evaluate chains of ``a`` up to degree N + 2."""
    return a.is_integral() and N + 3 <= MAXL


def scan_terms(a: DgAlgebra, terms, n: int, flavor: str = NORMALIZED):
    """Check ``sum weight * second(first(key)) == 0`` on every basis key of degree n.

    ``terms`` is a sequence of ``(weight, first, second)`` with integer weights
    and operator names from ``kernel_image``'s vocabulary.  Returns the number
    of keys visited and the first failing key (or None).
    """
    m, unit, parity, pi, mp, mk, mc, dp, dk, dc = _tables(a)
    weight, first, second = _terms(*terms)
    count, bad = _scan(n, flavor == NORMALIZED, weight, first, second, unit, parity, pi, mp, mk,
                       mc, dp, dk, dc, m)
    return count, (tuple(int(x) for x in bad) if len(bad) else None)


def kernel_image(a: DgAlgebra, op: str, key, flavor: str = NORMALIZED) -> dict:
    """Image of one key under a compiled operator (for cross-checks).

    ``op`` is one of ``b``, ``B``, ``b(delta)``, ``b(mu)``, ``e(delta)``,
    ``E(delta)``, ``gamma`` or ``id``.
    """
    m, unit, parity, pi, mp, mk, mc, dp, dk, dc = _tables(a)
    L = len(key)
    k1 = np.zeros((MAXT, MAXL), np.int64)
    l1 = np.zeros(MAXT, np.int64)
    c1 = np.zeros(MAXT, np.int64)
    tmp = np.zeros(MAXL, np.int64)
    rot = np.zeros(MAXL, np.int64)
    karr = np.array(key, np.int64)
    n1 = _apply(_OPS[op], karr, L, flavor == NORMALIZED, unit, parity, pi, mp, mk, mc, dp, dk, dc,
                m, 1, k1, l1, c1, 0, tmp, rot)
    out: dict = {}
    for t in range(n1):
        kk = tuple(int(x) for x in k1[t, :l1[t]])
        v = out.get(kk, 0) + int(c1[t])
        if v:
            out[kk] = v
        else:
            out.pop(kk)
    return out
