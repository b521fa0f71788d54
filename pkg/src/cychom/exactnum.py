"""Exact scalars: rationals and Laurent polynomials in the formal variable ``u``.

Rationals are :class:`fractions.Fraction` (arbitrary precision, always reduced,
positive denominator).  :class:`LaurentScalar` is an immutable Laurent
polynomial with rational coefficients and an explicit exponent window.
"""
from __future__ import annotations

import os
from fractions import Fraction
from typing import Iterable, Mapping, Union

Rational = Fraction
ScalarLike = Union[int, Fraction, "LaurentScalar"]

_DEFAULT_WINDOW = (-8, 8)


class WindowOverflow(ArithmeticError):
    """A u-exponent left the configured global window."""


def _window_from_env() -> tuple[int, int]:
    raw = os.environ.get("CYCHOM_MAX_UWINDOW")
    if not raw:
        return _DEFAULT_WINDOW
    raw = raw.strip()
    if "," in raw:
        lo, hi = (int(t) for t in raw.split(","))
    else:
        hi = int(raw)
        lo = -hi
    if lo > hi:
        raise ValueError(f"bad CYCHOM_MAX_UWINDOW {raw!r}")
    return lo, hi


_global_window = _window_from_env()


def global_window() -> tuple[int, int]:
    return _global_window


def set_global_window(lo: int, hi: int) -> None:
    global _global_window
    if lo > hi:
        raise ValueError("empty window")
    _global_window = (lo, hi)


def check_exponent(e: int) -> None:
    lo, hi = _global_window
    if e < lo or e > hi:
        raise WindowOverflow(f"u-exponent {e} outside global window [{lo}, {hi}]")


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse ``"p/q"`` or ``"p"``; rejects zero denominators and floats."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"cannot parse rational from {text!r}")
    s = text.strip()
    if "/" in s:
        p, q = s.split("/", 1)
        num, den = int(p), int(q)
        if den == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return Fraction(num, den)
    return Fraction(int(s))


def format_rational(x: Fraction | int) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


class LaurentScalar:
    """Immutable Laurent polynomial ``sum c_e u^e`` with rational ``c_e``.

    ``window`` bounds the stored exponents; it defaults to the tight window of
    the nonzero coefficients (``(0, 0)`` for the zero polynomial).
    """

    __slots__ = ("_coeffs", "_window", "_hash")

    def __init__(self, coeffs: Mapping[int, ScalarLike] | None = None,
                 window: tuple[int, int] | None = None):
        clean: dict[int, Fraction] = {}
        for e, c in (coeffs or {}).items():
            c = Fraction(c)
            if c:
                clean[int(e)] = c
        if window is None:
            window = (min(clean), max(clean)) if clean else (0, 0)
        lo, hi = window
        if lo > hi:
            raise ValueError("empty window")
        for e in clean:
            if e < lo or e > hi:
                raise ValueError(f"exponent {e} outside window {window}")
        for e in (lo, hi):
            check_exponent(e)
        self._coeffs = dict(sorted(clean.items()))
        self._window = (lo, hi)
        self._hash = None

    # constructors
    @classmethod
    def const(cls, c: int | Fraction) -> "LaurentScalar":
        return cls({0: c}, (0, 0))

    @classmethod
    def monomial(cls, c: int | Fraction, e: int) -> "LaurentScalar":
        return cls({e: c}, (e, e))

    @classmethod
    def coerce(cls, x: ScalarLike) -> "LaurentScalar":
        if isinstance(x, LaurentScalar):
            return x
        return cls.const(x)

    # accessors
    @property
    def coefficients(self) -> dict[int, Fraction]:
        return dict(self._coeffs)

    @property
    def window(self) -> tuple[int, int]:
        return self._window

    def coeff(self, e: int) -> Fraction:
        return self._coeffs.get(e, Fraction(0))

    def is_zero(self) -> bool:
        return not self._coeffs

    def is_constant(self) -> bool:
        return all(e == 0 for e in self._coeffs)

    def valuation(self) -> int | None:
        return min(self._coeffs) if self._coeffs else None

    def degree(self) -> int | None:
        return max(self._coeffs) if self._coeffs else None

    def items(self):
        return self._coeffs.items()

    # arithmetic
    def __add__(self, other: ScalarLike) -> "LaurentScalar":
        other = LaurentScalar.coerce(other)
        out = dict(self._coeffs)
        for e, c in other._coeffs.items():
            out[e] = out.get(e, 0) + c
        lo = min(self._window[0], other._window[0])
        hi = max(self._window[1], other._window[1])
        return LaurentScalar(out, (lo, hi))

    __radd__ = __add__

    def __neg__(self) -> "LaurentScalar":
        return LaurentScalar({e: -c for e, c in self._coeffs.items()}, self._window)

    def __sub__(self, other: ScalarLike) -> "LaurentScalar":
        return self + (-LaurentScalar.coerce(other))

    def __rsub__(self, other: ScalarLike) -> "LaurentScalar":
        return LaurentScalar.coerce(other) - self

    def __mul__(self, other: ScalarLike) -> "LaurentScalar":
        return laurent_mul(self, LaurentScalar.coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other: int | Fraction) -> "LaurentScalar":
        if isinstance(other, LaurentScalar):
            if len(other._coeffs) != 1:
                raise ZeroDivisionError("only division by monomials is exact")
            (e, c), = other._coeffs.items()
            return self * LaurentScalar.monomial(1 / c, -e)
        return LaurentScalar({e: c / other for e, c in self._coeffs.items()}, self._window)

    def shift(self, k: int) -> "LaurentScalar":
        """Multiply by ``u**k``."""
        lo, hi = self._window
        return LaurentScalar({e + k: c for e, c in self._coeffs.items()}, (lo + k, hi + k))

    def derivative(self) -> "LaurentScalar":
        return laurent_derivative(self)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = LaurentScalar.const(other)
        if not isinstance(other, LaurentScalar):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._coeffs.items()))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self._coeffs)

    def __repr__(self) -> str:
        if not self._coeffs:
            return "LaurentScalar(0)"
        return f"LaurentScalar({self})"

    def __str__(self) -> str:
        if not self._coeffs:
            return "0"
        parts = []
        for e, c in self._coeffs.items():
            cs = format_rational(c)
            if e == 0:
                parts.append(cs)
            elif e == 1:
                parts.append(f"{cs}*u")
            else:
                parts.append(f"{cs}*u^{e}")
        return " + ".join(parts)

    # serialization
    def to_json(self) -> list[list]:
        return [[e, format_rational(c)] for e, c in self._coeffs.items()]

    @classmethod
    def from_json(cls, data: Iterable) -> "LaurentScalar":
        return cls({int(e): parse_rational(c) for e, c in data})


def laurent_mul(a: LaurentScalar, b: LaurentScalar) -> LaurentScalar:
    out: dict[int, Fraction] = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
    window = (a.window[0] + b.window[0], a.window[1] + b.window[1])
    return LaurentScalar(out, window)


def laurent_derivative(a: LaurentScalar) -> LaurentScalar:
    out = {e - 1: e * c for e, c in a.items() if e != 0}
    lo, hi = a.window
    return LaurentScalar(out, (lo - 1, hi - 1) if out else None)


U = LaurentScalar.monomial(1, 1)
ZERO = LaurentScalar()
ONE = LaurentScalar.const(1)
