"""Exact bivariate polynomials in the spectral parameters ``u`` and ``v``.

Coefficients are Gaussian rationals stored as ``(re, im)`` pairs of ``int``
or :class:`fractions.Fraction`; no floating point ever enters the arithmetic.
Floats passed in are converted exactly (``Fraction(0.3)`` is the binary
value of ``0.3``, not ``3/10``); use strings or Fractions for decimal values.

Text grammar (used by :meth:`BivariatePolynomial.parse` and ``str()``)::

    expr   := ['+' | '-'] term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := atom ['^' INT]
    atom   := NUMBER | 'u' | 'v' | 'i' | '(' expr ')'
    NUMBER := INT ['/' INT] | INT '.' DIGITS

Examples: ``1 - u^2``, ``-i*u*v``, ``(1/2+3*i)*u^2*v``, ``0.25``.
"""
from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational

from .errors import ArgumentError, ResourceError

MAX_DEGREE = 64

_ZERO = (0, 0)
_ONE = (1, 0)


def _rational(x):
    if isinstance(x, bool):
        return int(x)
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else x
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, float):
        f = Fraction(x)
        return f.numerator if f.denominator == 1 else f
    if isinstance(x, str):
        f = Fraction(x)
        return f.numerator if f.denominator == 1 else f
    raise ArgumentError(f"cannot convert {x!r} to an exact rational")


def to_gaussian(x) -> tuple:
    """Convert a scalar (int, Fraction, float, complex, or pair) to ``(re, im)``."""
    if isinstance(x, tuple) and len(x) == 2:
        return _rational(x[0]), _rational(x[1])
    if isinstance(x, complex):
        return _rational(x.real), _rational(x.imag)
    return _rational(x), 0


def gaussian_mul(a, b):
    ar, ai = a
    br, bi = b
    if ai == 0 and bi == 0:
        return ar * br, 0
    return ar * br - ai * bi, ar * bi + ai * br


def gaussian_rotate(c, k):
    """Multiply ``c`` by ``i**k``."""
    re_, im = c
    k &= 3
    if k == 0:
        return c
    if k == 1:
        return -im, re_
    if k == 2:
        return -re_, -im
    return im, -re_


def gaussian_to_complex(c) -> complex:
    return complex(float(c[0]), float(c[1]))


def mul_raw(ta: dict, tb: dict) -> dict:
    """Product of two raw term dicts ``{(deg_u, deg_v): (re, im)}``."""
    out: dict = {}
    for (a1, b1), (r1, i1) in ta.items():
        for (a2, b2), (r2, i2) in tb.items():
            if i1 == 0 and i2 == 0:
                re_, im = r1 * r2, 0
            else:
                re_, im = r1 * r2 - i1 * i2, r1 * i2 + i1 * r2
            key = (a1 + a2, b1 + b2)
            prev = out.get(key)
            out[key] = (re_, im) if prev is None else (prev[0] + re_, prev[1] + im)
    return out


def add_raw_into(target: dict, source: dict, phase: int = 0) -> None:
    """``target += i**phase * source`` on raw term dicts (in place)."""
    for key, c in source.items():
        if phase:
            c = gaussian_rotate(c, phase)
        prev = target.get(key)
        target[key] = c if prev is None else (prev[0] + c[0], prev[1] + c[1])


def check_degree(terms: dict) -> None:
    for a, b in terms:
        if a > MAX_DEGREE or b > MAX_DEGREE:
            raise ResourceError(f"polynomial degree ({a}, {b}) exceeds the limit {MAX_DEGREE}")


class BivariatePolynomial:
    """Immutable polynomial ``sum c[a,b] u^a v^b`` with Gaussian-rational ``c``."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms=None):
        clean = {}
        for key, c in (terms or {}).items():
            a, b = int(key[0]), int(key[1])
            if a < 0 or b < 0:
                raise ArgumentError(f"negative exponent in {key}")
            c = to_gaussian(c)
            if c[0] != 0 or c[1] != 0:
                clean[(a, b)] = c
        check_degree(clean)
        self._terms = clean
        self._hash = None

    @classmethod
    def _from_raw(cls, terms: dict):
        """Wrap a raw dict without conversion (internal fast path)."""
        obj = cls.__new__(cls)
        obj._terms = {k: c for k, c in terms.items() if c[0] != 0 or c[1] != 0}
        check_degree(obj._terms)
        obj._hash = None
        return obj

    # -- constructors -----------------------------------------------------

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def constant(cls, c=1):
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, deg_u=0, deg_v=0, c=1):
        return cls({(deg_u, deg_v): c})

    @classmethod
    def variable(cls, name: str):
        if name == "u":
            return cls({(1, 0): 1})
        if name == "v":
            return cls({(0, 1): 1})
        raise ArgumentError(f"unknown variable {name!r}; only u and v exist")

    @classmethod
    def coerce(cls, x):
        if isinstance(x, cls):
            return x
        if isinstance(x, str):
            return cls.parse(x)
        return cls.constant(x)

    # -- inspection -------------------------------------------------------

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(key == (0, 0) for key in self._terms)

    @property
    def degree_u(self) -> int:
        return max((a for a, _ in self._terms), default=0)

    @property
    def degree_v(self) -> int:
        return max((b for _, b in self._terms), default=0)

    def coefficient(self, deg_u: int, deg_v: int = 0) -> tuple:
        return self._terms.get((deg_u, deg_v), _ZERO)

    def constant_value(self) -> tuple:
        if not self.is_constant():
            raise ArgumentError(f"{self} is not constant")
        return self.coefficient(0, 0)

    def evaluate(self, u=0.0, v=0.0) -> complex:
        """Numeric value at complex ``(u, v)``."""
        total = 0j
        for (a, b), c in self._terms.items():
            total += gaussian_to_complex(c) * (u**a) * (v**b)
        return complex(total)

    def evaluate_exact(self, u=0, v=0) -> tuple:
        """Exact Gaussian-rational value at exact ``(u, v)``."""
        gu, gv = to_gaussian(u), to_gaussian(v)
        total = _ZERO
        for (a, b), c in self._terms.items():
            val = c
            for _ in range(a):
                val = gaussian_mul(val, gu)
            for _ in range(b):
                val = gaussian_mul(val, gv)
            total = (total[0] + val[0], total[1] + val[1])
        return to_gaussian(total)

    def substitute(self, u=None, v=None) -> "BivariatePolynomial":
        """Replace ``u`` and/or ``v`` by polynomials (or scalars)."""
        pu = BivariatePolynomial.variable("u") if u is None else BivariatePolynomial.coerce(u)
        pv = BivariatePolynomial.variable("v") if v is None else BivariatePolynomial.coerce(v)
        result = BivariatePolynomial()
        for (a, b), c in self._terms.items():
            result = result + BivariatePolynomial.constant(c) * pu**a * pv**b
        return result

    def conjugate(self) -> "BivariatePolynomial":
        return BivariatePolynomial._from_raw({k: (r, -i) for k, (r, i) in self._terms.items()})

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        other = self._wrap(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        add_raw_into(out, other._terms)
        return BivariatePolynomial._from_raw(out)

    __radd__ = __add__

    def __neg__(self):
        return BivariatePolynomial._from_raw({k: (-r, -i) for k, (r, i) in self._terms.items()})

    def __sub__(self, other):
        other = self._wrap(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._wrap(other)
        if other is NotImplemented:
            return other
        return BivariatePolynomial._from_raw(mul_raw(self._terms, other._terms))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ArgumentError("only non-negative integer powers")
        result = BivariatePolynomial.constant(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def times_i(self, k: int = 1) -> "BivariatePolynomial":
        return BivariatePolynomial._from_raw({key: gaussian_rotate(c, k) for key, c in self._terms.items()})

    @staticmethod
    def _wrap(other):
        if isinstance(other, BivariatePolynomial):
            return other
        if isinstance(other, (int, float, complex, Fraction, tuple)):
            return BivariatePolynomial.constant(other)
        return NotImplemented

    def __eq__(self, other):
        other = self._wrap(other)
        if other is NotImplemented:
            return other
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # -- text ----------------------------------------------------------------

    def __repr__(self):
        return f"BivariatePolynomial({str(self)!r})"

    def __str__(self):
        if not self._terms:
            return "0"
        pieces = []
        for (a, b) in sorted(self._terms):
            negative, body = _format_term(self._terms[(a, b)], a, b)
            pieces.append((negative, body))
        text = ("-" if pieces[0][0] else "") + pieces[0][1]
        for negative, body in pieces[1:]:
            text += (" - " if negative else " + ") + body
        return text

    @classmethod
    def parse(cls, text: str) -> "BivariatePolynomial":
        return _Parser(text).parse()


def _format_rational(x) -> str:
    return str(x)


def _format_term(c, a, b):
    """Return (is_negative, text without leading sign)."""
    re_, im = c
    mono = "*".join(
        part
        for part in (
            "" if a == 0 else ("u" if a == 1 else f"u^{a}"),
            "" if b == 0 else ("v" if b == 1 else f"v^{b}"),
        )
        if part
    )
    if im == 0:
        negative, mag = re_ < 0, abs(re_)
        coef = "" if (mag == 1 and mono) else _format_rational(mag)
    elif re_ == 0:
        negative, mag = im < 0, abs(im)
        coef = "i" if mag == 1 else f"{_format_rational(mag)}*i"
    else:
        negative = False
        sign = "-" if im < 0 else "+"
        imag = "i" if abs(im) == 1 else f"{_format_rational(abs(im))}*i"
        coef = f"({_format_rational(re_)}{sign}{imag})"
    if coef and mono:
        return negative, f"{coef}*{mono}"
    return negative, coef or mono


_TOKEN = re.compile(r"\s*(?:(\d+\.\d+|\d+(?:/\d+)?)|([uvi])|(\^)|([-+*()]))")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = []
        pos = 0
        stripped = text.rstrip()
        while pos < len(stripped):
            m = _TOKEN.match(stripped, pos)
            if not m:
                raise ArgumentError(f"cannot parse polynomial {text!r} at position {pos}")
            number, name, caret, op = m.groups()
            if number is not None:
                self.tokens.append(("num", number))
            elif name is not None:
                self.tokens.append(("name", name))
            elif caret is not None:
                self.tokens.append(("op", "^"))
            else:
                self.tokens.append(("op", op))
            pos = m.end()
        self.i = 0

    def _peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def _take(self):
        tok = self._peek()
        self.i += 1
        return tok

    def _fail(self, what):
        raise ArgumentError(f"cannot parse polynomial {self.text!r}: {what}")

    def parse(self):
        if not self.tokens:
            self._fail("empty expression")
        result = self._expr()
        if self.i != len(self.tokens):
            self._fail(f"unexpected token {self._peek()[1]!r}")
        return result

    def _expr(self):
        sign = 1
        if self._peek() in (("op", "+"), ("op", "-")):
            sign = -1 if self._take()[1] == "-" else 1
        result = self._term() * sign
        while self._peek() in (("op", "+"), ("op", "-")):
            op = self._take()[1]
            rhs = self._term()
            result = result + rhs if op == "+" else result - rhs
        return result

    def _term(self):
        result = self._factor()
        while self._peek() == ("op", "*"):
            self._take()
            result = result * self._factor()
        return result

    def _factor(self):
        base = self._atom()
        if self._peek() == ("op", "^"):
            self._take()
            kind, value = self._take()
            if kind != "num" or not value.isdigit():
                self._fail("exponent must be a non-negative integer")
            base = base ** int(value)
        return base

    def _atom(self):
        kind, value = self._take()
        if kind == "num":
            return BivariatePolynomial.constant(Fraction(value))
        if kind == "name":
            if value == "i":
                return BivariatePolynomial.constant((0, 1))
            return BivariatePolynomial.variable(value)
        if (kind, value) == ("op", "("):
            inner = self._expr()
            if self._take() != ("op", ")"):
                self._fail("missing ')'")
            return inner
        self._fail(f"unexpected token {value!r}")
