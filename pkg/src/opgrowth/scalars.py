"""Scalar arithmetic shared by every pipeline.

Two coefficient kinds are used throughout the package:

* ``EXACT`` -- Gaussian rationals (:class:`ExactComplex`, a pair of
  :class:`fractions.Fraction`).  Used whenever the model parameters are
  rational and results must be reproducible bit for bit (toy-model moments,
  small-depth spin-chain moments, exact Hankel determinants).  No rounding
  ever happens in this kind.

* ``BIG`` -- arbitrary-precision binary floats (``gmpy2.mpfr`` /
  ``gmpy2.mpc``).  Moments grow factorially and Hankel determinants faster
  still, so fixed-width floats are useless beyond a handful of iterations.
  All big-float code must run inside :func:`working_precision` so that every
  operation rounds at one explicit precision, and that precision is recorded
  next to every result that leaves a module.

Mixing kinds (or two different precisions) in one inner product is a bug, not
a convenience; containers carry their kind and check it.
"""

from __future__ import annotations

from fractions import Fraction

import gmpy2

EXACT = "exact"
BIG = "big"

DEFAULT_BITS = 1024


def working_precision(bits: int):
    """Context manager selecting the rounding precision for gmpy2 scalars."""
    if bits < 2:
        raise ValueError(f"precision must be >= 2 bits, got {bits}")
    return gmpy2.context(precision=bits)


class ExactComplex:
    """A complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    def __add__(self, other):
        other = _coerce(other)
        return ExactComplex(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        return ExactComplex(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        return ExactComplex(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        d = other.re * other.re + other.im * other.im
        if not d:
            raise ZeroDivisionError("division by exact zero")
        return ExactComplex(
            (self.re * other.re + self.im * other.im) / d,
            (self.im * other.re - self.re * other.im) / d,
        )

    def __neg__(self):
        return ExactComplex(-self.re, -self.im)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if isinstance(other, ExactComplex):
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def conjugate(self) -> "ExactComplex":
        return ExactComplex(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __complex__(self):
        return complex(self.re) + 1j * complex(self.im)

    def __repr__(self):
        return f"ExactComplex({self.re!r}, {self.im!r})"


def _coerce(x) -> ExactComplex:
    if isinstance(x, ExactComplex):
        return x
    if isinstance(x, (int, Fraction)):
        return ExactComplex(x, 0)
    raise TypeError(f"cannot mix exact scalars with {type(x).__name__}")


EC_ZERO = ExactComplex(0, 0)
EC_ONE = ExactComplex(1, 0)
EC_I = ExactComplex(0, 1)


# ---------------------------------------------------------------------------
# kind-generic helpers


def make_complex(kind: str, re, im=0):
    """Build a scalar of the requested kind (BIG must run under a context)."""
    if kind == EXACT:
        return ExactComplex(re, im)
    if kind == BIG:
        return gmpy2.mpc(_to_mpfr(re), _to_mpfr(im))
    raise ValueError(f"unknown scalar kind {kind!r}")


def _to_mpfr(x):
    if isinstance(x, Fraction):
        return gmpy2.mpfr(x.numerator) / gmpy2.mpfr(x.denominator)
    return gmpy2.mpfr(x)


def conj(z):
    return z.conjugate()


def abs2(z):
    """|z|^2 as a real scalar of the matching kind."""
    if isinstance(z, ExactComplex):
        return z.abs2()
    return gmpy2.norm(z)


def is_zero(z) -> bool:
    if isinstance(z, ExactComplex):
        return not z
    return z == 0


def to_complex(z) -> complex:
    """Lossy conversion to a machine complex, for reporting only."""
    return complex(z)


def real_part(z):
    if isinstance(z, ExactComplex):
        return z.re
    return z.real


def imag_part(z):
    if isinstance(z, ExactComplex):
        return z.im
    return z.imag


def kind_of(z) -> str:
    return EXACT if isinstance(z, ExactComplex) else BIG


def format_real(x, digits: int = 24) -> str:
    """Deterministic scientific-notation rendering of an exact or big-float real."""
    if isinstance(x, Fraction):
        with working_precision(max(96, int(digits * 3.33) + 16)):
            x = gmpy2.mpfr(x.numerator) / gmpy2.mpfr(x.denominator)
    elif isinstance(x, (int, float)):
        x = gmpy2.mpfr(x)
    if gmpy2.is_nan(x):
        return "nan"
    if gmpy2.is_infinite(x):
        return "-inf" if x < 0 else "inf"
    if x == 0:
        return "0." + "0" * (digits - 1) + "e+00"
    mant, exp, _ = gmpy2.digits(x, 10, digits)
    sign = "-" if mant.startswith("-") else ""
    mant = mant.lstrip("-")
    return f"{sign}{mant[0]}.{mant[1:]}e{exp - 1:+03d}"


def parse_rational(text: str) -> Fraction:
    """Parse CLI-style rationals: '1/6', '0.1', '3'."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(text)
