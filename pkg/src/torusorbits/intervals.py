"""Certified interval arithmetic with exact rational endpoints.

All enclosures used by the package are closed intervals [lo, hi] with
Fraction endpoints, so the ring operations introduce no rounding at all;
width is controlled purely by how tightly the inputs were isolated.
Transcendental functions (log, arg) go through mpmath's interval context
and come back as rational enclosures, since binary floats are exact
rationals.
"""

from __future__ import annotations

from fractions import Fraction

from mpmath import iv, mpf

Rat = Fraction


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot make an exact rational from {x!r}")


def mpf_to_fraction(x) -> Fraction:
    """Exact value of an mpmath float (binary floats are dyadic rationals)."""
    sign, man, exp, _ = x._mpf_
    if man == 0 and exp != 0:
        raise PrecisionExhaustedFloat(f"non-finite float {x}")
    val = Fraction(man, 1) * (Fraction(2) ** exp if exp >= 0 else Fraction(1, 2 ** (-exp)))
    return -val if sign else val


class PrecisionExhaustedFloat(ArithmeticError):
    pass


class RInt:
    """Closed interval over the rationals."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        lo = _frac(lo)
        hi = lo if hi is None else _frac(hi)
        if hi < lo:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    # -- structure --

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __repr__(self):
        return f"RInt({self.lo}, {self.hi})"

    def __float__(self):
        return float(self.mid)

    def contains(self, x) -> bool:
        x = _frac(x)
        return self.lo <= x <= self.hi

    def contains_interval(self, other: "RInt") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def overlaps(self, other: "RInt") -> bool:
        return not (self.hi < other.lo or other.hi < self.lo)

    def sign(self) -> int:
        """+1, -1, or 0 when the interval straddles or touches zero."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        return 0

    # -- arithmetic --

    def __neg__(self):
        return RInt(-self.hi, -self.lo)

    def __add__(self, other):
        other = as_rint(other)
        return RInt(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-as_rint(other))

    def __rsub__(self, other):
        return as_rint(other) + (-self)

    def __mul__(self, other):
        other = as_rint(other)
        c = (self.lo * other.lo, self.lo * other.hi,
             self.hi * other.lo, self.hi * other.hi)
        return RInt(min(c), max(c))

    __rmul__ = __mul__

    def inverse(self):
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError("interval contains zero")
        return RInt(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        return self * as_rint(other).inverse()

    def __rtruediv__(self, other):
        return as_rint(other) * self.inverse()

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return RInt(0, max(-self.lo, self.hi))

    def square(self):
        if self.lo >= 0:
            return RInt(self.lo * self.lo, self.hi * self.hi)
        if self.hi <= 0:
            return RInt(self.hi * self.hi, self.lo * self.lo)
        return RInt(0, max(self.lo * self.lo, self.hi * self.hi))

    def pow(self, k: int):
        if k == 0:
            return RInt(1)
        if k < 0:
            return self.pow(-k).inverse()
        out = self
        for _ in range(k - 1):
            out = out * self
        return out


def as_rint(x) -> RInt:
    if isinstance(x, RInt):
        return x
    return RInt(_frac(x))


class CBox:
    """Axis-aligned rectangle in the complex plane with rational corners."""

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = as_rint(re)
        self.im = as_rint(im)

    def __repr__(self):
        return f"CBox({self.re}, {self.im})"

    @property
    def width(self) -> Fraction:
        return max(self.re.width, self.im.width)

    def mid(self) -> complex:
        return complex(float(self.re.mid), float(self.im.mid))

    def __neg__(self):
        return CBox(-self.re, -self.im)

    def __add__(self, other):
        other = as_cbox(other)
        return CBox(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-as_cbox(other))

    def __mul__(self, other):
        other = as_cbox(other)
        return CBox(self.re * other.re - self.im * other.im,
                    self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def conj(self):
        return CBox(self.re, -self.im)

    def modulus_sq(self) -> RInt:
        return self.re.square() + self.im.square()

    def contains(self, re, im) -> bool:
        return self.re.contains(re) and self.im.contains(im)

    def contains_box(self, other: "CBox") -> bool:
        return (self.re.contains_interval(other.re)
                and self.im.contains_interval(other.im))

    def overlaps(self, other: "CBox") -> bool:
        return self.re.overlaps(other.re) and self.im.overlaps(other.im)


def as_cbox(x) -> CBox:
    if isinstance(x, CBox):
        return x
    if isinstance(x, RInt):
        return CBox(x, RInt(0))
    return CBox(as_rint(x), RInt(0))


# -- bridge to mpmath's interval context for transcendental enclosures -------

def _to_iv(r: RInt, prec: int):
    iv.prec = prec
    lo = iv.mpf(r.lo.numerator) / iv.mpf(r.lo.denominator)
    hi = iv.mpf(r.hi.numerator) / iv.mpf(r.hi.denominator)
    return iv.mpf([lo.a, hi.b])


def _from_iv(x) -> RInt:
    return RInt(mpf_to_fraction(mpf(x.a)), mpf_to_fraction(mpf(x.b)))


def log_rint(r: RInt, prec: int = 256) -> RInt:
    """Certified enclosure of log over a strictly positive interval."""
    if r.lo <= 0:
        raise ValueError("log needs a strictly positive interval")
    return _from_iv(iv.log(_to_iv(r, prec)))


def atan2_rint(y: RInt, x: RInt, prec: int = 256) -> RInt:
    """Certified enclosure of atan2 over a box that avoids the branch cut."""
    if x.hi < 0 and y.contains(0):
        raise ValueError("argument box straddles the branch cut")
    iv.prec = prec
    return _from_iv(iv.atan2(_to_iv(y, prec), _to_iv(x, prec)))


def pi_rint(prec: int = 256) -> RInt:
    iv.prec = prec
    return _from_iv(iv.pi)
