"""Exact Gaussian-rational scalars.

Entries of EXACT-backend matrices are ``GaussianRational`` instances stored in
numpy object arrays, so ``@``, ``np.conj``, ``np.einsum`` and friends work
unchanged. Arithmetic with floats or complex numbers is refused on purpose:
silently mixing backends would make "exact" results inexact.
"""

from fractions import Fraction
from numbers import Rational


class GaussianRational:
    """A complex number ``re + i*im`` with arbitrary-precision rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussianRational):
            if im:
                raise TypeError("cannot combine a GaussianRational real part with an imaginary part")
            self.re, self.im = re.re, re.im
            return
        if isinstance(re, complex):
            re, im = re.real, re.imag + im
        self.re = Fraction(re)
        self.im = Fraction(im)

    @classmethod
    def _raw(cls, re, im):
        obj = object.__new__(cls)
        obj.re = re
        obj.im = im
        return obj

    @classmethod
    def parse(cls, re, im="0"):
        """Build from ``"p/q"`` strings (or ints / Fractions)."""
        return cls._raw(Fraction(re), Fraction(im))

    @property
    def real(self):
        return self.re

    @property
    def imag(self):
        return self.im

    def conjugate(self):
        return GaussianRational._raw(self.re, -self.im)

    def abs2(self):
        """Squared modulus, an exact ``Fraction``."""
        return self.re * self.re + self.im * self.im

    def __add__(self, other):
        if isinstance(other, GaussianRational):
            return GaussianRational._raw(self.re + other.re, self.im + other.im)
        if isinstance(other, Rational):
            return GaussianRational._raw(self.re + other, self.im)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, GaussianRational):
            return GaussianRational._raw(self.re - other.re, self.im - other.im)
        if isinstance(other, Rational):
            return GaussianRational._raw(self.re - other, self.im)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, Rational):
            return GaussianRational._raw(other - self.re, -self.im)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, GaussianRational):
            a, b, c, d = self.re, self.im, other.re, other.im
            return GaussianRational._raw(a * c - b * d, a * d + b * c)
        if isinstance(other, Rational):
            return GaussianRational._raw(self.re * other, self.im * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Rational):
            if other == 0:
                raise ZeroDivisionError("division by exact zero")
            return GaussianRational._raw(self.re / other, self.im / other)
        if isinstance(other, GaussianRational):
            den = other.abs2()
            if den == 0:
                raise ZeroDivisionError("division by exact zero")
            a, b, c, d = self.re, self.im, other.re, other.im
            return GaussianRational._raw((a * c + b * d) / den, (b * c - a * d) / den)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, Rational):
            return GaussianRational._raw(Fraction(other), Fraction(0)) / self
        return NotImplemented

    def __neg__(self):
        return GaussianRational._raw(-self.re, -self.im)

    def __pos__(self):
        return self

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, Rational):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussianRational({str(self.re)!r}, {str(self.im)!r})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I = GaussianRational(0, 1)
