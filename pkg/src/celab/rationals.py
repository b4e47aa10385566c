"""Exact rational scalars and their canonical text form.

Every quantity in this package is a `fractions.Fraction`: arithmetic is
exact, results are kept in lowest terms with a positive denominator, and
comparison agrees with the order on the reals.  No floating point is used
anywhere in engine or verification paths.
"""

from __future__ import annotations

from fractions import Fraction

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)

_OPS = {"+", "-", "*"}


def rat(numerator: int, denominator: int = 1) -> Rational:
    """Build a rational in canonical form."""
    return Fraction(numerator, denominator)


def pow2_neg(n: int) -> Rational:
    """Exactly 1/2**n for n >= 0 (the ubiquitous dyadic threshold)."""
    if n < 0:
        raise ValueError(f"negative exponent: {n}")
    return Fraction(1, 1 << n)


def arith(a: Rational, b: Rational, op: str) -> Rational:
    """Apply one of {+, -, *} exactly; the result is canonical."""
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    raise ValueError(f"unknown op {op!r}, expected one of {_OPS}")


def cmp(a: Rational, b: Rational) -> int:
    """Three-way comparison: -1, 0 or 1."""
    if a < b:
        return -1
    if a > b:
        return 1
    return 0


def format_rational(x: Rational) -> str:
    """Canonical "p/q" text form (denominator always present)."""
    return f"{x.numerator}/{x.denominator}"


def parse_rational(text: str) -> Rational:
    """Parse "p/q" (or a bare integer "p")."""
    text = text.strip()
    if "/" in text:
        num, _, den = text.partition("/")
        return Fraction(int(num), int(den))
    return Fraction(int(text))
