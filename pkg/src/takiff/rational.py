"""Exact rational scalars.

Everything algebraic in the package runs on gmpy2's ``mpq``.  Rationals
cross the JSON boundary as "p/q" strings.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational

from gmpy2 import mpq

Q = mpq
ZERO = mpq(0)
ONE = mpq(1)


def to_q(x) -> mpq:
    """Coerce ints, Fractions, mpq and "p/q" strings to mpq.

    Floats are rejected: a float literal in an exact computation is a bug.
    """
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, str):
        s = x.strip()
        if not s:
            raise ValueError("empty rational literal")
        try:
            return mpq(Fraction(s))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"bad rational literal {x!r}") from exc
    if isinstance(x, float):
        raise TypeError(f"refusing float {x!r}; pass a string like '1/2'")
    if isinstance(x, (int, Rational)) or type(x) is type(ZERO):
        return mpq(x)
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


def fmt_q(x) -> str:
    """Canonical string form: "3", "-1/2"."""
    return str(mpq(x))


def is_integer(x) -> bool:
    return mpq(x).denominator == 1


def floor_q(x) -> int:
    x = mpq(x)
    return int(x.numerator // x.denominator)


def random_q(rng, num: int = 6, den: int = 5, nonzero: bool = False) -> mpq:
    """Small random rational a/b with |a| <= num, 1 <= b <= den."""
    while True:
        x = mpq(rng.randint(-num, num), rng.randint(1, den))
        if x or not nonzero:
            return x
