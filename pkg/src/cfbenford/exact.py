"""Exact continued-fraction expansion of rationals in (0, 1).

Rationals are plain :class:`fractions.Fraction` objects, which are always kept
in lowest terms with a positive denominator.  The expansion stores the digits,
the convergents and the Euclid remainders, so that every quantity downstream
(``q_n``, ``T^n x``, the reversed continued fraction) is a lookup.

Index conventions used throughout the package::

    digits[n - 1] == a_n            for 1 <= n <= valid_depth
    p[n], q[n]    == p_n, q_n       for 0 <= n <= valid_depth  (p_0 = 0, q_0 = 1)
    rems[n + 1]   == r_n            for -1 <= n <= valid_depth (Euclid remainders)

with ``T^n x == rems[n + 1] / rems[n]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

ExactRational = Fraction


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` (base 10) into a reduced rational."""
    text = text.strip()
    if "/" in text:
        num, den = text.split("/", 1)
        if int(den) == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def format_rational(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class CFExpansion:
    digits: tuple
    p: tuple
    q: tuple
    valid_depth: int
    exhausted: bool
    rems: tuple = ()
    source: Optional[Fraction] = None
    # memo for derived tables (log of q_n etc.); not part of the value
    _memo: dict = field(default_factory=dict, repr=False, compare=False)

    def remainder(self, n: int) -> Fraction:
        """``T^n x`` read off the stored Euclid remainders."""
        if not self.rems:
            raise ValueError("expansion carries no source rational")
        if not 0 <= n <= self.valid_depth:
            raise IndexError(f"n={n} outside 0..{self.valid_depth}")
        return Fraction(self.rems[n + 1], self.rems[n])


def _convergents(digits: Sequence[int]) -> tuple[tuple, tuple]:
    p = [0]
    q = [1]
    p_prev, q_prev = 1, 0
    for a in digits:
        p_new = a * p[-1] + p_prev
        q_new = a * q[-1] + q_prev
        p_prev, q_prev = p[-1], q[-1]
        p.append(p_new)
        q.append(q_new)
    return tuple(p), tuple(q)


def expansion_from_digits(digits: Sequence[int], exhausted: bool = False) -> CFExpansion:
    """Build an expansion from a given digit stream (no source rational)."""
    digits = tuple(int(a) for a in digits)
    if any(a < 1 for a in digits):
        raise ValueError("partial quotients must be positive")
    p, q = _convergents(digits)
    return CFExpansion(digits, p, q, len(digits), exhausted)


def cf_expand(x: Fraction, max_depth: int) -> CFExpansion:
    """Expand ``x`` in (0, 1) by iterated Euclid steps, up to ``max_depth`` digits.

    ``exhausted`` is true when the final remainder is zero, i.e. the rational
    has been fully expanded (this includes the case where the last digit
    lands exactly on ``max_depth``).
    """
    x = Fraction(x)
    if not 0 < x < 1:
        raise ValueError(f"x must lie in (0, 1), got {x}")
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    prev, cur = x.denominator, x.numerator
    rems = [prev, cur]
    digits = []
    while cur and len(digits) < max_depth:
        a, r = divmod(prev, cur)
        digits.append(a)
        rems.append(r)
        prev, cur = cur, r
    p, q = _convergents(digits)
    return CFExpansion(tuple(digits), p, q, len(digits), cur == 0, tuple(rems), x)


def gauss_map(x: Fraction) -> Fraction:
    """One step of ``x -> {1/x}``; maps 0 to 0."""
    if x == 0:
        return Fraction(0)
    y = 1 / Fraction(x)
    return y - (y.numerator // y.denominator)


def remainder_exact(x: Fraction, cf: CFExpansion, n: int) -> Fraction:
    """``T^n x`` from the closed form ``(x q_n - p_n) / (p_{n-1} - x q_{n-1})``."""
    if n < 0 or n > cf.valid_depth:
        raise IndexError(f"n={n} outside 0..{cf.valid_depth}")
    x = Fraction(x)
    if n == 0:
        return x
    return (x * cf.q[n] - cf.p[n]) / (cf.p[n - 1] - x * cf.q[n - 1])


def reversed_cf_value(cf: CFExpansion, n: int) -> Fraction:
    """The finite continued fraction ``[a_n, ..., a_1]``, evaluated from ``a_1`` outward."""
    if not 1 <= n <= cf.valid_depth:
        raise IndexError(f"n={n} outside 1..{cf.valid_depth}")
    v = Fraction(0)
    for a in cf.digits[:n]:
        v = 1 / (a + v)
    return v


def verify_identities(cf: CFExpansion) -> bool:
    """Check the convergent recurrences and the determinant identity at every index."""
    if cf.valid_depth < 1 or len(cf.digits) < cf.valid_depth:
        return False
    if cf.p[0] != 0 or cf.q[0] != 1:
        return False
    p_prev, q_prev = 1, 0
    for n in range(1, cf.valid_depth + 1):
        a = cf.digits[n - 1]
        pn, qn = cf.p[n], cf.q[n]
        if pn != a * cf.p[n - 1] + p_prev or qn != a * cf.q[n - 1] + q_prev:
            return False
        sign = 1 if n % 2 == 1 else -1
        if pn * cf.q[n - 1] - cf.p[n - 1] * qn != sign:
            return False
        p_prev, q_prev = cf.p[n - 1], cf.q[n - 1]
    return True
