"""Certified logarithms of big integers and rationals.

Logs are carried as fixed-point integers scaled by ``2**-FRAC_BITS``.  A value
``n = 2**b * m`` with ``m`` in [1, 2) is split into ``b * ln 2`` (constant kept
to 256 fractional bits) plus ``ln m``, where ``m`` is read from the top bits of
``n`` and ``ln m`` is evaluated by table lookup on ``m``'s leading 8 bits and an
``atanh`` series in ``WORK_BITS`` of working precision.  The absolute error of
every fixed-point result is below ``2**-100`` for inputs of up to ``2**40``
bits, far inside the ``2**-60`` budget the rest of the package relies on.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

FRAC_BITS = 128
ONE = 1 << FRAC_BITS
WORK_BITS = 192
_CONST_BITS = 256

# floor(ln 2 * 2**256), floor(ln 10 * 2**256), floor(2**256 / ln 10), floor(pi * 2**256);
# 400-bit evaluation, cross-checked in the tests by independent series.
LN2_256 = 80260960185991308862233904206310070533990667611589946606122867505419956976171
LN10_256 = 266621138564480548222253459415182587429914225440519472036001743423645469947338
INV_LN10_256 = 50287865403815339155522804078225183539835376082784427263724169827245271503518
PI_256 = 363771576891766324280234942777729862653393377328392429958772151117938894466185

_SHIFT = _CONST_BITS - WORK_BITS
_LN2_W = LN2_256 >> _SHIFT


class LogBase(enum.Enum):
    natural = "e"
    decimal = "10"

    @classmethod
    def parse(cls, value) -> "LogBase":
        if isinstance(value, cls):
            return value
        text = str(value).strip().lower()
        if text in ("e", "natural", "ln"):
            return cls.natural
        if text in ("10", "decimal", "lg"):
            return cls.decimal
        raise ValueError(f"unknown log base {value!r}")


def _atanh_series(y: int, bits: int) -> int:
    """2*atanh(y) for fixed-point ``y`` (scale 2**-bits), 0 <= y < 1/2."""
    y2 = (y * y) >> bits
    term = y
    total = y
    k = 3
    while term:
        term = (term * y2) >> bits
        total += term // k
        k += 2
    return 2 * total


def _ln_table(bits: int) -> tuple:
    guard = 32
    w = bits + guard
    table = []
    for j in range(256):
        # ln(1 + j/256) = 2 atanh(j / (512 + j))
        y = (j << w) // (512 + j)
        table.append(_atanh_series(y, w) >> guard)
    return tuple(table)


_LN_TABLE = _ln_table(WORK_BITS)


def _ln_mantissa(m: int) -> int:
    """ln of ``m * 2**-WORK_BITS`` for m in [2**WORK_BITS, 2**(WORK_BITS+1))."""
    w = WORK_BITS
    j = (m >> (w - 8)) & 0xFF
    c = (256 + j) << (w - 8)
    r = (m << w) // c  # m / c in [1, 1 + 1/256)
    y = ((r - (1 << w)) << w) // (r + (1 << w))
    return _LN_TABLE[j] + _atanh_series(y, w)


def ln_fixed_work(n: int) -> int:
    """Natural log of a positive integer at WORK_BITS fractional bits."""
    if n < 1:
        raise ValueError(f"log of non-positive integer {n}")
    b = n.bit_length() - 1
    if b > WORK_BITS:
        m = n >> (b - WORK_BITS)
    else:
        m = n << (WORK_BITS - b)
    return ((b * LN2_256) >> _SHIFT) + _ln_mantissa(m)


def _to_base_work(v: int, base: LogBase) -> int:
    if base is LogBase.decimal:
        return (v * INV_LN10_256) >> _CONST_BITS
    return v


def _round_to_frac(v: int) -> int:
    shift = WORK_BITS - FRAC_BITS
    return (v + (1 << (shift - 1))) >> shift


def log_fixed(n: int, base: LogBase = LogBase.natural) -> int:
    """``log_base(n)`` as a fixed-point integer scaled by ``2**-FRAC_BITS``."""
    base = LogBase.parse(base)
    return _round_to_frac(_to_base_work(ln_fixed_work(n), base))


def log_rational_fixed(num: int, den: int, base: LogBase = LogBase.natural) -> int:
    """``log_base(num/den)`` in fixed point; both arguments positive integers."""
    if num < 1 or den < 1:
        raise ValueError("log of a non-positive rational")
    base = LogBase.parse(base)
    return _round_to_frac(_to_base_work(ln_fixed_work(num) - ln_fixed_work(den), base))


def natural_to_base(v: int, base: LogBase) -> int:
    """Convert a FRAC_BITS natural-log value to ``base``."""
    if LogBase.parse(base) is LogBase.decimal:
        return (v * INV_LN10_256) >> _CONST_BITS
    return v


def fixed_to_float(v: int) -> float:
    return v / ONE


def fixed_frac(v: int) -> float:
    """Fractional part of a fixed-point value, reduced exactly, then rounded to a float."""
    return (v & (ONE - 1)) / ONE


def _is_power_of_ten(n: int, k: int) -> bool:
    return k >= 0 and n == 10 ** k


def log_mod1_fixed(n: int, base: LogBase = LogBase.decimal) -> int:
    """Fractional part of ``log_base(n)`` in fixed point, in [0, ONE)."""
    base = LogBase.parse(base)
    v = log_fixed(n, base)
    if base is LogBase.decimal:
        # lg n is an integer only for exact powers of ten; snap those to 0.
        k = (v + ONE // 2) >> FRAC_BITS
        if abs(v - (k << FRAC_BITS)) < (1 << 32) and _is_power_of_ten(n, k):
            return 0
    return v & (ONE - 1)


def log_mod1(n: int, base: LogBase = LogBase.decimal) -> float:
    """``frac(log_base n)`` as a float in [0, 1).

    The fixed-point value is accurate to well below 2**-60; the only further
    error is the final rounding to double precision.
    """
    if n < 1:
        raise ValueError(f"log_mod1 needs n >= 1, got {n}")
    f = log_mod1_fixed(n, base) / ONE
    return 0.0 if f >= 1.0 else f


def log_rational(x, base: LogBase = LogBase.natural) -> float:
    x = Fraction(x)
    if x <= 0:
        raise ValueError(f"log of non-positive rational {x}")
    return log_rational_fixed(x.numerator, x.denominator, base) / ONE


@dataclass(frozen=True)
class PaperConstants:
    levy: float
    delta_bar: float
    theta_bar: float


def _constants() -> PaperConstants:
    ln2 = Fraction(LN2_256, 1 << _CONST_BITS)
    pi = Fraction(PI_256, 1 << _CONST_BITS)
    levy = pi * pi / (12 * ln2)
    theta_bar = -1 - ln2 / 2
    return PaperConstants(float(levy), float(theta_bar + levy), float(theta_bar))


CONSTANTS = _constants()


def log_bound(k: int) -> float:
    """``-log(1 - 2**(-k/2))``, the uniform gap between delta_k on a shifted point and delta_n."""
    return -math.log1p(-(2.0 ** (-k / 2)))
