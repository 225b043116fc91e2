"""Seeded sample points: uniform dyadics, Gauss-measure dyadics, periodic digit streams.

Randomness comes from SHAKE-256 used as a counter-based generator keyed on
``(seed, index, stream, draw)``.  An extendable-output digest of more bytes
always starts with the shorter digest, so the first ``B`` bits of a stream are
a prefix of the first ``B' > B`` bits: raising the precision refines the same
underlying real instead of drawing a new one.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence, Union

from .exact import CFExpansion, cf_expand, expansion_from_digits

_MASK64 = (1 << 64) - 1
_STREAM_POINT = 0
_STREAM_ACCEPT = 1


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 0
    bits: Union[int, str] = "auto"
    depth: int = 100
    guard_bits: int = 16

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.bits != "auto" and (not isinstance(self.bits, int) or self.bits < 64):
            raise ValueError(f"bits must be an integer >= 64 or 'auto', got {self.bits!r}")

    @property
    def resolved_bits(self) -> int:
        if self.bits == "auto":
            return max(64, math.ceil(3.5 * self.depth) + self.guard_bits)
        return self.bits


@dataclass(frozen=True)
class QuadraticSource:
    period: tuple
    preperiod: tuple = ()

    def __post_init__(self):
        if not self.period:
            raise ValueError("period must be nonempty")
        if any(int(a) < 1 for a in (*self.preperiod, *self.period)):
            raise ValueError("digits must be positive integers")


def _stream_bits(seed: int, index: int, stream: int, draw: int, nbits: int) -> int:
    key = struct.pack(">QQBQ", seed & _MASK64, index & _MASK64, stream, draw)
    nbytes = (nbits + 7) // 8
    raw = int.from_bytes(hashlib.shake_256(key).digest(nbytes), "big")
    return raw >> (8 * nbytes - nbits)


def _dyadic(k: int, bits: int) -> Fraction:
    # k = 0 has probability 2**-bits; map it to the smallest admissible numerator
    return Fraction(k or 1, 1 << bits)


def sample_uniform(config: SamplerConfig, index: int, draw: int = 0) -> Fraction:
    """``k / 2**B`` with ``k`` uniform on {1, ..., 2**B - 1}, a pure function of (seed, index)."""
    bits = config.resolved_bits
    return _dyadic(_stream_bits(config.seed, index, _STREAM_POINT, draw, bits), bits)


def gauss_accept_draw(seed: int, index: int) -> int:
    """Index of the first accepted proposal in the rejection sampler for the Gauss measure.

    Proposal ``u`` is accepted with probability ``1/(1+u)``; the decision uses
    the leading 64 bits of ``u`` and a 64-bit acceptance variate, compared
    exactly, so it does not depend on the output precision.
    """
    draw = 0
    while True:
        u64 = _stream_bits(seed, index, _STREAM_POINT, draw, 64)
        v64 = _stream_bits(seed, index, _STREAM_ACCEPT, draw, 64)
        if v64 * ((1 << 64) + u64) < (1 << 128):
            return draw
        draw += 1


def sample_gauss(config: SamplerConfig, index: int) -> Fraction:
    return sample_uniform(config, index, gauss_accept_draw(config.seed, index))


def sample(config: SamplerConfig, index: int, measure: str = "gauss") -> Fraction:
    if measure == "gauss":
        return sample_gauss(config, index)
    if measure == "uniform":
        return sample_uniform(config, index)
    raise ValueError(f"unknown measure {measure!r}")


def _cylinder_contains(cf: CFExpansion, n: int, lo: Fraction, hi: Fraction) -> bool:
    """True when [lo, hi] lies strictly inside the rank-n cylinder of ``cf``."""
    a = Fraction(cf.p[n], cf.q[n])
    b = Fraction(cf.p[n] + cf.p[n - 1], cf.q[n] + cf.q[n - 1])
    left, right = (a, b) if a < b else (b, a)
    return left < lo and hi < right


def digit_horizon(cf: CFExpansion, config: SamplerConfig) -> int:
    """Number of leading digits shared by every real within ``2**-B`` of the sample.

    Size rule: the largest ``n`` with ``2 q_n (q_n + q_{n-1}) < 2**(B - guard)``.
    When the expansion carries its source dyadic, the ``2**-B`` interval around
    it is additionally required to sit inside the rank-n cylinder, which makes
    the certificate sound near cylinder boundaries too.  Both conditions are
    monotone in ``n``.
    """
    bits = config.resolved_bits
    limit = 1 << max(bits - config.guard_bits, 0)

    def ok(n: int) -> bool:
        if 2 * cf.q[n] * (cf.q[n] + cf.q[n - 1]) >= limit:
            return False
        if cf.source is not None:
            eps = Fraction(1, 1 << bits)
            return _cylinder_contains(cf, n, cf.source - eps, cf.source + eps)
        return True

    lo, hi = 0, cf.valid_depth
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def draw_expansion(config: SamplerConfig, index: int, measure: str = "gauss",
                   extra: int = 0):
    """Sample point ``index`` and expand it to ``config.depth + extra`` certified digits.

    A sample whose horizon falls short is refined once to ``B + depth + extra``
    bits (same underlying real); if that still falls short, ``RuntimeError``.
    Returns ``(x, cf, bits)``; ``cf`` is truncated to the certified depth.
    """
    need = config.depth + extra
    cfg = replace(config, depth=need)
    for attempt in range(2):
        x = sample(cfg, index, measure)
        cf = cf_expand(x, need)
        if cf.valid_depth >= need and digit_horizon(cf, cfg) >= need:
            return x, cf, cfg.resolved_bits
        cfg = replace(cfg, bits=cfg.resolved_bits + need)
    raise RuntimeError(f"sample {index}: horizon below depth {need} after refinement")


def quadratic_digits(src: QuadraticSource, n: int) -> CFExpansion:
    """Expansion with digits ``preperiod`` followed by ``period`` repeated, to ``n`` digits."""
    if n < 1:
        raise ValueError("n must be >= 1")
    pre = [int(a) for a in src.preperiod]
    per = [int(a) for a in src.period]
    digits = pre[:n]
    i = 0
    while len(digits) < n:
        digits.append(per[i % len(per)])
        i += 1
    return expansion_from_digits(digits)


def parse_digits(text: Union[str, Sequence[int]]) -> tuple:
    if isinstance(text, str):
        text = [t for t in text.replace(" ", "").split(",") if t]
    return tuple(int(t) for t in text)
