"""Equidistribution and Benford statistics.

All functions accept either a :class:`~cfbenford.sequences.RealSeq` (reduced
mod 1 exactly from its fixed-point values) or a plain array of reals (reduced
with ``np.mod``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .numerics import FRAC_BITS, ONE
from .sequences import RealSeq

BENFORD = np.log10(1.0 + 1.0 / np.arange(1, 10))
_LN2 = math.log(2.0)


@dataclass
class StatReport:
    n_points: int
    weyl: dict
    star_discrepancy: float
    digit_freqs: Optional[np.ndarray] = None
    benford_linf: Optional[float] = None
    cdf_sup_dist: Optional[float] = None


def frac_parts(seq) -> np.ndarray:
    """Fractional parts in [0, 1).  For a RealSeq the reduction is done on the integers."""
    if isinstance(seq, RealSeq):
        mask = ONE - 1
        shift = FRAC_BITS - 53
        return np.array([(v & mask) >> shift for v in seq.fixed], dtype=np.float64) * 2.0 ** -53
    u = np.mod(np.asarray(seq, dtype=float), 1.0)
    u[u >= 1.0] = 0.0
    return u


def weyl_sum(seq, k: int) -> float:
    """``|1/N sum exp(2 pi i k v_n)|`` with exactly rounded (fsum) accumulation."""
    if k == 0:
        raise ValueError("Weyl sums need k != 0")
    u = frac_parts(seq)
    if len(u) == 0:
        raise ValueError("empty sequence")
    # k*u reduced mod 1 before scaling keeps the phase argument small
    ang = 2.0 * math.pi * np.mod(k * u, 1.0)
    re = math.fsum(np.cos(ang))
    im = math.fsum(np.sin(ang))
    return min(1.0, math.hypot(re, im) / len(u))


def weyl_sums(seq, K: int = 10) -> dict:
    u = frac_parts(seq)
    return {k: weyl_sum(u, k) for k in range(1, K + 1)}


def star_discrepancy(seq) -> float:
    u = np.sort(frac_parts(seq))
    n = len(u)
    if n == 0:
        raise ValueError("empty sequence")
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - u), np.max(u - (i - 1) / n)))


def erdos_turan_bound(weyl: dict, K: int) -> float:
    """``6/(K+1) + 4/pi * sum_{k<=K} (1/k - 1/(K+1)) |w_k|``, an upper bound on D*_N."""
    s = sum((1.0 / k - 1.0 / (K + 1)) * weyl[k] for k in range(1, K + 1))
    return 6.0 / (K + 1) + 4.0 / math.pi * s


def shift_discrepancy_bound(seq, s: float) -> float:
    """Bound on ``|D*(u + s) - D*(u)|``: the CDF deviation ``|G(1-s) - (1-s)|`` at the wrap point."""
    u = frac_parts(seq)
    s = s % 1.0
    if s == 0.0:
        return 0.0
    return abs(np.count_nonzero(u < 1.0 - s) / len(u) - (1.0 - s))


@lru_cache(maxsize=None)
def _pow10(k: int) -> int:
    return 10 ** k


_LOG10_2 = math.log10(2.0)


def leading_digit(v: int) -> int:
    """First decimal digit of a positive integer, by exact integer division."""
    if v < 1:
        raise ValueError("leading digit of a non-positive integer")
    k = int((v.bit_length() - 1) * _LOG10_2)
    while _pow10(k + 1) <= v:
        k += 1
    while _pow10(k) > v:
        k -= 1
    return v // _pow10(k)


def benford_stats(values: Sequence[int]):
    """First-digit frequencies and their max deviation from ``lg(1 + 1/d)``."""
    if len(values) == 0:
        raise ValueError("empty value list")
    counts = np.zeros(9, dtype=np.int64)
    for v in values:
        counts[leading_digit(int(v)) - 1] += 1
    freqs = counts / counts.sum()
    return freqs, float(np.max(np.abs(freqs - BENFORD)))


def digit_masses_from_log_frac(fracs) -> np.ndarray:
    """Mass of {lg v} in each [lg d, lg(d+1)); the u.d. side of the Benford equivalence."""
    u = np.asarray(fracs, dtype=float)
    edges = np.log10(np.arange(1, 11, dtype=float))
    edges[-1] = 1.0
    counts, _ = np.histogram(u, bins=edges)
    return counts / len(u)


def bjw_cdf(z):
    """``F(z) = (log(1+z) - z/(1+z) log z) / log 2`` on [0, 1], with F(0) = 0."""
    z_arr = np.asarray(z, dtype=float)
    if np.any((z_arr < 0.0) | (z_arr > 1.0)) or np.any(np.isnan(z_arr)):
        raise ValueError("bjw_cdf is defined on [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        zlogz = np.where(z_arr > 0.0, z_arr * np.log(np.where(z_arr > 0.0, z_arr, 1.0)), 0.0)
    out = (np.log1p(z_arr) - zlogz / (1.0 + z_arr)) / _LN2
    return float(out) if np.ndim(out) == 0 else out


def cdf_sup_distance(samples, ref=bjw_cdf) -> float:
    """One-sample Kolmogorov-Smirnov statistic of ``samples`` against the CDF ``ref``."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = len(x)
    if n == 0:
        raise ValueError("empty sample")
    if x[0] < 0.0 or x[-1] > 1.0:
        raise ValueError("samples must lie in [0, 1]")
    f = np.asarray(ref(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def stat_report(seq, K: int = 10, integers: Optional[Sequence[int]] = None,
                ref_samples=None, ref=bjw_cdf) -> StatReport:
    u = frac_parts(seq)
    rep = StatReport(len(u), weyl_sums(u, K), star_discrepancy(u))
    if integers is not None:
        rep.digit_freqs, rep.benford_linf = benford_stats(integers)
    if ref_samples is not None:
        rep.cdf_sup_dist = cdf_sup_distance(ref_samples, ref)
    return rep
