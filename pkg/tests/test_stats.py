import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cfbenford.numerics import ONE, LogBase, log_mod1
from cfbenford.sequences import RealSeq
from cfbenford.stats import (BENFORD, benford_stats, bjw_cdf, cdf_sup_distance,
                             digit_masses_from_log_frac, erdos_turan_bound, frac_parts,
                             leading_digit, shift_discrepancy_bound, star_discrepancy,
                             stat_report, weyl_sum, weyl_sums)

from conftest import fibonacci

LG_PHI = math.log10((1 + math.sqrt(5)) / 2)


def brute_star_discrepancy(u):
    """sup_t |#{u_i < t}/N - t| over a fine set of candidate t (all points and their neighbours)."""
    u = np.sort(np.mod(u, 1.0))
    n = len(u)
    best = 0.0
    for t in np.concatenate([u, [1.0]]):
        below = np.count_nonzero(u < t) / n
        at_or_below = np.count_nonzero(u <= t) / n
        best = max(best, abs(below - t), abs(at_or_below - t))
    return best


def test_weyl_examples():
    assert weyl_sum(np.full(50, 0.3), 3) == pytest.approx(1.0, abs=1e-12)
    assert weyl_sum(np.arange(1, 101) / 2, 2) == pytest.approx(1.0, abs=1e-12)
    rot = np.arange(1, 10_001) * LG_PHI
    assert weyl_sum(rot, 1) <= 0.01
    with pytest.raises(ValueError):
        weyl_sum(rot, 0)


def test_weyl_matches_direct_complex_sum():
    rng = np.random.default_rng(0)
    v = rng.normal(size=3000) * 50
    for k in (1, 2, 7, -3):
        ref = abs(np.mean(np.exp(2j * np.pi * k * v)))
        assert weyl_sum(v, k) == pytest.approx(ref, abs=1e-10)


def test_star_discrepancy_examples():
    assert star_discrepancy(np.arange(4) / 4) == pytest.approx(0.25)
    assert star_discrepancy([0.5]) == pytest.approx(0.5)
    assert star_discrepancy(np.arange(1, 10_001) * LG_PHI) <= 3e-3


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(min_value=0, max_value=50, allow_nan=False), min_size=1, max_size=60))
def test_star_discrepancy_bruteforce(vals):
    u = frac_parts(vals)
    d = star_discrepancy(u)
    assert d == pytest.approx(brute_star_discrepancy(u), abs=1e-12)
    assert 1 / (2 * len(u)) - 1e-12 <= d <= 1.0


def test_discrepancy_integer_shift_and_realseq():
    rng = np.random.default_rng(3)
    v = rng.random(1000) * 10
    seq = RealSeq.from_floats(v)
    shifted = RealSeq([f + 7 * ONE for f in seq.fixed])
    assert star_discrepancy(seq) == star_discrepancy(shifted)
    assert star_discrepancy(seq) == pytest.approx(star_discrepancy(v), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(min_value=0, max_value=1, exclude_max=True), min_size=5, max_size=80),
       st.floats(min_value=0.001, max_value=0.999))
def test_shift_bound_bruteforce(vals, s):
    u = np.array(vals)
    gap = abs(brute_star_discrepancy(np.mod(u + s, 1.0)) - brute_star_discrepancy(u))
    assert gap <= shift_discrepancy_bound(u, s) + 1e-9


def test_shift_by_s_at_n_1000():
    rng = np.random.default_rng(4)
    u = rng.random(1000)
    for s in (0.05, 0.1, 0.25, 0.5):
        gap = abs(brute_star_discrepancy(np.mod(u + s, 1.0)) - brute_star_discrepancy(u))
        assert gap <= 2 * s


def test_erdos_turan_consistency():
    rng = np.random.default_rng(5)
    for seq in (rng.random(2000), np.arange(1, 2001) * LG_PHI, rng.random(500) * 0.3):
        for K in (1, 5, 10, 30):
            w = weyl_sums(seq, K)
            assert star_discrepancy(seq) <= erdos_turan_bound(w, K)


def test_benford_examples():
    freqs, _ = benford_stats([2 ** i for i in range(1, 11)])
    assert freqs[0] == pytest.approx(0.3) and freqs[1] == pytest.approx(0.2)
    freqs, linf = benford_stats([5] * 20)
    assert freqs[4] == 1.0
    assert linf == pytest.approx(1 - math.log10(6 / 5), abs=1e-15)
    assert linf == pytest.approx(0.9208187539523752, abs=1e-15)
    assert sum(freqs) == pytest.approx(1.0, abs=1e-12)


def test_benford_fibonacci():
    fib = fibonacci(10_001)[1:]
    _, linf = benford_stats(fib[:10_000])
    assert linf <= 0.005


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=1, max_value=10 ** 400))
def test_leading_digit_matches_decimal_string(v):
    assert leading_digit(v) == int(str(v)[0])


def test_benford_equivalence_bridge():
    rng = np.random.default_rng(6)
    values = [int(rng.integers(1, 10 ** 6)) * 10 ** int(rng.integers(0, 40)) + int(rng.integers(0, 99))
              for _ in range(3000)] + [7 * 10 ** 20, 10 ** 9, 2]
    freqs, linf = benford_stats(values)
    masses = digit_masses_from_log_frac([log_mod1(v, LogBase.decimal) for v in values])
    assert np.max(np.abs(masses - freqs)) <= 1e-12
    assert float(np.max(np.abs(masses - BENFORD))) == pytest.approx(linf, abs=1e-12)


def test_bjw_cdf_values():
    assert bjw_cdf(1.0) == pytest.approx(1.0, abs=1e-15)
    assert bjw_cdf(0.0) == 0.0
    assert bjw_cdf(0.5) == pytest.approx(0.918295834054489514787, abs=1e-15)
    grid = np.linspace(0, 1, 10_001)
    assert np.all(np.diff(bjw_cdf(grid)) >= 0)
    with pytest.raises(ValueError):
        bjw_cdf(1.5)
    with pytest.raises(ValueError):
        bjw_cdf(-0.1)


def test_cdf_sup_distance():
    # inverse-CDF samples from F itself: KS distance ~ 1/sqrt(n)
    grid = np.linspace(0, 1, 200_001)
    cdf = bjw_cdf(grid)
    u = np.random.default_rng(8).random(20_000)
    samples = np.interp(u, cdf, grid)
    assert cdf_sup_distance(samples) < 0.02
    assert cdf_sup_distance(np.random.default_rng(9).random(20_000)) > 0.1
    # exact one-point case: F(0.5) against a step at 0.5
    assert cdf_sup_distance([0.5]) == pytest.approx(max(0.918295834054489514787, 1 - 0.918295834054489514787))


def test_stat_report_fields():
    rep = stat_report(np.arange(1, 1001) * LG_PHI, K=4, integers=fibonacci(50)[1:],
                      ref_samples=[0.2, 0.4])
    assert rep.n_points == 1000 and set(rep.weyl) == {1, 2, 3, 4}
    assert all(0 <= w <= 1 for w in rep.weyl.values())
    assert rep.digit_freqs.sum() == pytest.approx(1.0, abs=1e-12)
    assert rep.cdf_sup_dist is not None
