from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cfbenford.exact import (cf_expand, expansion_from_digits, format_rational, gauss_map,
                             parse_rational, remainder_exact, reversed_cf_value, verify_identities)

from conftest import euclid_digits, fibonacci

rationals = st.builds(
    lambda d, n: Fraction(n % (d - 1) + 1, d),
    st.integers(min_value=2, max_value=2**200),
    st.integers(min_value=0, max_value=2**200),
)


def test_half():
    cf = cf_expand(Fraction(1, 2), 10)
    assert cf.digits == (2,)
    assert (cf.p[1], cf.q[1]) == (1, 2)
    assert cf.exhausted


def test_16_over_113():
    cf = cf_expand(Fraction(16, 113), 10)
    assert cf.digits == (7, 16)
    assert cf.p[1:] == (1, 16) and cf.q[1:] == (7, 113)
    assert cf.p[2] * cf.q[1] - cf.p[1] * cf.q[2] == -1
    assert cf.exhausted and cf.valid_depth == 2
    assert verify_identities(cf)


def test_golden_digits_give_fibonacci():
    cf = expansion_from_digits([1] * 12)
    assert list(cf.q[1:]) == fibonacci(13)[2:]


def test_max_depth_truncates():
    cf = cf_expand(Fraction(16, 113), 1)
    assert cf.digits == (7,) and not cf.exhausted and cf.valid_depth == 1


@pytest.mark.parametrize("bad", [Fraction(0), Fraction(1), Fraction(3, 2), Fraction(-1, 3)])
def test_domain_error(bad):
    with pytest.raises(ValueError):
        cf_expand(bad, 5)


def test_remainder_examples():
    x = Fraction(16, 113)
    cf = cf_expand(x, 10)
    assert remainder_exact(x, cf, 0) == x
    assert remainder_exact(x, cf, 1) == Fraction(1, 16)
    assert remainder_exact(x, cf, 2) == 0
    with pytest.raises(IndexError):
        remainder_exact(x, cf, 3)


def test_reversed_cf_examples():
    cf = cf_expand(Fraction(16, 113), 10)
    assert reversed_cf_value(cf, 2) == Fraction(7, 113)
    assert reversed_cf_value(cf, 1) == Fraction(1, 7)
    fib = expansion_from_digits([1] * 8)
    assert reversed_cf_value(fib, 5) == Fraction(5, 8)
    with pytest.raises(IndexError):
        reversed_cf_value(cf, 3)


def test_verify_identities_detects_corruption():
    cf = cf_expand(Fraction(355, 1133), 20)
    assert verify_identities(cf)
    q = list(cf.q)
    q[3] += 1
    bad = type(cf)(cf.digits, cf.p, tuple(q), cf.valid_depth, cf.exhausted)
    assert not verify_identities(bad)
    assert verify_identities(cf_expand(Fraction(1, 3), 1))


def test_rational_text_roundtrip():
    assert parse_rational("16/113") == Fraction(16, 113)
    assert format_rational(Fraction(32, 226)) == "16/113"
    with pytest.raises(ValueError):
        parse_rational("1/0")


@settings(max_examples=200, deadline=None)
@given(rationals)
def test_digits_match_independent_euclid(x):
    cf = cf_expand(x, 10**6)
    assert list(cf.digits) == euclid_digits(x)
    assert cf.exhausted
    assert Fraction(cf.p[-1], cf.q[-1]) == x


@settings(max_examples=100, deadline=None)
@given(rationals)
def test_expansion_invariants(x):
    cf = cf_expand(x, 10**6)
    assert verify_identities(cf)
    y = x
    for n in range(cf.valid_depth + 1):
        t = remainder_exact(x, cf, n)
        assert t == y == cf.remainder(n)
        if n >= 1:
            # x = (p_{n-1} r_n + p_{n-2}) / (q_{n-1} r_n + q_{n-2}), r_n = 1 / T^{n-1} x
            r = 1 / remainder_exact(x, cf, n - 1)
            p2 = cf.p[n - 2] if n >= 2 else 1
            q2 = cf.q[n - 2] if n >= 2 else 0
            assert x == (cf.p[n - 1] * r + p2) / (cf.q[n - 1] * r + q2)
            assert reversed_cf_value(cf, n) * cf.q[n] == cf.q[n - 1]
            assert cf.q[n] ** 2 >= 2 ** (n - 1)
        if n < cf.valid_depth:
            # one more Euclid step from T^n x yields a_{n+1}
            inv = 1 / t
            assert inv.numerator // inv.denominator == cf.digits[n]
        y = gauss_map(y)
    assert all(cf.q[n] < cf.q[n + 1] for n in range(1, cf.valid_depth))
