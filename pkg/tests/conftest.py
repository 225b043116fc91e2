from fractions import Fraction

import pytest


def fibonacci(n):
    """F_0..F_n by the defining recurrence."""
    out = [0, 1]
    while len(out) <= n:
        out.append(out[-1] + out[-2])
    return out[: n + 1]


def euclid_digits(x: Fraction):
    """Independent digit extraction by repeated x -> 1/x - floor(1/x) on Fractions."""
    digits = []
    while x:
        y = 1 / x
        a = y.numerator // y.denominator
        digits.append(a)
        x = y - a
    return digits


@pytest.fixture
def golden_x():
    # F_200 / F_201: its first ~199 digits are all 1, so T^j x is the golden
    # fixed point to ~80 digits for small j
    fib = fibonacci(201)
    return Fraction(fib[200], fib[201])


# one pass/fail line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture
def report_line(capsys):
    def _report(label: str, ok: bool, detail: str = ""):
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
