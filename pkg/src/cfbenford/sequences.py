"""Real sequences built from an exact expansion.

Every generator returns a :class:`RealSeq` whose values are fixed-point
integers (scale ``2**-FRAC_BITS``), so that sums over thousands of terms and
the later reduction mod 1 stay exact up to the certified log error.  Indices
run ``n = 1..N``: ``seq.fixed[n - 1]`` is ``v_n``.

Logs of ``q_n`` and of the Euclid remainders are computed once per expansion
and memoised on it.  Because ``log T^j x = log r_j - log r_{j-1}``, Birkhoff
sums of ``-log`` along the orbit telescope exactly in fixed point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .exact import CFExpansion
from .numerics import (FRAC_BITS, LN2_256, ONE, WORK_BITS, LogBase, ln_fixed_work,
                       log_fixed, log_rational_fixed, natural_to_base)

KINDS = ("log_q", "digit_sum", "digit_log_prod", "birkhoff_neg_log", "delta", "theta",
         "t_ratio", "h_k_sum", "skew_orbit")

# per-term log error is < 2**-100; N terms stay far below this bookkeeping figure
TERM_ERROR = 2.0 ** -60


@dataclass(frozen=True)
class SequenceSpec:
    kind: str
    base: LogBase = LogBase.natural
    rho: float = 0.0
    l: int = 0
    k: int = 1
    t0: float = 0.0
    inner: Optional["SequenceSpec"] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown sequence kind {self.kind!r}")
        object.__setattr__(self, "base", LogBase.parse(self.base))
        if self.l < 0:
            raise ValueError("l must be >= 0")
        if self.kind == "h_k_sum" and self.k < 0:
            raise ValueError("k must be >= 0")
        if self.kind == "skew_orbit":
            if self.inner is None or self.inner.kind == "skew_orbit":
                raise ValueError("skew_orbit needs a non-skew inner spec")
            if not 0.0 <= self.t0 < 1.0:
                raise ValueError("t0 must lie in [0, 1)")


@dataclass
class RealSeq:
    fixed: list
    spec: Optional[SequenceSpec] = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.fixed)

    @property
    def values(self) -> np.ndarray:
        return np.array([v / ONE for v in self.fixed], dtype=float)

    @classmethod
    def from_floats(cls, values, spec=None, **meta) -> "RealSeq":
        return cls([_to_fixed(v) for v in values], spec, dict(meta))


def _to_fixed(v) -> int:
    return round(Fraction(v) * ONE)


def _check_depth(cf: CFExpansion, need: int):
    if need > cf.valid_depth:
        raise IndexError(f"need {need} digits, expansion certifies {cf.valid_depth}")


def _require_source(x, cf: CFExpansion):
    if not cf.rems:
        raise ValueError("this sequence needs an expansion produced by cf_expand(x)")
    if x is not None and Fraction(x) != cf.source:
        raise ValueError("x does not match the expansion's source")


def _round_work(v: int) -> int:
    shift = WORK_BITS - FRAC_BITS
    return (v + (1 << (shift - 1))) >> shift


def log_q_table(cf: CFExpansion) -> list:
    """Natural log of q_0..q_depth in fixed point (memoised)."""
    memo = cf._memo
    tab = memo.get("ln_q")
    if tab is None or len(tab) < cf.valid_depth + 1:
        tab = [_round_work(ln_fixed_work(q)) for q in cf.q[:cf.valid_depth + 1]]
        memo["ln_q"] = tab
    return tab


def log_rem_table(cf: CFExpansion) -> list:
    """Natural log of the Euclid remainders r_{-1}..r_depth; entry i is log rems[i]; log 0 -> None."""
    memo = cf._memo
    tab = memo.get("ln_r")
    if tab is None:
        tab = [_round_work(ln_fixed_work(r)) if r else None for r in cf.rems]
        memo["ln_r"] = tab
    return tab


def _meta(n_terms: int, **extra) -> dict:
    meta = {"error_bound": n_terms * TERM_ERROR}
    meta.update(extra)
    return meta


def gen_log_q(cf: CFExpansion, base=LogBase.natural, rho: float = 0.0, N: Optional[int] = None) -> RealSeq:
    N = cf.valid_depth if N is None else N
    _check_depth(cf, N)
    base = LogBase.parse(base)
    tab = log_q_table(cf)
    rho_fix = _to_fixed(rho)
    vals = [natural_to_base(tab[n], base) + n * rho_fix for n in range(1, N + 1)]
    return RealSeq(vals, SequenceSpec("log_q", base, rho=rho), _meta(2))


def gen_digit_sum(cf: CFExpansion, N: Optional[int] = None) -> RealSeq:
    N = cf.valid_depth if N is None else N
    _check_depth(cf, N)
    vals, s = [], 0
    for a in cf.digits[:N]:
        s += a
        vals.append(s << FRAC_BITS)
    return RealSeq(vals, SequenceSpec("digit_sum"), _meta(0))


def gen_digit_log_prod(cf: CFExpansion, base=LogBase.natural, N: Optional[int] = None) -> RealSeq:
    N = cf.valid_depth if N is None else N
    _check_depth(cf, N)
    base = LogBase.parse(base)
    cache = {}
    vals, s = [], 0
    for a in cf.digits[:N]:
        la = cache.get(a)
        if la is None:
            la = cache[a] = log_fixed(a, base)
        s += la
        vals.append(s)
    return RealSeq(vals, SequenceSpec("digit_log_prod", base), _meta(N))


def gen_birkhoff_neg_log(x, cf: CFExpansion, l: int = 0, base=LogBase.natural,
                         N: Optional[int] = None) -> RealSeq:
    """``v_n = -sum_{j<n} log T^{l+j} x``."""
    _require_source(x, cf)
    N = cf.valid_depth - l if N is None else N
    _check_depth(cf, N + l)
    base = LogBase.parse(base)
    lr = log_rem_table(cf)
    # log T^i x = lr[i+1] - lr[i], so the sum over i = l..l+n-1 telescopes
    start = lr[l]
    vals = [natural_to_base(start - lr[l + n], base) for n in range(1, N + 1)]
    return RealSeq(vals, SequenceSpec("birkhoff_neg_log", base, l=l), _meta(2))


def gen_delta(x, cf: CFExpansion, base=LogBase.natural, N: Optional[int] = None,
              route: str = "formula") -> RealSeq:
    """``delta_n``; ``route='formula'`` uses ``-log(1 + T^n x [a_n..a_1])``,
    ``route='definition'`` uses ``log(q_n x Tx ... T^{n-1}x)``."""
    _require_source(x, cf)
    N = cf.valid_depth if N is None else N
    _check_depth(cf, N)
    base = LogBase.parse(base)
    rems, q = cf.rems, cf.q
    vals = []
    if route == "formula":
        for n in range(1, N + 1):
            # 1 + (r_n / r_{n-1}) (q_{n-1} / q_n)
            den = rems[n] * q[n]
            num = den + rems[n + 1] * q[n - 1]
            vals.append(-log_rational_fixed(num, den, base))
    elif route == "definition":
        lq, lr = log_q_table(cf), log_rem_table(cf)
        for n in range(1, N + 1):
            vals.append(natural_to_base(lq[n] + lr[n] - lr[0], base))
    else:
        raise ValueError(f"unknown route {route!r}")
    return RealSeq(vals, SequenceSpec("delta", base), _meta(3, route=route))


def theta_exact(x, cf: CFExpansion, n: int) -> Fraction:
    """``q_n |x q_n - p_n|`` as an exact rational."""
    x = Fraction(x)
    return cf.q[n] * abs(x * cf.q[n] - cf.p[n])


def gen_theta(x, cf: CFExpansion, base=LogBase.natural, N: Optional[int] = None) -> RealSeq:
    """``log_base theta_n`` with ``theta_n = q_n r_n / r_{-1}``."""
    _require_source(x, cf)
    N = cf.valid_depth if N is None else N
    _check_depth(cf, N)
    base = LogBase.parse(base)
    lq, lr = log_q_table(cf), log_rem_table(cf)
    vals = []
    for n in range(1, N + 1):
        if lr[n + 1] is None:
            raise IndexError(f"theta_{n} vanishes: expansion exhausted")
        vals.append(natural_to_base(lq[n] + lr[n + 1] - lr[0], base))
    return RealSeq(vals, SequenceSpec("theta", base), _meta(3))


def gen_t_ratio(x, cf: CFExpansion, N: Optional[int] = None) -> RealSeq:
    """``t_n = T^n x * q_{n-1} / q_n``, floor-rounded to fixed point from the exact rational."""
    _require_source(x, cf)
    N = cf.valid_depth if N is None else N
    _check_depth(cf, N)
    rems, q = cf.rems, cf.q
    vals = [((rems[n + 1] * q[n - 1]) << FRAC_BITS) // (rems[n] * q[n]) for n in range(1, N + 1)]
    return RealSeq(vals, SequenceSpec("t_ratio"), _meta(1))


def t_ratio_floats(cf: CFExpansion, N: int) -> np.ndarray:
    """``t_n`` as correctly rounded doubles."""
    _check_depth(cf, N)
    rems, q = cf.rems, cf.q
    return np.array([(rems[n + 1] * q[n - 1]) / (rems[n] * q[n]) for n in range(1, N + 1)])


def window_reversed_cf(digits, start: int, k: int) -> tuple:
    """``[a_{start+k}, ..., a_{start+1}]`` as ``(num, den)``; 1-based digit indexing."""
    if k == 0:
        return 0, 1
    q_prev, q = 1, digits[start]
    for a in digits[start + 1:start + k]:
        q_prev, q = q, a * q + q_prev
    return q_prev, q


def _delta_k_shifted_fixed(cf: CFExpansion, k: int, m: int, base: LogBase) -> int:
    """``delta_k(T^m x)`` from the digit window a_{m+1..m+k} and ``T^{m+k} x``."""
    if k == 0:
        return 0
    num_w, den_w = window_reversed_cf(cf.digits, m, k)
    rems = cf.rems
    den = rems[m + k] * den_w
    num = den + rems[m + k + 1] * num_w
    return -log_rational_fixed(num, den, base)


def gen_h_k_sum(x, cf: CFExpansion, k: int, base=LogBase.natural, N: Optional[int] = None,
                route: str = "telescoped") -> RealSeq:
    """Birkhoff sums ``S_n h^(k)`` of ``h^(k) = h o T^k - delta_k + delta_k o T``, ``h = -log``.

    ``route='telescoped'`` evaluates ``S_n(h o T^k) - delta_k + delta_k o T^n`` in
    certified fixed point; ``route='direct'`` sums the per-point values of
    ``h^(k)`` in double precision with ``math.fsum``.  The two are independent.
    """
    _require_source(x, cf)
    N = cf.valid_depth - k if N is None else N
    _check_depth(cf, N + k)
    base = LogBase.parse(base)
    spec = SequenceSpec("h_k_sum", base, k=k)
    if route == "telescoped":
        head = gen_birkhoff_neg_log(x, cf, l=k, base=base, N=N).fixed
        d0 = _delta_k_shifted_fixed(cf, k, 0, base)
        vals = [head[n - 1] - d0 + _delta_k_shifted_fixed(cf, k, n, base) for n in range(1, N + 1)]
        return RealSeq(vals, spec, _meta(4, route=route))
    if route != "direct":
        raise ValueError(f"unknown route {route!r}")
    scale = 1.0 if base is LogBase.natural else 1.0 / math.log(10)
    rems = cf.rems

    def delta_k_at(m: int) -> float:
        if k == 0:
            return 0.0
        num_w, den_w = window_reversed_cf(cf.digits, m, k)
        t = rems[m + k + 1] * num_w / (rems[m + k] * den_w)
        return -math.log1p(t)

    deltas = [delta_k_at(m) for m in range(N + 1)]
    terms = []
    vals = []
    for j in range(N):
        h_tk = -math.log(rems[j + k + 1] / rems[j + k])
        terms.append(h_tk - deltas[j] + deltas[j + 1])
        vals.append(_to_fixed(math.fsum(terms) * scale))
    return RealSeq(vals, spec, {"error_bound": 1e-12 * N, "route": route})


def skew_orbit(x, cf: CFExpansion, spec: SequenceSpec, N: Optional[int] = None) -> RealSeq:
    """Fiber coordinate ``t0 + S_n f(x)`` of the skew product over the Gauss map."""
    if spec.kind != "skew_orbit":
        raise ValueError("skew_orbit needs a skew_orbit spec")
    inner = generate(spec.inner, x, cf, N)
    t0 = _to_fixed(spec.t0)
    return RealSeq([v + t0 for v in inner.fixed], spec, dict(inner.meta))


def generate(spec: SequenceSpec, x, cf: CFExpansion, N: Optional[int] = None) -> RealSeq:
    kind = spec.kind
    if kind == "log_q":
        return gen_log_q(cf, spec.base, spec.rho, N)
    if kind == "digit_sum":
        return gen_digit_sum(cf, N)
    if kind == "digit_log_prod":
        return gen_digit_log_prod(cf, spec.base, N)
    if kind == "birkhoff_neg_log":
        return gen_birkhoff_neg_log(x, cf, spec.l, spec.base, N)
    if kind == "delta":
        return gen_delta(x, cf, spec.base, N)
    if kind == "theta":
        return gen_theta(x, cf, spec.base, N)
    if kind == "t_ratio":
        return gen_t_ratio(x, cf, N)
    if kind == "h_k_sum":
        return gen_h_k_sum(x, cf, spec.k, spec.base, N)
    return skew_orbit(x, cf, spec, N)


def delta_approx_check(cf: CFExpansion, ks, N: Optional[int] = None) -> dict:
    """Check ``|delta_k(T^{n-k}x) - delta_n(x)| < -log(1 - 2**(-k/2))`` for k in ``ks``, k < n <= N.

    ``delta_k(T^{n-k}x)`` is built from the digit window a_{n-k+1..n} by running
    the convergent recurrence over the reversed digits, so all k for one n cost
    one pass.  Values are doubles from correctly rounded rationals; any pair whose
    float margin is under 1e-9 is re-checked in certified fixed point.

    Returns a dict ``{k: (violations, max_abs_diff)}``.
    """
    N = cf.valid_depth if N is None else N
    _check_depth(cf, N)
    ks = sorted(set(int(k) for k in ks))
    kmax = ks[-1]
    bounds = {k: -math.log1p(-(2.0 ** (-k / 2))) for k in ks}
    out = {k: [0, 0.0] for k in ks}
    rems, q, digits = cf.rems, cf.q, cf.digits
    for n in range(ks[0] + 1, N + 1):
        r_n, r_prev = rems[n + 1], rems[n]
        delta_n = -math.log1p(r_n * q[n - 1] / (r_prev * q[n]))
        # p~_j / q~_j = [a_n, ..., a_{n-j+1}]
        p_prev, q_prev, p_cur, q_cur = 1, 0, 0, 1
        for j in range(1, min(kmax, n - 1) + 1):
            a = digits[n - j]
            p_prev, p_cur = p_cur, a * p_cur + p_prev
            q_prev, q_cur = q_cur, a * q_cur + q_prev
            if j not in bounds:
                continue
            dk = -math.log1p(r_n * p_cur / (r_prev * q_cur))
            diff = abs(dk - delta_n)
            margin = bounds[j] - diff
            if margin < 1e-9:
                exact_dk = -log_rational_fixed(r_prev * q_cur + r_n * p_cur, r_prev * q_cur)
                exact_dn = -log_rational_fixed(r_prev * q[n] + r_n * q[n - 1], r_prev * q[n])
                diff = abs(exact_dk - exact_dn) / ONE
                if not diff < bounds[j]:
                    out[j][0] += 1
            out[j][1] = max(out[j][1], diff)
    return {k: tuple(v) for k, v in out.items()}


@dataclass(frozen=True)
class QuadraticParams:
    alpha: float
    l: int
    c_estimates: tuple
    residual: float


def _isqrt_fixed(v: int, bits: int) -> int:
    return math.isqrt(v << (2 * bits))


def quadratic_params(src, depth: int = 400, check_from: int = 200) -> QuadraticParams:
    """Growth rate and periodic offsets of ``log q_n`` for an eventually periodic expansion.

    ``alpha`` is the log of the spectral radius of the product of
    ``[[a, 1], [1, 0]]`` over one period.  ``c_estimates[j]`` is read off at
    ``n`` near ``2 * depth`` with ``n = j (mod l)``; ``residual`` is the largest
    ``|log q_n - (n/l) alpha - c_{n mod l}|`` over ``check_from <= n <= depth``.
    """
    from .sampling import quadratic_digits  # local: sampling imports exact only

    period = [int(a) for a in src.period]
    l = len(period)
    m00, m01, m10, m11 = 1, 0, 0, 1
    for a in period:
        m00, m01, m10, m11 = m00 * a + m01, m00, m10 * a + m11, m10
    tr, det = m00 + m11, m00 * m11 - m01 * m10
    w = WORK_BITS
    # lambda = (tr + sqrt(tr^2 - 4 det)) / 2, in fixed point with w fractional bits
    lam = ((tr << w) + _isqrt_fixed(tr * tr - 4 * det, w)) // 2
    alpha_w = ln_fixed_work(lam) - ((w * LN2_256) >> (256 - w))

    n_hi = 2 * max(depth, check_from + l)
    cf = quadratic_digits(src, n_hi)
    lq = [ln_fixed_work(qn) for qn in cf.q]

    def offset(n: int) -> int:
        return lq[n] - (n * alpha_w) // l

    c = {}
    for n in range(n_hi - l + 1, n_hi + 1):
        c[n % l] = offset(n)
    residual = max(abs(offset(n) - c[n % l]) for n in range(check_from, depth + 1))
    scale = float(1 << w)
    return QuadraticParams(alpha_w / scale, l, tuple(c[j] / scale for j in range(l)),
                           residual / scale)

