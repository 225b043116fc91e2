"""Exact continued fractions and equidistribution statistics for convergent denominators."""

from .exact import (CFExpansion, cf_expand, format_rational, parse_rational, remainder_exact,
                    reversed_cf_value, verify_identities)
from .numerics import CONSTANTS, LogBase, log_mod1, log_rational
from .sampling import QuadraticSource, SamplerConfig, digit_horizon, quadratic_digits
from .sequences import RealSeq, SequenceSpec, generate
from .stats import StatReport, benford_stats, bjw_cdf, star_discrepancy, weyl_sum

__version__ = "0.1.0"
