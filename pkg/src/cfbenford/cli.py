"""Command line entry point: ``cfbenford run --experiment NAME [flags]``."""

from __future__ import annotations

import argparse
import sys

from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, run
from .sampling import parse_digits


def _int_list(text: str) -> tuple:
    try:
        return parse_digits(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _bits(text: str):
    if text == "auto":
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bits must be 'auto' or an integer, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cfbenford",
                                 description="Continued-fraction equidistribution experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run one experiment and write a report")
    p.add_argument("--experiment", required=True, choices=EXPERIMENTS)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--depth", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--base", choices=("e", "10"), default="10")
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--l", type=int, default=0)
    p.add_argument("--k-list", type=_int_list, default=(4, 8, 16))
    p.add_argument("--measure", choices=("uniform", "gauss"), default="gauss")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--bits", type=_bits, default="auto")
    p.add_argument("--x", default=None, help="rational p/q for the expand experiment")
    p.add_argument("--period", type=_int_list, default=(1,))
    p.add_argument("--preperiod", type=_int_list, default=())
    p.add_argument("--t0", type=float, default=0.25)
    p.add_argument("--inner", default="log_q",
                   choices=("log_q", "digit_sum", "digit_log_prod", "birkhoff_neg_log",
                            "delta", "theta", "h_k_sum"))
    return ap


def parse_flags(argv) -> ExperimentConfig:
    """Parse ``argv`` (without the program name) into a config; exits 2 on any error."""
    ap = build_parser()
    ns = ap.parse_args(argv)
    fields = vars(ns).copy()
    fields.pop("command")
    fields["k_list"] = tuple(fields["k_list"])
    try:
        return ExperimentConfig(**fields)
    except ConfigError as exc:
        ap.error(str(exc))


def main(argv=None) -> int:
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)
    config = parse_flags(sys.argv[1:] if argv is None else argv)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
