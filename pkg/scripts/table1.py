"""Robustness report for a single published coefficient.

Defaults reproduce the observational-study row used throughout the tests:
estimate 0.103, standard error 0.873, 4307 residual degrees of freedom.
"""

import argparse
import time
from dataclasses import dataclass

from sigreversal import RestrictedFit
from sigreversal.cli import render_text, report_payload


@dataclass(frozen=True)
class Table1Config:
    estimate: float = 0.103
    std_error: float = 0.873
    df: int = 4307
    alpha: float = 0.05


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    defaults = Table1Config()
    parser.add_argument("--estimate", type=float, default=defaults.estimate)
    parser.add_argument("--se", type=float, default=defaults.std_error)
    parser.add_argument("--df", type=int, default=defaults.df)
    parser.add_argument("--alpha", type=float, default=defaults.alpha)
    args = parser.parse_args()
    cfg = Table1Config(args.estimate, args.se, args.df, args.alpha)

    fit = RestrictedFit(cfg.estimate, cfg.std_error, cfg.df)
    start = time.perf_counter()
    payload = {"command": "summary", **report_payload(fit, cfg.alpha)}
    elapsed = time.perf_counter() - start
    print(render_text(payload), end="")
    print(f"computed in {elapsed * 1e6:.0f} us")


if __name__ == "__main__":
    main()
