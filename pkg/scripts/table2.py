"""Robustness values for a randomized treatment at large sample size.

When the treatment is randomized, the partial R^2 of any pre-treatment
covariate with it is small: its 95th percentile is about chi2_1(0.95)/df.
This prints XRVI at that cap next to XRVI0, RVI and XRVI1 for a row of
observed t-statistics.
"""

import argparse
from dataclasses import dataclass, field

from sigreversal import RestrictedFit, q95_r2d, rvi, xrvi, xrvi0, xrvi1


@dataclass(frozen=True)
class Table2Config:
    df: int = 100_000
    alpha: float = 0.05
    t_values: tuple[float, ...] = field(default=(0.25, 0.50, 0.75, 1.00, 1.25, 1.50, 1.75))


def rows(cfg: Table2Config):
    cap = q95_r2d(cfg.df)
    fits = [RestrictedFit.from_t(t, cfg.df) for t in cfg.t_values]
    yield "t_r", [f"{t:.2f}" for t in cfg.t_values]
    yield f"XRVI (R2_D <= {cap:.2e})", [f"{xrvi(f, cfg.alpha, cap):.3f}" for f in fits]
    yield "XRVI0", [f"{xrvi0(f, cfg.alpha):.3f}" for f in fits]
    yield "RVI", [f"{rvi(f, cfg.alpha):.4f}" for f in fits]
    yield "XRVI1", [f"{xrvi1(f, cfg.alpha):.2e}" for f in fits]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--df", type=int, default=Table2Config.df)
    parser.add_argument("--alpha", type=float, default=Table2Config.alpha)
    parser.add_argument("--t", type=float, nargs="+", dest="t_values")
    args = parser.parse_args()
    cfg = Table2Config(args.df, args.alpha, tuple(args.t_values) if args.t_values else Table2Config().t_values)
    table = list(rows(cfg))
    label_w = max(len(label) for label, _ in table)
    cell_w = max(len(c) for _, cells in table for c in cells)
    for label, cells in table:
        print(label.ljust(label_w), *(c.rjust(cell_w) for c in cells), sep="  ")


if __name__ == "__main__":
    main()
