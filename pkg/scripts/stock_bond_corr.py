#!/usr/bin/env python3
"""Rolling 24-month correlation of monthly stock/bond returns from two
price CSVs (``date,level``), written as CSV + SVG.

Example:
    python scripts/stock_bond_corr.py stock.csv bond.csv --out out/fig1
"""

import argparse
from pathlib import Path

from corrtext import svgplot
from corrtext.ingest import load_price_series
from corrtext.market import replicate_fig1, write_corr_csv


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("stock", type=Path)
    ap.add_argument("bond", type=Path)
    ap.add_argument("--months", type=int, default=24)
    ap.add_argument("--out", type=Path, default=Path("out/fig1"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    corr = replicate_fig1(
        load_price_series(args.stock, "stock"),
        load_price_series(args.bond, "bond"),
        window_months=args.months,
    )
    write_corr_csv(corr, args.out / "monthly_corr.csv")
    points = [(float(d.toordinal()), float(v)) for d, v in zip(corr.dates, corr.values)]
    svgplot.line_chart(
        [(f"corr {args.months}m", points)],
        f"{args.months}-month rolling correlation of monthly returns",
        args.out / "monthly_corr.svg",
    )
    print(f"wrote {args.out / 'monthly_corr.csv'} ({len(corr)} months)")


if __name__ == "__main__":
    main()
