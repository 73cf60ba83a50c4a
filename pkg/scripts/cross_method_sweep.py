"""Compare the series, the ADM partial sums and the Talbot inverse on a time grid.

Prints one CSV row per (process, state, time) with the three values and the
largest pairwise difference.

    python3 scripts/cross_method_sweep.py --orders 0.9,0.6,0.8,0.7 --rate 1.5 --tmax 2
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from fracpoint import LTClosedForm, OrderSequence, Process, adm_partial_sum, talbot_invert
from fracpoint.processes import evaluate


def floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--orders", type=floats, default=[0.9, 0.6, 0.8, 0.7])
    parser.add_argument("--rate", type=float, default=1.0, help="Poisson-type rate")
    parser.add_argument("--birth-rates", type=floats, default=None, help="rates for the birth process")
    parser.add_argument("--tmax", type=float, default=2.0)
    parser.add_argument("--points", type=int, default=8)
    args = parser.parse_args(argv)

    orders = args.orders
    birth_rates = args.birth_rates or [args.rate * (j + 1) for j in range(len(orders))]
    cases = [
        (Process.SDTFPP1, OrderSequence.poisson(orders, args.rate), range(len(orders))),
        (Process.SDTFPP2, OrderSequence.poisson(orders, args.rate), range(len(orders))),
        (Process.SDFPBP, OrderSequence.birth(orders, birth_rates), range(1, len(orders) + 1)),
    ]
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["process", "n", "t", "series", "adm", "talbot", "max_abs_diff"])
    for process, params, states in cases:
        for n in states:
            for t in np.linspace(args.tmax / args.points, args.tmax, args.points):
                base = evaluate(process, params, n, t)
                depth = max(base.k_used, 1)
                adm = adm_partial_sum(process, params, n, depth, t)
                tal = talbot_invert(LTClosedForm(process, params, n), t)
                vals = (base.value, adm, tal)
                diff = max(abs(a - b) for a in vals for b in vals)
                writer.writerow([process.value, n, f"{t:.6g}", *(f"{v:.17g}" for v in vals), f"{diff:.3g}"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
