"""Total probability of the renewal process summed over states 0..N, across times.

Shows where the fixed-precision series stops being trustworthy: the deficit
``1 - sum`` grows once ``rate * t**min(order)`` is large.

    python3 scripts/normalization.py --orders 0.5,0.8,0.6,0.9 --fill 0.7 --rate 2
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from fracpoint import OrderSequence, TruncationPolicy, sdtfpp2_pmf


def floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--orders", type=floats, default=[0.5, 0.8, 0.6, 0.9])
    parser.add_argument("--fill", type=float, default=0.7, help="order used past the given ones")
    parser.add_argument("--rate", type=float, default=2.0)
    parser.add_argument("--states", type=int, default=40)
    parser.add_argument("--times", type=floats, default=list(np.round(np.linspace(0.25, 2.0, 8), 3)))
    parser.add_argument("--mode", choices=["plain", "compensated", "extended"], default="compensated")
    args = parser.parse_args(argv)

    orders = list(args.orders) + [args.fill] * max(0, args.states + 1 - len(args.orders))
    params = OrderSequence.poisson(orders, args.rate)
    policy = TruncationPolicy(mode=args.mode)
    print("t,intensity,sum,abs_deficit,all_reliable")
    for t in args.times:
        results = [sdtfpp2_pmf(params, n, t, policy) for n in range(args.states + 1)]
        total = math.fsum(r.value for r in results)
        intensity = args.rate * t ** min(orders)
        ok = all(r.reliable for r in results)
        print(f"{t:.6g},{intensity:.4g},{total:.15g},{abs(1 - total):.3g},{ok}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
