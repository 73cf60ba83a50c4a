"""Laplace-transform round trips: forward quadrature of the series and Talbot inversion.

    python3 scripts/round_trip.py --process sdtfpp1 --orders 0.7,0.9,0.6 --rate 0.4 -n 2
"""

from __future__ import annotations

import argparse
import functools
import math
import sys

from fracpoint import LTClosedForm, OrderSequence, Process, forward_lt, lt_eval, talbot_invert
from fracpoint.processes import evaluate


def floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--process", choices=["sdtfpp1", "sdtfpp2", "sdfpbp"], default="sdtfpp1")
    parser.add_argument("--orders", type=floats, default=[0.7, 0.9, 0.6, 0.8])
    parser.add_argument("--rate", type=float, default=0.4)
    parser.add_argument("--birth-rates", type=floats, default=[0.3, 0.5, 0.4, 0.6])
    parser.add_argument("-n", "--state", type=int, default=2)
    parser.add_argument("--s", type=floats, default=[0.5, 1.0, 2.0, 5.0])
    parser.add_argument("--t", type=floats, default=[0.25, 0.5, 1.0, 2.0])
    parser.add_argument("--tail", type=float, default=2e-7, help="target bound on the neglected tail")
    args = parser.parse_args(argv)

    process = Process(args.process)
    if process is Process.SDFPBP:
        params = OrderSequence.birth(args.orders, args.birth_rates)
    else:
        params = OrderSequence.poisson(args.orders, args.rate)
    form = LTClosedForm(process, params, args.state)

    @functools.lru_cache(maxsize=None)
    def pmf(t: float) -> float:
        return evaluate(process, params, args.state, t).value

    print("direction,point,numeric,closed_form,abs_diff")
    for s in args.s:
        out = forward_lt(pmf, s, -math.log(args.tail * s) / s)
        exact = lt_eval(form, s).real
        print(f"forward,{s:g},{out.value:.12g},{exact:.12g},{abs(out.value - exact):.3g}")
    for t in args.t:
        inv, series = talbot_invert(form, t), pmf(t)
        print(f"talbot,{t:g},{inv:.12g},{series:.12g},{abs(inv - series):.3g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
