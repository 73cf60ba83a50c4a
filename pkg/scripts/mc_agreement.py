"""Monte-Carlo check of the renewal (SDTFPP-II) and birth-process probabilities.

Simulates ``--samples`` paths and reports the empirical probability, its
3-sigma half-width and the series value for each state.

    python3 scripts/mc_agreement.py --samples 1000000 --seed 1
"""

from __future__ import annotations

import argparse
import sys

from fracpoint import OrderSequence, sdfpbp_pmf, sdtfpp2_pmf
from fracpoint.simulate import empirical_pmf, estimate_sdfpbp, sample_sdtfpp2_states, spawn_rngs


def floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--orders", type=floats, default=[0.5, 0.8, 0.6, 0.9, 0.7, 0.7])
    parser.add_argument("--rate", type=float, default=2.0)
    parser.add_argument("--birth-rates", type=floats, default=[1.0, 2.0, 3.0, 1.5, 1.0, 1.0])
    parser.add_argument("-t", "--time", type=float, default=0.5)
    parser.add_argument("--states", type=int, default=4, help="number of states reported")
    parser.add_argument("--samples", type=int, default=10**6)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    streams = spawn_rngs(args.seed, args.states + 1)
    print("process,n,estimate,half_width,series,covered")
    poisson = OrderSequence.poisson(args.orders, args.rate)
    states = sample_sdtfpp2_states(
        args.orders, args.rate, args.time, args.samples, streams[0], censor_at=args.states
    )
    for n, est in enumerate(empirical_pmf(states, range(args.states))):
        want = sdtfpp2_pmf(poisson, n, args.time).value
        print(f"sdtfpp2,{n},{est.value:.6g},{est.half_width:.3g},{want:.6g},{est.covers(want)}")
    birth = OrderSequence.birth(args.orders, args.birth_rates)
    for n in range(1, args.states + 1):
        est = estimate_sdfpbp(args.orders, args.birth_rates, n, args.time, args.samples, streams[n])
        want = sdfpbp_pmf(birth, n, args.time).value
        print(f"sdfpbp,{n},{est.value:.6g},{est.half_width:.3g},{want:.6g},{est.covers(want)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
