"""Command-line interface: ``fracpoint {eval,compare,simulate,convolve}``.

Every subcommand takes the same run description (process, orders, rates,
states, time grid, truncation policy) either as flags or from a ``key=value``
file given with ``--config``; flags override the file.  Tables go to stdout or
``--out-file`` as CSV (header row, LF line endings) or as a JSON array of row
objects.  Floats are written with 17 significant digits.

Exit codes: 0 success, 2 invalid configuration, 3 evaluation failure,
4 ``compare`` found a difference above tolerance.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .adm import adm_partial_sum
from .errors import FracPointError
from .params import OrderSequence, Process, TruncationPolicy
from .processes import (
    conv_ml_density_general,
    conv_ml_density_unit,
    fpbp_pmf,
    sdfpbp_pmf,
    sdlbp_pmf,
    sdtfpp1_pmf,
    sdtfpp2_pmf,
    tfpp_pmf,
)
from .simulate import (
    empirical_pmf,
    estimate_sdfpbp,
    estimate_sdtfpp1,
    sample_sdfpbp_states,
    sample_sdtfpp2_states,
    simulate_sdfpbp,
    simulate_sdtfpp2,
)
from .transforms import LTClosedForm, talbot_invert

__all__ = ["ConfigError", "TimeGrid", "RunConfig", "build_parser", "load_config", "main"]

PROCESSES = ("sdtfpp1", "sdtfpp2", "sdfpbp", "tfpp", "fpbp", "sdlbp", "conv-unit", "conv-general")
METHODS = ("series", "adm", "talbot", "mc")
POISSON_TYPE = ("sdtfpp1", "sdtfpp2", "tfpp", "sdlbp")
CONVOLUTIONS = ("conv-unit", "conv-general")

EXIT_CONFIG = 2
EXIT_EVAL = 3
EXIT_MISMATCH = 4


class ConfigError(ValueError):
    """Invalid run configuration; ``field`` names the offending setting."""

    def __init__(self, field_name: str, message: str) -> None:
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class TimeGrid:
    start: float = 1.0
    stop: float = 1.0
    count: int = 1
    scale: str = "linear"

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ConfigError("t-count", f"must be >= 1, got {self.count}")
        if self.scale not in ("linear", "log"):
            raise ConfigError("t-scale", f"must be 'linear' or 'log', got {self.scale!r}")
        if not (self.start >= 0 and self.stop >= 0):
            raise ConfigError("t-start", "times must be nonnegative")
        if self.scale == "log" and not (self.start > 0 and self.stop > 0):
            raise ConfigError("t-start", "a log grid needs positive endpoints")

    def points(self) -> list[float]:
        if self.count == 1:
            return [float(self.start)]
        if self.scale == "log":
            return [float(x) for x in np.geomspace(self.start, self.stop, self.count)]
        return [float(x) for x in np.linspace(self.start, self.stop, self.count)]


@dataclass(frozen=True)
class RunConfig:
    process: str = "sdtfpp1"
    orders: tuple[float, ...] = ()
    rates: tuple[float, ...] | None = None
    lam: float | None = None
    states: tuple[int, ...] = (0,)
    times: TimeGrid = field(default_factory=TimeGrid)
    policy: TruncationPolicy = field(default_factory=TruncationPolicy)
    seed: int = 0
    samples: int = 100_000
    output: str = "csv"
    methods: tuple[str, ...] = ("series",)
    tol: float = 1e-8
    construction: str = "factorization"

    def validate(self) -> RunConfig:
        """Check arity and option values; raise :class:`ConfigError` naming the field."""
        if self.process not in PROCESSES:
            raise ConfigError("process", f"unknown process {self.process!r}; choose from {PROCESSES}")
        if self.output not in ("csv", "json"):
            raise ConfigError("output", f"must be 'csv' or 'json', got {self.output!r}")
        if not self.methods:
            raise ConfigError("methods", "at least one method is required")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError("methods", f"unknown method {m!r}; choose from {METHODS}")
        if not self.orders:
            raise ConfigError("orders", "no orders given")
        if self.samples < 1:
            raise ConfigError("samples", f"must be positive, got {self.samples}")
        if self.construction not in ("factorization", "sojourn"):
            raise ConfigError("construction", f"unknown construction {self.construction!r}")
        if not self.states:
            raise ConfigError("n", "no states given")
        p = self.process
        top = max(self.states)
        if p in POISSON_TYPE and self.lam is None:
            raise ConfigError("lambda", f"{p} needs --lambda")
        if p in ("sdfpbp", "fpbp", "conv-general") and self.rates is None:
            raise ConfigError("rates", f"{p} needs --rates")
        if p in ("tfpp", "fpbp") and len(self.orders) != 1:
            raise ConfigError("orders", f"{p} takes exactly one order, got {len(self.orders)}")
        if p in ("sdtfpp1", "sdtfpp2") and len(self.orders) < top + 1:
            raise ConfigError(
                "orders", f"state {top} needs {top + 1} orders, got {len(self.orders)}"
            )
        if p in ("sdfpbp", "sdlbp") and len(self.orders) < top:
            raise ConfigError("orders", f"state {top} needs {top} orders, got {len(self.orders)}")
        if p in ("sdfpbp", "conv-general") and len(self.rates) != len(self.orders):
            raise ConfigError(
                "rates", f"{len(self.orders)} orders need {len(self.orders)} rates, got {len(self.rates)}"
            )
        if p == "fpbp" and len(self.rates) < top:
            raise ConfigError("rates", f"state {top} needs {top} rates, got {len(self.rates)}")
        if p in ("sdfpbp", "fpbp", "sdlbp") and min(self.states) < 1:
            raise ConfigError("n", "birth-process states start at 1")
        if p in ("sdtfpp1", "sdtfpp2", "tfpp") and min(self.states) < 0:
            raise ConfigError("n", "states must be >= 0")
        if p in CONVOLUTIONS and self.orders[0] != 1.0:
            raise ConfigError("orders", f"{p} needs the first order equal to 1")
        if p == "conv-general" and self.rates[-1] != 1.0:
            raise ConfigError("rates", "conv-general needs the last rate equal to 1")
        if p in CONVOLUTIONS and "mc" in self.methods:
            raise ConfigError("methods", f"no Monte-Carlo construction for {p}")
        try:
            self.canonical(top if p not in CONVOLUTIONS else self.implied_state())
        except FracPointError as exc:
            msg = str(exc)
            if "order" in msg:
                name = "orders"
            else:
                name = "lambda" if p in POISSON_TYPE else "rates"
            raise ConfigError(name, msg) from exc
        return self

    def implied_state(self) -> int:
        """The single state of a convolution density."""
        return len(self.orders) - 1 if self.process == "conv-unit" else len(self.orders)

    def row_states(self) -> tuple[int, ...]:
        return (self.implied_state(),) if self.process in CONVOLUTIONS else self.states

    def canonical(self, top: int) -> tuple[Process, OrderSequence]:
        """The underlying process and parameters covering states up to ``top``."""
        p = self.process
        if p in ("sdtfpp1", "sdtfpp2"):
            return Process(p), OrderSequence.poisson(self.orders, self.lam)
        if p == "tfpp":
            return Process.SDTFPP1, OrderSequence.poisson(self.orders * (top + 1), self.lam)
        if p == "sdfpbp":
            return Process.SDFPBP, OrderSequence.birth(self.orders, self.rates)
        if p == "fpbp":
            return Process.SDFPBP, OrderSequence.birth(self.orders * len(self.rates), self.rates)
        if p == "sdlbp":
            rates = [self.lam * j for j in range(1, len(self.orders) + 1)]
            return Process.SDFPBP, OrderSequence.birth(self.orders, rates)
        if p == "conv-unit":
            return Process.CONV_UNIT, OrderSequence.poisson(self.orders, 1.0)
        return Process.CONV_GENERAL, OrderSequence.birth(self.orders, self.rates)


# ---------------------------------------------------------------- parsing


def _float_list(text: str, name: str) -> tuple[float, ...]:
    """``"0.5,0.8,0.7*3"`` -> (0.5, 0.8, 0.7, 0.7, 0.7)."""
    out: list[float] = []
    for token in text.replace(" ", "").split(","):
        if not token:
            continue
        try:
            if "*" in token:
                value, times = token.split("*")
                out.extend([float(value)] * int(times))
            else:
                out.append(float(token))
        except ValueError as exc:
            raise ConfigError(name, f"cannot parse {token!r}") from exc
    return tuple(out)


def _state_list(text: str) -> tuple[int, ...]:
    """``"0..3"``, ``"1,4,5"`` or ``"2"``."""
    try:
        states: list[int] = []
        for token in str(text).replace(" ", "").split(","):
            if ".." in token:
                lo, hi = token.split("..")
                states.extend(range(int(lo), int(hi) + 1))
            elif token:
                states.append(int(token))
    except ValueError as exc:
        raise ConfigError("n", f"cannot parse {text!r}") from exc
    return tuple(sorted(set(states)))


#: config-file / flag keys and their argparse destinations
_KEYS = {
    "process": "process",
    "orders": "orders",
    "rates": "rates",
    "lambda": "lam",
    "n": "n",
    "t-start": "t_start",
    "t-stop": "t_stop",
    "t-count": "t_count",
    "t-scale": "t_scale",
    "rel-tol": "rel_tol",
    "abs-tol": "abs_tol",
    "k-max": "k_max",
    "mode": "mode",
    "dps": "dps",
    "methods": "methods",
    "seed": "seed",
    "samples": "samples",
    "output": "output",
    "tol": "tol",
    "construction": "construction",
}


def load_config(path: str) -> dict[str, str]:
    """Read ``key = value`` lines (``#`` comments, blank lines ignored)."""
    values: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("config", f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("_", "-")
        if key not in _KEYS:
            raise ConfigError("config", f"{path}:{lineno}: unknown key {key!r}")
        values[_KEYS[key]] = value
    return values


def _convert(dest: str, raw, cast: Callable):
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        key = next(k for k, d in _KEYS.items() if d == dest)
        raise ConfigError(key, f"invalid value {raw!r}") from exc


def config_from_args(args: argparse.Namespace) -> RunConfig:
    merged = load_config(args.config) if args.config else {}
    for dest in _KEYS.values():
        value = getattr(args, dest, None)
        if value is not None:
            merged[dest] = value
    if args.command == "convolve" and "process" not in merged:
        merged["process"] = "conv-unit"

    def get(dest, cast, default=None):
        if dest not in merged:
            return default
        return _convert(dest, merged[dest], cast)

    process = get("process", str, "sdtfpp1")
    first_state = (1,) if process in ("sdfpbp", "fpbp", "sdlbp") else (0,)
    t_start = get("t_start", float, 1.0)
    try:
        policy = TruncationPolicy(
            rel_tol=get("rel_tol", float, 1e-10),
            abs_tol=get("abs_tol", float, 1e-13),
            k_max=get("k_max", int, 400),
            mode=get("mode", str, "compensated"),
            dps=get("dps", int, 40),
        )
    except FracPointError as exc:
        msg = str(exc)
        name = next((k for k in ("k-max", "mode", "dps") if k.replace("-", "_") in msg), "rel-tol")
        raise ConfigError(name, msg) from exc
    cfg = RunConfig(
        process=process,
        orders=get("orders", lambda s: _float_list(s, "orders"), ()),
        rates=get("rates", lambda s: _float_list(s, "rates"), None),
        lam=get("lam", float, None),
        states=get("n", _state_list, first_state),
        times=TimeGrid(
            t_start,
            get("t_stop", float, t_start),
            get("t_count", int, 1),
            get("t_scale", str, "linear"),
        ),
        policy=policy,
        seed=get("seed", int, 0),
        samples=get("samples", int, 100_000),
        output=get("output", str, "csv"),
        methods=get("methods", lambda s: tuple(m for m in s.split(",") if m), ("series",)),
        tol=get("tol", float, 1e-8),
        construction=get("construction", str, "factorization"),
    )
    if args.command == "compare" and len(cfg.methods) < 2:
        raise ConfigError("methods", "compare needs at least two methods")
    if args.command == "convolve" and cfg.process not in CONVOLUTIONS:
        raise ConfigError("process", "convolve handles conv-unit and conv-general only")
    if args.command == "simulate" and cfg.process not in ("sdtfpp1", "sdtfpp2", "sdfpbp", "tfpp", "fpbp", "sdlbp"):
        raise ConfigError("process", f"no simulation for {cfg.process}")
    if getattr(args, "paths_file", None) and cfg.process == "sdtfpp1":
        raise ConfigError("paths-file", "sdtfpp1 is estimated without sample paths")
    return cfg.validate()


# ------------------------------------------------------------- evaluation


def series_value(cfg: RunConfig, n: int, t: float):
    p, pol = cfg.process, cfg.policy
    if p == "sdtfpp1":
        return sdtfpp1_pmf(OrderSequence.poisson(cfg.orders, cfg.lam), n, t, pol)
    if p == "sdtfpp2":
        return sdtfpp2_pmf(OrderSequence.poisson(cfg.orders, cfg.lam), n, t, pol)
    if p == "sdfpbp":
        return sdfpbp_pmf(OrderSequence.birth(cfg.orders, cfg.rates), n, t, pol)
    if p == "tfpp":
        return tfpp_pmf(cfg.orders[0], cfg.lam, n, t, pol)
    if p == "fpbp":
        return fpbp_pmf(cfg.orders[0], cfg.rates, n, t, pol)
    if p == "sdlbp":
        return sdlbp_pmf(cfg.orders, cfg.lam, n, t, pol)
    if p == "conv-unit":
        return conv_ml_density_unit(cfg.orders, t, pol)
    return conv_ml_density_general(cfg.orders, cfg.rates, t, pol)


def _mc_estimate(cfg: RunConfig, n: int, t: float, index: int):
    """Monte-Carlo value and half-width at one grid point (own seeded stream)."""
    rng = _stream(cfg.seed, index)
    process, params = cfg.canonical(max(cfg.row_states()))
    if process is Process.SDTFPP1:
        return estimate_sdtfpp1(params.orders, params.rate, n, t, max(cfg.samples, 10_000), rng)
    if process is Process.SDTFPP2:
        states = sample_sdtfpp2_states(params.orders, params.rate, t, cfg.samples, rng, n + 1)
        return empirical_pmf(states, [n])[0]
    if process is Process.SDFPBP:
        if cfg.construction == "sojourn":
            states = sample_sdfpbp_states(params.orders, params.rates, t, cfg.samples, rng, n + 1)
            return empirical_pmf(states, [n])[0]
        return estimate_sdfpbp(params.orders, params.rates, n, t, max(cfg.samples, 10_000), rng)
    raise FracPointError(f"no Monte-Carlo construction for {cfg.process}")


def _stream(seed: int, index: int) -> np.random.Generator:
    """Generator for grid point ``index``; independent of thread scheduling."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _grid(cfg: RunConfig) -> list[tuple[int, float]]:
    return [(n, t) for n in cfg.row_states() for t in cfg.times.points()]


def _pool_map(fn, items):
    cap = os.environ.get("FRACPOINT_THREADS")
    workers = max(1, int(cap)) if cap and cap.isdigit() else min(8, os.cpu_count() or 1)
    if workers == 1 or len(items) == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))  # map keeps input order


def run_eval(cfg: RunConfig) -> list[dict]:
    def one(point):
        n, t = point
        r = series_value(cfg, n, t)
        return {"n": n, "t": t, "value": r.value, "err_est": r.err_est,
                "k_used": r.k_used, "reliable": r.reliable}

    return _pool_map(one, _grid(cfg))


def run_compare(cfg: RunConfig) -> tuple[list[dict], bool]:
    process, params = cfg.canonical(max(cfg.row_states()))
    grid = _grid(cfg)

    def one(item):
        index, (n, t) = item
        row: dict = {"n": n, "t": t}
        base = series_value(cfg, n, t)
        values: dict[str, float] = {}
        half = 0.0
        for m in cfg.methods:
            if m == "series":
                values[m] = base.value
            elif m == "adm":
                # same truncation depth the series stopped at; the one-order
                # Poisson series numbers its blocks from the first nonzero one
                depth = base.k_used + (n if cfg.process == "tfpp" else 0)
                values[m] = adm_partial_sum(process, params, n, depth, t)
            elif m == "talbot":
                # the inversion needs t > 0; at t = 0 the column is left empty
                values[m] = talbot_invert(LTClosedForm(process, params, n), t) if t > 0 else math.nan
            else:
                est = _mc_estimate(cfg, n, t, index)
                values[m] = est.value
                half = est.half_width
        row.update(values)
        worst, ok = 0.0, True
        names = list(values)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                d = abs(values[a] - values[b])
                if math.isnan(d):
                    continue
                worst = max(worst, d)
                limit = half if "mc" in (a, b) else cfg.tol
                ok = ok and d <= limit
        row["max_abs_diff"] = worst
        if "mc" in values:
            row["mc_half_width"] = half
        row["agree"] = ok
        return row

    rows = _pool_map(one, list(enumerate(grid)))
    return rows, all(r["agree"] for r in rows)


def run_simulate(cfg: RunConfig) -> list[dict]:
    grid = _grid(cfg)

    def one(item):
        index, (n, t) = item
        est = _mc_estimate(cfg, n, t, index)
        return {"n": n, "t": t, "value": est.value, "half_width": est.half_width,
                "samples": est.samples}

    return _pool_map(one, list(enumerate(grid)))


def dump_paths(cfg: RunConfig, count: int, stream) -> None:
    """Write ``count`` simulated paths up to the last grid time, one per line.

    Each line lists the event times (comma separated, possibly empty).  A path
    that needs more waiting times than there are orders raises
    :class:`~fracpoint.errors.OrdersExhausted`.
    """
    process, params = cfg.canonical(max(cfg.row_states()))
    horizon = cfg.times.points()[-1]
    rng = _stream(cfg.seed, 2**32 - 1)  # disjoint from the grid-point streams
    for _ in range(count):
        if process is Process.SDFPBP:
            path = simulate_sdfpbp(params.orders, params.rates, horizon, rng)
        else:
            path = simulate_sdtfpp2(params.orders, params.rate, horizon, rng)
        stream.write(",".join(_fmt_csv(x) for x in path.event_times) + "\n")


# --------------------------------------------------------------- output


def _fmt_csv(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def _fmt_json(v) -> str:
    if isinstance(v, float) and not math.isfinite(v):
        return "null"
    if isinstance(v, str):
        return json.dumps(v)
    return _fmt_csv(v)


def render(rows: Sequence[dict], fmt: str) -> str:
    """Serialize rows; every row must have the same keys."""
    if not rows:
        return "" if fmt == "csv" else "[]\n"
    keys = list(rows[0])
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(",".join(keys) + "\n")
        for row in rows:
            buf.write(",".join(_fmt_csv(row[k]) for k in keys) + "\n")
        return buf.getvalue()
    body = ",\n".join(
        "  {" + ", ".join(f"{json.dumps(k)}: {_fmt_json(row[k])}" for k in keys) + "}"
        for row in rows
    )
    return "[\n" + body + "\n]\n"


def _emit(text: str, out_file: str | None) -> None:
    if out_file:
        with open(out_file, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ------------------------------------------------------------------ main


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run description")
    g.add_argument("--config", help="key=value file; flags override its entries")
    g.add_argument("--process", choices=PROCESSES)
    g.add_argument("--orders", help="comma list, 'x*k' repeats x k times")
    g.add_argument("--rates", help="comma list of per-state rates")
    g.add_argument("--lambda", dest="lam", help="single rate")
    g.add_argument("--n", help="states: '0..3', '1,2,5' or '2'")
    g.add_argument("--t-start", dest="t_start")
    g.add_argument("--t-stop", dest="t_stop")
    g.add_argument("--t-count", dest="t_count")
    g.add_argument("--t-scale", dest="t_scale", choices=("linear", "log"))
    g.add_argument("--rel-tol", dest="rel_tol")
    g.add_argument("--abs-tol", dest="abs_tol")
    g.add_argument("--k-max", dest="k_max")
    g.add_argument("--mode", choices=("plain", "compensated", "extended"))
    g.add_argument("--dps", help="working digits for --mode extended")
    g.add_argument("--methods", help="comma list from series,adm,talbot,mc")
    g.add_argument("--tol", help="compare: allowed absolute difference (mc uses 3 sigma)")
    g.add_argument("--seed")
    g.add_argument("--samples")
    g.add_argument("--construction", choices=("factorization", "sojourn"),
                   help="birth-process Monte Carlo: transform factorization or sojourn paths")
    g.add_argument("--output", choices=("csv", "json"))
    g.add_argument("--out-file", dest="out_file")

    parser = argparse.ArgumentParser(prog="fracpoint", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("eval", parents=[common], help="series values on an (n, t) grid")
    sub.add_parser("compare", parents=[common], help="cross-method comparison table")
    sim = sub.add_parser("simulate", parents=[common], help="Monte-Carlo pmf table")
    sim.add_argument("--paths-file", dest="paths_file", help="write event times of sample paths")
    sim.add_argument("--paths", type=int, default=100, help="number of paths to dump")
    sub.add_parser("convolve", parents=[common], help="convolution density table")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"fracpoint: config error in {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        status = 0
        if args.command == "compare":
            rows, ok = run_compare(cfg)
            status = 0 if ok else EXIT_MISMATCH
        elif args.command == "simulate":
            rows = run_simulate(cfg)
            if args.paths_file:
                with open(args.paths_file, "w", encoding="utf-8", newline="\n") as fh:
                    dump_paths(cfg, args.paths, fh)
        else:
            rows = run_eval(cfg)
    except (FracPointError, ArithmeticError, ValueError) as exc:
        print(f"fracpoint: evaluation failed: {exc}", file=sys.stderr)
        return EXIT_EVAL
    _emit(render(rows, cfg.output), args.out_file)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
