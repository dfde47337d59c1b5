"""Command-line interface: single-channel costs, simulation errors, sweeps, verification.

Exit codes: 0 success, 1 usage error, 2 solver failure, 3 verification failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import channels as chn
from . import costs
from .channels import BipartiteChannel, ChannelSpecError
from .solver import SolverConfig, SolverError
from .verify import run_verification

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER = 2
EXIT_VERIFY = 3

CSV_HEADER = ["family", "param", "p", "quantity", "value_bits", "raw_scalar", "status", "solve_ms"]


@dataclass
class SweepSpec:
    """One experiment sweep: a channel family, a parameter grid, noise levels."""

    family: str  # swap_alpha | partial_swap
    grid: tuple[float, float, int]  # (start, stop, count)
    p_values: list[float]
    quantities: list[str] = field(default_factory=lambda: ["one_shot_cost", "lower_bound"])

    def __post_init__(self):
        if self.family not in ("swap_alpha", "partial_swap"):
            raise ValueError(f"unknown sweep family {self.family!r}")
        if self.grid[2] < 2:
            raise ValueError("grid needs at least two points")
        for p in self.p_values:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"noise level {p} outside [0, 1]")
        known = {"one_shot_cost", "lower_bound", "dmax"}
        bad = set(self.quantities) - known
        if bad:
            raise ValueError(f"unknown quantities {sorted(bad)}; known: {sorted(known)}")

    def params(self) -> list[float]:
        start, stop, count = self.grid
        return [float(v) for v in np.linspace(start, stop, int(count))]

    def channel(self, param: float, p: float) -> BipartiteChannel:
        if self.family == "swap_alpha":
            return chn.noisy_swap_alpha(param, p)
        return chn.noisy_partial_swap(param, p)


def _sweep_cell(spec: SweepSpec, param: float, p: float, quantity: str,
                config: SolverConfig | None) -> tuple[str, str, str, float]:
    """One CSV cell: (value_bits, raw_scalar, status, solve_ms)."""
    t0 = time.perf_counter()
    try:
        ch = spec.channel(param, p)
        if quantity == "one_shot_cost":
            r = costs.one_shot_exact_cost(ch, config)
            value, raw = r.value_bits, r.raw_scalar
            status = r.report.status if r.report else "analytic"
        elif quantity == "lower_bound":
            r = costs.asymptotic_lower_bound(ch, config)
            value, raw = r.value_bits, r.raw_scalar
            status = "optimal"
        else:
            r = costs.dmax_bidirectional(ch, config, cross_check=False)
            value, raw = r.value_bits, r.raw_scalar
            status = r.report.status
        return f"{value:.9f}", f"{raw:.9f}", status, (time.perf_counter() - t0) * 1e3
    except (SolverError, costs.DualMismatchError) as exc:
        return "", "", f"failed:{type(exc).__name__}", (time.perf_counter() - t0) * 1e3


def run_sweep(spec: SweepSpec, out_path: str, *, jobs: int | None = None,
              config: SolverConfig | None = None) -> str:
    """Run the sweep and write a CSV; rows appear in deterministic grid order.

    Per-cell solver failures are recorded in the status column and the sweep
    continues.  Cells are dispatched to a bounded worker pool; rows are still
    emitted in grid order regardless of completion order.
    """
    cells = [
        (param, p, quantity)
        for param in spec.params()
        for p in spec.p_values
        for quantity in spec.quantities
    ]
    workers = jobs or min(4, os.cpu_count() or 1)
    results: list[tuple] = [()] * len(cells)
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {
            pool.submit(_sweep_cell, spec, param, p, quantity, config): idx
            for idx, (param, p, quantity) in enumerate(cells)
        }
        for fut in concurrent.futures.as_completed(futures):
            results[futures[fut]] = fut.result()
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for (param, p, quantity), (value, raw, status, ms) in zip(cells, results):
            writer.writerow(
                [spec.family, f"{param:.9f}", f"{p:.9f}", quantity, value, raw, status, f"{ms:.1f}"]
            )
    return out_path


# ------------------------------------------------------------------ channel argument handling


def _add_channel_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--channel", help="path to a channel spec file (JSON)")
    parser.add_argument("--kind", choices=["swap_alpha", "partial_swap", "classical_noiseless"],
                        help="inline channel family instead of a spec file")
    parser.add_argument("--alpha", type=float, help="fractional-SWAP exponent")
    parser.add_argument("--a", type=float, help="partial-swap transmissivity")
    parser.add_argument("--p", type=float, default=0.0, help="global depolarizing noise")
    parser.add_argument("--m", type=int, help="message count for classical_noiseless")


def _channel_from_args(args) -> BipartiteChannel:
    if args.channel and args.kind:
        raise ChannelSpecError("give either --channel or --kind, not both")
    if args.channel:
        return chn.load_channel_spec(args.channel)
    if args.kind == "swap_alpha":
        if args.alpha is None:
            raise ChannelSpecError("--kind swap_alpha requires --alpha")
        return chn.noisy_swap_alpha(args.alpha, args.p)
    if args.kind == "partial_swap":
        if args.a is None:
            raise ChannelSpecError("--kind partial_swap requires --a")
        return chn.noisy_partial_swap(args.a, args.p)
    if args.kind == "classical_noiseless":
        if args.m is None:
            raise ChannelSpecError("--kind classical_noiseless requires --m")
        return chn.classical_noiseless_choi(args.m)
    raise ChannelSpecError("no channel given: use --channel FILE or --kind ...")


def _solver_config(args) -> SolverConfig:
    overrides = {}
    if getattr(args, "tol_gap", None) is not None:
        overrides["tol_gap"] = args.tol_gap
    if getattr(args, "max_iters", None) is not None:
        overrides["max_iters"] = args.max_iters
    if getattr(args, "backend", None):
        overrides["backend"] = args.backend
    return SolverConfig.from_env(**overrides)


QUANTITIES = {
    "one-shot": lambda ch, cfg, args: costs.one_shot_exact_cost(ch, cfg),
    "dmax": lambda ch, cfg, args: costs.dmax_bidirectional(ch, cfg),
    "dmax-oneway": lambda ch, cfg, args: costs.dmax_oneway(ch, cfg),
    "hmin-ab": lambda ch, cfg, args: costs.hmin_bipartite(ch, "A|B", cfg),
    "hmin-ba": lambda ch, cfg, args: costs.hmin_bipartite(ch, "B|A", cfg),
    "lower-bound": lambda ch, cfg, args: costs.asymptotic_lower_bound(ch, cfg),
    "robustness": lambda ch, cfg, args: costs.robustness(ch, cfg),
    "smooth-dmax": lambda ch, cfg, args: costs.smooth_dmax(ch, args.eps, cfg),
    "p2p": lambda ch, cfg, args: costs.p2p_exact_cost(ch, cfg),
}


def cmd_cost(args) -> int:
    ch = _channel_from_args(args)
    cfg = _solver_config(args)
    report = QUANTITIES[args.quantity](ch, cfg, args)
    if report.value_bits is not None:
        print(f"{report.value_bits:.6f} bits")
    else:
        print(f"{report.raw_scalar:.6f}")
    return EXIT_OK


def cmd_simerr(args) -> int:
    ch = _channel_from_args(args)
    cfg = _solver_config(args)
    report = costs.min_sim_error(args.m_messages, ch, cfg)
    print(f"{report.raw_scalar:.6f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        start, stop, count = (float(v) for v in args.grid.split(","))
        p_values = [float(v) for v in args.p.split(",")]
        quantities = args.quantities.split(",")
        spec = SweepSpec(args.family, (start, stop, int(count)), p_values, quantities)
    except ValueError as exc:
        print(f"nscost sweep: {exc}", file=sys.stderr)
        return EXIT_USAGE
    cfg = _solver_config(args)
    run_sweep(spec, args.out, jobs=args.jobs, config=cfg)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _solver_config(args)
    summary = run_verification(args.seed, args.cases, cfg)
    for line in summary.lines():
        print(line)
    return EXIT_OK if summary.all_passed else EXIT_VERIFY


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on usage errors; the CLI contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="nscost",
        description=(
            "Bidirectional classical communication costs of bipartite quantum "
            "channels under non-signalling assistance."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def _solver_args(p):
        p.add_argument("--tol-gap", type=float, default=None, help="solver gap tolerance")
        p.add_argument("--max-iters", type=int, default=None, help="solver iteration cap")
        p.add_argument("--backend", choices=["native", "cvxopt", "scs", "auto"], default=None)

    p_cost = sub.add_parser("cost", parents=[], help="compute one cost quantity")
    _add_channel_args(p_cost)
    p_cost.add_argument("--quantity", choices=sorted(QUANTITIES), default="one-shot")
    p_cost.add_argument("--eps", type=float, default=0.0, help="smoothing radius for smooth-dmax")
    _solver_args(p_cost)
    p_cost.set_defaults(fn=cmd_cost)

    p_sim = sub.add_parser("simerr", help="minimum simulation error from m classical messages")
    _add_channel_args(p_sim)
    p_sim.add_argument("--m-messages", dest="m_messages", type=int, required=True,
                       metavar="M", help="message count of the classical resource")
    _solver_args(p_sim)
    p_sim.set_defaults(fn=cmd_simerr)

    p_sweep = sub.add_parser("sweep", help="reproduce the experiment sweeps as CSV")
    p_sweep.add_argument("--family", choices=["swap_alpha", "partial_swap"], required=True)
    p_sweep.add_argument("--grid", default="0,1,21", help="start,stop,count for the parameter")
    p_sweep.add_argument("--p", default="0,0.2,0.4", help="comma-separated noise levels")
    p_sweep.add_argument("--quantities", default="one_shot_cost,lower_bound")
    p_sweep.add_argument("--out", required=True, help="output CSV path")
    p_sweep.add_argument("--jobs", type=int, default=None, help="worker pool size")
    _solver_args(p_sweep)
    p_sweep.set_defaults(fn=cmd_sweep)

    p_ver = sub.add_parser("verify", help="run the seeded invariant suite")
    p_ver.add_argument("--seed", type=int, default=7)
    p_ver.add_argument("--cases", type=int, default=20)
    _solver_args(p_ver)
    p_ver.set_defaults(fn=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ChannelSpecError as exc:
        print(f"nscost: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"nscost: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverError, costs.DualMismatchError) as exc:
        print(f"nscost: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
