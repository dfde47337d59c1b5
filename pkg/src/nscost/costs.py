"""User-facing communication-cost quantities computer from the compiled SDPs.

All public values are reported in bits (base-2 logarithms); raw SDP scalars
(scale factors, message counts, error probabilities) are retained on the
report for ceilings and cross-checks.  Error-valued quantities (simulation
errors in [0, 1]) carry ``value_bits = None`` and live in ``raw_scalar``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import programs
from .channels import BipartiteChannel, ns_flags
from .solver import SolveReport, SolverConfig, solve

#: Slack subtracted before applying the message-count ceiling, guarding
#: against solver overshoot at integer optima.
CEILING_SLACK = 1e-6

#: Agreement required between a primal value and its independently solved dual.
DUAL_GAP_BITS = 1e-6


@dataclass
class CostReport:
    """One computed quantity: bit value, raw SDP scalar, and its certificate."""

    quantity: str
    value_bits: float | None
    raw_scalar: float
    channel: str
    params: dict = field(default_factory=dict)
    report: SolveReport | None = None
    extra: dict = field(default_factory=dict)

    def describe(self) -> str:
        if self.value_bits is None:
            return f"{self.quantity}: error {self.raw_scalar:.6f}"
        return f"{self.quantity}: {self.value_bits:.6f} bits"


def _log2(value: float) -> float:
    return math.log2(max(value, 1e-300))


def _desc(ch: BipartiteChannel) -> str:
    return f"bipartite-channel{ch.dims}"


def _solve(problem, config):
    return solve(problem, config).require_ok()


class DualMismatchError(ArithmeticError):
    """Primal and dual SDPs disagreed beyond the allowed gap."""


# ------------------------------------------------------------------ entropic measures


def dmax_bidirectional(
    ch: BipartiteChannel,
    config: SolverConfig | None = None,
    *,
    cross_check: bool = True,
) -> CostReport:
    """Max-relative-entropy distance (bits) from the channel to the NS set.

    Solves the primal scale-minimization SDP and, unless disabled, the
    independently compiled dual; the two must agree within ``DUAL_GAP_BITS``.
    """
    rep = _solve(programs.build_dmax_bidirectional(ch), config)
    bits = _log2(rep.primal_value)
    extra = {}
    if cross_check:
        drep = _solve(programs.build_dmax_bidirectional_dual(ch), config)
        dual_bits = _log2(-drep.primal_value)
        extra["dual_value_bits"] = dual_bits
        if abs(dual_bits - bits) > DUAL_GAP_BITS:
            raise DualMismatchError(
                f"dmax primal {bits:.9f} and dual {dual_bits:.9f} bits differ"
            )
    return CostReport("dmax-bidirectional", bits, rep.primal_value, _desc(ch),
                      report=rep, extra=extra)


def dmax_oneway(ch: BipartiteChannel, config: SolverConfig | None = None) -> CostReport:
    """Max-relative-entropy distance (bits) to the one-way (A to B) NS set.

    Never exceeds the bidirectional value: the one-way set is larger, so the
    minimized divergence is smaller.
    """
    rep = _solve(programs.build_dmax_oneway(ch), config)
    return CostReport("dmax-oneway", _log2(rep.primal_value), rep.primal_value,
                      _desc(ch), report=rep)


def robustness(ch: BipartiteChannel, config: SolverConfig | None = None) -> CostReport:
    """Minimal mixing weight making the channel non-signalling: 2^dmax - 1."""
    base = dmax_bidirectional(ch, config, cross_check=False)
    value = base.raw_scalar - 1.0
    return CostReport("ns-robustness", None, value, _desc(ch), report=base.report,
                      extra={"dmax_bits": base.value_bits})


def smooth_dmax(ch: BipartiteChannel, eps: float,
                config: SolverConfig | None = None) -> CostReport:
    """Smoothed variant: best dmax among channels within half diamond distance eps."""
    rep = _solve(programs.build_smooth_dmax(ch, eps), config)
    return CostReport("smooth-dmax", _log2(rep.primal_value), rep.primal_value,
                      _desc(ch), params={"eps": eps}, report=rep)


def hmin_bipartite(
    ch: BipartiteChannel,
    direction: str,
    config: SolverConfig | None = None,
    *,
    cross_check: bool = True,
) -> CostReport:
    """Bipartite conditional min-entropy (bits): -log2 of the domination scale."""
    rep = _solve(programs.build_hmin(ch, direction), config)
    bits = -_log2(rep.primal_value)
    extra = {}
    if cross_check:
        drep = _solve(programs.build_hmin_dual(ch, direction), config)
        dual_bits = -_log2(-drep.primal_value)
        extra["dual_value_bits"] = dual_bits
        if abs(dual_bits - bits) > DUAL_GAP_BITS:
            raise DualMismatchError(
                f"hmin({direction}) primal {bits:.9f} and dual {dual_bits:.9f} bits differ"
            )
    return CostReport(f"hmin-{direction}", bits, rep.primal_value, _desc(ch),
                      params={"direction": direction}, report=rep, extra=extra)


def asymptotic_lower_bound(
    ch: BipartiteChannel,
    config: SolverConfig | None = None,
    *,
    cross_check: bool = False,
) -> CostReport:
    """Lower bound (bits) on the asymptotic exact simulation cost.

    Equals minus the smaller of the two conditional min-entropies, clamped to
    zero in the headline value (cost cannot be negative); the raw bound is
    kept unclamped for tightness comparisons.
    """
    h_ab = hmin_bipartite(ch, "A|B", config, cross_check=cross_check)
    h_ba = hmin_bipartite(ch, "B|A", config, cross_check=cross_check)
    raw = -min(h_ab.value_bits, h_ba.value_bits)
    return CostReport(
        "asymptotic-lower-bound", max(raw, 0.0), raw, _desc(ch),
        extra={"hmin_ab_bits": h_ab.value_bits, "hmin_ba_bits": h_ba.value_bits},
    )


# ------------------------------------------------------------------ simulation costs


def min_sim_error(m: float, ch: BipartiteChannel,
                  config: SolverConfig | None = None) -> CostReport:
    """Minimum simulation error in [0, 1] from the m-message classical resource."""
    rep = _solve(programs.build_min_sim_error(m, ch), config)
    err = min(max(rep.primal_value, 0.0), 1.0)
    return CostReport("min-sim-error", None, err, _desc(ch), params={"m": m}, report=rep)


def one_shot_exact_cost(ch: BipartiteChannel,
                        config: SolverConfig | None = None) -> CostReport:
    """Exact one-shot simulation cost in bits: log2 of the message-count ceiling.

    Non-signalling channels are special-cased to exactly zero (the SDP optimum
    is 1 message), avoiding 1.0000001 -> 2-message ceiling artifacts.
    """
    if ns_flags(ch).both:
        return CostReport("one-shot-exact-cost", 0.0, 1.0, _desc(ch),
                          extra={"analytic": "non-signalling channel"})
    rep = _solve(programs.build_exact_cost(ch), config)
    m_raw = rep.primal_value
    messages = max(1, math.ceil(m_raw - CEILING_SLACK))
    return CostReport("one-shot-exact-cost", _log2(messages), m_raw, _desc(ch),
                      report=rep, extra={"messages": messages,
                                         "raw_bits": _log2(max(m_raw, 1.0))})


def p2p_exact_cost(ch: BipartiteChannel,
                   config: SolverConfig | None = None) -> CostReport:
    """Point-to-point exact cost via the reduced trace-minimization SDP."""
    rep = _solve(programs.build_p2p_cost(ch), config)
    raw = rep.primal_value
    messages = max(1, math.ceil(raw - CEILING_SLACK))
    return CostReport("p2p-exact-cost", _log2(messages), raw, _desc(ch),
                      report=rep, extra={"messages": messages})


def general_sim_error(source: BipartiteChannel, target: BipartiteChannel,
                      config: SolverConfig | None = None) -> CostReport:
    """Minimum simulation error from an arbitrary source channel (unsymmetrized).

    Compiles the full eight-system superchannel program; instances beyond the
    native dense solver's envelope are routed to the sparse 'scs' backend by
    the default auto backend selection.
    """
    if config is None:
        config = SolverConfig.from_env(backend="auto")
    rep = _solve(programs.build_ns_superchannel_sim(source, target), config)
    err = min(max(rep.primal_value, 0.0), 1.0)
    return CostReport(
        "general-sim-error", None, err,
        f"{_desc(source)} -> {_desc(target)}", report=rep,
    )
