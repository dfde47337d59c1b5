"""Seeded verification suite over the library's mathematical invariants.

Each check draws a fresh deterministic corpus from the given seed, scales its
case count by the requested number of cases, and reports pass/fail with a
short diagnostic.  ``n_cases = 0`` runs every check vacuously.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import channels as chn
from . import costs
from .channels import BipartiteChannel
from .solver import SolverConfig

#: Tolerances pinned by the library's contracts.
TOL_NS_CLOSURE = 1e-8
TOL_ADDITIVITY = 1e-5
TOL_SUBADDITIVITY = 1e-5
TOL_DUALITY = 1e-6
TOL_SANDWICH = 1e-5
TOL_P2P_RAW = 1e-5
TOL_ONEWAY = 1e-6
TOL_MONOTONE = 1e-7


@dataclass
class CheckResult:
    name: str
    passed: bool
    cases: int
    detail: str = ""

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"[{mark}] {self.name}: {self.cases} cases{extra}"


@dataclass
class VerificationSummary:
    results: list[CheckResult] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)

    def lines(self) -> list[str]:
        out = [r.line() for r in self.results]
        n_fail = sum(not r.passed for r in self.results)
        out.append(
            f"{len(self.results)} checks, {n_fail} failed"
            if n_fail
            else f"{len(self.results)} checks, all passed"
        )
        return out


def _scale(base: int, n_cases: int, reference: int = 20) -> int:
    """Scale a check's base case count by n_cases relative to the default corpus size."""
    return max(0, math.ceil(base * n_cases / reference))


def build_corpus(seed: int, count: int) -> list[tuple[str, BipartiteChannel]]:
    """Deterministic mixed corpus: noisy unitaries, NS, generic, classical, p2p."""
    rng = np.random.default_rng(seed)
    corpus: list[tuple[str, BipartiteChannel]] = []
    makers = [
        lambda r: ("swap_alpha", chn.noisy_swap_alpha(float(r.uniform(0, 1)), float(r.uniform(0, 0.6)))),
        lambda r: ("partial_swap", chn.noisy_partial_swap(float(r.uniform(0, 1)), float(r.uniform(0, 0.6)))),
        lambda r: ("random_ns", chn.random_ns_channel(int(r.integers(0, 2**31)))),
        lambda r: ("random_cptp", chn.random_channel(int(r.integers(0, 2**31)))),
        lambda r: ("classical", chn.classical_noiseless_choi(int(r.integers(2, 4)))),
        lambda r: ("p2p", chn.random_p2p_channel(int(r.integers(0, 2**31)))),
    ]
    for i in range(count):
        label, ch = makers[i % len(makers)](rng)
        corpus.append((f"{label}-{i}", ch))
    return corpus


# ------------------------------------------------------------------ individual checks


def check_ns_composition(seed: int, n_cases: int) -> CheckResult:
    """Composition of non-signalling channels stays non-signalling."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    ok = True
    for _ in range(n_cases):
        a = chn.random_ns_channel(int(rng.integers(0, 2**31)))
        b = chn.random_ns_channel(int(rng.integers(0, 2**31)))
        comp = chn.compose(a, b)
        flags = chn.ns_flags(comp, TOL_NS_CLOSURE)
        ok &= flags.both
    return CheckResult("ns-composition-closure", ok, n_cases,
                       f"tol {TOL_NS_CLOSURE:g}")


def check_cptp_validation(seed: int, n_cases: int) -> CheckResult:
    """Perturbed Choi matrices must be rejected by channel construction."""
    rng = np.random.default_rng(seed)
    ok = True
    for _ in range(n_cases):
        ch = chn.random_ns_channel(int(rng.integers(0, 2**31)))
        bad = np.array(ch.choi.mat)
        bad[0, 0] += 1e-3  # breaks trace preservation
        try:
            chn.BipartiteChannel.from_matrix(bad, ch.dims)
            ok = False
        except ValueError:
            pass
    return CheckResult("cptp-validation-rejects", ok, n_cases)


def check_hmin_additivity(seed: int, n_pairs: int,
                          config: SolverConfig | None = None) -> CheckResult:
    """Conditional min-entropy is additive under tensor products (both directions)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_pairs):
        a = chn.random_channel(int(rng.integers(0, 2**31)))
        b = chn.random_channel(int(rng.integers(0, 2**31)))
        prod = chn.tensor_channels(a, b)
        for direction in ("A|B", "B|A"):
            ha = costs.hmin_bipartite(a, direction, config, cross_check=False).value_bits
            hb = costs.hmin_bipartite(b, direction, config, cross_check=False).value_bits
            hp = costs.hmin_bipartite(prod, direction, config, cross_check=False).value_bits
            worst = max(worst, abs(hp - ha - hb))
    return CheckResult("hmin-additivity", worst <= TOL_ADDITIVITY, n_pairs,
                       f"worst gap {worst:.2e} bits")


DMAX_PAIR_DIMS = [
    ((2, 2, 1, 1), (1, 1, 2, 2)),
    ((2, 1, 1, 2), (1, 2, 2, 1)),
    ((2, 1, 1, 2), (2, 1, 1, 2)),
    ((2, 2, 2, 2), (2, 1, 1, 2)),
    ((2, 1, 2, 1), (1, 2, 1, 2)),
]


def check_dmax_subadditivity(seed: int, n_pairs: int,
                             config: SolverConfig | None = None) -> CheckResult:
    """dmax(ch1 (x) ch2) <= dmax(ch1) + dmax(ch2), on small-dimension pairs."""
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for i in range(n_pairs):
        dims_a, dims_b = DMAX_PAIR_DIMS[i % len(DMAX_PAIR_DIMS)]
        a = chn.random_channel(int(rng.integers(0, 2**31)), dims_a)
        b = chn.random_channel(int(rng.integers(0, 2**31)), dims_b)
        prod = chn.tensor_channels(a, b)
        da = costs.dmax_bidirectional(a, config, cross_check=False).value_bits
        db = costs.dmax_bidirectional(b, config, cross_check=False).value_bits
        dp = costs.dmax_bidirectional(prod, config, cross_check=False).value_bits
        worst = max(worst, dp - da - db)
    return CheckResult("dmax-subadditivity", n_pairs == 0 or worst <= TOL_SUBADDITIVITY,
                       n_pairs, f"worst excess {worst:.2e} bits")


def check_duality(seed: int, n_channels: int,
                  config: SolverConfig | None = None) -> CheckResult:
    """Primal/dual agreement of dmax and both conditional min-entropies."""
    worst = 0.0
    ok = True
    for label, ch in build_corpus(seed, n_channels):
        try:
            r = costs.dmax_bidirectional(ch, config)
            worst = max(worst, abs(r.value_bits - r.extra["dual_value_bits"]))
            for direction in ("A|B", "B|A"):
                h = costs.hmin_bipartite(ch, direction, config)
                worst = max(worst, abs(h.value_bits - h.extra["dual_value_bits"]))
        except costs.DualMismatchError:
            ok = False
    return CheckResult("strong-duality", ok and worst <= TOL_DUALITY, n_channels,
                       f"worst gap {worst:.2e} bits")


def check_p2p_reduction(seed: int, n_channels: int,
                        config: SolverConfig | None = None) -> CheckResult:
    """Bipartite exact cost of embedded point-to-point channels matches the reduced SDP."""
    rng = np.random.default_rng(seed)
    worst_raw = 0.0
    ok = True
    for _ in range(n_channels):
        ch = chn.random_p2p_channel(int(rng.integers(0, 2**31)))
        full = costs.one_shot_exact_cost(ch, config)
        red = costs.p2p_exact_cost(ch, config)
        ok &= full.value_bits == red.value_bits
        worst_raw = max(worst_raw, abs(full.raw_scalar - red.raw_scalar))
    return CheckResult("p2p-reduction", ok and worst_raw <= TOL_P2P_RAW, n_channels,
                       f"worst raw gap {worst_raw:.2e}")


def check_sandwich(seed: int, n_channels: int,
                   config: SolverConfig | None = None) -> CheckResult:
    """-min Hmin <= dmax <= log2(raw message count), per corpus channel."""
    worst = -np.inf
    for label, ch in build_corpus(seed, n_channels):
        lb = costs.asymptotic_lower_bound(ch, config).raw_scalar
        dm = costs.dmax_bidirectional(ch, config, cross_check=False).value_bits
        oc = costs.one_shot_exact_cost(ch, config)
        upper = math.log2(max(oc.raw_scalar, 1.0))
        worst = max(worst, lb - dm, dm - upper)
    return CheckResult("sandwich-chain", n_channels == 0 or worst <= TOL_SANDWICH,
                       n_channels, f"worst violation {worst:.2e} bits")


def check_oneway_inclusion(seed: int, n_channels: int,
                           config: SolverConfig | None = None) -> CheckResult:
    """One-way dmax never exceeds the bidirectional value."""
    worst = -np.inf
    for label, ch in build_corpus(seed + 1, n_channels):
        one = costs.dmax_oneway(ch, config).value_bits
        both = costs.dmax_bidirectional(ch, config, cross_check=False).value_bits
        worst = max(worst, one - both)
    return CheckResult("oneway-inclusion", n_channels == 0 or worst <= TOL_ONEWAY,
                       n_channels, f"worst excess {worst:.2e} bits")


def check_simerr_monotonicity(seed: int, n_channels: int,
                              config: SolverConfig | None = None) -> CheckResult:
    """Simulation error is nonincreasing in the message count m."""
    rng = np.random.default_rng(seed + 2)
    worst = -np.inf
    for _ in range(n_channels):
        alpha = float(rng.uniform(0.3, 1.0))
        ch = chn.noisy_swap_alpha(alpha, float(rng.uniform(0.0, 0.3)))
        errs = [costs.min_sim_error(m, ch, config).raw_scalar for m in (1, 2, 3, 4)]
        for lo, hi in zip(errs[1:], errs[:-1]):
            worst = max(worst, lo - hi)
    return CheckResult("simerr-monotone-in-m", n_channels == 0 or worst <= TOL_MONOTONE,
                       n_channels, f"worst increase {worst:.2e}")


# ------------------------------------------------------------------ runner


def run_verification(seed: int = 7, n_cases: int = 20,
                     config: SolverConfig | None = None) -> VerificationSummary:
    """Run the full invariant suite, scaled to ``n_cases`` corpus channels."""
    summary = VerificationSummary()
    summary.results.append(check_ns_composition(seed, _scale(200, n_cases)))
    summary.results.append(check_cptp_validation(seed, _scale(10, n_cases)))
    summary.results.append(check_duality(seed, n_cases, config))
    summary.results.append(check_hmin_additivity(seed, _scale(20, n_cases), config))
    summary.results.append(check_dmax_subadditivity(seed, _scale(10, n_cases), config))
    summary.results.append(check_p2p_reduction(seed, _scale(10, n_cases), config))
    summary.results.append(check_sandwich(seed, _scale(8, n_cases), config))
    summary.results.append(check_oneway_inclusion(seed, _scale(6, n_cases), config))
    summary.results.append(check_simerr_monotonicity(seed, _scale(2, n_cases), config))
    return summary
