import math

import numpy as np
import pytest

from nscost import channels as chn
from nscost import costs, programs
from nscost.solver import SolverConfig, solve


def test_dmax_bidirectional_examples(swap):
    ns = chn.random_ns_channel(11)
    assert abs(costs.dmax_bidirectional(ns).value_bits) < 1e-6
    for m in (2, 4):
        ch = chn.classical_noiseless_choi(m)
        r = costs.dmax_bidirectional(ch, cross_check=(m < 4))
        assert abs(r.value_bits - math.log2(m)) < 1e-5
    repl = chn.depolarize_global(swap, 1.0)
    assert abs(costs.dmax_bidirectional(repl).value_bits) < 1e-6


def test_dmax_oneway_examples():
    ns = chn.random_ns_channel(12)
    assert abs(costs.dmax_oneway(ns).value_bits) < 1e-6
    ups2 = chn.classical_noiseless_choi(2)
    one = costs.dmax_oneway(ups2).value_bits
    both = costs.dmax_bidirectional(ups2).value_bits
    assert one <= both + 1e-6
    # a point-to-point classical channel signals from A to B, so the one-way
    # distance is positive; its fully-depolarized version is one-way NS
    p2p_classical = chn.embed_point_to_point(np.diag([1.0, 0, 0, 1.0]), 2, 2)
    assert not chn.is_ns_a_to_b(p2p_classical)
    assert costs.dmax_oneway(p2p_classical).value_bits > 0.5
    repl = chn.depolarize_global(p2p_classical, 1.0)
    assert chn.is_ns_a_to_b(repl)
    assert abs(costs.dmax_oneway(repl).value_bits) < 1e-6


def test_robustness_examples():
    assert abs(costs.robustness(chn.random_ns_channel(13)).raw_scalar) < 1e-6
    assert abs(costs.robustness(chn.classical_noiseless_choi(2)).raw_scalar - 1.0) < 1e-5
    assert abs(costs.robustness(chn.classical_noiseless_choi(4)).raw_scalar - 3.0) < 1e-4


def test_smooth_dmax_examples(swap):
    base = costs.dmax_bidirectional(swap, cross_check=False).value_bits
    assert abs(costs.smooth_dmax(swap, 0.0).value_bits - base) < 1e-5
    assert abs(costs.smooth_dmax(swap, 1.0).value_bits) < 1e-5
    noisy = chn.noisy_swap_alpha(1.0, 0.2)
    se = costs.smooth_dmax(noisy, 0.1).value_bits
    assert se <= costs.dmax_bidirectional(noisy, cross_check=False).value_bits + 1e-6


def test_hmin_examples(identity_p2p):
    for m in (2, 3):
        ch = chn.classical_noiseless_choi(m)
        r = costs.hmin_bipartite(ch, "A|B")
        assert abs(r.value_bits + math.log2(m)) < 1e-5
        r = costs.hmin_bipartite(ch, "B|A")
        assert abs(r.value_bits + math.log2(m)) < 1e-5
    r = costs.hmin_bipartite(identity_p2p, "A|B")
    assert abs(r.value_bits + 2.0) < 1e-5


def test_hmin_additivity_spot_check():
    a = chn.random_channel(41)
    b = chn.random_channel(42)
    prod = chn.tensor_channels(a, b)
    for direction in ("A|B", "B|A"):
        ha = costs.hmin_bipartite(a, direction, cross_check=False).value_bits
        hb = costs.hmin_bipartite(b, direction, cross_check=False).value_bits
        hp = costs.hmin_bipartite(prod, direction, cross_check=False).value_bits
        assert abs(hp - ha - hb) < 1e-5


def test_asymptotic_lower_bound_examples(swap):
    r = costs.asymptotic_lower_bound(swap)
    assert abs(r.value_bits - 2.0) < 1e-5
    ns = chn.random_ns_channel(14)
    rns = costs.asymptotic_lower_bound(ns)
    assert rns.value_bits == 0.0  # clamped
    assert rns.raw_scalar <= 1e-6  # raw value retained (may be negative)
    noisy = chn.noisy_swap_alpha(1.0, 0.4)
    oc = costs.one_shot_exact_cost(noisy)
    lb = costs.asymptotic_lower_bound(noisy)
    assert abs(math.log2(oc.raw_scalar) - lb.raw_scalar) < 1e-3


def test_min_sim_error_examples(swap):
    assert costs.min_sim_error(4, swap).raw_scalar <= 1e-6
    assert costs.min_sim_error(1, swap).raw_scalar > 1e-3
    ns = chn.random_ns_channel(15)
    for m in (1, 2):
        assert costs.min_sim_error(m, ns).raw_scalar <= 1e-6


def test_min_sim_error_monotone_in_m():
    ch = chn.noisy_swap_alpha(0.85, 0.1)
    errs = [costs.min_sim_error(m, ch).raw_scalar for m in (1, 2, 3, 4)]
    for lo, hi in zip(errs[1:], errs[:-1]):
        assert lo <= hi + 1e-7


def test_one_shot_exact_cost_examples(swap):
    r = costs.one_shot_exact_cost(swap)
    assert r.value_bits == 2.0
    assert abs(r.raw_scalar - 4.0) < 1e-4
    noisy = chn.noisy_swap_alpha(1.0, 0.4)
    rn = costs.one_shot_exact_cost(noisy)
    assert math.log2(rn.raw_scalar) < math.log2(3.0)
    ns = chn.random_ns_channel(16)
    rns = costs.one_shot_exact_cost(ns)
    assert rns.value_bits == 0.0 and rns.raw_scalar <= 1.0 + 1e-6


def test_sandwich_chain(swap):
    for ch in (swap, chn.noisy_swap_alpha(0.7, 0.2), chn.random_channel(8)):
        lb = costs.asymptotic_lower_bound(ch).raw_scalar
        dm = costs.dmax_bidirectional(ch, cross_check=False).value_bits
        oc = costs.one_shot_exact_cost(ch)
        assert lb <= dm + 1e-5
        assert dm <= math.log2(max(oc.raw_scalar, 1.0)) + 1e-5


def test_p2p_exact_cost_examples(identity_p2p):
    r = costs.p2p_exact_cost(identity_p2p)
    assert r.value_bits == 2.0
    repl = chn.depolarize_global(identity_p2p, 1.0)
    assert costs.p2p_exact_cost(repl).value_bits == 0.0
    with pytest.raises(ValueError):
        costs.p2p_exact_cost(chn.swap_channel())


def test_p2p_reduction_matches_bipartite_program():
    for seed in (1, 2, 3):
        ch = chn.random_p2p_channel(seed)
        full = costs.one_shot_exact_cost(ch)
        red = costs.p2p_exact_cost(ch)
        assert full.value_bits == red.value_bits
        assert abs(full.raw_scalar - red.raw_scalar) < 1e-5


def test_general_sim_error_small_instances(identity_p2p):
    ups2 = chn.classical_noiseless_choi(2)
    r = costs.general_sim_error(ups2, identity_p2p)
    ms = costs.min_sim_error(2, identity_p2p)
    assert abs(r.raw_scalar - ms.raw_scalar) < 1e-5
    ns = chn.random_ns_channel(5, (2, 2, 1, 1))
    assert costs.general_sim_error(ns, ns).raw_scalar < 1e-6


@pytest.mark.slow
def test_general_sim_error_full_scale_swap(swap):
    # full eight-qubit instance through the sparse backend
    ups2 = chn.classical_noiseless_choi(2)
    cfg = SolverConfig(backend="scs", tol_gap=1e-7)
    r = costs.general_sim_error(ups2, swap, cfg)
    ms = costs.min_sim_error(2, swap)
    assert abs(r.raw_scalar - ms.raw_scalar) < 1e-5
    assert abs(r.raw_scalar - 0.5) < 1e-5


@pytest.mark.slow
def test_general_sim_error_output_ns_property(swap):
    # the optimal simulator, linked with any non-signalling channel of the
    # source's dimensions, must produce a non-signalling channel
    ups2 = chn.classical_noiseless_choi(2)
    prob = programs.build_ns_superchannel_sim(ups2, swap)
    rep = solve(prob, SolverConfig(backend="scs", tol_gap=1e-8)).require_ok()
    jt = rep.primal_solution["JT"]
    lay = programs.theta_layout(ups2, swap)
    for seed in (1, 2):
        ns = chn.random_ns_channel(seed)
        out = programs.output_choi_map(ns, lay).apply(jt)
        out = (out + out.conj().T) / 2.0
        ch = chn.BipartiteChannel.from_matrix(out, (2, 2, 2, 2))
        flags = chn.ns_flags(ch, 1e-6)
        assert flags.a_to_b and flags.b_to_a


def test_dual_mismatch_guard(monkeypatch):
    # tampering with the dual program must trip the cross-check
    ch = chn.classical_noiseless_choi(2)
    real_build = programs.build_dmax_bidirectional_dual

    def sabotaged(c):
        p = real_build(c)
        p.objective["M"] = p.objective["M"] * 0.5
        return p

    monkeypatch.setattr(programs, "build_dmax_bidirectional_dual", sabotaged)
    with pytest.raises(costs.DualMismatchError):
        costs.dmax_bidirectional(ch)


def test_cost_report_describe(swap):
    r = costs.one_shot_exact_cost(swap)
    assert "2.000000 bits" in r.describe()
    e = costs.min_sim_error(4, swap)
    assert e.value_bits is None and "error" in e.describe()
