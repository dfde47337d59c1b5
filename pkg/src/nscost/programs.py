"""Compilers from channels to conic problems.

Each ``build_*`` function returns a :class:`~nscost.conic.ConicProblem` whose
optimal value is the quantity named in its docstring.  All problems minimize;
programs that are naturally maximizations are compiled with a negated
objective and the caller negates the reported value back.
"""

from __future__ import annotations

import numpy as np

from .channels import CHOI_LABELS, BipartiteChannel
from .conic import (
    ConicProblem,
    MatrixExpr,
    PartialTraceMap,
    TensorConstMap,
    WeightedTraceMap,
    const_expr,
    constrain_marginal_equals,
    scalar_times,
    var_expr,
)
from .tensors import HermitianOperator, SystemLayout


def _pi(layout: SystemLayout) -> HermitianOperator:
    return HermitianOperator.maximally_mixed(layout)


def _uniform_marginal_eq(problem, var, traced, pi_labels):
    """Equality  tr_traced(var) = pi_{pi_labels} (x) tr_{traced + pi_labels}(var).

    This is the non-signalling marginal pattern shared by every program here:
    the marginal must be uniform on ``pi_labels``.
    """
    layout = var.layout
    lhs_layout = layout.drop(traced)
    inner = var_expr(var).map(
        PartialTraceMap(layout, tuple(traced) + tuple(pi_labels)),
        layout.drop(tuple(traced) + tuple(pi_labels)),
    )
    rhs = inner.map(
        TensorConstMap(_pi(layout.subset(pi_labels)), inner.layout, lhs_layout.labels),
        lhs_layout,
    )
    constrain_marginal_equals(problem, var, traced, rhs)


# ------------------------------------------------------------------ max-relative entropy


def _build_dmax(ch: BipartiteChannel, *, both_directions: bool, name: str) -> ConicProblem:
    lay = ch.layout
    p = ConicProblem(name)
    lam = p.add_scalar("lam")
    y = p.add_hermitian("Y", lay)
    p.minimize(lam=1.0)
    p.require_psd(var_expr(y) - const_expr(ch.choi.mat, lay))
    in_lay = lay.subset(("A0", "B0"))
    constrain_marginal_equals(
        p, y, ("A1", "B1"), scalar_times(lam, np.eye(in_lay.dim), in_lay)
    )
    _uniform_marginal_eq(p, y, ("A1",), ("A0",))
    if both_directions:
        _uniform_marginal_eq(p, y, ("B1",), ("B0",))
    return p


def build_dmax_bidirectional(ch: BipartiteChannel) -> ConicProblem:
    """Smallest lambda with J <= Y for Y = lambda * (an NS-channel Choi).

    The optimal value is 2 to the power of the max-relative-entropy distance
    (in bits) from the channel to the non-signalling set.
    """
    return _build_dmax(ch, both_directions=True, name="dmax-bidirectional")


def build_dmax_oneway(ch: BipartiteChannel) -> ConicProblem:
    """Same as bidirectional but over channels that only forbid A -> B signalling."""
    return _build_dmax(ch, both_directions=False, name="dmax-oneway")


def build_dmax_bidirectional_dual(ch: BipartiteChannel) -> ConicProblem:
    """Lagrange dual of :func:`build_dmax_bidirectional` (a maximization).

    max tr[M J] over M >= 0, tr N = 1, tr_A0 P = 0, tr_B0 Q = 0 and
    M <= N (x) 1_{A1 B1} + P (x) 1_{A1} + Q (x) 1_{B1}.  Compiled with the
    objective -tr[M J]; negate the solved value.
    """
    lay = ch.layout
    p = ConicProblem("dmax-bidirectional-dual")
    m = p.add_hermitian("M", lay)
    lay_n = lay.subset(("A0", "B0"))
    lay_p = lay.subset(("A0", "B0", "B1"))
    lay_q = lay.subset(("A0", "A1", "B0"))
    n = p.add_hermitian("N", lay_n)
    pp = p.add_hermitian("P", lay_p)
    qq = p.add_hermitian("Q", lay_q)
    p.minimize(M=-ch.choi.mat)
    constrain_marginal_equals(p, n, ("A0", "B0"), const_expr(np.array([[1.0]])))
    constrain_marginal_equals(p, pp, ("A0",), const_expr(np.zeros((lay.subset(("B0", "B1")).dim,) * 2)))
    constrain_marginal_equals(p, qq, ("B0",), const_expr(np.zeros((lay.subset(("A0", "A1")).dim,) * 2)))
    p.require_psd(var_expr(m))
    lifted_n = var_expr(n).map(
        TensorConstMap(
            HermitianOperator.identity(lay.subset(("A1", "B1"))), lay_n, CHOI_LABELS
        ),
        lay,
    )
    lifted_p = var_expr(pp).map(
        TensorConstMap(HermitianOperator.identity(lay.subset(("A1",))), lay_p, CHOI_LABELS),
        lay,
    )
    lifted_q = var_expr(qq).map(
        TensorConstMap(HermitianOperator.identity(lay.subset(("B1",))), lay_q, CHOI_LABELS),
        lay,
    )
    p.require_psd(lifted_n + lifted_p + lifted_q - var_expr(m))
    return p


def build_smooth_dmax(ch: BipartiteChannel, eps: float) -> ConicProblem:
    """Joint SDP minimizing the dmax scale over channels within diamond distance eps.

    Variables: a Choi JM with CPTP equalities, a diamond-norm epigraph block
    keeping JM within half-diamond-distance eps of the given channel, and the
    dominating-operator blocks of dmax applied to JM.
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"smoothing radius must lie in [0, 1], got {eps}")
    lay = ch.layout
    p = ConicProblem("smooth-dmax")
    jm = p.add_hermitian("JM", lay)
    yd = p.add_hermitian("Yd", lay)
    lam = p.add_scalar("lam")
    y = p.add_hermitian("Y", lay)
    p.minimize(lam=1.0)
    in_lay = lay.subset(("A0", "B0"))
    # JM is a channel.
    p.require_psd(var_expr(jm))
    constrain_marginal_equals(p, jm, ("A1", "B1"), const_expr(np.eye(in_lay.dim), in_lay))
    # Half diamond distance between JM and the channel is at most eps.
    p.require_psd(var_expr(yd))
    p.require_psd(var_expr(yd) - var_expr(jm) + const_expr(ch.choi.mat, lay))
    tr_yd = var_expr(yd).map(PartialTraceMap(lay, ("A1", "B1")), in_lay)
    p.require_psd(const_expr(eps * np.eye(in_lay.dim), in_lay) - tr_yd)
    # dmax blocks on JM.
    p.require_psd(var_expr(y) - var_expr(jm))
    constrain_marginal_equals(p, y, ("A1", "B1"), scalar_times(lam, np.eye(in_lay.dim), in_lay))
    _uniform_marginal_eq(p, y, ("A1",), ("A0",))
    _uniform_marginal_eq(p, y, ("B1",), ("B0",))
    return p


# ------------------------------------------------------------------ conditional min-entropy


def build_hmin(ch: BipartiteChannel, direction: str) -> ConicProblem:
    """Uniform-marginal domination SDP whose -log2 value is a conditional min-entropy.

    ``direction`` "A|B": min m with X on (B0, B1), tr_B1 X = m 1_B0 and
    J_{A0 B0 B1} <= 1_{A0} (x) X.  "B|A" mirrors with X on (A0, A1).
    """
    lay = ch.layout
    p = ConicProblem(f"hmin-{direction.replace('|', '')}")
    mvar = p.add_scalar("m")
    p.minimize(m=1.0)
    if direction == "A|B":
        x_lay = lay.subset(("B0", "B1"))
        x = p.add_hermitian("X", x_lay)
        uni_lay = lay.subset(("B0",))
        constrain_marginal_equals(p, x, ("B1",), scalar_times(mvar, np.eye(uni_lay.dim), uni_lay))
        marg = ch.choi.partial_trace(("A1",))
        lifted = var_expr(x).map(
            TensorConstMap(
                HermitianOperator.identity(lay.subset(("A0",))), x_lay, marg.layout.labels
            ),
            marg.layout,
        )
        p.require_psd(lifted - const_expr(marg.mat, marg.layout))
    elif direction == "B|A":
        x_lay = lay.subset(("A0", "A1"))
        x = p.add_hermitian("X", x_lay)
        uni_lay = lay.subset(("A0",))
        constrain_marginal_equals(p, x, ("A1",), scalar_times(mvar, np.eye(uni_lay.dim), uni_lay))
        marg = ch.choi.partial_trace(("B1",))
        lifted = var_expr(x).map(
            TensorConstMap(
                HermitianOperator.identity(lay.subset(("B0",))), x_lay, marg.layout.labels
            ),
            marg.layout,
        )
        p.require_psd(lifted - const_expr(marg.mat, marg.layout))
    else:
        raise ValueError(f"direction must be 'A|B' or 'B|A', got {direction!r}")
    return p


def build_hmin_dual(ch: BipartiteChannel, direction: str) -> ConicProblem:
    """Dual of :func:`build_hmin` (a maximization; negate the solved value).

    "A|B": max tr[M J_{A0 B0 B1}] over M >= 0, tr N = 1 and
    N (x) 1_{B1} >= tr_{A0} M.
    """
    lay = ch.layout
    p = ConicProblem(f"hmin-{direction.replace('|', '')}-dual")
    if direction == "A|B":
        marg = ch.choi.partial_trace(("A1",))
        n_lay = lay.subset(("B0",))
        red_lay = lay.subset(("B0", "B1"))
        traced = ("A0",)
        lift_lay = lay.subset(("B1",))
    elif direction == "B|A":
        marg = ch.choi.partial_trace(("B1",))
        n_lay = lay.subset(("A0",))
        red_lay = lay.subset(("A0", "A1"))
        traced = ("B0",)
        lift_lay = lay.subset(("A1",))
    else:
        raise ValueError(f"direction must be 'A|B' or 'B|A', got {direction!r}")
    m = p.add_hermitian("M", marg.layout)
    n = p.add_hermitian("N", n_lay)
    p.minimize(M=-marg.mat)
    constrain_marginal_equals(p, n, n_lay.labels, const_expr(np.array([[1.0]])))
    p.require_psd(var_expr(m))
    lifted_n = var_expr(n).map(
        TensorConstMap(HermitianOperator.identity(lift_lay), n_lay, red_lay.labels),
        red_lay,
    )
    reduced_m = var_expr(m).map(PartialTraceMap(marg.layout, traced), red_lay)
    p.require_psd(lifted_n - reduced_m)
    return p


# ------------------------------------------------------------------ simulation programs


def build_diamond_distance(ch1: BipartiteChannel, ch2: BipartiteChannel) -> ConicProblem:
    """Half diamond-norm distance between two channels of equal dimensions."""
    if ch1.dims != ch2.dims:
        raise ValueError(f"channel dimensions differ: {ch1.dims} vs {ch2.dims}")
    lay = ch1.layout
    p = ConicProblem("diamond-distance")
    mu = p.add_scalar("mu")
    y = p.add_hermitian("Y", lay)
    p.minimize(mu=1.0)
    in_lay = lay.subset(("A0", "B0"))
    p.require_psd(var_expr(y))
    p.require_psd(var_expr(y) - const_expr(ch1.choi.mat - ch2.choi.mat, lay))
    tr_y = var_expr(y).map(PartialTraceMap(lay, ("A1", "B1")), in_lay)
    p.require_psd(scalar_times(mu, np.eye(in_lay.dim), in_lay) - tr_y)
    return p


def build_min_sim_error(m: float, ch: BipartiteChannel) -> ConicProblem:
    """Minimum diamond-norm error for simulating the channel from the m-message
    bidirectional classical noiseless resource under non-signalling superchannels.

    Variables mu, Y, Q, V, W, X on the channel's Choi space with the
    symmetrized constraint system; m is a fixed parameter here.
    """
    if m < 1:
        raise ValueError(f"message count must be >= 1, got {m}")
    m = float(m)
    lay = ch.layout
    in_lay = lay.subset(("A0", "B0"))
    if m == 1.0:
        # With one message the resource is trivial and the marginal equalities
        # force V = W = X = Q exactly (a PSD difference with a vanishing
        # partial trace is zero), so the coupled program has no interior.
        # Substituting collapses it to the diamond distance from the channel
        # to the non-signalling set, which is strictly feasible.
        p = ConicProblem("min-sim-error-m1")
        mu = p.add_scalar("mu")
        y = p.add_hermitian("Y", lay)
        q = p.add_hermitian("Q", lay)
        p.minimize(mu=1.0)
        tr_y = var_expr(y).map(PartialTraceMap(lay, ("A1", "B1")), in_lay)
        p.require_psd(scalar_times(mu, np.eye(in_lay.dim), in_lay) - tr_y)
        p.require_psd(var_expr(y))
        p.require_psd(var_expr(y) - var_expr(q) + const_expr(ch.choi.mat, lay))
        p.require_psd(var_expr(q))
        constrain_marginal_equals(p, q, ("A1", "B1"), const_expr(np.eye(in_lay.dim), in_lay))
        _uniform_marginal_eq(p, q, ("A1",), ("A0",))
        _uniform_marginal_eq(p, q, ("B1",), ("B0",))
        return p
    p = ConicProblem(f"min-sim-error-m{m:g}")
    mu = p.add_scalar("mu")
    y = p.add_hermitian("Y", lay)
    q = p.add_hermitian("Q", lay)
    v = p.add_hermitian("V", lay)
    w = p.add_hermitian("W", lay)
    x = p.add_hermitian("X", lay)
    p.minimize(mu=1.0)

    tr_y = var_expr(y).map(PartialTraceMap(lay, ("A1", "B1")), in_lay)
    p.require_psd(scalar_times(mu, np.eye(in_lay.dim), in_lay) - tr_y)
    p.require_psd(var_expr(y))
    p.require_psd(var_expr(y) - var_expr(q) + const_expr(ch.choi.mat, lay))
    p.require_psd(var_expr(q))
    constrain_marginal_equals(p, q, ("A1", "B1"), const_expr(np.eye(in_lay.dim), in_lay))
    p.require_psd(var_expr(v) - var_expr(q))
    p.require_psd(var_expr(w) - var_expr(q))
    p.require_psd(var_expr(x) - var_expr(q))
    _uniform_marginal_eq(p, x, ("A1",), ("A0",))
    _uniform_marginal_eq(p, x, ("B1",), ("B0",))

    def _marg(var, traced):
        return var_expr(var).map(PartialTraceMap(lay, traced), lay.drop(traced))

    p.require_eq_zero(m * _marg(q, ("A1",)) - _marg(w, ("A1",)))
    p.require_eq_zero(_marg(x, ("A1",)) - _marg(v, ("A1",)))
    p.require_eq_zero(m * _marg(q, ("B1",)) - _marg(v, ("B1",)))
    p.require_eq_zero(_marg(x, ("B1",)) - _marg(w, ("B1",)))
    return p


def build_exact_cost(ch: BipartiteChannel) -> ConicProblem:
    """Exact-simulation message count: minimize the continuous scalar m.

    The integer ceiling is applied by the caller after solving; m enters all
    constraints linearly so the continuous relaxation is exact up to that
    final ceiling.
    """
    lay = ch.layout
    p = ConicProblem("exact-cost")
    mvar = p.add_scalar("m")
    v = p.add_hermitian("V", lay)
    w = p.add_hermitian("W", lay)
    x = p.add_hermitian("X", lay)
    p.minimize(m=1.0)
    j = const_expr(ch.choi.mat, lay)
    p.require_psd(var_expr(v) - j)
    p.require_psd(var_expr(w) - j)
    p.require_psd(var_expr(x) - j)
    _uniform_marginal_eq(p, x, ("A1",), ("A0",))
    _uniform_marginal_eq(p, x, ("B1",), ("B0",))

    def _marg(var, traced):
        return var_expr(var).map(PartialTraceMap(lay, traced), lay.drop(traced))

    j_a = ch.choi.partial_trace(("A1",))
    j_b = ch.choi.partial_trace(("B1",))
    p.require_eq_zero(scalar_times(mvar, j_a.mat, j_a.layout) - _marg(w, ("A1",)))
    p.require_eq_zero(_marg(x, ("A1",)) - _marg(v, ("A1",)))
    p.require_eq_zero(scalar_times(mvar, j_b.mat, j_b.layout) - _marg(v, ("B1",)))
    p.require_eq_zero(_marg(x, ("B1",)) - _marg(w, ("B1",)))
    return p


def build_p2p_cost(ch: BipartiteChannel) -> ConicProblem:
    """Point-to-point exact-cost SDP: min tr X with J_{A0 B1} <= 1_{A0} (x) X.

    Requires trivial A1 and B0.  The ceiling of the optimal trace is the
    message count; this is the Duan-Winter form the bipartite program reduces
    to, used as an independent cross-check.
    """
    if not ch.is_point_to_point():
        raise ValueError(f"channel dims {ch.dims} are not point-to-point (need d_A1 = d_B0 = 1)")
    lay = ch.layout
    marg = ch.choi.partial_trace(("A1", "B0"))  # (A0, B1)
    x_lay = lay.subset(("B1",))
    p = ConicProblem("p2p-cost")
    x = p.add_hermitian("X", x_lay)
    p.minimize(X=np.eye(x_lay.dim))
    lifted = var_expr(x).map(
        TensorConstMap(HermitianOperator.identity(lay.subset(("A0",))), x_lay, marg.layout.labels),
        marg.layout,
    )
    p.require_psd(lifted - const_expr(marg.mat, marg.layout))
    return p


# ------------------------------------------------------------------ general superchannel simulation


#: Label order of the simulator Choi operator: target systems first (so that
#: tracing out the source systems leaves the canonical channel order), then
#: the source systems suffixed with "b".
THETA_LABELS = ("A0", "A1", "B0", "B1", "A0b", "A1b", "B0b", "B1b")
_BAR = ("A0b", "A1b", "B0b", "B1b")


def theta_layout(source: BipartiteChannel, target: BipartiteChannel) -> SystemLayout:
    ds, dt = source.dims, target.dims
    dims = {
        "A0": dt[0], "A1": dt[1], "B0": dt[2], "B1": dt[3],
        "A0b": ds[0], "A1b": ds[1], "B0b": ds[2], "B1b": ds[3],
    }
    return SystemLayout([(l, dims[l]) for l in THETA_LABELS])


def output_choi_map(source: BipartiteChannel, layout: SystemLayout) -> WeightedTraceMap:
    """Linear map sending a simulator Choi to the Choi of the simulated channel.

    Linking against the source consumes the source systems: the weight is the
    transposed source Choi on the "b"-labeled subsystems.
    """
    bar_layout = layout.subset(_BAR)
    weight = HermitianOperator(bar_layout, source.choi.mat.T)
    return WeightedTraceMap(weight, layout, _BAR)


def build_ns_superchannel_sim(source: BipartiteChannel, target: BipartiteChannel) -> ConicProblem:
    """General (unsymmetrized) simulation of ``target`` from one use of ``source``.

    The variable JT is the Choi operator of a bipartite superchannel on eight
    systems, constrained to be completely positive, trace preserving, and
    non-signalling in both directions; the objective is the half diamond-norm
    distance between the simulated output channel and the target.
    """
    lay = theta_layout(source, target)
    tgt_lay = target.layout
    p = ConicProblem("ns-superchannel-sim")
    jt = p.add_hermitian("JT", lay)
    y = p.add_hermitian("Y", tgt_lay)
    mu = p.add_scalar("mu")
    p.minimize(mu=1.0)

    # (CP)
    p.require_psd(var_expr(jt))
    # (TP): the (A0, B0, A1b, B1b) marginal is the identity.
    tp_traced = ("A1", "B1", "A0b", "B0b")
    tp_lay = lay.drop(tp_traced)
    constrain_marginal_equals(p, jt, tp_traced, const_expr(np.eye(tp_lay.dim), tp_lay))
    # (A cannot signal B): two marginal conditions.
    _uniform_marginal_eq(p, jt, ("A1", "A0b"), ("A0",))
    _uniform_marginal_eq(p, jt, ("A1",), ("A1b",))
    # (B cannot signal A): mirrored.
    _uniform_marginal_eq(p, jt, ("B1", "B0b"), ("B0",))
    _uniform_marginal_eq(p, jt, ("B1",), ("B1b",))

    # Diamond-distance epigraph between the simulated channel and the target.
    out_map = output_choi_map(source, lay)
    sim_choi = var_expr(jt).map(out_map, tgt_lay)
    p.require_psd(var_expr(y))
    p.require_psd(var_expr(y) - sim_choi + const_expr(target.choi.mat, tgt_lay))
    in_lay = tgt_lay.subset(("A0", "B0"))
    tr_y = var_expr(y).map(PartialTraceMap(tgt_lay, ("A1", "B1")), in_lay)
    p.require_psd(scalar_times(mu, np.eye(in_lay.dim), in_lay) - tr_y)
    return p


# ------------------------------------------------------------------ diagnostics


def feasibility_violations(problem: ConicProblem, assignment: dict) -> tuple[float, float]:
    """(max equality violation, most negative block eigenvalue) at a candidate point."""
    eq_dev = 0.0
    for expr in problem.eq_constraints:
        eq_dev = max(eq_dev, float(np.abs(expr.evaluate(assignment)).max()))
    min_eig = np.inf
    for expr in problem.psd_constraints:
        val = expr.evaluate(assignment)
        val = (val + val.conj().T) / 2.0
        min_eig = min(min_eig, float(np.linalg.eigvalsh(val)[0]))
    return eq_dev, min_eig
