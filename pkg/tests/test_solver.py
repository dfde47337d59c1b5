import os

import numpy as np
import pytest

from nscost import conic as co
from nscost.solver import (
    ProblemTooLargeError,
    SolveReport,
    SolverConfig,
    SolverError,
    solve,
)
from nscost.tensors import MaxEntangledVector, SystemLayout

from conftest import rand_herm


def eigmax_problem(diag=(1.0, 2.0)):
    p = co.ConicProblem("eigmax")
    t = p.add_scalar("t")
    p.minimize(t=1.0)
    p.require_psd(co.scalar_times(t, np.eye(len(diag))) - co.const_expr(np.diag(diag)))
    return p


def test_scalar_lmi_known_answer():
    rep = solve(eigmax_problem())
    assert rep.status == "optimal"
    assert abs(rep.primal_value - 2.0) < 1e-7
    assert abs(rep.primal_solution["t"] - 2.0) < 1e-7


def test_dominate_max_entangled():
    lay = SystemLayout([("A", 2), ("B", 2)])
    gamma = MaxEntangledVector(lay).projector()
    p = co.ConicProblem("dominate")
    x = p.add_hermitian("X", lay)
    p.minimize(X=np.eye(4))
    p.require_psd(co.var_expr(x) - co.const_expr(gamma.mat, lay))
    rep = solve(p).require_ok()
    # rank-1 PSD domination: the optimum is the projector itself
    assert abs(rep.primal_value - 2.0) < 1e-6
    assert np.abs(rep.primal_solution["X"] - gamma.mat).max() < 1e-3


def test_equality_constrained_solve_and_certificates():
    rng = np.random.default_rng(4)
    lay = SystemLayout([("A", 2), ("B", 2)])
    h = rand_herm(rng, 4)
    p = co.ConicProblem("cert")
    x = p.add_hermitian("X", lay)
    t = p.add_scalar("t")
    p.minimize(t=1.0)
    p.require_psd(co.var_expr(x) - co.const_expr(h, lay))
    co.constrain_marginal_equals(p, x, ("B",), co.scalar_times(t, np.eye(2)))
    rep = solve(p).require_ok()
    # the returned primal satisfies every constraint within 10x feasibility tol
    xs, ts = rep.primal_solution["X"], rep.primal_solution["t"]
    assert np.linalg.eigvalsh(xs - h)[0] >= -1e-7
    marg = xs.reshape(2, 2, 2, 2).trace(axis1=1, axis2=3)
    assert np.abs(marg - ts * np.eye(2)).max() < 1e-7
    # weak duality on the report
    assert rep.primal_value >= rep.dual_value - 1e-6
    # PSD dual certificates
    for z in rep.dual_solution["psd"]:
        assert np.linalg.eigvalsh(z)[0] >= -1e-7


def test_determinism():
    rng = np.random.default_rng(5)
    lay = SystemLayout([("A", 2), ("B", 2)])
    h = rand_herm(rng, 4)
    p = co.ConicProblem("det")
    x = p.add_hermitian("X", lay)
    p.minimize(X=np.eye(4))
    p.require_psd(co.var_expr(x) - co.const_expr(h, lay))
    p.require_psd(co.var_expr(x))
    r1 = solve(p)
    r2 = solve(p)
    assert r1.iterations == r2.iterations
    assert abs(r1.primal_value - r2.primal_value) < 1e-12
    assert r1.status == r2.status == "optimal"


def test_complex_value_against_eigen_oracle():
    rng = np.random.default_rng(6)
    lay = SystemLayout([("A", 2), ("B", 2)])
    h = rand_herm(rng, 4)
    p = co.ConicProblem("posplus")
    x = p.add_hermitian("X", lay)
    p.minimize(X=np.eye(4))
    p.require_psd(co.var_expr(x) - co.const_expr(h, lay))
    p.require_psd(co.var_expr(x))
    expected = np.clip(np.linalg.eigvalsh(h), 0.0, None).sum()
    rep = solve(p).require_ok()
    assert abs(rep.primal_value - expected) < 1e-6


@pytest.mark.parametrize("backend,tol", [("cvxopt", 1e-6), ("scs", 1e-5)])
def test_backend_seam_cross_validation(backend, tol):
    rng = np.random.default_rng(6)
    lay = SystemLayout([("A", 2), ("B", 2)])
    h = rand_herm(rng, 4)
    p = co.ConicProblem("xval")
    x = p.add_hermitian("X", lay)
    t = p.add_scalar("t")
    p.minimize(t=1.0)
    p.require_psd(co.var_expr(x) - co.const_expr(h, lay))
    co.constrain_marginal_equals(p, x, ("B",), co.scalar_times(t, np.eye(2)))
    native = solve(p).require_ok()
    other = solve(p, SolverConfig(backend=backend, tol_gap=1e-9)).require_ok()
    assert abs(native.primal_value - other.primal_value) < tol
    assert other.backend == backend


def test_registered_backend_dispatch():
    from nscost import solver as sv

    calls = []

    def fake_backend(cp, cfg):
        calls.append(cp.n)
        return sv._native_backend(cp, cfg)

    sv.register_backend("fake", fake_backend)
    try:
        rep = solve(eigmax_problem(), SolverConfig(backend="fake"))
        assert rep.backend == "fake"
        assert calls
    finally:
        sv._BACKENDS.pop("fake")


def test_infeasible_equalities():
    p = co.ConicProblem("badeq")
    lay = SystemLayout([("A", 2)])
    x = p.add_hermitian("X", lay)
    p.minimize(X=np.eye(2))
    p.require_psd(co.var_expr(x))
    co.constrain_marginal_equals(p, x, ("A",), co.const_expr(np.array([[1.0]])))
    co.constrain_marginal_equals(p, x, ("A",), co.const_expr(np.array([[2.0]])))
    assert solve(p).status == "infeasible"


def test_infeasible_psd_detected():
    # t >= 1 and -t >= 0 cannot hold together
    p = co.ConicProblem("badlmi")
    t = p.add_scalar("t")
    p.minimize(t=1.0)
    p.require_psd(co.scalar_times(t, np.eye(1)) - co.const_expr(np.array([[1.0]])))
    p.require_psd(co.scalar_times(t, -np.eye(1)))
    rep = solve(p, SolverConfig(max_iters=100))
    assert rep.status == "infeasible"


def test_status_contract_on_report():
    rep = solve(eigmax_problem())
    assert isinstance(rep, SolveReport)
    assert rep.ok
    cfg = SolverConfig()
    if rep.status == "optimal":
        assert rep.gap <= cfg.tol_gap
        assert rep.residuals["primal"] <= cfg.tol_feas
        assert rep.residuals["dual"] <= cfg.tol_feas


def test_config_validation_and_env(monkeypatch):
    with pytest.raises(ValueError):
        SolverConfig(tol_gap=-1)
    with pytest.raises(ValueError):
        SolverConfig(step_fraction=1.5)
    with pytest.raises(ValueError):
        SolverConfig(max_iters=0)
    monkeypatch.setenv("NSCOST_TOL_GAP", "1e-5")
    monkeypatch.setenv("NSCOST_MAX_ITERS", "44")
    cfg = SolverConfig.from_env()
    assert cfg.tol_gap == 1e-5 and cfg.max_iters == 44
    cfg2 = SolverConfig.from_env(max_iters=7)
    assert cfg2.max_iters == 7


def test_unknown_backend_rejected():
    with pytest.raises(SolverError, match="unknown backend"):
        solve(eigmax_problem(), SolverConfig(backend="nope"))


def test_block_side_cap():
    lay = SystemLayout([("A", 600)])
    p = co.ConicProblem("big")
    x = p.add_hermitian("X", lay)
    p.minimize(X=np.eye(600))
    p.require_psd(co.var_expr(x))
    with pytest.raises(ProblemTooLargeError):
        solve(p)


def test_scale_invariance_reasonable():
    # values spanning orders of magnitude still solve to relative accuracy
    for scale in (1e-3, 1.0, 1e3):
        rep = solve(eigmax_problem((scale, 2 * scale))).require_ok()
        assert abs(rep.primal_value - 2 * scale) < 1e-6 * max(1.0, scale)
