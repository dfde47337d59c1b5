import numpy as np
import pytest

from nscost import conic as co
from nscost.solver import SolverConfig, solve
from nscost.tensors import HermitianOperator, SystemLayout

from conftest import rand_herm

LAY = SystemLayout([("A", 2), ("B", 3), ("C", 2)])


def all_maps(rng):
    weight = HermitianOperator(SystemLayout([("A", 2), ("C", 2)]), rand_herm(rng, 4))
    const = HermitianOperator(SystemLayout([("D", 2)]), rand_herm(rng, 2))
    return [
        co.ScaleMap(12, -1.5),
        co.PartialTraceMap(LAY, ("B",)),
        co.PartialTraceMap(LAY, ("A", "C")),
        co.PermuteMap(LAY, ("C", "A", "B")),
        co.TensorConstMap(const, LAY, ("A", "D", "B", "C")),
        co.WeightedTraceMap(weight, LAY, ("A", "C")),
        co.ComposedMap(co.ScaleMap(4, 2.0), co.PartialTraceMap(LAY, ("B",))),
    ]


def test_maps_match_entry_matrices_and_preserve_hermiticity():
    rng = np.random.default_rng(7)
    h = rand_herm(rng, 12)
    for amap in all_maps(rng):
        via_apply = amap.apply(h)
        via_entries = (amap.entry_matrix() @ h.reshape(-1)).reshape(
            amap.out_side, amap.out_side
        )
        assert np.abs(via_apply - via_entries).max() < 1e-12, type(amap).__name__
        assert np.abs(via_apply - via_apply.conj().T).max() < 1e-12


def test_map_adjoints():
    rng = np.random.default_rng(8)
    h = rand_herm(rng, 12)
    for amap in all_maps(rng):
        k = rand_herm(rng, amap.out_side)
        lhs = np.trace(amap.apply(h).conj().T @ k)
        rhs = np.trace(h.conj().T @ amap.adjoint().apply(k))
        assert abs(lhs - rhs) < 1e-9, type(amap).__name__


def test_scalar_matrix_map():
    rng = np.random.default_rng(9)
    k = rand_herm(rng, 3)
    sm = co.ScalarMatrixMap(k)
    assert np.allclose(sm.apply(np.array([[2.5]])), 2.5 * k)
    adj = sm.adjoint()
    m = rand_herm(rng, 3)
    assert abs(adj.apply(m)[0, 0] - np.trace(k.conj().T @ m)) < 1e-12


def test_embed_hermitian_spectrum():
    # identity doubles in place
    assert np.allclose(co.embed_hermitian(np.eye(2)), np.eye(4))
    sigma_y = np.array([[0.0, -1j], [1j, 0.0]])
    emb = co.embed_hermitian(sigma_y)
    assert np.abs(emb.imag).max() == 0.0
    assert np.allclose(np.linalg.eigvalsh(emb), [-1.0, -1.0, 1.0, 1.0])


def test_marginal_constraint_and_compile_evaluate():
    rng = np.random.default_rng(10)
    lay = SystemLayout([("A", 2), ("B", 2)])
    p = co.ConicProblem("compile-test")
    x = p.add_hermitian("X", lay)
    t = p.add_scalar("t")
    # self-referential: tr_B X = pi_A tensor tr_AB X would be 1x1; use scaled identity instead
    co.constrain_marginal_equals(p, x, ("B",), co.scalar_times(t, np.eye(2)))
    target = rand_herm(rng, 4)
    p.require_psd(co.var_expr(x) - co.const_expr(target, lay))
    p.minimize(t=1.0)
    cp = co.compile_problem(p)
    assert cp.n == 17
    # evaluate the compiled equality at a manual assignment
    xv = rand_herm(rng, 4)
    tv = 1.7
    coords = np.concatenate([co.matrix_to_coords(xv, 4), [tv]])
    resid = cp.a_eq @ coords - cp.b_eq
    marg = xv.reshape(2, 2, 2, 2).trace(axis1=1, axis2=3)
    expected = np.abs(marg - tv * np.eye(2)).max()
    assert abs(np.abs(resid).max() - expected) < 1e-12

    # degenerate empty traced set: plain affine equality
    p2 = co.ConicProblem()
    x2 = p2.add_hermitian("X", lay)
    co.constrain_marginal_equals(p2, x2, (), co.const_expr(target, lay))
    cp2 = co.compile_problem(p2)
    coords2 = co.matrix_to_coords(target, 4)
    assert np.abs(cp2.a_eq @ coords2 - cp2.b_eq).max() < 1e-12


def test_self_referential_marginal():
    # tr_B Y = pi_A * tr(Y): both sides derived from the same variable
    lay = SystemLayout([("A", 2), ("B", 2)])
    pi_a = HermitianOperator.maximally_mixed(SystemLayout([("A", 2)]))
    p = co.ConicProblem()
    y = p.add_hermitian("Y", lay)
    full_trace = co.var_expr(y).map(co.PartialTraceMap(lay, ("A", "B")), SystemLayout([]))
    lifted = full_trace.map(
        co.TensorConstMap(pi_a, SystemLayout([]), ("A",)), SystemLayout([("A", 2)])
    )
    co.constrain_marginal_equals(p, y, ("B",), lifted)
    cp = co.compile_problem(p)
    good = np.kron(np.eye(2) / 2, np.diag([1.5, 0.5]))
    coords = co.matrix_to_coords(good, 4)
    assert np.abs(cp.a_eq @ coords - cp.b_eq).max() < 1e-12
    bad = np.diag([1.0, 0.0, 0.0, 0.0])
    coords = co.matrix_to_coords(bad, 4)
    assert np.abs(cp.a_eq @ coords - cp.b_eq).max() > 0.1


def _one_var_problem(h):
    lay = SystemLayout([("A", h.shape[0])])
    p = co.ConicProblem("embed-value")
    x = p.add_hermitian("X", lay)
    p.minimize(X=np.eye(h.shape[0]))
    p.require_psd(co.var_expr(x) - co.const_expr(h, lay))
    p.require_psd(co.var_expr(x))
    return p


def test_embedding_preserves_optimal_value():
    rng = np.random.default_rng(11)
    h = rand_herm(rng, 4)
    p = _one_var_problem(h)
    direct = solve(p).require_ok()
    embedded = solve(co.hermitian_to_real_embedding(p)).require_ok()
    assert abs(direct.primal_value - embedded.primal_value) < 1e-8
    expected = np.clip(np.linalg.eigvalsh(h), 0.0, None).sum()
    assert abs(direct.primal_value - expected) < 1e-6


def test_embedding_value_regression_set():
    # ten random one-variable problems, solved with and without explicit embedding
    rng = np.random.default_rng(12)
    for trial in range(10):
        h = rand_herm(rng, 3)
        p = _one_var_problem(h)
        v1 = solve(p).require_ok().primal_value
        v2 = solve(co.hermitian_to_real_embedding(p)).require_ok().primal_value
        assert abs(v1 - v2) < 1e-8


def test_real_slice_detection():
    # real data: slice applies; complex data: it does not
    lay = SystemLayout([("A", 2), ("B", 2)])
    p = co.ConicProblem()
    x = p.add_hermitian("X", lay)
    p.minimize(X=np.eye(4))
    p.require_psd(co.var_expr(x) - co.const_expr(np.diag([1.0, 2.0, 3.0, 4.0]), lay))
    cp = co.compile_problem(p)
    sliced, lift = cp.real_slice()
    assert sliced is not None and sliced.n == 10  # 4 diag + 6 symmetric pairs
    rng = np.random.default_rng(13)
    p2 = co.ConicProblem()
    x2 = p2.add_hermitian("X", lay)
    p2.minimize(X=np.eye(4))
    p2.require_psd(co.var_expr(x2) - co.const_expr(rand_herm(rng, 4), lay))
    assert co.compile_problem(p2).real_slice()[0] is None


def test_undeclared_variable_rejected():
    p = co.ConicProblem()
    lay = SystemLayout([("A", 2)])
    x = co.Variable("ghost", 2, "hermitian", lay)
    with pytest.raises(ValueError, match="undeclared"):
        p.require_psd(co.var_expr(x))


def test_problem_dump(tmp_path):
    rng = np.random.default_rng(14)
    p = _one_var_problem(rand_herm(rng, 2))
    path = tmp_path / "dump.json"
    co.dump_problem(p, str(path))
    import json

    data = json.loads(path.read_text())
    assert data["n"] == 4
    assert len(data["psd_blocks"]) == 2
    assert len(data["objective"]) == 4
