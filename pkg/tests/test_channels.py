import json

import numpy as np
import pytest

from nscost import channels as chn
from nscost.tensors import MaxEntangledVector, SystemLayout


def test_swap_alpha_unitary_endpoints():
    assert np.allclose(chn.swap_alpha_unitary(0.0), np.eye(4))
    assert np.allclose(chn.swap_alpha_unitary(1.0), chn.swap_unitary(2), atol=1e-15)
    u = chn.swap_alpha_unitary(0.5)
    assert abs(u[1, 1] - (1 + 1j) / 2) < 1e-12
    assert abs(u[1, 2] - (1 - 1j) / 2) < 1e-12
    # direct matrix multiply oracle for unitarity
    assert np.abs(u.conj().T @ u - np.eye(4)).max() < 1e-12


def test_partial_swap_unitary():
    assert np.allclose(chn.partial_swap_unitary(1.0), np.eye(4))
    assert np.allclose(chn.partial_swap_unitary(0.0), 1j * chn.swap_unitary(2))
    u = chn.partial_swap_unitary(0.5)
    assert np.allclose(u, (np.eye(4) + 1j * chn.swap_unitary(2)) / np.sqrt(2))
    assert np.abs(u.conj().T @ u - np.eye(4)).max() < 1e-12
    with pytest.raises(ValueError):
        chn.partial_swap_unitary(1.5)


def test_choi_from_unitary_identity():
    ch = chn.identity_channel()
    ga = MaxEntangledVector(SystemLayout([("A0", 2), ("A1", 2)])).projector()
    gb = MaxEntangledVector(SystemLayout([("B0", 2), ("B1", 2)])).projector()
    expected = ga.tensor(gb).permute(chn.CHOI_LABELS)
    assert np.abs(ch.choi.mat - expected.mat).max() < 1e-12


def test_choi_from_unitary_swap_invariants(swap):
    assert abs(swap.choi.trace() - 4.0) < 1e-10
    assert np.linalg.matrix_rank(swap.choi.mat, tol=1e-8) == 1
    marg = swap.choi.partial_trace(("A1", "B1"))
    assert np.abs(marg.mat - np.eye(4)).max() < 1e-10


def test_choi_from_unitary_rejects_nonunitary():
    with pytest.raises(ValueError, match="unitary"):
        chn.choi_from_unitary(np.diag([1.0, 1.0, 1.0, 0.5]), (2, 2, 2, 2))
    with pytest.raises(ValueError):
        chn.choi_from_unitary(np.eye(4), (2, 2, 2, 4))


def test_swap_alpha_zero_is_identity_channel():
    ch = chn.noisy_swap_alpha(0.0, 0.0)
    assert np.abs(ch.choi.mat - chn.identity_channel().choi.mat).max() < 1e-12


def test_depolarize_endpoints_and_eigenvalues(swap):
    assert np.abs(chn.depolarize_global(swap, 0.0).choi.mat - swap.choi.mat).max() < 1e-14
    repl = chn.depolarize_global(swap, 1.0)
    assert chn.ns_flags(repl).both
    half = chn.depolarize_global(swap, 0.5)
    evals = np.sort(np.linalg.eigvalsh(half.choi.mat))
    # dense eigensolver oracle: rank-1 of weight 4 mixed with identity/4
    assert np.abs(evals[:15] - 0.125).max() < 1e-12
    assert abs(evals[-1] - (0.5 * 4 + 0.125)) < 1e-12
    with pytest.raises(ValueError):
        chn.depolarize_global(swap, 1.2)


def test_classical_noiseless_choi():
    triv = chn.classical_noiseless_choi(1)
    assert triv.choi.mat.shape == (1, 1) and abs(triv.choi.mat[0, 0] - 1) < 1e-14
    ups2 = chn.classical_noiseless_choi(2)
    diag = np.real(np.diag(ups2.choi.mat))
    assert np.abs(ups2.choi.mat - np.diag(diag)).max() == 0.0
    ones = np.nonzero(diag)[0]
    # composite index (a0, a1, b0, b1) base 2: exactly the a0 = b1, b0 = a1 cells
    expected = [i for i in range(16)
                if (i >> 3) & 1 == i & 1 and (i >> 2) & 1 == (i >> 1) & 1]
    assert list(ones) == expected and len(ones) == 4
    marg = ups2.choi.partial_trace(("A1", "B1"))
    assert np.abs(marg.mat - np.eye(4)).max() < 1e-14
    flags = chn.ns_flags(ups2)
    assert not flags.a_to_b and not flags.b_to_a
    with pytest.raises(ValueError):
        chn.classical_noiseless_choi(0)


def test_classical_channels_signalling_for_all_m():
    for m in (2, 3):
        ch = chn.classical_noiseless_choi(m)
        assert not chn.is_ns_a_to_b(ch)
        assert not chn.is_ns_b_to_a(ch)
        marg = ch.choi.partial_trace(("A1", "B1"))
        assert np.abs(marg.mat - np.eye(m * m)).max() < 1e-12


def test_ns_predicates(swap):
    prod = chn.random_ns_channel(0)
    assert chn.is_ns_a_to_b(prod) and chn.is_ns_b_to_a(prod)
    assert not chn.is_ns_a_to_b(swap)
    assert not chn.is_ns_b_to_a(swap)
    repl = chn.depolarize_global(swap, 1.0)
    assert chn.is_ns_a_to_b(repl)


def test_ns_invariant_under_consistent_relabeling():
    # exchanging the roles of Alice and Bob preserves both flags jointly
    ch = chn.random_ns_channel(21)
    swapped = chn.BipartiteChannel.from_matrix(
        ch.choi.permute(("B0", "B1", "A0", "A1")).mat, ch.dims
    )
    flags = chn.ns_flags(swapped)
    assert flags.a_to_b and flags.b_to_a


def test_compose_identity_and_swap_square(swap):
    ident = chn.identity_channel()
    ch = chn.random_ns_channel(5)
    assert np.abs(chn.compose(ident, ch).choi.mat - ch.choi.mat).max() < 1e-10
    assert np.abs(chn.compose(ch, ident).choi.mat - ch.choi.mat).max() < 1e-10
    sq = chn.compose(swap, swap)
    assert np.abs(sq.choi.mat - ident.choi.mat).max() < 1e-10
    with pytest.raises(ValueError):
        chn.compose(swap, chn.classical_noiseless_choi(3))


def test_compose_random_channels_is_cptp():
    rng = np.random.default_rng(9)
    for _ in range(5):
        a = chn.random_channel(int(rng.integers(0, 2**31)))
        b = chn.random_channel(int(rng.integers(0, 2**31)))
        chn.compose(a, b)  # constructor revalidates CPTP


def test_random_ns_channel_properties():
    for seed in range(8):
        ch = chn.random_ns_channel(seed)
        assert chn.ns_flags(ch, 1e-9).both
    a = chn.random_ns_channel(5)
    b = chn.random_ns_channel(5)
    assert np.abs(a.choi.mat - b.choi.mat).max() == 0.0


def test_convex_mixture_of_products_is_ns():
    a = chn.random_ns_channel(1)
    b = chn.random_ns_channel(2)
    mix = chn.BipartiteChannel.from_matrix(
        0.5 * a.choi.mat + 0.5 * b.choi.mat, a.dims
    )
    assert chn.ns_flags(mix).both


def test_cptp_validation():
    ch = chn.random_ns_channel(13)
    bad = np.array(ch.choi.mat)
    bad[0, 0] += 1e-3
    with pytest.raises(ValueError, match="trace preserving"):
        chn.BipartiteChannel.from_matrix(bad, ch.dims)
    bad2 = np.array(ch.choi.mat)
    bad2 -= 0.1 * np.eye(bad2.shape[0])
    with pytest.raises(ValueError):
        chn.BipartiteChannel.from_matrix(bad2, ch.dims)


def test_tensor_channels_dims_and_ns():
    a = chn.random_ns_channel(3)
    b = chn.random_ns_channel(4, (2, 1, 1, 2))
    prod = chn.tensor_channels(a, b)
    assert prod.dims == (4, 2, 2, 4)
    assert chn.ns_flags(prod).both


def test_channel_spec_roundtrip(tmp_path):
    ch = chn.noisy_swap_alpha(0.3, 0.1)
    path = tmp_path / "dense.json"
    chn.save_channel_spec(ch, str(path))
    loaded = chn.load_channel_spec(str(path))
    assert loaded.dims == ch.dims
    assert np.abs(loaded.choi.mat - ch.choi.mat).max() < 1e-12


def test_channel_spec_parametric_kinds(tmp_path):
    path = tmp_path / "ch.json"
    path.write_text(json.dumps({"kind": "swap_alpha", "params": {"alpha": 1.0, "p": 0.0}}))
    ch = chn.load_channel_spec(str(path))
    assert np.abs(ch.choi.mat - chn.swap_channel().choi.mat).max() < 1e-12
    path.write_text(json.dumps({"kind": "classical_noiseless", "params": {"m": 3}}))
    assert chn.load_channel_spec(str(path)).dims == (3, 3, 3, 3)


def test_channel_spec_diagnostics(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(chn.ChannelSpecError, match="line"):
        chn.load_channel_spec(str(path))
    path.write_text(json.dumps({"kind": "nope"}))
    with pytest.raises(chn.ChannelSpecError, match="kind"):
        chn.load_channel_spec(str(path))
    path.write_text(json.dumps({"kind": "swap_alpha", "params": {}}))
    with pytest.raises(chn.ChannelSpecError, match="params.alpha"):
        chn.load_channel_spec(str(path))
    path.write_text(json.dumps({"kind": "dense", "dims": [2, 2, 2], "choi": []}))
    with pytest.raises(chn.ChannelSpecError, match="dims"):
        chn.load_channel_spec(str(path))
    # a non-CPTP dense matrix is rejected with a diagnostic
    path.write_text(json.dumps({
        "kind": "dense", "dims": [1, 1, 1, 1], "choi": [[2.0, 0.0]],
    }))
    with pytest.raises(chn.ChannelSpecError, match="trace preserving"):
        chn.load_channel_spec(str(path))
