"""Choi representations of bipartite channels and non-signalling predicates.

A bipartite channel maps inputs on (A0, B0) to outputs on (A1, B1).  Its Choi
operator is stored on the canonical layout ``(A0, A1, B0, B1)``; every builder
reshuffles into this order internally.  Point-to-point channels are the
special case with ``d_B0 = d_A1 = 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tensors import HermitianOperator, SystemLayout

#: Canonical subsystem labels of a bipartite-channel Choi operator.
CHOI_LABELS = ("A0", "A1", "B0", "B1")

TOL_PSD = 1e-9
TOL_TP = 1e-9
#: Default tolerance of the non-signalling predicates (max norm).  One order
#: looser than the construction tolerances, robust to solver round-off.
NS_TOL = 1e-8


def choi_layout(dims: Sequence[int]) -> SystemLayout:
    """Layout (A0, A1, B0, B1) for the given four dimensions."""
    if len(dims) != 4:
        raise ValueError(f"expected four dimensions (A0, A1, B0, B1), got {dims}")
    return SystemLayout(zip(CHOI_LABELS, dims))


class BipartiteChannel:
    """A validated Choi operator on (A0, A1, B0, B1) with CPTP invariants.

    Construction checks complete positivity (Choi PSD within ``TOL_PSD``) and
    trace preservation (the (A0, B0) marginal equals the identity within
    ``TOL_TP``).
    """

    __slots__ = ("choi",)

    def __init__(self, choi: HermitianOperator):
        if choi.layout.labels != CHOI_LABELS:
            raise ValueError(
                f"Choi layout must be {CHOI_LABELS}, got {choi.layout.labels}"
            )
        lam = choi.min_eigenvalue()
        if lam < -TOL_PSD:
            raise ValueError(f"Choi operator is not PSD (min eigenvalue {lam:.3e})")
        marg = choi.partial_trace(("A1", "B1"))
        dev = np.abs(marg.mat - np.eye(marg.dim)).max()
        if dev > TOL_TP:
            raise ValueError(
                f"channel is not trace preserving (input-marginal deviation {dev:.3e})"
            )
        self.choi = choi

    @classmethod
    def from_matrix(cls, mat: np.ndarray, dims: Sequence[int]) -> "BipartiteChannel":
        return cls(HermitianOperator(choi_layout(dims), mat))

    @property
    def dims(self) -> tuple[int, int, int, int]:
        lay = self.choi.layout
        return tuple(lay.dim_of(l) for l in CHOI_LABELS)  # type: ignore[return-value]

    @property
    def layout(self) -> SystemLayout:
        return self.choi.layout

    def is_point_to_point(self) -> bool:
        d = self.dims
        return d[1] == 1 and d[2] == 1

    def __repr__(self) -> str:
        return f"BipartiteChannel(dims={self.dims})"


@dataclass(frozen=True)
class NsFlags:
    """Result of the two directional non-signalling checks."""

    a_to_b: bool
    b_to_a: bool
    tolerance_used: float

    @property
    def both(self) -> bool:
        return self.a_to_b and self.b_to_a


# ------------------------------------------------------------------ unitaries


def swap_unitary(d: int = 2) -> np.ndarray:
    """The SWAP gate on two d-level systems: S |phi>|psi> = |psi>|phi>."""
    s = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1.0
    return s


def swap_alpha_unitary(alpha: float) -> np.ndarray:
    """Fractional two-qubit SWAP: corners 1, central block entries (1 +/- e^{i pi alpha})/2."""
    w = np.exp(1j * np.pi * alpha)
    p = (1.0 + w) / 2.0
    q = (1.0 - w) / 2.0
    return np.array(
        [
            [1, 0, 0, 0],
            [0, p, q, 0],
            [0, q, p, 0],
            [0, 0, 0, 1],
        ],
        dtype=complex,
    )


def partial_swap_unitary(a: float) -> np.ndarray:
    """Beamsplitter-like two-qubit interaction sqrt(a) I + i sqrt(1-a) SWAP."""
    if not 0.0 <= a <= 1.0:
        raise ValueError(f"partial-swap parameter must lie in [0, 1], got {a}")
    return np.sqrt(a) * np.eye(4, dtype=complex) + 1j * np.sqrt(1.0 - a) * swap_unitary(2)


# ------------------------------------------------------------------ channel builders


def choi_from_unitary(u: np.ndarray, dims: Sequence[int]) -> BipartiteChannel:
    """Rank-one Choi operator of the bipartite unitary u: A0 B0 -> A1 B1.

    ``dims`` gives (d_A0, d_A1, d_B0, d_B1); the joint input and output
    dimensions must agree and ``u`` must be unitary within 1e-10.
    """
    d_a0, d_a1, d_b0, d_b1 = (int(d) for d in dims)
    d_in, d_out = d_a0 * d_b0, d_a1 * d_b1
    u = np.asarray(u, dtype=complex)
    if d_in != d_out:
        raise ValueError(f"unitary channel requires square dims, got in={d_in} out={d_out}")
    if u.shape != (d_out, d_in):
        raise ValueError(f"unitary shape {u.shape} does not match dims {tuple(dims)}")
    dev = np.abs(u.conj().T @ u - np.eye(d_in)).max()
    if dev > 1e-10:
        raise ValueError(f"matrix is not unitary within 1e-10 (deviation {dev:.3e})")
    # |psi> = sum_{a0 b0} |a0 b0> (x) U|a0 b0>, reshuffled to (A0, A1, B0, B1).
    psi = u.reshape(d_a1, d_b1, d_a0, d_b0).transpose(2, 0, 3, 1).reshape(-1)
    choi = np.outer(psi, psi.conj())
    return BipartiteChannel.from_matrix(choi, dims)


def identity_channel(d_a: int = 2, d_b: int = 2) -> BipartiteChannel:
    return choi_from_unitary(np.eye(d_a * d_b), (d_a, d_a, d_b, d_b))


def swap_channel() -> BipartiteChannel:
    return choi_from_unitary(swap_unitary(2), (2, 2, 2, 2))


def depolarize_global(ch: BipartiteChannel, p: float) -> BipartiteChannel:
    """Mix the channel with the replacement map onto the maximally mixed output.

    The Choi becomes (1-p) J + p I_{A0 B0} (x) pi_{A1 B1}, reshuffled to the
    canonical ordering.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing probability must lie in [0, 1], got {p}")
    d_a0, d_a1, d_b0, d_b1 = ch.dims
    lay_in = SystemLayout([("A0", d_a0), ("B0", d_b0)])
    lay_out = SystemLayout([("A1", d_a1), ("B1", d_b1)])
    repl = HermitianOperator.identity(lay_in).tensor(
        HermitianOperator.maximally_mixed(lay_out)
    ).permute(CHOI_LABELS)
    mixed = (1.0 - p) * ch.choi + p * repl
    return BipartiteChannel(mixed)


def noisy_swap_alpha(alpha: float, p: float) -> BipartiteChannel:
    """Two-qubit fractional SWAP followed by global depolarizing noise."""
    return depolarize_global(choi_from_unitary(swap_alpha_unitary(alpha), (2, 2, 2, 2)), p)


def noisy_partial_swap(a: float, p: float) -> BipartiteChannel:
    """Two-qubit partial swap followed by global depolarizing noise."""
    return depolarize_global(choi_from_unitary(partial_swap_unitary(a), (2, 2, 2, 2)), p)


def classical_noiseless_choi(m: int) -> BipartiteChannel:
    """Bidirectional classical noiseless channel exchanging one of m messages.

    Maps |k><k| (x) |l><l| on (A0, B0) to |l><l| (x) |k><k| on (A1, B1); the
    Choi operator is diagonal 0/1 with ones exactly where A0 = B1 and B0 = A1.
    """
    m = int(m)
    if m < 1:
        raise ValueError(f"message count must be >= 1, got {m}")
    diag = np.zeros((m, m, m, m))
    for k in range(m):
        for l in range(m):
            diag[k, l, l, k] = 1.0
    return BipartiteChannel.from_matrix(np.diag(diag.reshape(-1)), (m, m, m, m))


def embed_point_to_point(choi_a0_b1: np.ndarray, d0: int, d1: int) -> BipartiteChannel:
    """Embed a point-to-point channel A0 -> B1 as a bipartite channel.

    The Choi matrix is given on (A0, B1); systems A1 and B0 become trivial
    one-dimensional subsystems.
    """
    mat = np.asarray(choi_a0_b1, dtype=complex)
    if mat.shape != (d0 * d1, d0 * d1):
        raise ValueError(f"Choi shape {mat.shape} does not match dims ({d0}, {d1})")
    return BipartiteChannel.from_matrix(mat, (d0, 1, 1, d1))


# ------------------------------------------------------------------ predicates


def is_ns_a_to_b(ch: BipartiteChannel, tol: float = NS_TOL) -> bool:
    """Alice cannot signal Bob: the (A0, B0, B1) Choi marginal is pi_A0 (x) (B0, B1) marginal."""
    j_a0b0b1 = ch.choi.partial_trace(("A1",))
    j_b0b1 = ch.choi.partial_trace(("A0", "A1"))
    pi_a0 = HermitianOperator.maximally_mixed(ch.layout.subset(("A0",)))
    dev = (j_a0b0b1 - pi_a0.tensor(j_b0b1)).max_abs()
    return dev <= tol


def is_ns_b_to_a(ch: BipartiteChannel, tol: float = NS_TOL) -> bool:
    """Bob cannot signal Alice: the (A0, A1, B0) Choi marginal is (A0, A1) marginal (x) pi_B0."""
    j_a0a1b0 = ch.choi.partial_trace(("B1",))
    j_a0a1 = ch.choi.partial_trace(("B0", "B1"))
    pi_b0 = HermitianOperator.maximally_mixed(ch.layout.subset(("B0",)))
    dev = (j_a0a1b0 - j_a0a1.tensor(pi_b0).permute(("A0", "A1", "B0"))).max_abs()
    return dev <= tol


def ns_flags(ch: BipartiteChannel, tol: float = NS_TOL) -> NsFlags:
    return NsFlags(is_ns_a_to_b(ch, tol), is_ns_b_to_a(ch, tol), tol)


# ------------------------------------------------------------------ composition


def compose(ch1: BipartiteChannel, ch2: BipartiteChannel) -> BipartiteChannel:
    """Choi operator of ch2 after ch1 via the link product.

    In components the shared systems contract directly:
    J[(x, z), (x', z')] = sum_{y, y'} J1[(x, y), (x', y')] J2[(y, z), (y', z')].
    """
    d1 = ch1.dims
    d2 = ch2.dims
    if (d1[1], d1[3]) != (d2[0], d2[2]):
        raise ValueError(f"output dims {d1[1], d1[3]} of ch1 do not match input dims {d2[0], d2[2]} of ch2")
    t1 = ch1.choi.mat.reshape(d1 + d1)
    t2 = ch2.choi.mat.reshape(d2 + d2)
    # Axes: (a0, a1, b0, b1, a0', a1', b0', b1'); mid systems are ch1's outputs.
    out = np.einsum("aibj AIBJ, ixjy IXJY -> axby AXBY", t1, t2)
    dims_out = (d1[0], d2[1], d1[2], d2[3])
    dim = int(np.prod(dims_out))
    return BipartiteChannel.from_matrix(out.reshape(dim, dim), dims_out)


def tensor_channels(ch1: BipartiteChannel, ch2: BipartiteChannel) -> BipartiteChannel:
    """Parallel composition; each party's input/output dimensions multiply."""
    d1, d2 = ch1.dims, ch2.dims
    a = ch1.choi
    b = ch2.choi.permute(CHOI_LABELS)
    relabeled = HermitianOperator(
        SystemLayout([(l + "'", d) for l, d in b.layout.systems]), b.mat, tol=np.inf
    )
    prod = a.tensor(relabeled).permute(
        ("A0", "A0'", "A1", "A1'", "B0", "B0'", "B1", "B1'")
    )
    dims = (d1[0] * d2[0], d1[1] * d2[1], d1[2] * d2[2], d1[3] * d2[3])
    return BipartiteChannel.from_matrix(prod.mat, dims)


# ------------------------------------------------------------------ random instances


def _random_local_choi(rng: np.random.Generator, d0: int, d1: int) -> np.ndarray:
    """Choi matrix on (X0, X1) of a CPTP map sampled from a Ginibre isometry."""
    d_env = max(d0, d1)  # the Stinespring isometry needs d1 * d_env >= d0
    g = rng.normal(size=(d1 * d_env, d0)) + 1j * rng.normal(size=(d1 * d_env, d0))
    v, _ = np.linalg.qr(g)  # isometry d0 -> d1 * d_env
    k = v.reshape(d1, d_env, d0)
    choi = np.einsum("oei, pej -> iojp", k, k.conj()).reshape(d0 * d1, d0 * d1)
    return choi


def random_channel(seed: int, dims: Sequence[int] = (2, 2, 2, 2)) -> BipartiteChannel:
    """Seeded Haar-style generic CPTP bipartite channel (generally signalling)."""
    d_a0, d_a1, d_b0, d_b1 = (int(d) for d in dims)
    rng = np.random.default_rng(seed)
    d_in, d_out = d_a0 * d_b0, d_a1 * d_b1
    d_env = max(d_in, d_out)
    g = rng.normal(size=(d_out * d_env, d_in)) + 1j * rng.normal(size=(d_out * d_env, d_in))
    v, _ = np.linalg.qr(g)
    k = v.reshape(d_out, d_env, d_in)
    choi = np.einsum("oei, pej -> iojp", k, k.conj()).reshape(d_in * d_out, d_in * d_out)
    op = HermitianOperator(
        SystemLayout([("A0", d_a0), ("B0", d_b0), ("A1", d_a1), ("B1", d_b1)]), choi
    ).permute(CHOI_LABELS)
    return BipartiteChannel(op)


def random_ns_channel(seed: int, dims: Sequence[int] = (2, 2, 2, 2)) -> BipartiteChannel:
    """Seeded non-signalling channel: a convex mixture of products of local maps.

    Mixtures of E_A (x) E_B are non-signalling by construction (no interaction,
    and the non-signalling set is convex), which avoids solving a feasibility
    problem just to generate test instances.
    """
    d_a0, d_a1, d_b0, d_b1 = (int(d) for d in dims)
    rng = np.random.default_rng(seed)
    n_terms = 3
    weights = rng.random(n_terms) + 0.1
    weights /= weights.sum()
    total = np.zeros((d_a0 * d_a1 * d_b0 * d_b1,) * 2, dtype=complex)
    for w in weights:
        ja = _random_local_choi(rng, d_a0, d_a1)
        jb = _random_local_choi(rng, d_b0, d_b1)
        total += w * np.kron(ja, jb)
    return BipartiteChannel.from_matrix(total, dims)


def random_p2p_channel(seed: int, d0: int = 2, d1: int = 2) -> BipartiteChannel:
    """Seeded point-to-point channel A0 -> B1 embedded as a bipartite channel."""
    rng = np.random.default_rng(seed)
    choi = _random_local_choi(rng, d0, d1)
    return embed_point_to_point(choi, d0, d1)


# ------------------------------------------------------------------ spec files


class ChannelSpecError(ValueError):
    """Raised when a channel spec file is malformed; carries a field diagnostic."""


_KINDS = ("swap_alpha", "partial_swap", "classical_noiseless", "dense")


def load_channel_spec(path: str) -> BipartiteChannel:
    """Load a channel from a JSON spec file.

    Fields: ``kind`` in {swap_alpha, partial_swap, classical_noiseless, dense},
    ``params`` (alpha / a / p / m), ``dims`` (four positive integers) and, for
    ``dense``, ``choi`` as a row-major list of [re, im] pairs.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ChannelSpecError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ChannelSpecError(f"{path}: top-level value must be an object")
    kind = data.get("kind")
    if kind not in _KINDS:
        raise ChannelSpecError(f"{path}: field 'kind' must be one of {_KINDS}, got {kind!r}")
    params = data.get("params", {})
    if not isinstance(params, dict):
        raise ChannelSpecError(f"{path}: field 'params' must be an object")

    def _param(name, default=None):
        if name not in params:
            if default is None:
                raise ChannelSpecError(f"{path}: field 'params.{name}' is required for kind {kind!r}")
            return default
        value = params[name]
        if not isinstance(value, (int, float)):
            raise ChannelSpecError(f"{path}: field 'params.{name}' must be a number")
        return value

    try:
        if kind == "swap_alpha":
            return noisy_swap_alpha(float(_param("alpha")), float(_param("p", 0.0)))
        if kind == "partial_swap":
            return noisy_partial_swap(float(_param("a")), float(_param("p", 0.0)))
        if kind == "classical_noiseless":
            return classical_noiseless_choi(int(_param("m")))
        dims = data.get("dims")
        if (
            not isinstance(dims, list)
            or len(dims) != 4
            or not all(isinstance(d, int) and d >= 1 for d in dims)
        ):
            raise ChannelSpecError(f"{path}: field 'dims' must be four positive integers")
        entries = data.get("choi")
        dim = int(np.prod(dims))
        if not isinstance(entries, list) or len(entries) != dim * dim:
            raise ChannelSpecError(
                f"{path}: field 'choi' must be a row-major list of {dim * dim} [re, im] pairs"
            )
        flat = np.empty(dim * dim, dtype=complex)
        for i, pair in enumerate(entries):
            if not (isinstance(pair, list) and len(pair) == 2):
                raise ChannelSpecError(f"{path}: field 'choi[{i}]' must be a [re, im] pair")
            flat[i] = complex(pair[0], pair[1])
        return BipartiteChannel.from_matrix(flat.reshape(dim, dim), dims)
    except ChannelSpecError:
        raise
    except ValueError as exc:
        raise ChannelSpecError(f"{path}: {exc}") from exc


def save_channel_spec(ch: BipartiteChannel, path: str) -> None:
    """Write a channel as a ``dense`` JSON spec file (row-major [re, im] pairs)."""
    flat = ch.choi.mat.reshape(-1)
    data = {
        "kind": "dense",
        "dims": list(ch.dims),
        "choi": [[float(z.real), float(z.imag)] for z in flat],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh)
