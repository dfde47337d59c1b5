"""SDP intermediate representation: matrix variables, affine constraints, compilation.

A :class:`ConicProblem` holds Hermitian matrix (and scalar) variables, a real
linear objective (minimized), affine Hermitian expressions required PSD, and
affine expressions required zero.  Expressions are built from structured
affine maps (scaling, partial trace, tensoring with a constant, subsystem
permutation, weighted partial trace), all of which preserve Hermiticity by
construction.

Compilation flattens the problem over an orthonormal real coordinate basis of
each Hermitian variable, producing sparse constraint data that any conic
backend can consume.  :func:`hermitian_to_real_embedding` replaces every
complex Hermitian PSD block H by the real symmetric [[Re H, -Im H], [Im H,
Re H]], which is PSD iff H is, leaving the optimal value unchanged.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .tensors import HermitianOperator, SystemLayout

# ------------------------------------------------------------------ variables


@dataclass(frozen=True)
class Variable:
    """A declared optimization variable: a Hermitian matrix block or a scalar."""

    name: str
    side: int
    kind: str  # "hermitian" | "scalar"
    layout: SystemLayout | None = None

    @property
    def n_coords(self) -> int:
        return 1 if self.kind == "scalar" else self.side * self.side


# ------------------------------------------------------------------ index helpers


def _strides(dims: Sequence[int]) -> np.ndarray:
    out = np.ones(len(dims), dtype=np.int64)
    for i in range(len(dims) - 2, -1, -1):
        out[i] = out[i + 1] * dims[i + 1]
    return out


def _embedding_tables(layout: SystemLayout, traced: Sequence[str]):
    """Index tables splitting a full mixed-radix index into kept/traced parts.

    Returns (keep_embed, tr_embed): arrays such that the full basis index with
    kept multi-index R and traced multi-index t is keep_embed[R] + tr_embed[t].
    """
    dims = layout.dims
    strides = _strides(dims)
    pos_tr = set(layout.positions(traced))
    keep_positions = [p for p in range(layout.nsys) if p not in pos_tr]
    tr_positions = [p for p in range(layout.nsys) if p in pos_tr]

    def embed(positions):
        local_dims = [dims[p] for p in positions]
        d = int(np.prod(local_dims)) if positions else 1
        idx = np.arange(d, dtype=np.int64)
        total = np.zeros(d, dtype=np.int64)
        for p, ld in zip(positions, local_dims):
            later = [q for q in positions if q > p]
            loc_stride = int(np.prod([dims[q] for q in later] or [1]))
            comp = (idx // loc_stride) % ld
            total += comp * strides[p]
        return total

    return embed(keep_positions), embed(tr_positions)


# ------------------------------------------------------------------ affine maps


class AffineMap:
    """A Hermiticity-preserving complex-linear map between operator spaces.

    Available kinds: identity scaling, partial trace, tensoring with a
    constant operator (with target ordering), subsystem permutation, weighted
    partial trace (trace against a constant on the traced subsystems), scalar
    to matrix, and compositions.  Each map exposes its sparse matrix on vec'd
    entries and its adjoint for dual assembly.
    """

    in_side: int
    out_side: int

    def apply(self, mats: np.ndarray) -> np.ndarray:
        """Apply to one matrix или a batch with shape (..., in_side, in_side)."""
        raise NotImplementedError

    def entry_matrix(self) -> sp.csr_matrix:
        """Sparse complex matrix E with vec(L(M)) = E @ vec(M), row-major vec."""
        raise NotImplementedError

    def adjoint(self) -> "AffineMap":
        raise NotImplementedError

    def then(self, outer: "AffineMap") -> "AffineMap":
        return ComposedMap(outer, self)


class ScaleMap(AffineMap):
    """M -> alpha M with real alpha."""

    def __init__(self, side: int, alpha: float = 1.0):
        self.in_side = self.out_side = int(side)
        self.alpha = float(alpha)

    def apply(self, mats):
        return self.alpha * np.asarray(mats)

    def entry_matrix(self):
        d = self.in_side * self.in_side
        return sp.identity(d, format="csr", dtype=complex) * self.alpha

    def adjoint(self):
        return self


class ScalarMatrixMap(AffineMap):
    """x -> x K for a constant Hermitian K; the input is a 1x1 block."""

    def __init__(self, k_mat: np.ndarray):
        self.k_mat = np.asarray(k_mat, dtype=complex)
        self.in_side = 1
        self.out_side = self.k_mat.shape[0]

    def apply(self, mats):
        x = np.asarray(mats)[..., 0, 0]
        return np.multiply.outer(x, self.k_mat) if x.ndim else x * self.k_mat

    def entry_matrix(self):
        col = self.k_mat.reshape(-1, 1)
        return sp.csr_matrix(col)

    def adjoint(self):
        # M -> <K, M> as a 1x1 block
        return _TraceAgainstMap(self.k_mat)


class _TraceAgainstMap(AffineMap):
    """M -> <K, M> = tr(K M) as a 1x1 block (adjoint of ScalarMatrixMap)."""

    def __init__(self, k_mat: np.ndarray):
        self.k_mat = np.asarray(k_mat, dtype=complex)
        self.in_side = self.k_mat.shape[0]
        self.out_side = 1

    def apply(self, mats):
        val = np.einsum("ij,...ij->...", self.k_mat.conj(), np.asarray(mats))
        return np.asarray(val)[..., None, None]

    def entry_matrix(self):
        return sp.csr_matrix(self.k_mat.conj().reshape(1, -1))

    def adjoint(self):
        return ScalarMatrixMap(self.k_mat)


class PartialTraceMap(AffineMap):
    """Partial trace over a set of labeled subsystems."""

    def __init__(self, layout: SystemLayout, traced_labels: Iterable[str]):
        self.layout = layout
        self.traced = tuple(traced_labels)
        self.out_layout = layout.drop(self.traced)
        self.in_side = layout.dim
        self.out_side = self.out_layout.dim

    def apply(self, mats):
        mats = np.asarray(mats)
        batch = mats.shape[:-2]
        dims = self.layout.dims
        n = self.layout.nsys
        t = mats.reshape(batch + dims + dims)
        nb = len(batch)
        idx = list(range(nb)) + [nb + i for i in range(2 * n)]
        pos = self.layout.positions(self.traced)
        for p in pos:
            idx[nb + n + p] = idx[nb + p]
        keep = [p for p in range(n) if p not in pos]
        out_idx = list(range(nb)) + [nb + p for p in keep] + [nb + n + p for p in keep]
        res = np.einsum(t, idx, out_idx)
        return res.reshape(batch + (self.out_side, self.out_side))

    def entry_matrix(self):
        keep_embed, tr_embed = _embedding_tables(self.layout, self.traced)
        dk, dt = len(keep_embed), len(tr_embed)
        din = self.in_side
        r = np.repeat(np.arange(dk), dk * dt)
        c = np.tile(np.repeat(np.arange(dk), dt), dk)
        t = np.tile(np.arange(dt), dk * dk)
        rows = r * dk + c
        cols = (keep_embed[r] + tr_embed[t]) * din + keep_embed[c] + tr_embed[t]
        data = np.ones(rows.size, dtype=complex)
        return sp.csr_matrix((data, (rows, cols)), shape=(dk * dk, din * din))

    def adjoint(self):
        # <tr_S(M), K> = <M, 1_S (x) K (reordered)>
        ident = HermitianOperator.identity(self.layout.subset(self.traced))
        return TensorConstMap(ident, self.out_layout, self.layout.labels)


class PermuteMap(AffineMap):
    """Reindex subsystems into a new label order."""

    def __init__(self, layout: SystemLayout, new_order: Sequence[str]):
        self.layout = layout
        self.new_order = tuple(new_order)
        self.out_layout = layout.permuted(self.new_order)
        self.in_side = self.out_side = layout.dim

    def _sigma(self) -> np.ndarray:
        dims = self.layout.dims
        axes = self.layout.positions(self.new_order)
        d = self.in_side
        idx = np.arange(d, dtype=np.int64)
        comps = []
        strides = _strides(dims)
        for p in range(self.layout.nsys):
            comps.append((idx // strides[p]) % dims[p])
        new_dims = [dims[a] for a in axes]
        new_strides = _strides(new_dims)
        out = np.zeros(d, dtype=np.int64)
        for newpos, a in enumerate(axes):
            out += comps[a] * new_strides[newpos]
        return out

    def apply(self, mats):
        mats = np.asarray(mats)
        batch = mats.shape[:-2]
        nb = len(batch)
        n = self.layout.nsys
        dims = self.layout.dims
        axes = list(self.layout.positions(self.new_order))
        t = mats.reshape(batch + dims + dims)
        perm = list(range(nb)) + [nb + a for a in axes] + [nb + n + a for a in axes]
        return t.transpose(perm).reshape(batch + (self.out_side, self.out_side))

    def entry_matrix(self):
        sigma = self._sigma()
        d = self.in_side
        r = np.repeat(np.arange(d), d)
        c = np.tile(np.arange(d), d)
        rows = sigma[r] * d + sigma[c]
        cols = r * d + c
        return sp.csr_matrix(
            (np.ones(d * d, dtype=complex), (rows, cols)), shape=(d * d, d * d)
        )

    def adjoint(self):
        return PermuteMap(self.out_layout, self.layout.labels)


class TensorConstMap(AffineMap):
    """M -> reorder(const (x) M) onto a target label order."""

    def __init__(
        self,
        const: HermitianOperator,
        in_layout: SystemLayout,
        out_order: Sequence[str] | None = None,
    ):
        self.const = const
        self.in_layout = in_layout
        joint = const.layout.tensor(in_layout)
        self.out_order = tuple(out_order) if out_order is not None else joint.labels
        self.out_layout = joint.permuted(self.out_order)
        self.in_side = in_layout.dim
        self.out_side = self.out_layout.dim
        self._perm = PermuteMap(joint, self.out_order)

    def apply(self, mats):
        mats = np.asarray(mats)
        batch = mats.shape[:-2]
        dc = self.const.dim
        di = self.in_side
        kron = np.einsum("ij,...kl->...ikjl", self.const.mat, mats).reshape(
            batch + (dc * di, dc * di)
        )
        return self._perm.apply(kron)

    def entry_matrix(self):
        dc, di = self.const.dim, self.in_side
        cm = self.const.mat
        ii, jj = np.nonzero(cm)
        vals = cm[ii, jj]
        k = np.repeat(np.arange(di), di)
        l = np.tile(np.arange(di), di)
        rows = ((ii[:, None] * di + k[None, :]) * (dc * di) + jj[:, None] * di + l[None, :]).ravel()
        cols = np.tile(k * di + l, ii.size)
        data = np.repeat(vals, di * di)
        kron_em = sp.csr_matrix(
            (data, (rows, cols)), shape=((dc * di) ** 2, di * di)
        )
        return self._perm.entry_matrix() @ kron_em

    def adjoint(self):
        # <const (x) M (reordered), K> = <M, weighted-trace of K against const>
        joint = self._perm.layout
        return ComposedMap(
            WeightedTraceMap(self.const, joint, self.const.layout.labels),
            PermuteMap(self.out_layout, joint.labels),
        )


class WeightedTraceMap(AffineMap):
    """M -> tr_S[(W_S (x) 1) M]: partial trace against a constant weight.

    The weight lives on the traced subsystems (in their layout order).  For a
    Hermitian weight the result is Hermitian.  The adjoint tensors the weight
    back in.
    """

    def __init__(self, weight: HermitianOperator, layout: SystemLayout, traced_labels: Iterable[str]):
        self.weight = weight
        self.layout = layout
        self.traced = tuple(traced_labels)
        if weight.layout.dims != layout.subset(self.traced).dims:
            raise ValueError("weight dimensions do not match the traced subsystems")
        self.out_layout = layout.drop(self.traced)
        self.in_side = layout.dim
        self.out_side = self.out_layout.dim

    def apply(self, mats):
        mats = np.asarray(mats)
        batch = mats.shape[:-2]
        nb = len(batch)
        n = self.layout.nsys
        dims = self.layout.dims
        pos = list(self.layout.positions(self.traced))
        keep = [p for p in range(n) if p not in pos]
        t = mats.reshape(batch + dims + dims)
        # move traced bra axes and ket axes to the front of each group
        perm = (
            list(range(nb))
            + [nb + p for p in pos]
            + [nb + p for p in keep]
            + [nb + n + p for p in pos]
            + [nb + n + p for p in keep]
        )
        ds = int(np.prod([dims[p] for p in pos] or [1]))
        dk = self.out_side
        t2 = t.transpose(perm).reshape(batch + (ds, dk, ds, dk))
        res = np.einsum("st,...tasb->...ab", self.weight.mat, t2)
        return res.reshape(batch + (dk, dk))

    def entry_matrix(self):
        keep_embed, tr_embed = _embedding_tables(self.layout, self.traced)
        dk, dt = len(keep_embed), len(tr_embed)
        din = self.in_side
        w = self.weight.mat
        ss, tt = np.nonzero(w)
        vals = w[ss, tt]
        r = np.repeat(np.arange(dk), dk)
        c = np.tile(np.arange(dk), dk)
        rows = np.tile(r * dk + c, ss.size)
        cols = (
            (keep_embed[r][None, :] + tr_embed[tt][:, None]) * din
            + keep_embed[c][None, :]
            + tr_embed[ss][:, None]
        ).ravel()
        data = np.repeat(vals, dk * dk)
        return sp.csr_matrix((data, (rows, cols)), shape=(dk * dk, din * din))

    def adjoint(self):
        return TensorConstMap(self.weight, self.out_layout, self.layout.labels)


class ComposedMap(AffineMap):
    """outer after inner."""

    def __init__(self, outer: AffineMap, inner: AffineMap):
        if outer.in_side != inner.out_side:
            raise ValueError("map composition dimension mismatch")
        self.outer = outer
        self.inner = inner
        self.in_side = inner.in_side
        self.out_side = outer.out_side

    def apply(self, mats):
        return self.outer.apply(self.inner.apply(mats))

    def entry_matrix(self):
        return self.outer.entry_matrix() @ self.inner.entry_matrix()

    def adjoint(self):
        return ComposedMap(self.inner.adjoint(), self.outer.adjoint())


class EmbedMap(AffineMap):
    """Real symmetric embedding appended after an inner map (R-linear)."""

    def __init__(self, inner: AffineMap):
        self.inner = inner
        self.in_side = inner.in_side
        self.out_side = 2 * inner.out_side

    def apply(self, mats):
        return embed_hermitian(self.inner.apply(mats))

    def entry_matrix(self):  # pragma: no cover - guarded use
        raise NotImplementedError("the real embedding is not complex-linear")

    def adjoint(self):  # pragma: no cover - guarded use
        raise NotImplementedError("the real embedding is not complex-linear")


def embed_hermitian(mats: np.ndarray) -> np.ndarray:
    """[[Re H, -Im H], [Im H, Re H]]: real symmetric, PSD iff H is PSD.

    Each eigenvalue of H appears twice in the embedding.  Accepts a batch.
    """
    mats = np.asarray(mats)
    re, im = mats.real, mats.imag
    top = np.concatenate([re, -im], axis=-1)
    bot = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bot], axis=-2)


def _embed_entry_matrix(coeff: sp.spmatrix, side: int) -> sp.csr_matrix:
    """Real coefficient matrix of the embedded block from a complex one."""
    coo = coeff.tocoo()
    k = side
    ia, ib = coo.row // k, coo.row % k
    r00 = ia * (2 * k) + ib
    r01 = ia * (2 * k) + k + ib
    r10 = (k + ia) * (2 * k) + ib
    r11 = (k + ia) * (2 * k) + k + ib
    re, im = coo.data.real, coo.data.imag
    rows = np.concatenate([r00, r11, r01, r10])
    cols = np.concatenate([coo.col] * 4)
    data = np.concatenate([re, re, -im, im])
    return sp.csr_matrix((data, (rows, cols)), shape=(4 * k * k, coeff.shape[1]))


# ------------------------------------------------------------------ expressions


class MatrixExpr:
    """An affine Hermitian-matrix-valued expression in the declared variables."""

    def __init__(self, side: int, const: np.ndarray | None = None,
                 terms: Sequence[tuple[str, AffineMap]] = (),
                 layout: SystemLayout | None = None):
        self.side = int(side)
        self.const = (
            np.zeros((side, side), dtype=complex)
            if const is None
            else np.asarray(const, dtype=complex)
        )
        if self.const.shape != (side, side):
            raise ValueError("constant term shape mismatch")
        self.terms = list(terms)
        self.layout = layout

    def __add__(self, other: "MatrixExpr") -> "MatrixExpr":
        if self.side != other.side:
            raise ValueError("expression side mismatch")
        return MatrixExpr(self.side, self.const + other.const,
                          self.terms + other.terms, self.layout or other.layout)

    def __sub__(self, other: "MatrixExpr") -> "MatrixExpr":
        return self + (-other)

    def __neg__(self) -> "MatrixExpr":
        return self * (-1.0)

    def __mul__(self, alpha: float) -> "MatrixExpr":
        alpha = float(alpha)
        terms = [(v, ComposedMap(ScaleMap(m.out_side, alpha), m)) for v, m in self.terms]
        return MatrixExpr(self.side, alpha * self.const, terms, self.layout)

    __rmul__ = __mul__

    def map(self, m: AffineMap, layout: SystemLayout | None = None) -> "MatrixExpr":
        """Apply an affine map to the whole expression."""
        if m.in_side != self.side:
            raise ValueError("map input side does not match expression")
        terms = [(v, ComposedMap(m, inner)) for v, inner in self.terms]
        return MatrixExpr(m.out_side, m.apply(self.const), terms, layout)

    def evaluate(self, assignment: dict) -> np.ndarray:
        """Value of the expression at a given variable assignment."""
        out = self.const.copy()
        for name, amap in self.terms:
            val = assignment[name]
            if np.isscalar(val):
                val = np.array([[val]], dtype=complex)
            out = out + amap.apply(np.asarray(val, dtype=complex))
        return out


def var_expr(v: Variable) -> MatrixExpr:
    """The expression consisting of the variable itself."""
    if v.kind == "scalar":
        return MatrixExpr(1, terms=[(v.name, ScaleMap(1))])
    return MatrixExpr(v.side, terms=[(v.name, ScaleMap(v.side))], layout=v.layout)


def const_expr(mat: np.ndarray, layout: SystemLayout | None = None) -> MatrixExpr:
    mat = np.asarray(mat, dtype=complex)
    return MatrixExpr(mat.shape[0], const=mat, layout=layout)


def scalar_times(v: Variable, k_mat: np.ndarray, layout: SystemLayout | None = None) -> MatrixExpr:
    """x * K for a scalar variable x and constant Hermitian K."""
    if v.kind != "scalar":
        raise ValueError("scalar_times requires a scalar variable")
    k_mat = np.asarray(k_mat, dtype=complex)
    return MatrixExpr(k_mat.shape[0], terms=[(v.name, ScalarMatrixMap(k_mat))], layout=layout)


# ------------------------------------------------------------------ problems


class ConicProblem:
    """Hermitian matrix variables, PSD blocks, affine equalities, linear objective."""

    def __init__(self, name: str = ""):
        self.name = name
        self.variables: dict[str, Variable] = {}
        self.objective: dict[str, object] = {}
        self.psd_constraints: list[MatrixExpr] = []
        self.eq_constraints: list[MatrixExpr] = []

    # -------------------------------------------------------------- declaration

    def add_hermitian(self, name: str, layout: SystemLayout) -> Variable:
        if name in self.variables:
            raise ValueError(f"variable {name!r} already declared")
        v = Variable(name, layout.dim, "hermitian", layout)
        self.variables[name] = v
        return v

    def add_scalar(self, name: str) -> Variable:
        if name in self.variables:
            raise ValueError(f"variable {name!r} already declared")
        v = Variable(name, 1, "scalar")
        self.variables[name] = v
        return v

    def minimize(self, **coeffs) -> None:
        """Set the objective: scalar coefficients or Hermitian weight matrices.

        A Hermitian weight C on variable X contributes <C, X> = tr(C X).
        """
        for name, c in coeffs.items():
            if name not in self.variables:
                raise ValueError(f"objective references undeclared variable {name!r}")
            self.objective[name] = c

    def require_psd(self, expr: MatrixExpr) -> None:
        self._check_refs(expr)
        self.psd_constraints.append(expr)

    def require_eq_zero(self, expr: MatrixExpr) -> None:
        self._check_refs(expr)
        self.eq_constraints.append(expr)

    def _check_refs(self, expr: MatrixExpr) -> None:
        for name, _ in expr.terms:
            if name not in self.variables:
                raise ValueError(f"expression references undeclared variable {name!r}")

    def __repr__(self) -> str:
        return (
            f"ConicProblem({self.name!r}, {len(self.variables)} vars, "
            f"{len(self.psd_constraints)} psd blocks, {len(self.eq_constraints)} equalities)"
        )


def constrain_marginal_equals(
    problem: ConicProblem,
    var: Variable,
    traced_labels: Iterable[str],
    rhs: MatrixExpr,
) -> None:
    """Add the affine equality partial_trace(var, traced_labels) - rhs = 0.

    With an empty traced set this is a plain affine equality on the variable.
    """
    if var.layout is None:
        raise ValueError("marginal constraints require a layout-tagged variable")
    traced = tuple(traced_labels)
    lhs = var_expr(var)
    if traced:
        lhs = lhs.map(PartialTraceMap(var.layout, traced), var.layout.drop(traced))
    if lhs.side != rhs.side:
        raise ValueError(
            f"marginal side {lhs.side} does not match right-hand side {rhs.side}"
        )
    problem.require_eq_zero(lhs - rhs)


def hermitian_to_real_embedding(problem: ConicProblem) -> ConicProblem:
    """Replace every PSD block by its real symmetric embedding.

    PSD is preserved in both directions and equalities/objective are already
    real in the flattened coordinates, so the optimal value is unchanged.
    """
    out = ConicProblem(problem.name + "+embedded" if problem.name else "embedded")
    out.variables = dict(problem.variables)
    out.objective = dict(problem.objective)
    out.eq_constraints = list(problem.eq_constraints)
    for expr in problem.psd_constraints:
        terms = [(v, EmbedMap(m)) for v, m in expr.terms]
        out.psd_constraints.append(
            MatrixExpr(2 * expr.side, embed_hermitian(expr.const), terms)
        )
    return out


# ------------------------------------------------------------------ compilation


@lru_cache(maxsize=None)
def _herm_basis_matrix(side: int) -> sp.csr_matrix:
    """Sparse (side^2 entries) x (side^2 coords) orthonormal Hermitian basis.

    Coordinate order: (a, b) lexicographic over a <= b, the diagonal entry for
    a == b, and the (sqrt 2-scaled) real then imaginary parts for a < b.
    """
    rows, cols, data = [], [], []
    coord = 0
    s = 1.0 / np.sqrt(2.0)
    for a in range(side):
        for b in range(a, side):
            if a == b:
                rows.append(a * side + a)
                cols.append(coord)
                data.append(1.0)
                coord += 1
            else:
                rows += [a * side + b, b * side + a]
                cols += [coord, coord]
                data += [s, s]
                coord += 1
                rows += [a * side + b, b * side + a]
                cols += [coord, coord]
                data += [1j * s, -1j * s]
                coord += 1
    return sp.csr_matrix(
        (np.asarray(data, dtype=complex), (rows, cols)),
        shape=(side * side, side * side),
    )


def coords_to_matrix(x: np.ndarray, side: int) -> np.ndarray:
    hbm = _herm_basis_matrix(side)
    return (hbm @ np.asarray(x, dtype=float)).reshape(side, side)


def matrix_to_coords(mat: np.ndarray, side: int) -> np.ndarray:
    hbm = _herm_basis_matrix(side)
    return np.real(hbm.conj().T @ np.asarray(mat, dtype=complex).reshape(-1))


@dataclass
class CompiledBlock:
    """One PSD constraint in flattened form: mat(coeff @ x) + const >= 0."""

    side: int
    const: np.ndarray  # (side, side), complex or real
    coeff: sp.csr_matrix  # (side^2, n)
    is_real: bool


@dataclass
class CompiledProblem:
    """Flattened conic problem over a real coordinate vector x.

    minimize c @ x  subject to  A x = b  and every block PSD.
    """

    n: int
    c: np.ndarray
    a_eq: sp.csr_matrix
    b_eq: np.ndarray
    blocks: list[CompiledBlock]
    var_slices: dict[str, tuple[int, int, str, int]]  # name -> (off, ncoords, kind, side)
    name: str = ""

    def extract(self, x: np.ndarray) -> dict:
        out = {}
        for name, (off, nc, kind, side) in self.var_slices.items():
            if kind == "scalar":
                out[name] = float(x[off])
            else:
                out[name] = coords_to_matrix(x[off : off + nc], side)
        return out

    def antisym_mask(self) -> np.ndarray:
        """Boolean mask of coordinates multiplying antisymmetric basis elements."""
        mask = np.zeros(self.n, dtype=bool)
        for off, nc, kind, side in self.var_slices.values():
            if kind != "hermitian":
                continue
            pos = off
            for a in range(side):
                for b in range(a, side):
                    if a != b:
                        mask[pos + 1] = True
                        pos += 2
                    else:
                        pos += 1
        return mask

    def real_slice(self):
        """Restrict to real symmetric variables when the data allows it.

        If the problem is invariant under entrywise conjugation of all matrix
        variables (real constants, conjugation-covariant coefficients), an
        optimal solution exists with every Hermitian variable real symmetric,
        so the antisymmetric coordinates can be dropped.  Returns the reduced
        problem and the sparse lift ``x_full = S @ x_reduced``, or
        ``(None, None)`` when the reduction does not apply.
        """
        mask = self.antisym_mask()
        if not mask.any():
            return None, None
        d = np.where(mask, -1.0, 1.0)
        scale = max(
            [1.0]
            + [abs(blk.const).max() for blk in self.blocks if blk.const.size]
            + [abs(blk.coeff).max() if blk.coeff.nnz else 0.0 for blk in self.blocks]
        )
        tol = 1e-13 * scale
        if np.abs(self.c[mask]).max(initial=0.0) > tol:
            return None, None
        for blk in self.blocks:
            if blk.const.size and np.abs(blk.const.imag).max() > tol:
                return None, None
            dev = blk.coeff.conj() - blk.coeff @ sp.diags(d)
            if dev.nnz and np.abs(dev.data).max() > tol:
                return None, None
        if self.a_eq.shape[0]:
            ad = self.a_eq @ sp.diags(d)
            plus = ad - self.a_eq
            minus = ad + self.a_eq
            plus_dev = np.zeros(self.a_eq.shape[0])
            minus_dev = np.zeros(self.a_eq.shape[0])
            if plus.nnz:
                plus_dev = np.abs(plus).max(axis=1).toarray().reshape(-1)
            if minus.nnz:
                minus_dev = np.abs(minus).max(axis=1).toarray().reshape(-1)
            eq_scale = max(1.0, np.abs(self.b_eq).max(initial=0.0))
            for i in range(self.a_eq.shape[0]):
                if plus_dev[i] <= tol * eq_scale:
                    continue
                if minus_dev[i] <= tol * eq_scale and abs(self.b_eq[i]) <= tol * eq_scale:
                    continue
                return None, None
        keep = np.where(~mask)[0]
        s_lift = sp.csr_matrix(
            (np.ones(keep.size), (keep, np.arange(keep.size))), shape=(self.n, keep.size)
        )
        blocks = [
            CompiledBlock(
                blk.side,
                blk.const.real.copy(),
                sp.csr_matrix(blk.coeff.tocsc()[:, keep].real),
                True,
            )
            for blk in self.blocks
        ]
        reduced = CompiledProblem(
            keep.size,
            self.c[keep],
            sp.csr_matrix(self.a_eq[:, keep]),
            self.b_eq.copy(),
            blocks,
            {},
            self.name,
        )
        return reduced, s_lift

    def realify(self) -> "CompiledProblem":
        """Embed complex blocks as real symmetric ones; keep real blocks as is."""
        blocks = []
        for blk in self.blocks:
            if blk.is_real:
                blocks.append(blk)
                continue
            imag_scale = abs(blk.const.imag).max() if blk.const.size else 0.0
            coeff_imag = abs(blk.coeff.imag).max() if blk.coeff.nnz else 0.0
            if max(imag_scale, coeff_imag) == 0.0:
                blocks.append(
                    CompiledBlock(blk.side, blk.const.real.copy(), sp.csr_matrix(blk.coeff.real), True)
                )
            else:
                blocks.append(
                    CompiledBlock(
                        2 * blk.side,
                        embed_hermitian(blk.const),
                        _embed_entry_matrix(blk.coeff, blk.side),
                        True,
                    )
                )
        return CompiledProblem(self.n, self.c, self.a_eq, self.b_eq, blocks, self.var_slices, self.name)


def compile_problem(problem: ConicProblem) -> CompiledProblem:
    """Flatten a ConicProblem over real Hermitian coordinates."""
    var_slices: dict[str, tuple[int, int, str, int]] = {}
    off = 0
    for v in problem.variables.values():
        var_slices[v.name] = (off, v.n_coords, v.kind, v.side)
        off += v.n_coords
    n = off

    c = np.zeros(n)
    for name, w in problem.objective.items():
        o, nc, kind, side = var_slices[name]
        if kind == "scalar":
            c[o] = float(w)  # type: ignore[arg-type]
        else:
            wmat = w.mat if isinstance(w, HermitianOperator) else np.asarray(w)
            c[o : o + nc] = matrix_to_coords(wmat, side)

    def expr_coeff(expr: MatrixExpr) -> sp.csr_matrix:
        d2 = expr.side * expr.side
        acc = sp.csr_matrix((d2, n), dtype=complex)
        for name, amap in expr.terms:
            o, nc, kind, side = var_slices[name]
            hbm = _herm_basis_matrix(side) if kind == "hermitian" else sp.identity(1, dtype=complex, format="csr")
            if isinstance(amap, EmbedMap):
                cols = _embed_entry_matrix(amap.inner.entry_matrix() @ hbm, amap.inner.out_side)
                cols = sp.csr_matrix(cols, dtype=complex)
            else:
                cols = amap.entry_matrix() @ hbm
            coo = cols.tocoo()
            pad = sp.csr_matrix((coo.data, (coo.row, coo.col + o)), shape=(d2, n))
            acc = acc + pad
        return acc.tocsr()

    rows = []
    rhs = []
    for expr in problem.eq_constraints:
        coeff = expr_coeff(expr)
        const = expr.const.reshape(-1)
        rows.append(sp.csr_matrix(coeff.real))
        rhs.append(-const.real)
        rows.append(sp.csr_matrix(coeff.imag))
        rhs.append(-const.imag)
    if rows:
        a_eq = sp.vstack(rows, format="csr")
        b_eq = np.concatenate(rhs)
        keep = np.asarray((abs(a_eq) @ np.ones(n) + np.abs(b_eq)) > 0).reshape(-1)
        a_eq = a_eq[keep]
        b_eq = b_eq[keep]
    else:
        a_eq = sp.csr_matrix((0, n))
        b_eq = np.zeros(0)

    blocks = []
    for expr in problem.psd_constraints:
        coeff = expr_coeff(expr)
        is_real = (
            abs(expr.const.imag).max() if expr.const.size else 0.0
        ) == 0.0 and (abs(coeff.imag).max() if coeff.nnz else 0.0) == 0.0
        const = expr.const.real.copy() if is_real else expr.const.copy()
        blocks.append(CompiledBlock(expr.side, const, sp.csr_matrix(coeff.real) if is_real else coeff, is_real))

    return CompiledProblem(n, c, a_eq, b_eq, blocks, var_slices, problem.name)


# ------------------------------------------------------------------ dump


def dump_problem(problem: ConicProblem, path: str, *, max_coords: int = 20000) -> None:
    """Serialize a compiled problem (dense coefficients) for cross-solver debugging."""
    cp = compile_problem(problem)
    if cp.n > max_coords:
        raise ValueError(f"problem too large to dump densely ({cp.n} coordinates)")
    data = {
        "name": cp.name,
        "n": cp.n,
        "variables": {
            name: {"offset": off, "coords": nc, "kind": kind, "side": side}
            for name, (off, nc, kind, side) in cp.var_slices.items()
        },
        "objective": cp.c.tolist(),
        "equalities": {
            "matrix": cp.a_eq.toarray().tolist(),
            "rhs": cp.b_eq.tolist(),
        },
        "psd_blocks": [
            {
                "side": blk.side,
                "const_re": blk.const.real.reshape(-1).tolist(),
                "const_im": np.imag(blk.const).reshape(-1).tolist(),
                "coeff_re": np.real(blk.coeff.toarray()).tolist(),
                "coeff_im": np.imag(blk.coeff.toarray()).tolist(),
            }
            for blk in cp.blocks
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh)
