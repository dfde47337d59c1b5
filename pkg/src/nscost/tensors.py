"""Dense complex linear algebra over labeled tensor-product spaces.

Operators carry a :class:`SystemLayout` that names their subsystems, so that
partial traces, permutations and tensor products can be requested by label
instead of by axis bookkeeping.  The computational-basis ordering is
row-major: the basis index of a composite state is the mixed-radix number
over subsystem dimensions in layout order (numpy's C order).
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

#: Hermiticity tolerance enforced on construction.
TOL_HERM = 1e-10


class SystemLayout:
    """Ordered, labeled subsystems with dimensions.

    A trivial subsystem is represented with dimension 1; this is how
    point-to-point channels are embedded into the bipartite formalism.
    """

    __slots__ = ("_systems",)

    def __init__(self, systems: Iterable[tuple[str, int]]):
        systems = tuple((str(lbl), int(d)) for lbl, d in systems)
        labels = [lbl for lbl, _ in systems]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate labels in layout: {labels}")
        for lbl, d in systems:
            if d < 1:
                raise ValueError(f"subsystem {lbl!r} has non-positive dimension {d}")
        self._systems = systems

    @property
    def systems(self) -> tuple[tuple[str, int], ...]:
        return self._systems

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lbl for lbl, _ in self._systems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self._systems)

    @property
    def dim(self) -> int:
        out = 1
        for _, d in self._systems:
            out *= d
        return out

    @property
    def nsys(self) -> int:
        return len(self._systems)

    def dim_of(self, label: str) -> int:
        return self._systems[self.position(label)][1]

    def position(self, label: str) -> int:
        for i, (lbl, _) in enumerate(self._systems):
            if lbl == label:
                return i
        raise KeyError(f"unknown label {label!r}; layout has {self.labels}")

    def positions(self, labels: Sequence[str]) -> tuple[int, ...]:
        return tuple(self.position(lbl) for lbl in labels)

    def subset(self, labels: Iterable[str]) -> "SystemLayout":
        """Sub-layout with the given labels, kept in this layout's order."""
        keep = set(labels)
        missing = keep - set(self.labels)
        if missing:
            raise KeyError(f"unknown labels {sorted(missing)}; layout has {self.labels}")
        return SystemLayout([(l, d) for l, d in self._systems if l in keep])

    def drop(self, labels: Iterable[str]) -> "SystemLayout":
        """Sub-layout with the given labels removed, remaining order preserved."""
        gone = set(labels)
        missing = gone - set(self.labels)
        if missing:
            raise KeyError(f"unknown labels {sorted(missing)}; layout has {self.labels}")
        return SystemLayout([(l, d) for l, d in self._systems if l not in gone])

    def tensor(self, other: "SystemLayout") -> "SystemLayout":
        overlap = set(self.labels) & set(other.labels)
        if overlap:
            raise ValueError(f"label collision in tensor product: {sorted(overlap)}")
        return SystemLayout(self._systems + other._systems)

    def permuted(self, new_order: Sequence[str]) -> "SystemLayout":
        if sorted(new_order) != sorted(self.labels):
            raise ValueError(
                f"{list(new_order)} is not a permutation of layout labels {self.labels}"
            )
        return SystemLayout([(l, self.dim_of(l)) for l in new_order])

    def __eq__(self, other) -> bool:
        return isinstance(other, SystemLayout) and self._systems == other._systems

    def __hash__(self) -> int:
        return hash(self._systems)

    def __repr__(self) -> str:
        inner = ", ".join(f"{l}:{d}" for l, d in self._systems)
        return f"SystemLayout({inner})"


def _check_hermitian(mat: np.ndarray, tol: float) -> np.ndarray:
    dev = np.abs(mat - mat.conj().T).max() if mat.size else 0.0
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian within {tol:g} (deviation {dev:.3e})")
    return (mat + mat.conj().T) / 2.0


class HermitianOperator:
    """A dense complex square matrix tagged with a :class:`SystemLayout`.

    Hermiticity is validated on construction (tolerance ``TOL_HERM``) and the
    matrix is then symmetrized, absorbing floating-point drift before any SDP
    assembly.  Instances are immutable values and safe to share.
    """

    __slots__ = ("layout", "mat")

    def __init__(self, layout: SystemLayout, mat: np.ndarray, *, tol: float = TOL_HERM):
        mat = np.asarray(mat, dtype=complex)
        d = layout.dim
        if mat.shape != (d, d):
            raise ValueError(f"matrix shape {mat.shape} does not match layout dimension {d}")
        mat = _check_hermitian(mat, tol)
        mat.flags.writeable = False
        self.layout = layout
        self.mat = mat

    # ---------------------------------------------------------------- constructors

    @classmethod
    def identity(cls, layout: SystemLayout) -> "HermitianOperator":
        return cls(layout, np.eye(layout.dim, dtype=complex))

    @classmethod
    def maximally_mixed(cls, layout: SystemLayout) -> "HermitianOperator":
        d = layout.dim
        return cls(layout, np.eye(d, dtype=complex) / d)

    @classmethod
    def zero(cls, layout: SystemLayout) -> "HermitianOperator":
        d = layout.dim
        return cls(layout, np.zeros((d, d), dtype=complex))

    # ---------------------------------------------------------------- arithmetic

    def __add__(self, other: "HermitianOperator") -> "HermitianOperator":
        if self.layout != other.layout:
            raise ValueError("layout mismatch in addition")
        return HermitianOperator(self.layout, self.mat + other.mat, tol=np.inf)

    def __sub__(self, other: "HermitianOperator") -> "HermitianOperator":
        if self.layout != other.layout:
            raise ValueError("layout mismatch in subtraction")
        return HermitianOperator(self.layout, self.mat - other.mat, tol=np.inf)

    def __mul__(self, scalar: float) -> "HermitianOperator":
        return HermitianOperator(self.layout, self.mat * float(scalar), tol=np.inf)

    __rmul__ = __mul__

    def __neg__(self) -> "HermitianOperator":
        return self * (-1.0)

    # ---------------------------------------------------------------- queries

    @property
    def dim(self) -> int:
        return self.layout.dim

    def trace(self) -> float:
        return float(np.trace(self.mat).real)

    def max_abs(self) -> float:
        return float(np.abs(self.mat).max()) if self.mat.size else 0.0

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.mat)[0])

    def is_psd(self, tol: float = 1e-9) -> bool:
        return self.min_eigenvalue() >= -tol

    def _as_tensor(self) -> np.ndarray:
        dims = self.layout.dims
        return self.mat.reshape(dims + dims)

    # ---------------------------------------------------------------- structure ops

    def tensor(self, other: "HermitianOperator") -> "HermitianOperator":
        layout = self.layout.tensor(other.layout)
        return HermitianOperator(layout, np.kron(self.mat, other.mat), tol=np.inf)

    def partial_trace(self, traced_labels: Iterable[str]) -> "HermitianOperator":
        traced = tuple(traced_labels)
        layout = self.layout
        pos = layout.positions(traced)  # raises on unknown label
        n = layout.nsys
        t = self._as_tensor()
        in_idx = list(range(2 * n))
        for p in pos:
            in_idx[n + p] = in_idx[p]
        keep = [p for p in range(n) if p not in pos]
        out_idx = [p for p in keep] + [n + p for p in keep]
        out_layout = layout.drop(traced)
        d = out_layout.dim
        res = np.einsum(t, in_idx, out_idx).reshape(d, d)
        return HermitianOperator(out_layout, res, tol=np.inf)

    def permute(self, new_order: Sequence[str]) -> "HermitianOperator":
        layout = self.layout.permuted(new_order)  # validates the permutation
        n = self.layout.nsys
        axes = list(self.layout.positions(new_order))
        t = self._as_tensor().transpose(axes + [n + a for a in axes])
        d = layout.dim
        return HermitianOperator(layout, t.reshape(d, d), tol=np.inf)

    def partial_transpose(self, labels: Iterable[str]) -> "HermitianOperator":
        """Transpose the bra/ket indices of the given subsystems.

        The result of a partial transpose of a Hermitian operator is again
        Hermitian.  Used for link products when composing channels.
        """
        pos = self.layout.positions(tuple(labels))
        n = self.layout.nsys
        axes = list(range(2 * n))
        for p in pos:
            axes[p], axes[n + p] = axes[n + p], axes[p]
        d = self.dim
        t = self._as_tensor().transpose(axes)
        return HermitianOperator(self.layout, t.reshape(d, d), tol=np.inf)

    def __repr__(self) -> str:
        return f"HermitianOperator({self.layout!r}, dim={self.dim})"


class MaxEntangledVector:
    """The unnormalized vector sum_i |i>|i> across two isomorphic subsystems."""

    __slots__ = ("layout", "vec")

    def __init__(self, layout: SystemLayout):
        if layout.nsys != 2 or layout.dims[0] != layout.dims[1]:
            raise ValueError("layout must consist of two subsystems of equal dimension")
        d = layout.dims[0]
        vec = np.zeros(d * d, dtype=complex)
        vec[:: d + 1] = 1.0
        vec.flags.writeable = False
        self.layout = layout
        self.vec = vec

    @property
    def subsystem_dim(self) -> int:
        return self.layout.dims[0]

    def norm_squared(self) -> float:
        return float(np.vdot(self.vec, self.vec).real)

    def projector(self) -> HermitianOperator:
        return HermitianOperator(self.layout, np.outer(self.vec, self.vec.conj()), tol=np.inf)


# ------------------------------------------------------------------ module-level ops


def tensor(a: HermitianOperator, b: HermitianOperator) -> HermitianOperator:
    """Kronecker product with concatenated layout; trace is multiplicative."""
    return a.tensor(b)


def partial_trace(op: HermitianOperator, traced_labels: Iterable[str]) -> HermitianOperator:
    """Trace out the given subsystems, keeping the remaining labels in order."""
    return op.partial_trace(traced_labels)


def permute_systems(op: HermitianOperator, new_order: Sequence[str]) -> HermitianOperator:
    """Reindex the operator so its subsystems appear in ``new_order``."""
    return op.permute(new_order)


def min_eigenvalue(op: HermitianOperator) -> float:
    """Smallest eigenvalue; ``is_psd(op, tol)`` is ``min_eigenvalue(op) >= -tol``."""
    return op.min_eigenvalue()
