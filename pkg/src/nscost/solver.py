"""Dense primal-dual interior-point solver for the compiled conic problems.

The native backend solves, after eliminating affine equalities against a
nullspace basis, the inequality form

    minimize    c . u
    subject to  F_j(u) = F0_j + sum_i u_i F_ji  is PSD for every block j,

by an infeasible-start path-following method with Nesterov-Todd scaling and a
Mehrotra predictor-corrector step.  Each iteration forms the Schur complement
M_ik = sum_j <F_ji, W^-1 F_jk W^-1> and factors it by dense Cholesky.

``solve`` is the backend seam: the reference interior-point method is the
default implementation and adapters to external conic solvers (cvxopt's
conelp, SCS) can be swapped in behind the same contract, which is how the
test suite cross-validates solutions.  Before dispatch two value-preserving
reductions run: a conjugation-symmetry slice that fixes antisymmetric
coordinates to zero when the problem data is real, and the real symmetric
embedding of any remaining complex Hermitian blocks.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .conic import CompiledProblem, ConicProblem, compile_problem

__all__ = [
    "SolverConfig",
    "SolveReport",
    "SolverError",
    "ProblemTooLargeError",
    "solve",
    "register_backend",
]


class SolverError(RuntimeError):
    pass


class ProblemTooLargeError(SolverError):
    """The dense native backend refuses problems beyond its size envelope."""


@dataclass
class SolverConfig:
    """Interior-point options; tolerances must be positive, step fraction < 1.

    ``NSCOST_TOL_GAP`` and ``NSCOST_MAX_ITERS`` override the defaults from the
    environment; explicit constructor arguments take precedence over both.
    """

    max_iters: int = 200
    tol_gap: float = 1e-8
    tol_feas: float = 1e-8
    step_fraction: float = 0.98
    backend: str = "native"
    verbose: bool = False

    def __post_init__(self):
        if self.tol_gap <= 0 or self.tol_feas <= 0:
            raise ValueError("tolerances must be positive")
        if not 0.0 < self.step_fraction < 1.0:
            raise ValueError("step_fraction must lie in (0, 1)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")

    @classmethod
    def from_env(cls, **overrides) -> "SolverConfig":
        kw = {}
        if "NSCOST_TOL_GAP" in os.environ:
            kw["tol_gap"] = float(os.environ["NSCOST_TOL_GAP"])
        if "NSCOST_MAX_ITERS" in os.environ:
            kw["max_iters"] = int(os.environ["NSCOST_MAX_ITERS"])
        kw.update(overrides)
        return cls(**kw)


@dataclass
class SolveReport:
    """Outcome of one solve: values, certificates, residuals, iteration count."""

    status: str  # optimal | near_optimal | infeasible | iteration_limit | numerical_failure
    primal_value: float
    dual_value: float
    gap: float
    primal_solution: dict
    dual_solution: dict
    iterations: int
    residuals: dict = field(default_factory=dict)
    backend: str = "native"
    solve_seconds: float = 0.0
    problem_name: str = ""

    @property
    def ok(self) -> bool:
        return self.status in ("optimal", "near_optimal")

    def require_ok(self) -> "SolveReport":
        if not self.ok:
            raise SolverError(
                f"solver returned status {self.status!r} on problem {self.problem_name!r}"
            )
        return self


@dataclass
class _RawResult:
    status: str
    x: np.ndarray
    psd_duals: list
    eq_duals: np.ndarray
    pobj: float
    dobj: float
    gap: float
    iterations: int
    residuals: dict = field(default_factory=dict)


# ------------------------------------------------------------------ presolve


#: Largest dense coefficient tensor (n_reduced * sum of block sides squared)
#: the native backend will materialize.
_NATIVE_TENSOR_CAP = 2.0e8
_NATIVE_EQ_CAP = 8.0e7


def _presolve(cp: CompiledProblem):
    """Particular solution + nullspace basis of the equality constraints.

    Returns (x0, nullbasis, eq_ok).  ``nullbasis`` is None when there are no
    equalities (identity).  ``eq_ok`` is False when they are inconsistent.
    """
    a, b = cp.a_eq, cp.b_eq
    m_all, n = a.shape
    row_mask = np.ones(m_all, dtype=bool)
    if m_all:
        a = a.copy()
        a.eliminate_zeros()
        # Rows can become identically zero after the conjugation slice.
        row_mask = (np.diff(a.indptr) > 0) | (np.abs(b) > 0)
        if not row_mask.all():
            a, b = a[row_mask], b[row_mask]
    m = a.shape[0]
    if m == 0:
        return np.zeros(n), None, True, None
    if m * n > _NATIVE_EQ_CAP:
        raise ProblemTooLargeError(
            f"equality system {m}x{n} exceeds the dense native presolve cap"
        )
    ad = a.toarray()
    # One SVD provides the least-squares particular solution, the rank, an
    # orthonormal nullspace basis, and the multiplier recovery factors.
    u_svd, sing, vt = sla.svd(ad, full_matrices=(m < n))
    if sing.size and sing[0] > 0:
        rank = int(np.sum(sing > max(m, n) * np.finfo(float).eps * sing[0]))
    else:
        rank = 0
    x0 = vt[:rank].T @ ((u_svd[:, :rank].T @ b) / sing[:rank]) if rank else np.zeros(n)
    resid = np.abs(ad @ x0 - b).max() if m else 0.0
    if resid > 1e-8 * (1.0 + np.abs(b).max()):
        return x0, None, False, None
    nullbasis = vt[rank:].T
    factors = (u_svd, sing, vt, rank, row_mask)
    return x0, nullbasis, True, factors


def _reduced_data(cp: CompiledProblem, x0: np.ndarray, nullbasis):
    """Densify the blocks in the reduced coordinates u (x = x0 + N u)."""
    n_red = cp.n if nullbasis is None else nullbasis.shape[1]
    total = sum(blk.side * blk.side for blk in cp.blocks)
    if n_red * total > _NATIVE_TENSOR_CAP:
        raise ProblemTooLargeError(
            f"dense block tensor would hold {n_red * total:.2e} entries; "
            "use the 'scs' backend for problems of this size"
        )
    f0s, fxs = [], []
    for blk in cp.blocks:
        k = blk.side
        coeff = blk.coeff  # real csr (k^2, n)
        base = blk.const + (coeff @ x0).reshape(k, k)
        g = (coeff @ nullbasis) if nullbasis is not None else coeff.toarray()
        fx = np.ascontiguousarray(np.asarray(g).T.reshape(n_red, k, k))
        fx = (fx + fx.transpose(0, 2, 1)) / 2.0
        f0s.append((base + base.T) / 2.0)
        fxs.append(fx)
    c_red = cp.c if nullbasis is None else nullbasis.T @ cp.c
    c_off = float(cp.c @ x0)
    return c_red, c_off, f0s, fxs, n_red


# ------------------------------------------------------------------ native IPM


def _max_step(lam: np.ndarray, delta_tilde: np.ndarray) -> float:
    """Largest alpha with Lambda + alpha * delta_tilde PSD (scaled space)."""
    d = delta_tilde / np.sqrt(np.outer(lam, lam))
    nu = sla.eigvalsh((d + d.T) / 2.0)[0]
    if nu >= -1e-14:
        return np.inf
    return -1.0 / nu


def _native_ipm(c, c_off, f0s, fxs, cfg: SolverConfig):
    nblk = len(f0s)
    ktot = sum(f.shape[0] for f in f0s)
    n = c.shape[0]

    if nblk == 0:
        raise SolverError("problem has no PSD blocks")

    if n == 0:
        lam_min = min(float(sla.eigvalsh(f)[0]) for f in f0s)
        status = "optimal" if lam_min >= -10 * cfg.tol_feas else "infeasible"
        zs = [np.zeros_like(f) for f in f0s]
        return status, np.zeros(0), zs, {
            "pobj": c_off, "dobj": c_off, "gap": 0.0,
            "pres": max(0.0, -lam_min), "dres": 0.0, "iterations": 0,
        }

    fflat = [fx.reshape(n, -1) for fx in fxs]

    # Cold start: shift the constant terms until solidly PSD, unit-scale duals.
    s_mats, z_mats = [], []
    for f0 in f0s:
        ev = float(sla.eigvalsh(f0)[0])
        scale = max(1.0, float(np.abs(f0).max()))
        shift = max(0.0, -1.5 * ev) + 0.5 * scale
        s_mats.append(f0 + shift * np.eye(f0.shape[0]))
        z_mats.append(np.eye(f0.shape[0]) * max(1.0, float(np.abs(c).max())))
    u = np.zeros(n)

    best = None
    metrics = last_metrics = None
    status = "iteration_limit"
    iters_done = 0
    z_norm0 = ktot

    for it in range(cfg.max_iters):
        iters_done = it
        # Nesterov-Todd scaling per block.
        rs, rinvs, lams = [], [], []
        try:
            for s, z in zip(s_mats, z_mats):
                ls = sla.cholesky(s, lower=True)
                lz = sla.cholesky(z, lower=True)
                uu, sig, vt = sla.svd(ls.T @ lz)
                sig = np.maximum(sig, 1e-300)
                r = ls @ uu * (sig ** -0.5)
                rinv = (sig ** 0.5)[:, None] * (
                    sla.solve_triangular(ls, uu, lower=True, trans="T").T
                )
                rs.append(r)
                rinvs.append(rinv)
                lams.append(sig)
        except sla.LinAlgError:
            status = "numerical_failure"
            break

        mu = sum(float(l @ l) for l in lams) / ktot

        # Residuals at the current iterate; rd_i = c_i - sum_j <F_ji, Z_j>.
        fu = [f0 + np.tensordot(u, fx, axes=1) for f0, fx in zip(f0s, fxs)]
        rp = [f - s for f, s in zip(fu, s_mats)]
        rd = c - sum(ff @ z.reshape(-1) for ff, z in zip(fflat, z_mats))

        pobj = float(c @ u) + c_off
        dobj = c_off - sum(float(np.vdot(f0, z).real) for f0, z in zip(f0s, z_mats))
        cgap = sum(float(np.vdot(s, z).real) for s, z in zip(s_mats, z_mats))
        relgap = cgap / (1.0 + abs(pobj) + abs(dobj))
        pres = max(
            float(np.linalg.norm(r)) / (1.0 + float(np.linalg.norm(f0)))
            for r, f0 in zip(rp, f0s)
        )
        dres = float(np.linalg.norm(rd)) / (1.0 + float(np.linalg.norm(c)))

        metrics = last_metrics = {
            "pobj": pobj, "dobj": dobj, "gap": relgap,
            "pres": pres, "dres": dres, "iterations": it,
        }
        if cfg.verbose:
            print(
                f"  it {it:3d}  pobj {pobj:+.9e}  dobj {dobj:+.9e} "
                f"gap {relgap:.2e}  pres {pres:.2e}  dres {dres:.2e}"
            )
        score = max(relgap, pres, dres)
        if best is None or score < best[0]:
            best = (score, u.copy(), [z.copy() for z in z_mats], metrics)

        if relgap <= cfg.tol_gap and pres <= cfg.tol_feas and dres <= cfg.tol_feas:
            status = "optimal"
            break

        # Dual-improving-ray heuristic for primal infeasibility.
        z_norm = sum(float(np.linalg.norm(z)) for z in z_mats)
        if z_norm > 1e7 * z_norm0:
            hom = float(np.linalg.norm(c - rd)) / z_norm
            val = sum(float(np.vdot(f0, z).real) for f0, z in zip(f0s, z_mats)) / z_norm
            if hom < 1e-7 and val < -1e-9:
                status = "infeasible"
                break

        # Scaled quantities shared by predictor and corrector.
        ftil = [rinv @ fx @ rinv.T for rinv, fx in zip(rinvs, fxs)]
        vflat = [ft.reshape(n, -1) for ft in ftil]
        schur = np.zeros((n, n))
        for vf in vflat:
            schur += vf @ vf.T
        schur += np.eye(n) * (1e-13 * (1.0 + float(schur.diagonal().max())))
        try:
            schur_cf = sla.cho_factor(schur, lower=True)
        except sla.LinAlgError:
            status = "numerical_failure"
            break
        rp_til = [rinv @ r @ rinv.T for rinv, r in zip(rinvs, rp)]

        def kkt_solve(e_list):
            h = -rd.copy()
            for vf, e, rt in zip(vflat, e_list, rp_til):
                h += vf @ (e - rt).reshape(-1)
            du = sla.cho_solve(schur_cf, h)
            du += sla.cho_solve(schur_cf, h - schur @ du)  # one refinement step
            ds = [r + np.tensordot(du, fx, axes=1) for r, fx in zip(rp, fxs)]
            dz = []
            for rinv, e, d in zip(rinvs, e_list, ds):
                dst = rinv @ d @ rinv.T
                zt = rinv.T @ (e - dst) @ rinv
                dz.append((zt + zt.T) / 2.0)
            return du, [(d + d.T) / 2.0 for d in ds], dz

        # Predictor (affine scaling direction).
        e_aff = [-np.diag(l) for l in lams]
        du_a, ds_a, dz_a = kkt_solve(e_aff)
        ap = min(_max_step(l, rinv @ d @ rinv.T) for l, rinv, d in zip(lams, rinvs, ds_a))
        ad = min(_max_step(l, r.T @ d @ r) for l, r, d in zip(lams, rs, dz_a))
        alpha_aff = min(1.0, cfg.step_fraction * ap, cfg.step_fraction * ad)
        mu_aff = 0.0
        for l, rinv, r_, dsj, dzj in zip(lams, rinvs, rs, ds_a, dz_a):
            st = np.diag(l) + alpha_aff * (rinv @ dsj @ rinv.T)
            zt = np.diag(l) + alpha_aff * (r_.T @ dzj @ r_)
            mu_aff += float(np.vdot(st, zt).real)
        mu_aff /= ktot
        sigma = min(1.0, max((mu_aff / mu) ** 3, 1e-10))

        # Corrector (combined direction).
        e_comb = []
        for l, rinv, r_, dsj, dzj in zip(lams, rinvs, rs, ds_a, dz_a):
            dst = rinv @ dsj @ rinv.T
            dzt = r_.T @ dzj @ r_
            cross = (dst @ dzt + dzt @ dst) / 2.0
            target = sigma * mu * np.eye(l.size) - np.diag(l * l) - (cross + cross.T) / 2.0
            e_comb.append(2.0 * target / np.add.outer(l, l))
        du, ds, dz = kkt_solve(e_comb)
        ap = min(_max_step(l, rinv @ d @ rinv.T) for l, rinv, d in zip(lams, rinvs, ds))
        ad = min(_max_step(l, r.T @ d @ r) for l, r, d in zip(lams, rs, dz))
        alpha_p = min(1.0, cfg.step_fraction * ap)
        alpha_d = min(1.0, cfg.step_fraction * ad)
        if alpha_p < 1e-10 and alpha_d < 1e-10:
            status = "numerical_failure" if score > 1e3 * cfg.tol_gap else "iteration_limit"
            break

        u = u + alpha_p * du
        s_mats = [s + alpha_p * d for s, d in zip(s_mats, ds)]
        z_mats = [z + alpha_d * d for z, d in zip(z_mats, dz)]
    else:
        iters_done = cfg.max_iters

    if best is None:
        nan = float("nan")
        return "numerical_failure", u, z_mats, {
            "pobj": nan, "dobj": nan, "gap": nan,
            "pres": nan, "dres": nan, "iterations": iters_done,
        }
    if status in ("iteration_limit", "numerical_failure"):
        _, ub, zb, bm = best
        u, z_mats = ub, zb
        metrics = dict(bm)
        if (
            bm["gap"] <= 10 * cfg.tol_gap
            and bm["pres"] <= 10 * cfg.tol_feas
            and bm["dres"] <= 10 * cfg.tol_feas
        ):
            status = "near_optimal"
    else:
        metrics = dict(last_metrics)
    metrics["iterations"] = iters_done
    return status, u, z_mats, metrics


def _native_backend(cp: CompiledProblem, cfg: SolverConfig) -> _RawResult:
    x0, nullbasis, eq_ok, eq_factors = _presolve(cp)
    if not eq_ok:
        nan = float("nan")
        return _RawResult(
            "infeasible", np.zeros(cp.n), [np.zeros((b.side, b.side)) for b in cp.blocks],
            np.zeros(cp.a_eq.shape[0]), nan, nan, nan, 0,
            {"equality": "inconsistent"},
        )
    c_red, c_off, f0s, fxs, n_red = _reduced_data(cp, x0, nullbasis)
    status, u, z_mats, metrics = _native_ipm(c_red, c_off, f0s, fxs, cfg)

    if nullbasis is None:
        x = x0 + u
    elif u.size:
        x = x0 + nullbasis @ u
    else:
        x = x0
    # Equality multipliers from stationarity: A^T y = c - sum_j coeff_j^T vec(Z_j),
    # solved in least squares through the presolve SVD factors.
    rhs = cp.c.copy()
    for blk, z in zip(cp.blocks, z_mats):
        rhs -= blk.coeff.T @ z.reshape(-1)
    y = np.zeros(cp.a_eq.shape[0])
    if eq_factors is not None:
        u_svd, sing, vt, rank, row_mask = eq_factors
        y_kept = u_svd[:, :rank] @ ((vt[:rank] @ rhs) / sing[:rank]) if rank else np.zeros(0)
        y[row_mask] = y_kept
    if cp.a_eq.shape[0]:
        dual_value = float(cp.b_eq @ y) - sum(
            float(np.vdot(blk.const, z).real) for blk, z in zip(cp.blocks, z_mats)
        )
    else:
        dual_value = -sum(
            float(np.vdot(blk.const, z).real) for blk, z in zip(cp.blocks, z_mats)
        )
    return _RawResult(
        status, x, z_mats, y, metrics["pobj"], dual_value, metrics["gap"],
        metrics["iterations"], {"primal": metrics["pres"], "dual": metrics["dres"]},
    )


# ------------------------------------------------------------------ adapters


def _cvxopt_backend(cp: CompiledProblem, cfg: SolverConfig) -> _RawResult:
    import cvxopt
    import cvxopt.solvers

    x0, nullbasis, eq_ok, _ = _presolve(cp)
    nan = float("nan")
    if not eq_ok:
        return _RawResult("infeasible", np.zeros(cp.n), [], np.zeros(0), nan, nan, nan, 0)
    c_red, c_off, f0s, fxs, n_red = _reduced_data(cp, x0, nullbasis)
    gs = [cvxopt.matrix(-fx.reshape(n_red, -1).T) for fx in fxs]
    hs = [cvxopt.matrix(f0) for f0 in f0s]
    opts = {"show_progress": cfg.verbose, "maxiters": cfg.max_iters,
            "abstol": cfg.tol_gap, "reltol": cfg.tol_gap, "feastol": cfg.tol_feas}
    sol = cvxopt.solvers.sdp(cvxopt.matrix(c_red), Gs=gs, hs=hs, options=opts)
    mapping = {"optimal": "optimal", "unknown": "iteration_limit",
               "primal infeasible": "infeasible", "dual infeasible": "infeasible"}
    status = mapping.get(sol["status"], "numerical_failure")
    if sol["x"] is None:
        return _RawResult(status, np.zeros(cp.n), [], np.zeros(0), nan, nan, nan, 0)
    u = np.asarray(sol["x"]).reshape(-1)
    x = x0 + u if nullbasis is None else x0 + nullbasis @ u
    duals = [np.asarray(zm) for zm in sol["zs"]]
    pobj = float(cp.c @ x)
    dobj = c_off + float(sol["dual objective"]) if sol["dual objective"] is not None else nan
    return _RawResult(status, x, duals, np.zeros(0), pobj, dobj,
                      abs(pobj - dobj) / (1 + abs(pobj) + abs(dobj)),
                      int(sol.get("iterations", 0)))


def _svec_transform(k: int) -> sp.csr_matrix:
    """SCS scaled lower-triangular vectorization as a sparse map on vec entries."""
    rows, cols, data = [], [], []
    row = 0
    s = np.sqrt(2.0) / 2.0
    for j in range(k):
        for i in range(j, k):
            if i == j:
                rows.append(row); cols.append(i * k + i); data.append(1.0)
            else:
                rows += [row, row]
                cols += [i * k + j, j * k + i]
                data += [s, s]
            row += 1
    return sp.csr_matrix((data, (rows, cols)), shape=(k * (k + 1) // 2, k * k))


def _scs_backend(cp: CompiledProblem, cfg: SolverConfig) -> _RawResult:
    import scs

    a_eq, b_eq = cp.a_eq, cp.b_eq
    if a_eq.shape[0]:
        a_eq = a_eq.copy()
        a_eq.eliminate_zeros()
        nonzero = (np.diff(a_eq.indptr) > 0) | (np.abs(b_eq) > 0)
        a_eq, b_eq = a_eq[nonzero], b_eq[nonzero]
    a_rows = [a_eq]
    b_rows = [b_eq]
    psd_sides = []
    for blk in cp.blocks:
        t = _svec_transform(blk.side)
        a_rows.append(sp.csr_matrix(-(t @ blk.coeff)))
        b_rows.append(t @ blk.const.reshape(-1))
        psd_sides.append(blk.side)
    a = sp.vstack(a_rows, format="csc")
    b = np.concatenate(b_rows)
    data = {"A": a, "b": b, "c": cp.c}
    cone = {"z": a_eq.shape[0], "s": psd_sides}
    res = scs.solve(
        data, cone,
        eps_abs=max(cfg.tol_gap, 1e-9), eps_rel=max(cfg.tol_gap, 1e-9),
        max_iters=200_000, verbose=cfg.verbose,
    )
    info = res["info"]
    raw = info["status"].lower()
    if raw == "solved":
        status = "optimal"
    elif "inaccurate" in raw:
        status = "near_optimal"
    elif "infeasible" in raw:
        status = "infeasible"
    else:
        status = "numerical_failure"
    x = np.asarray(res["x"]).reshape(-1) if res["x"] is not None else np.zeros(cp.n)
    y = np.asarray(res["y"]).reshape(-1) if res["y"] is not None else np.zeros(b.size)
    duals = []
    off = a_eq.shape[0]
    for blk in cp.blocks:
        nsv = blk.side * (blk.side + 1) // 2
        t = _svec_transform(blk.side)
        z = (t.T @ y[off : off + nsv]).reshape(blk.side, blk.side)
        duals.append((z + z.T) / 2.0)
        off += nsv
    return _RawResult(
        status, x, duals, y[: a_eq.shape[0]], float(info["pobj"]), float(info["dobj"]),
        abs(float(info["pobj"]) - float(info["dobj"]))
        / (1 + abs(float(info["pobj"])) + abs(float(info["dobj"]))),
        int(info["iter"]),
    )


_BACKENDS: dict[str, Callable] = {
    "native": _native_backend,
    "cvxopt": _cvxopt_backend,
    "scs": _scs_backend,
}


def register_backend(name: str, fn: Callable) -> None:
    """Install an external conic solver behind the standard contract."""
    _BACKENDS[name] = fn


def _deembed_block_dual(z: np.ndarray, orig_side: int, was_embedded: bool) -> np.ndarray:
    if not was_embedded:
        return z
    k = orig_side
    z11, z12 = z[:k, :k], z[:k, k:]
    z21, z22 = z[k:, :k], z[k:, k:]
    out = (z11 + z22) + 1j * (z21 - z12)
    return (out + out.conj().T) / 2.0


def solve(problem: ConicProblem | CompiledProblem, config: SolverConfig | None = None) -> SolveReport:
    """Solve a conic problem; deterministic for fixed inputs and config."""
    cfg = config or SolverConfig.from_env()
    orig = problem if isinstance(problem, CompiledProblem) else compile_problem(problem)
    sliced, lift = orig.real_slice()
    work = sliced if sliced is not None else orig
    rc = work.realify()
    backend = cfg.backend
    if backend == "auto":
        total = sum(blk.side ** 2 for blk in rc.blocks) * max(1, rc.n)
        eq_load = rc.a_eq.shape[0] * rc.n
        backend = (
            "native"
            if total <= _NATIVE_TENSOR_CAP and eq_load <= _NATIVE_EQ_CAP
            else "scs"
        )
    if backend not in _BACKENDS:
        raise SolverError(f"unknown backend {backend!r}; have {sorted(_BACKENDS)}")
    for blk in rc.blocks:
        if blk.side > 512:
            raise ProblemTooLargeError(
                f"block side {blk.side} exceeds the 512 cap after embedding"
            )
    t0 = time.perf_counter()
    raw = _BACKENDS[backend](rc, cfg)
    elapsed = time.perf_counter() - t0

    x_full = np.asarray(lift @ raw.x) if lift is not None else raw.x
    duals = [
        _deembed_block_dual(z, wblk.side, rblk.side == 2 * wblk.side)
        for wblk, rblk, z in zip(work.blocks, rc.blocks, raw.psd_duals)
    ] if raw.psd_duals else []
    return SolveReport(
        raw.status,
        raw.pobj,
        raw.dobj,
        raw.gap,
        orig.extract(x_full),
        {"psd": duals, "eq": raw.eq_duals},
        raw.iterations,
        residuals=raw.residuals,
        backend=backend,
        solve_seconds=elapsed,
        problem_name=orig.name,
    )
