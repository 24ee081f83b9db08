"""
Infeasible-start primal-dual interior-point method for block-structured SDPs.

Primal::

    min  sum_k <C_k, X_k> + c^T f
    s.t. A_X(X) + A_f f = b,   G f + s = h,   X_k PSD,  s >= 0

Dual::

    max  b^T y - h^T lam
    s.t. Z = C - A_X^*(y) PSD,   c - A_f^T y + G^T lam = 0,   lam >= 0

``G`` stacks the forbidden-set rows and the box rows ``-f <= 0``, ``f <= 1``.
Search directions use Nesterov-Todd scaling on every PSD block and a
Mehrotra predictor-corrector. The inequality multipliers are eliminated into
a dense ``n_f x n_f`` matrix, so the Schur complement only has one row per
equality constraint.

Joint forms are primal degenerate at a rank-one optimum: once ``f`` sits on
box vertices the coupling rows become dependent on the diagonal rows and the
Schur complement is singular up to roundoff. Both normal-equation matrices
are therefore factored through :class:`_SpdSystem`, which shifts the
diagonal when Cholesky fails and refines against the unshifted matrix. When
the iteration still cannot continue, the best iterate seen is returned with
a status that reflects the tolerances it actually meets.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import linalg, sparse

from jointsdr.core.config import SolverConfig
from jointsdr.core.errors import SolverNumericalError
from jointsdr.sdr.forms import ConicProblem
from jointsdr.solvers.base import BaseConicSolver, ConicSolution, SolverStatus

DIVERGENCE_BOUND = 1e10

# Relative diagonal shifts tried, after Jacobi scaling, when Cholesky fails
REGULARIZATION_SHIFTS = (1e-14, 1e-12, 1e-10, 1e-8, 1e-6)

# An iterate that stops within this factor of every tolerance counts as optimal
NEAR_OPTIMAL_FACTOR = 10.0

# Steps below this on both sides for STALL_ITERATIONS iterations end the solve
STALL_STEP = 1e-8
STALL_ITERATIONS = 3


@dataclass
class _Iterate:
    X: np.ndarray
    Z: np.ndarray
    y: np.ndarray
    f: np.ndarray
    s: np.ndarray
    lam: np.ndarray


@dataclass
class _Direction:
    dX: np.ndarray
    dZ: np.ndarray
    dy: np.ndarray
    df: np.ndarray
    ds: np.ndarray
    dlam: np.ndarray


@dataclass
class _Residuals:
    Rp: np.ndarray
    Rd: np.ndarray
    rf: np.ndarray
    Rh: np.ndarray


@dataclass
class _Scaling:
    R: np.ndarray
    Rinv: np.ndarray
    W: np.ndarray
    lam: np.ndarray
    Lx_inv: np.ndarray
    Lz_inv: np.ndarray


def _sym(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + np.swapaxes(A, -1, -2))


def _inner(A: np.ndarray, B: np.ndarray) -> float:
    return float(np.einsum("kij,kij->", A, B))


def _psd_step(L_inv: np.ndarray, D: np.ndarray) -> float:
    """Largest alpha with ``L L^T + alpha D`` PSD."""
    scaled = L_inv @ D @ np.swapaxes(L_inv, -1, -2)
    lowest = float(np.linalg.eigvalsh(_sym(scaled)).min())
    return np.inf if lowest >= 0 else -1.0 / lowest


def _cone_step(v: np.ndarray, dv: np.ndarray) -> float:
    """Largest alpha with ``v + alpha dv >= 0``."""
    negative = dv < 0
    if not negative.any():
        return np.inf
    return float(np.min(-v[negative] / dv[negative]))


class _SpdSystem:
    """
    Solves ``A x = rhs`` for a symmetric positive semidefinite ``A``.

    Cholesky on the Jacobi-scaled matrix first; on failure the smallest
    shift in ``REGULARIZATION_SHIFTS`` that factors is used and every solve
    gets one refinement step against the unshifted ``A``. An eigenvalue
    pseudo-inverse is the last resort.
    """

    def __init__(self, A: np.ndarray):
        self.A = _sym(A)
        diag = np.abs(np.diag(self.A))
        self.scale = 1.0 / np.sqrt(np.where(diag > 0, diag, 1.0))
        scaled = self.A * self.scale[:, None] * self.scale[None, :]
        self.shift = 0.0
        self._pinv: Optional[np.ndarray] = None
        self._chol = self._cholesky(scaled)
        if self._chol is None:
            w, V = np.linalg.eigh(scaled)
            keep = w > 1e-12 * w.max(initial=0.0)
            inv = np.zeros_like(w)
            inv[keep] = 1.0 / w[keep]
            self._pinv = (V * inv) @ V.T
            self.shift = np.inf

    def _cholesky(self, scaled: np.ndarray):
        try:
            return linalg.cho_factor(scaled)
        except linalg.LinAlgError:
            pass
        eye = np.eye(scaled.shape[0])
        for shift in REGULARIZATION_SHIFTS:
            try:
                factor = linalg.cho_factor(scaled + shift * eye)
            except linalg.LinAlgError:
                continue
            self.shift = shift
            return factor
        return None

    @property
    def regularized(self) -> bool:
        return self.shift > 0

    def _apply_inverse(self, rhs: np.ndarray) -> np.ndarray:
        scale = self.scale.reshape((-1,) + (1,) * (rhs.ndim - 1))
        scaled = rhs * scale
        if self._chol is not None:
            out = linalg.cho_solve(self._chol, scaled)
        else:
            out = self._pinv @ scaled
        return out * scale

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        x = self._apply_inverse(rhs)
        if self.regularized:
            x = x + self._apply_inverse(rhs - self.A @ x)
        return x


class InteriorPointSolver(BaseConicSolver):
    """Built-in conic solver exploiting the block-diagonal structure."""

    def __init__(self, config: Optional[SolverConfig] = None, trace: bool = False):
        super().__init__(config, trace)

    @property
    def name(self) -> str:
        return "interior-point"

    def _solve(self, problem: ConicProblem) -> ConicSolution:
        try:
            return _Engine(problem, self.config, self.trace, self.logger).run()
        except (np.linalg.LinAlgError, linalg.LinAlgError) as exc:
            raise SolverNumericalError(f"{problem.kind.value} solve broke down: {exc}") from exc


class _Engine:
    """State of one solve."""

    def __init__(self, problem: ConicProblem, config: SolverConfig, trace: bool, logger):
        self.p = problem
        self.cfg = config
        self.trace = trace
        self.logger = logger

        K, n, n_f = problem.K, problem.n, problem.n_f
        self.has_f = n_f > 0
        if self.has_f:
            eye = sparse.identity(n_f, format="csr")
            blocks = [-eye, eye] if problem.G_fs is None else [problem.G_fs, -eye, eye]
            self.G = sparse.vstack(blocks, format="csr")
            self.h = np.concatenate([problem.h_fs, np.zeros(n_f), np.ones(n_f)])
            self.A_f = problem.A_f.toarray()
        else:
            self.G = sparse.csr_matrix((0, 0))
            self.h = np.zeros(0)
            self.A_f = np.zeros((problem.n_eq, 0))
        self.m_in = self.h.size
        self.n_f = n_f
        self.barrier_dim = K * n + self.m_in

        self.c = problem.c_f if self.has_f else np.zeros(0)
        self.b = problem.eq_rhs
        self.norm_b = 1.0 + np.linalg.norm(self.b)
        self.norm_h = 1.0 + np.linalg.norm(self.h)
        self.norm_C = 1.0 + np.linalg.norm(problem.costs)
        self.norm_c = 1.0 + np.linalg.norm(self.c)

        self._layout_terms()

    def _layout_terms(self) -> None:
        """Pad per-block term lists to a common width for vectorized Schur assembly."""
        groups = self.p.block_terms
        width = max(len(g) for g in groups)
        K = self.p.K
        self.t_row = np.zeros((K, width), dtype=int)
        self.t_col = np.zeros((K, width), dtype=int)
        self.t_con = np.zeros((K, width), dtype=int)
        self.t_coef = np.zeros((K, width))
        for k, g in enumerate(groups):
            self.t_row[k, :len(g)] = self.p.eq_row[g]
            self.t_col[k, :len(g)] = self.p.eq_col[g]
            self.t_con[k, :len(g)] = self.p.eq_con[g]
            self.t_coef[k, :len(g)] = self.p.eq_coef[g]

    def _initial_point(self) -> _Iterate:
        K, n = self.p.K, self.p.n
        eye = np.broadcast_to(np.eye(n), (K, n, n))
        zeta = 1.0 + np.linalg.norm(self.p.costs, axis=(1, 2))
        f = np.full(self.n_f, 0.5)
        s = np.maximum(self.h - self.G @ f, 1.0) if self.has_f else np.zeros(0)
        return _Iterate(
            X=eye.copy(),
            Z=zeta[:, None, None] * eye,
            y=np.zeros(self.p.n_eq),
            f=f,
            s=s,
            lam=np.ones(self.m_in),
        )

    def _residuals(self, it: _Iterate) -> _Residuals:
        p = self.p
        Rp = self.b - p.apply_blocks(it.X) - self.A_f @ it.f
        Rd = p.costs - p.adjoint_blocks(it.y) - it.Z
        if self.has_f:
            rf = self.c - self.A_f.T @ it.y + self.G.T @ it.lam
            Rh = self.h - self.G @ it.f - it.s
        else:
            rf = np.zeros(0)
            Rh = np.zeros(0)
        return _Residuals(Rp=Rp, Rd=Rd, rf=rf, Rh=Rh)

    def _scaling(self, it: _Iterate) -> _Scaling:
        Lx = np.linalg.cholesky(it.X)
        Lz = np.linalg.cholesky(it.Z)
        n = self.p.n
        eye = np.broadcast_to(np.eye(n), Lx.shape)
        Lx_inv = np.linalg.solve(Lx, eye)
        Lz_inv = np.linalg.solve(Lz, eye)

        _, lam, Vh = np.linalg.svd(np.swapaxes(Lz, -1, -2) @ Lx)
        V = np.swapaxes(Vh, -1, -2)
        R = (Lx @ V) / np.sqrt(lam)[:, None, :]
        Rinv = np.sqrt(lam)[:, :, None] * (Vh @ Lx_inv)
        W = _sym(R @ np.swapaxes(R, -1, -2))
        return _Scaling(R=R, Rinv=Rinv, W=W, lam=lam, Lx_inv=Lx_inv, Lz_inv=Lz_inv)

    def _schur(self, W: np.ndarray) -> np.ndarray:
        """``M_ij = <A_i, W A_j W>`` summed over blocks."""
        K = self.p.K
        kk = np.arange(K)[:, None, None]
        r, c = self.t_row, self.t_col
        cr = W[kk, c[:, :, None], r[:, None, :]]
        rc = W[kk, c[:, None, :], r[:, :, None]]
        rr = W[kk, r[:, :, None], r[:, None, :]]
        cc = W[kk, c[:, :, None], c[:, None, :]]
        coef = self.t_coef[:, :, None] * self.t_coef[:, None, :]
        values = 0.5 * coef * (cr * rc + rr * cc)

        M = np.zeros((self.p.n_eq, self.p.n_eq))
        con = self.t_con
        np.add.at(M, (np.broadcast_to(con[:, :, None], values.shape),
                      np.broadcast_to(con[:, None, :], values.shape)), values)
        return M

    def _factor(self, it: _Iterate, sc: _Scaling) -> Tuple[_SpdSystem, Optional[_SpdSystem]]:
        M = self._schur(sc.W)
        Q_system = None
        if self.has_f:
            d = it.lam / it.s
            n_fs = self.m_in - 2 * self.n_f
            box = d[n_fs:n_fs + self.n_f] + d[n_fs + self.n_f:]
            Q = np.diag(box)
            if n_fs:
                Gfs = self.G[:n_fs]
                Q = Q + (Gfs.T @ sparse.diags(d[:n_fs]) @ Gfs).toarray()
            Q_system = _SpdSystem(Q)
            M = M + self.A_f @ Q_system.solve(self.A_f.T)
        M_system = _SpdSystem(M)
        if self.trace and (M_system.regularized or (Q_system is not None and Q_system.regularized)):
            self.logger.debug(
                "Regularized normal equations",
                schur_shift=M_system.shift,
                q_shift=Q_system.shift if Q_system is not None else 0.0,
            )
        return M_system, Q_system

    def _direction(
        self,
        it: _Iterate,
        res: _Residuals,
        sc: _Scaling,
        factors,
        Rc: np.ndarray,
        r_s: np.ndarray,
    ) -> _Direction:
        p = self.p
        M_system, Q_system = factors
        W = sc.W
        T1 = Rc - W @ res.Rd @ W
        rhs = res.Rp - p.apply_blocks(T1)
        if self.has_f:
            q = -res.rf - self.G.T @ ((r_s - it.lam * res.Rh) / it.s)
            rhs = rhs - self.A_f @ Q_system.solve(q)
        dy = M_system.solve(rhs)
        dZ = _sym(res.Rd - p.adjoint_blocks(dy))
        dX = _sym(Rc - W @ dZ @ W)
        if self.has_f:
            df = Q_system.solve(self.A_f.T @ dy + q)
            ds = res.Rh - self.G @ df
            dlam = (r_s - it.lam * ds) / it.s
        else:
            df = ds = dlam = np.zeros(0)
        return _Direction(dX=dX, dZ=dZ, dy=dy, df=df, ds=ds, dlam=dlam)

    def _max_steps(self, it: _Iterate, d: _Direction, sc: _Scaling) -> Tuple[float, float]:
        alpha_p = min(_psd_step(sc.Lx_inv, d.dX), _cone_step(it.s, d.ds))
        alpha_d = min(_psd_step(sc.Lz_inv, d.dZ), _cone_step(it.lam, d.dlam))
        return alpha_p, alpha_d

    def _complementarity(self, X, Z, s, lam) -> float:
        return _inner(X, Z) + float(s @ lam)

    def _measures(self, it: _Iterate, res: _Residuals):
        pobj = self.p.objective(it.X, it.f)
        dobj = float(self.b @ it.y - self.h @ it.lam)
        comp = self._complementarity(it.X, it.Z, it.s, it.lam)
        scale = 1.0 + abs(pobj) + abs(dobj)
        gap = max(abs(pobj - dobj), comp) / scale
        pres = np.linalg.norm(res.Rp) / self.norm_b
        if self.has_f:
            pres = max(pres, np.linalg.norm(res.Rh) / self.norm_h)
        dres = np.linalg.norm(res.Rd) / self.norm_C
        if self.has_f:
            dres = max(dres, np.linalg.norm(res.rf) / self.norm_c)
        return pobj, dobj, comp, gap, float(pres), float(dres)

    def _solution(self, it: _Iterate, status: SolverStatus, measures, iterations: int) -> ConicSolution:
        pobj, dobj, _, gap, pres, dres = measures
        return ConicSolution(
            X_blocks=_sym(it.X),
            f=it.f.copy(),
            y=it.y.copy(),
            objective=pobj,
            dual_objective=dobj,
            status=status,
            gap=gap,
            primal_residual=pres,
            dual_residual=dres,
            iterations=iterations,
        )

    def _merit(self, measures) -> float:
        """Distance to termination in units of the tolerances; at most 1 means optimal."""
        _, _, _, gap, pres, dres = measures
        return max(gap / self.cfg.gap_tol, pres / self.cfg.feas_tol, dres / self.cfg.feas_tol)

    def _settle(self, best: Tuple[float, _Iterate, tuple], reason: str, iterations: int) -> ConicSolution:
        merit, it, measures = best
        _, _, _, gap, pres, dres = measures
        if merit <= NEAR_OPTIMAL_FACTOR:
            self.logger.debug("Stopped near optimum", form=self.p.kind.value, reason=reason, gap=gap)
            return self._solution(it, SolverStatus.OPTIMAL, measures, iterations)
        self.logger.warning(
            "Stopped before tolerances were met",
            form=self.p.kind.value,
            reason=reason,
            gap=gap,
            pres=pres,
            dres=dres,
        )
        return self._solution(it, SolverStatus.MAX_ITER, measures, iterations)

    def _step(self, it: _Iterate, res: _Residuals, mu: float) -> Tuple[_Iterate, float, float, float]:
        cfg = self.cfg
        eye = np.eye(self.p.n)
        sc = self._scaling(it)
        factors = self._factor(it, sc)

        # Predictor
        d_aff = self._direction(it, res, sc, factors, -it.X, -it.s * it.lam)
        ap, ad = self._max_steps(it, d_aff, sc)
        ap, ad = min(1.0, ap), min(1.0, ad)
        mu_aff = self._complementarity(
            it.X + ap * d_aff.dX, it.Z + ad * d_aff.dZ,
            it.s + ap * d_aff.ds, it.lam + ad * d_aff.dlam,
        ) / self.barrier_dim
        sigma = min(1.0, max(0.0, mu_aff / mu)) ** 3

        # Corrector in the scaled space, where X and Z both become diag(lam)
        dXs = sc.Rinv @ d_aff.dX @ np.swapaxes(sc.Rinv, -1, -2)
        dZs = np.swapaxes(sc.R, -1, -2) @ d_aff.dZ @ sc.R
        target = sigma * mu * eye - (sc.lam ** 2)[:, :, None] * eye - _sym(dXs @ dZs)
        Mm = 2.0 * target / (sc.lam[:, :, None] + sc.lam[:, None, :])
        Rc = sc.R @ Mm @ np.swapaxes(sc.R, -1, -2)
        r_s = sigma * mu - it.s * it.lam - d_aff.ds * d_aff.dlam
        d = self._direction(it, res, sc, factors, Rc, r_s)

        ap, ad = self._max_steps(it, d, sc)
        ap = min(1.0, cfg.step_fraction * ap)
        ad = min(1.0, cfg.step_fraction * ad)

        step = _Iterate(
            X=_sym(it.X + ap * d.dX),
            Z=_sym(it.Z + ad * d.dZ),
            y=it.y + ad * d.dy,
            f=it.f + ap * d.df,
            s=it.s + ap * d.ds,
            lam=it.lam + ad * d.dlam,
        )
        return step, ap, ad, sigma

    def run(self) -> ConicSolution:
        cfg = self.cfg
        it = self._initial_point()
        best: Optional[Tuple[float, _Iterate, tuple]] = None
        stalled = 0

        for iteration in range(cfg.max_iterations + 1):
            res = self._residuals(it)
            measures = self._measures(it, res)
            pobj, dobj, comp, gap, pres, dres = measures

            if not np.isfinite([pobj, dobj, gap, pres, dres]).all():
                if best is None:
                    raise SolverNumericalError(f"{self.p.kind.value} problem has non-finite data")
                return self._settle(best, "non-finite iterate", iteration)
            merit = self._merit(measures)
            if best is None or merit < best[0]:
                best = (merit, it, measures)

            if merit <= 1.0:
                return self._solution(it, SolverStatus.OPTIMAL, measures, iteration)
            if max(np.abs(it.X).max(), np.abs(it.y).max(initial=0.0)) > DIVERGENCE_BOUND:
                self.logger.warning("Iterates diverged", form=self.p.kind.value, iteration=iteration)
                return self._solution(it, SolverStatus.INFEASIBLE, measures, iteration)
            if iteration == cfg.max_iterations:
                break

            try:
                it, ap, ad, sigma = self._step(it, res, comp / self.barrier_dim)
            except (np.linalg.LinAlgError, linalg.LinAlgError, ValueError) as exc:
                return self._settle(best, f"breakdown: {exc}", iteration)

            stalled = stalled + 1 if max(ap, ad) < STALL_STEP else 0
            if stalled >= STALL_ITERATIONS:
                return self._settle(best, "stalled", iteration + 1)

            if self.trace:
                self.logger.debug(
                    "Interior-point iteration",
                    iteration=iteration + 1,
                    pobj=pobj,
                    dobj=dobj,
                    gap=gap,
                    pres=pres,
                    dres=dres,
                    sigma=sigma,
                    step_p=ap,
                    step_d=ad,
                )

        return self._settle(best, "iteration limit", cfg.max_iterations)
