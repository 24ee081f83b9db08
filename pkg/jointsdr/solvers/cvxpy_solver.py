"""
cvxpy adapter for cross-checking the built-in engine.

cvxpy is an optional dependency (``pip install jointsdr[cvxpy]``) and is
imported on first use. The back-end's own status is only trusted for
infeasibility: optimality is decided here from the returned primal-dual
pair, measured the same way the interior-point engine measures its iterates.
cvxpy adds ``(x - y)^T nu`` to the Lagrangian for ``x == y``, so the
multipliers of the engine's dual are the negated equality duals.
"""

from typing import Any, Callable, Dict, Optional, Tuple

import numpy as np
from scipy import sparse

from jointsdr.core.config import SolverConfig
from jointsdr.core.errors import SolverNumericalError, SolverUnavailableError
from jointsdr.sdr.forms import ConicProblem
from jointsdr.solvers.base import BaseConicSolver, ConicSolution, SolverStatus

_STATUS = {
    "optimal": SolverStatus.OPTIMAL,
    "optimal_inaccurate": SolverStatus.MAX_ITER,
    "infeasible": SolverStatus.INFEASIBLE,
    "infeasible_inaccurate": SolverStatus.INFEASIBLE,
}

# Back-end options carrying the configured tolerances
_TOLERANCES: Dict[str, Callable[[SolverConfig], Dict[str, Any]]] = {
    "CLARABEL": lambda cfg: {
        "tol_gap_abs": cfg.gap_tol,
        "tol_gap_rel": cfg.gap_tol,
        "tol_feas": cfg.feas_tol,
        "max_iter": cfg.max_iterations,
    },
    "SCS": lambda cfg: {"eps_abs": cfg.feas_tol, "eps_rel": cfg.feas_tol},
}


def _import_cvxpy() -> Any:
    try:
        import cvxpy
    except ImportError as exc:
        raise SolverUnavailableError("cvxpy is not installed; install the 'cvxpy' extra") from exc
    return cvxpy


def _block_operator(problem: ConicProblem) -> sparse.csr_matrix:
    """``A_X`` as a sparse matrix on the row-major vectorization of all blocks."""
    flat = problem.eq_block * problem.n * problem.n + problem.eq_row * problem.n + problem.eq_col
    return sparse.csr_matrix(
        (problem.eq_coef, (problem.eq_con, flat)), shape=(problem.n_eq, problem.K * problem.n * problem.n)
    )


class CvxpySolver(BaseConicSolver):
    """Solve a :class:`ConicProblem` through cvxpy (Clarabel unless configured otherwise)."""

    def __init__(self, config: Optional[SolverConfig] = None, trace: bool = False, backend: str = "CLARABEL"):
        super().__init__(config, trace)
        self.backend = backend

    @property
    def name(self) -> str:
        return "cvxpy"

    def solver_options(self) -> Dict[str, Any]:
        options = _TOLERANCES.get(self.backend.upper())
        return options(self.config) if options else {}

    def _solve(self, problem: ConicProblem) -> ConicSolution:
        cp = _import_cvxpy()
        K, n = problem.K, problem.n
        X = [cp.Variable((n, n), symmetric=True) for _ in range(K)]
        psd = [x >> 0 for x in X]
        f = cp.Variable(problem.n_f) if problem.n_f else None

        lhs = _block_operator(problem) @ cp.hstack([cp.vec(x, order="C") for x in X])
        if f is not None:
            lhs = lhs + problem.A_f @ f
        equalities = lhs == problem.eq_rhs
        constraints = [equalities] + psd

        objective = sum(cp.trace(problem.costs[k] @ X[k]) for k in range(K))
        lower = upper = fs = None
        if f is not None:
            objective = objective + problem.c_f @ f
            lower, upper = f >= 0, f <= 1
            constraints += [lower, upper]
            if problem.n_fs:
                fs = problem.G_fs @ f <= problem.h_fs
                constraints.append(fs)

        cvx_problem = cp.Problem(cp.Minimize(objective), constraints)
        try:
            cvx_problem.solve(solver=self.backend, **self.solver_options())
        except cp.error.SolverError as exc:
            raise SolverNumericalError(f"cvxpy back-end {self.backend} failed: {exc}") from exc

        status = _STATUS.get(cvx_problem.status)
        if status is None:
            raise SolverNumericalError(f"cvxpy returned status {cvx_problem.status}")
        iterations = int(cvx_problem.solver_stats.num_iters or 0)
        if status == SolverStatus.INFEASIBLE:
            blocks = np.stack([np.eye(n)] * K)
            f_value = np.full(problem.n_f, 0.5)
            return ConicSolution(
                X_blocks=blocks,
                f=f_value,
                objective=problem.objective(blocks, f_value),
                dual_objective=-np.inf,
                status=status,
                gap=np.inf,
                iterations=iterations,
            )

        blocks = np.stack([0.5 * (x.value + x.value.T) for x in X])
        f_value = np.asarray(f.value) if f is not None else np.zeros(0)
        duals = _duals(equalities, psd, lower, upper, fs)
        pobj, dobj, gap, pres, dres = _measures(problem, blocks, f_value, duals)

        cfg = self.config
        meets = gap <= cfg.gap_tol and pres <= cfg.feas_tol and dres <= cfg.feas_tol
        if status == SolverStatus.OPTIMAL and not meets:
            self.logger.info(
                "Back-end optimum misses tolerances",
                backend=self.backend,
                gap=gap,
                pres=pres,
                dres=dres,
            )
            status = SolverStatus.MAX_ITER
        return ConicSolution(
            X_blocks=blocks,
            f=f_value,
            y=duals[0] if duals is not None else None,
            objective=pobj,
            dual_objective=dobj,
            status=status,
            gap=gap,
            primal_residual=pres,
            dual_residual=dres,
            iterations=iterations,
        )


_Duals = Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]


def _duals(equalities, psd, lower, upper, fs) -> Optional[_Duals]:
    """``(y, Z, lam_lower, lam_upper, lam_fs)`` in the engine's sign convention, None when missing."""
    if equalities.dual_value is None or any(c.dual_value is None for c in psd):
        return None
    y = -np.asarray(equalities.dual_value, dtype=float).reshape(-1)
    Z = np.stack([0.5 * (c.dual_value + c.dual_value.T) for c in psd])

    def _value(constraint) -> np.ndarray:
        if constraint is None:
            return np.zeros(0)
        return np.asarray(constraint.dual_value, dtype=float).reshape(-1)

    return y, Z, _value(lower), _value(upper), _value(fs)


def _measures(
    problem: ConicProblem,
    blocks: np.ndarray,
    f: np.ndarray,
    duals: Optional[_Duals],
) -> Tuple[float, float, float, float, float]:
    """Objectives, relative gap and relative residuals of a primal-dual pair."""
    pobj = problem.objective(blocks, f)
    pres = float(np.linalg.norm(problem.equality_residual(blocks, f)) / (1.0 + np.linalg.norm(problem.eq_rhs)))
    if problem.n_f:
        h_norm = np.sqrt(problem.n_f + float(problem.h_fs @ problem.h_fs))
        pres = max(pres, problem.inequality_violation(f) / (1.0 + h_norm))
    lowest = min(float(np.linalg.eigvalsh(X)[0]) for X in blocks)
    pres = max(pres, -lowest)

    if duals is None:
        return pobj, -np.inf, np.inf, pres, np.inf

    y, Z, lam_lower, lam_upper, lam_fs = duals
    dobj = float(problem.eq_rhs @ y)
    Rd = problem.costs - problem.adjoint_blocks(y) - Z
    dres = float(np.linalg.norm(Rd) / (1.0 + np.linalg.norm(problem.costs)))
    dres = max(dres, max(0.0, -min(float(np.linalg.eigvalsh(Zk)[0]) for Zk in Z)))
    if problem.n_f:
        dobj -= float(lam_upper.sum())
        rf = problem.c_f - problem.A_f.T @ y - lam_lower + lam_upper
        if problem.n_fs:
            dobj -= float(problem.h_fs @ lam_fs)
            rf = rf + problem.G_fs.T @ lam_fs
        dres = max(dres, float(np.linalg.norm(rf) / (1.0 + np.linalg.norm(problem.c_f))))

    gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
    return pobj, dobj, float(gap), float(pres), float(dres)
