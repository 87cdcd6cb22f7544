"""
Augmented-Lagrangian solver for cycle problems.

Every equality constraint of a cycle is affine in the jerks, so equalities
are eliminated exactly through a null-space basis. The remaining
inequalities go into a PHR augmented Lagrangian whose inner problems are
solved with L-BFGS-B in Cholesky-preconditioned coordinates. Problems
without inequalities reduce to one KKT solve.
"""

import time
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
import scipy.linalg
from rich.console import Console
from scipy.optimize import minimize

from jugglespec.config import SolverConfig
from jugglespec.cycle import CycleProblem, evaluate_constraints
from jugglespec.errors import InfeasibleDetected
from jugglespec.trajectory import JerkTrajectory

console = Console(stderr=True)

OPTIMAL = "optimal"
MAX_ITERATIONS = "max_iterations"

_REGULARIZATION = 1e-10
_OBJECTIVE_RTOL = 1e-9


@dataclass
class SolveReport:
    """Outcome of one cycle solve."""

    objective: float
    max_eq_residual: float
    max_ineq_violation: float
    iterations: int
    inner_iterations: int
    converged: bool
    status: str
    wall_time: float
    penalty: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def kkt_solve(problem: CycleProblem) -> np.ndarray:
    """
    Minimize the objective subject to the equality constraints only.

    Solves the dense KKT system ``[[H, A^T], [A, 0]] [x, lam] = [-c, b]``.

    Args:
        problem: Assembled cycle problem

    Returns:
        np.ndarray: Flat jerk vector
    """
    A, b = problem.linear_equalities()
    H = problem.hessian
    n, m = problem.n_var, A.shape[0]
    if m == 0:
        return np.linalg.solve(H, -problem.gradient_offset)
    kkt = np.zeros((n + m, n + m))
    kkt[:n, :n] = H
    kkt[:n, n:] = A.T
    kkt[n:, :n] = A
    rhs = np.concatenate([-problem.gradient_offset, b])
    solution = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
    return solution[:n]


def _equality_space(problem: CycleProblem) -> Tuple[np.ndarray, np.ndarray, float]:
    """Particular solution, null-space basis and scaled residual of the equalities."""
    A, b = problem.linear_equalities()
    if A.shape[0] == 0:
        return np.zeros(problem.n_var), np.eye(problem.n_var), 0.0
    scale = np.concatenate([block.scale for block in problem.blocks if block.kind == "eq"])
    As, bs = A * scale[:, None], b * scale
    particular = np.linalg.lstsq(As, bs, rcond=None)[0]
    residual = float(np.max(np.abs(As @ particular - bs)))
    return particular, scipy.linalg.null_space(As), residual


def _inequality_violation(problem: CycleProblem, x: np.ndarray) -> float:
    values, _ = problem.inequalities(x)
    if values.size == 0:
        return 0.0
    return float(max(0.0, -values.min()))


def _report(problem: CycleProblem, x: np.ndarray, iterations: int, inner: int, converged: bool,
            status: str, started: float, penalty: float) -> SolveReport:
    eq, _ = problem.equalities(x)
    return SolveReport(
        objective=problem.objective(x),
        max_eq_residual=float(np.max(np.abs(eq))) if eq.size else 0.0,
        max_ineq_violation=_inequality_violation(problem, x),
        iterations=iterations,
        inner_iterations=inner,
        converged=converged,
        status=status,
        wall_time=time.perf_counter() - started,
        penalty=penalty,
    )


def solve(
    problem: CycleProblem,
    config: Optional[SolverConfig] = None,
    warm_start: Optional[np.ndarray] = None,
) -> Tuple[JerkTrajectory, SolveReport]:
    """
    Solve a cycle problem.

    Args:
        problem: Assembled cycle problem
        config: Solver limits and tolerances
        warm_start: Flat jerk vector to start from, e.g. the previous cycle's solution

    Returns:
        Tuple of (trajectory, report). A solve that runs out of outer
        iterations is returned with ``converged = False``.

    Raises:
        InfeasibleDetected: If the equalities are inconsistent, or the
            inequality violation stalls at the maximum penalty
    """
    config = config or SolverConfig()
    started = time.perf_counter()

    particular, basis, eq_residual = _equality_space(problem)
    if eq_residual > config.equality_tolerance:
        x = particular
        report = _report(problem, x, 0, 0, False, "infeasible", started, 0.0)
        raise InfeasibleDetected(
            f"equality constraints are inconsistent (scaled residual {eq_residual:.3e})",
            problem.trajectory(x),
            report,
        )

    if not problem.has_inequalities():
        x = kkt_solve(problem)
        return problem.trajectory(x), _report(problem, x, 1, 0, True, OPTIMAL, started, 0.0)

    duration = problem.spec.duration
    H = problem.hessian
    Hz = basis.T @ H @ basis / duration
    cz = basis.T @ (H @ particular + problem.gradient_offset) / duration

    def lift(z: np.ndarray) -> np.ndarray:
        return particular + basis @ z

    if warm_start is not None and warm_start.shape == (problem.n_var,):
        z = basis.T @ (warm_start - particular)
    else:
        z = np.linalg.solve(Hz + _REGULARIZATION * np.eye(Hz.shape[0]), -cz)

    values, _ = problem.inequalities(lift(z), scaled=True)
    multipliers = np.zeros(values.size)
    penalty = config.penalty_initial
    best_x, best_violation = lift(z), _inequality_violation(problem, lift(z))
    previous_violation = np.inf
    previous_objective = np.inf
    stalled = 0
    inner_total = 0

    for iteration in range(1, config.max_outer_iterations + 1):
        x = lift(z)
        values, jac = problem.inequalities(x, scaled=True)
        shifted = multipliers / penalty - values
        active = shifted > 0
        jz = jac[active] @ basis
        metric = Hz + penalty * jz.T @ jz + _REGULARIZATION * np.eye(Hz.shape[0])
        chol = scipy.linalg.cholesky(metric, lower=True)
        lam, mu = multipliers, penalty

        def merit(w: np.ndarray) -> Tuple[float, np.ndarray]:
            zz = scipy.linalg.solve_triangular(chol.T, w, lower=False)
            g, G = problem.inequalities(lift(zz), scaled=True)
            s = np.maximum(0.0, lam / mu - g)
            value = 0.5 * zz @ Hz @ zz + cz @ zz + 0.5 * mu * s @ s
            grad_z = Hz @ zz + cz - mu * (G @ basis).T @ s
            return value, scipy.linalg.solve_triangular(chol, grad_z, lower=True)

        result = minimize(
            merit,
            chol.T @ z,
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": config.max_inner_iterations, "gtol": 1e-10, "ftol": 1e-15},
        )
        inner_total += int(result.nit)
        z = scipy.linalg.solve_triangular(chol.T, result.x, lower=False)
        x = lift(z)

        values, _ = problem.inequalities(x, scaled=True)
        multipliers = np.maximum(0.0, multipliers - penalty * values)
        violation = _inequality_violation(problem, x)
        objective = problem.objective(x)

        if violation < best_violation or (violation <= config.inequality_tolerance and objective < problem.objective(best_x)):
            best_x, best_violation = x, violation

        settled = abs(objective - previous_objective) <= _OBJECTIVE_RTOL * max(1.0, abs(objective))
        if violation <= config.inequality_tolerance and settled:
            return problem.trajectory(x), _report(problem, x, iteration, inner_total, True, OPTIMAL, started, penalty)
        previous_objective = objective

        if violation > 0.25 * previous_violation:
            if penalty >= config.penalty_max:
                stalled += 1
                if stalled >= config.stall_iterations and violation > config.inequality_tolerance:
                    report = _report(problem, best_x, iteration, inner_total, False, "infeasible", started, penalty)
                    raise InfeasibleDetected(
                        f"inequality violation stalled at {best_violation:.3e} with the penalty at its cap",
                        problem.trajectory(best_x),
                        report,
                    )
            penalty = min(penalty * config.penalty_growth, config.penalty_max)
        else:
            stalled = 0
        previous_violation = violation

    console.print(f"[yellow]Warning:[/yellow] cycle at t={problem.spec.t0:.3f} s did not converge "
                  f"in {config.max_outer_iterations} outer iterations")
    report = _report(problem, best_x, config.max_outer_iterations, inner_total, False, MAX_ITERATIONS, started, penalty)
    return problem.trajectory(best_x), report


def verify(traj: JerkTrajectory, problem: CycleProblem) -> float:
    """Largest violation of the problem's own constraints, evaluated independently of the solver."""
    return evaluate_constraints(traj, problem.spec, problem.names()).max_violation
