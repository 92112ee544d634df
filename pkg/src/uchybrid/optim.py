"""Shared bounded derivative-free minimizer (COBYLA family)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

__all__ = ["OptimProblem", "OptimResult", "OptimError", "minimize"]


class OptimError(RuntimeError):
    """Raised when the objective cannot be evaluated at the start point."""


@dataclass
class OptimProblem:
    dimension: int
    objective: Callable[[np.ndarray], float]
    lower: Optional[Sequence[float]] = None
    upper: Optional[Sequence[float]] = None
    maxiter: int = 10_000
    tolerance: float = 1e-6
    rhobeg: Optional[float] = None


@dataclass(frozen=True)
class OptimResult:
    x_best: np.ndarray
    f_best: float
    evaluations: int
    converged: bool


def _as_bound(values, dimension: int, default: float) -> np.ndarray:
    if values is None:
        return np.full(dimension, default)
    arr = np.asarray(values, dtype=float)
    if arr.shape != (dimension,):
        raise ValueError(f"bound shape {arr.shape} != ({dimension},)")
    return arr


def minimize(problem: OptimProblem, x0: Sequence[float], seed: int = 0) -> OptimResult:
    """Local bounded minimization with COBYLA (linear-approximation trust
    region).  Bounds are enforced by projecting the argument before every
    evaluation; the incumbent (best projected point seen) is returned, so
    the result never regresses below f(project(x0)).

    Deterministic given (x0, problem); ``seed`` is accepted for interface
    symmetry but the method draws no random numbers.
    """
    del seed
    lower = _as_bound(problem.lower, problem.dimension, -np.inf)
    upper = _as_bound(problem.upper, problem.dimension, np.inf)
    if (lower > upper).any():
        raise ValueError("inconsistent bounds: lower > upper")
    if problem.maxiter < 1:
        raise ValueError("budget must be >= 1")

    x0 = np.clip(np.asarray(x0, dtype=float), lower, upper)

    state = {"best_x": x0.copy(), "best_f": np.inf, "evals": 0}

    def wrapped(x: np.ndarray) -> float:
        z = np.clip(x, lower, upper)
        value = float(problem.objective(z))
        state["evals"] += 1
        if not np.isfinite(value):
            if state["evals"] == 1:
                raise OptimError("objective is not finite at the start point")
            # Reject the point: a large finite value makes the trust region
            # back away without poisoning the incumbent.
            return 1e300
        if value < state["best_f"]:
            state["best_f"] = value
            state["best_x"] = z.copy()
        return value

    wrapped(x0)  # establishes the incumbent and validates the start point

    span = upper - lower
    finite_span = span[np.isfinite(span)]
    if problem.rhobeg is not None:
        rhobeg = problem.rhobeg
    elif finite_span.size:
        rhobeg = max(problem.tolerance, 0.2 * float(np.min(finite_span)))
    else:
        rhobeg = 1.0

    # The box is also handed to COBYLA as linear inequality constraints:
    # projection alone leaves the simplex blind when the start sits on a
    # bound (clipped steps look flat).  The start point is nudged strictly
    # inside for the same reason; the incumbent above keeps the guarantee
    # f_best <= f(project(x0)).
    constraints = []
    finite_lo = np.isfinite(lower)
    finite_hi = np.isfinite(upper)
    if finite_lo.any():
        constraints.append({"type": "ineq", "fun": lambda x: x[finite_lo] - lower[finite_lo]})
    if finite_hi.any():
        constraints.append({"type": "ineq", "fun": lambda x: upper[finite_hi] - x[finite_hi]})
    margin = np.where(np.isfinite(span), np.minimum(rhobeg, 0.25 * span), 0.0)
    x_start = np.clip(x0, lower + margin, upper - margin)

    result = _scipy_minimize(
        wrapped,
        x_start,
        method="COBYLA",
        constraints=constraints,
        options={
            "maxiter": int(problem.maxiter),
            "rhobeg": rhobeg,
            "tol": problem.tolerance,
        },
    )
    converged = bool(result.success) and state["evals"] <= problem.maxiter + 1
    return OptimResult(
        x_best=state["best_x"],
        f_best=state["best_f"],
        evaluations=state["evals"],
        converged=converged,
    )
