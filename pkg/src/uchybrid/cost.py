"""Exact production-cost evaluation and full constraint audit."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import (
    Dispatch,
    Instance,
    Schedule,
    UnitSpec,
    ValidationError,
    compute_history,
    operating_range,
)

__all__ = [
    "CostBreakdown",
    "FeasibilityReport",
    "AuditTolerances",
    "fuel_cost",
    "startup_cost",
    "production_cost",
    "audit",
]


@dataclass(frozen=True)
class CostBreakdown:
    fuel: float
    startup: float
    total: float
    per_time: tuple[float, ...]

    def to_dict(self) -> dict:
        return {
            "fuel": self.fuel,
            "startup": self.startup,
            "total": self.total,
            "per_time": list(self.per_time),
        }


@dataclass(frozen=True)
class AuditTolerances:
    """Absolute tolerances for the constraint audit.

    Load defaults to 1.0 MW because published dispatches are rounded to
    0.1 MW; the remaining constraints are checked near-exactly.
    """

    load: float = 1.0
    power_range: float = 1e-6
    reserve: float = 1e-6


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of checking every constraint (0-based indices internally)."""

    load_residual: tuple[float, ...]
    range_violations: tuple[tuple[int, int, float], ...]
    min_up_violations: tuple[tuple[int, int], ...]
    min_down_violations: tuple[tuple[int, int], ...]
    reserve_deficit: tuple[float, ...]
    feasible: bool
    tolerances: AuditTolerances = field(default_factory=AuditTolerances)

    def to_dict(self) -> dict:
        # 1-based unit/time indices in reports.
        return {
            "feasible": self.feasible,
            "load_residual": list(self.load_residual),
            "range_violations": [
                {"unit": i + 1, "t": t + 1, "amount": a}
                for i, t, a in self.range_violations
            ],
            "min_up_violations": [
                {"unit": i + 1, "t": t + 1} for i, t in self.min_up_violations
            ],
            "min_down_violations": [
                {"unit": i + 1, "t": t + 1} for i, t in self.min_down_violations
            ],
            "reserve_deficit": list(self.reserve_deficit),
        }


def fuel_cost(unit: UnitSpec, p: float) -> float:
    """Quadratic operating cost a + b*p + c*p^2 for one committed step."""
    if p < 0:
        raise ValidationError("power must be nonnegative")
    return unit.a + unit.b * p + unit.c * p * p


def startup_cost(unit: UnitSpec, t_off_at_start: float) -> float:
    """Hot or cold start cost given the off-duration preceding the start."""
    if t_off_at_start <= unit.t_down_min + unit.cold_start_time:
        return unit.hot_start_cost
    return unit.cold_start_cost


def _check_shapes(instance: Instance, schedule: Schedule, dispatch: Dispatch) -> None:
    shape = (instance.n_units, instance.horizon)
    if schedule.y.shape != shape:
        raise ValidationError(f"schedule shape {schedule.y.shape} != {shape}")
    if dispatch.p.shape != shape:
        raise ValidationError(f"dispatch shape {dispatch.p.shape} != {shape}")


def _off_duration_before(instance: Instance, history, i: int, t: int) -> float:
    """Consecutive off steps immediately before a start at step t."""
    if t == 0:
        init = instance.initial[i]
        return 0 if init.initially_on else init.steps_in_state
    return float(history.t_off[i, t - 1])


def production_cost(
    instance: Instance, schedule: Schedule, dispatch: Dispatch
) -> CostBreakdown:
    """Fuel plus start-up cost of a full (schedule, dispatch) pair."""
    _check_shapes(instance, schedule, dispatch)
    history = compute_history(instance, schedule)
    fuel_total = 0.0
    startup_total = 0.0
    per_time = []
    for t in range(instance.horizon):
        fuel_t = 0.0
        startup_t = 0.0
        for i, unit in enumerate(instance.units):
            if schedule.y[i, t] != 1:
                continue
            fuel_t += fuel_cost(unit, float(dispatch.p[i, t]))
            was_on = (
                schedule.y[i, t - 1] == 1
                if t > 0
                else instance.initial[i].initially_on
            )
            if not was_on:
                startup_t += startup_cost(
                    unit, _off_duration_before(instance, history, i, t)
                )
        fuel_total += fuel_t
        startup_total += startup_t
        per_time.append(fuel_t + startup_t)
    return CostBreakdown(
        fuel=fuel_total,
        startup=startup_total,
        total=fuel_total + startup_total,
        per_time=tuple(per_time),
    )


def audit(
    instance: Instance,
    schedule: Schedule,
    dispatch: Dispatch,
    tolerances: AuditTolerances | None = None,
) -> FeasibilityReport:
    """Check every constraint of the problem for a candidate solution."""
    _check_shapes(instance, schedule, dispatch)
    tol = tolerances or AuditTolerances()
    history = compute_history(instance, schedule)
    y = schedule.y
    p = dispatch.p

    load_residual = tuple(
        float(np.sum(p[:, t] * y[:, t]) - instance.load[t])
        for t in range(instance.horizon)
    )

    range_violations = []
    for t in range(instance.horizon):
        for i in range(instance.n_units):
            if y[i, t] != 1:
                continue
            lo, hi = operating_range(instance, schedule, dispatch, i, t)
            value = float(p[i, t])
            excess = max(lo - value, value - hi)
            if excess > tol.power_range:
                range_violations.append((i, t, excess))

    min_up, min_down = [], []
    for i, unit in enumerate(instance.units):
        for t in range(instance.horizon):
            was_on = y[i, t - 1] == 1 if t > 0 else instance.initial[i].initially_on
            now_on = y[i, t] == 1
            if was_on and not now_on:
                on_run = (
                    history.t_on[i, t - 1]
                    if t > 0
                    else instance.initial[i].steps_in_state
                )
                if on_run < unit.t_up_min:
                    min_up.append((i, t))
            elif now_on and not was_on:
                off_run = _off_duration_before(instance, history, i, t)
                if off_run < unit.t_down_min:
                    min_down.append((i, t))

    p_max = instance.p_max
    reserve_deficit = tuple(
        max(
            0.0,
            float(
                instance.load[t]
                + instance.reserve[t]
                - np.sum(p_max * y[:, t])
            ),
        )
        for t in range(instance.horizon)
    )

    feasible = (
        all(abs(r) <= tol.load for r in load_residual)
        and not range_violations
        and not min_up
        and not min_down
        and all(d <= tol.reserve for d in reserve_deficit)
    )
    return FeasibilityReport(
        load_residual=load_residual,
        range_violations=tuple(range_violations),
        min_up_violations=tuple(min_up),
        min_down_violations=tuple(min_down),
        reserve_deficit=reserve_deficit,
        feasible=feasible,
        tolerances=tol,
    )
