"""Desk-scale reference solvers: exhaustive enumeration and a DP baseline."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .cost import audit, production_cost
from .dispatch import economic_dispatch, optimize_dispatch
from .hybrid import HybridSolution
from .model import Dispatch, Instance, Schedule, compute_history

__all__ = ["ReferenceLimits", "SizeLimitError", "NoFeasibleScheduleError", "solve_exact", "solve_dp"]


class SizeLimitError(RuntimeError):
    """The instance is too large for the requested reference method."""


class NoFeasibleScheduleError(RuntimeError):
    """No commitment schedule satisfies the constraints."""


@dataclass(frozen=True)
class ReferenceLimits:
    max_bits: int = 14
    dispatch_budget: int = 1_000_000
    max_dp_units: int = 12


def _column_candidates(instance: Instance, t: int) -> list[int]:
    """Commitment columns that can cover load and reserve at step t."""
    n = instance.n_units
    p_min, p_max = instance.p_min, instance.p_max
    need = float(instance.load[t] + instance.reserve[t])
    load = float(instance.load[t])
    out = []
    for mask in range(1 << n):
        bits = np.array([(mask >> i) & 1 for i in range(n)], dtype=float)
        cap = float(p_max @ bits)
        if cap < need - 1e-9 or cap < load - 1e-9:
            continue
        if float(p_min @ bits) > load + 1e-9:
            continue
        out.append(mask)
    return out


def _mask_bits(mask: int, n: int) -> np.ndarray:
    return np.array([(mask >> i) & 1 for i in range(n)], dtype=np.int8)


def _transition_ok(
    instance: Instance,
    prev_mask: int,
    mask: int,
    on_run: np.ndarray,
    off_run: np.ndarray,
) -> bool:
    for i, unit in enumerate(instance.units):
        was_on = (prev_mask >> i) & 1
        now_on = (mask >> i) & 1
        if was_on and not now_on and on_run[i] < unit.t_up_min:
            return False
        if now_on and not was_on and off_run[i] < unit.t_down_min:
            return False
    return True


def _initial_runs(instance: Instance) -> tuple[int, np.ndarray, np.ndarray]:
    mask0 = 0
    on_run = np.zeros(instance.n_units)
    off_run = np.zeros(instance.n_units)
    for i, init in enumerate(instance.initial):
        if init.initially_on:
            mask0 |= 1 << i
            on_run[i] = init.steps_in_state
        else:
            off_run[i] = init.steps_in_state
    return mask0, on_run, off_run


def _advance_runs(mask, on_run, off_run, n):
    new_on = np.zeros(n)
    new_off = np.zeros(n)
    for i in range(n):
        if (mask >> i) & 1:
            new_on[i] = on_run[i] + 1
        else:
            new_off[i] = off_run[i] + 1
    return new_on, new_off


def _solution_for(
    instance: Instance, schedule: Schedule, limits: ReferenceLimits, lam: float = 1e4
) -> HybridSolution:
    p_init = np.tile(instance.p_max.astype(float)[:, None], (1, instance.horizon))
    dispatch = optimize_dispatch(instance, schedule, p_init, lam, limits.dispatch_budget)
    cost = production_cost(instance, schedule, dispatch)
    report = audit(instance, schedule, dispatch)
    return HybridSolution(
        schedule=schedule,
        dispatch=dispatch,
        cost=cost,
        audit=report,
        convergence_iteration=None,
        trace=(),
    )


def solve_exact(
    instance: Instance, limits: ReferenceLimits | None = None
) -> HybridSolution:
    """Exhaustively enumerate schedules; dispatch and audit each survivor.

    Transition-infeasible and capacity-infeasible schedules are pruned per
    time step; the cheapest audited-feasible solution wins.
    """
    limits = limits or ReferenceLimits()
    n, horizon = instance.n_units, instance.horizon
    if n * horizon > limits.max_bits:
        raise SizeLimitError(
            f"{n * horizon} commitment bits exceed the {limits.max_bits}-bit "
            "enumeration limit; use the DP method instead"
        )
    candidates = [_column_candidates(instance, t) for t in range(horizon)]
    mask0, on0, off0 = _initial_runs(instance)

    best: HybridSolution | None = None

    def dfs(t: int, prev_mask: int, on_run, off_run, columns):
        nonlocal best
        if t == horizon:
            y = np.stack([_mask_bits(m, n) for m in columns], axis=1)
            solution = _solution_for(instance, Schedule(y), limits)
            if solution.audit.feasible and (
                best is None or solution.cost.total < best.cost.total
            ):
                best = solution
            return
        for mask in candidates[t]:
            if not _transition_ok(instance, prev_mask, mask, on_run, off_run):
                continue
            new_on, new_off = _advance_runs(mask, on_run, off_run, n)
            dfs(t + 1, mask, new_on, new_off, columns + [mask])

    dfs(0, mask0, on0, off0, [])
    if best is None:
        raise NoFeasibleScheduleError(f"no feasible schedule for '{instance.name}'")
    return best


def solve_dp(
    instance: Instance, limits: ReferenceLimits | None = None
) -> HybridSolution:
    """Layered dynamic program over commitment columns.

    Stage costs come from per-step economic dispatch (ramps ignored inside
    the DP); start-up classification uses the best predecessor's run
    lengths.  The winning path is re-dispatched with ramp penalties and
    audited, so the result is an audited upper bound.
    """
    limits = limits or ReferenceLimits()
    n, horizon = instance.n_units, instance.horizon
    if n > limits.max_dp_units:
        raise SizeLimitError(f"{n} units exceed the DP limit {limits.max_dp_units}")

    b = np.array([u.b for u in instance.units])
    c = np.array([u.c for u in instance.units])
    p_min, p_max = instance.p_min, instance.p_max

    def stage_cost(mask: int, t: int) -> float:
        on = [i for i in range(n) if (mask >> i) & 1]
        idx = np.array(on, dtype=int)
        powers = economic_dispatch(
            b[idx], c[idx], p_min[idx], p_max[idx], float(instance.load[t])
        )
        total = 0.0
        for k, i in enumerate(on):
            u = instance.units[i]
            total += u.a + u.b * powers[k] + u.c * powers[k] ** 2
        return total

    candidates = [_column_candidates(instance, t) for t in range(horizon)]
    mask0, on0, off0 = _initial_runs(instance)

    # Per-layer tables keyed by mask: (cost, prev_mask, on_run, off_run)
    layers: list[dict] = []
    table: dict = {}
    for mask in candidates[0]:
        if not _transition_ok(instance, mask0, mask, on0, off0):
            continue
        cost = stage_cost(mask, 0)
        for i, unit in enumerate(instance.units):
            started = ((mask >> i) & 1) and not ((mask0 >> i) & 1)
            if started:
                from .cost import startup_cost

                cost += startup_cost(unit, off0[i])
        new_on, new_off = _advance_runs(mask, on0, off0, n)
        table[mask] = (cost, None, new_on, new_off)
    layers.append(table)

    from .cost import startup_cost

    for t in range(1, horizon):
        table = {}
        stage = {mask: stage_cost(mask, t) for mask in candidates[t]}
        for mask in candidates[t]:
            best_entry = None
            for prev_mask, (prev_cost, _, on_run, off_run) in layers[t - 1].items():
                if not _transition_ok(instance, prev_mask, mask, on_run, off_run):
                    continue
                cost = prev_cost + stage[mask]
                for i, unit in enumerate(instance.units):
                    if ((mask >> i) & 1) and not ((prev_mask >> i) & 1):
                        cost += startup_cost(unit, off_run[i])
                if best_entry is None or cost < best_entry[0]:
                    best_entry = (cost, prev_mask, on_run, off_run)
            if best_entry is not None:
                cost, prev_mask, on_run, off_run = best_entry
                new_on, new_off = _advance_runs(mask, on_run, off_run, n)
                table[mask] = (cost, prev_mask, new_on, new_off)
        layers.append(table)

    if not layers[-1]:
        raise NoFeasibleScheduleError(f"no feasible DP path for '{instance.name}'")

    # Refine the best few end states with the full ramp-aware dispatch; the
    # DP ignores ramps, so the cheapest path is not always audit-feasible.
    order = sorted(layers[-1].items(), key=lambda kv: kv[1][0])
    best: HybridSolution | None = None
    for mask, _ in order[:8]:
        columns = [mask]
        for t in range(horizon - 1, 0, -1):
            columns.append(layers[t][columns[-1]][1])
        columns.reverse()
        y = np.stack([_mask_bits(m, n) for m in columns], axis=1)
        solution = _solution_for(instance, Schedule(y), limits)
        if solution.audit.feasible and (
            best is None or solution.cost.total < best.cost.total
        ):
            best = solution
            break
    if best is None:
        raise NoFeasibleScheduleError(
            f"no audited-feasible DP solution for '{instance.name}'"
        )
    return best
