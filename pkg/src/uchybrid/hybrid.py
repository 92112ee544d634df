"""Iterative hybrid driver: per-step QAOA sweeps around classical dispatch."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .cost import CostBreakdown, FeasibilityReport, audit, production_cost
from .dispatch import dispatch_objective, optimize_dispatch
from .model import Dispatch, Instance, Schedule, compute_history
from .qaoa import QaoaConfig, run_qaoa
from .qubo import FORCED_OFF, FORCED_ON, PenaltyWeights, build_context, build_qubo

__all__ = ["HybridConfig", "HybridSolution", "solve", "convergence_iteration"]


@dataclass(frozen=True)
class HybridConfig:
    n_it: Optional[int] = None  # None: use the instance default for the mode
    lambda_loop: float = 0.5
    lambda_final: float = 1e4
    budget_loop: int = 10_000
    budget_final: int = 10_000_000
    qaoa: QaoaConfig = field(default_factory=QaoaConfig)
    weights: PenaltyWeights = field(default_factory=PenaltyWeights)
    seed: int = 0

    def __post_init__(self):
        for name in ("lambda_loop", "lambda_final", "budget_loop", "budget_final"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class HybridSolution:
    schedule: Schedule
    dispatch: Dispatch
    cost: CostBreakdown
    audit: FeasibilityReport
    convergence_iteration: Optional[int]
    trace: tuple[tuple[str, float], ...]

    def to_dict(self) -> dict:
        return {
            "schedule": self.schedule.y.tolist(),
            "dispatch": self.dispatch.p.tolist(),
            "cost": self.cost.to_dict(),
            "feasibility": self.audit.to_dict(),
            "convergence_iteration": self.convergence_iteration,
            "trace": [
                {"iteration": k, "schedule": key, "objective": obj}
                for k, (key, obj) in enumerate(self.trace)
            ],
        }


def convergence_iteration(schedule_keys) -> Optional[int]:
    """Smallest iteration from which the schedule never changes again."""
    keys = list(schedule_keys)
    if not keys:
        raise ValueError("empty trace")
    last = keys[-1]
    if len(keys) >= 2 and keys[-2] != last:
        return None
    k = len(keys) - 1
    while k > 0 and keys[k - 1] == last:
        k -= 1
    return k


def _sweep_seed(seed: int, sweep: int, t: int) -> int:
    return int(np.random.SeedSequence(entropy=(seed, sweep, t)).generate_state(1)[0])


def solve(
    instance: Instance,
    cfg: HybridConfig,
    trace_hook=None,
) -> HybridSolution:
    """Run the full hybrid loop on one instance.

    Power levels start at every unit's maximum; each sweep re-solves the
    per-step commitment with QAOA (in time order, histories propagating
    within the sweep), each loop iteration re-optimizes the committed powers
    at the low penalty weight, and a final high-penalty dispatch polishes
    the power levels for the final schedule.
    """
    n, horizon = instance.n_units, instance.horizon
    n_it = cfg.n_it if cfg.n_it is not None else instance.default_n_it(cfg.qaoa.mode)

    powers = np.tile(instance.p_max.astype(float)[:, None], (1, horizon))
    y = np.zeros((n, horizon), dtype=np.int8)

    p_max = instance.p_max.astype(float)

    def commitment_filter(ctx, need):
        """Hard commitment constraints for post-selecting sampled columns:
        reserve coverage and the min up/down pins."""

        def accept(bits: np.ndarray) -> bool:
            for i, state in enumerate(ctx.forced_state):
                if state == FORCED_ON and bits[i] != 1:
                    return False
                if state == FORCED_OFF and bits[i] != 0:
                    return False
            return float(p_max @ bits) >= need - 1e-9

        return accept

    def qaoa_sweep(sweep_idx: int, y_current: np.ndarray) -> np.ndarray:
        y_new = y_current.copy()
        for t in range(horizon):
            schedule = Schedule(y_new)
            history = compute_history(instance, schedule)
            ctx = build_context(
                instance,
                schedule,
                Dispatch(p=np.maximum(powers, 0.0)),
                history,
                t,
                powers=powers[:, t],
            )
            problem = build_qubo(instance, ctx, cfg.weights)
            qaoa_cfg = replace(cfg.qaoa, seed=_sweep_seed(cfg.seed, sweep_idx, t))
            # The initial sweep takes the raw best sample; loop sweeps
            # post-select on the commitment-only constraints.
            post_filter = None
            if sweep_idx > 0:
                need = float(instance.load[t] + instance.reserve[t])
                post_filter = commitment_filter(ctx, need)
            result = run_qaoa(problem, qaoa_cfg, commitment_filter=post_filter)
            y_new[:, t] = result.best_bits[:n]
            if trace_hook is not None:
                trace_hook(sweep_idx, t, result)
        return y_new

    trace: list[tuple[str, float]] = []

    y = qaoa_sweep(0, y)
    trace.append(
        (Schedule(y).key(), dispatch_objective(instance, Schedule(y), powers.ravel(), cfg.lambda_loop))
    )

    p_max_matrix = np.tile(instance.p_max.astype(float)[:, None], (1, horizon))
    for sweep_idx in range(1, n_it + 1):
        schedule = Schedule(y)
        # The loop refinement is the paper's crude "estimate" phase: plain
        # trust-region descent from the running power vector, no presolve.
        refined = optimize_dispatch(
            instance, schedule, powers, cfg.lambda_loop, cfg.budget_loop,
            presolve=False,
        )
        # Committed slots take their dispatched level; everything else
        # reverts to the initial full-capacity guess.
        powers = np.where(schedule.y == 1, refined.p, p_max_matrix)
        y = qaoa_sweep(sweep_idx, y)
        trace.append(
            (
                Schedule(y).key(),
                dispatch_objective(instance, Schedule(y), powers.ravel(), cfg.lambda_loop),
            )
        )

    schedule = Schedule(y)
    final = optimize_dispatch(
        instance, schedule, powers, cfg.lambda_final, cfg.budget_final
    )
    cost = production_cost(instance, schedule, final)
    report = audit(instance, schedule, final)
    return HybridSolution(
        schedule=schedule,
        dispatch=final,
        cost=cost,
        audit=report,
        convergence_iteration=convergence_iteration(key for key, _ in trace),
        trace=tuple(trace),
    )
