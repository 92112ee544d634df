"""Continuous power subproblem for a fixed commitment schedule."""
from __future__ import annotations

import numpy as np

from . import optim
from .model import Dispatch, Instance, Schedule, ValidationError

__all__ = [
    "dispatch_objective",
    "optimize_dispatch",
    "DispatchProblem",
    "economic_dispatch",
    "forward_ramp_dispatch",
]


def economic_dispatch(
    b: np.ndarray, c: np.ndarray, lo: np.ndarray, hi: np.ndarray, load: float
) -> np.ndarray:
    """Equal-marginal-cost split of ``load`` across units with box bounds.

    Bisection on the shared marginal cost b_i + 2 c_i p_i with clipping; for
    loads outside [sum lo, sum hi] the nearest bound vector is returned.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if load <= lo.sum():
        return lo.copy()
    if load >= hi.sum():
        return hi.copy()

    def supply(mu: float) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            p = np.where(c > 0, (mu - b) / (2.0 * np.maximum(c, 1e-300)), np.where(mu >= b, hi, lo))
        return np.clip(p, lo, hi)

    mu_lo = float(np.min(b + 2.0 * c * lo)) - 1.0
    mu_hi = float(np.max(b + 2.0 * c * hi)) + 1.0
    for _ in range(200):
        mu = 0.5 * (mu_lo + mu_hi)
        if supply(mu).sum() < load:
            mu_lo = mu
        else:
            mu_hi = mu
    return supply(mu_hi)


def forward_ramp_dispatch(
    instance: Instance, schedule: Schedule, sweeps: int = 6
) -> np.ndarray:
    """Per-step economic dispatch with ramp-tightened boxes.

    One forward pass, then Gauss-Seidel sweeps where each step's boxes are
    induced by both neighbours, so ramp trade-offs across steps settle.
    Serves as an analytic starting point for the penalized optimizer.
    """
    n, horizon = schedule.y.shape
    p = np.zeros((n, horizon))
    b = np.array([u.b for u in instance.units])
    c = np.array([u.c for u in instance.units])

    def redispatch(t: int, use_next: bool) -> None:
        on = np.where(schedule.y[:, t] == 1)[0]
        if len(on) == 0:
            return
        lo = np.array([instance.units[i].p_min for i in on])
        hi = np.array([instance.units[i].p_max for i in on])
        for k, i in enumerate(on):
            unit = instance.units[i]
            prev = None
            if t == 0:
                init = instance.initial[i]
                if init.initially_on and init.initial_power is not None:
                    prev = init.initial_power
            elif schedule.y[i, t - 1] == 1:
                prev = p[i, t - 1]
            if prev is not None:
                lo[k] = max(lo[k], prev - unit.ramp_down)
                hi[k] = min(hi[k], prev + unit.ramp_up)
            if use_next and t + 1 < horizon and schedule.y[i, t + 1] == 1:
                nxt = p[i, t + 1]
                lo[k] = max(lo[k], nxt - unit.ramp_up)
                hi[k] = min(hi[k], nxt + unit.ramp_down)
        lo = np.minimum(lo, hi)  # ramp window may be empty; keep it sane
        p[on, t] = economic_dispatch(b[on], c[on], lo, hi, float(instance.load[t]))

    for t in range(horizon):
        redispatch(t, use_next=False)
    for _ in range(sweeps):
        for t in range(horizon - 1, -1, -1):
            redispatch(t, use_next=True)
        for t in range(horizon):
            redispatch(t, use_next=True)
    return p


class DispatchProblem:
    """Penalized dispatch objective with committed-slot masks precomputed.

    Powers of uncommitted units are zeroed before evaluation; the load
    balance is a quadratic equality penalty per time step and ramp limits
    between consecutive committed steps enter as one-sided quadratic hinges.
    Absolute power bounds are left to the optimizer's box constraints.
    """

    def __init__(self, instance: Instance, schedule: Schedule, lam: float):
        n, horizon = instance.n_units, instance.horizon
        if schedule.y.shape != (n, horizon):
            raise ValidationError("schedule shape does not match instance")
        self.instance = instance
        self.schedule = schedule
        self.lam = float(lam)
        self.on = schedule.y.astype(bool)
        self.a = np.array([u.a for u in instance.units])[:, None]
        self.b = np.array([u.b for u in instance.units])[:, None]
        self.c = np.array([u.c for u in instance.units])[:, None]
        self.load = np.asarray(instance.load, dtype=float)

        ramp_up = np.array([u.ramp_up for u in instance.units])
        ramp_dn = np.array([u.ramp_down for u in instance.units])
        pairs = []
        for i in range(n):
            init = instance.initial[i]
            if (
                self.on[i, 0]
                and init.initially_on
                and init.initial_power is not None
            ):
                pairs.append((i, -1, init.initial_power, ramp_up[i], ramp_dn[i]))
            for t in range(1, horizon):
                if self.on[i, t - 1] and self.on[i, t]:
                    pairs.append((i, t - 1, None, ramp_up[i], ramp_dn[i]))
        self.ramp_pairs = pairs

        self.free_idx = np.argwhere(self.on)  # committed (i, t) slots
        self.lower = np.array([instance.units[i].p_min for i, _ in self.free_idx])
        self.upper = np.array([instance.units[i].p_max for i, _ in self.free_idx])

    def value(self, p_flat: np.ndarray) -> float:
        n, horizon = self.on.shape
        p = np.asarray(p_flat, dtype=float).reshape(n, horizon) * self.on
        fuel = float(np.sum((self.a + self.b * p + self.c * p * p)[self.on]))
        residual = p.sum(axis=0) - self.load
        penalty = float(self.lam * np.sum(residual * residual))
        for i, t_prev, fixed_prev, r_up, r_dn in self.ramp_pairs:
            prev = fixed_prev if fixed_prev is not None else p[i, t_prev]
            cur = p[i, t_prev + 1]
            up_violation = max(0.0, cur - prev - r_up)
            dn_violation = max(0.0, prev - cur - r_dn)
            penalty += self.lam * (up_violation**2 + dn_violation**2)
        return fuel + penalty

    # reduced view over committed slots only

    def pack(self, p_matrix: np.ndarray) -> np.ndarray:
        return np.array([p_matrix[i, t] for i, t in self.free_idx])

    def unpack(self, x: np.ndarray) -> np.ndarray:
        p = np.zeros(self.on.shape)
        for value, (i, t) in zip(x, self.free_idx):
            p[i, t] = value
        return p

    def reduced_value(self, x: np.ndarray) -> float:
        return self.value(self.unpack(x).ravel())


def dispatch_objective(
    instance: Instance, schedule: Schedule, p_flat: np.ndarray, lam: float
) -> float:
    """Penalized dispatch objective over a flat (n_units x horizon) vector."""
    p_flat = np.asarray(p_flat, dtype=float).ravel()
    expected = instance.n_units * instance.horizon
    if p_flat.shape != (expected,):
        raise ValidationError(f"power vector length {p_flat.shape[0]} != {expected}")
    return DispatchProblem(instance, schedule, lam).value(p_flat)


def optimize_dispatch(
    instance: Instance,
    schedule: Schedule,
    p_init: np.ndarray,
    lam: float,
    budget: int,
    presolve: bool = True,
) -> Dispatch:
    """Minimize the penalized dispatch objective over the committed slots.

    Off units are excluded from the search and come back as zeros in the
    returned Dispatch; the start point is projected into the absolute boxes.
    With ``presolve`` the analytic ramp-aware dispatch is offered as an
    alternative start (the penalized objective is a narrow curved valley at
    large lam, which the linear-model trust region traverses slowly).
    """
    problem = DispatchProblem(instance, schedule, lam)
    if len(problem.free_idx) == 0:
        return Dispatch(p=np.zeros(problem.on.shape))
    p_init = np.asarray(p_init, dtype=float).reshape(problem.on.shape)
    x0 = np.clip(problem.pack(p_init), problem.lower, problem.upper)

    if presolve:
        x_alt = np.clip(
            problem.pack(forward_ramp_dispatch(instance, schedule)),
            problem.lower,
            problem.upper,
        )
        if problem.reduced_value(x_alt) < problem.reduced_value(x0):
            x0 = x_alt

    span = problem.upper - problem.lower
    scale = np.where(span > 0, span, 1.0)

    def scaled_objective(z: np.ndarray) -> float:
        return problem.reduced_value(problem.lower + z * scale)

    result = optim.minimize(
        optim.OptimProblem(
            dimension=len(x0),
            objective=scaled_objective,
            lower=np.zeros(len(x0)),
            upper=np.ones(len(x0)),
            maxiter=int(budget),
        ),
        (x0 - problem.lower) / scale,
    )
    best = problem.lower + result.x_best * scale
    return Dispatch(p=problem.unpack(best))
