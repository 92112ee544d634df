"""Per-time-step QUBO construction and the Ising-form transform.

One commitment subproblem per time step: decision bits are the unit on/off
states, binary slack bits absorb the spinning-reserve surplus, and the load
balance enters as a covering (deficit-only) penalty carried alongside the
quadratic core.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cost import fuel_cost, startup_cost
from .model import Dispatch, HistoryState, Instance, Schedule, ValidationError

__all__ = [
    "PenaltyWeights",
    "QuboProblem",
    "IsingModel",
    "TimeStepContext",
    "FREE",
    "FORCED_ON",
    "FORCED_OFF",
    "build_context",
    "build_qubo",
    "slack_bits_for_range",
    "qubo_to_ising",
    "evaluate_qubo",
    "energy_table",
    "SlackedTerm",
    "DeficitTerm",
]

FREE = "free"
FORCED_ON = "forced_on"
FORCED_OFF = "forced_off"


@dataclass(frozen=True)
class PenaltyWeights:
    """Constraint weights in the commitment subproblem."""

    load: float = 1.0
    up_down: float = 1e5
    reserve: float = 2.0


@dataclass(frozen=True)
class DeficitTerm:
    """weight * max(0, target - coeffs . x)**2, a covering penalty."""

    weight: float
    coeffs: np.ndarray
    target: float

    def value(self, bits: np.ndarray) -> float:
        short = self.target - float(self.coeffs @ bits[: len(self.coeffs)])
        return self.weight * short * short if short > 0 else 0.0


@dataclass(frozen=True)
class SlackedTerm:
    """Bookkeeping for weight * (coeffs . y - target - s)^2 with binary s.

    Lets the engine recover the optimal slack setting for a sampled
    commitment: s* = clip(round(coeffs . y - target), 0, capacity).
    """

    name: str
    weight: float
    coeffs: np.ndarray
    target: float
    first_bit: int
    bit_weights: tuple[float, ...]

    @property
    def capacity(self) -> float:
        return float(sum(self.bit_weights))

    def optimal_slack(self, decision_bits: np.ndarray) -> int:
        resid = float(self.coeffs @ decision_bits) - self.target
        return int(np.clip(round(resid), 0, self.capacity))


@dataclass(frozen=True)
class QuboProblem:
    """Quadratic objective over decision + slack bits.

    The quadratic core is x^T Q x + b^T x + constant with Q symmetric;
    deficit_terms add piecewise covering penalties on top (they are not
    representable as a fixed-size quadratic without further slack bits).
    """

    n_decision: int
    n_slack: int
    linear: np.ndarray
    quadratic: np.ndarray
    constant: float
    slack_layout: tuple[tuple[str, tuple[int, int], tuple[float, ...]], ...] = ()
    deficit_terms: tuple[DeficitTerm, ...] = ()
    slack_terms: tuple[SlackedTerm, ...] = ()

    @property
    def n_bits(self) -> int:
        return self.n_decision + self.n_slack

    def quadratic_value(self, bits: np.ndarray) -> float:
        x = np.asarray(bits, dtype=float)
        return float(x @ self.quadratic @ x + self.linear @ x + self.constant)


@dataclass(frozen=True)
class IsingModel:
    """Spin form of the quadratic core under x_i = (1 - z_i) / 2."""

    couplings: np.ndarray
    fields: np.ndarray
    offset: float

    @property
    def n_spins(self) -> int:
        return len(self.fields)

    def value(self, spins: np.ndarray) -> float:
        z = np.asarray(spins, dtype=float)
        return float(z @ self.couplings @ z + self.fields @ z + self.offset)


@dataclass(frozen=True)
class TimeStepContext:
    """Everything the commitment subproblem at step t depends on."""

    t: int
    powers: np.ndarray
    prev_y: np.ndarray
    t_on_prev: np.ndarray
    t_off_prev: np.ndarray
    forced_state: tuple[str, ...] = field(default=())


def build_context(
    instance: Instance,
    schedule: Schedule,
    dispatch: Dispatch,
    history: HistoryState,
    t: int,
    powers: np.ndarray | None = None,
) -> TimeStepContext:
    """Specialize histories and dispatch to time t.

    schedule/history columns before t must be final.  ``powers`` overrides
    the dispatch column (the driver passes its working power vector so that
    uncommitted units keep an informative power estimate).
    """
    if not 0 <= t < instance.horizon:
        raise IndexError(f"time index {t} out of range")
    n = instance.n_units
    if t == 0:
        prev_y = np.array(
            [1 if c.initially_on else 0 for c in instance.initial], dtype=np.int8
        )
        t_on_prev = np.array(
            [c.steps_in_state if c.initially_on else 0 for c in instance.initial],
            dtype=float,
        )
        t_off_prev = np.array(
            [0 if c.initially_on else c.steps_in_state for c in instance.initial],
            dtype=float,
        )
    else:
        prev_y = schedule.y[:, t - 1].copy()
        t_on_prev = history.t_on[:, t - 1].astype(float)
        t_off_prev = history.t_off[:, t - 1].astype(float)

    forced = []
    for i, unit in enumerate(instance.units):
        if prev_y[i] == 1 and t_on_prev[i] < unit.t_up_min:
            forced.append(FORCED_ON)
        elif prev_y[i] == 0 and t_off_prev[i] < unit.t_down_min:
            forced.append(FORCED_OFF)
        else:
            forced.append(FREE)

    column = powers if powers is not None else dispatch.p[:, t]
    return TimeStepContext(
        t=t,
        powers=np.asarray(column, dtype=float).copy(),
        prev_y=prev_y,
        t_on_prev=t_on_prev,
        t_off_prev=t_off_prev,
        forced_state=tuple(forced),
    )


def slack_bits_for_range(value: float) -> int:
    """Bits needed for an integer slack spanning 0..value (1 MW granularity)."""
    if value < 0:
        raise ValidationError("slack range must be nonnegative")
    span = math.floor(value)
    return 0 if span == 0 else math.ceil(math.log2(span + 1))


def _add_square(
    quadratic: np.ndarray,
    linear: np.ndarray,
    weight: float,
    coeffs: np.ndarray,
    shift: float,
) -> float:
    """Accumulate weight * (coeffs . x + shift)^2; returns the constant part."""
    quadratic += weight * np.outer(coeffs, coeffs)
    linear += 2.0 * weight * shift * coeffs
    return weight * shift * shift


def build_qubo(
    instance: Instance,
    ctx: TimeStepContext,
    weights: PenaltyWeights | None = None,
) -> QuboProblem:
    """Commitment objective at one time step over unit bits + reserve slack.

    fuel(p_i)·y_i + start-up·y_i for units off at t-1, pinned bits for
    min-up/down, a covering load penalty at the current powers, and the
    reserve constraint with binary slack absorbing the capacity surplus.
    """
    w = weights or PenaltyWeights()
    n = instance.n_units
    t = ctx.t
    p_max = instance.p_max
    load = float(instance.load[t])
    need = load + float(instance.reserve[t])

    surplus_range = float(np.sum(p_max) - need)
    n_slack = slack_bits_for_range(max(0.0, surplus_range))
    n_bits = n + n_slack

    quadratic = np.zeros((n_bits, n_bits))
    linear = np.zeros(n_bits)
    constant = 0.0

    # Fuel at the frozen powers, plus hot/cold start for units off at t-1.
    for i, unit in enumerate(instance.units):
        coef = fuel_cost(unit, max(0.0, float(ctx.powers[i])))
        if ctx.prev_y[i] == 0:
            coef += startup_cost(unit, ctx.t_off_prev[i])
        linear[i] += coef

    # Min up/down pins: (y_i - required)^2.
    for i, state in enumerate(ctx.forced_state):
        if state == FREE:
            continue
        required = 1.0 if state == FORCED_ON else 0.0
        quadratic[i, i] += w.up_down
        linear[i] += -2.0 * w.up_down * required
        constant += w.up_down * required * required

    # Reserve: (sum p_max_i y_i - need - s)^2 with s = sum 2^k s_k.
    coeffs = np.zeros(n_bits)
    coeffs[:n] = p_max
    slack_weights = tuple(float(2**k) for k in range(n_slack))
    coeffs[n:] = [-wgt for wgt in slack_weights]
    constant += _add_square(quadratic, linear, w.reserve, coeffs, -need)

    # Load balance as a covering penalty on the decision bits.
    deficit = DeficitTerm(
        weight=w.load,
        coeffs=np.maximum(0.0, ctx.powers.astype(float)),
        target=load,
    )

    quadratic = 0.5 * (quadratic + quadratic.T)
    layout = (("reserve", (n, n_bits), slack_weights),) if n_slack else ()
    slack_terms = (
        (
            SlackedTerm(
                name="reserve",
                weight=w.reserve,
                coeffs=p_max.astype(float),
                target=need,
                first_bit=n,
                bit_weights=slack_weights,
            ),
        )
        if n_slack
        else ()
    )
    return QuboProblem(
        n_decision=n,
        n_slack=n_slack,
        linear=linear,
        quadratic=quadratic,
        constant=constant,
        slack_layout=layout,
        deficit_terms=(deficit,),
        slack_terms=slack_terms,
    )


def evaluate_qubo(problem: QuboProblem, bits) -> float:
    """Objective value of a full bit assignment (decision + slack)."""
    x = np.asarray(bits, dtype=float).ravel()
    if x.shape != (problem.n_bits,):
        raise ValidationError(
            f"bitstring length {x.shape} does not match {problem.n_bits} bits"
        )
    value = problem.quadratic_value(x)
    for term in problem.deficit_terms:
        value += term.value(x)
    return value


def qubo_to_ising(problem: QuboProblem) -> IsingModel:
    """Exact spin transform of the quadratic core (x = (1 - z) / 2)."""
    q = problem.quadratic
    b = problem.linear
    n = problem.n_bits
    row_sums = q.sum(axis=1)
    couplings = q / 4.0
    np.fill_diagonal(couplings, 0.0)
    fields = -row_sums / 2.0 - b / 2.0
    offset = (
        float(q.sum()) / 4.0
        + float(np.trace(q)) / 4.0
        + float(b.sum()) / 2.0
        + problem.constant
    )
    return IsingModel(couplings=couplings, fields=fields, offset=offset)


def energy_table(problem: QuboProblem, dtype=np.float64) -> np.ndarray:
    """Objective value of every bit assignment, indexed by the little-endian
    integer encoding (bit j of the index is variable j).

    Built by doubling so the cost is O(n^2 2^n) adds rather than 4^n.
    """
    n = problem.n_bits
    q = problem.quadratic
    b = problem.linear

    energies = np.zeros(1, dtype=dtype)
    for j in range(n):
        cross = np.zeros(energies.shape[0], dtype=dtype)
        for k in range(j):
            view = cross.reshape(2 ** (j - 1 - k), 2, 2**k)
            view[:, 1, :] += 2.0 * q[k, j]
        step = cross + (b[j] + q[j, j])
        energies = np.concatenate([energies, energies + step])
    energies += problem.constant

    for term in problem.deficit_terms:
        lhs = np.zeros(1, dtype=dtype)
        for j in range(n):
            coef = term.coeffs[j] if j < len(term.coeffs) else 0.0
            lhs = np.concatenate([lhs, lhs + dtype(coef)])
        shortfall = np.maximum(0.0, term.target - lhs)
        energies += term.weight * shortfall * shortfall
    return energies
