"""Domain types for unit-commitment instances, schedules and time histories."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "UnitSpec",
    "InitialCondition",
    "Instance",
    "Schedule",
    "Dispatch",
    "HistoryState",
    "ParseError",
    "ValidationError",
    "InfeasibleInstanceError",
    "parse_instance",
    "serialize_instance",
    "compute_history",
    "operating_range",
]


class ParseError(ValueError):
    """The instance document does not match the expected schema."""


class ValidationError(ValueError):
    """The instance document parses but violates a model invariant."""


class InfeasibleInstanceError(ValidationError):
    """Total capacity cannot cover load plus reserve at some time step."""

    def __init__(self, t: int, capacity: float, required: float):
        self.t = t
        super().__init__(
            f"instance is infeasible at t={t + 1}: total capacity "
            f"{capacity:g} MW < load + reserve {required:g} MW"
        )


@dataclass(frozen=True)
class UnitSpec:
    """Static parameters of one generating unit."""

    p_min: float
    p_max: float
    a: float
    b: float
    c: float
    hot_start_cost: float
    cold_start_cost: float
    cold_start_time: int
    t_down_min: int
    t_up_min: int
    ramp_down: float
    ramp_up: float
    name: str = ""

    def validate(self, where: str = "unit") -> None:
        if not 0 <= self.p_min <= self.p_max:
            raise ValidationError(f"{where}: requires 0 <= p_min <= p_max")
        if self.c < 0:
            raise ValidationError(f"{where}: quadratic cost coefficient c must be >= 0")
        if self.hot_start_cost > self.cold_start_cost:
            raise ValidationError(f"{where}: hot start cost exceeds cold start cost")
        for attr in ("cold_start_time", "t_down_min", "t_up_min"):
            if getattr(self, attr) < 0:
                raise ValidationError(f"{where}: {attr} must be >= 0")
        if self.ramp_down < 0 or self.ramp_up < 0:
            raise ValidationError(f"{where}: ramp rates must be >= 0")


@dataclass(frozen=True)
class InitialCondition:
    """Pre-horizon state of one unit.

    ``initial_power`` may be None for a unit that is on but whose pre-horizon
    dispatch is unknown; ramp limits are then not tightened at the first step.
    """

    initially_on: bool = False
    steps_in_state: int = 1
    initial_power: Optional[float] = 0.0

    def validate(self, unit: UnitSpec, where: str = "initial") -> None:
        if self.steps_in_state < 1:
            raise ValidationError(f"{where}: steps_in_state must be >= 1")
        if self.initially_on and self.initial_power is not None:
            if not unit.p_min <= self.initial_power <= unit.p_max:
                raise ValidationError(
                    f"{where}: initial power {self.initial_power:g} outside "
                    f"[{unit.p_min:g}, {unit.p_max:g}]"
                )


def default_initial_condition(unit: UnitSpec) -> InitialCondition:
    """Off long enough that the first activation is a cold start and min
    downtime never blocks the first step."""
    return InitialCondition(
        initially_on=False,
        steps_in_state=unit.t_down_min + unit.cold_start_time + 1,
        initial_power=0.0,
    )


@dataclass(frozen=True)
class Instance:
    """One unit-commitment problem: units, horizon, demand and reserve."""

    name: str
    units: tuple[UnitSpec, ...]
    load: np.ndarray
    reserve: np.ndarray
    initial: tuple[InitialCondition, ...]
    n_it_default: dict = field(default_factory=dict)

    @property
    def n_units(self) -> int:
        return len(self.units)

    @property
    def horizon(self) -> int:
        return len(self.load)

    @property
    def p_min(self) -> np.ndarray:
        return np.array([u.p_min for u in self.units])

    @property
    def p_max(self) -> np.ndarray:
        return np.array([u.p_max for u in self.units])

    def default_n_it(self, mode: str) -> int:
        return int(self.n_it_default.get(mode, 3))

    def validate(self) -> None:
        if len(self.units) == 0:
            raise ValidationError("instance has no units")
        if len(self.load) != len(self.reserve):
            raise ValidationError("load and reserve series have different lengths")
        if len(self.load) == 0:
            raise ValidationError("horizon is empty")
        for i, u in enumerate(self.units):
            u.validate(f"units[{i}]")
            self.initial[i].validate(u, f"units[{i}].initial")
        capacity = float(np.sum(self.p_max))
        for t in range(self.horizon):
            required = float(self.load[t] + self.reserve[t])
            if capacity < required:
                raise InfeasibleInstanceError(t, capacity, required)


@dataclass(frozen=True)
class Schedule:
    """Binary commitment matrix, shape (n_units, horizon)."""

    y: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.int8)
        if not np.isin(y, (0, 1)).all():
            raise ValidationError("schedule entries must be 0 or 1")
        object.__setattr__(self, "y", y)

    def column_key(self, t: int) -> str:
        return "".join(str(int(v)) for v in self.y[:, t])

    def key(self) -> str:
        return "|".join(self.column_key(t) for t in range(self.y.shape[1]))


@dataclass(frozen=True)
class Dispatch:
    """Continuous power matrix, shape (n_units, horizon)."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if (p < 0).any():
            raise ValidationError("dispatch entries must be nonnegative")
        object.__setattr__(self, "p", p)


@dataclass(frozen=True)
class HistoryState:
    """Consecutive on/off step counters per unit and time."""

    t_on: np.ndarray
    t_off: np.ndarray


def compute_history(instance: Instance, schedule: Schedule) -> HistoryState:
    """Run the on/off counter recurrences over the whole schedule.

    At each (i, t) exactly one of t_on, t_off is zero.  The first step is
    seeded from the unit's initial condition: a persisting state continues
    counting from steps_in_state, a flipped state restarts at 1.
    """
    n, horizon = schedule.y.shape
    if (n, horizon) != (instance.n_units, instance.horizon):
        raise ValidationError(
            f"schedule shape {(n, horizon)} does not match instance "
            f"{(instance.n_units, instance.horizon)}"
        )
    t_on = np.zeros((n, horizon), dtype=np.int64)
    t_off = np.zeros((n, horizon), dtype=np.int64)
    for i in range(n):
        init = instance.initial[i]
        for t in range(horizon):
            on = schedule.y[i, t] == 1
            if t == 0:
                if on:
                    t_on[i, t] = init.steps_in_state + 1 if init.initially_on else 1
                else:
                    t_off[i, t] = 1 if init.initially_on else init.steps_in_state + 1
            else:
                if on:
                    t_on[i, t] = 1 + t_on[i, t - 1]
                else:
                    t_off[i, t] = 1 + t_off[i, t - 1]
    return HistoryState(t_on=t_on, t_off=t_off)


def operating_range(
    instance: Instance,
    schedule: Schedule,
    dispatch: Dispatch,
    i: int,
    t: int,
) -> tuple[float, float]:
    """Power bounds for unit i at step t, tightened by ramp limits when the
    unit stays on across t-1 -> t."""
    n, horizon = schedule.y.shape
    if not (0 <= i < n and 0 <= t < horizon):
        raise IndexError(f"unit/time index ({i}, {t}) out of range")
    unit = instance.units[i]
    if schedule.y[i, t] != 1:
        return unit.p_min, unit.p_max
    if t == 0:
        init = instance.initial[i]
        if not init.initially_on or init.initial_power is None:
            return unit.p_min, unit.p_max
        prev_power = init.initial_power
    else:
        if schedule.y[i, t - 1] != 1:
            return unit.p_min, unit.p_max
        prev_power = float(dispatch.p[i, t - 1])
    lo = max(unit.p_min, prev_power - unit.ramp_down)
    hi = min(unit.p_max, prev_power + unit.ramp_up)
    return lo, hi


_UNIT_KEYS = {
    "p_min": "p_min",
    "p_max": "p_max",
    "a": "a",
    "b": "b",
    "c": "c",
    "hot_start": "hot_start_cost",
    "cold_start": "cold_start_cost",
    "cold_start_time": "cold_start_time",
    "t_down": "t_down_min",
    "t_up": "t_up_min",
    "ramp_down": "ramp_down",
    "ramp_up": "ramp_up",
}

_INT_FIELDS = {"cold_start_time", "t_down_min", "t_up_min"}


def _parse_unit(obj: dict, idx: int) -> tuple[UnitSpec, InitialCondition]:
    if not isinstance(obj, dict):
        raise ParseError(f"units[{idx}] must be an object")
    kwargs = {}
    for key, attr in _UNIT_KEYS.items():
        if key not in obj:
            raise ParseError(f"units[{idx}]: missing field '{key}'")
        value = obj[key]
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ParseError(f"units[{idx}]: field '{key}' must be a number")
        kwargs[attr] = int(value) if attr in _INT_FIELDS else float(value)
    unit = UnitSpec(name=str(obj.get("name", f"unit{idx + 1}")), **kwargs)

    if "initial" in obj:
        init_obj = obj["initial"]
        if not isinstance(init_obj, dict) or "on" not in init_obj:
            raise ParseError(f"units[{idx}]: field 'initial' must be an object with 'on'")
        power = init_obj.get("power", 0.0)
        init = InitialCondition(
            initially_on=bool(init_obj["on"]),
            steps_in_state=int(init_obj.get("steps", 1)),
            initial_power=None if power is None else float(power),
        )
    else:
        init = default_initial_condition(unit)
    return unit, init


def parse_instance(text: str) -> Instance:
    """Parse and validate a JSON instance document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    for key in ("name", "units", "load", "reserve"):
        if key not in doc:
            raise ParseError(f"missing top-level field '{key}'")
    if not isinstance(doc["units"], list) or not doc["units"]:
        raise ParseError("field 'units' must be a non-empty array")
    for key in ("load", "reserve"):
        if not isinstance(doc[key], list):
            raise ParseError(f"field '{key}' must be an array")

    units, initial = [], []
    for idx, obj in enumerate(doc["units"]):
        unit, init = _parse_unit(obj, idx)
        units.append(unit)
        initial.append(init)

    n_it = doc.get("n_it", {})
    if isinstance(n_it, (int, float)):
        n_it = {"standard": int(n_it), "warm_start": int(n_it)}
    elif not isinstance(n_it, dict):
        raise ParseError("field 'n_it' must be an integer or an object")

    instance = Instance(
        name=str(doc["name"]),
        units=tuple(units),
        load=np.asarray(doc["load"], dtype=float),
        reserve=np.asarray(doc["reserve"], dtype=float),
        initial=tuple(initial),
        n_it_default={k: int(v) for k, v in n_it.items()},
    )
    instance.validate()
    return instance


def serialize_instance(instance: Instance) -> str:
    """Inverse of parse_instance (parse(serialize(x)) == x)."""
    units = []
    for unit, init in zip(instance.units, instance.initial):
        obj = {key: getattr(unit, attr) for key, attr in _UNIT_KEYS.items()}
        obj["name"] = unit.name
        obj["initial"] = {
            "on": init.initially_on,
            "steps": init.steps_in_state,
            "power": init.initial_power,
        }
        units.append(obj)
    doc = {
        "name": instance.name,
        "units": units,
        "load": list(map(float, instance.load)),
        "reserve": list(map(float, instance.reserve)),
    }
    if instance.n_it_default:
        doc["n_it"] = instance.n_it_default
    return json.dumps(doc, indent=2)
