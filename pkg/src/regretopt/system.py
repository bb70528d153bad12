"""Finite disturbance-driven systems.

A system is given by three finite alphabets (states, actions, disturbances), a
deterministic transition table ``transition[s, a, w] -> s'`` and a reward table
``reward[s, a, w]``.  Every solver in the package works on a validated
:class:`SystemSpec`.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

SCHEMA_VERSION = 1


class SpecError(ValueError):
    """Raised for malformed systems, parameters or system files."""


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """Validated finite system.

    Tables are stored as read-only numpy arrays of shape
    ``(num_states, num_actions, num_disturbances)``.  ``r_max`` is always
    recomputed from the reward table.
    """

    transition: np.ndarray
    reward: np.ndarray
    gamma: float
    labels: dict[str, list[str]] | None = None
    r_max: float = field(init=False)

    def __post_init__(self) -> None:
        transition = np.array(self.transition, dtype=np.int64, copy=True)
        reward = np.array(self.reward, dtype=np.float64, copy=True)
        _check_tables(transition, reward)
        gamma = float(self.gamma)
        if not (0.0 < gamma < 1.0):
            raise SpecError(f"gamma must lie in (0, 1), got {gamma!r}")
        transition.setflags(write=False)
        reward.setflags(write=False)
        object.__setattr__(self, "transition", transition)
        object.__setattr__(self, "reward", reward)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "r_max", float(np.max(np.abs(reward))))
        if self.labels is not None:
            _check_labels(self.labels, transition.shape)

    @property
    def num_states(self) -> int:
        return self.transition.shape[0]

    @property
    def num_actions(self) -> int:
        return self.transition.shape[1]

    @property
    def num_disturbances(self) -> int:
        return self.transition.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.transition.shape

    def with_gamma(self, gamma: float) -> "SystemSpec":
        return SystemSpec(self.transition, self.reward, gamma, self.labels)

    def digest(self) -> str:
        """SHA-256 of the canonical serialized form."""
        return hashlib.sha256(save_system(self).encode("utf-8")).hexdigest()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SystemSpec):
            return NotImplemented
        return (
            self.gamma == other.gamma
            and self.labels == other.labels
            and np.array_equal(self.transition, other.transition)
            and np.array_equal(self.reward, other.reward)
        )

    def __repr__(self) -> str:
        s, a, w = self.shape
        return f"SystemSpec(|S|={s}, |A|={a}, |W|={w}, gamma={self.gamma}, r_max={self.r_max})"


def _check_tables(transition: np.ndarray, reward: np.ndarray) -> None:
    if transition.ndim != 3 or min(transition.shape) < 1:
        raise SpecError(f"transition table must be a nonempty 3-D array, got shape {transition.shape}")
    if reward.shape != transition.shape:
        raise SpecError(
            f"table size mismatch: transition {transition.shape} vs reward {reward.shape}"
        )
    n_states = transition.shape[0]
    bad = np.argwhere((transition < 0) | (transition >= n_states))
    if bad.size:
        s, a, w = (int(i) for i in bad[0])
        raise SpecError(
            f"out-of-range transition at (s={s}, a={a}, w={w}): "
            f"{int(transition[s, a, w])} not in [0, {n_states})"
        )
    bad = np.argwhere(~np.isfinite(reward))
    if bad.size:
        s, a, w = (int(i) for i in bad[0])
        raise SpecError(f"non-finite reward at (s={s}, a={a}, w={w}): {reward[s, a, w]!r}")


def _check_labels(labels: dict[str, list[str]], shape: tuple[int, int, int]) -> None:
    sizes = dict(zip(("states", "actions", "disturbances"), shape))
    for key, names in labels.items():
        if key not in sizes:
            raise SpecError(f"unknown label group {key!r}")
        if len(names) != sizes[key]:
            raise SpecError(f"labels[{key!r}] has {len(names)} entries, expected {sizes[key]}")


def validate_system(
    transition: Any,
    reward: Any,
    gamma: float,
    labels: dict[str, list[str]] | None = None,
) -> SystemSpec:
    """Check raw tables and return a :class:`SystemSpec`.

    Errors name the offending ``(s, a, w)`` coordinate.
    """
    try:
        transition = np.asarray(transition)
        reward = np.asarray(reward, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"tables are not dense numeric arrays: {exc}") from exc
    if transition.size and not np.issubdtype(transition.dtype, np.integer):
        as_int = transition.astype(np.int64)
        if not np.array_equal(as_int, transition):
            raise SpecError("transition table must contain integers")
        transition = as_int
    return SystemSpec(transition, reward, gamma, labels)


def random_system(
    num_states: int,
    num_actions: int,
    num_disturbances: int,
    gamma: float = 0.9,
    rng: np.random.Generator | int | None = None,
) -> SystemSpec:
    """Uniformly random transitions and rewards in [-1, 1]; used by the test grids."""
    rng = np.random.default_rng(rng)
    shape = (num_states, num_actions, num_disturbances)
    transition = rng.integers(0, num_states, size=shape)
    reward = rng.uniform(-1.0, 1.0, size=shape)
    return SystemSpec(transition, reward, gamma)


def matching_pennies(gamma: float = 0.5, num_states: int = 2) -> SystemSpec:
    """Two actions, two disturbances, reward 1 when the action equals the disturbance.

    The state records the last disturbance (it never affects the reward).
    """
    shape = (num_states, 2, 2)
    a = np.arange(2)[None, :, None]
    w = np.arange(2)[None, None, :]
    reward = np.broadcast_to((a == w).astype(float), shape)
    transition = np.broadcast_to(w % num_states, shape)
    return SystemSpec(transition, reward, gamma)


# --------------------------------------------------------------------------
# Inventory (lost sales)
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class InventoryParams:
    """Lost-sales inventory instance.

    States ``0..s_max``, orders ``0..a_max``, demands ``0..w_max``.  The default
    costs are those of the numerical study (h=1, p=9, gamma=0.995).
    """

    s_max: int = 20
    a_max: int = 20
    w_max: int = 25
    holding_cost: float = 1.0
    penalty: float = 9.0
    gamma: float = 0.995

    def __post_init__(self) -> None:
        for name in ("s_max", "a_max", "w_max"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise SpecError(f"{name} must be a nonnegative integer, got {value!r}")
        if self.s_max < 1:
            raise SpecError(f"s_max must be >= 1, got {self.s_max}")
        for name in ("holding_cost", "penalty"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise SpecError(f"{name} must be finite and >= 0, got {value!r}")
        if not (0.0 < self.gamma < 1.0):
            raise SpecError(f"gamma must lie in (0, 1), got {self.gamma!r}")


def inventory_tables(params: InventoryParams) -> tuple[np.ndarray, np.ndarray]:
    s = np.arange(params.s_max + 1)[:, None, None]
    a = np.arange(params.a_max + 1)[None, :, None]
    w = np.arange(params.w_max + 1)[None, None, :]
    leftover = np.maximum(s - w, 0)
    shortage = np.maximum(w - s, 0)
    # orders beyond the cap are discarded (saturating transition)
    transition = np.minimum(leftover + a, params.s_max)
    reward = -(params.holding_cost * leftover + params.penalty * shortage)
    shape = (params.s_max + 1, params.a_max + 1, params.w_max + 1)
    return np.broadcast_to(transition, shape), np.broadcast_to(reward.astype(float), shape)


def build_inventory_system(params: InventoryParams | None = None, **overrides: Any) -> SystemSpec:
    """Lost-sales inventory system with rewards ``-(h (s-w)^+ + p (w-s)^+)``.

    ``s' = min((s - w)^+ + a, s_max)``.
    """
    if params is None:
        params = InventoryParams(**overrides)
    elif overrides:
        params = InventoryParams(**{**params.__dict__, **overrides})
    transition, reward = inventory_tables(params)
    labels = {
        "states": [f"stock={i}" for i in range(params.s_max + 1)],
        "actions": [f"order={i}" for i in range(params.a_max + 1)],
        "disturbances": [f"demand={i}" for i in range(params.w_max + 1)],
    }
    return SystemSpec(transition, reward, params.gamma, labels)


# --------------------------------------------------------------------------
# JSON serialization
# --------------------------------------------------------------------------

_REQUIRED = ("version", "num_states", "num_actions", "num_disturbances", "gamma", "transition", "reward")


def system_to_dict(spec: SystemSpec) -> dict[str, Any]:
    out: dict[str, Any] = {
        "version": SCHEMA_VERSION,
        "num_states": spec.num_states,
        "num_actions": spec.num_actions,
        "num_disturbances": spec.num_disturbances,
        "gamma": spec.gamma,
        "transition": spec.transition.tolist(),
        "reward": spec.reward.tolist(),
    }
    if spec.labels is not None:
        out["labels"] = spec.labels
    return out


def save_system(spec: SystemSpec) -> str:
    """Serialize to the version-1 JSON schema.

    Floats are written with ``repr`` precision so a load restores every table
    bit-exactly.
    """
    return json.dumps(system_to_dict(spec), separators=(",", ":")) + "\n"


def system_from_dict(data: Any) -> SystemSpec:
    if not isinstance(data, dict):
        raise SpecError("system file must contain a JSON object")
    for key in _REQUIRED:
        if key not in data:
            raise SpecError(f"schema error: missing field {key!r}")
    if data["version"] != SCHEMA_VERSION:
        raise SpecError(f"schema version mismatch: expected {SCHEMA_VERSION}, got {data['version']!r}")
    dims = []
    for key in ("num_states", "num_actions", "num_disturbances"):
        value = data[key]
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise SpecError(f"schema error: field {key!r} must be a positive integer")
        dims.append(value)
    shape = tuple(dims)
    tables = {}
    for key, dtype in (("transition", np.int64), ("reward", np.float64)):
        try:
            arr = np.array(data[key], dtype=object)
        except ValueError as exc:
            raise SpecError(f"schema error: field {key!r} is not a dense array: {exc}") from exc
        if arr.shape != shape:
            raise SpecError(f"schema error: field {key!r} has shape {arr.shape}, expected {shape}")
        if key == "transition" and not all(
            isinstance(v, int) and not isinstance(v, bool) for v in arr.flat
        ):
            raise SpecError("schema error: field 'transition' must contain integers")
        if key == "reward" and not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in arr.flat
        ):
            raise SpecError("schema error: field 'reward' must contain numbers")
        tables[key] = arr.astype(dtype)
    gamma = data["gamma"]
    if not isinstance(gamma, (int, float)) or isinstance(gamma, bool):
        raise SpecError("schema error: field 'gamma' must be a number")
    return validate_system(tables["transition"], tables["reward"], float(gamma), data.get("labels"))


def load_system(text: str) -> SystemSpec:
    """Parse a version-1 system JSON document."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return system_from_dict(data)


def read_system(path: str) -> SystemSpec:
    with open(path, encoding="utf-8") as fh:
        return load_system(fh.read())


def write_system(spec: SystemSpec, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(save_system(spec))
