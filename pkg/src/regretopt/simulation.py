"""Rollouts and the inventory experiment harness.

Controllers follow one protocol: ``reset(s0)`` then ``step(prev_w)`` once per
time step, where ``prev_w`` is the disturbance realized in the previous step
(``None`` at ``t = 0``) and the return value is the action to apply.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np

from .baselines import clairvoyant_path_value, mdp_value_iteration, robust_value_iteration
from .discounted import SolverConfig, solve_discounted
from .disturbances import HmmModel, PoissonModel, sample, truncated_poisson_pmf
from .system import InventoryParams, SystemSpec, build_inventory_system, read_system

log = logging.getLogger(__name__)

RECORD_COLUMNS = (
    "controller", "model", "param_lambda", "param_lambda_low", "param_lambda_high",
    "persistence", "seed", "t", "reward", "cum_reward", "avg_reward",
)
PARAM_COLUMNS = ("param_lambda", "param_lambda_low", "param_lambda_high", "persistence")
AGGREGATE_COLUMNS = ("controller", "model", *PARAM_COLUMNS, "mean_avg_reward", "stderr_avg_reward", "n_seeds")


@dataclass
class Trajectory:
    states: np.ndarray
    actions: np.ndarray
    disturbances: np.ndarray
    rewards: np.ndarray
    gamma: float

    @property
    def total_return(self) -> float:
        return float(self.rewards.sum())

    @property
    def discounted_return(self) -> float:
        return float(self.rewards @ (self.gamma ** np.arange(len(self.rewards))))

    def check(self, spec: SystemSpec) -> None:
        """Recompute dynamics and rewards; raises ``AssertionError`` on any mismatch."""
        s, a, w = self.states, self.actions, self.disturbances
        assert np.array_equal(spec.transition[s[:-1], a, w], s[1:])
        assert np.array_equal(spec.reward[s[:-1], a, w], self.rewards)


def rollout(spec: SystemSpec, controller, w_sequence: Iterable[int], s0: int = 0, gamma: float | None = None) -> Trajectory:
    """Drive ``controller`` along a disturbance sequence.

    ``states`` has one more entry than the other arrays (the final state).
    ``gamma`` defaults to the system discount; pass 1.0 for undiscounted sums.
    """
    w_seq = np.asarray(list(w_sequence), dtype=np.int64)
    if w_seq.size and (w_seq.min() < 0 or w_seq.max() >= spec.num_disturbances):
        raise ValueError("disturbance out of range")
    T = len(w_seq)
    f, r = spec.transition, spec.reward
    states = np.empty(T + 1, dtype=np.int64)
    actions = np.empty(T, dtype=np.int64)
    rewards = np.empty(T)
    controller.reset(s0)
    s, prev = s0, None
    for t in range(T):
        a = controller.step(prev)
        w = int(w_seq[t])
        states[t], actions[t] = s, a
        rewards[t] = r[s, a, w]
        s = int(f[s, a, w])
        prev = w
    states[T] = s
    return Trajectory(states, actions, w_seq, rewards, spec.gamma if gamma is None else gamma)


class OpenLoopController:
    """Plays a fixed action sequence (used for the clairvoyant diagnostic)."""

    def __init__(self, actions):
        self.actions = list(actions)

    def reset(self, s0: int | None = None) -> None:
        self.t = 0

    def step(self, realized_w: int | None = None) -> int:
        a = self.actions[self.t]
        self.t += 1
        return a


# --------------------------------------------------------------------------
# Experiment configuration
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ControllerSpec:
    kind: str  # mdp | robust | regret | clairvoyant
    design_lambda: float | None = None
    k: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("mdp", "robust", "regret", "clairvoyant"):
            raise ValueError(f"unknown controller type {self.kind!r}")
        if self.kind == "mdp" and self.design_lambda is None:
            raise ValueError("mdp controller needs design_lambda")
        if self.kind == "regret" and (self.k is None or self.k < 1):
            raise ValueError("regret controller needs k >= 1")

    @property
    def label(self) -> str:
        if self.kind == "mdp":
            return f"mdp(lambda={_fmt(self.design_lambda)})"
        if self.kind == "regret":
            return f"regret(k={self.k})"
        return self.kind


@dataclass
class ExperimentConfig:
    controllers: list[ControllerSpec]
    models: list[PoissonModel | HmmModel]
    horizon: int = 2000
    seeds: list[int] = field(default_factory=lambda: list(range(20)))
    inventory: InventoryParams | None = None
    system_path: str | None = None
    s0: int = 0
    epsilon: float = 1e-6
    output: str | None = None
    per_step: bool = True

    def __post_init__(self) -> None:
        if not self.controllers:
            raise ValueError("experiment needs at least one controller")
        if not self.models:
            raise ValueError("experiment needs at least one disturbance model")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if not self.seeds:
            raise ValueError("experiment needs at least one seed")
        if (self.inventory is None) == (self.system_path is None):
            raise ValueError("give exactly one of 'inventory' or 'system'")

    def system(self) -> SystemSpec:
        if self.inventory is not None:
            return build_inventory_system(self.inventory)
        return read_system(self.system_path)


def _model_from_dict(d: dict[str, Any], w_max: int) -> PoissonModel | HmmModel:
    kind = d.get("type")
    if kind == "poisson":
        return PoissonModel(float(d["lambda"]), int(d.get("w_max", w_max)))
    if kind == "hmm":
        return HmmModel(
            float(d["lambda_low"]), float(d["lambda_high"]), int(d.get("w_max", w_max)),
            float(d.get("persistence", 0.9)), d.get("initial_regime", "low"),
        )
    raise ValueError(f"unknown disturbance model type {kind!r}")


def config_from_dict(data: dict[str, Any], base_dir: str = ".") -> ExperimentConfig:
    """Build a config from the JSON layout documented in the README."""
    system = data.get("system")
    if not isinstance(system, dict):
        raise ValueError("config field 'system' must be an object")
    inventory = path = None
    if "inventory" in system:
        inventory = InventoryParams(**system["inventory"])
        w_max = inventory.w_max
    elif "path" in system:
        path = os.path.join(base_dir, system["path"])
        w_max = read_system(path).num_disturbances - 1
    else:
        raise ValueError("config 'system' needs 'inventory' or 'path'")
    controllers = []
    for c in data.get("controllers", []):
        controllers.append(ControllerSpec(c.get("type"), c.get("design_lambda"), c.get("k")))
    models = []
    for m in data.get("models", []):
        if m.get("type") == "poisson" and "lambdas" in m:
            models.extend(PoissonModel(float(lam), int(m.get("w_max", w_max))) for lam in m["lambdas"])
        else:
            models.append(_model_from_dict(m, w_max))
    seeds = data.get("seeds", 20)
    seeds = list(range(seeds)) if isinstance(seeds, int) else [int(s) for s in seeds]
    return ExperimentConfig(
        controllers=controllers,
        models=models,
        horizon=int(data.get("horizon", 2000)),
        seeds=seeds,
        inventory=inventory,
        system_path=path,
        s0=int(data.get("s0", 0)),
        epsilon=float(data.get("epsilon", 1e-6)),
        output=data.get("output"),
        per_step=bool(data.get("per_step", True)),
    )


def load_config(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return config_from_dict(data, os.path.dirname(os.path.abspath(path)))


# --------------------------------------------------------------------------
# Running
# --------------------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".12g")


def model_fields(model: PoissonModel | HmmModel) -> tuple[str, dict[str, str]]:
    if isinstance(model, PoissonModel):
        return "poisson", {"param_lambda": _fmt(model.lam), "param_lambda_low": "",
                           "param_lambda_high": "", "persistence": ""}
    return "hmm", {"param_lambda": "", "param_lambda_low": _fmt(model.lam_low),
                   "param_lambda_high": _fmt(model.lam_high), "persistence": _fmt(model.persistence)}


def build_controller(spec: SystemSpec, cs: ControllerSpec, s0: int, epsilon: float):
    """Solve the controller's design problem; returns ``(controller, info)``."""
    if cs.kind == "mdp":
        dist = truncated_poisson_pmf(cs.design_lambda, spec.num_disturbances - 1)
        pol = mdp_value_iteration(spec, dist, epsilon)
        return pol.controller(spec, s0), {"converged": pol.converged, "sweeps": pol.sweeps}
    if cs.kind == "robust":
        pol = robust_value_iteration(spec, epsilon)
        return pol.controller(spec, s0), {"converged": pol.converged, "sweeps": pol.sweeps}
    if cs.kind == "regret":
        sol = solve_discounted(spec, SolverConfig(k=cs.k, epsilon=epsilon))
        info = {"converged": sol.table.converged, "sweeps": sol.table.sweeps, "regret": sol.regret(s0)}
        return sol.controller(s0), info
    return None, {}


@dataclass
class ExperimentResult:
    records: list[tuple]
    aggregates: list[tuple]
    failures: dict[str, str]
    solver_info: dict[str, dict]

    def records_csv(self) -> str:
        return _to_csv(RECORD_COLUMNS, self.records)

    def aggregates_csv(self) -> str:
        return _to_csv(AGGREGATE_COLUMNS, self.aggregates)

    def summary(self) -> dict[tuple[str, str, str], tuple[float, float]]:
        """``(controller, model, param) -> (mean, stderr)`` for quick comparisons."""
        out = {}
        for row in self.aggregates:
            key = (row[0], row[1], row[2] or f"{row[3]}/{row[4]}")
            out[key] = (float(row[6]), float(row[7]))
        return out


def _to_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buf.getvalue()


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Solve each controller once, then roll it out on every (model, seed) sequence.

    Every controller sees the same disturbance sequence for a given
    ``(model, seed)``.  A controller whose solver fails is skipped and reported
    in ``failures``; the others still run.
    """
    spec = config.system()
    controllers, failures, info = {}, {}, {}
    for cs in config.controllers:
        try:
            ctrl, meta = build_controller(spec, cs, config.s0, config.epsilon)
        except Exception as exc:  # keep the remaining controllers running
            failures[cs.label] = f"{type(exc).__name__}: {exc}"
            log.error("controller %s failed: %s", cs.label, exc)
            continue
        if meta.get("converged") is False:
            failures[cs.label] = "solver did not certify convergence"
            log.error("controller %s: solver did not converge", cs.label)
            continue
        controllers[cs.label] = (cs, ctrl)
        info[cs.label] = meta

    records: list[tuple] = []
    aggregates: list[tuple] = []
    T = config.horizon
    steps = np.arange(T)
    for label, (cs, ctrl) in controllers.items():
        for model in config.models:
            name, params = model_fields(model)
            param_vals = tuple(params[c] for c in PARAM_COLUMNS)
            averages = []
            for seed in config.seeds:
                w = sample(model, T, seed)
                if cs.kind == "clairvoyant":
                    _, plan = clairvoyant_path_value(spec, config.s0, w, discounted=False)
                    ctrl = OpenLoopController(plan)
                traj = rollout(spec, ctrl, w, config.s0)
                cum = np.cumsum(traj.rewards)
                avg = cum / (steps + 1)
                averages.append(avg[-1])
                if config.per_step:
                    for t in range(T):
                        records.append((label, name, *param_vals, str(seed), str(t),
                                        _fmt(traj.rewards[t]), _fmt(cum[t]), _fmt(avg[t])))
            averages = np.asarray(averages)
            n = len(averages)
            stderr = float(averages.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
            aggregates.append((label, name, *param_vals, _fmt(averages.mean()), _fmt(stderr), str(n)))
    return ExperimentResult(records, aggregates, failures, info)


def config_digest(config: ExperimentConfig) -> str:
    payload = json.dumps(_config_to_dict(config), sort_keys=True)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _config_to_dict(config: ExperimentConfig) -> dict[str, Any]:
    models = []
    for m in config.models:
        if isinstance(m, PoissonModel):
            models.append({"type": "poisson", "lambda": m.lam, "w_max": m.w_max})
        else:
            models.append({"type": "hmm", "lambda_low": m.lam_low, "lambda_high": m.lam_high,
                           "w_max": m.w_max, "persistence": m.persistence,
                           "initial_regime": m.initial_regime})
    return {
        "system": {"inventory": config.inventory.__dict__} if config.inventory else {"path": config.system_path},
        "controllers": [{"type": c.kind, "design_lambda": c.design_lambda, "k": c.k} for c in config.controllers],
        "models": models,
        "horizon": config.horizon,
        "seeds": config.seeds,
        "s0": config.s0,
        "epsilon": config.epsilon,
        "per_step": config.per_step,
    }


def write_experiment(result: ExperimentResult, config: ExperimentConfig, out_dir: str) -> dict[str, str]:
    """Write ``records.csv``, ``aggregate.csv`` and ``manifest.json``; returns the paths."""
    import platform

    from . import __version__

    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "records": os.path.join(out_dir, "records.csv"),
        "aggregate": os.path.join(out_dir, "aggregate.csv"),
        "manifest": os.path.join(out_dir, "manifest.json"),
    }
    if config.per_step:
        with open(paths["records"], "w", encoding="utf-8", newline="") as fh:
            fh.write(result.records_csv())
    else:
        del paths["records"]
    with open(paths["aggregate"], "w", encoding="utf-8", newline="") as fh:
        fh.write(result.aggregates_csv())
    manifest = {
        "config": _config_to_dict(config),
        "config_sha256": config_digest(config),
        "seeds": config.seeds,
        "versions": {"regretopt": __version__, "numpy": np.__version__, "python": platform.python_version()},
        "solver": result.solver_info,
        "failures": result.failures,
    }
    with open(paths["manifest"], "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return paths
