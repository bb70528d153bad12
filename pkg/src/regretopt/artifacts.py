"""JSON container for solved tables and policies.

Top-level fields, in this order::

    format      "regretopt-artifact"
    version     1
    type        "regret" | "regret-finite" | "mdp" | "robust"
    spec_hash   sha256 of the system file text
    k           lookahead (null for baselines)
    gamma       discount used by the solve (1.0 for finite horizon)
    epsilon     requested accuracy (0.0 for exact finite-horizon solves)
    residual    last certified sweep residual
    error_bound certified sup-norm distance to the fixed point
    sweeps      operator applications
    converged   false when the sweep budget ran out
    horizon     finite-horizon solves only
    regret      {s0: optimal regret} for regret solves, else omitted
    distribution  mdp solves only
    values      dense value table (augmented index order for regret solves)
    policy      action per index of ``values``
    stages      finite-horizon solves only: [{"t", "values", "policy"}] for t = k..T-1

Floats are written with ``repr`` precision so reloading is bit-exact and
repeated solves give byte-identical files.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

FORMAT = "regretopt-artifact"
VERSION = 1
TYPES = ("regret", "regret-finite", "mdp", "robust")


def _header(kind, spec_hash, k, gamma, epsilon, residual, error_bound, sweeps, converged) -> dict[str, Any]:
    if kind not in TYPES:
        raise ValueError(f"unknown artifact type {kind!r}")
    return {
        "format": FORMAT,
        "version": VERSION,
        "type": kind,
        "spec_hash": spec_hash,
        "k": None if k is None else int(k),
        "gamma": float(gamma),
        "epsilon": float(epsilon),
        "residual": float(residual),
        "error_bound": float(error_bound),
        "sweeps": int(sweeps),
        "converged": bool(converged),
    }


def discounted_artifact(solution, regrets: dict[int, float]) -> dict[str, Any]:
    """From a :class:`~regretopt.discounted.DiscountedSolution`."""
    t = solution.table
    doc = _header("regret", solution.spec.digest(), t.k, t.gamma, solution.config.epsilon,
                  t.residual, t.error_bound, t.sweeps, t.converged)
    doc["regret"] = {str(s): float(v) for s, v in sorted(regrets.items())}
    doc["values"] = t.values.tolist()
    doc["policy"] = np.asarray(solution.policy.actions).tolist()
    return doc


def finite_artifact(stack, regrets: dict[int, float]) -> dict[str, Any]:
    """From a :class:`~regretopt.finite.FiniteValueStack` built with stage tables."""
    k, T = stack.k, stack.horizon
    doc = _header("regret-finite", stack.spec.digest(), k, 1.0, 0.0, 0.0, 0.0, T - k, True)
    doc["horizon"] = T
    doc["regret"] = {str(s): float(v) for s, v in sorted(regrets.items())}
    doc["values"] = stack.values[k].tolist()
    doc["policy"] = stack.actions[k].tolist()
    doc["stages"] = [
        {"t": t, "values": stack.values[t].tolist(), "policy": stack.actions[t].tolist()}
        for t in range(k, T)
    ]
    return doc


def baseline_artifact(kind: str, spec, policy, epsilon: float, distribution=None) -> dict[str, Any]:
    """From a :class:`~regretopt.baselines.StatePolicy`; ``kind`` is ``mdp`` or ``robust``."""
    if kind not in ("mdp", "robust"):
        raise ValueError(f"baseline type must be 'mdp' or 'robust', got {kind!r}")
    # error_bound = gamma * span / (2 (1 - gamma)), so the residual is recovered exactly
    residual = policy.error_bound * (1 - spec.gamma)
    doc = _header(kind, spec.digest(), None, spec.gamma, epsilon, residual, policy.error_bound,
                  policy.sweeps, policy.converged)
    if distribution is not None:
        doc["distribution"] = np.asarray(distribution, dtype=float).tolist()
    doc["values"] = policy.values.tolist()
    doc["policy"] = np.asarray(policy.actions).tolist()
    return doc


def dumps(doc: dict[str, Any]) -> str:
    return json.dumps(doc, separators=(",", ":"), allow_nan=False) + "\n"


def write_artifact(doc: dict[str, Any], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(doc))


def read_artifact(path: str) -> dict[str, Any]:
    """Load an artifact; ``values``/``policy`` (and stage tables) come back as numpy arrays."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != FORMAT:
        raise ValueError(f"{path}: not a {FORMAT} file")
    if doc.get("version") != VERSION:
        raise ValueError(f"{path}: unsupported artifact version {doc.get('version')!r}")
    doc["values"] = np.asarray(doc["values"], dtype=np.float64)
    doc["policy"] = np.asarray(doc["policy"], dtype=np.int64)
    for stage in doc.get("stages", []):
        stage["values"] = np.asarray(stage["values"], dtype=np.float64)
        stage["policy"] = np.asarray(stage["policy"], dtype=np.int64)
    return doc
