"""Command-line interface: ``regretopt <subcommand> ...``.

Exit codes: 0 success, 1 invalid input or size guard, 2 solver did not
converge (outputs are still written), 3 file I/O failure, 4 verification
failure.  Results go to stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict
from importlib import resources

import numpy as np

from . import artifacts
from .baselines import mdp_value_iteration, robust_value_iteration
from .discounted import SolverConfig, solve_discounted
from .disturbances import HmmModel, PoissonModel
from .finite import FiniteSolverConfig, backward_regret_dp, finite_prefix_dp
from .oracle import EnumerationTooLarge
from .simulation import ControllerSpec, ExperimentConfig, config_from_dict, run_experiment, write_experiment
from .system import InventoryParams, SpecError, build_inventory_system, read_system, save_system
from .verify import Grid, run_all

EXIT_OK, EXIT_INPUT, EXIT_NONCONVERGED, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3, 4
BUNDLED_CONFIGS = ("fig1", "fig2-4")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 by default, which would collide with the non-convergence code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _diag(msg: str) -> None:
    print(f"regretopt: {msg}", file=sys.stderr)


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=False))


def _load_system(path: str, gamma: float | None):
    spec = read_system(path)
    return spec.with_gamma(gamma) if gamma is not None else spec


def _read_distribution(path: str) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if isinstance(data, dict):
        data = data.get("distribution")
    if not isinstance(data, list):
        raise SpecError(f"{path}: expected a JSON list of probabilities or {{\"distribution\": [...]}}")
    return np.asarray(data, dtype=float)


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def cmd_validate(args) -> int:
    spec = read_system(args.system)
    _emit({"valid": True, "num_states": spec.num_states, "num_actions": spec.num_actions,
           "num_disturbances": spec.num_disturbances, "gamma": spec.gamma, "r_max": spec.r_max,
           "spec_hash": spec.digest()})
    return EXIT_OK


def cmd_inventory_gen(args) -> int:
    params = InventoryParams(args.s_max, args.a_max, args.w_max, args.holding_cost, args.penalty, args.gamma)
    text = save_system(build_inventory_system(params))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_solve(args) -> int:
    spec = _load_system(args.system, args.gamma)
    s0_list = args.s0 or [0]
    for s0 in s0_list:
        if not 0 <= s0 < spec.num_states:
            raise SpecError(f"--s0 {s0} out of range for {spec.num_states} states")
    if args.mode == "mdp":
        if args.dist is None:
            raise UsageError("mode mdp requires --dist (disturbance distribution file)")
        dist = _read_distribution(args.dist)
        pol = mdp_value_iteration(spec, dist, args.epsilon, args.max_sweeps)
        doc = artifacts.baseline_artifact("mdp", spec, pol, args.epsilon, dist)
        converged, result = pol.converged, {"mode": "mdp", "value": {str(s): float(pol.values[s]) for s in s0_list}}
    elif args.mode == "robust":
        pol = robust_value_iteration(spec, args.epsilon, args.max_sweeps)
        doc = artifacts.baseline_artifact("robust", spec, pol, args.epsilon)
        converged, result = pol.converged, {"mode": "robust", "value": {str(s): float(pol.values[s]) for s in s0_list}}
    else:
        sol = solve_discounted(spec, SolverConfig(args.k, args.epsilon, args.max_sweeps, args.sweep_mode))
        regrets = {s: sol.regret(s) for s in s0_list}
        doc = artifacts.discounted_artifact(sol, regrets)
        converged = sol.table.converged
        for s, v in regrets.items():
            _emit({"s0": s, "k": args.k, "regret": v})
        result = None
    if result is not None:
        _emit(result)
    if args.out:
        artifacts.write_artifact(doc, args.out)
    if not converged:
        _diag(f"solver did not certify convergence within {doc['sweeps']} sweeps "
              f"(error bound {doc['error_bound']:.3e})")
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_solve_finite(args) -> int:
    spec = read_system(args.system)
    config = FiniteSolverConfig(args.k, args.horizon)
    s0_list = args.s0 or [0]
    stack = backward_regret_dp(spec, config)
    regrets = {s: finite_prefix_dp(stack, s).regret for s in s0_list}
    for s, v in regrets.items():
        _emit({"s0": s, "k": args.k, "horizon": args.horizon, "regret": v})
    if args.out:
        artifacts.write_artifact(artifacts.finite_artifact(stack, regrets), args.out)
    return EXIT_OK


def _controller_spec(args) -> ControllerSpec:
    if args.controller == "mdp" and args.design_lambda is None:
        raise UsageError("controller mdp requires --design-lambda")
    return ControllerSpec(args.controller, args.design_lambda, args.k if args.controller == "regret" else None)


def _model(args, w_max: int):
    if args.model == "poisson":
        if args.lam is None:
            raise UsageError("model poisson requires --lambda")
        return PoissonModel(args.lam, w_max)
    if args.lambda_low is None or args.lambda_high is None:
        raise UsageError("model hmm requires --lambda-low and --lambda-high")
    return HmmModel(args.lambda_low, args.lambda_high, w_max, args.persistence, args.initial_regime)


def cmd_simulate(args) -> int:
    spec = read_system(args.system)
    config = ExperimentConfig(
        controllers=[_controller_spec(args)],
        models=[_model(args, spec.num_disturbances - 1)],
        horizon=args.horizon,
        seeds=[args.seed],
        system_path=args.system,
        s0=args.s0,
        epsilon=args.epsilon,
    )
    result = run_experiment(config)
    if result.failures:
        for label, msg in result.failures.items():
            _diag(f"{label}: {msg}")
        return EXIT_NONCONVERGED
    text = result.records_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def bundled_config(name: str) -> dict:
    if name not in BUNDLED_CONFIGS:
        raise UsageError(f"unknown bundled config {name!r} (choose from {', '.join(BUNDLED_CONFIGS)})")
    text = resources.files("regretopt").joinpath("data", f"{name}.json").read_text(encoding="utf-8")
    return json.loads(text)


def cmd_experiment(args) -> int:
    if os.path.exists(args.config):
        with open(args.config, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SpecError(f"{args.config}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        base = os.path.dirname(os.path.abspath(args.config))
    else:
        data = bundled_config(os.path.splitext(os.path.basename(args.config))[0])
        base = "."
    # flag > config file > default
    if args.horizon is not None:
        data["horizon"] = args.horizon
    if args.seeds is not None:
        data["seeds"] = args.seeds
    if args.no_per_step:
        data["per_step"] = False
    out = args.out or data.get("output")
    if not out:
        raise UsageError("experiment needs --out (or an 'output' field in the config)")
    config = config_from_dict(data, base)
    result = run_experiment(config)
    paths = write_experiment(result, config, out)
    for label, msg in result.failures.items():
        _diag(f"{label}: {msg}")
    _emit({"outputs": paths, "failures": result.failures})
    return EXIT_NONCONVERGED if result.failures else EXIT_OK


def cmd_verify(args) -> int:
    grid = Grid(args.max_states, args.max_actions, args.max_disturbances, args.max_k,
                args.max_horizon, args.instances, args.seed)
    results = run_all(grid, args.tolerance)
    failed = [r for r in results if not r.passed]
    for r in results:
        _emit({"suite": r.name, "passed": r.passed, "checked": r.checked, "max_error": r.max_error})
    if failed:
        with open(args.failure_out, "w", encoding="utf-8") as fh:
            json.dump(failed[0].failure, fh, indent=2)
            fh.write("\n")
        f = failed[0]
        _diag(f"suite {f.name} failed (error {f.failure['error']:.3e} > tolerance {args.tolerance:.3e}); "
              f"instance written to {args.failure_out}")
        return EXIT_VERIFY
    return EXIT_OK


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="regretopt", description="Regret-optimal control of finite disturbance-driven systems.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="check a system file and print its summary")
    v.add_argument("system", help="system JSON file")
    v.set_defaults(func=cmd_validate)

    g = sub.add_parser("inventory-gen", help="write the lost-sales inventory system as JSON")
    d = InventoryParams()
    g.add_argument("--s-max", type=int, default=d.s_max, help="largest stock level (default %(default)s)")
    g.add_argument("--a-max", type=int, default=d.a_max, help="largest order (default %(default)s)")
    g.add_argument("--w-max", type=int, default=d.w_max, help="largest demand (default %(default)s)")
    g.add_argument("--holding-cost", type=float, default=d.holding_cost, help="cost per unit held (default %(default)s)")
    g.add_argument("--penalty", type=float, default=d.penalty, help="cost per unit of lost demand (default %(default)s)")
    g.add_argument("--gamma", type=float, default=d.gamma, help="discount factor (default %(default)s)")
    g.add_argument("--out", help="output path (default: stdout)")
    g.set_defaults(func=cmd_inventory_gen)

    s = sub.add_parser("solve", help="solve a discounted regret, MDP or robust problem")
    s.add_argument("system", help="system JSON file")
    s.add_argument("--mode", choices=("mdp", "robust", "regret"), default="regret", help="problem to solve (default %(default)s)")
    s.add_argument("--dist", help="disturbance distribution JSON (required for --mode mdp)")
    s.add_argument("--k", type=int, default=1, help="benchmark lookahead for --mode regret (default %(default)s)")
    s.add_argument("--gamma", type=float, help="override the system discount factor")
    s.add_argument("--epsilon", type=float, default=1e-6, help="certified accuracy of the value table (default %(default)s)")
    s.add_argument("--max-sweeps", type=int, default=100_000, help="operator application budget (default %(default)s)")
    s.add_argument("--sweep-mode", choices=("synchronous", "in-place"), default="synchronous", help="regret sweep schedule (default %(default)s)")
    s.add_argument("--s0", type=int, action="append", help="initial state to report; repeatable (default 0)")
    s.add_argument("--out", help="artifact path")
    s.set_defaults(func=cmd_solve)

    f = sub.add_parser("solve-finite", help="solve the finite-horizon regret problem")
    f.add_argument("system", help="system JSON file (its gamma is ignored)")
    f.add_argument("--k", type=int, default=1, help="benchmark lookahead (default %(default)s)")
    f.add_argument("--horizon", type=int, required=True, help="number of stages T (must exceed k)")
    f.add_argument("--s0", type=int, action="append", help="initial state to report; repeatable (default 0)")
    f.add_argument("--out", help="artifact path")
    f.set_defaults(func=cmd_solve_finite)

    m = sub.add_parser("simulate", help="roll out one controller on one sampled disturbance sequence")
    m.add_argument("system", help="system JSON file")
    m.add_argument("--controller", choices=("mdp", "robust", "regret", "clairvoyant"), default="regret", help="controller (default %(default)s)")
    m.add_argument("--design-lambda", type=float, help="Poisson rate the mdp controller is designed for")
    m.add_argument("--k", type=int, default=1, help="lookahead of the regret controller (default %(default)s)")
    m.add_argument("--epsilon", type=float, default=1e-6, help="solver accuracy (default %(default)s)")
    m.add_argument("--model", choices=("poisson", "hmm"), default="poisson", help="disturbance model (default %(default)s)")
    m.add_argument("--lambda", dest="lam", type=float, help="Poisson rate")
    m.add_argument("--lambda-low", type=float, help="HMM low-regime rate")
    m.add_argument("--lambda-high", type=float, help="HMM high-regime rate")
    m.add_argument("--persistence", type=float, default=0.9, help="HMM probability of keeping the regime (default %(default)s)")
    m.add_argument("--initial-regime", choices=("low", "high"), default="low", help="HMM starting regime (default %(default)s)")
    m.add_argument("--horizon", type=int, default=2000, help="steps (default %(default)s)")
    m.add_argument("--seed", type=int, default=0, help="sampler seed (default %(default)s)")
    m.add_argument("--s0", type=int, default=0, help="initial state (default %(default)s)")
    m.add_argument("--out", help="per-step CSV path (default: stdout)")
    m.set_defaults(func=cmd_simulate)

    e = sub.add_parser("experiment", help="run a controller comparison and write CSVs plus a manifest")
    e.add_argument("--config", required=True, help="config JSON path, or a bundled name: " + ", ".join(BUNDLED_CONFIGS))
    e.add_argument("--out", help="output directory (overrides the config's 'output')")
    e.add_argument("--horizon", type=int, help="override the config horizon")
    e.add_argument("--seeds", type=int, help="override the config with seeds 0..N-1")
    e.add_argument("--no-per-step", action="store_true", help="write only the aggregate CSV")
    e.set_defaults(func=cmd_experiment)

    r = sub.add_parser("verify", help="run the contraction, oracle, decomposition and nonnegativity suites")
    grid = asdict(Grid())
    r.add_argument("--max-states", type=int, default=grid["max_states"], help="largest |S| in the grid (default %(default)s)")
    r.add_argument("--max-actions", type=int, default=grid["max_actions"], help="largest |A| in the grid (default %(default)s)")
    r.add_argument("--max-disturbances", type=int, default=grid["max_disturbances"], help="largest |W| in the grid (default %(default)s)")
    r.add_argument("--max-k", type=int, default=grid["max_k"], help="largest lookahead (default %(default)s)")
    r.add_argument("--max-horizon", type=int, default=grid["max_horizon"], help="largest finite horizon (default %(default)s)")
    r.add_argument("--instances", type=int, default=grid["instances"], help="random systems per grid cell (default %(default)s)")
    r.add_argument("--seed", type=int, default=grid["seed"], help="grid seed (default %(default)s)")
    r.add_argument("--tolerance", type=float, default=1e-9, help="allowed numerical error (default %(default)s)")
    r.add_argument("--failure-out", default="verify-failure.json", help="where the first failing instance is written (default %(default)s)")
    r.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, SpecError, EnumerationTooLarge, ValueError) as exc:
        print(f"regretopt {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"regretopt {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
