"""Command-line front end for the pond growth and feeding-control studies.

Subcommands: ``validate`` (pond model against the single-fish integrator),
``sensitivity`` (input-factor sweep), ``compare`` (controller benchmark
across the ammonia cases), ``train-q`` (fit the feeding policy table) and
``mpc2`` (joint feed/water-quality control runs). Every command reads one
optional YAML config, writes CSVs into the output directory and prints an
aligned summary; identical config and seed give identical files.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time

import yaml

from .config import ConfigError, Experiment, build_experiment, load_config
from .growth import EnvInput, PopulationState, NO_STOCKING, simulate, simulate_individual
from .qlearning import TrackingEnv, train
from .scenarios import (
    ScenarioResult,
    build_case_profiles,
    run_scenario,
    sensitivity_study,
)

VALIDATION_POPULATIONS = (1, 5, 10, 50, 100)


def _print_table(headers: list[str], rows: list[list[str]]) -> None:
    widths = [len(h) for h in headers]
    for row in rows:
        widths = [max(w, len(str(c))) for w, c in zip(widths, row)]
    fmt = "  ".join(f"{{:>{w}}}" for w in widths)
    print(fmt.format(*headers))
    print(fmt.format(*("-" * w for w in widths)))
    for row in rows:
        print(fmt.format(*(str(c) for c in row)))


def _write_csv(path: str, headers: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(headers)
        writer.writerows(rows)


def _ideal_inputs(exp: Experiment) -> list[EnvInput]:
    params = exp.params
    return [
        EnvInput(f=1.0, T=params.T_opt, DO=params.do_ramp_upper + 0.5, UIA=0.0)
        for _ in range(exp.period)
    ]


def cmd_validate(exp: Experiment, out: str) -> int:
    """Pond model at head counts 1..100 against the single-fish integrator."""
    inputs = _ideal_inputs(exp)
    oracle = simulate_individual(exp.initial_weight, inputs, exp.params)
    rows = []
    finals = {}
    start = time.perf_counter()
    for pop in VALIDATION_POPULATIONS:
        initial = PopulationState(xi=pop * exp.initial_weight, p=pop)
        trace = simulate(initial, inputs, NO_STOCKING, exp.params,
                         substeps=exp.plant_substeps)
        trace.to_csv(os.path.join(out, f"validate_p{pop}.csv"))
        finals[pop] = trace
        rows.append([pop, f"{trace.xi[-1]:.4f}", int(trace.population[-1])])
    elapsed = time.perf_counter() - start
    rel_err = abs(finals[1].xi[-1] - oracle[-1]) / oracle[-1]
    ordering_ok = all(
        finals[a].xi[-1] < finals[b].xi[-1]
        for a, b in zip(VALIDATION_POPULATIONS, VALIDATION_POPULATIONS[1:])
    )
    population_ok = all(
        finals[p].population[-1] == p for p in VALIDATION_POPULATIONS
    )
    _write_csv(
        os.path.join(out, "validate_summary.csv"),
        ["population", "final_total_weight_g", "final_population",
         "oracle_final_weight_g", "p1_relative_error"],
        [[p, f"{finals[p].xi[-1]:.6f}", int(finals[p].population[-1]),
          f"{oracle[-1]:.6f}" if p == 1 else "",
          f"{rel_err:.3e}" if p == 1 else ""]
         for p in VALIDATION_POPULATIONS],
    )
    _print_table(["population", "final_total_g", "fish_left"], rows)
    print(f"single-fish overlap: relative endpoint error {rel_err:.3e} "
          f"({elapsed:.2f}s)")
    ok = rel_err < 1e-3 and ordering_ok and population_ok
    print("validation " + ("PASSED" if ok else "FAILED"))
    return 0 if ok else 1


def cmd_sensitivity(exp: Experiment, out: str) -> int:
    """Final weight and survivors under one-at-a-time input oscillations."""
    rows = sensitivity_study(
        exp.params, period=exp.period, population=exp.population,
        initial_weight=exp.initial_weight, substeps=exp.plant_substeps,
    )
    for row in rows:
        row.trace.to_csv(os.path.join(out, f"sensitivity_{row.case}.csv"))
    _write_csv(
        os.path.join(out, "sensitivity.csv"),
        ["case", "final_weight_g", "survivors", "population"],
        [[r.case, f"{r.final_weight_g:.4f}", r.survivors, exp.population]
         for r in rows],
    )
    _print_table(
        ["case", "final_weight_g", "survivors"],
        [[r.case, f"{r.final_weight_g:.2f}", f"{r.survivors}/{exp.population}"]
         for r in rows],
    )
    return 0


def _train_for(exp: Experiment, case: int, population: int):
    """Fit a feeding policy for one exposure case and stock size."""
    setup = exp.setup()
    profile = build_case_profiles(
        case, exp.period, exp.params, **setup.profile_overrides
    )
    reference = setup.resolve_reference(population)
    env = TrackingEnv(
        reference.weights, profile, exp.params,
        exp.controllers.qconfig, population, exp.initial_weight,
    )
    return train(env, exp.controllers.qconfig, seed=exp.seed)


def cmd_train_q(exp: Experiment, out: str) -> int:
    """Train the tabular feeding policy for the configured case."""
    table, errors = _train_for(exp, exp.case, exp.population)
    table.to_csv(os.path.join(out, "qtable.csv"))
    _write_csv(
        os.path.join(out, "policy_error.csv"),
        ["episode", "policy_error"],
        [[i, f"{e:.6f}"] for i, e in enumerate(errors)],
    )
    tail = errors[-max(1, len(errors) // 10):]
    head = errors[:max(1, len(errors) // 10)]
    print(f"trained {len(errors)} episodes for case {exp.case} "
          f"(population {exp.population})")
    print(f"policy error: first-decile mean {head.mean():.4f}, "
          f"last-decile mean {tail.mean():.4f}")
    return 0


def _result_row(res: ScenarioResult) -> list:
    return [
        res.case_id,
        res.controller,
        res.population,
        f"{res.deaths}/{res.population}",
        f"{res.rmse_percent:.3f}",
        f"{res.food_g:.1f}",
    ]


def _run_and_save(controller, case, population, setup, out) -> ScenarioResult:
    res = run_scenario(controller, case, population, setup)
    res.trace.to_csv(
        os.path.join(out, f"trace_case{case}_{controller}_p{population}.csv")
    )
    return res


def cmd_compare(exp: Experiment, out: str) -> int:
    """Benchmark every controller across the three ammonia cases."""
    results: list[ScenarioResult] = []
    feed_only = ("bangbang", "pid", "mpc1", "qlearning")
    blocks = [(case, exp.population) for case in (1, 2, 3)]
    blocks.append((3, exp.case3_extra_population))
    for case, population in blocks:
        setup = exp.setup()
        table, _ = _train_for(exp, case, population)
        setup.controllers.qtable = table
        for controller in feed_only:
            results.append(_run_and_save(controller, case, population, setup, out))
    for population in (exp.population, exp.case3_extra_population):
        setup = exp.setup()
        results.append(_run_and_save("mpc2", 3, population, setup, out))
    headers = ["case", "controller", "population", "mortality",
               "rmse_percent", "food_g"]
    rows = [_result_row(r) for r in results]
    _write_csv(os.path.join(out, "compare.csv"), headers, rows)
    _print_table(headers, rows)
    return 0


def cmd_mpc2(exp: Experiment, out: str) -> int:
    """Joint feed/water-quality control on the spike case, both stockings."""
    results = []
    for population in (exp.population, exp.case3_extra_population):
        setup = exp.setup()
        results.append(_run_and_save("mpc2", exp.case, population, setup, out))
    headers = ["case", "controller", "population", "mortality",
               "rmse_percent", "food_g"]
    rows = [_result_row(r) for r in results]
    _write_csv(os.path.join(out, "mpc2_summary.csv"), headers, rows)
    _print_table(headers, rows)
    return 0


_COMMANDS = {
    "validate": cmd_validate,
    "sensitivity": cmd_sensitivity,
    "compare": cmd_compare,
    "train-q": cmd_train_q,
    "mpc2": cmd_mpc2,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fishpond",
        description="Fish-pond growth simulation and feeding-control studies",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", help="YAML experiment configuration")
        p.add_argument("--out", help="output directory (default from config)")
        p.add_argument("--seed", type=int, help="seed for the learning runs")
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        exp = build_experiment(config)
    except (ConfigError, OSError, yaml.YAMLError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        exp.seed = args.seed
    out = args.out or exp.output_dir
    os.makedirs(out, exist_ok=True)
    return _COMMANDS[args.command](exp, out)


if __name__ == "__main__":
    sys.exit(main())
