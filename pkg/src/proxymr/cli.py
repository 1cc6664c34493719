"""Command line interface.

Subcommands: simulate, estimate, check-dag, run-scenario, experiment,
report.  Exit codes: 0 success (or instrument valid / expectations met),
1 expectation or validity or estimation failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np
import pandas as pd

from .dag import Dag, GraphError, check_instrument
from .estimators import ContrastMethod, EstimatorError
from .harness import (
    AllReplicatesFailed,
    ConfigError,
    ExperimentConfig,
    RunReport,
    aggregate_rows,
    build_estimate_report,
)
from .scenarios import CATALOG, evaluate_scenario, get_scenario
from .simulate import ObservedTrioData, ScmConfig, sample_trio

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="proxymr",
        description="Two-generation Mendelian randomization laboratory.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="sample a trio dataset to CSV")
    sim.add_argument("--config", help="experiment config JSON supplying the scm block")
    sim.add_argument("--n", type=int, help="sample size (overrides config)")
    sim.add_argument("--seed", type=int, default=0, help="sampling seed")
    sim.add_argument("--reveal-latent", action="store_true",
                     help="include latent and counterfactual columns")
    sim.add_argument("--out", default="-", help="output CSV path (default: stdout)")

    est = sub.add_parser("estimate", help="estimate a proxy Wald report from a dataset CSV")
    est.add_argument("data", help="dataset CSV (observed columns suffice)")
    est.add_argument("--contrast", choices=["dosage", "carrier"], default="dosage")
    est.add_argument("--f", choices=["mendelian", "identity"], default="mendelian")
    est.add_argument("--weak-tol", type=float, default=1e-4)
    est.add_argument("--replicates", type=int, default=500,
                     help="bootstrap replicates for standard errors (0 skips)")
    est.add_argument("--seed", type=int, default=0, help="bootstrap seed")
    est.add_argument("--out", default="-")
    est.add_argument("--format", choices=["csv", "json"], default="json")

    chk = sub.add_parser("check-dag", help="run the instrument checks on a DAG file")
    chk.add_argument("dagfile", help="graph in the DAG text format")
    chk.add_argument("--instrument", required=True)
    chk.add_argument("--exposure", required=True)
    chk.add_argument("--outcome", required=True)

    run = sub.add_parser("run-scenario", help="evaluate scenario expectations")
    run.add_argument("name", nargs="?", help="scenario name")
    run.add_argument("--all", action="store_true", help="run the whole catalog")
    run.add_argument("--list", action="store_true", help="list scenario names")
    run.add_argument("--n", type=int, help="sample size override")
    run.add_argument("--seed", type=int, default=0, help="master seed")
    run.add_argument("--bootstrap-replicates", type=int, default=200)
    run.add_argument("--out", help="write the scenario report(s) as JSON")
    run.add_argument("--format", choices=["json"], default="json")

    exp = sub.add_parser("experiment", help="run a replicated experiment from a config file")
    exp.add_argument("--config", required=True)
    exp.add_argument("--replicates", type=int, help="override config replicates")
    exp.add_argument("--seed", type=int, help="override config master_seed")
    exp.add_argument("--out", help="override config output path")
    exp.add_argument("--format", choices=["csv", "json"], help="override output format")

    rep = sub.add_parser("report", help="aggregate prior experiment reports")
    rep.add_argument("runs", nargs="+", help="RunReport JSON files")
    rep.add_argument("--out", default="-")
    rep.add_argument("--format", choices=["csv", "json"], default="json")

    return parser


def _write(path: str, payload: str) -> None:
    if path == "-" or path is None:
        sys.stdout.write(payload)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload)


def _scm_from_config(path: str | None, n: int | None, seed: int) -> ScmConfig:
    if path is not None:
        scm = ExperimentConfig.load(path).scm
    else:
        from .scenarios import default_config

        scm = default_config(n=n or 10_000)
    n_eff = n if n is not None else scm.n
    from dataclasses import replace

    return replace(scm, n=n_eff, seed=seed)


def _cmd_simulate(args) -> int:
    cfg = _scm_from_config(args.config, args.n, args.seed)
    ds = sample_trio(cfg)
    import io

    buf = io.StringIO()
    ds.to_csv(buf, reveal_latent=args.reveal_latent)
    _write(args.out, buf.getvalue())
    return EXIT_OK


def _cmd_estimate(args) -> int:
    frame = pd.read_csv(args.data)
    required = {"d_child", "a_child", "y_parent"}
    missing = required - set(frame.columns)
    if missing:
        raise ConfigError(f"dataset is missing columns: {', '.join(sorted(missing))}")
    obs = ObservedTrioData(
        d=frame["d_child"].to_numpy(np.float64),
        a=frame["a_child"].to_numpy(np.float64),
        y_parent=frame["y_parent"].to_numpy(np.float64),
    )
    from .estimators import CORRECTIONS, assoc_diff, bootstrap_se, proxy_wald, wald

    method = ContrastMethod(args.contrast)
    f = CORRECTIONS[args.f]
    gy_p = assoc_diff(obs.d, obs.y_parent, method)
    ga = assoc_diff(obs.d, obs.a, method)
    result = {
        "n": int(obs.n),
        "contrast": method.value,
        "f_used": args.f,
        "weak_tol": args.weak_tol,
        "gy_p_assoc": float(gy_p),
        "ga_assoc": float(ga),
        "proxy_wald": float(wald(f(gy_p), ga, args.weak_tol)),
    }
    if "y_child" in frame.columns and "d_child" in frame.columns:
        result["wald_child"] = float(
            wald(
                assoc_diff(obs.d, frame["y_child"].to_numpy(np.float64), method),
                ga,
                args.weak_tol,
            )
        )
    if args.replicates > 0:
        result["se_proxy_wald"] = bootstrap_se(
            obs,
            lambda o: proxy_wald(o, f=f, method=method, weak_tol=args.weak_tol),
            replicates=args.replicates,
            seed=args.seed,
        )
    if args.format == "json":
        _write(args.out, json.dumps(result, sort_keys=True, indent=2) + "\n")
    else:
        header = ",".join(result)
        row = ",".join(str(v) for v in result.values())
        _write(args.out, header + "\n" + row + "\n")
    return EXIT_OK


def _cmd_check_dag(args) -> int:
    try:
        with open(args.dagfile, "r", encoding="utf-8") as fh:
            dag = Dag.from_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read DAG file: {exc}") from exc
    report = check_instrument(dag, args.instrument, args.exposure, args.outcome)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.valid else EXIT_FAIL


def _cmd_run_scenario(args) -> int:
    if args.list:
        for name in sorted(CATALOG):
            print(name)
        return EXIT_OK
    if args.all:
        names = sorted(CATALOG)
    elif args.name:
        if args.name not in CATALOG:
            print(f"unknown scenario {args.name!r}; known: {', '.join(sorted(CATALOG))}",
                  file=sys.stderr)
            return EXIT_USAGE
        names = [args.name]
    else:
        print("run-scenario needs a scenario name or --all", file=sys.stderr)
        return EXIT_USAGE

    reports = []
    all_passed = True
    for name in names:
        scenario = get_scenario(name)
        report = evaluate_scenario(
            scenario,
            n=args.n,
            seed=args.seed,
            bootstrap_replicates=args.bootstrap_replicates,
        )
        reports.append(report)
        all_passed = all_passed and report.passed
        for line in report.lines():
            print(line)
        print()
    if args.out:
        payload = [r.to_dict() for r in reports]
        _write(args.out, json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return EXIT_OK if all_passed else EXIT_FAIL


def _cmd_experiment(args) -> int:
    config = ExperimentConfig.load(args.config)
    from dataclasses import replace

    if args.replicates is not None:
        config = replace(config, replicates=args.replicates)
    if args.seed is not None:
        config = replace(config, master_seed=args.seed)
    if args.out is not None:
        config = replace(config, out_path=args.out)
    if args.format is not None:
        config = replace(config, out_format=args.format)

    from .harness import run_experiment

    report = run_experiment(config)
    if config.out_format == "json":
        payload = report.to_json_bytes().decode("ascii")
    else:
        payload = report.to_csv_text()
    _write(config.out_path or "-", payload)
    failed_rows = sum(1 for r in report.rows if "error" in r)
    if failed_rows:
        print(f"{failed_rows} of {config.replicates} replicates failed", file=sys.stderr)
    return EXIT_OK


def _cmd_report(args) -> int:
    rows: list[dict] = []
    for path in args.runs:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                rows.extend(RunReport.from_json(fh.read()).rows)
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise ConfigError(f"cannot read run report {path}: {exc}") from exc
    aggregates = aggregate_rows(rows)
    if args.format == "json":
        payload = json.dumps(
            {"rows": len(rows), "aggregates": aggregates}, sort_keys=True, indent=2
        ) + "\n"
    else:
        lines = ["field,mean,sd"]
        for key in sorted(aggregates):
            lines.append(f"{key},{aggregates[key]['mean']},{aggregates[key]['sd']}")
        payload = "\n".join(lines) + "\n"
    _write(args.out, payload)
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "estimate": _cmd_estimate,
    "check-dag": _cmd_check_dag,
    "run-scenario": _cmd_run_scenario,
    "experiment": _cmd_experiment,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed a usage message; normalize its code.
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, GraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AllReplicatesFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except EstimatorError as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    raise SystemExit(main())
