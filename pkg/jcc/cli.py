"""
Command-line front end.

    python -m jcc <command> [options]

Commands that produce one table (parse-case, ptdf, sample, solve-det, solve-saa, solve-surrogate,
validate) print it to standard output unless --out is given; the others always write into --out
(default ./jcc-out). Every file-writing command leaves a manifest.json beside its outputs.

Exit codes: 0 ok, 1 usage, 2 bad data/config/path, 3 infeasible, 4 solver or internal failure.
Diagnostics go to standard error; the level is -v (INFO) / -vv (DEBUG) or JCC_LOG.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

import pandas as pd

from . import netcase, opf, pipeline, ptdf as ptdf_mod, scenarios
from .cases import experiment_path, load_case
from .mip import InfeasibleError, SolverError
from .netcase import CaseFormatError

logger = logging.getLogger("jcc")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INFEASIBLE, EXIT_INTERNAL = 0, 1, 2, 3, 4
DEFAULT_OUT = "jcc-out"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _configure_logging(verbosity: int) -> None:
    level = os.environ.get("JCC_LOG", "").upper()
    if verbosity >= 2:
        level = "DEBUG"
    elif verbosity == 1:
        level = "INFO"
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR"):
        level = "WARNING"
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level),
                        format="%(levelname)s %(name)s: %(message)s", force=True)


# ---------------------------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------------------------

def _config(args) -> pipeline.ExperimentConfig:
    if not args.config:
        raise UsageError("this command needs --config")
    cfg = pipeline.load_config(experiment_path(args.config))
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.jobs is not None:
        over["jobs"] = args.jobs
    if getattr(args, "mode", None):
        over["surrogate_mode"] = args.mode
    return replace(cfg, **over) if over else cfg


def _network(args):
    if getattr(args, "case", None):
        return load_case(args.case)
    if args.config:
        return load_case(_config(args).case)
    raise UsageError("give a case name/path or --config")


def _out_dir(args, default=None):
    path = args.out or default
    if path:
        os.makedirs(path, exist_ok=True)
    return path


def _emit(args, name: str, frame: pd.DataFrame = None, obj=None, cfg=None, extra=None) -> None:
    """
    Write one result as CSV or JSON into --out with a manifest.json, or to standard output with
    the manifest logged at INFO on standard error.
    """
    fmt = args.format
    if fmt == "csv" and frame is None:
        fmt = "json"
    out = _out_dir(args)
    if fmt == "csv":
        text = frame.to_csv(index=False, float_format="%.10g", lineterminator="\n")
    else:
        text = json.dumps(obj if obj is not None else frame.to_dict(orient="records"), indent=2,
                          sort_keys=True, default=pipeline.json_default) + "\n"
    if out is None:
        sys.stdout.write(text)
        body = pipeline.manifest_body(args.command, ["<stdout>"], cfg,
                                      seed=getattr(args, "seed", None), extra=extra)
        logger.info("manifest %s", json.dumps(body, sort_keys=True, default=pipeline.json_default))
        return
    path = os.path.join(out, f"{name}.{fmt}")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    pipeline.manifest(out, args.command, [path], cfg, seed=getattr(args, "seed", None), extra=extra)
    logger.info("wrote %s", path)


def _solution_frame(sol: opf.DispatchSolution, report: opf.ExPostReport = None) -> pd.DataFrame:
    row = sol.to_row()
    if report is not None:
        row.update(mc_scenarios=report.n_scenarios, mc_violations=report.violations,
                   mc_probability=report.probability, worst_overload_mw=report.worst_overload_mw)
    return pd.DataFrame([row])


def _solution_json(sol, report=None) -> dict:
    obj = {"solution": sol.to_json()}
    if report is not None:
        obj["expost"] = report.to_json()
    return obj


# ---------------------------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------------------------

def cmd_parse_case(args) -> int:
    net = _network(args)
    frame = pd.DataFrame([{"bus": b.id, "kind": b.kind.value, "pd_mean": b.pd_mean}
                          for b in net.buses])
    _emit(args, "case", frame, netcase.to_json(net))
    return EXIT_OK


def cmd_ptdf(args) -> int:
    net = _network(args)
    mat = ptdf_mod.build_ptdf(net)
    frame = ptdf_mod.to_frame(mat, net).reset_index()
    obj = {"slack": mat.slack, "bus_ids": list(mat.bus_ids), "branches": list(mat.branches),
           "limits": [None if v == float("inf") else v for v in mat.limits.tolist()],
           "entries": mat.entries.tolist()}
    _emit(args, "ptdf", frame, obj)
    return EXIT_OK


def cmd_sample(args) -> int:
    cfg = _config(args)
    net = load_case(cfg.case)
    spec = pipeline.run_spec(cfg, net, args.run)
    n = args.n or cfg.n_scenarios
    scen = scenarios.sample(spec, net, n, stream=(scenarios.Stream.SAA, args.run))
    _emit(args, "scenarios", scenarios.to_frame(scen, net), scenarios.to_json(scen, net), cfg)
    return EXIT_OK


def cmd_solve_det(args) -> int:
    net = _network(args)
    sol = opf.solve_deterministic(net, ptdf_mod.build_ptdf(net))
    _emit(args, "solution", _solution_frame(sol), _solution_json(sol))
    return EXIT_OK


def cmd_solve_saa(args) -> int:
    cfg = _config(args)
    net = load_case(cfg.case)
    mat = ptdf_mod.build_ptdf(net)
    _, scen, mc = pipeline.run_scenarios(cfg, net, args.run)
    alpha = cfg.comparison_alpha if args.alpha is None else args.alpha
    sol = opf.solve_saa(net, mat, scen, cfg.saa(alpha), cfg.options)
    report = opf.expost_validate(net, mat, sol, mc)
    _emit(args, "solution", _solution_frame(sol, report), _solution_json(sol, report), cfg)
    return EXIT_OK


def cmd_solve_surrogate(args) -> int:
    cfg = _config(args)
    net = load_case(cfg.case)
    mat = ptdf_mod.build_ptdf(net)
    ens = pipeline.read_ensemble(args.ensemble)
    _, scen, mc = pipeline.run_scenarios(cfg, net, args.run)
    alpha = cfg.comparison_alpha if args.alpha is None else args.alpha
    sol = opf.solve_surrogate(net, scen, ens, cfg.saa(alpha), cfg.surrogate_mode, cfg.options)
    report = opf.expost_validate(net, mat, sol, mc)
    _emit(args, "solution", _solution_frame(sol, report), _solution_json(sol, report), cfg)
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _config(args)
    net = load_case(cfg.case)
    if not os.path.isfile(args.solution):
        raise FileNotFoundError(f"solution file not found: {args.solution}")
    with open(args.solution, "r", encoding="utf-8") as f:
        obj = json.load(f)
    sol = opf.DispatchSolution.from_json(obj.get("solution", obj))
    if len(sol.p) != len(net.generators):
        raise ValueError(f"solution has {len(sol.p)} generators, case has {len(net.generators)}")
    _, scen, mc = pipeline.run_scenarios(cfg, net, args.run)
    report = opf.expost_validate(net, ptdf_mod.build_ptdf(net), sol, scen if args.in_sample else mc)
    frame = pd.DataFrame([{k: v for k, v in report.to_json().items() if k != "violated_scenarios"}])
    _emit(args, "expost", frame, report.to_json(), cfg)
    return EXIT_OK


def cmd_gen_dataset(args) -> int:
    cfg = _config(args)
    out = _out_dir(args, DEFAULT_OUT)
    data, records = pipeline.generate_dataset(cfg)
    paths = pipeline.write_dataset(out, data, records)
    pipeline.manifest(out, args.command, paths, cfg,
                      extra={"rows": len(data), "failed": sum(not r.ok for r in records)})
    return EXIT_OK


def _artifacts(args, cfg):
    data = None
    if args.dataset:
        data = (pipeline.read_dataset(args.dataset), [])
    return pipeline.prepare_surrogate(cfg, data=data)


def cmd_train_ensemble(args) -> int:
    cfg = _config(args)
    out = _out_dir(args, DEFAULT_OUT)
    art = _artifacts(args, cfg)
    paths = [pipeline.write_ensemble(out, art.ensemble),
             pipeline.write_json(art.metrics, os.path.join(out, "metrics.json"))]
    if art.records:
        paths += pipeline.write_dataset(out, art.dataset, art.records)
    pipeline.manifest(out, args.command, paths, cfg)
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _config(args)
    out = _out_dir(args, DEFAULT_OUT)
    art = _artifacts(args, cfg)
    report = pipeline.run_comparison(cfg, args.samples, art)
    paths = pipeline.write_report(out, report) + [pipeline.write_ensemble(out, art.ensemble)]
    pipeline.manifest(out, args.command, paths, cfg, extra={"aggregates": report.aggregates})
    if report.failed == len(report.rows) and report.rows:
        raise SolverError("every comparison sample failed")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _config(args)
    out = _out_dir(args, DEFAULT_OUT)
    sizes = [int(s) for s in args.sizes.split(",")] if args.sizes else None
    rows = pipeline.sweep_ensemble_size(cfg, sizes, _artifacts(args, cfg))
    paths = [pipeline.write_sweep(out, rows)]
    pipeline.manifest(out, args.command, paths, cfg)
    return EXIT_OK


COMMANDS = {
    "parse-case": (cmd_parse_case, "read and validate a case file"),
    "ptdf": (cmd_ptdf, "PTDF matrix of a case"),
    "sample": (cmd_sample, "scenario set of one run"),
    "solve-det": (cmd_solve_det, "deterministic DC-OPF"),
    "solve-saa": (cmd_solve_saa, "SAA chance-constrained OPF for one run"),
    "gen-dataset": (cmd_gen_dataset, "labelled dataset from repeated SAA solves"),
    "train-ensemble": (cmd_train_ensemble, "bagged SVM ensemble"),
    "solve-surrogate": (cmd_solve_surrogate, "surrogate OPF for one run with a trained ensemble"),
    "validate": (cmd_validate, "ex-post check of a solution file"),
    "compare": (cmd_compare, "SAA vs surrogate cost on held-out runs"),
    "sweep": (cmd_sweep, "test metrics against ensemble size"),
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="experiment config (.toml/.json path or bundled name)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="override the master seed")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--jobs", type=int, help="worker processes")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = _Parser(prog="jcc", description="Joint chance-constrained DC-OPF toolkit.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name in ("parse-case", "ptdf", "solve-det"):
            p.add_argument("case", nargs="?", help="case file or bundled case name")
        if name in ("sample", "solve-saa", "solve-surrogate", "validate"):
            p.add_argument("--run", type=int, default=0, help="run id")
        if name == "sample":
            p.add_argument("--n", type=int, help="scenario count (default: config N)")
        if name in ("solve-saa", "solve-surrogate"):
            p.add_argument("--alpha", type=float, help="risk level (default: comparison_alpha)")
        if name in ("solve-surrogate", "compare"):
            p.add_argument("--mode", choices=opf.SURROGATE_MODES)
        if name == "solve-surrogate":
            p.add_argument("--ensemble", required=True, help="ensemble.json")
        if name == "validate":
            p.add_argument("--solution", required=True, help="solution JSON from solve-*")
            p.add_argument("--in-sample", action="store_true",
                           help="check against the run's SAA scenarios instead of the MC set")
        if name in ("train-ensemble", "compare", "sweep"):
            p.add_argument("--dataset", help="reuse a dataset.csv instead of regenerating")
        if name == "compare":
            p.add_argument("--samples", type=int, help="held-out samples (default: config)")
        if name == "sweep":
            p.add_argument("--sizes", help="comma-separated ensemble sizes")
    return parser


def dispatch(argv) -> int:
    """Run one command; returns the process exit code."""
    try:
        args = build_parser().parse_args(argv)
        if not args.command:
            raise UsageError("jcc: a command is required (see --help)")
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:                     # --help
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    _configure_logging(args.verbose)
    handler = COMMANDS[args.command][0]
    try:
        return handler(args)
    except UsageError as e:
        print(f"jcc {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleError as e:
        print(f"jcc {args.command}: infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SolverError as e:
        print(f"jcc {args.command}: solver failure: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except CaseFormatError as e:
        print(f"jcc {args.command}: case error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (FileNotFoundError, ValueError) as e:
        print(f"jcc {args.command}: {e}", file=sys.stderr)
        return EXIT_DATA
    except Exception as e:  # noqa
        logger.debug("unhandled error", exc_info=True)
        print(f"jcc {args.command}: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


def main(argv=None) -> int:
    return dispatch(sys.argv[1:] if argv is None else argv)
