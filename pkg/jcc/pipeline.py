"""
Experiment orchestration: labelled dataset generation from repeated SAA solves, run-grouped
stratified splitting, rebalancing of the training side, ensemble training, the SAA-vs-surrogate
cost comparison, the ensemble-size sweep, and the files each step writes.

One "run" r is an independent uncertainty realization:
    1. scale every wind mean and std by its own uniform factor     stream (WIND, r)
    2. sample N in-sample scenarios                                stream (SAA, r)
    3. sample the ex-post Monte Carlo set                          stream (VALIDATION, r)
    4. solve the SAA model at every configured alpha
    5. label each solution +1 if no Monte Carlo scenario breaks a line, else -1
Every row of the dataset carries (run id, alpha) so it can be rebuilt from the config alone.
Runs are independent jobs; results are collected in run-id order, so the worker count never
changes an output.

The split keeps every run on one side, and only training rows are oversampled, so no test row
or test run is ever seen in training. Comparison samples are held-out runs: the distinct run ids
of the test split, in split order. Each is re-solved with the SAA model and with the surrogate
model on the very same scenario set.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import platform
import sys
import time
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Union

import numpy as np
import pandas as pd
import scipy

from . import __version__
from .cases import load_case
from .learn import Ensemble, LabeledSet, metrics, train_bagging
from .mip import MipOptions, SolverError, Status
from .netcase import Network
from .opf import (SURROGATE_MODES, DispatchSolution, SaaConfig, expost_validate, solve_saa,
                  solve_surrogate)
from .ptdf import PtdfMatrix, build_ptdf
from .scenarios import (COMPOSITIONS, ScenarioSet, Stream, UncertaintySpec, default_spec,
                        perturb_wind_stats, sample, spec_to_json, substream)

logger = logging.getLogger(__name__)

TABLE_COLUMNS = ["Sample", "JCC-OPF($)", "Ensemble SVM($)", "ΔCost($)", "ΔCost(%)"]


class ConfigError(ValueError):
    """Unknown or invalid experiment configuration."""


# ---------------------------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------------------------

@dataclass(frozen=True)
class UncertaintyConfig:
    wind_buses: tuple = ()
    mu_w: tuple = ()                      # MW per wind bus
    sigma_w: tuple = ()                   # MW per wind bus
    sigma_d_frac: float = 0.03            # load std as a fraction of the nominal demand
    omega_composition: str = "net"
    perturb_mu: tuple = (0.8, 1.2)        # per-run scale range of each wind mean
    perturb_sigma: tuple = (0.8, 1.2)     # per-run scale range of each wind std


@dataclass(frozen=True)
class ExperimentConfig:
    case: str = "case14"
    uncertainty: UncertaintyConfig = field(default_factory=UncertaintyConfig)
    seed: int = 0
    n_runs: int = 200
    n_scenarios: int = 100
    dataset_scenarios: Optional[int] = None   # N of the dataset runs; n_scenarios when unset
    alphas: tuple = (0.0, 0.05)
    mc_size: int = 1000
    rebalance_ratio: float = 1.0          # minority : majority after oversampling
    split_fraction: float = 0.75
    ensemble_size: int = 8
    C: float = 1.0
    svm_tol: float = 1e-4
    svm_max_epochs: int = 1000
    include_beta: bool = False            # add beta_g to the features (ablation)
    surrogate_mode: str = "conjunctive"
    comparison_alpha: float = 0.05
    n_test_samples: int = 15
    sweep_sizes: tuple = (1, 2, 4, 6, 8, 10, 12, 16)
    segments: int = 8
    beta_segments: int = 8
    monitored_lines: Union[None, str, tuple] = None
    screen_threshold: float = 0.7
    node_limit: int = 1_000_000
    accept_limit_incumbent: bool = True   # keep node-limited incumbents instead of failing the run
    jobs: int = 1

    def __post_init__(self):
        if not 0 < self.split_fraction < 1:
            raise ConfigError(f"split_fraction must be in (0, 1), got {self.split_fraction}")
        for a in tuple(self.alphas) + (self.comparison_alpha,):
            if not 0 <= a < 1:
                raise ConfigError(f"alphas must lie in [0, 1), got {a}")
        if self.n_runs < 0 or self.n_scenarios < 1 or self.mc_size < 1:
            raise ConfigError("n_runs must be >= 0, n_scenarios and mc_size >= 1")
        if self.dataset_scenarios is not None and self.dataset_scenarios < 1:
            raise ConfigError(f"dataset_scenarios must be >= 1, got {self.dataset_scenarios}")
        if self.ensemble_size < 1 or not self.C > 0:
            raise ConfigError("ensemble_size must be >= 1 and C > 0")
        if self.rebalance_ratio <= 0 or self.rebalance_ratio > 1:
            raise ConfigError("rebalance_ratio must be in (0, 1]")
        if self.surrogate_mode not in SURROGATE_MODES:
            raise ConfigError(f"surrogate_mode must be one of {SURROGATE_MODES}")
        if self.uncertainty.omega_composition not in COMPOSITIONS:
            raise ConfigError(f"omega_composition must be one of {COMPOSITIONS}")
        if not self.sweep_sizes or min(self.sweep_sizes) < 1:
            raise ConfigError("sweep_sizes must be a non-empty list of sizes >= 1")

    @property
    def dataset_n(self) -> int:
        return self.n_scenarios if self.dataset_scenarios is None else int(self.dataset_scenarios)

    def saa(self, alpha: float, n: int = None) -> SaaConfig:
        return SaaConfig(alpha=alpha, n_scenarios=self.n_scenarios if n is None else n,
                         monitored_lines=self.monitored_lines, segments=self.segments,
                         beta_segments=self.beta_segments, screen_threshold=self.screen_threshold)

    @property
    def options(self) -> MipOptions:
        return MipOptions(node_limit=int(self.node_limit))


def _tuple(v):
    return tuple(_tuple(x) for x in v) if isinstance(v, (list, tuple)) else v


def config_from_dict(obj: dict) -> ExperimentConfig:
    """Build a config from a parsed TOML/JSON mapping; unknown keys raise ConfigError."""
    obj = dict(obj)
    unc = obj.pop("uncertainty", {})
    known = {f.name for f in fields(ExperimentConfig)} - {"uncertainty"}
    unc_known = {f.name for f in fields(UncertaintyConfig)}
    bad = sorted(set(obj) - known) + sorted(f"uncertainty.{k}" for k in set(unc) - unc_known)
    if bad:
        raise ConfigError(f"unknown config keys: {', '.join(bad)}")
    if isinstance(obj.get("monitored_lines"), str) and obj["monitored_lines"] in ("all", ""):
        obj["monitored_lines"] = None
    try:
        return ExperimentConfig(uncertainty=UncertaintyConfig(**{k: _tuple(v) for k, v in unc.items()}),
                                **{k: _tuple(v) for k, v in obj.items()})
    except TypeError as e:
        raise ConfigError(str(e)) from e


def load_config(path: str) -> ExperimentConfig:
    """Read an experiment config from a .toml or .json file."""
    if not os.path.isfile(path):
        raise FileNotFoundError(f"config file not found: {path}")
    try:
        if path.endswith(".json"):
            with open(path, "r", encoding="utf-8") as f:
                obj = json.load(f)
        else:
            with open(path, "rb") as f:
                obj = tomllib.load(f)
    except (ValueError, UnicodeDecodeError) as e:
        raise ConfigError(f"{path}: {e}") from e
    cfg = config_from_dict(obj)
    logger.info("loaded config %s (hash %s)", path, config_hash(cfg)[:12])
    return cfg


def config_to_json(cfg: ExperimentConfig) -> dict:
    return asdict(cfg)


def config_hash(cfg: ExperimentConfig) -> str:
    text = json.dumps(config_to_json(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------------------------
# Runs and the labelled dataset
# ---------------------------------------------------------------------------------------------

@dataclass
class RunRecord:
    run_id: int
    alpha: float
    spec: UncertaintySpec
    solution: Optional[DispatchSolution] = None
    violations: Optional[int] = None      # ex-post count over the Monte Carlo set
    label: int = 0                        # +1 / -1; 0 when the run failed
    status: str = "ok"
    error: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_row(self) -> dict:
        row = {"run_id": self.run_id, "alpha": self.alpha, "status": self.status,
               "label": self.label, "violations": self.violations, "error": self.error,
               "mu_w": json.dumps(list(self.spec.mu_w)),
               "sigma_w": json.dumps(list(self.spec.sigma_w))}
        if self.solution is not None:
            sol = self.solution.to_row()
            sol["solver_status"] = sol.pop("status")
            sol.pop("kind")
            row.update(sol)
        return row


def base_spec(cfg: ExperimentConfig, net: Network) -> UncertaintySpec:
    u = cfg.uncertainty
    return default_spec(net, u.wind_buses, u.mu_w, u.sigma_w, u.sigma_d_frac, cfg.seed,
                        u.omega_composition)


def run_spec(cfg: ExperimentConfig, net: Network, run_id: int) -> UncertaintySpec:
    u = cfg.uncertainty
    return perturb_wind_stats(base_spec(cfg, net), substream(cfg.seed, Stream.WIND, run_id),
                              u.perturb_mu, u.perturb_sigma)


def run_scenarios(cfg: ExperimentConfig, net: Network, run_id: int, n: int = None):
    """(spec, in-sample set, Monte Carlo set) of run `run_id`; n defaults to cfg.n_scenarios."""
    spec = run_spec(cfg, net, run_id)
    scen = sample(spec, net, cfg.n_scenarios if n is None else n, stream=(Stream.SAA, run_id))
    mc = sample(spec, net, cfg.mc_size, stream=(Stream.VALIDATION, run_id))
    return spec, scen, mc


def _usable(sol: DispatchSolution, cfg: ExperimentConfig) -> bool:
    return sol.status == Status.OPTIMAL.value or cfg.accept_limit_incumbent


def _run_job(args) -> list:
    cfg, net, ptdf, run_id = args
    spec, scen, mc = run_scenarios(cfg, net, run_id, cfg.dataset_n)
    out = []
    for alpha in cfg.alphas:
        rec = RunRecord(run_id, float(alpha), spec)
        try:
            sol = solve_saa(net, ptdf, scen, cfg.saa(alpha, len(scen)), cfg.options)
            if not _usable(sol, cfg):
                raise SolverError(f"node limit reached (gap {sol.gap:.3g})")
            rec.solution = sol
            rec.violations = expost_validate(net, ptdf, sol, mc).violations
            rec.label = 1 if rec.violations == 0 else -1
        except SolverError as e:
            rec.status, rec.error = "failed", str(e)
            logger.warning("run %d alpha %g skipped: %s", run_id, alpha, e)
        out.append(rec)
    return out


def _map(fn, tasks, jobs: int) -> list:
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def feature_names(net: Network, include_beta: bool) -> tuple:
    labels = net.generator_labels()
    return labels + tuple(f"beta:{lab}" for lab in labels) if include_beta else labels


def features_of(sol: DispatchSolution, include_beta: bool) -> np.ndarray:
    return np.concatenate([sol.p, sol.beta]) if include_beta else np.asarray(sol.p, dtype=float)


def generate_dataset(cfg: ExperimentConfig, net: Network = None, ptdf: PtdfMatrix = None,
                     jobs: int = None):
    """Labelled feature rows from cfg.n_runs runs x len(cfg.alphas) SAA solves. -> (data, records)"""
    net = net if net is not None else load_case(cfg.case)
    ptdf = ptdf if ptdf is not None else build_ptdf(net)
    jobs = cfg.jobs if jobs is None else jobs
    start = time.perf_counter()
    tasks = [(cfg, net, ptdf, r) for r in range(cfg.n_runs)]
    records = [rec for batch in _map(_run_job, tasks, jobs) for rec in batch]
    good = [r for r in records if r.ok]
    names = feature_names(net, cfg.include_beta)
    if good:
        x = np.vstack([features_of(r.solution, cfg.include_beta) for r in good])
    else:
        x = np.zeros((0, len(names)))
    y = np.array([r.label for r in good], dtype=int)
    data = LabeledSet(x, y, names, tuple((r.run_id, r.alpha) for r in good))
    logger.info("dataset: %d rows (%d feasible, %d infeasible), %d failed solves, N=%d, %.1fs",
                len(data), data.counts()[1], data.counts()[-1], len(records) - len(good),
                cfg.dataset_n, time.perf_counter() - start)
    return data, records


def rebalance(data: LabeledSet, rng: np.random.Generator, ratio: float = 1.0) -> LabeledSet:
    """
    Oversample the minority class with replacement until minority = round(ratio * majority).
    Original rows come first, in order; the drawn copies are appended.
    """
    counts = data.counts()
    if counts[-1] == 0 or counts[1] == 0:
        raise ValueError(f"cannot rebalance single-class data: {counts}")
    minority = -1 if counts[-1] < counts[1] else 1
    target = int(round(ratio * counts[-minority]))
    need = target - counts[minority]
    if need <= 0:
        return data
    pool = np.flatnonzero(data.labels == minority)
    extra = rng.choice(pool, size=need, replace=True)
    return data.subset(np.concatenate([np.arange(len(data)), extra]))


def split_indices(data: LabeledSet, fraction: float, rng: np.random.Generator):
    """Stratified (train, test) index arrays; len(train) = floor(fraction * n)."""
    if not 0 < fraction < 1:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    n = len(data)
    classes = [c for c in (-1, 1) if np.any(data.labels == c)]
    members = {c: rng.permutation(np.flatnonzero(data.labels == c)) for c in classes}
    small = [c for c in classes if members[c].size < 2]
    if small:
        raise ValueError(f"classes {small} have fewer than two members")
    n_train = int(math.floor(fraction * n))
    quota = {c: fraction * members[c].size for c in classes}
    take = {c: int(math.floor(quota[c])) for c in classes}
    # Hand the leftover train slots to the largest fractional remainders (ties: label order).
    for c in sorted(classes, key=lambda c: -(quota[c] - take[c]))[:n_train - sum(take.values())]:
        take[c] += 1
    train = np.sort(np.concatenate([members[c][:take[c]] for c in classes]))
    test = np.sort(np.concatenate([members[c][take[c]:] for c in classes]))
    return train, test


def split(data: LabeledSet, fraction: float, rng: np.random.Generator):
    train, test = split_indices(data, fraction, rng)
    return data.subset(train), data.subset(test)


def run_groups(data: LabeledSet) -> np.ndarray:
    """Group key per row: the run id when rows carry provenance, else the row index."""
    if data.origin:
        return np.array([int(o[0]) for o in data.origin], dtype=int)
    return np.arange(len(data))


def split_by_run_indices(data: LabeledSet, fraction: float, rng: np.random.Generator):
    """
    Stratified (train, test) row indices with every run on exactly one side.

    Runs are stratified by the labels they hold: all -1, all +1, or both. A stratum of k >= 2 runs
    sends floor(fraction * k) of them to train, clamped to [1, k - 1]; strata of a single run are
    pooled into one more stratum. Both classes must end up on both sides.
    """
    if not 0 < fraction < 1:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    groups = run_groups(data)
    keys = list(dict.fromkeys(groups.tolist()))
    rows = {g: np.flatnonzero(groups == g) for g in keys}
    for c in (-1, 1):
        held = sum(bool(np.any(data.labels[rows[g]] == c)) for g in keys)
        if held < 2:
            raise ValueError(f"class {c} appears in {held} run(s); a run split needs two")
    strata = {}
    for g in keys:
        strata.setdefault(tuple(sorted(set(data.labels[rows[g]].tolist()))), []).append(g)
    single = [s[0] for _, s in sorted(strata.items()) if len(s) == 1]
    bins = [s for _, s in sorted(strata.items()) if len(s) > 1] + ([single] if single else [])
    train_runs, test_runs = [], []
    for members in bins:
        k = len(members)
        take = int(math.floor(fraction * k))
        if k >= 2:
            take = min(max(take, 1), k - 1)
        order = [members[i] for i in rng.permutation(k)]
        train_runs += order[:take]
        test_runs += order[take:]
    train = np.sort(np.concatenate([rows[g] for g in train_runs]))
    test = np.sort(np.concatenate([rows[g] for g in test_runs])) if test_runs else np.zeros(0, int)
    for c in (-1, 1):
        if not (np.any(data.labels[train] == c) and np.any(data.labels[test] == c)):
            raise ValueError(f"class {c} ended up on one side of the run split; add runs")
    return train, test


def split_by_run(data: LabeledSet, fraction: float, rng: np.random.Generator):
    train, test = split_by_run_indices(data, fraction, rng)
    return data.subset(train), data.subset(test)


@dataclass
class SurrogateArtifacts:
    """Everything produced on the way from raw runs to a trained ensemble."""

    dataset: LabeledSet
    records: list
    train_raw: LabeledSet                 # training runs before oversampling
    train: LabeledSet                     # train_raw with the minority class oversampled
    test: LabeledSet                      # held-out runs, never oversampled
    ensemble: Ensemble
    metrics: dict


def prepare_surrogate(cfg: ExperimentConfig, net: Network = None, ptdf: PtdfMatrix = None,
                      jobs: int = None, data=None) -> SurrogateArtifacts:
    """generate_dataset -> split_by_run -> rebalance(train) -> train_bagging -> test metrics."""
    net = net if net is not None else load_case(cfg.case)
    ptdf = ptdf if ptdf is not None else build_ptdf(net)
    if data is None:
        data, records = generate_dataset(cfg, net, ptdf, jobs)
    else:
        data, records = data
    train_raw, test = split_by_run(data, cfg.split_fraction, substream(cfg.seed, Stream.SPLIT))
    train = rebalance(train_raw, substream(cfg.seed, Stream.REBALANCE), cfg.rebalance_ratio)
    logger.info("split by run: %d train rows (%d after oversampling), %d test rows",
                len(train_raw), len(train), len(test))
    ens = train_bagging(train, cfg.ensemble_size, cfg.C, cfg.seed, cfg.svm_tol, cfg.svm_max_epochs,
                        jobs=cfg.jobs if jobs is None else jobs)
    scores = metrics(ens, test, "vote_sign")
    logger.info("ensemble M=%d: test accuracy %.3f, %d false negatives",
                ens.size, scores["accuracy"], scores["false_negatives"])
    return SurrogateArtifacts(data, records, train_raw, train, test, ens, scores)


# ---------------------------------------------------------------------------------------------
# Comparison and sweep
# ---------------------------------------------------------------------------------------------

@dataclass
class ExperimentReport:
    rows: list                            # one dict per test sample
    aggregates: dict
    metrics: dict
    config_hash: str = ""
    failed: int = 0

    def to_frame(self) -> pd.DataFrame:
        """Report columns first, then the per-sample extras."""
        df = pd.DataFrame(self.rows)
        if df.empty:
            return pd.DataFrame(columns=TABLE_COLUMNS)
        df = df.rename(columns={"sample": "Sample", "cost_saa": "JCC-OPF($)",
                                "cost_surrogate": "Ensemble SVM($)", "delta": "ΔCost($)",
                                "delta_pct": "ΔCost(%)"})
        rest = [c for c in df.columns if c not in TABLE_COLUMNS]
        return df[TABLE_COLUMNS + rest]

    def to_json(self) -> dict:
        return {"config_hash": self.config_hash, "failed": self.failed,
                "aggregates": self.aggregates, "metrics": self.metrics, "rows": self.rows}


def held_out_runs(test: LabeledSet, n: int, train: LabeledSet = None) -> list:
    """
    Distinct run ids of the test split in order of appearance, at most n of them. Runs that also
    have rows in `train` are skipped.
    """
    seen = []
    used = {int(o[0]) for o in train.origin} if train is not None and train.origin else set()
    for run_id, _ in test.origin:
        if run_id not in seen and int(run_id) not in used:
            seen.append(int(run_id))
        if len(seen) == n:
            break
    return seen


def _compare_job(args) -> dict:
    cfg, net, ptdf, ens, mode, run_id, sample_no = args
    _, scen, mc = run_scenarios(cfg, net, run_id)
    saa_cfg = cfg.saa(cfg.comparison_alpha)
    row = {"sample": sample_no, "run_id": run_id, "budget": saa_cfg.budget(len(scen)),
           "mode": mode, "status": "ok"}
    try:
        saa = solve_saa(net, ptdf, scen, saa_cfg, cfg.options)
        sur = solve_surrogate(net, scen, ens, saa_cfg, mode, cfg.options)
        for what, sol in (("saa", saa), ("surrogate", sur)):
            if not _usable(sol, cfg):
                raise SolverError(f"{what}: node limit reached (gap {sol.gap:.3g})")
    except SolverError as e:
        logger.warning("comparison sample %d (run %d) failed: %s", sample_no, run_id, e)
        row.update(status="failed", error=str(e), cost_saa=math.nan, cost_surrogate=math.nan,
                   delta=math.nan, delta_pct=math.nan)
        return row
    delta = sur.cost - saa.cost
    row.update(cost_saa=saa.cost, cost_surrogate=sur.cost, delta=delta,
               delta_pct=100.0 * delta / saa.cost if saa.cost else math.nan,
               objective_saa=saa.objective, objective_surrogate=sur.objective,
               violations_saa=expost_validate(net, ptdf, saa, scen).violations,
               violations_surrogate=expost_validate(net, ptdf, sur, scen).violations,
               mc_violations_saa=expost_validate(net, ptdf, saa, mc).violations,
               mc_violations_surrogate=expost_validate(net, ptdf, sur, mc).violations,
               z_active_surrogate=sur.violations_allowed)
    return row


def run_comparison(cfg: ExperimentConfig, n_test_samples: int = None, artifacts=None,
                   net: Network = None, mode: str = None, jobs: int = None) -> ExperimentReport:
    """SAA vs surrogate cost on held-out runs (trains the ensemble first when not given)."""
    net = net if net is not None else load_case(cfg.case)
    ptdf = build_ptdf(net)
    jobs = cfg.jobs if jobs is None else jobs
    if artifacts is None:
        artifacts = prepare_surrogate(cfg, net, ptdf, jobs)
    mode = mode or cfg.surrogate_mode
    n = cfg.n_test_samples if n_test_samples is None else n_test_samples
    run_ids = held_out_runs(artifacts.test, n, artifacts.train)
    start = time.perf_counter()
    tasks = [(cfg, net, ptdf, artifacts.ensemble, mode, r, k + 1) for k, r in enumerate(run_ids)]
    rows = _map(_compare_job, tasks, jobs)

    ok = [r for r in rows if r["status"] == "ok"]
    pct = pd.Series([r["delta_pct"] for r in ok], dtype=float)
    aggregates = {"samples": len(rows), "completed": len(ok),
                  "mean_delta_pct": float(pct.mean()) if len(ok) else math.nan,
                  "std_delta_pct": float(pct.std()) if len(ok) > 1 else 0.0 if ok else math.nan,
                  "mean_abs_delta_pct": float(pct.abs().mean()) if len(ok) else math.nan,
                  "max_violations_surrogate": max((r["violations_surrogate"] for r in ok), default=0)}
    logger.info("comparison: %d/%d samples, mean dCost %.4f%%, %.1fs", len(ok), len(rows),
                aggregates["mean_delta_pct"], time.perf_counter() - start)
    return ExperimentReport(rows, aggregates, artifacts.metrics, config_hash(cfg),
                            failed=len(rows) - len(ok))


def sweep_ensemble_size(cfg: ExperimentConfig, sizes=None, artifacts=None, net: Network = None,
                        jobs: int = None) -> list:
    """Test metrics per ensemble size; one nested ensemble is trained at max(sizes)."""
    sizes = list(cfg.sweep_sizes if sizes is None else sizes)
    if not sizes:
        raise ValueError("sizes must be non-empty")
    if artifacts is None:
        artifacts = prepare_surrogate(cfg, net, jobs=jobs)
    big = train_bagging(artifacts.train, max(sizes), cfg.C, cfg.seed, cfg.svm_tol,
                        cfg.svm_max_epochs, jobs=cfg.jobs if jobs is None else jobs)
    out = []
    for m in sizes:
        scores = metrics(big.head(m), artifacts.test, "vote_sign")
        out.append({"M": m, "accuracy": scores["accuracy"],
                    "false_negatives": scores["false_negatives"],
                    "false_positives": scores["false_positives"]})
    return out


# ---------------------------------------------------------------------------------------------
# Output files
# ---------------------------------------------------------------------------------------------

def _csv(df: pd.DataFrame, path: str) -> str:
    df.to_csv(path, index=False, float_format="%.10g", lineterminator="\n")
    return path


def write_json(obj, path: str) -> str:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, sort_keys=True, default=json_default)
        f.write("\n")
    return path


def json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def dataset_frame(data: LabeledSet) -> pd.DataFrame:
    df = pd.DataFrame(data.features, columns=list(data.feature_names) or None)
    df.insert(0, "label", data.labels)
    if data.origin:
        df.insert(0, "alpha", [a for _, a in data.origin])
        df.insert(0, "run_id", [r for r, _ in data.origin])
    return df


def read_dataset(path: str) -> LabeledSet:
    """Inverse of dataset_frame: run_id, alpha, label, then one column per feature."""
    if not os.path.isfile(path):
        raise FileNotFoundError(f"dataset file not found: {path}")
    df = pd.read_csv(path)
    if "label" not in df:
        raise ValueError(f"{path}: no 'label' column")
    names = [c for c in df.columns if c not in ("run_id", "alpha", "label")]
    origin = (tuple(zip(df["run_id"].astype(int), df["alpha"].astype(float)))
              if "run_id" in df and "alpha" in df else ())
    return LabeledSet(df[names].to_numpy(dtype=float), df["label"].to_numpy(dtype=int),
                      tuple(names), origin)


def write_dataset(out_dir: str, data: LabeledSet, records: list) -> list:
    return [_csv(dataset_frame(data), os.path.join(out_dir, "dataset.csv")),
            _csv(pd.DataFrame([r.to_row() for r in records]), os.path.join(out_dir, "runs.csv"))]


def write_ensemble(out_dir: str, ens: Ensemble) -> str:
    return write_json(ens.to_json(), os.path.join(out_dir, "ensemble.json"))


def read_ensemble(path: str) -> Ensemble:
    if not os.path.isfile(path):
        raise FileNotFoundError(f"ensemble file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        return Ensemble.from_json(json.load(f))


def write_report(out_dir: str, report: ExperimentReport) -> list:
    frame = report.to_frame()
    paths = [_csv(frame, os.path.join(out_dir, "report.csv")),
             write_json(report.to_json(), os.path.join(out_dir, "report.json"))]
    ok = frame[frame["status"] == "ok"] if "status" in frame else frame
    # Distribution of the relative cost difference.
    paths.append(_csv(ok[["Sample", "ΔCost(%)"]], os.path.join(out_dir, "plot_cost_delta.csv")))
    # Cost against in-sample violations, both methods, next to the budget cap.
    cols = [c for c in ("Sample", "JCC-OPF($)", "Ensemble SVM($)", "violations_saa",
                        "violations_surrogate", "budget") if c in ok]
    paths.append(_csv(ok[cols], os.path.join(out_dir, "plot_cost_violations.csv")))
    return paths


def write_sweep(out_dir: str, sweep: list) -> str:
    return _csv(pd.DataFrame(sweep), os.path.join(out_dir, "plot_ensemble_size.csv"))


def versions() -> dict:
    return {"jcc": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "pandas": pd.__version__}


def manifest_body(command: str, outputs: list, cfg: ExperimentConfig = None,
                  seed: Optional[int] = None, extra: dict = None) -> dict:
    """Provenance record: command, config hash, seed, versions, output names."""
    body = {"command": command, "seed": seed if seed is not None else (cfg.seed if cfg else None),
            "config_hash": config_hash(cfg) if cfg is not None else None,
            "config": config_to_json(cfg) if cfg is not None else None,
            "versions": versions(), "argv": sys.argv[1:],
            "outputs": sorted(os.path.basename(p) for p in outputs)}
    if extra:
        body.update(extra)
    return body


def manifest(out_dir: str, command: str, outputs: list, cfg: ExperimentConfig = None,
             seed: Optional[int] = None, extra: dict = None) -> str:
    """manifest.json beside the outputs."""
    return write_json(manifest_body(command, outputs, cfg, seed, extra),
                      os.path.join(out_dir, "manifest.json"))


def scenario_summary(scen: ScenarioSet) -> dict:
    return {"n": len(scen), "var_omega": scen.var_omega, "omega_mean": float(scen.omega.mean()),
            "omega_std": float(scen.omega.std()), "spec": spec_to_json(scen.spec)}
