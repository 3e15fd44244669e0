"""
OPF formulations on the DC/PTDF model: deterministic, sample-average (SAA) joint chance-constrained
with Big-M relaxations, and the surrogate variant where learned hyperplanes replace the line rows.
Plus ex-post Monte Carlo validation of any dispatch with an affine AGC policy.

Decision variables (all formulations):
    p_g      scheduled output (MW), p_min <= p_g <= p_max
    beta_g   AGC participation, 0 <= beta_g <= 1, sum(beta) = 1
    z_s      binary per scenario; z_s = 1 lets scenario s break its line (or surrogate) rows
    t_*      epigraph variables carrying the piecewise-linear cost

Objective (expected cost of the affine policy):
    sum_g  c2 p^2 + c1 p + c0 + Var(Omega) * c2 * beta^2
Both quadratic terms are replaced by chord epigraphs (`mip.linearize`), so the model is a MILP.
The objective a solver reports is the piecewise over-approximation; `exact_cost` evaluates the
true quadratic at the returned point and that is what `DispatchSolution.cost` holds.

Flow of line l in scenario s, with generator g at bus n(g):
    f_ls = sum_g B[l, n(g)] (p_g + beta_g Omega_s) + sum_n B[l, n] (w_ns - d_ns)
The second sum is a constant per (l, s) and moves to the right-hand side.

Generator limits under the policy (p_min <= p_g + beta_g Omega_s <= p_max) are hard for every
sampled scenario. Since beta >= 0 the two scenarios with the extreme Omega imply all others, so by
default only those rows are emitted (`gen_limit_rows="extreme"`; "all" emits every scenario).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .mip import (InfeasibleError, MipModel, MipOptions, MipSolution, Sense, SolverError, Status,
                  VarKind, add_piecewise_objective, linearize, solve_milp)
from .netcase import CostCurve, Network
from .ptdf import PtdfMatrix, flows
from .scenarios import ScenarioSet

logger = logging.getLogger(__name__)

FLOW_SLACK_MW = 1e-6                      # ex-post tolerance on |f| > limit
BIG_M_MODES = ("per_line_computed", "fixed")
SURROGATE_MODES = ("mean_affine", "conjunctive")


@dataclass(frozen=True)
class SaaConfig:
    alpha: float = 0.05
    n_scenarios: int = 100
    monitored_lines: Union[None, str, tuple] = None   # None = every rated line, "auto" = screen
    big_m_mode: str = "per_line_computed"
    big_m_value: float = 0.0              # used when big_m_mode == "fixed"
    big_m_scale: float = 1.0              # multiplies every computed M (validity checks)
    segments: int = 8                     # chords per generator cost curve
    beta_segments: int = 8                # chords per Var(Omega) c2 beta^2 term
    screen_threshold: float = 0.7         # loading ratio for monitored_lines="auto"
    gen_limit_rows: str = "extreme"

    def __post_init__(self):
        if not 0 <= self.alpha < 1:
            raise ValueError(f"alpha must be in [0, 1), got {self.alpha}")
        if self.n_scenarios < 1:
            raise ValueError("n_scenarios must be >= 1")
        if self.big_m_mode not in BIG_M_MODES:
            raise ValueError(f"big_m_mode must be one of {BIG_M_MODES}")
        if self.big_m_mode == "fixed" and not self.big_m_value > 0:
            raise ValueError("fixed big_m_mode needs big_m_value > 0")
        if self.segments < 1 or self.beta_segments < 1:
            raise ValueError("segments must be >= 1")
        if self.gen_limit_rows not in ("extreme", "all"):
            raise ValueError("gen_limit_rows must be 'extreme' or 'all'")

    def budget(self, n: int) -> int:
        """floor(alpha * n); the epsilon keeps e.g. 0.05 * 100 from flooring to 4."""
        return int(math.floor(self.alpha * n + 1e-9))


@dataclass
class DispatchSolution:
    p: np.ndarray                         # MW per generator
    beta: np.ndarray                      # participation per generator
    z: np.ndarray                         # 0/1 per scenario (empty for deterministic)
    cost: float                           # exact expected cost ($/h)
    status: str
    objective: float = math.nan           # piecewise objective the solver minimized
    budget: int = 0
    nodes: int = 0
    iterations: int = 0
    gap: float = 0.0
    kind: str = "saa"
    labels: tuple = ()

    @property
    def violations_allowed(self) -> int:
        return int(np.sum(self.z > 0.5))

    def to_json(self) -> dict:
        return {"kind": self.kind, "status": self.status, "cost": self.cost,
                "objective": self.objective, "budget": self.budget, "nodes": self.nodes,
                "iterations": self.iterations, "gap": self.gap, "labels": list(self.labels),
                "p": self.p.tolist(), "beta": self.beta.tolist(),
                "z": [int(round(v)) for v in self.z]}

    @classmethod
    def from_json(cls, obj: dict) -> "DispatchSolution":
        return cls(p=np.asarray(obj["p"], dtype=float), beta=np.asarray(obj["beta"], dtype=float),
                   z=np.asarray(obj.get("z", []), dtype=float), cost=float(obj["cost"]),
                   status=obj.get("status", ""), objective=float(obj.get("objective", math.nan)),
                   budget=int(obj.get("budget", 0)), nodes=int(obj.get("nodes", 0)),
                   iterations=int(obj.get("iterations", 0)), gap=float(obj.get("gap", 0.0)),
                   kind=obj.get("kind", "saa"), labels=tuple(obj.get("labels", ())))

    def to_row(self) -> dict:
        row = {"kind": self.kind, "status": self.status, "cost": self.cost,
               "objective": self.objective, "budget": self.budget,
               "z_active": self.violations_allowed, "nodes": self.nodes}
        for label, v in zip(self.labels, self.p):
            row[f"p_{label}"] = float(v)
        for label, v in zip(self.labels, self.beta):
            row[f"beta_{label}"] = float(v)
        return row


@dataclass
class ExPostReport:
    n_scenarios: int
    violations: int                       # scenarios with any |f_l| > limit
    worst_overload_mw: float              # max over scenarios and lines of |f| - limit, >= 0
    probability: float                    # violations / n_scenarios
    flags: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))
    gen_limit_breaches: int = 0           # scenarios where the policy leaves a generator's range

    def to_json(self) -> dict:
        return {"n_scenarios": self.n_scenarios, "violations": self.violations,
                "worst_overload_mw": self.worst_overload_mw, "probability": self.probability,
                "gen_limit_breaches": self.gen_limit_breaches,
                "violated_scenarios": np.flatnonzero(self.flags).tolist()}


# ---------------------------------------------------------------------------------------------
# Shared pieces
# ---------------------------------------------------------------------------------------------

def exact_cost(net: Network, p, beta=None, var_omega: float = 0.0) -> float:
    """sum_g c(p_g) + Var(Omega) * sum_g c2_g beta_g^2, evaluated exactly."""
    total = sum(g.cost(float(pg)) for g, pg in zip(net.generators, p))
    if beta is not None and var_omega:
        total += var_omega * sum(g.cost.c2 * float(b) ** 2 for g, b in zip(net.generators, beta))
    return float(total)


def _generator_sensitivity(net: Network, ptdf: PtdfMatrix, rows) -> np.ndarray:
    """(len(rows), n_gen): flow on each PTDF row per MW from each generator."""
    return ptdf.entries[np.asarray(rows, dtype=int)] @ net.generator_incidence().T


def _rated_rows(ptdf: PtdfMatrix) -> np.ndarray:
    return np.flatnonzero(np.isfinite(ptdf.limits))


def _check_adequacy(net: Network, net_demand: float) -> None:
    if net.p_max.sum() < net_demand - 1e-9:
        raise InfeasibleError(f"total p_max {net.p_max.sum():.6g} MW is below the mean net demand "
                              f"{net_demand:.6g} MW")
    if net.p_min.sum() > net_demand + 1e-9:
        raise InfeasibleError(f"total p_min {net.p_min.sum():.6g} MW exceeds the mean net demand "
                              f"{net_demand:.6g} MW")


def _dispatch_vars(model: MipModel, net: Network):
    p = np.array([model.add_var(f"p[{lab}]", g.p_min, g.p_max)
                  for lab, g in zip(net.generator_labels(), net.generators)], dtype=int)
    return p


def _add_generation_cost(model: MipModel, net: Network, p_idx, segments: int) -> None:
    for g, j in zip(net.generators, p_idx):
        if g.p_max - g.p_min <= 1e-12:
            model.constant += g.cost(g.p_min)
            continue
        add_piecewise_objective(model, int(j), linearize(g.cost, g.p_min, g.p_max, segments))


def _add_beta_cost(model: MipModel, net: Network, beta_idx, var_omega: float, segments: int) -> None:
    for g, j in zip(net.generators, beta_idx):
        c2 = var_omega * g.cost.c2
        if c2 > 0:
            add_piecewise_objective(model, int(j), linearize(CostCurve(c2=c2), 0.0, 1.0, segments))


def _policy_block(model: MipModel, net: Network, scen: ScenarioSet, cfg: SaaConfig):
    """p, beta with the mean balance, the AGC simplex and per-scenario generator limits."""
    net_demand = float(net.demand.sum() - scen.mu_bus.sum())
    _check_adequacy(net, net_demand)
    p = _dispatch_vars(model, net)
    beta = np.array([model.add_var(f"beta[{lab}]", 0.0, 1.0) for lab in net.generator_labels()],
                    dtype=int)
    model.add_constraint({int(j): 1.0 for j in p}, Sense.EQ, net_demand, name="balance")
    model.add_constraint({int(j): 1.0 for j in beta}, Sense.EQ, 1.0, name="agc")

    if cfg.gen_limit_rows == "all":
        rows = range(len(scen))
    else:
        rows = sorted({int(np.argmax(scen.omega)), int(np.argmin(scen.omega))})
    for s in rows:
        om = float(scen.omega[s])
        for k, g in enumerate(net.generators):
            terms = {int(p[k]): 1.0, int(beta[k]): om}
            model.add_constraint(terms, Sense.LE, g.p_max, name=f"gmax[{k},{s}]")
            model.add_constraint(terms, Sense.GE, g.p_min, name=f"gmin[{k},{s}]")
    return p, beta


def _scenario_vars(model: MipModel, n: int, budget: int):
    # With a zero budget every z_s is pinned at 0 by the budget row; fixing the bound as well
    # keeps the search from branching on them.
    z = model.add_vars("z", n, 0.0, 1.0 if budget > 0 else 0.0, VarKind.BINARY)
    model.add_constraint({int(j): 1.0 for j in z}, Sense.LE, float(budget), name="budget")
    return z


# ---------------------------------------------------------------------------------------------
# Deterministic OPF
# ---------------------------------------------------------------------------------------------

def build_deterministic(net: Network, ptdf: PtdfMatrix, mu_bus=None, segments: int = 8) -> MipModel:
    """Economic dispatch at the mean forecast with every rated line limit enforced."""
    mu_bus = np.zeros(net.n_bus) if mu_bus is None else np.asarray(mu_bus, dtype=float)
    net_demand = float(net.demand.sum() - mu_bus.sum())
    _check_adequacy(net, net_demand)
    model = MipModel(f"det:{net.name}")
    p = _dispatch_vars(model, net)
    model.add_constraint({int(j): 1.0 for j in p}, Sense.EQ, net_demand, name="balance")
    rows = _rated_rows(ptdf)
    sens = _generator_sensitivity(net, ptdf, rows)
    base = flows(ptdf, mu_bus - net.demand)[rows]
    for r, row in enumerate(rows):
        terms = {int(p[k]): float(a) for k, a in enumerate(sens[r]) if a != 0.0}
        lim = float(ptdf.limits[row])
        if not terms:
            if abs(base[r]) > lim:
                raise InfeasibleError(f"line row {row} is overloaded by fixed injections alone")
            continue
        model.add_constraint(terms, Sense.LE, lim - base[r], name=f"fmax[{row}]")
        model.add_constraint(terms, Sense.GE, -lim - base[r], name=f"fmin[{row}]")
    _add_generation_cost(model, net, p, segments)
    model.meta.update(p=p, kind="det")
    return model


def capacity_participation(net: Network) -> np.ndarray:
    """beta proportional to p_max; the policy attached to deterministic dispatches."""
    cap = np.maximum(net.p_max, 0.0)
    return cap / cap.sum() if cap.sum() > 0 else np.full(len(cap), 1.0 / len(cap))


def solve_deterministic(net: Network, ptdf: PtdfMatrix, mu_bus=None, segments: int = 8,
                        opts: MipOptions = MipOptions()) -> DispatchSolution:
    model = build_deterministic(net, ptdf, mu_bus, segments)
    sol = solve_milp(model, opts)
    if sol.status is Status.INFEASIBLE:
        raise InfeasibleError("deterministic OPF is infeasible")
    if not sol.ok:
        raise SolverError(f"deterministic OPF ended with status {sol.status.value}")
    p = sol.value_of(model.meta["p"])
    return DispatchSolution(p=p, beta=capacity_participation(net), z=np.zeros(0),
                            cost=exact_cost(net, p), status=sol.status.value,
                            objective=sol.objective, nodes=sol.nodes, iterations=sol.iterations,
                            kind="det", labels=net.generator_labels())


def screen_lines(net: Network, ptdf: PtdfMatrix, scen: ScenarioSet, threshold: float = 0.7,
                 dispatch: Optional[DispatchSolution] = None) -> tuple:
    """
    Branch positions whose loading |f| / limit reaches `threshold` in any scenario when the
    deterministic dispatch is run with capacity-proportional participation.
    """
    if dispatch is None:
        dispatch = solve_deterministic(net, ptdf, scen.mu_bus)
    rows = _rated_rows(ptdf)
    f = scenario_flows(net, ptdf, dispatch.p, dispatch.beta, scen)[:, rows]
    loading = np.abs(f).max(axis=0) / ptdf.limits[rows]
    picked = tuple(int(ptdf.branches[r]) for r, ld in zip(rows, loading) if ld >= threshold)
    logger.info("line screening at %.0f%%: %d of %d rated lines monitored",
                100 * threshold, len(picked), rows.size)
    return picked


# ---------------------------------------------------------------------------------------------
# SAA JCC-OPF
# ---------------------------------------------------------------------------------------------

def injection_bounds(net: Network, scen: ScenarioSet) -> np.ndarray:
    """Per-bus bound on |net injection| over the dispatch box and the sampled scenarios."""
    cap = net.generator_incidence().T @ np.maximum(np.abs(net.p_min), np.abs(net.p_max))
    return cap + np.abs(scen.w - scen.d).max(axis=0)


def compute_big_m(net: Network, ptdf: PtdfMatrix, scen: ScenarioSet, line: int) -> float:
    """
    M_l = sum_n |B_ln| * injection_bound_n + limit_l for the PTDF row `line`.

    Any policy-feasible scenario flow satisfies |f| <= sum_n |B_ln| * injection_bound_n, so the
    relaxed row |f| <= limit + M never binds.
    """
    row = ptdf.entries[line]
    return float(np.abs(row) @ injection_bounds(net, scen) + ptdf.limits[line])


def _monitored_rows(net: Network, ptdf: PtdfMatrix, scen: ScenarioSet, cfg: SaaConfig) -> np.ndarray:
    rated = _rated_rows(ptdf)
    if cfg.monitored_lines is None:
        return rated
    if isinstance(cfg.monitored_lines, str):
        if cfg.monitored_lines != "auto":
            raise ValueError(f"monitored_lines must be None, 'auto' or branch positions, "
                             f"got {cfg.monitored_lines!r}")
        branches = screen_lines(net, ptdf, scen, cfg.screen_threshold)
    else:
        branches = cfg.monitored_lines
    live = set(ptdf.branches)
    missing = [b for b in branches if b not in live]
    if missing:
        raise ValueError(f"monitored branches {missing} are not in service")
    rows = np.array(sorted(ptdf.row_of(int(b)) for b in branches), dtype=int)
    return rows[np.isfinite(ptdf.limits[rows])]


def build_saa(net: Network, ptdf: PtdfMatrix, scen: ScenarioSet, cfg: SaaConfig) -> MipModel:
    """The SAA Big-M model over all scenarios of `scen` (cfg.n_scenarios is not re-checked)."""
    n = len(scen)
    budget = cfg.budget(n)
    model = MipModel(f"saa:{net.name}:alpha={cfg.alpha}")
    p, beta = _policy_block(model, net, scen, cfg)
    z = _scenario_vars(model, n, budget)

    rows = _monitored_rows(net, ptdf, scen, cfg)
    sens = _generator_sensitivity(net, ptdf, rows)
    base = flows(ptdf, scen.w - scen.d)[:, rows]         # (n, L) fixed part of every flow
    big_m = np.empty(rows.size)
    for r, row in enumerate(rows):
        if cfg.big_m_mode == "fixed":
            big_m[r] = cfg.big_m_value
        else:
            big_m[r] = compute_big_m(net, ptdf, scen, int(row))
    big_m *= cfg.big_m_scale

    for r, row in enumerate(rows):
        lim = float(ptdf.limits[row])
        for s in range(n):
            om = float(scen.omega[s])
            terms = {}
            for k, a in enumerate(sens[r]):
                if a != 0.0:
                    terms[int(p[k])] = float(a)
                    terms[int(beta[k])] = float(a * om)
            # f <= lim + M z   and   f >= -lim - M z
            up = dict(terms)
            up[int(z[s])] = -big_m[r]
            model.add_constraint(up, Sense.LE, lim - base[s, r], name=f"fmax[{row},{s}]")
            lo = dict(terms)
            lo[int(z[s])] = big_m[r]
            model.add_constraint(lo, Sense.GE, -lim - base[s, r], name=f"fmin[{row},{s}]")

    _add_generation_cost(model, net, p, cfg.segments)
    _add_beta_cost(model, net, beta, scen.var_omega, cfg.beta_segments)
    model.meta.update(p=p, beta=beta, z=z, budget=budget, rows=rows, big_m=big_m, kind="saa",
                      var_omega=scen.var_omega)
    logger.debug("SAA model: %d vars, %d rows, %d monitored lines, budget %d",
                 model.n_vars, len(model.constraints), rows.size, budget)
    return model


def _extract(net: Network, model: MipModel, sol: MipSolution, what: str) -> DispatchSolution:
    if sol.status is Status.INFEASIBLE:
        raise InfeasibleError(f"{what} model is infeasible")
    if sol.values is None:
        raise SolverError(f"{what} solve ended with status {sol.status.value} and no incumbent")
    if sol.status is Status.ITERATION_LIMIT:
        logger.warning("%s solve hit the node limit; keeping the incumbent (gap %.3g)", what, sol.gap)
    meta = model.meta
    p = sol.value_of(meta["p"])
    beta = np.clip(sol.value_of(meta["beta"]), 0.0, 1.0)
    z = np.round(sol.value_of(meta["z"]))
    return DispatchSolution(p=p, beta=beta, z=z, cost=exact_cost(net, p, beta, meta["var_omega"]),
                            status=sol.status.value, objective=sol.objective, budget=meta["budget"],
                            nodes=sol.nodes, iterations=sol.iterations, gap=sol.gap, kind=what,
                            labels=net.generator_labels())


def solve_saa(net: Network, ptdf: PtdfMatrix, scen: ScenarioSet, cfg: SaaConfig,
              opts: MipOptions = MipOptions()) -> DispatchSolution:
    model = build_saa(net, ptdf, scen, cfg)
    return _extract(net, model, solve_milp(model, opts), "saa")


# ---------------------------------------------------------------------------------------------
# Surrogate JCC-OPF
# ---------------------------------------------------------------------------------------------

def _check_features(ens, net: Network) -> bool:
    """True when the ensemble also takes beta features (after the p features)."""
    labels = list(net.generator_labels())
    order = list(ens.feature_order)
    if order == labels:
        return False
    if order == labels + [f"beta:{lab}" for lab in labels]:
        return True
    raise ValueError(f"ensemble features {order} do not match the network generators {labels}")


def compute_big_m_svm(ens, net: Network) -> float:
    """max_m (sum_g |w_mg| * max|p_g| + |b_m|) + 1, plus sum |w_beta| when beta is a feature."""
    with_beta = _check_features(ens, net)
    cap = np.maximum(np.abs(net.p_min), np.abs(net.p_max))
    g = len(net.generators)
    best = 0.0
    for plane in ens.planes:
        w = np.asarray(plane.w, dtype=float)
        bound = float(np.abs(w[:g]) @ cap + abs(plane.b))
        if with_beta:
            bound += float(np.abs(w[g:]).sum())
        best = max(best, bound)
    return best + 1.0


def build_surrogate(net: Network, scen: ScenarioSet, ens, cfg: SaaConfig,
                    mode: str = "conjunctive") -> MipModel:
    """
    The SAA model with the line rows replaced by learned rows on P_gs = p_g + beta_g Omega_s.

    conjunctive:  w_m . P_s + b_m + M_svm z_s >= 0            for every plane m and scenario s
    mean_affine:  sum_m weight_m (w_m . P_s + b_m) + M_svm z_s >= 0    one row per scenario
    """
    if mode not in SURROGATE_MODES:
        raise ValueError(f"mode must be one of {SURROGATE_MODES}, got {mode!r}")
    with_beta = _check_features(ens, net)
    n = len(scen)
    budget = cfg.budget(n)
    g = len(net.generators)
    model = MipModel(f"surrogate[{mode}]:{net.name}:alpha={cfg.alpha}")
    p, beta = _policy_block(model, net, scen, cfg)
    z = _scenario_vars(model, n, budget)
    m_svm = compute_big_m_svm(ens, net) * cfg.big_m_scale

    if mode == "mean_affine":
        weights = np.asarray(ens.weights, dtype=float)
        w_eff = sum(wt * np.asarray(h.w, dtype=float) for wt, h in zip(weights, ens.planes))
        b_eff = float(sum(wt * h.b for wt, h in zip(weights, ens.planes)))
        planes = [(w_eff, b_eff)]
    else:
        planes = [(np.asarray(h.w, dtype=float), float(h.b)) for h in ens.planes]

    for s in range(n):
        om = float(scen.omega[s])
        for m, (w, b) in enumerate(planes):
            terms = {}
            for k in range(g):
                if w[k] != 0.0:
                    terms[int(p[k])] = float(w[k])
                    terms[int(beta[k])] = float(w[k] * om)
            if with_beta:
                for k in range(g):
                    if w[g + k] != 0.0:
                        terms[int(beta[k])] = terms.get(int(beta[k]), 0.0) + float(w[g + k])
            terms[int(z[s])] = m_svm
            model.add_constraint(terms, Sense.GE, -b, name=f"svm[{m},{s}]")

    _add_generation_cost(model, net, p, cfg.segments)
    _add_beta_cost(model, net, beta, scen.var_omega, cfg.beta_segments)
    model.meta.update(p=p, beta=beta, z=z, budget=budget, m_svm=m_svm, kind="surrogate",
                      mode=mode, surrogate_rows=n * len(planes), var_omega=scen.var_omega)
    return model


def solve_surrogate(net: Network, scen: ScenarioSet, ens, cfg: SaaConfig,
                    mode: str = "conjunctive", opts: MipOptions = MipOptions()) -> DispatchSolution:
    model = build_surrogate(net, scen, ens, cfg, mode)
    return _extract(net, model, solve_milp(model, opts), "surrogate")


# ---------------------------------------------------------------------------------------------
# Ex-post validation
# ---------------------------------------------------------------------------------------------

def scenario_flows(net: Network, ptdf: PtdfMatrix, p, beta, scen: ScenarioSet) -> np.ndarray:
    """(n_scenarios, n_rows) flows with the policy p + beta * Omega_s applied."""
    out = policy_output(p, beta, scen)                           # (n, G)
    inj = out @ net.generator_incidence() + scen.w - scen.d
    return flows(ptdf, inj)


def policy_output(p, beta, scen: ScenarioSet) -> np.ndarray:
    return np.asarray(p, dtype=float)[None, :] + scen.omega[:, None] * np.asarray(beta)[None, :]


def expost_validate(net: Network, ptdf: PtdfMatrix, sol: DispatchSolution,
                    mc: ScenarioSet) -> ExPostReport:
    """Count Monte Carlo scenarios in which any rated line exceeds its limit by more than 1e-6 MW."""
    f = scenario_flows(net, ptdf, sol.p, sol.beta, mc)
    over = np.abs(f) - ptdf.limits[None, :]                    # inf limits give -inf
    flags = (over > FLOW_SLACK_MW).any(axis=1)
    worst = float(max(0.0, over.max())) if over.size else 0.0
    out = policy_output(sol.p, sol.beta, mc)
    gen_bad = ((out < net.p_min - FLOW_SLACK_MW) | (out > net.p_max + FLOW_SLACK_MW)).any(axis=1)
    count = int(flags.sum())
    return ExPostReport(n_scenarios=len(mc), violations=count, worst_overload_mw=worst,
                        probability=count / len(mc), flags=flags,
                        gen_limit_breaches=int(gen_bad.sum()))
