"""
Linear / mixed-binary programming: a model container and an embedded solver.

The container (`MipModel`) holds named variables with bounds and a kind (continuous or binary),
a linear objective with a constant term, and sparse rows `sum a_j x_j (<=|=|>=) rhs`. Minimization
only.

LP engine (`solve_lp`): a bounded-variable primal revised simplex on

    min c'x   s.t.   A x - s = 0,   lb <= x <= ub,   row_lo <= s <= row_hi

with one logical variable s_i per row. Starting from the all-logical basis, phase 1 minimizes the
sum of bound infeasibilities of the basic variables, phase 2 the true objective. Dantzig pricing is
used until the objective stalls for `stall_limit` iterations, then Bland's smallest-index rule
(for both entering and leaving choices) takes over until progress resumes, which rules out cycling.

The basis is never stored as an m x m matrix. With k structural columns basic, exactly k rows have
a non-basic logical, and every solve with the basis reduces to the k x k block of A on those rows
and columns. That block is LU-factorized (partial pivoting) afresh at every iteration; k is bounded
by the number of structural variables, which for OPF models is far smaller than the row count.

MILP engine (`solve_milp`): best-bound branch and bound over the binary variables. Each node is an
LP relaxation solved from scratch; branching picks the most fractional binary (ties to the lowest
index); the open node with the lowest bound is expanded next (ties to the oldest node), so the
search order is deterministic.

Convex quadratic costs enter through `linearize` + `add_piecewise_objective`: an epigraph variable
bounded below by the chords of the curve. For a minimization with a convex curve no binaries are
needed.
"""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.sparse import coo_matrix

from .netcase import CostCurve

logger = logging.getLogger(__name__)

INF = math.inf


class SolverError(RuntimeError):
    """Iteration/node limits or numerical breakdown."""


class InfeasibleError(SolverError):
    """The model (or the data it was built from) admits no feasible point."""


class VarKind(str, Enum):
    CONTINUOUS = "continuous"
    BINARY = "binary"


class Sense(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class Status(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"


@dataclass(frozen=True)
class MipOptions:
    feas_tol: float = 1e-7
    opt_tol: float = 1e-9
    int_tol: float = 1e-6
    abs_gap: float = 1e-6
    rel_gap: float = 1e-6
    max_iter: int = 200_000               # simplex iterations per LP
    node_limit: int = 1_000_000
    stall_limit: int = 50
    pivot_tol: float = 1e-9


@dataclass
class Variable:
    name: str
    lower: float = 0.0
    upper: float = INF
    kind: VarKind = VarKind.CONTINUOUS


@dataclass
class Constraint:
    coeffs: dict                          # variable index -> coefficient
    sense: Sense
    rhs: float
    name: str = ""


@dataclass
class MipSolution:
    status: Status
    objective: float = INF
    values: Optional[np.ndarray] = None
    nodes: int = 0
    iterations: int = 0
    gap: float = INF                      # incumbent - best bound, when a MILP search stops early

    @property
    def ok(self) -> bool:
        return self.status is Status.OPTIMAL

    def value_of(self, index) -> np.ndarray:
        return self.values[np.asarray(index, dtype=int)]


class MipModel:
    """Sparse linear model with continuous and binary variables; minimize only."""

    def __init__(self, name: str = ""):
        self.name = name
        self.variables: list = []
        self.constraints: list = []
        self.objective: dict = {}
        self.constant: float = 0.0
        self.meta: dict = {}              # free-form layout info for model builders

    # --- variables -------------------------------------------------------------------------

    def add_var(self, name: str, lower: float = 0.0, upper: float = INF,
                kind: VarKind = VarKind.CONTINUOUS) -> int:
        kind = VarKind(kind)
        if kind is VarKind.BINARY:
            lower, upper = max(0.0, lower), min(1.0, upper)
        if lower > upper:
            raise ValueError(f"variable {name!r} has lower {lower} > upper {upper}")
        self.variables.append(Variable(name, float(lower), float(upper), kind))
        return len(self.variables) - 1

    def add_vars(self, prefix: str, count: int, lower: float = 0.0, upper: float = INF,
                 kind: VarKind = VarKind.CONTINUOUS) -> np.ndarray:
        return np.array([self.add_var(f"{prefix}[{i}]", lower, upper, kind) for i in range(count)],
                        dtype=int)

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def binaries(self) -> np.ndarray:
        return np.array([i for i, v in enumerate(self.variables) if v.kind is VarKind.BINARY],
                        dtype=int)

    # --- rows and objective ----------------------------------------------------------------

    def add_constraint(self, coeffs, sense, rhs: float, name: str = "") -> int:
        terms = dict(coeffs.items()) if isinstance(coeffs, dict) else {}
        if not isinstance(coeffs, dict):
            for j, a in coeffs:
                terms[int(j)] = terms.get(int(j), 0.0) + float(a)
        for j in terms:
            if not 0 <= j < len(self.variables):
                raise ValueError(f"constraint {name!r} references unknown variable {j}")
        terms = {int(j): float(a) for j, a in terms.items() if a != 0.0}
        self.constraints.append(Constraint(terms, Sense(sense), float(rhs), name))
        return len(self.constraints) - 1

    def add_objective(self, index: int, coef: float) -> None:
        if not 0 <= index < len(self.variables):
            raise ValueError(f"objective references unknown variable {index}")
        self.objective[index] = self.objective.get(index, 0.0) + float(coef)

    def copy(self) -> "MipModel":
        m = MipModel(self.name)
        m.variables = [Variable(v.name, v.lower, v.upper, v.kind) for v in self.variables]
        m.constraints = [Constraint(dict(c.coeffs), c.sense, c.rhs, c.name) for c in self.constraints]
        m.objective = dict(self.objective)
        m.constant = self.constant
        m.meta = dict(self.meta)
        return m

    def arrays(self):
        """Dense (c, A, row_lo, row_hi, lb, ub) in the form the simplex works on."""
        n, m = len(self.variables), len(self.constraints)
        c = np.zeros(n)
        for j, a in self.objective.items():
            c[j] = a
        rows, cols, vals = [], [], []
        row_lo, row_hi = np.full(m, -INF), np.full(m, INF)
        for i, con in enumerate(self.constraints):
            for j, a in con.coeffs.items():
                rows.append(i)
                cols.append(j)
                vals.append(a)
            if con.sense is not Sense.GE:
                row_hi[i] = con.rhs
            if con.sense is not Sense.LE:
                row_lo[i] = con.rhs
        a_mat = coo_matrix((vals, (rows, cols)), shape=(m, n)).toarray()
        lb = np.array([v.lower for v in self.variables], dtype=float)
        ub = np.array([v.upper for v in self.variables], dtype=float)
        return c, a_mat, row_lo, row_hi, lb, ub

    def check(self, x, tol: float = 1e-6) -> list:
        """Names of rows and variables violated by `x` beyond `tol` (empty when feasible)."""
        bad = []
        for i, con in enumerate(self.constraints):
            lhs = sum(a * x[j] for j, a in con.coeffs.items())
            if (con.sense is not Sense.GE and lhs > con.rhs + tol) or \
                    (con.sense is not Sense.LE and lhs < con.rhs - tol):
                bad.append(con.name or f"row{i}")
        for j, v in enumerate(self.variables):
            if x[j] < v.lower - tol or x[j] > v.upper + tol:
                bad.append(v.name)
        return bad

    def evaluate(self, x) -> float:
        return self.constant + sum(a * x[j] for j, a in self.objective.items())

    def to_lp(self) -> str:
        """LP-format text for cross-checking with external solvers."""
        names = [_lp_name(v.name, j) for j, v in enumerate(self.variables)]

        def expr(terms):
            if not terms:
                return "0 " + names[0] if names else "0"
            parts = []
            for j, a in sorted(terms.items()):
                parts.append(f"{'-' if a < 0 else '+'} {abs(a)!r} {names[j]}")
            text = " ".join(parts)
            return text[2:] if text.startswith("+ ") else text

        out = [f"\\ {self.name}", "Minimize", f" obj: {expr(self.objective)}"]
        if self.constant:
            out[-1] += f" + {self.constant!r} __const"
        out.append("Subject To")
        for i, con in enumerate(self.constraints):
            label = _lp_name(con.name, i, prefix="c")
            out.append(f" {label}: {expr(con.coeffs)} {con.sense.value} {con.rhs!r}")
        out.append("Bounds")
        for j, v in enumerate(self.variables):
            lo = "-inf" if v.lower == -INF else repr(v.lower)
            hi = "+inf" if v.upper == INF else repr(v.upper)
            out.append(f" {lo} <= {names[j]} <= {hi}")
        if self.constant:
            out.append(" __const = 1")
        bins = [names[j] for j in self.binaries]
        if bins:
            out.append("Binaries")
            out.append(" " + " ".join(bins))
        out.append("End")
        return "\n".join(out) + "\n"


def _lp_name(name: str, index: int, prefix: str = "x") -> str:
    clean = "".join(ch if ch.isalnum() or ch in "_." else "_" for ch in name)
    return clean if clean and not clean[0].isdigit() else f"{prefix}{index}_{clean}"


# =============================================================================================
# LP: bounded-variable revised simplex
# =============================================================================================

class _Simplex:
    """One LP solve. Variables 0..n-1 are structural, n..n+m-1 the row logicals (column -e_i)."""

    def __init__(self, c, a_mat, row_lo, row_hi, lb, ub, opts: MipOptions):
        self.a = a_mat
        self.m, self.n = a_mat.shape
        self.opts = opts
        self.cost = np.concatenate([c, np.zeros(self.m)])
        self.lo = np.concatenate([lb, row_lo])
        self.hi = np.concatenate([ub, row_hi])
        total = self.n + self.m

        # Non-basic structurals start at a finite bound (lower first), free ones at zero.
        self.x = np.zeros(total)
        for j in range(self.n):
            if np.isfinite(self.lo[j]):
                self.x[j] = self.lo[j]
            elif np.isfinite(self.hi[j]):
                self.x[j] = self.hi[j]
        self.basis = list(range(self.n, total))
        self.is_basic = np.zeros(total, dtype=bool)
        self.is_basic[self.n:] = True
        self.iterations = 0

    # --- basis algebra ----------------------------------------------------------------------

    def _factor(self):
        struct = sorted(j for j in self.basis if j < self.n)
        basic_rows = {j - self.n for j in self.basis if j >= self.n}
        free_rows = [i for i in range(self.m) if i not in basic_rows]
        if len(free_rows) != len(struct):
            raise SolverError("basis lost its shape")
        self.b_struct = np.array(struct, dtype=int)
        self.b_rows = np.array(free_rows, dtype=int)
        self.s_rows = np.array(sorted(basic_rows), dtype=int)
        if struct:
            kernel = self.a[np.ix_(self.b_rows, self.b_struct)]
            self.lu = lu_factor(kernel, check_finite=False)
            if np.min(np.abs(np.diag(self.lu[0]))) < 1e-11:
                raise SolverError("singular basis")
        else:
            self.lu = None

    def _solve(self, rhs_rows):
        return lu_solve(self.lu, rhs_rows, check_finite=False) if self.lu is not None else rhs_rows[:0]

    def _solve_t(self, rhs):
        return lu_solve(self.lu, rhs, trans=1, check_finite=False) if self.lu is not None else rhs[:0]

    def _basic_values(self):
        """Recompute every basic variable from the non-basic ones (no drift between iterations)."""
        x = self.x
        nb_struct = ~self.is_basic[:self.n]
        if self.b_struct.size:
            rhs = x[self.n + self.b_rows] - self.a[np.ix_(self.b_rows, np.flatnonzero(nb_struct))] \
                @ x[:self.n][nb_struct]
            x[self.b_struct] = self._solve(rhs)
        x[self.n + self.s_rows] = self.a[self.s_rows] @ x[:self.n]

    def _duals(self, cb):
        """Row duals y with B'y = c_B, where `cb` holds the phase cost of every variable."""
        y = np.zeros(self.m)
        y[self.s_rows] = -cb[self.n + self.s_rows]
        if self.b_struct.size:
            rhs = cb[self.b_struct] - self.a[np.ix_(self.s_rows, self.b_struct)].T @ y[self.s_rows]
            y[self.b_rows] = self._solve_t(rhs)
        return y

    def _column_effect(self, j):
        """alpha = B^-1 a_j, returned as (indices of basic variables, alpha values)."""
        if j < self.n:
            col = self.a[:, j]
        else:
            col = np.zeros(self.m)
            col[j - self.n] = -1.0
        alpha_struct = self._solve(col[self.b_rows])
        alpha_slack = (self.a[np.ix_(self.s_rows, self.b_struct)] @ alpha_struct
                       if self.b_struct.size else np.zeros(self.s_rows.size)) - col[self.s_rows]
        idx = np.concatenate([self.b_struct, self.n + self.s_rows])
        return idx, np.concatenate([alpha_struct, alpha_slack])

    # --- iteration --------------------------------------------------------------------------

    def _pricing(self, cb, bland):
        y = self._duals(cb)
        d = np.empty(self.n + self.m)
        d[:self.n] = cb[:self.n] - self.a.T @ y
        d[self.n:] = cb[self.n:] + y
        tol = self.opts.opt_tol
        x, lo, hi = self.x, self.lo, self.hi
        nb = ~self.is_basic
        fixed = lo == hi
        at_lo = nb & ~fixed & np.isfinite(lo) & (x <= lo)
        at_hi = nb & ~fixed & np.isfinite(hi) & (x >= hi)
        free = nb & ~fixed & ~at_lo & ~at_hi
        score = np.zeros_like(d)
        score[at_lo & (d < -tol)] = -d[at_lo & (d < -tol)]
        score[at_hi & (d > tol)] = d[at_hi & (d > tol)]
        score[free & (np.abs(d) > tol)] = np.abs(d[free & (np.abs(d) > tol)])
        candidates = np.flatnonzero(score > 0)
        if candidates.size == 0:
            return None, 0
        j = int(candidates[0]) if bland else int(candidates[np.argmax(score[candidates])])
        direction = 1 if d[j] < 0 else -1
        return j, direction

    def _ratio(self, j, direction, phase1, bland):
        idx, alpha = self._column_effect(j)
        r = -direction * alpha                # d(x_basic)/dt
        xv, l, u = self.x[idx], self.lo[idx], self.hi[idx]
        ftol = self.opts.feas_tol
        flip = self.hi[j] - self.lo[j]        # bound flip of the entering variable

        active = np.abs(r) > self.opts.pivot_tol
        below = (xv < l - ftol) if phase1 else np.zeros(idx.size, dtype=bool)
        above = (xv > u + ftol) if phase1 else np.zeros(idx.size, dtype=bool)
        inside = ~below & ~above
        limit = np.full(idx.size, INF)
        target = np.zeros(idx.size)
        with np.errstate(divide="ignore", invalid="ignore"):
            # Infeasible basics (phase 1 only) block when they reach the bound they are short of.
            m = active & below & (r > 0)
            limit[m], target[m] = (l[m] - xv[m]) / r[m], l[m]
            m = active & above & (r < 0)
            limit[m], target[m] = (xv[m] - u[m]) / -r[m], u[m]
            m = active & inside & (r < 0) & np.isfinite(l)
            limit[m], target[m] = np.maximum(0.0, (xv[m] - l[m]) / -r[m]), l[m]
            m = active & inside & (r > 0) & np.isfinite(u)
            limit[m], target[m] = np.maximum(0.0, (u[m] - xv[m]) / r[m]), u[m]

        if not np.isfinite(limit).any():
            return flip, -1, 0.0
        step = float(limit.min())
        if flip <= step + 1e-12:
            return flip, -1, 0.0
        ties = np.flatnonzero(limit <= step + 1e-12)
        if bland:
            k = int(ties[np.argmin(idx[ties])])
        else:
            k = int(ties[np.argmax(np.abs(r[ties]))])
        return step, int(idx[k]), float(target[k])

    def _infeasibility(self):
        x = self.x
        return float(np.sum(np.maximum(0.0, self.lo - x)) + np.sum(np.maximum(0.0, x - self.hi)))

    def run(self) -> Status:
        opts = self.opts
        for phase in (1, 2):
            stall, bland = 0, False
            best = INF
            while True:
                if self.iterations >= opts.max_iter:
                    return Status.ITERATION_LIMIT
                self._factor()
                self._basic_values()
                if phase == 1:
                    x = self.x
                    below = self.is_basic & (x < self.lo - opts.feas_tol)
                    above = self.is_basic & (x > self.hi + opts.feas_tol)
                    if not below.any() and not above.any():
                        break
                    cb = np.zeros(self.n + self.m)
                    cb[below], cb[above] = -1.0, 1.0
                    obj = self._infeasibility()
                else:
                    cb = self.cost
                    obj = float(cb @ self.x)

                if obj < best - 1e-12 * (1.0 + abs(best if np.isfinite(best) else 0.0)):
                    best, stall = obj, 0
                    bland = False
                else:
                    stall += 1
                    if stall >= opts.stall_limit and not bland:
                        logger.debug("simplex stalled for %d iterations; switching to Bland", stall)
                        bland = True

                j, direction = self._pricing(cb, bland)
                if j is None:
                    if phase == 1:
                        return Status.INFEASIBLE
                    return Status.OPTIMAL
                step, leave, leave_to = self._ratio(j, direction, phase == 1, bland)
                if not np.isfinite(step):
                    if phase == 1:
                        raise SolverError("unbounded ray in phase 1")
                    return Status.UNBOUNDED
                self.iterations += 1
                self.x[j] += direction * step
                if leave < 0:
                    # Bound flip: the entering variable reached its opposite bound.
                    self.x[j] = self.hi[j] if direction > 0 else self.lo[j]
                    continue
                self.x[leave] = leave_to
                pos = self.basis.index(leave)
                self.basis[pos] = j
                self.is_basic[leave], self.is_basic[j] = False, True
            logger.debug("phase %d done after %d iterations", phase, self.iterations)
        return Status.OPTIMAL


def _lp(c, a_mat, row_lo, row_hi, lb, ub, opts: MipOptions):
    """Solve from arrays; returns (status, x, iterations)."""
    if np.any(lb > ub + opts.feas_tol):
        return Status.INFEASIBLE, None, 0
    simplex = _Simplex(c, a_mat, row_lo, row_hi, lb, ub, opts)
    status = simplex.run()
    x = simplex.x[:simplex.n].copy() if status is Status.OPTIMAL else None
    return status, x, simplex.iterations


def solve_lp(model: MipModel, opts: MipOptions = MipOptions()) -> MipSolution:
    """Optimal basic solution of the LP relaxation (binaries relaxed to [0, 1])."""
    c, a_mat, row_lo, row_hi, lb, ub = model.arrays()
    status, x, iters = _lp(c, a_mat, row_lo, row_hi, lb, ub, opts)
    if status is not Status.OPTIMAL:
        return MipSolution(status, iterations=iters)
    return MipSolution(Status.OPTIMAL, float(c @ x) + model.constant, x, 0, iters, 0.0)


# =============================================================================================
# MILP: best-bound branch and bound
# =============================================================================================

def _most_fractional(x, binaries, tol):
    if binaries.size == 0:
        return None
    frac = np.abs(x[binaries] - np.round(x[binaries]))
    if frac.max() <= tol:
        return None
    # argmax returns the first maximum, i.e. the lowest variable index among ties.
    return int(binaries[int(np.argmax(frac))])


def solve_milp(model: MipModel, opts: MipOptions = MipOptions()) -> MipSolution:
    """Globally optimal solution within the configured absolute/relative gap."""
    c, a_mat, row_lo, row_hi, lb0, ub0 = model.arrays()
    binaries = model.binaries
    total_iters, nodes = 0, 0

    def relax(lb, ub):
        nonlocal total_iters, nodes
        nodes += 1
        status, x, iters = _lp(c, a_mat, row_lo, row_hi, lb, ub, opts)
        total_iters += iters
        if status is Status.ITERATION_LIMIT:
            raise SolverError(f"LP iteration limit ({opts.max_iter}) reached at node {nodes}")
        return status, x

    status, x = relax(lb0, ub0)
    if status is not Status.OPTIMAL:
        return MipSolution(status, nodes=nodes, iterations=total_iters)
    if binaries.size == 0:
        return MipSolution(Status.OPTIMAL, float(c @ x) + model.constant, x, nodes, total_iters, 0.0)

    incumbent, inc_obj = None, INF
    heap, seq = [], 0

    def consider(x, lb, ub):
        nonlocal incumbent, inc_obj, seq
        obj = float(c @ x)
        branch_on = _most_fractional(x, binaries, opts.int_tol)
        if branch_on is None:
            if obj < inc_obj:
                incumbent, inc_obj = x.copy(), obj
                incumbent[binaries] = np.round(incumbent[binaries])
                logger.debug("incumbent %.6f at node %d", obj + model.constant, nodes)
            return
        if obj < inc_obj - _gap_tol(inc_obj, opts):
            heapq.heappush(heap, (obj, seq, branch_on, lb, ub))
            seq += 1

    consider(x, lb0, ub0)
    best_bound = float(c @ x)
    while heap:
        bound, _, j, lb, ub = heapq.heappop(heap)
        best_bound = bound
        if bound >= inc_obj - _gap_tol(inc_obj, opts):
            break
        if nodes >= opts.node_limit:
            gap = inc_obj - bound
            logger.warning("node limit %d reached (gap %.3g)", opts.node_limit, gap)
            values = incumbent if incumbent is not None else None
            obj = inc_obj + model.constant if incumbent is not None else INF
            return MipSolution(Status.ITERATION_LIMIT, obj, values, nodes, total_iters, gap)
        for fix in (0.0, 1.0):
            clb, cub = lb.copy(), ub.copy()
            clb[j] = cub[j] = fix
            status, cx = relax(clb, cub)
            if status is Status.OPTIMAL:
                consider(cx, clb, cub)
            elif status is Status.UNBOUNDED:
                return MipSolution(Status.UNBOUNDED, nodes=nodes, iterations=total_iters)
    else:
        best_bound = inc_obj

    if incumbent is None:
        return MipSolution(Status.INFEASIBLE, nodes=nodes, iterations=total_iters)
    logger.debug("branch and bound: %d nodes, %d LP iterations, objective %.6f",
                 nodes, total_iters, inc_obj + model.constant)
    return MipSolution(Status.OPTIMAL, inc_obj + model.constant, incumbent, nodes, total_iters,
                       max(0.0, inc_obj - best_bound))


def _gap_tol(inc_obj: float, opts: MipOptions) -> float:
    if not np.isfinite(inc_obj):
        return 0.0
    return max(opts.abs_gap, opts.rel_gap * abs(inc_obj))


# =============================================================================================
# Piecewise-linear costs
# =============================================================================================

@dataclass(frozen=True)
class PiecewiseCurve:
    breakpoints: tuple                    # strictly increasing (MW or fraction)
    values: tuple                         # curve value at each breakpoint ($/h)

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        if len(self.breakpoints) != len(self.values) or len(self.breakpoints) < 2:
            raise ValueError("a curve needs at least two breakpoints and one value per breakpoint")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.breakpoints)

    def is_convex(self, tol: float = 1e-9) -> bool:
        s = self.slopes
        return bool(np.all(np.diff(s) >= -tol * (1.0 + np.abs(s[1:]))))

    def __call__(self, p):
        return np.interp(p, self.breakpoints, self.values)


def linearize(cost: CostCurve, p_lo: float, p_hi: float, segments: int = 8) -> PiecewiseCurve:
    """
    Chord interpolation of a convex quadratic on `segments` uniform pieces over [p_lo, p_hi].

    Exact at the breakpoints; the worst over-approximation inside a piece of width D is c2*D^2/4,
    reached at the piece midpoint.
    """
    if cost.c2 < 0:
        raise ValueError(f"cost curve must be convex (c2 >= 0), got c2 = {cost.c2}")
    if not p_lo < p_hi:
        raise ValueError(f"need p_lo < p_hi, got [{p_lo}, {p_hi}]")
    if segments < 1:
        raise ValueError("segments must be >= 1")
    if cost.c2 == 0:
        segments = 1
    bp = np.linspace(p_lo, p_hi, segments + 1)
    return PiecewiseCurve(tuple(float(b) for b in bp), tuple(float(cost(b)) for b in bp))


def add_piecewise_objective(model: MipModel, var: int, curve: PiecewiseCurve,
                            name: str = "") -> int:
    """
    Add an epigraph variable t >= chord_i(var) for every segment and put +t in the objective.
    Returns the index of t. The model is modified in place.
    """
    if not curve.is_convex():
        raise ValueError("piecewise objective requires a convex curve")
    label = name or f"epi[{model.variables[var].name}]"
    t = model.add_var(label, lower=float(min(curve.values)), upper=INF)
    bp, vals, slopes = curve.breakpoints, curve.values, curve.slopes
    for i, s in enumerate(slopes):
        # t - s * var >= v_i - s * bp_i
        model.add_constraint({t: 1.0, var: -float(s)} if s != 0 else {t: 1.0}, Sense.GE,
                             float(vals[i] - s * bp[i]), name=f"{label}.seg{i}")
    model.add_objective(t, 1.0)
    return t
