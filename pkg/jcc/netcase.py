"""
Power-system case data: the network model, the case-file reader/writer, and structural validation.

Cases use the matrix-block text format shared by most public test systems
(`mpc.baseMVA`, `mpc.bus`, `mpc.gen`, `mpc.branch`, `mpc.gencost`). Only what the DC model needs is
kept:

    bus      id, type (1 PQ / 2 PV / 3 REF), Pd                     -> Bus
    gen      bus, status, Pmax, Pmin                                -> Generator (in-service rows only)
    branch   fbus, tbus, x, rateA, status                           -> Branch
    gencost  polynomial rows of degree <= 2                         -> CostCurve

Voltages, shunts, reactive limits, taps and phase shifts are read past and dropped. Case values
are already MW; reactances stay per-unit on `base_mva` (the PTDF is dimensionless, so the base
cancels). A `rateA` of 0 means "unrated" and is stored as an infinite flow limit.

The network is frozen after construction and safe to share across solver processes.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

logger = logging.getLogger(__name__)


class BusKind(str, Enum):
    PQ = "PQ"
    PV = "PV"
    REF = "REF"


_KIND_CODES = {1: BusKind.PQ, 2: BusKind.PV, 3: BusKind.REF}
_CODE_OF_KIND = {v: k for k, v in _KIND_CODES.items()}


class CaseFormatError(ValueError):
    """Malformed or structurally invalid case text. `line` is 1-based, or None for whole-case errors."""

    def __init__(self, message: str, line: Optional[int] = None, code: str = "Syntax"):
        self.line = line
        self.code = code
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class CostCurve:
    """Quadratic generation cost c2*p^2 + c1*p + c0 ($/h, p in MW)."""

    c2: float = 0.0
    c1: float = 0.0
    c0: float = 0.0

    def __call__(self, p):
        return self.c2 * p * p + self.c1 * p + self.c0


@dataclass(frozen=True)
class Bus:
    id: int
    kind: BusKind
    pd_mean: float                        # nominal demand (MW)


@dataclass(frozen=True)
class Branch:
    from_bus: int
    to_bus: int
    reactance_pu: float
    flow_limit: float                     # MW; math.inf when the case leaves the line unrated
    status: bool = True


@dataclass(frozen=True)
class Generator:
    bus: int
    p_min: float
    p_max: float
    cost: CostCurve = field(default_factory=CostCurve)


@dataclass(frozen=True)
class Violation:
    code: str                             # machine-readable, e.g. "DuplicateRef", "GenBounds"
    subject: Optional[int] = None         # offending bus id / branch or generator index
    message: str = ""


@dataclass(frozen=True)
class Network:
    base_mva: float
    buses: tuple                          # tuple[Bus, ...] in case order
    branches: tuple                       # tuple[Branch, ...]
    generators: tuple                     # tuple[Generator, ...]
    ref_bus: int
    name: str = ""

    @property
    def n_bus(self) -> int:
        return len(self.buses)

    @property
    def bus_ids(self) -> tuple:
        return tuple(b.id for b in self.buses)

    @property
    def bus_position(self) -> dict:
        """bus id -> column position used by every per-bus vector in the package."""
        return {b.id: i for i, b in enumerate(self.buses)}

    @property
    def live_branches(self) -> tuple:
        """Positions (into `branches`) of the in-service branches."""
        return tuple(i for i, br in enumerate(self.branches) if br.status)

    @property
    def demand(self) -> np.ndarray:
        return np.array([b.pd_mean for b in self.buses], dtype=float)

    @property
    def p_min(self) -> np.ndarray:
        return np.array([g.p_min for g in self.generators], dtype=float)

    @property
    def p_max(self) -> np.ndarray:
        return np.array([g.p_max for g in self.generators], dtype=float)

    def generator_incidence(self) -> np.ndarray:
        """(n_gen, n_bus) 0/1 matrix mapping generator output to bus injection."""
        pos = self.bus_position
        cg = np.zeros((len(self.generators), self.n_bus))
        for g, gen in enumerate(self.generators):
            cg[g, pos[gen.bus]] = 1.0
        return cg

    def generator_labels(self) -> tuple:
        """Stable feature names, one per generator: 'g<k>@<bus>' with k 1-based in case order."""
        return tuple(f"g{k + 1}@{g.bus}" for k, g in enumerate(self.generators))


# ---------------------------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------------------------

def validate(net: Network) -> list:
    """Every structural breach in `net` as a list of Violation (empty list = valid). Never raises."""
    out = []
    if not (net.base_mva > 0):
        out.append(Violation("BadBaseMva", None, f"base_mva must be > 0, got {net.base_mva}"))

    seen = set()
    for b in net.buses:
        if b.id in seen:
            out.append(Violation("DuplicateBus", b.id, f"bus id {b.id} appears more than once"))
        seen.add(b.id)
        if b.id <= 0:
            out.append(Violation("BadBusId", b.id, f"bus id {b.id} must be a positive integer"))

    refs = [b.id for b in net.buses if b.kind is BusKind.REF]
    if not refs:
        out.append(Violation("MissingRef", None, "no REF bus"))
    elif len(refs) > 1:
        out.append(Violation("DuplicateRef", refs[1], f"more than one REF bus: {refs}"))
    elif net.ref_bus != refs[0]:
        out.append(Violation("RefMismatch", net.ref_bus,
                             f"ref_bus {net.ref_bus} is not the REF bus {refs[0]}"))

    for i, br in enumerate(net.branches):
        if br.from_bus not in seen or br.to_bus not in seen:
            out.append(Violation("DanglingBranch", i,
                                 f"branch {i} ({br.from_bus}->{br.to_bus}) references a missing bus"))
        if br.from_bus == br.to_bus:
            out.append(Violation("SelfLoop", i, f"branch {i} connects bus {br.from_bus} to itself"))
        if br.status and not (br.reactance_pu > 0):
            out.append(Violation("BadReactance", i,
                                 f"in-service branch {i} needs reactance > 0, got {br.reactance_pu}"))
        if not (br.flow_limit > 0):
            out.append(Violation("BadFlowLimit", i, f"branch {i} flow limit must be > 0"))

    for g, gen in enumerate(net.generators):
        if gen.bus not in seen:
            out.append(Violation("DanglingGen", g, f"generator {g} sits on missing bus {gen.bus}"))
        if not (0 <= gen.p_min <= gen.p_max):
            out.append(Violation("GenBounds", g,
                                 f"generator {g} needs 0 <= p_min <= p_max, "
                                 f"got [{gen.p_min}, {gen.p_max}]"))
        if gen.cost.c2 < 0:
            out.append(Violation("NonConvexCost", g, f"generator {g} has c2 = {gen.cost.c2} < 0"))

    if not any(v.code in ("DanglingBranch", "DuplicateBus") for v in out):
        if not _connected(net):
            out.append(Violation("Disconnected", None, "disconnected graph over in-service branches"))
    return out


def _connected(net: Network) -> bool:
    live = net.live_branches
    if not live:
        return False
    pos = net.bus_position
    rows = [pos[net.branches[i].from_bus] for i in live]
    cols = [pos[net.branches[i].to_bus] for i in live]
    graph = coo_matrix((np.ones(len(live)), (rows, cols)), shape=(net.n_bus, net.n_bus))
    n_comp, _ = connected_components(graph, directed=False)
    return n_comp == 1


# ---------------------------------------------------------------------------------------------
# Reader
# ---------------------------------------------------------------------------------------------

_BLOCK_START = re.compile(r"^\s*mpc\.(\w+)\s*=\s*\[(.*)$")
_SCALAR = re.compile(r"^\s*mpc\.(\w+)\s*=\s*([^;\[]+);")
_BLOCKS = ("bus", "gen", "branch", "gencost")


def _strip_comment(line: str) -> str:
    cut = line.find("%")
    return line if cut < 0 else line[:cut]


def _read_blocks(text: str):
    """Split case text into {block: [(line_no, [floats]), ...]} plus the scalar assignments."""
    blocks, scalars = {}, {}
    current, rows = None, None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if current is None:
            m = _BLOCK_START.match(line)
            if m:
                current, rows = m.group(1), []
                line = m.group(2)
            else:
                s = _SCALAR.match(line)
                if s:
                    scalars[s.group(1)] = (no, s.group(2).strip())
                continue
        closed = "]" in line
        body = line.split("]", 1)[0] if closed else line
        for chunk in body.split(";"):
            tokens = chunk.replace(",", " ").split()
            if not tokens:
                continue
            try:
                rows.append((no, [float(t) for t in tokens]))
            except ValueError:
                raise CaseFormatError(f"non-numeric entry in mpc.{current}: {chunk.strip()!r}", no)
        if closed:
            if current in blocks:
                raise CaseFormatError(f"mpc.{current} defined twice", no)
            blocks[current] = rows
            current, rows = None, None
    if current is not None:
        raise CaseFormatError(f"mpc.{current} block is never closed with ']'", None)
    return blocks, scalars


def _need(row, n, block, no):
    if len(row) < n:
        raise CaseFormatError(f"mpc.{block} row has {len(row)} columns, expected at least {n}", no)


def parse_case(text: str, name: str = "") -> Network:
    """
    Parse matrix-block case text into a validated Network.

    Raises CaseFormatError for syntax problems (with the 1-based line) and for the first structural
    violation found by `validate` (missing REF bus, dangling branch endpoint, disconnected graph, ...).
    """
    blocks, scalars = _read_blocks(text)
    for blk in ("bus", "gen", "branch"):
        if blk not in blocks:
            raise CaseFormatError(f"missing mpc.{blk} block")

    base_mva = 100.0
    if "baseMVA" in scalars:
        no, val = scalars["baseMVA"]
        try:
            base_mva = float(val)
        except ValueError:
            raise CaseFormatError(f"baseMVA is not a number: {val!r}", no)

    buses = []
    for no, row in blocks["bus"]:
        _need(row, 3, "bus", no)
        code = int(row[1])
        if code not in _KIND_CODES:
            raise CaseFormatError(f"unsupported bus type {code} (isolated buses are not modelled)", no)
        buses.append(Bus(id=int(row[0]), kind=_KIND_CODES[code], pd_mean=row[2]))

    gens, gen_lines = [], []
    for no, row in blocks["gen"]:
        _need(row, 10, "gen", no)
        gen_lines.append((no, row[7] > 0))
        if row[7] > 0:
            gens.append((int(row[0]), row[9], row[8]))

    costs = []
    if "gencost" in blocks:
        cost_rows = blocks["gencost"]
        if len(cost_rows) < len(gen_lines):
            raise CaseFormatError(f"mpc.gencost has {len(cost_rows)} rows for {len(gen_lines)} "
                                  f"generators", cost_rows[-1][0] if cost_rows else None)
        for (no, row), (_, on) in zip(cost_rows, gen_lines):
            if on:
                costs.append(_parse_cost(row, no))
    else:
        costs = [CostCurve() for _ in gens]

    generators = tuple(Generator(bus=b, p_min=lo, p_max=hi, cost=c)
                       for (b, lo, hi), c in zip(gens, costs))

    branches = []
    for no, row in blocks["branch"]:
        _need(row, 11, "branch", no)
        rate = row[5]
        branches.append(Branch(from_bus=int(row[0]), to_bus=int(row[1]), reactance_pu=row[3],
                               flow_limit=rate if rate > 0 else math.inf, status=row[10] > 0))

    refs = [b.id for b in buses if b.kind is BusKind.REF]
    net = Network(base_mva=base_mva, buses=tuple(buses), branches=tuple(branches),
                  generators=generators, ref_bus=refs[0] if refs else 0, name=name)

    problems = validate(net)
    if problems:
        first = problems[0]
        raise CaseFormatError(first.message, None, first.code)
    logger.debug("parsed case %r: %d buses, %d branches, %d generators",
                 name, net.n_bus, len(net.branches), len(net.generators))
    return net


def _parse_cost(row, no) -> CostCurve:
    _need(row, 4, "gencost", no)
    model, ncoef = int(row[0]), int(row[3])
    if model != 2:
        raise CaseFormatError(f"only polynomial cost rows (model 2) are supported, got model {model}", no)
    coefs = row[4:4 + ncoef]
    if len(coefs) != ncoef:
        raise CaseFormatError(f"gencost row declares {ncoef} coefficients, found {len(coefs)}", no)
    if ncoef == 3:
        return CostCurve(c2=coefs[0], c1=coefs[1], c0=coefs[2])
    if ncoef == 2:
        return CostCurve(c2=0.0, c1=coefs[0], c0=coefs[1])
    if ncoef == 1:
        return CostCurve(c0=coefs[0])
    raise CaseFormatError(f"cost polynomial of degree {ncoef - 1} is not supported (max 2)", no)


def read_case(path) -> Network:
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    stem = str(path).replace("\\", "/").rsplit("/", 1)[-1].rsplit(".", 1)[0]
    return parse_case(text, name=stem)


# ---------------------------------------------------------------------------------------------
# Writers
# ---------------------------------------------------------------------------------------------

def render(net: Network) -> str:
    """Write `net` back to case text. parse_case(render(net)) == net for every valid network."""
    fmt = repr
    out = [f"function mpc = {net.name or 'case'}", "mpc.version = '2';",
           f"mpc.baseMVA = {fmt(float(net.base_mva))};", "",
           "%% bus_i type Pd Qd Gs Bs area Vm Va baseKV zone Vmax Vmin", "mpc.bus = ["]
    for b in net.buses:
        out.append(f"\t{b.id}\t{_CODE_OF_KIND[b.kind]}\t{fmt(float(b.pd_mean))}"
                   f"\t0\t0\t0\t1\t1\t0\t0\t1\t1.1\t0.9;")
    out += ["];", "", "%% bus Pg Qg Qmax Qmin Vg mBase status Pmax Pmin", "mpc.gen = ["]
    for g in net.generators:
        out.append(f"\t{g.bus}\t0\t0\t0\t0\t1\t{fmt(float(net.base_mva))}\t1"
                   f"\t{fmt(float(g.p_max))}\t{fmt(float(g.p_min))};")
    out += ["];", "", "%% fbus tbus r x b rateA rateB rateC ratio angle status angmin angmax",
            "mpc.branch = ["]
    for br in net.branches:
        rate = 0.0 if math.isinf(br.flow_limit) else float(br.flow_limit)
        out.append(f"\t{br.from_bus}\t{br.to_bus}\t0\t{fmt(float(br.reactance_pu))}\t0"
                   f"\t{fmt(rate)}\t0\t0\t0\t0\t{1 if br.status else 0}\t-360\t360;")
    out += ["];", "", "%% 2 startup shutdown n c2 c1 c0", "mpc.gencost = ["]
    for g in net.generators:
        c = g.cost
        out.append(f"\t2\t0\t0\t3\t{fmt(float(c.c2))}\t{fmt(float(c.c1))}\t{fmt(float(c.c0))};")
    out += ["];", ""]
    return "\n".join(out)


def to_json(net: Network) -> dict:
    """Canonical JSON-ready dump (unrated limits become null)."""
    return {
        "name": net.name,
        "base_mva": net.base_mva,
        "ref_bus": net.ref_bus,
        "buses": [{"id": b.id, "kind": b.kind.value, "pd_mean": b.pd_mean} for b in net.buses],
        "branches": [{"from_bus": br.from_bus, "to_bus": br.to_bus,
                      "reactance_pu": br.reactance_pu,
                      "flow_limit": None if math.isinf(br.flow_limit) else br.flow_limit,
                      "status": br.status} for br in net.branches],
        "generators": [{"bus": g.bus, "p_min": g.p_min, "p_max": g.p_max,
                        "cost": {"c2": g.cost.c2, "c1": g.cost.c1, "c0": g.cost.c0}}
                       for g in net.generators],
    }


def with_ref(net: Network, bus_id: int) -> Network:
    """Copy of `net` with the REF designation moved to `bus_id` (the old REF bus becomes PV)."""
    if bus_id not in net.bus_position:
        raise ValueError(f"bus {bus_id} is not in the network")
    buses = []
    for b in net.buses:
        if b.id == bus_id:
            buses.append(Bus(b.id, BusKind.REF, b.pd_mean))
        elif b.kind is BusKind.REF:
            buses.append(Bus(b.id, BusKind.PV, b.pd_mean))
        else:
            buses.append(b)
    return Network(net.base_mva, tuple(buses), net.branches, net.generators, bus_id, net.name)
