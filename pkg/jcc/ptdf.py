"""
DC linearization: the power transfer distribution factor (PTDF) matrix and line flows.

Under the DC assumptions (flat voltage magnitudes, small angle differences, lossless branches) the
flow on branch l is b_l * (theta_from - theta_to) with b_l = 1 / x_l, and angles solve B * theta = P.
Fixing the reference angle to zero and eliminating it from B leaves a nonsingular reduced matrix on
a connected network, so

    PTDF = diag(b) * A * [0 ; B_red^-1]

where A is the branch-bus incidence matrix. Entry [l, n] is the flow induced on branch l by 1 MW
injected at bus n and withdrawn at the slack. The reference-angle condition never appears as a
constraint downstream: it is absorbed here, which is why the slack column is identically zero.

Injections need not balance; whatever does not balance is implicitly taken (or supplied) at the
slack. Rows cover in-service branches only; `branches` maps each row back to its position in
`Network.branches`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.linalg import lu_factor, lu_solve

from .netcase import Network

logger = logging.getLogger(__name__)

_PIVOT_EPS = 1e-12


class PtdfError(ValueError):
    """The reduced susceptance matrix is singular (disconnected or zero-reactance network)."""


@dataclass(frozen=True)
class PtdfMatrix:
    entries: np.ndarray                   # (n_rows, n_bus), rows = in-service branches
    slack: int                            # slack bus id
    branches: tuple                       # row -> position in Network.branches
    bus_ids: tuple                        # column -> bus id
    limits: np.ndarray                    # (n_rows,) flow limits in MW (inf when unrated)

    @property
    def shape(self):
        return self.entries.shape

    def row_of(self, branch_position: int) -> int:
        return self.branches.index(branch_position)


def build_ptdf(net: Network) -> PtdfMatrix:
    """Dense PTDF for the in-service topology of `net`, referenced to `net.ref_bus`."""
    pos = net.bus_position
    live = net.live_branches
    n_bus, n_br = net.n_bus, len(live)
    if net.ref_bus not in pos:
        raise PtdfError(f"reference bus {net.ref_bus} is not in the network")

    incidence = np.zeros((n_br, n_bus))
    b = np.empty(n_br)
    for row, i in enumerate(live):
        br = net.branches[i]
        if not (br.reactance_pu > 0):
            raise PtdfError(f"branch {i} ({br.from_bus}->{br.to_bus}) has non-positive reactance")
        incidence[row, pos[br.from_bus]] = 1.0
        incidence[row, pos[br.to_bus]] = -1.0
        b[row] = 1.0 / br.reactance_pu

    bbus = incidence.T @ (b[:, None] * incidence)
    keep = np.array([i for i in range(n_bus) if i != pos[net.ref_bus]], dtype=int)
    entries = np.zeros((n_br, n_bus))
    if keep.size:
        b_red = bbus[np.ix_(keep, keep)]
        lu, piv = lu_factor(b_red, check_finite=True)
        if np.min(np.abs(np.diag(lu))) < _PIVOT_EPS * max(1.0, np.max(np.abs(b_red))):
            raise PtdfError("singular reduced susceptance matrix (disconnected network?)")
        # Columns of B_red^-1, pushed through the branch flow map.
        x_red = lu_solve((lu, piv), np.eye(keep.size))
        entries[:, keep] = (b[:, None] * incidence[:, keep]) @ x_red

    limits = np.array([net.branches[i].flow_limit for i in live], dtype=float)
    logger.debug("PTDF built: %d branches x %d buses, slack %d", n_br, n_bus, net.ref_bus)
    return PtdfMatrix(entries=entries, slack=net.ref_bus, branches=tuple(live),
                      bus_ids=net.bus_ids, limits=limits)


def flows(ptdf: PtdfMatrix, inj) -> np.ndarray:
    """
    Branch flows (MW) for a per-bus injection vector, or a (k, n_bus) batch of them.

    flow[l] = sum_n entries[l, n] * inj[n]
    """
    x = np.asarray(inj, dtype=float)
    n_bus = ptdf.entries.shape[1]
    if x.shape[-1] != n_bus or x.ndim not in (1, 2):
        raise ValueError(f"injection has shape {x.shape}, expected ({n_bus},) or (k, {n_bus})")
    return x @ ptdf.entries.T


def to_frame(ptdf: PtdfMatrix, net: Network = None) -> pd.DataFrame:
    """The matrix as a labelled DataFrame (rows 'from-to', columns bus ids) for CSV export."""
    if net is not None:
        index = [f"{net.branches[i].from_bus}-{net.branches[i].to_bus}" for i in ptdf.branches]
    else:
        index = [str(i) for i in ptdf.branches]
    return pd.DataFrame(ptdf.entries, index=pd.Index(index, name="branch"),
                        columns=[str(b) for b in ptdf.bus_ids])
