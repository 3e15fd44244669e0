"""
jcc: joint chance-constrained DC optimal power flow with learned surrogate constraints.

Modules:
    netcase    Case-file reader/writer, network model, structural validation.
    ptdf       DC power transfer distribution factors and line flows.
    scenarios  Load/wind uncertainty, seeded scenario sets, the aggregate imbalance Omega.
    mip        Model container, revised simplex, best-bound branch and bound, piecewise costs.
    opf        Deterministic, SAA Big-M and surrogate OPF models; ex-post validation.
    learn      SMO linear SVM with a free bias, bagging, ensemble prediction, metrics.
    pipeline   Dataset generation, rebalancing, splitting, cost comparison, sweeps, output files.
    cases      Bundled case and experiment-config lookup (data/).
    cli        Command-line front end (`python -m jcc`).

Every solve is a pure function of its inputs and seed: no global RNG state, no solver processes
shared between runs. See README.md for the modelling assumptions and their limits.
"""

__version__ = "0.1.0"

from .netcase import Network, parse_case, read_case, validate
from .ptdf import build_ptdf, flows
from .scenarios import UncertaintySpec, sample
from .opf import SaaConfig, solve_saa, solve_surrogate, expost_validate
from .learn import LabeledSet, train_svm, train_bagging, ensemble_predict

__all__ = [
    "Network",
    "parse_case",
    "read_case",
    "validate",
    "build_ptdf",
    "flows",
    "UncertaintySpec",
    "sample",
    "SaaConfig",
    "solve_saa",
    "solve_surrogate",
    "expost_validate",
    "LabeledSet",
    "train_svm",
    "train_bagging",
    "ensemble_predict",
]
