"""
Uncertainty model: load and wind forecast errors, seeded scenario sampling, and the aggregate
imbalance Omega that the affine AGC policy has to absorb.

Sampling model (one scenario s):
    d_s = pd_mean + sigma_d * xi_d          xi_d ~ N(0, I) over all buses
    w_s = max(0, mu_w + sigma_w * xi_w)     xi_w ~ N(0, I) over the wind buses, zero elsewhere

Omega composition (`omega_composition`):
    'net'        Omega = sum(d_s - pd_mean) - sum(w_s - mu_w)   total imbalance the AGC must cover
    'load_only'  Omega = sum(d_s - pd_mean)                      demand errors only; the wind
                                                                 deviation is left to the slack
With 'net' and sum(beta) = 1 the redispatch p_g + beta_g * Omega balances every scenario exactly.
Truncating wind at zero shifts its mean slightly upward; the shift is accepted and Var(Omega)
ignores it.

Randomness: every draw comes from a Philox-4x64 counter-based generator keyed by
SeedSequence(seed, spawn_key=stream). A stream is a tuple of small integers that starts with a
Stream purpose code, e.g. (Stream.SAA, run id) or (Stream.BAGGING, plane), so every purpose and
index owns an independent substream and results depend neither on draw order elsewhere nor on
the platform.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import IntEnum

import numpy as np
import pandas as pd

from .netcase import Network

logger = logging.getLogger(__name__)

COMPOSITIONS = ("net", "load_only")


class Stream(IntEnum):
    """Purpose codes for substreams; always the first element of a stream tuple."""

    SAA = 1                               # in-sample scenarios of a run
    VALIDATION = 2                        # ex-post Monte Carlo set of a run
    WIND = 3                              # wind-statistics perturbation of a run
    REBALANCE = 4
    SPLIT = 5
    BAGGING = 6


def substream(seed: int, *stream: int) -> np.random.Generator:
    """Independent Philox generator for (seed, stream)."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class UncertaintySpec:
    sigma_d: tuple                        # per-bus load std (MW), network bus order
    wind_buses: tuple = ()                # bus ids hosting wind
    mu_w: tuple = ()                      # per-wind-bus mean (MW)
    sigma_w: tuple = ()                   # per-wind-bus std (MW)
    seed: int = 0
    omega_composition: str = "net"

    def __post_init__(self):
        if len(self.wind_buses) != len(self.mu_w) or len(self.wind_buses) != len(self.sigma_w):
            raise ValueError("wind_buses, mu_w and sigma_w must have equal lengths")
        if any(s < 0 for s in self.sigma_d) or any(s < 0 for s in self.sigma_w):
            raise ValueError("standard deviations must be >= 0")
        if any(m < 0 for m in self.mu_w):
            raise ValueError("wind means must be >= 0")
        if len(set(self.wind_buses)) != len(self.wind_buses):
            raise ValueError("wind buses must be distinct")
        if self.omega_composition not in COMPOSITIONS:
            raise ValueError(f"omega_composition must be one of {COMPOSITIONS}")


def default_spec(net: Network, wind_buses=(), mu_w=(), sigma_w=(), sigma_d_frac: float = 0.03,
                 seed: int = 0, omega_composition: str = "net") -> UncertaintySpec:
    """Spec with sigma_d = sigma_d_frac * |pd_mean| on every bus; checks wind buses exist."""
    known = set(net.bus_ids)
    missing = [b for b in wind_buses if b not in known]
    if missing:
        raise ValueError(f"wind buses {missing} are not in the network")
    return UncertaintySpec(sigma_d=tuple(float(sigma_d_frac * abs(b.pd_mean)) for b in net.buses),
                           wind_buses=tuple(int(b) for b in wind_buses),
                           mu_w=tuple(float(m) for m in mu_w),
                           sigma_w=tuple(float(s) for s in sigma_w),
                           seed=int(seed), omega_composition=omega_composition)


@dataclass(frozen=True)
class Scenario:
    d: np.ndarray                         # per-bus demand (MW)
    w: np.ndarray                         # per-bus wind (MW), zero off wind buses
    omega: float                          # aggregate imbalance (MW)


@dataclass(frozen=True)
class ScenarioSet:
    """N scenarios stored as arrays: d and w are (N, n_bus), omega is (N,)."""

    d: np.ndarray
    w: np.ndarray
    omega: np.ndarray
    spec: UncertaintySpec
    var_omega: float
    pd_mean: np.ndarray
    mu_bus: np.ndarray                    # per-bus mean wind (zero off wind buses)
    stream: tuple = ()

    def __len__(self) -> int:
        return int(self.omega.shape[0])

    def __getitem__(self, s: int) -> Scenario:
        return Scenario(d=self.d[s], w=self.w[s], omega=float(self.omega[s]))

    def __iter__(self):
        return (self[s] for s in range(len(self)))

    @property
    def scenarios(self) -> list:
        return list(self)

    def recompute_omega(self) -> np.ndarray:
        return composition(self.d, self.w, self.pd_mean, self.mu_bus, self.spec.omega_composition)


def composition(d, w, pd_mean, mu_bus, mode: str) -> np.ndarray:
    load_dev = (np.asarray(d) - pd_mean).sum(axis=-1)
    if mode == "load_only":
        return load_dev
    return load_dev - (np.asarray(w) - mu_bus).sum(axis=-1)


def wind_mean_vector(spec: UncertaintySpec, net: Network) -> np.ndarray:
    pos = net.bus_position
    mu = np.zeros(net.n_bus)
    for b, m in zip(spec.wind_buses, spec.mu_w):
        mu[pos[b]] += m
    return mu


def sample(spec: UncertaintySpec, net: Network, n: int, stream=()) -> ScenarioSet:
    """Draw n scenarios; identical (spec, n, stream) always give bitwise-identical sets."""
    if n < 1:
        raise ValueError(f"need at least one scenario, got n={n}")
    if len(spec.sigma_d) != net.n_bus:
        raise ValueError(f"sigma_d has {len(spec.sigma_d)} entries for {net.n_bus} buses")
    if isinstance(stream, (int, np.integer)):
        stream = (stream,)
    stream = tuple(int(s) for s in stream)
    rng = substream(spec.seed, *stream)
    pd_mean = net.demand
    sigma_d = np.asarray(spec.sigma_d, dtype=float)

    d = pd_mean + sigma_d * rng.standard_normal((n, net.n_bus))
    w = np.zeros((n, net.n_bus))
    if spec.wind_buses:
        pos = net.bus_position
        cols = np.array([pos[b] for b in spec.wind_buses], dtype=int)
        xi_w = rng.standard_normal((n, cols.size))
        draws = np.maximum(0.0, np.asarray(spec.mu_w) + np.asarray(spec.sigma_w) * xi_w)
        w[:, cols] = draws
    mu_bus = wind_mean_vector(spec, net)
    omega = composition(d, w, pd_mean, mu_bus, spec.omega_composition)
    return ScenarioSet(d=d, w=w, omega=omega, spec=spec, var_omega=var_omega(spec),
                       pd_mean=pd_mean, mu_bus=mu_bus, stream=stream)


def perturb_wind_stats(spec: UncertaintySpec, rng: np.random.Generator,
                       mu_range=(0.8, 1.2), sigma_range=(0.8, 1.2)) -> UncertaintySpec:
    """Copy of `spec` with every mu_w and sigma_w scaled by an independent uniform factor."""
    k = len(spec.wind_buses)
    f_mu = rng.uniform(mu_range[0], mu_range[1], size=k)
    f_sigma = rng.uniform(sigma_range[0], sigma_range[1], size=k)
    mu = np.maximum(0.0, np.asarray(spec.mu_w, dtype=float) * f_mu)
    sigma = np.maximum(0.0, np.asarray(spec.sigma_w, dtype=float) * f_sigma)
    return replace(spec, mu_w=tuple(float(m) for m in mu), sigma_w=tuple(float(s) for s in sigma))


def var_omega(spec: UncertaintySpec) -> float:
    """Var(Omega): independent sources add; wind counts only under the 'net' composition."""
    v = float(np.sum(np.square(spec.sigma_d)))
    if spec.omega_composition == "net":
        v += float(np.sum(np.square(spec.sigma_w)))
    return v


# ---------------------------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------------------------

def to_frame(scen: ScenarioSet, net: Network) -> pd.DataFrame:
    """One row per scenario: s, omega, d_<bus>..., w_<wind bus>..."""
    cols = {"s": np.arange(len(scen)), "omega": scen.omega}
    for j, b in enumerate(net.bus_ids):
        cols[f"d_{b}"] = scen.d[:, j]
    pos = net.bus_position
    for b in scen.spec.wind_buses:
        cols[f"w_{b}"] = scen.w[:, pos[b]]
    return pd.DataFrame(cols)


def spec_to_json(spec: UncertaintySpec) -> dict:
    return {"sigma_d": list(spec.sigma_d), "wind_buses": list(spec.wind_buses),
            "mu_w": list(spec.mu_w), "sigma_w": list(spec.sigma_w), "seed": spec.seed,
            "omega_composition": spec.omega_composition}


def spec_from_json(obj: dict) -> UncertaintySpec:
    return UncertaintySpec(sigma_d=tuple(obj["sigma_d"]), wind_buses=tuple(obj["wind_buses"]),
                           mu_w=tuple(obj["mu_w"]), sigma_w=tuple(obj["sigma_w"]),
                           seed=int(obj["seed"]), omega_composition=obj["omega_composition"])


def to_json(scen: ScenarioSet, net: Network) -> dict:
    return {"spec": spec_to_json(scen.spec), "stream": list(scen.stream),
            "var_omega": scen.var_omega, "bus_ids": list(net.bus_ids),
            "omega": scen.omega.tolist(), "d": scen.d.tolist(), "w": scen.w.tolist()}
