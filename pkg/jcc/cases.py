"""
Accessors for the bundled data directory (data/cases/*.m, data/experiments/*.toml).

Keeps the files as the single source of truth and gives the CLI and tests a small surface to resolve
either a filesystem path or a bundled name, so no case or experiment is ever hard-coded in code.
"""

from __future__ import annotations

import os

from .netcase import Network, read_case

_DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data")
_CASE_DIR = os.path.join(_DATA_DIR, "cases")
_EXPERIMENT_DIR = os.path.join(_DATA_DIR, "experiments")


def _resolve(name: str, folder: str, suffixes: tuple) -> str:
    if os.path.isfile(name):
        return name
    for suffix in ("",) + suffixes:
        candidate = os.path.join(folder, name + suffix)
        if os.path.isfile(candidate):
            return candidate
    raise FileNotFoundError(f"no such file or bundled entry: {name!r} (looked in {folder})")


def case_path(name: str) -> str:
    """Path to a case file: `name` itself if it exists, else data/cases/<name>.m."""
    return _resolve(name, _CASE_DIR, (".m",))


def load_case(name: str) -> Network:
    return read_case(case_path(name))


def bundled_cases() -> list:
    """Names of the bundled case files (without extension), sorted."""
    return sorted(f[:-2] for f in os.listdir(_CASE_DIR) if f.endswith(".m"))


def experiment_path(name: str) -> str:
    """Path to an experiment config: `name` itself if it exists, else data/experiments/<name>.toml."""
    return _resolve(name, _EXPERIMENT_DIR, (".toml", ".json"))
