"""Strict flat experiment configuration.

Sections [orders], [nonlinearity], [grid], [solver], [checks], [output] of
key = value pairs.  Unknown sections or keys are rejected: a misspelled
physics parameter must fail loudly, not silently default.  The only
repeatable key is `term` in [nonlinearity].
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

import numpy as np

from .grid import GridError, HalfSpaceGrid, build_grid
from .nonlinearity import NonlinearityError, NonlinearitySpec
from .orders import FractionalOrders, InvalidOrderError, make_orders

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "CHECK_NAMES"]


class ConfigError(ValueError):
    """Schema violation: names the offending section/key."""


CHECK_NAMES = (
    "solve", "hamiltonian", "radial-hamiltonian", "monotonicity",
    "energy-scan", "pohozaev", "stability", "spectrum", "sigma", "growth",
    "decay", "symmetry", "structure", "balance", "dichotomy",
    "cross-validate",
)

# parameter keys allowed in [checks] besides the check names themselves
CHECK_PARAM_KEYS = ("pohozaev_r", "scan_r_min", "scan_r_max", "scan_r_count",
                    "growth_f")

DATA_MODELS = ("layer", "constant", "zero", "radial-decay", "rotated-layer")
INIT_MODELS = ("data", "flat", "petviashvili")

_GRID_KEYS = {"boundary_dim": int, "l": float, "nx": int, "y": float,
              "ny": int, "gamma": float, "radial": bool, "ambient_n": int}
_SOLVER_KEYS = {"newton_tol": float, "newton_max": int, "krylov_tol": float,
                "krylov_max": int, "damping": bool, "data": str,
                "alpha": "floats", "beta": "floats", "top": str,
                "init": str, "angle": float}
_OUTPUT_KEYS = {"save_fields": bool}

_SOLVER_DEFAULTS = {"newton_tol": 1e-10, "newton_max": 60,
                    "krylov_tol": 1e-10, "krylov_max": 10000,
                    "damping": True, "data": "layer", "top": "neumann",
                    "init": "data", "angle": 0.0}


class _MultiDict(dict):
    """configparser dict that concatenates repeated `term` lines."""

    def __setitem__(self, key, value):
        if key == "term" and key in self and isinstance(value, list):
            self[key].extend(value)
        else:
            super().__setitem__(key, value)


@dataclass
class ExperimentConfig:
    orders: FractionalOrders
    nonlinearity: NonlinearitySpec
    grid: HalfSpaceGrid
    solver: dict
    checks: dict            # check name -> threshold (float) or None (default)
    check_params: dict
    output: dict
    source_text: str = ""
    path: str = ""
    alpha: np.ndarray = field(default=None)
    beta: np.ndarray = field(default=None)


def _parse_bool(sec, key, raw):
    low = raw.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"[{sec}] {key}: expected a boolean, got {raw!r}")


def _parse_value(sec, key, raw, kind):
    try:
        if kind is bool:
            return _parse_bool(sec, key, raw)
        if kind is int:
            v = int(raw)
            return v
        if kind is float:
            return float(raw)
        if kind == "floats":
            return np.array([float(t) for t in raw.split()])
        return raw.strip()
    except ValueError as exc:
        raise ConfigError(f"[{sec}] {key}: {exc}") from exc


def _section(cp, name):
    if not cp.has_section(name):
        raise ConfigError(f"missing required section [{name}]")
    return dict(cp.items(name))


def load_config(path) -> ExperimentConfig:
    """Parse and fully validate an experiment config file."""
    cp = configparser.ConfigParser(dict_type=_MultiDict, strict=False,
                                   interpolation=None,
                                   inline_comment_prefixes=("#", ";"))
    cp.optionxform = str.lower
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
        cp.read_string(text)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    known = {"orders", "nonlinearity", "grid", "solver", "checks", "output"}
    extra = set(cp.sections()) - known
    if extra:
        raise ConfigError(f"unknown section [{sorted(extra)[0]}]")

    # [orders]
    sec = _section(cp, "orders")
    if set(sec) != {"s"}:
        bad = sorted(set(sec) - {"s"}) or ["s missing"]
        raise ConfigError(f"[orders] unexpected or missing key: {bad[0]}")
    try:
        orders = make_orders([float(t) for t in sec["s"].split()])
    except (ValueError, InvalidOrderError) as exc:
        raise ConfigError(f"[orders] s: {exc}") from exc
    m = orders.m

    # [nonlinearity]
    sec = _section(cp, "nonlinearity")
    if set(sec) != {"term"}:
        bad = sorted(set(sec) - {"term"}) or ["term missing"]
        raise ConfigError(f"[nonlinearity] unexpected or missing key: {bad[0]}")
    terms = []
    for line in sec["term"].splitlines():
        parts = line.split()
        if len(parts) != 2 + m:
            raise ConfigError(
                f"[nonlinearity] term {line!r}: expected "
                f"<coeff> <kind> <{m} integers>")
        try:
            coeff = float(parts[0])
            k = tuple(int(t) for t in parts[2:])
        except ValueError as exc:
            raise ConfigError(f"[nonlinearity] term {line!r}: {exc}") from exc
        terms.append((coeff, parts[1], k))
    try:
        H = NonlinearitySpec.from_terms(m, terms)
    except NonlinearityError as exc:
        raise ConfigError(f"[nonlinearity] {exc}") from exc

    # [grid]
    sec = _section(cp, "grid")
    extra = set(sec) - set(_GRID_KEYS)
    if extra:
        raise ConfigError(f"[grid] unknown key: {sorted(extra)[0]}")
    gk = {k: _parse_value("grid", k, sec[k], _GRID_KEYS[k])
          for k in sec}
    for req in ("boundary_dim", "l", "nx", "y", "ny", "gamma"):
        if req not in gk:
            raise ConfigError(f"[grid] missing key: {req}")
    try:
        grid = build_grid(boundary_dim=gk["boundary_dim"], L=gk["l"],
                          Nx=gk["nx"], Y=gk["y"], Ny=gk["ny"],
                          gamma=gk["gamma"], radial=gk.get("radial", False),
                          ambient_n=gk.get("ambient_n",
                                           gk["boundary_dim"]))
    except GridError as exc:
        raise ConfigError(f"[grid] {exc}") from exc

    # [solver]
    sec = dict(cp.items("solver")) if cp.has_section("solver") else {}
    extra = set(sec) - set(_SOLVER_KEYS)
    if extra:
        raise ConfigError(f"[solver] unknown key: {sorted(extra)[0]}")
    solver = dict(_SOLVER_DEFAULTS)
    for k in sec:
        solver[k] = _parse_value("solver", k, sec[k], _SOLVER_KEYS[k])
    if solver["data"] not in DATA_MODELS:
        raise ConfigError(f"[solver] data: unknown model {solver['data']!r}")
    if solver["init"] not in INIT_MODELS:
        raise ConfigError(f"[solver] init: unknown model {solver['init']!r}")
    if solver["top"] not in ("neumann", "dirichlet"):
        raise ConfigError(f"[solver] top: must be neumann or dirichlet")
    alpha = solver.pop("alpha", None)
    beta = solver.pop("beta", None)
    defaults = {"layer": (-1.0, 1.0), "rotated-layer": (-1.0, 1.0)}
    lo, hi = defaults.get(solver["data"], (0.0, 0.0))
    if alpha is None:
        alpha = np.full(m, lo)
    if beta is None:
        beta = np.full(m, hi)
    if alpha.size != m or beta.size != m:
        raise ConfigError(f"[solver] alpha/beta need {m} entries")

    # [checks]
    sec = _section(cp, "checks")
    checks, params = {}, {}
    for k, raw in sec.items():
        if k in CHECK_PARAM_KEYS:
            params[k] = (raw.strip() if k == "growth_f"
                         else _parse_value("checks", k, raw, float))
            continue
        if k not in CHECK_NAMES:
            raise ConfigError(f"[checks] unknown check: {k}")
        low = raw.strip().lower()
        checks[k] = None if low in ("", "default") else _parse_value(
            "checks", k, raw, float)
    if not checks:
        raise ConfigError("[checks] no checks enabled")
    radial_only = {"radial-hamiltonian", "monotonicity", "structure"}
    for k in checks:
        if k in radial_only and not grid.radial:
            raise ConfigError(f"[checks] {k} requires a radial grid")
    slab_only = {"hamiltonian", "balance", "dichotomy", "sigma", "stability",
                 "spectrum", "growth", "decay", "cross-validate"}
    for k in checks:
        if k in slab_only and (grid.radial or grid.boundary_dim != 1):
            raise ConfigError(f"[checks] {k} requires a 1-D slab grid")
    if "symmetry" in checks and grid.boundary_dim != 2:
        raise ConfigError("[checks] symmetry requires a 2-D boundary grid")

    # [output]
    sec = dict(cp.items("output")) if cp.has_section("output") else {}
    extra = set(sec) - set(_OUTPUT_KEYS)
    if extra:
        raise ConfigError(f"[output] unknown key: {sorted(extra)[0]}")
    output = {"save_fields": True}
    for k in sec:
        output[k] = _parse_value("output", k, sec[k], _OUTPUT_KEYS[k])

    return ExperimentConfig(orders=orders, nonlinearity=H, grid=grid,
                            solver=solver, checks=checks,
                            check_params=params, output=output,
                            source_text=text, path=str(path),
                            alpha=alpha, beta=beta)
