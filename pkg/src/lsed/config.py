"""Experiment configuration: defaults, YAML loading and validation.

A configuration is a YAML mapping.  Every experiment has a complete set of
defaults; a user file overrides any subset of them.  Unknown keys and
values of the wrong type are reported with the line they appear on.
"""

import copy

import numpy as np
import yaml

from .errors import ConfigurationError, DomainError
from .field import FrequencyGrid, PhysicalConstants, SpectralModel
from .forces import ForceModel

__all__ = ["EXPERIMENTS", "SCHEMA_VERSION", "defaults", "load_config", "merge",
           "build_constants", "build_spectrum", "build_grid", "build_force", "dump"]

SCHEMA_VERSION = 1

_CONSTANTS = {"hbar": 1.0, "c": 1.0, "m": 1.0, "e_charge": None, "tau": 1e-4}

_DEFAULTS = {
    "field-sample": {
        "constants": _CONSTANTS,
        "spectrum": {"kind": "zero_point", "beta": None},
        "grid": {"omega_min": 0.0, "omega_max": 1.0, "n_modes": 200, "spacing": "uniform"},
        "ensemble": {"n_realizations": 10000, "seed": 20240601, "batch": 2000,
                     "amplitudes": "unit"},
        "lags": {"n_lags": 20, "max_lag": 20.0, "t0": 0.0},
        "tolerances": {"n_sigma": 3.0, "lag_pass_fraction": 0.95, "chain_states": 5,
                       "chain_length": 4},
    },
    "trajectory": {
        "constants": {**_CONSTANTS, "tau": 0.01},
        "spectrum": {"kind": "zero_point", "beta": None},
        "grid": {"omega_min": 0.1, "omega_max": 2.0, "d_omega": 0.005, "n_modes": None,
                 "spacing": "uniform"},
        "force": {"coeffs": [-1.0], "potential_offset": 0.0},
        "ensemble": {"n_realizations": 200, "seed": 20240601, "chunk_size": 50,
                     "amplitudes": "unit"},
        "integration": {"relaxation_times": 10.0, "window_relaxation_times": 20.0,
                        "rtol": 1e-6, "atol": 1e-9, "method": "DOP853", "n_samples": 2001},
        "tolerances": {"n_sigma": 3.0, "kinetic_rel": 0.05, "ratio_min": 0.9,
                       "ratio_max": 1.1, "identity_rel": 1e-5},
    },
    "oscillator-stats": {
        "constants": _CONSTANTS,
        "oscillator": {"omega0": 1.0},
        "grid": {"omega_min": 0.1, "omega_max": 20.0, "n_modes": 1000, "spacing": "uniform"},
        "betas": [0.5, 1.0, 2.0, 4.0, 8.0],
        "tolerances": {"zero_point_rel": 0.01, "planck_rel": 0.02},
    },
    "lsed-solve": {
        "constants": {**_CONSTANTS, "tau": None, "e_charge": 0.01},
        "force": {"coeffs": [-1.0, 0.0, -0.1], "potential_offset": 0.0},
        "solver": {"N": 40, "margin": None, "initial_step": 0.25, "max_iter": 40},
        "oracle": {"basis_size": 80, "n_levels": 5},
        "tolerances": {"level_rel": 1e-4, "strength_rel": 1e-3, "commutator": 1e-8,
                       "bohr": 1e-8, "strength_floor": 1e-6},
    },
    "balance": {
        "constants": {**_CONSTANTS, "tau": None, "e_charge": 0.01},
        "force": {"coeffs": [-1.0], "potential_offset": 0.0},
        "solver": {"N": 40, "margin": None, "initial_step": 0.25, "max_iter": 40},
        "vacuum": {"n_frequencies": 50, "omega_min": 0.1, "omega_max": 10.0},
        "thermal": {"beta": 1.0, "excited_state": 1},
        "charge_scale": 3.0,
        "tolerances": {"vacuum_rel": 1e-12, "bracket_rel": 1e-12, "power_rel": 1e-8,
                       "charge_invariance": 1e-10, "two_level": 1e-12},
    },
    "planck": {
        "constants": {**_CONSTANTS, "tau": None, "e_charge": 0.01},
        "betas": [0.25, 0.5, 1.0, 2.0, 4.0],
        "omega": {"omega_min": 0.01, "omega_max": 10.0, "n": 200},
        "tolerances": {"coth_abs": 1e-6, "rayleigh_jeans_rel": 1e-3, "two_level": 1e-12},
    },
    "variational": {
        "constants": {**_CONSTANTS, "tau": None, "e_charge": 0.01},
        "force": {"coeffs": [-1.0, 0.0, -0.1], "potential_offset": 0.0},
        "solver": {"N": 40, "margin": None, "initial_step": 0.25, "max_iter": 40},
        "scan": {"state": 0, "n_directions": 20, "eps_min": 1e-3, "eps_max": 1e-1,
                 "n_eps": 9, "n_draws": 100000, "seed": 20240601, "observable": "energy"},
        "tolerances": {"min_slope": 1.9, "first_order_rel": 1e-6},
    },
}

EXPERIMENTS = tuple(_DEFAULTS)


def defaults(experiment):
    if experiment not in _DEFAULTS:
        raise ConfigurationError(f"unknown experiment {experiment!r}")
    out = copy.deepcopy(_DEFAULTS[experiment])
    return {"experiment": experiment, "schema_version": SCHEMA_VERSION, **out}


def _line_map(node, path=(), out=None):
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            key = path + (k.value,)
            out[key] = k.start_mark.line + 1
            _line_map(v, key, out)
    return out


def _where(source, lines, path):
    line = lines.get(tuple(path))
    return f"{source}:{line}" if line else source


_NULLABLE = object()


def merge(base, override, source="<config>", lines=None, path=()):
    """Recursively overlay ``override`` on ``base``, validating keys and types."""
    lines = lines or {}
    out = copy.deepcopy(base)
    for key, val in override.items():
        p = path + (key,)
        if key not in base:
            raise ConfigurationError(
                f"{_where(source, lines, p)}: unknown key {'.'.join(map(str, p))!r}")
        ref = base[key]
        if isinstance(ref, dict):
            if not isinstance(val, dict):
                raise ConfigurationError(
                    f"{_where(source, lines, p)}: {'.'.join(p)} must be a mapping")
            out[key] = merge(ref, val, source, lines, p)
            continue
        if val is None or ref is None:
            out[key] = val
            continue
        if isinstance(ref, bool):
            ok = isinstance(val, bool)
        elif isinstance(ref, (int, float)):
            ok = isinstance(val, (int, float)) and not isinstance(val, bool)
        elif isinstance(ref, list):
            ok = isinstance(val, list)
        else:
            ok = isinstance(val, type(ref))
        if not ok:
            raise ConfigurationError(
                f"{_where(source, lines, p)}: {'.'.join(p)} expects "
                f"{type(ref).__name__}, got {type(val).__name__}")
        out[key] = val
    return out


def load_config(path, experiment=None):
    """Read a YAML file and merge it over the experiment defaults.

    The experiment is taken from the file's ``experiment`` key, or from
    ``experiment`` when the file does not name one.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{path}:{mark.line + 1}" if mark else str(path)
        raise ConfigurationError(f"{where}: malformed YAML: {exc}") from exc
    if data is None:
        raise ConfigurationError(f"{path}: configuration file is empty")
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}:1: top level must be a mapping")
    lines = _line_map(node)
    exp = data.get("experiment", experiment)
    if exp is None:
        raise ConfigurationError(f"{path}: no experiment named")
    if experiment is not None and exp != experiment:
        raise ConfigurationError(
            f"{_where(path, lines, ('experiment',))}: file is for {exp!r}, "
            f"not {experiment!r}")
    if exp not in _DEFAULTS:
        raise ConfigurationError(
            f"{_where(path, lines, ('experiment',))}: unknown experiment {exp!r}")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigurationError(
            f"{_where(path, lines, ('schema_version',))}: schema_version {version} "
            f"not supported (expected {SCHEMA_VERSION})")
    return merge(defaults(exp), data, str(path), lines)


def dump(cfg):
    return yaml.safe_dump(cfg, sort_keys=False, default_flow_style=None)


def build_constants(cfg):
    c = cfg["constants"]
    try:
        if c.get("e_charge") is not None:
            return PhysicalConstants(hbar=c["hbar"], c=c["c"], m=c["m"],
                                     e_charge=c["e_charge"], tau=c.get("tau"))
        if c.get("tau") is None:
            raise ConfigurationError("constants need e_charge or tau")
        return PhysicalConstants.from_tau(c["tau"], hbar=c["hbar"], c=c["c"], m=c["m"])
    except DomainError as exc:
        raise ConfigurationError(f"constants: {exc}") from exc


def build_spectrum(spec, constants):
    try:
        return SpectralModel(spec["kind"], beta=spec.get("beta"), constants=constants)
    except ValueError as exc:
        raise ConfigurationError(f"spectrum: {exc}") from exc


def build_grid(g):
    try:
        if g.get("n_modes") is None:
            if g.get("d_omega") is None:
                raise ConfigurationError("grid needs n_modes or d_omega")
            return FrequencyGrid.with_spacing(g["omega_min"], g["omega_max"], g["d_omega"])
        return FrequencyGrid(g["omega_min"], g["omega_max"], g["n_modes"],
                             g.get("spacing", "uniform"))
    except DomainError as exc:
        raise ConfigurationError(f"grid: {exc}") from exc


def build_force(f):
    try:
        return ForceModel(tuple(float(k) for k in f["coeffs"]),
                          float(f.get("potential_offset", 0.0)))
    except (DomainError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"force: {exc}") from exc


def epsilons(scan):
    return np.geomspace(scan["eps_min"], scan["eps_max"], int(scan["n_eps"]))
