"""Experiment configuration: flat INI files with a strict schema.

A config names one experiment kind plus the system, integrator, and
kind-specific settings. Unknown sections or keys are rejected, and every
validation message names the offending field so a bad file fails fast
and legibly. The resolved configuration is a plain dict that serializes
into the result record and must round-trip exactly.
"""

import configparser
import math

import numpy as np

from .integrate import ML_CONFIG, IntegratorConfig
from .model import ChainSpec

KINDS = ("simulate", "rotation", "classify", "boundary", "heterogeneity",
         "bistability", "pitchfork", "weakcoupling", "ml-scan", "longchain")


class ConfigError(ValueError):
    """Raised with the offending section/field named in the message."""


def _parse_float(text):
    return float(text)


def _parse_int(text):
    v = float(text)
    if v != int(v):
        raise ValueError("not an integer")
    return int(v)


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError("not a boolean")


def _parse_floats(text):
    return [float(tok) for tok in text.replace(",", " ").split()]


def _parse_ints(text):
    return [_parse_int(tok) for tok in text.replace(",", " ").split()]


def _parse_range(text):
    """Either an explicit list '0.1, 0.2, 0.3' or 'start:stop:count'."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("range needs start:stop:count")
        start, stop = float(parts[0]), float(parts[1])
        count = _parse_int(parts[2])
        if count < 1:
            raise ValueError("count must be positive")
        return [float(v) for v in np.linspace(start, stop, count)]
    return _parse_floats(text)


_PARSERS = {"float": _parse_float, "int": _parse_int, "bool": _parse_bool,
            "str": str.strip, "floats": _parse_floats, "ints": _parse_ints,
            "range": _parse_range}

_SYSTEM_KEYS = {"model": "str", "n_excitable": "int", "has_z": "bool",
                "c_oe": "float", "c_eo": "float", "c_ee": "float",
                "b": "float", "omega": "float", "d": "float",
                "omega_x": "float", "omega_z": "float"}

_INTEGRATOR_KEYS = {"method": "str", "dt": "float", "t_transient": "float",
                    "t_record": "float", "sample_every": "int"}

SCHEMA = {
    "experiment": {"kind": "str", "seed": "int"},
    "system": _SYSTEM_KEYS,
    "integrator": _INTEGRATOR_KEYS,
    "simulate": {"initial_state": "floats"},
    "rotation": {"horizon": "float", "transient": "float", "tol": "float"},
    "classify": {"refine": "bool", "tol_sync": "float", "mixed_std": "float"},
    "boundary": {"predicate": "str", "c_oe_values": "range",
                 "c_eo_bracket": "floats", "tol": "float", "warm": "bool"},
    "heterogeneity": {"line_start": "floats", "line_end": "floats",
                      "samples": "int", "pattern": "str",
                      "d_bracket": "floats", "tol": "float"},
    "bistability": {"n_ic": "int"},
    "pitchfork": {"c_oe": "float", "c_eo_values": "range"},
    "weakcoupling": {"c_oe_values": "range", "skew": "float",
                     "critical": "bool", "bracket": "floats"},
    "ml-scan": {"c_oe_values": "range", "c_eo_values": "range",
                "n_ic": "int"},
    "longchain": {"n_cells": "int", "seeds": "ints"},
}

_KIND_SECTION = {k: k for k in KINDS}


def parse_config(path: str) -> dict:
    """Read and validate an experiment file into a resolved config dict."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = cp.read(path)
    if not read:
        raise ConfigError("cannot read config file %s" % path)

    resolved = {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError("unknown section [%s]" % section)
        keys = SCHEMA[section]
        out = {}
        for key, raw in cp.items(section):
            if key not in keys:
                raise ConfigError("unknown key '%s' in [%s]" % (key, section))
            try:
                out[key] = _PARSERS[keys[key]](raw)
            except ValueError as exc:
                raise ConfigError("bad value for '%s' in [%s]: %s"
                                  % (key, section, exc)) from exc
        resolved[section] = out

    if "experiment" not in resolved or "kind" not in resolved["experiment"]:
        raise ConfigError("missing [experiment] kind")
    kind = resolved["experiment"]["kind"]
    if kind not in KINDS:
        raise ConfigError("unknown experiment kind '%s'" % kind)
    resolved["experiment"].setdefault("seed", 0)
    for section in resolved:
        if section in KINDS and section != _KIND_SECTION[kind]:
            raise ConfigError("section [%s] does not belong to kind '%s'"
                              % (section, kind))
    validate(resolved)
    return resolved


def validate(resolved: dict):
    """Range checks beyond parsing; must run before any integration."""
    sys_cfg = resolved.get("system", {})
    for key in ("c_oe", "c_eo", "c_ee"):
        if key in sys_cfg and sys_cfg[key] < 0.0:
            raise ConfigError("field '%s' must be nonnegative" % key)
    if sys_cfg.get("b", 1.1) <= 1.0:
        raise ConfigError("field 'b' must exceed 1")
    if sys_cfg.get("omega", 1.0) <= 0.0:
        raise ConfigError("field 'omega' must be positive")
    if sys_cfg.get("d", 0.0) < 0.0:
        raise ConfigError("field 'd' must be nonnegative")
    if sys_cfg.get("model", "phase") not in ("phase", "ml"):
        raise ConfigError("field 'model' must be 'phase' or 'ml'")
    integ = resolved.get("integrator", {})
    if "dt" in integ and integ["dt"] <= 0.0:
        raise ConfigError("field 'dt' must be positive")
    if integ.get("method", "rk4") not in ("rk4", "rk45"):
        raise ConfigError("field 'method' must be 'rk4' or 'rk45'")
    kind = resolved["experiment"]["kind"]
    params = resolved.get(kind, {})
    if kind == "bistability" and params.get("n_ic", 32) < 1:
        raise ConfigError("field 'n_ic' must be positive")
    if kind == "boundary":
        br = params.get("c_eo_bracket", [0.0, 1.0])
        if len(br) != 2 or br[0] >= br[1]:
            raise ConfigError("field 'c_eo_bracket' must be lo, hi")
        if params.get("predicate", "fires") not in ("fires", "one-to-one",
                                                    "fixed-point"):
            raise ConfigError("field 'predicate' unknown")
    if kind == "heterogeneity":
        for key in ("line_start", "line_end"):
            if key in params and len(params[key]) != 2:
                raise ConfigError("field '%s' must be c_oe, c_eo" % key)
        if "pattern" in params:
            parse_pattern(params["pattern"])
    if kind == "longchain" and params.get("n_cells", 100) < 1:
        raise ConfigError("field 'n_cells' must be positive")


def parse_pattern(text: str):
    """'n:m' pattern target, e.g. '1:1' or '0:1'."""
    parts = text.strip().split(":")
    try:
        n, m = int(parts[0]), int(parts[1])
    except (IndexError, ValueError) as exc:
        raise ConfigError("field 'pattern' must look like 'n:m'") from exc
    if m < 1 or n < 0:
        raise ConfigError("field 'pattern' out of range")
    return n, m


def build_chain_spec(resolved: dict) -> ChainSpec:
    sys_cfg = dict(resolved.get("system", {}))
    sys_cfg.pop("model", None)
    kind = resolved["experiment"]["kind"]
    if kind == "longchain":
        sys_cfg.setdefault("n_excitable",
                           resolved.get(kind, {}).get("n_cells", 100))
    try:
        return ChainSpec(**sys_cfg)
    except TypeError as exc:
        raise ConfigError("bad system field: %s" % exc) from exc


def build_integrator(resolved: dict, base: IntegratorConfig = None) -> IntegratorConfig:
    if base is None:
        model = resolved.get("system", {}).get("model", "phase")
        base = ML_CONFIG if model == "ml" else IntegratorConfig(
            dt=0.005, t_transient=3000.0, t_record=1000.0, sample_every=4)
    overrides = resolved.get("integrator", {})
    kwargs = {"method": base.method, "dt": base.dt,
              "t_transient": base.t_transient, "t_record": base.t_record,
              "sample_every": base.sample_every}
    kwargs.update(overrides)
    return IntegratorConfig(**kwargs)


def config_to_jsonable(resolved: dict) -> dict:
    """Resolved config as plain JSON types, key-sorted for determinism."""
    out = {}
    for section in sorted(resolved):
        sec = {}
        for key in sorted(resolved[section]):
            val = resolved[section][key]
            if isinstance(val, float) and not math.isfinite(val):
                raise ConfigError("non-finite value for '%s'" % key)
            sec[key] = val
        out[section] = sec
    return out
