"""Run configuration: JSON schema, defaults, parameter-region checks and dispatch."""

from __future__ import annotations

import copy
import json

import jsonschema

from .errors import InputError, UnsupportedConfigurationError
from .experiments import REGISTRY, Power
from .group import HomNorm
from .stochastic import FAMILY_KINDS, MartingaleFamily

CONFIG_VERSION = 1

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_POS_INT = {"type": "integer", "minimum": 1}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "roughbdg run configuration",
    "type": "object",
    "required": ["experiment"],
    "additionalProperties": False,
    "properties": {
        "config_version": {"const": CONFIG_VERSION},
        "experiment": {"enum": sorted(REGISTRY)},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "workers": _POS_INT,
        "family": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": list(FAMILY_KINDS)},
                "d": _POS_INT,
                "T": _POS,
                "sigma": {"type": "array", "items": {"type": "number", "minimum": 0}},
                "c": _NUM,
                "R": _NUM,
                "scale": _NUM,
                "kappa": _NUM,
                "n_blocks": _POS_INT,
            },
        },
        "norm": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"kind": {"enum": ["sum", "max", "cc"]}, "vector": {"enum": ["l1", "l2", "lmax"]}},
        },
        "r": _POS,
        "N_fine": {"type": "integer", "minimum": 2},
        "R_mc": _POS_INT,
        "p": _NUM,
        "p_low": _NUM,
        "q": _NUM,
        "lambdas": {"type": "array", "items": _POS, "minItems": 1},
        "levels": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        "dissections": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "m": {"type": "integer", "minimum": 3},
        "walk": {"enum": ["rademacher", "area_blocks"]},
        "steps": _POS_INT,
        "refinement_check": {"type": "boolean"},
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"dir": {"type": "string"}, "format": {"enum": ["json", "csv", "both"]}},
        },
    },
}

DEFAULTS = {
    "config_version": CONFIG_VERSION,
    "seed": 0,
    "workers": 1,
    "family": {"kind": "bm", "d": 2, "T": 1.0},
    "norm": {"kind": "sum", "vector": "l2"},
    "r": 1.0,
    "N_fine": 1024,
    "R_mc": 2000,
    "refinement_check": True,
    "output": {"format": "both"},
}

# experiment-specific keys and their defaults
EXPERIMENT_KEYS = {
    "bdg_classical": {},
    "chebyshev_group_bound": {"lambdas": None},
    "bdg_group_uniform": {},
    "bdg_pvar": {"p": 2.5},
    "lepingle_discrete": {"walk": "rademacher", "q": 1.1, "p": 1.25, "steps": 64},
    "uniform_dissection_bound": {"p": 2.5, "dissections": None},
    "pwl_convergence": {"q": 2.0, "p": 2.5, "p_low": 2.25, "levels": [3, 4, 5, 6, 7]},
    "geodesic_sup_bound": {"p": 2.5, "m": 256, "dissections": None},
}

_USES_NORM = {"chebyshev_group_bound", "bdg_group_uniform", "bdg_pvar", "uniform_dissection_bound",
              "pwl_convergence", "geodesic_sup_bound"}
_USES_F = {"bdg_classical", "bdg_group_uniform", "bdg_pvar", "lepingle_discrete", "uniform_dissection_bound",
           "geodesic_sup_bound"}
_USES_REFINEMENT = {"bdg_classical", "chebyshev_group_bound", "bdg_group_uniform", "bdg_pvar",
                    "uniform_dissection_bound", "geodesic_sup_bound"}


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise jsonschema.ValidationError(f"config is not valid JSON: {exc}") from exc


def resolve(config: dict, overrides: dict | None = None) -> dict:
    """Schema-check, apply overrides and fill defaults; returns the full config echo."""
    jsonschema.validate(config, CONFIG_SCHEMA)
    cfg = copy.deepcopy(DEFAULTS)
    for key, value in config.items():
        if isinstance(value, dict) and isinstance(cfg.get(key), dict):
            if key == "family" and "kind" in value and value["kind"] != cfg[key].get("kind"):
                cfg[key] = {"d": 2, "T": 1.0}
            cfg[key].update(value)
        else:
            cfg[key] = copy.deepcopy(value)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in ("out", "format"):
            cfg["output"]["dir" if key == "out" else "format"] = value
        else:
            cfg[key] = value
    for key, default in EXPERIMENT_KEYS[cfg["experiment"]].items():
        if default is not None:
            cfg.setdefault(key, copy.deepcopy(default))
    jsonschema.validate(cfg, CONFIG_SCHEMA)
    check_region(cfg)
    return cfg


def check_region(cfg: dict):
    """Parameter-region checks that happen before any computation."""
    name = cfg["experiment"]
    fam = cfg["family"]
    d = fam.get("d", 2)
    p = cfg.get("p")
    if name in ("bdg_pvar", "uniform_dissection_bound", "pwl_convergence", "geodesic_sup_bound") and not p > 2:
        raise UnsupportedConfigurationError(f"{name} requires p > 2, got p = {p}")
    if name == "pwl_convergence" and not 2 < cfg["p_low"] < p:
        raise UnsupportedConfigurationError(f"pwl_convergence requires 2 < p_low < p, got p_low = {cfg['p_low']}")
    if name == "lepingle_discrete":
        q = cfg["q"]
        if not ((1 < q < p <= 2) or (q == p == 1)):
            raise UnsupportedConfigurationError(f"lepingle_discrete requires 1 < q < p <= 2 or q = p = 1, got q = {q}, p = {p}")
    if (name == "geodesic_sup_bound" or cfg["norm"]["kind"] == "cc") and d != 2:
        raise UnsupportedConfigurationError(f"{name} with the CC norm or geodesics requires d = 2, got d = {d}")
    n = cfg["N_fine"]
    if n & (n - 1):
        raise InputError(f"N_fine must be a power of two, got {n}")


def build_call(cfg: dict):
    """Return (function, kwargs) for a resolved config."""
    name = cfg["experiment"]
    fam = dict(cfg["family"])
    family = MartingaleFamily.from_dict(fam)
    kwargs = {"R_mc": cfg["R_mc"], "seed": cfg["seed"], "workers": cfg["workers"], "n_fine": cfg["N_fine"]}
    if name in _USES_F:
        kwargs["F"] = Power(cfg["r"])
    if name in _USES_NORM:
        kwargs["norm"] = HomNorm(cfg["norm"]["kind"], cfg["norm"]["vector"])
    if name in _USES_REFINEMENT:
        kwargs["refined"] = cfg["refinement_check"]
    for key in EXPERIMENT_KEYS[name]:
        value = cfg.get(key)
        if value is None:
            continue
        kwargs[key] = tuple(value) if isinstance(value, list) else value
    if name == "lepingle_discrete":
        kwargs["family"] = family
        return REGISTRY[name], kwargs
    return REGISTRY[name], {"family": family, **kwargs}


def run_config(cfg: dict):
    fn, kwargs = build_call(cfg)
    return fn(**kwargs)
