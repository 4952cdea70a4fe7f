"""Run configuration: JSON in, validated ``(ProblemSpec, SolverConfig)`` out.

A config has two objects.  ``problem`` either names a registry problem
(optionally with ``seed`` and ``x0`` overrides) or spells one out with
``smooth``, ``nonsmooth`` and ``x0``.  ``solver`` holds algorithm parameters;
omitted keys take the ``SolverConfig`` defaults.

Validation errors carry a JSON pointer (``/solver/delta``) to the offending
value.
"""

import json
import math
from dataclasses import fields

import jsonschema
import numpy as np

from .oracle import BoxSet
from .problems import REGISTRY, ProblemSpec, bounds_from_json, get_problem
from .prox import NonsmoothKind
from .solver import GAMMA0_RULES, SolverConfig


class ConfigError(ValueError):
    def __init__(self, pointer, message):
        self.pointer = pointer
        super().__init__(f"{pointer or '/'}: {message}")


_number = {"type": "number"}
_vector = {"type": "array", "items": _number, "minItems": 1}
_bounds = {"type": "array", "items": {"type": ["number", "null"]}, "minItems": 1}
_matrix = {"type": "array", "items": _vector, "minItems": 1}

_smooth_schema = {
    "type": "object",
    "required": ["type"],
    "properties": {
        "type": {"enum": ["quadratic", "quartic", "alm_penalty", "sum"]},
        "Q": _matrix, "q": _vector,
        "scale": {"type": "number", "exclusiveMinimum": 0},
        "n": {"type": "integer", "minimum": 1},
        "A": _matrix, "u": _vector,
        "rho": {"type": "number", "exclusiveMinimum": 0},
        "lower": _bounds, "upper": _bounds,
        "terms": {"type": "array", "items": {"$ref": "#/$defs/smooth"}, "minItems": 1},
    },
    "allOf": [
        {"if": {"properties": {"type": {"const": "quadratic"}}},
         "then": {"required": ["Q", "q"]}},
        {"if": {"properties": {"type": {"const": "quartic"}}},
         "then": {"required": ["scale", "n"]}},
        {"if": {"properties": {"type": {"const": "alm_penalty"}}},
         "then": {"required": ["A", "u", "rho", "lower", "upper"]}},
        {"if": {"properties": {"type": {"const": "sum"}}},
         "then": {"required": ["terms"]}},
    ],
}

_nonsmooth_schema = {
    "type": "object",
    "required": ["type"],
    "properties": {
        "type": {"enum": ["l1", "l0", "box", "zero"]},
        "weight": {"type": "number", "exclusiveMinimum": 0},
        "lower": _bounds, "upper": _bounds,
    },
    "allOf": [
        {"if": {"properties": {"type": {"enum": ["l1", "l0"]}}},
         "then": {"required": ["weight"]}},
        {"if": {"properties": {"type": {"const": "box"}}},
         "then": {"required": ["lower", "upper"]}},
    ],
}

SCHEMA = {
    "$defs": {"smooth": _smooth_schema},
    "type": "object",
    "required": ["problem"],
    "additionalProperties": False,
    "properties": {
        "problem": {
            "type": "object",
            "required": ["name"],
            "properties": {
                "name": {"type": "string", "minLength": 1},
                "seed": {"type": ["integer", "null"]},
                "smooth": {"$ref": "#/$defs/smooth"},
                "nonsmooth": _nonsmooth_schema,
                "x0": _vector,
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tau": {"type": "number", "exclusiveMinimum": 1},
                "delta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "gamma_min": {"type": "number", "exclusiveMinimum": 0},
                "gamma_max": {"type": "number", "exclusiveMinimum": 0},
                "gamma_cap": {"type": "number", "exclusiveMinimum": 0},
                "eps_tol": {"type": "number", "exclusiveMinimum": 0},
                "max_iter": {"type": "integer", "minimum": 1},
                "max_inner": {"type": "integer", "minimum": 1},
                "snapshot_every": {"type": "integer", "minimum": 1},
                "gamma0_rule": {"enum": list(GAMMA0_RULES)},
            },
        },
    },
}

_VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


def _pointer(path):
    return "".join(f"/{p}" for p in path)


def _validate_schema(obj):
    errors = list(_VALIDATOR.iter_errors(obj))
    if errors:
        # report the deepest error; it is the most specific one
        err = max(errors, key=lambda e: len(e.absolute_path))
        raise ConfigError(_pointer(err.absolute_path), err.message)


def parse_solver(obj):
    obj = dict(obj or {})
    base = "/solver"
    if obj.get("gamma_min", 1e-6) > obj.get("gamma_max", SolverConfig.gamma_max):
        raise ConfigError(base + "/gamma_min", "gamma_min must not exceed gamma_max")
    if obj.get("gamma_max", SolverConfig.gamma_max) >= obj.get("gamma_cap", SolverConfig.gamma_cap):
        raise ConfigError(base + "/gamma_cap", "gamma_cap must exceed gamma_max")
    known = {f.name for f in fields(SolverConfig)}
    kwargs = {k: v for k, v in obj.items() if k in known}
    for key in ("tau", "delta", "gamma_min", "gamma_max", "gamma_cap", "eps_tol"):
        if key in kwargs:
            kwargs[key] = float(kwargs[key])
    return SolverConfig(**kwargs)


def _parse_nonsmooth(obj, n, base):
    tag = obj["type"]
    if tag in ("l1", "l0"):
        return NonsmoothKind(tag, weight=float(obj["weight"]))
    if tag == "box":
        lower = bounds_from_json(obj["lower"], -math.inf)
        upper = bounds_from_json(obj["upper"], math.inf)
        if lower.size != n or upper.size != n:
            raise ConfigError(base + "/lower", f"box bounds must have length {n}")
        try:
            return NonsmoothKind.box_indicator(BoxSet(lower, upper))
        except ValueError as err:
            raise ConfigError(base, str(err)) from None
    return NonsmoothKind.zero()


def parse_problem(obj):
    base = "/problem"
    seed = obj.get("seed")
    if "smooth" not in obj:
        if obj["name"] not in REGISTRY:
            raise ConfigError(base + "/name",
                              f"unknown problem {obj['name']!r}; known: {sorted(REGISTRY)}")
        spec = get_problem(obj["name"], seed)
        if "x0" in obj:
            x0 = np.array(obj["x0"], dtype=float)
            if x0.size != spec.dimension:
                raise ConfigError(base + "/x0", f"x0 must have length {spec.dimension}")
            spec = ProblemSpec(spec.name, spec.smooth, spec.nonsmooth, x0, spec.seed)
    else:
        for key in ("nonsmooth", "x0"):
            if key not in obj:
                raise ConfigError(base, f"a custom problem needs '{key}'")
        x0 = np.array(obj["x0"], dtype=float)
        nonsmooth = _parse_nonsmooth(obj["nonsmooth"], x0.size, base + "/nonsmooth")
        spec = ProblemSpec(obj["name"], obj["smooth"], nonsmooth, x0, seed)

    try:
        f, phi = spec.build()
    except (ValueError, KeyError) as err:
        raise ConfigError(base + "/smooth", str(err)) from None
    if f.dimension != spec.dimension:
        raise ConfigError(base + "/x0", f"x0 must have length {f.dimension}")
    if not math.isfinite(phi.eval(spec.x0)):
        raise ConfigError(base + "/x0", "x0 must lie in the domain of the nonsmooth term")
    return spec


def parse_config(obj):
    """Validate a decoded config object; returns ``(ProblemSpec, SolverConfig)``."""
    _validate_schema(obj)
    return parse_problem(obj["problem"]), parse_solver(obj.get("solver"))


def load_config(path):
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as err:
        raise ConfigError("", f"{path}: invalid JSON ({err})") from None
    except OSError as err:
        raise ConfigError("", f"cannot read {path}: {err.strerror}") from None
    return parse_config(obj)


def dump_config(spec, cfg):
    """Normalized, fully explicit form; ``parse_config`` of it is a fixed point."""
    return {"problem": spec.to_dict(), "solver": cfg.to_dict()}
