"""Built-in systems and JSON experiment configs."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .maps import AffineSum, Constant, GifsSystem, LipCert, SupScale
from .metric import ABSOLUTE, MAXIMUM, BaseMetric, MetricParams, as_cloud

SCHEMA_ID = "hutchinf/1"


@dataclass
class Builtin:
    system: GifsSystem
    seeds: np.ndarray            # seed set for every coordinate of the seed sequence
    reference: np.ndarray | None  # known attractor (finite or truncated) when available
    viewport: tuple = ((0.0, 0.0), (1.0, 1.0))
    notes: dict = field(default_factory=dict)


def planar_system(q: float = 0.5) -> GifsSystem:
    """Four maps x -> b_i + sum 0.1 * 4^{-k} x_k, b_i the corners of [0, 1/2]^2, max metric."""
    offsets = [(0.0, 0.0), (0.0, 0.5), (0.5, 0.0), (0.5, 0.5)]
    maps = [AffineSum(0.1, 0.25, b) for b in offsets]
    return GifsSystem(maps, MetricParams.sup(q), MAXIMUM, name="ex5")


def planar_factor_system(q: float = 0.5) -> GifsSystem:
    """One coordinate of the planar system; its attractor squared is the planar attractor."""
    maps = [AffineSum(0.1, 0.25, (b,)) for b in (0.0, 0.5)]
    return GifsSystem(maps, MetricParams.sup(q), ABSOLUTE, name="ex5-factor")


def harmonic_grid(j_max: int = 64) -> np.ndarray:
    """{1/j : j <= j_max} together with 0."""
    return as_cloud(np.concatenate([[0.0], 1.0 / np.arange(1, j_max + 1)]), 1)


def dyadic_set(n_max: int = 60) -> np.ndarray:
    """{0} and 2^{-n} for n = 0..n_max."""
    return as_cloud(np.concatenate([[0.0], 2.0 ** -np.arange(n_max + 1)]), 1)


def sup_pair_system() -> GifsSystem:
    """{x -> sup x_k / 2, x -> 1}: only a q = 1 certificate exists."""
    mp = MetricParams.sup(1.0)
    maps = [SupScale(0.5), Constant(1.0)]
    return GifsSystem(maps, mp, ABSOLUTE, [LipCert(mp, 0.5), LipCert(mp, 0.0)], name="sup-pair")


def sup_interval_system() -> GifsSystem:
    """{sup/2, sup/2 + 1/4} on [0, 2]: (C1) holds, (C2) fails."""
    mp = MetricParams.sup(1.0)
    maps = [SupScale(0.5, 0.0, C2=False), SupScale(0.5, 0.25, C2=False)]
    return GifsSystem(maps, mp, ABSOLUTE, [LipCert(mp, 0.5), LipCert(mp, 0.5)], name="sup-interval")


def builtin(name: str) -> Builtin:
    if name == "ex5":
        return Builtin(planar_system(), np.zeros((1, 2)), None)
    if name == "ex5-factor":
        return Builtin(planar_factor_system(), np.zeros((1, 1)), None, ((0.0,), (1.0,)))
    if name == "sup-pair":
        return Builtin(sup_pair_system(), harmonic_grid(64), dyadic_set(60), ((0.0,), (1.0,)),
                       {"grid": "harmonic, j <= 64"})
    if name == "sup-interval":
        grid = as_cloud(np.arange(0, 129) / 64.0, 1)
        return Builtin(sup_interval_system(), grid, as_cloud(np.arange(0, 33) / 64.0, 1),
                       ((0.0,), (2.0,)), {"grid": "[0, 2] step 1/64"})
    raise ValueError(f"unknown built-in system {name!r}")


BUILTINS = ("ex5", "ex5-factor", "sup-pair", "sup-interval")

# ------------------------------------------------------------------ config

_point = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_flags = {"C1": {"type": "boolean"}, "C2": {"type": "boolean"}}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["schema", "system"],
    "properties": {
        "schema": {"const": SCHEMA_ID},
        "system": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "builtin": {"enum": list(BUILTINS)},
                "name": {"type": "string"},
                "base_metric": {"enum": [m.value for m in BaseMetric if m is not BaseMetric.DISCRETE]},
                "anchor": _point,
                "maps": {
                    "type": "array", "minItems": 1,
                    "items": {"oneOf": [
                        {"type": "object", "additionalProperties": False, "required": ["kind", "c", "r", "offset"],
                         "properties": {"kind": {"const": "affine_sum"}, "c": {"type": "number"},
                                        "r": {"type": "number", "exclusiveMinimum": -1, "exclusiveMaximum": 1},
                                        "offset": _point, **_flags}},
                        {"type": "object", "additionalProperties": False, "required": ["kind", "s"],
                         "properties": {"kind": {"const": "sup_scale"}, "s": {"type": "number", "minimum": 0},
                                        "b": {"type": "number"}, **_flags}},
                        {"type": "object", "additionalProperties": False, "required": ["kind", "value"],
                         "properties": {"kind": {"const": "constant"}, "value": _point, **_flags}},
                    ]},
                },
                "certs": {"type": "array", "items": {"type": "number", "minimum": 0}},
                "seeds": {"type": "array", "items": _point, "minItems": 1},
            },
            "oneOf": [{"required": ["builtin"]}, {"required": ["maps"]}],
        },
        "metric": {
            "type": "object", "additionalProperties": False, "required": ["kind", "q"],
            "properties": {"kind": {"enum": ["sup", "lp"]}, "q": {"type": "number"}, "p": {"type": "number"}},
        },
        "run": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "depth": {"type": "integer", "minimum": 1},
                "prune_eps": {"type": "number", "minimum": 0},
                "prefix": {"type": ["integer", "null"], "minimum": 1},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "seed": {"type": "integer"},
                "allow_s2": {"type": "boolean"},
            },
        },
        "output": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "viewport": {"type": "object", "additionalProperties": False, "required": ["min", "max"],
                             "properties": {"min": _point, "max": _point}},
                "resolution": {"oneOf": [{"type": "integer", "minimum": 1},
                                         {"type": "array", "items": {"type": "integer", "minimum": 1},
                                          "minItems": 2, "maxItems": 2}]},
                "paths": {"type": "object", "additionalProperties": {"type": "string"}},
            },
        },
    },
}


@dataclass
class ExperimentConfig:
    builtin: Builtin
    depth: int = 4
    prune_eps: float = 1e-3
    prefix: int | None = None
    tol: float = 0.02
    seed: int = 0
    allow_s2: bool = False
    viewport: tuple = ((0.0, 0.0), (1.0, 1.0))
    resolution: tuple = (512, 512)
    paths: dict = field(default_factory=dict)

    @property
    def system(self) -> GifsSystem:
        return self.builtin.system


def _map_from_dict(d: dict):
    flags = {k: d[k] for k in ("C1", "C2") if k in d}
    if d["kind"] == "affine_sum":
        return AffineSum(d["c"], d["r"], d["offset"], **flags)
    if d["kind"] == "sup_scale":
        return SupScale(d["s"], d.get("b", 0.0), **flags)
    return Constant(d["value"], **flags)


def system_from_dict(d: dict, metric: dict | None) -> Builtin:
    if "builtin" in d:
        b = builtin(d["builtin"])
        if metric is not None:
            sys = b.system
            b.system = GifsSystem(sys.maps, MetricParams(metric["kind"], metric["q"], metric.get("p", 1.0)),
                                  sys.metric, name=sys.name, anchor=sys.anchor)
        return b
    if metric is None:
        raise ValueError("a custom system needs a metric section")
    mp = MetricParams(metric["kind"], metric["q"], metric.get("p", 1.0))
    maps = [_map_from_dict(m) for m in d["maps"]]
    certs = []
    if "certs" in d:
        if len(d["certs"]) != len(maps):
            raise ValueError("one certificate per map is required")
        certs = [LipCert(mp, float(L)) for L in d["certs"]]
    base = BaseMetric.parse(d.get("base_metric", "euclidean"))
    sys = GifsSystem(maps, mp, base, certs, name=d.get("name", "custom"), anchor=d.get("anchor"))
    seeds = np.asarray(d["seeds"], dtype=float) if "seeds" in d else sys.anchor.reshape(1, -1)
    dim = sys.dim
    vp = ((0.0,) * dim, (1.0,) * dim)
    return Builtin(sys, as_cloud(seeds, dim), None, vp)


def parse_config(obj: dict) -> ExperimentConfig:
    jsonschema.validate(obj, CONFIG_SCHEMA)
    b = system_from_dict(obj["system"], obj.get("metric"))
    run, out = obj.get("run", {}), obj.get("output", {})
    res = out.get("resolution", 512)
    res = (res, res) if isinstance(res, int) else tuple(res)
    vp = out.get("viewport")
    viewport = (tuple(vp["min"]), tuple(vp["max"])) if vp else b.viewport
    if any(lo >= hi for lo, hi in zip(*viewport)) or len(viewport[0]) != len(viewport[1]):
        raise ValueError("viewport needs min < max on every axis")
    return ExperimentConfig(b, run.get("depth", 4), run.get("prune_eps", 1e-3), run.get("prefix"),
                            run.get("tol", 0.02), run.get("seed", 0), run.get("allow_s2", False),
                            viewport, res, dict(out.get("paths", {})))


def load_config(path) -> ExperimentConfig:
    with open(Path(path), encoding="utf-8") as fh:
        return parse_config(json.load(fh))
