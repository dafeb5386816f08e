"""
JSON experiment configuration.

Three top-level sections, all optional::

    {
      "system":     {... radio parameters in dBm / dB ...},
      "topology":   {"MBS": [0, 0], "CUE": [500, 0], ...},
      "experiment": {"name": "fig7", "trials": 30, "seed": 1, ...}
    }

Anything left out takes the reference defaults below.
"""

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import jsonschema

from ..channel import NODES, PathlossModel, SystemParams, Topology

EXPERIMENTS = ("fig5", "fig6a", "fig6b", "fig7", "fig8", "single-shot")


class ConfigError(ValueError):
    pass


def _arange(lo, hi, step):
    n = int(round((hi - lo) / step))
    return [round(lo + k * step, 10) for k in range(n + 1)]


# sweep grids for each experiment; d_mr = 600 m is always part of the
# DRx-distance sweeps
DEFAULT_SWEEPS = {
    "fig5": {"d_mr": _arange(100.0, 1000.0, 50.0), "d_range": [10.0, 150.0]},
    "fig6a": {"d_mr": [400.0, 600.0, 800.0], "d": _arange(10.0, 150.0, 2.0)},
    "fig6b": {"d_mr": _arange(100.0, 1000.0, 50.0), "d": [50.0]},
    "fig7": {"d_mr": _arange(200.0, 1000.0, 100.0), "d": [20.0]},
    "fig8": {"d_mr": _arange(200.0, 1000.0, 200.0), "d": [10.0, 30.0, 50.0, 70.0, 90.0]},
    "single-shot": {"d_mr": [600.0], "d": [20.0]},
}
DEFAULT_TRIALS = {"fig5": 1000, "fig6a": 1000, "fig6b": 1000, "fig7": 30,
                  "fig8": 20, "single-shot": 1}

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_xy = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}
_grid = {"type": "array", "items": _pos, "minItems": 1}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "system": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "p_max_dtx_dbm": _num, "p_max_mbs_dbm": _num,
                "p_max_fap_dbm": _num, "p_max_cue_dbm": _num,
                "sinr_min_drx_db": _num, "sinr_min_cue_db": _num,
                "sinr_min_fue_db": _num,
                "bandwidth_hz": _pos, "noise_density_dbm_hz": _num,
                "d_constant_m": {"type": "number", "minimum": 0},
                "path_loss_exponent_n": _pos,
                "pathloss_models": {
                    "type": "object",
                    "additionalProperties": {"type": "array", "items": _num,
                                             "minItems": 2, "maxItems": 2}},
                "link_classes": {
                    "type": "object",
                    "propertyNames": {"pattern": "^[A-Z]{3}->[A-Z]{3}$"},
                    "additionalProperties": {"type": "string"}},
            },
        },
        "topology": {
            "type": "object",
            "additionalProperties": False,
            "properties": {n: _xy for n in NODES},
        },
        "experiment": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "name": {"enum": list(EXPERIMENTS)},
                "trials": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
                "p": {"type": "number", "minimum": 0, "maximum": 1},
                "oracle_grid": {"type": "integer", "minimum": 2},
                "lattice_step": {"type": "number", "exclusiveMinimum": 0,
                                 "maximum": 0.1},
                "r_min": {"type": "array", "items": {"type": "number", "minimum": 0},
                          "minItems": 3, "maxItems": 3},
                "sweeps": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "d_mr": _grid, "d": _grid,
                        "d_range": {"type": "array", "items": _pos,
                                    "minItems": 2, "maxItems": 2},
                    },
                },
                "workers": {"type": "integer", "minimum": 1},
                "output": {"type": "string"},
                # single-shot only
                "orthogonal_available": {"type": "boolean"},
                "fading": {"oneOf": [
                    {"enum": ["random", "none"]},
                    {"type": "object",
                     "propertyNames": {"pattern": "^[A-Z]{3}->[A-Z]{3}$"},
                     "additionalProperties": {"type": "number", "minimum": 0}}]},
            },
        },
    },
}


@dataclass
class ExperimentConfig:
    name: str = "fig7"
    trials: int = 30
    master_seed: int = 0
    orthogonal_probability: float = 0.5
    sweeps: Dict[str, List[float]] = field(default_factory=dict)
    oracle_grid: int = 60
    lattice_step: float = 1e-3
    r_min: Optional[Tuple[float, float, float]] = (1.0, 1.0, 1.0)
    workers: int = 1
    output: Optional[str] = None
    params: SystemParams = field(default_factory=SystemParams)
    # fixed nodes (MBS, CUE, FAP, FUE); DTx/DRx come from the sweep unless
    # given explicitly
    topology: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    orthogonal_available: Optional[bool] = None
    fading: Any = "random"

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ConfigError("unknown experiment %r" % self.name)
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        merged = dict(DEFAULT_SWEEPS[self.name])
        merged.update(self.sweeps)
        for k, v in merged.items():
            if not v:
                raise ConfigError("sweep %r is empty" % k)
        self.sweeps = merged

    def topology_for(self, d_mr: float, d: float) -> Topology:
        base = Topology.default_layout(d_mr=d_mr, d=d)
        pos = dict(base.positions)
        pos.update({k: tuple(v) for k, v in self.topology.items()})
        return Topology(pos)


def _link_key(s):
    t, r = s.split("->")
    return (t, r)


def params_from_dict(sysd: Dict[str, Any]) -> SystemParams:
    kw = dict(sysd)
    models = kw.pop("pathloss_models", None)
    links = kw.pop("link_classes", None)
    base = SystemParams()
    if models:
        merged = dict(base.pathloss_models)
        merged.update({k: PathlossModel(*v) for k, v in models.items()})
        kw["pathloss_models"] = merged
    if links:
        kw["link_classes"] = {_link_key(k): v for k, v in links.items()}
    try:
        params = SystemParams.from_db(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError("system: %s" % exc) from exc
    for cls_ in params.link_classes.values():
        if cls_ not in params.pathloss_models:
            raise ConfigError("link class %r has no path-loss model" % cls_)
    return params


def parse_config(raw: Dict[str, Any], name: Optional[str] = None) -> ExperimentConfig:
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError("%s: %s" % (where, exc.message)) from exc
    exp = dict(raw.get("experiment", {}))
    name = name or exp.get("name", "fig7")
    fading = exp.get("fading", "random")
    if isinstance(fading, dict):
        fading = {_link_key(k): float(v) for k, v in fading.items()}
    return ExperimentConfig(
        name=name,
        trials=exp.get("trials", DEFAULT_TRIALS[name]),
        master_seed=exp.get("seed", 0),
        orthogonal_probability=exp.get("p", 0.5),
        sweeps=exp.get("sweeps", {}),
        oracle_grid=exp.get("oracle_grid", 60),
        lattice_step=exp.get("lattice_step", 1e-3),
        r_min=tuple(exp["r_min"]) if "r_min" in exp else (1.0, 1.0, 1.0),
        workers=exp.get("workers", 1),
        output=exp.get("output"),
        params=params_from_dict(raw.get("system", {})),
        topology={k: tuple(v) for k, v in raw.get("topology", {}).items()},
        orthogonal_available=exp.get("orthogonal_available"),
        fading=fading,
    )


def load_config(path, name: Optional[str] = None) -> ExperimentConfig:
    """Read and validate a JSON config file.

    Raises :class:`ConfigError` with line/column for malformed JSON and the
    offending key path for schema violations.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("cannot read %s: %s" % (path, exc)) from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("%s:%d:%d: %s" % (path, exc.lineno, exc.colno, exc.msg)) from exc
    return parse_config(raw, name)
