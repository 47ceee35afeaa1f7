"""JSON run configuration: schema, defaults and loading."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .circuit import LISTED_CELL, UnitCellParams
from .errors import ConfigError
from .metrics import REFERENCE_MASK, SpecMask
from .synthesis import PARAM_NAMES, SynthesisConfig
from .twoport import FrequencyGrid

SCHEMA_VERSION = 1

_POS = {"type": "number", "exclusiveMinimum": 0}
_GRID = {
    "type": "object",
    "additionalProperties": False,
    "required": ["start_hz", "stop_hz", "points"],
    "properties": {
        "start_hz": _POS,
        "stop_hz": _POS,
        "points": {"type": "integer", "minimum": 2},
        "spacing": {"enum": ["linear", "logarithmic"]},
    },
}
_STOP = {
    "type": "object",
    "additionalProperties": False,
    "required": ["min_attenuation_db"],
    "properties": {
        "min_attenuation_db": _POS,
        "frequency_hz": {"anyOf": [_POS, {"type": "null"}]},
        "relative_to": {"anyOf": [{"enum": ["f_cl", "f_cu", "f0"]}, {"type": "null"}]},
        "factor": _POS,
    },
}
_OPT_POS = {"anyOf": [_POS, {"type": "null"}]}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version", "unit_cell"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "unit_cell": {
            "type": "object",
            "additionalProperties": False,
            "required": list(PARAM_NAMES),
            "properties": {
                **{k: _POS for k in PARAM_NAMES},
                "include_series_inductor": {"type": "boolean"},
                "topology": {"enum": ["symmetric_t", "l_section"]},
                "swap_inductors": {"type": "boolean"},
            },
        },
        "grid": _GRID,
        "stages": {"type": "integer", "minimum": 1},
        "z0_ohm": _POS,
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
                "basename": {"type": "string", "minLength": 1},
                "touchstone_format": {"enum": ["RI", "MA", "DB"]},
                "frequency_unit": {"enum": ["HZ", "KHZ", "MHZ", "GHZ"]},
            },
        },
        "mask": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "passband_hz": {
                    "anyOf": [
                        {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2},
                        {"type": "null"},
                    ]
                },
                "max_il_db": {"anyOf": [{"type": "number", "minimum": 0}, {"type": "null"}]},
                "min_rl_db": _OPT_POS,
                "stopband": {"type": "array", "items": _STOP},
                "f0_target_hz": _OPT_POS,
                "f0_tol": {"type": "number", "minimum": 0},
                "bw_target_hz": _OPT_POS,
                "bw_tol": {"type": "number", "minimum": 0},
                "shaping_weight": {"type": "number", "minimum": 0},
            },
        },
        "synthesis": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "bounds": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        k: {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2}
                        for k in PARAM_NAMES
                    },
                },
                "grid": _GRID,
                "stages": {"type": "integer", "minimum": 1},
                "max_iterations": {"type": "integer", "minimum": 1},
                "simplex_tol": _POS,
                "initial_step": _POS,
                "restart_count": {"type": "integer", "minimum": 0},
                "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
                "margin_db": {"type": "number", "minimum": 0},
                "margin_rel": {"type": "number", "minimum": 0, "maximum": 1},
                "reseeds": {"type": "integer", "minimum": 0},
                "restart_candidates": {"type": "integer", "minimum": 1},
                "start_from_unit_cell": {"type": "boolean"},
            },
        },
    },
}

DEFAULT_GRID = {"start_hz": 0.1e9, "stop_hz": 6.0e9, "points": 5901, "spacing": "linear"}
DEFAULT_OUTPUT = {"dir": "out", "basename": "mbpf", "touchstone_format": "RI", "frequency_unit": "GHZ"}


def default_config_dict() -> dict:
    """The shipped configuration: the listed lumped values, as labeled."""
    return {
        "schema_version": SCHEMA_VERSION,
        "unit_cell": LISTED_CELL.to_dict(),
        "grid": dict(DEFAULT_GRID),
        "stages": 1,
        "z0_ohm": 50.0,
        "output": dict(DEFAULT_OUTPUT),
    }


@dataclass
class RunConfig:
    unit_cell: UnitCellParams
    grid: FrequencyGrid
    stages: int = 1
    z0_ohm: float = 50.0
    output: dict = field(default_factory=lambda: dict(DEFAULT_OUTPUT))
    mask: SpecMask | None = None
    synthesis: dict | None = None
    raw: dict = field(default_factory=dict, repr=False)

    def synthesis_config(self, seed: int | None = None) -> SynthesisConfig:
        s = dict(self.synthesis or {})
        start = s.pop("start_from_unit_cell", True)
        if "grid" in s:
            s["grid"] = _grid(s["grid"], "synthesis.grid")
        if seed is not None:
            s["seed"] = seed
        initial = None
        if start:
            p = self.unit_cell
            # search space uses the physical roles: l_r = series, l_l = tank
            initial = UnitCellParams(
                p.c_l_farad, p.series_inductance_henry, p.c_farad, p.c_r_farad, p.tank_inductance_henry
            )
        try:
            return SynthesisConfig(
                **s,
                z0_ohm=self.z0_ohm,
                topology=self.unit_cell.topology,
                include_series_inductor=self.unit_cell.include_series_inductor,
                initial=initial,
            )
        except ValueError as exc:
            raise ConfigError(f"synthesis: {exc}") from None

    def effective_mask(self) -> SpecMask:
        return self.mask if self.mask is not None else REFERENCE_MASK


def _grid(d: dict, where: str) -> FrequencyGrid:
    try:
        return FrequencyGrid(d["start_hz"], d["stop_hz"], d["points"], d.get("spacing", "linear"))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _path(err) -> str:
    return ".".join(str(p) for p in err.absolute_path) or "<root>"


def config_from_dict(d: dict) -> RunConfig:
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(d), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        raise ConfigError("; ".join(f"{_path(e)}: {e.message}" for e in errors))
    d = copy.deepcopy(d)
    base = default_config_dict()
    try:
        unit = UnitCellParams.from_dict(d["unit_cell"])
    except ValueError as exc:
        raise ConfigError(f"unit_cell: {exc}") from None
    grid = _grid(d.get("grid", base["grid"]), "grid")
    output = dict(DEFAULT_OUTPUT)
    output.update(d.get("output", {}))
    mask = None
    if "mask" in d:
        try:
            mask = SpecMask.from_dict(d["mask"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"mask: {exc}") from None
    return RunConfig(
        unit_cell=unit,
        grid=grid,
        stages=d.get("stages", 1),
        z0_ohm=float(d.get("z0_ohm", 50.0)),
        output=output,
        mask=mask,
        synthesis=d.get("synthesis"),
        raw=d,
    )


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: top level must be an object")
    try:
        return config_from_dict(d)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
