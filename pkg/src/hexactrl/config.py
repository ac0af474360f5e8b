"""Scenario files and canonical report serialization."""

from __future__ import annotations

import json
import math
from dataclasses import fields
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .model import AirframeParams
from .simulator import ConfigError, FaultEvent, Gains, Scenario, Setpoints

_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}

SCENARIO_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "description": {"type": "string"},
        "params": {
            "type": "object",
            "additionalProperties": False,
            "properties": {f.name: _POSITIVE for f in fields(AirframeParams)},
        },
        "setpoints": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: _NUMBER for k in ("h", "phi", "theta", "psi")},
        },
        "gains": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: _POSITIVE for k in ("kp_att", "kd_att", "kp_h", "kd_h")},
        },
        "faults": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["time", "rotor"],
                "properties": {
                    "time": {"type": "number", "minimum": 0},
                    "rotor": {"type": "integer", "minimum": 1, "maximum": 6},
                    "eta": {"type": "number", "minimum": 0, "maximum": 1},
                },
            },
        },
        "dcs": {"type": "boolean"},
        "duration": _POSITIVE,
        "dt": _POSITIVE,
        "seed": {"type": "integer"},
        "initial_state": {"type": "array", "items": _NUMBER, "minItems": 8, "maxItems": 8},
        "detection_delay": {"type": "number", "minimum": 0},
        "decimation": {"type": "integer", "minimum": 1},
        "expected_classification": {"enum": ["Converged", "Diverged", "SaturationLimited"]},
        "analysis": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "system": {"enum": ["full", "degraded"]},
                "set_kind": {"enum": ["u0", "ua"]},
                "eta": {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1},
                        "minItems": 6, "maxItems": 6},
                "samples": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
                "rotors": {"type": "array", "items": {"type": "integer", "minimum": 1, "maximum": 6}},
            },
        },
    },
}

SCENARIO_NAMES = ("fig2", "fig3", "fig4", "fig5")


def load_config(source) -> dict:
    """Read and validate a scenario document.

    ``source`` is a path, a bundled scenario name (``fig2`` .. ``fig5``), or an
    already-parsed dict.
    """
    if isinstance(source, dict):
        doc = source
    else:
        text = _read_source(source)
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{source}: invalid JSON ({exc})") from exc
    try:
        jsonschema.validate(doc, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from exc
    return doc


def _read_source(source) -> str:
    path = Path(source)
    if path.exists():
        return path.read_text()
    if str(source) in SCENARIO_NAMES:
        return resources.files("hexactrl.scenarios").joinpath(f"{source}.json").read_text()
    raise ConfigError(f"no such scenario file: {source}")


def params_from_config(doc: dict) -> AirframeParams:
    try:
        return AirframeParams(**doc.get("params", {}))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def scenario_from_config(doc: dict, dcs: bool | None = None) -> Scenario:
    doc = load_config(doc)
    events = tuple(
        FaultEvent(time=float(e["time"]), rotor=int(e["rotor"]), eta=float(e.get("eta", 0.0)))
        for e in doc.get("faults", [])
    )
    kwargs = dict(
        params=params_from_config(doc),
        setpoints=Setpoints(**doc.get("setpoints", {})),
        gains=Gains(**doc.get("gains", {})),
        fault_events=events,
        dcs_enabled=doc.get("dcs", True) if dcs is None else dcs,
        seed=doc.get("seed", 0),
        name=doc.get("name", ""),
        detection_delay=doc.get("detection_delay", 0.0),
    )
    for key in ("duration", "dt"):
        if key in doc:
            kwargs[key] = float(doc[key])
    if "initial_state" in doc:
        kwargs["initial_state"] = tuple(float(v) for v in doc["initial_state"])
    return Scenario(**kwargs)


def analysis_eta(doc: dict) -> np.ndarray:
    """Efficiency vector to analyze: explicit ``analysis.eta`` or the state after all faults."""
    analysis = doc.get("analysis", {})
    if "eta" in analysis:
        return np.asarray(analysis["eta"], dtype=float)
    eta = np.ones(6)
    for e in doc.get("faults", []):
        eta[e["rotor"] - 1] = e.get("eta", 0.0)
    return eta


# --- canonical JSON ------------------------------------------------------------

def _format_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [_encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(pad + i for i in items) + "\n" + end + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_encode(obj[k], indent, level + 1)}"
            for k in sorted(obj, key=str)
        ]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_canonical(obj, indent: int = 2) -> str:
    """Sorted keys, fixed indentation, floats at 17 significant digits, trailing newline."""
    return _encode(obj, indent, 0) + "\n"


def write_report(obj, path) -> None:
    Path(path).write_text(dumps_canonical(obj))
