"""Run configuration: TOML input, validation and normalization.

A configuration names a ``command``, exactly one model block (``[ising]``,
``[xy]``, ``[cluster]`` or ``[ssh]``) and the sections the command needs::

    command = "sweep"

    [ising]
    h = 0.0

    [quench]
    parameter = "h"
    increment = 0.25        # or: final = ...

    [sweep]
    target = "initial"      # initial | final | increment
    start = -2.0
    stop = 2.0
    step = 0.01

    [grid]
    mode = "thermodynamic"  # or: n = 300 (and optionally offset = "integer")

    [thermal]
    beta = 10.0             # "inf" or a list such as [0.5, 1.0, "inf"]
    mu = 0.0

:func:`resolve` fills in every default, so the resolved dictionary stored
in a run manifest reproduces the run exactly.
"""
from __future__ import annotations

import json
import math
import sys
from pathlib import Path

import numpy as np

from .models import MODEL_FIELDS, SWEEP_TARGETS, QuenchFamily
from .spectral import BzGrid, ThermalSpec

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

CONFIG_FORMAT = "TOML 1.0 (manifests: JSON with the resolved config under 'config')"
COMMANDS = ("curve", "sweep", "power", "scaling", "kinks", "recurrence")
MODELS = tuple(MODEL_FIELDS)


class ConfigError(ValueError):
    """Invalid configuration; ``field`` is the dotted name of the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


def load(path) -> dict:
    """Raw configuration from a TOML file or a run manifest (JSON)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    if path.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from None
        return data["config"] if isinstance(data.get("config"), dict) else data
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("config", f"invalid TOML: {exc}") from None


# ---------------------------------------------------------------------------
# field helpers


def _section(raw, name, required=False):
    sec = raw.get(name)
    if sec is None:
        if required:
            raise ConfigError(name, "missing section")
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(name, "must be a section/table")
    return sec


def _number(value, field, positive=False, allow_inf=False):
    if isinstance(value, str) and allow_inf and value.strip().lower() in ("inf", "infinity"):
        return math.inf
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(field, f"expected a number, got {value!r}")
    value = float(value)
    if math.isnan(value) or (math.isinf(value) and not allow_inf):
        raise ConfigError(field, f"must be finite, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(field, f"must be positive, got {value!r}")
    return value


def _integer(value, field, minimum=1):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(field, f"expected an integer >= {minimum}, got {value!r}")
    return int(value)


def _unknown(sec, allowed, name):
    extra = set(sec) - set(allowed)
    if extra:
        raise ConfigError(f"{name}.{sorted(extra)[0]}", "unknown field")


def _encode(x):
    """JSON-safe float: infinity is spelled "inf"."""
    return "inf" if math.isinf(x) else x


def linear_grid(start, stop, step):
    """Closed grid ``start, start + step, ..., stop`` without drift."""
    count = int(round((stop - start) / step))
    return np.round(start + step * np.arange(count + 1), 12)


# ---------------------------------------------------------------------------
# resolution


def _resolve_model(raw):
    present = [m for m in MODELS if m in raw]
    name = raw.get("model")
    if name is not None and name not in MODELS:
        raise ConfigError("model", f"unknown model {name!r}; expected one of {', '.join(MODELS)}")
    if len(present) != 1:
        raise ConfigError("model", f"exactly one model block required ({', '.join(MODELS)}), found {present or 'none'}")
    if name is not None and name != present[0]:
        raise ConfigError("model", f"names {name!r} but the block is [{present[0]}]")
    name = present[0]
    block = _section(raw, name)
    _unknown(block, MODEL_FIELDS[name], name)
    return name, {k: _number(v, f"{name}.{k}") for k, v in block.items()}


def _resolve_grid(raw, command):
    sec = _section(raw, "grid")
    _unknown(sec, ("mode", "n", "offset", "rtol", "resolution"), "grid")
    mode = sec.get("mode", "finite" if "n" in sec else "thermodynamic")
    if mode not in ("finite", "thermodynamic"):
        raise ConfigError("grid.mode", f"expected 'finite' or 'thermodynamic', got {mode!r}")
    if mode == "thermodynamic":
        if "n" in sec:
            raise ConfigError("grid.n", "not allowed with mode = 'thermodynamic'")
        return {"mode": mode, "rtol": _number(sec.get("rtol", 1e-9), "grid.rtol", positive=True),
                "resolution": _integer(sec.get("resolution", 16), "grid.resolution")}
    if "n" not in sec and command != "scaling":
        raise ConfigError("grid.n", "missing site count")
    offset = sec.get("offset", "half")
    if offset not in ("half", "integer"):
        raise ConfigError("grid.offset", f"expected 'half' or 'integer', got {offset!r}")
    out = {"mode": mode, "offset": offset}
    if "n" in sec:
        out["n"] = _integer(sec["n"], "grid.n")
    return out


def _resolve_thermal(raw):
    sec = _section(raw, "thermal", required=True)
    _unknown(sec, ("beta", "mu"), "thermal")
    if "beta" not in sec:
        raise ConfigError("thermal.beta", "missing inverse temperature (a positive number or \"inf\")")
    betas = sec["beta"] if isinstance(sec["beta"], list) else [sec["beta"]]
    if not betas:
        raise ConfigError("thermal.beta", "empty list")
    betas = [_number(b, "thermal.beta", positive=True, allow_inf=True) for b in betas]
    return {"beta": [_encode(b) for b in betas], "mu": _number(sec.get("mu", 0.0), "thermal.mu")}


def _resolve_quench(raw, model, sweep_target):
    sec = _section(raw, "quench", required=True)
    _unknown(sec, ("parameter", "initial", "final", "increment"), "quench")
    param = sec.get("parameter")
    if param not in MODEL_FIELDS[model]:
        raise ConfigError("quench.parameter", f"model {model!r} has no parameter {param!r}")
    out = {"parameter": param}
    for key in ("initial", "final", "increment"):
        if key in sec:
            out[key] = _number(sec[key], f"quench.{key}")
    if "final" in out and "increment" in out:
        raise ConfigError("quench.final", "give either final or increment, not both")
    if sweep_target in (None, "initial") and "final" not in out and "increment" not in out:
        raise ConfigError("quench.final", "missing charging value (quench.final or quench.increment)")
    return out


def _resolve_sweep(raw, required):
    sec = _section(raw, "sweep", required=required)
    if not sec:
        return None
    _unknown(sec, ("target", "start", "stop", "step", "values"), "sweep")
    target = sec.get("target", "initial")
    if target not in SWEEP_TARGETS:
        raise ConfigError("sweep.target", f"expected one of {', '.join(SWEEP_TARGETS)}, got {target!r}")
    if "values" in sec:
        vals = sec["values"]
        if not isinstance(vals, list) or not vals:
            raise ConfigError("sweep.values", "expected a non-empty list")
        return {"target": target, "values": [_number(v, "sweep.values") for v in vals]}
    for key in ("start", "stop", "step"):
        if key not in sec:
            raise ConfigError(f"sweep.{key}", "missing (or give sweep.values)")
    start, stop = _number(sec["start"], "sweep.start"), _number(sec["stop"], "sweep.stop")
    step = _number(sec["step"], "sweep.step", positive=True)
    if stop < start:
        raise ConfigError("sweep.stop", "must not be below sweep.start")
    return {"target": target, "start": start, "stop": stop, "step": step}


def _resolve_tau(raw, command):
    sec = _section(raw, "tau")
    _unknown(sec, ("value", "values", "start", "stop", "step", "num", "spacing", "max"), "tau")
    if command in ("sweep", "kinks"):
        return {"value": _encode(_number(sec.get("value", "inf"), "tau.value", allow_inf=True))}
    if command == "recurrence":
        out = {}
        if "max" in sec:
            out["max"] = _number(sec["max"], "tau.max", positive=True)
        if "step" in sec:
            out["step"] = _number(sec["step"], "tau.step", positive=True)
        return out
    if "values" in sec:
        vals = sec["values"]
        if not isinstance(vals, list) or not vals:
            raise ConfigError("tau.values", "expected a non-empty list")
        vals = [_number(v, "tau.values") for v in vals]
        if any(v < 0 for v in vals) or any(b < a for a, b in zip(vals, vals[1:])):
            raise ConfigError("tau.values", "must be sorted and non-negative")
        return {"values": vals}
    if not sec and command in ("power", "scaling"):
        return {"start": 1e-3, "stop": 50.0, "num": 400, "spacing": "log"}
    for key in ("start", "stop"):
        if key not in sec:
            raise ConfigError(f"tau.{key}", "missing (or give tau.values)")
    start = _number(sec["start"], "tau.start")
    stop = _number(sec["stop"], "tau.stop")
    if start < 0 or stop < start:
        raise ConfigError("tau.stop", "need 0 <= tau.start <= tau.stop")
    spacing = sec.get("spacing", "linear")
    if spacing not in ("linear", "log"):
        raise ConfigError("tau.spacing", f"expected 'linear' or 'log', got {spacing!r}")
    if spacing == "log" or "num" in sec:
        if spacing == "log" and start <= 0:
            raise ConfigError("tau.start", "log spacing needs tau.start > 0")
        return {"start": start, "stop": stop, "num": _integer(sec.get("num", 400), "tau.num", 2),
                "spacing": spacing}
    if "step" not in sec:
        raise ConfigError("tau.step", "missing (or give tau.num)")
    return {"start": start, "stop": stop, "step": _number(sec["step"], "tau.step", positive=True),
            "spacing": "linear"}


def _check_power_taus(tau, command):
    if command not in ("power", "scaling"):
        return
    if "values" in tau and min(tau["values"]) <= 0:
        raise ConfigError("tau.values", "maximum power needs tau > 0 (energy/tau is 0/0 at tau = 0)")
    if "start" in tau and tau["start"] <= 0:
        raise ConfigError("tau.start", "maximum power needs tau > 0 (energy/tau is 0/0 at tau = 0)")


def resolve(raw: dict, command: str = None) -> dict:
    """Validated configuration with all defaults made explicit."""
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a table")
    command = command or raw.get("command")
    if command not in COMMANDS:
        raise ConfigError("command", f"expected one of {', '.join(COMMANDS)}, got {command!r}")
    _unknown(raw, ("command", "model", *MODELS, "quench", "sweep", "grid", "thermal", "tau", "scaling",
                   "kinks", "recurrence"), "config")
    model, params = _resolve_model(raw)
    sweep = _resolve_sweep(raw, required=command in ("sweep", "kinks"))
    out = {
        "command": command,
        "model": model,
        model: params,
        "quench": _resolve_quench(raw, model, sweep["target"] if sweep else None),
        "grid": _resolve_grid(raw, command),
        "thermal": _resolve_thermal(raw),
        "tau": _resolve_tau(raw, command),
    }
    _check_power_taus(out["tau"], command)
    if sweep:
        out["sweep"] = sweep
    if command == "scaling":
        sec = _section(raw, "scaling", required=True)
        _unknown(sec, ("n",), "scaling")
        ns = sec.get("n")
        if not isinstance(ns, list) or len(ns) < 4:
            raise ConfigError("scaling.n", "expected a list of at least 4 site counts")
        out["scaling"] = {"n": [_integer(v, "scaling.n") for v in ns]}
    if command == "kinks":
        sec = _section(raw, "kinks")
        _unknown(sec, ("threshold", "flatness_tol"), "kinks")
        out["kinks"] = {"threshold": _number(sec.get("threshold", 10.0), "kinks.threshold", positive=True),
                        "flatness_tol": _number(sec.get("flatness_tol", 1e-3), "kinks.flatness_tol", positive=True)}
    if command == "recurrence":
        sec = _section(raw, "recurrence")
        _unknown(sec, ("window", "factor"), "recurrence")
        out["recurrence"] = {"window": _integer(sec.get("window", 50), "recurrence.window", 2),
                             "factor": _number(sec.get("factor", 5.0), "recurrence.factor", positive=True)}
    if command == "recurrence" and out["grid"]["mode"] != "finite":
        raise ConfigError("grid.n", "recurrence needs a finite site count")
    return out


# ---------------------------------------------------------------------------
# objects from a resolved configuration


def family(cfg) -> QuenchFamily:
    q = cfg["quench"]
    return QuenchFamily(cfg["model"], q["parameter"], dict(cfg[cfg["model"]]),
                        q.get("initial"), q.get("final"), q.get("increment"))


def grid(cfg, n=None) -> BzGrid:
    g = cfg["grid"]
    if g["mode"] == "thermodynamic":
        return BzGrid.thermodynamic(g["rtol"], g["resolution"])
    return BzGrid.finite(n if n is not None else g["n"], g["offset"])


def thermals(cfg):
    mu = cfg["thermal"]["mu"]
    return [ThermalSpec(_number(b, "thermal.beta", allow_inf=True), mu) for b in cfg["thermal"]["beta"]]


def sweep_values(cfg):
    s = cfg["sweep"]
    if "values" in s:
        return np.asarray(s["values"], dtype=float)
    return linear_grid(s["start"], s["stop"], s["step"])


def tau_grid(cfg):
    t = cfg["tau"]
    if "values" in t:
        return np.asarray(t["values"], dtype=float)
    if t.get("spacing") == "log":
        return np.geomspace(t["start"], t["stop"], t["num"])
    if "num" in t:
        return np.linspace(t["start"], t["stop"], t["num"])
    return linear_grid(t["start"], t["stop"], t["step"])


def tau_value(cfg) -> float:
    """Single charging duration of sweep-type commands (``inf`` for the plateau)."""
    return _number(cfg["tau"]["value"], "tau.value", allow_inf=True)
