"""Command-line front end: ``quenchbat [command] --config run.toml --out results``.

Writes one CSV per inverse temperature plus ``manifest.json``.  Exit status
0 on success, 2 for configuration errors, 3 for numerical failures.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, config
from .analysis import (
    RecurrenceError, detect_kinks, plateau_regions, power_scaling, recurrence_profile, sweep_plateau,
    sweep_recurrence_max,
)
from .engine import energy_curve, max_power
from .kernels import BACKEND
from .models import ProtocolError
from .quadrature import QuadratureError
from .spectral import ModelEvaluationError

NUMERICAL_ERRORS = (QuadratureError, ModelEvaluationError, RecurrenceError, FloatingPointError,
                    np.linalg.LinAlgError, ZeroDivisionError, OverflowError)


def _fmt(x):
    return repr(float(x))


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _beta_tag(thermal):
    return "inf" if math.isinf(thermal.beta) else _fmt(thermal.beta)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return "inf" if math.isinf(x) else x
    if isinstance(x, np.integer):
        return int(x)
    return x


# ---------------------------------------------------------------------------
# commands; each returns (header, rows, extra files, results)


def run_curve(cfg, thermal, workers):
    spec = config.family(cfg).spec()
    taus = config.tau_grid(cfg)
    curve = energy_curve(spec, taus, config.grid(cfg), thermal, workers=workers)
    return ("tau", "energy_per_site"), zip(curve.tau, curve.energy), {}, {}


def run_sweep(cfg, thermal, workers):
    sw = sweep_plateau(config.family(cfg), config.sweep_values(cfg), cfg["sweep"]["target"], config.grid(cfg),
                       thermal, tau=config.tau_value(cfg), workers=workers)
    return ("param", "value_per_site"), zip(sw.values, sw.energy), {}, {"parameter": sw.parameter}


def run_kinks(cfg, thermal, workers):
    sw = sweep_plateau(config.family(cfg), config.sweep_values(cfg), cfg["sweep"]["target"], config.grid(cfg),
                       thermal, tau=config.tau_value(cfg), workers=workers)
    report = detect_kinks(sw, cfg["kinks"]["threshold"])
    flat = plateau_regions(sw, cfg["kinks"]["flatness_tol"])
    kinks = (("param", "second_difference"), report.points)
    return (("param", "value_per_site"), zip(sw.values, sw.energy), {"kinks": kinks},
            {"parameter": sw.parameter, "kinks": report.locations, "plateaus": flat})


def run_power(cfg, thermal, workers):
    power, tau = max_power(config.family(cfg).spec(), config.grid(cfg), thermal, config.tau_grid(cfg),
                           workers=workers)
    return ("p_max_per_site", "tau_at_max"), [(power, tau)], {}, {}


def run_scaling(cfg, thermal, workers):
    offset = cfg["grid"].get("offset", "half")
    res = power_scaling(config.family(cfg).spec(), cfg["scaling"]["n"], config.tau_grid(cfg), thermal, offset,
                        workers=workers)
    rows = [(int(n), float(p)) for n, p in zip(res.n, res.p_max)]
    return ("N", "p_max"), rows, {}, {"slope": res.slope, "intercept": res.intercept, "r2": res.r2}


def run_recurrence(cfg, thermal, workers):
    rec, tau = cfg["recurrence"], cfg["tau"]
    n = cfg["grid"]["n"]
    offset = cfg["grid"]["offset"]
    if "sweep" in cfg:
        sw = sweep_recurrence_max(config.family(cfg), config.sweep_values(cfg), n, cfg["sweep"]["target"], thermal,
                                  tau.get("max"), tau.get("step"), rec["window"], rec["factor"], offset, workers)
        return (("param", "value_per_site"), zip(sw.values, sw.energy), {},
                {"parameter": sw.parameter, "no_onset": sw.metadata["no_onset"]})
    r = recurrence_profile(config.family(cfg).spec(), n, thermal, tau.get("max"), tau.get("step"), rec["window"],
                           rec["factor"], offset, workers)
    results = {"plateau_window": list(r.plateau_window), "plateau_mean": r.plateau_mean, "onset": r.onset,
               "amplitude_before": r.amplitude_before, "amplitude_plateau": r.amplitude_plateau,
               "amplitude_after": r.amplitude_after, "e_max": r.e_max, "tau_at_max": r.tau_at_max}
    return ("tau", "energy_per_site"), zip(r.tau, r.energy), {}, results


COMMANDS = {"curve": run_curve, "sweep": run_sweep, "kinks": run_kinks, "power": run_power,
            "scaling": run_scaling, "recurrence": run_recurrence}


def _grid_convention(cfg):
    g = cfg["grid"]
    if g["mode"] == "thermodynamic":
        return f"thermodynamic limit, adaptive Gauss-Kronrod on (-pi, pi), rtol {g['rtol']:g}"
    if g["offset"] == "half":
        return "k_j = -pi + 2 pi (j + 1/2)/N, j = 0..N-1"
    return "k_j = -pi + 2 pi j/N, j = 0..N-1"


def execute(cfg, out_dir: Path, workers: int = 1, seed=None):
    """Run a resolved configuration; returns the manifest dictionary."""
    out_dir.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    thermals = config.thermals(cfg)
    fn = COMMANDS[cfg["command"]]
    outputs, results = [], []
    for thermal in thermals:
        header, rows, extra, res = fn(cfg, thermal, workers)
        suffix = f"_beta-{_beta_tag(thermal)}" if len(thermals) > 1 else ""
        name = f"{cfg['command']}{suffix}.csv"
        write_csv(out_dir / name, header, rows)
        outputs.append(name)
        for key, (xheader, xrows) in extra.items():
            xname = f"{key}{suffix}.csv"
            write_csv(out_dir / xname, xheader, xrows)
            outputs.append(xname)
        results.append({"beta": _beta_tag(thermal), **res})
    manifest = {
        "quenchbat_version": __version__,
        "command": cfg["command"],
        "config_format": config.CONFIG_FORMAT,
        "config": cfg,
        "grid_convention": _grid_convention(cfg),
        "backend": BACKEND,
        "workers": workers,
        "seed": seed,
        "wall_time_s": time.perf_counter() - start,
        "outputs": outputs,
        "results": results,
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(_jsonable(manifest), fh, indent=2)
        fh.write("\n")
    return manifest


def _workers(arg):
    if arg is not None:
        return arg
    env = os.environ.get("QUENCHBAT_WORKERS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise config.ConfigError("QUENCHBAT_WORKERS", f"expected an integer, got {env!r}") from None
        if value < 1:
            raise config.ConfigError("QUENCHBAT_WORKERS", "must be at least 1")
        return value
    return 1


def _preflight(cfg):
    """Build the first quench so model and quench errors count as config errors."""
    fam = config.family(cfg)
    if "sweep" in cfg:
        fam.spec(float(config.sweep_values(cfg)[0]), cfg["sweep"]["target"])
    else:
        fam.spec()


def build_parser():
    p = argparse.ArgumentParser(prog="quenchbat", description=__doc__.splitlines()[0])
    p.add_argument("command", nargs="?", choices=sorted(COMMANDS),
                   help="overrides the 'command' entry of the configuration")
    p.add_argument("--config", required=True, help="TOML configuration or a previous manifest.json")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: $QUENCHBAT_WORKERS or 1)")
    p.add_argument("--out", default=".", help="output directory (default: current directory)")
    p.add_argument("--seed", type=int, default=None, help="recorded in the manifest; the pipeline is deterministic")
    p.add_argument("--version", action="version", version=f"quenchbat {__version__}")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.workers is not None and args.workers < 1:
            raise config.ConfigError("--workers", "must be at least 1")
        workers = _workers(args.workers)
        cfg = config.resolve(config.load(args.config), args.command)
        _preflight(cfg)
    except (config.ConfigError, ProtocolError, KeyError, ValueError) as exc:
        print(f"quenchbat: config error: {exc}", file=sys.stderr)
        return 2
    try:
        with np.errstate(over="ignore", under="ignore"):
            manifest = execute(cfg, Path(args.out), workers, args.seed)
    except (config.ConfigError, ProtocolError) as exc:
        print(f"quenchbat: config error: {exc}", file=sys.stderr)
        return 2
    except NUMERICAL_ERRORS + (ValueError,) as exc:
        print(f"quenchbat: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {', '.join(manifest['outputs'])} and manifest.json to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
