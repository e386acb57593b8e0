"""Batch front door: JSON config in, deterministic CSV/JSON tables out.

Invocation::

    eventclock <experiment> --config <path> [--out <path>] [--format csv|json]

Experiments: spin-run, zeno-sweep, detect, commutators, arrival-evolve,
arrival-backflow.  The config file is a single flat JSON object; unknown keys
are rejected and validation happens before any output file is touched.
Identical configs produce byte-identical output files: numbers are printed
with 12 significant digits, column order is fixed, and the optional sampling
mode demands an explicit seed.  Output is written to a temporary file and
atomically renamed, so no partial files ever appear.

Exit codes: 0 success, 2 config validation failure (the message names the
offending key), 3 numerical certification failure.  All quantities are in
hbar = m = 1 natural units.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from math import pi

import numpy as np

from . import arrival, detector, protocol, spin_example
from .hilbert import CertificationError

__all__ = ["ConfigError", "RunConfig", "load_run_config", "run", "main"]

FORMATS = ("csv", "json")

CSV_COLUMNS = {
    "spin-run": ("t", "p_m", "m"),
    "zeno-sweep": ("k", "delta", "survival_at_tau", "delta_e", "resolvability"),
    "detect": ("k", "t", "p_detect", "survival"),
    "commutators": ("t1", "t2", "same_time_norm", "two_time_norm"),
    "arrival-evolve": ("t", "p_plus", "j_origin"),
    "arrival-backflow": ("p1", "p2", "s1", "s2", "w", "phi", "t_star", "j_min"),
}


class ConfigError(ValueError):
    """Configuration rejected before any computation or output."""


@dataclass(frozen=True)
class RunConfig:
    """A validated run request: experiment, parameters, destination, format."""

    experiment: str
    parameters: dict
    output_path: str
    format: str


# ---------------------------------------------------------------------------
# parameter extraction
# ---------------------------------------------------------------------------

def _require_number(params, key, default=None):
    if key not in params:
        if default is None:
            raise ConfigError(f"config key '{key}' is required")
        return default
    value = params[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"config key '{key}' must be a number")
    return float(value)


def _require_positive(params, key, default=None):
    value = _require_number(params, key, default)
    if value <= 0:
        raise ConfigError(f"config key '{key}' must be positive")
    return value


def _require_int(params, key, default=None, minimum=1):
    if key not in params:
        if default is None:
            raise ConfigError(f"config key '{key}' is required")
        return default
    value = params[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"config key '{key}' must be an integer")
    if value < minimum:
        raise ConfigError(f"config key '{key}' must be at least {minimum}")
    return int(value)


def _require_choice(params, key, choices, default):
    value = params.get(key, default)
    if value not in choices:
        raise ConfigError(f"config key '{key}' must be one of {sorted(choices)}")
    return value


def _require_number_list(params, key, default):
    if key not in params:
        return list(default)
    value = params[key]
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return [float(value)]
    if not isinstance(value, list) or not value:
        raise ConfigError(f"config key '{key}' must be a number or non-empty list")
    out = []
    for item in value:
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise ConfigError(f"config key '{key}' must contain numbers only")
        out.append(float(item))
    return out


def _reject_unknown(params, allowed, experiment):
    for key in params:
        if key not in allowed:
            raise ConfigError(f"config key '{key}' is not recognized for {experiment}")


def _spin_config(params):
    a = _require_number(params, "a", 0.0)
    b = _require_number(params, "b", 1.0)
    if abs(a * a + b * b - 1.0) > 1e-12:
        raise ConfigError("config key 'b': amplitudes must satisfy a^2 + b^2 = 1")
    total_time = _require_positive(params, "total_time", 1.0)
    convention = _require_choice(
        params, "g_convention", spin_example.GCONVENTIONS, "paper"
    )
    return a, b, total_time, convention


# ---------------------------------------------------------------------------
# experiment handlers: params -> rows matching CSV_COLUMNS[experiment]
# ---------------------------------------------------------------------------

def _run_spin_run(params):
    _reject_unknown(
        params, {"a", "b", "total_time", "g_convention", "t_max", "samples"}, "spin-run"
    )
    a, b, total_time, convention = _spin_config(params)
    t_max = _require_positive(params, "t_max", total_time)
    samples = _require_int(params, "samples", 201, minimum=3)
    cfg = spin_example.SpinExampleConfig(
        a=a, b=b, total_time=total_time, g_convention=convention
    )
    model = spin_example.build(cfg)
    times = np.linspace(0.0, t_max, samples)
    series = detector.pm_of_t(model.correlation, model.hamiltonian, model.psi0, times)
    density = detector.m_of_t(series)
    return [
        (float(t), float(p), float(m))
        for t, p, m in zip(series.times, series.values, density.values)
    ]


def _run_zeno_sweep(params):
    _reject_unknown(
        params, {"a", "b", "total_time", "g_convention", "tau", "k_values"}, "zeno-sweep"
    )
    a, b, total_time, convention = _spin_config(params)
    tau = _require_positive(params, "tau", total_time)
    raw_k = params.get("k_values", [10, 100, 1000])
    if not isinstance(raw_k, list) or not raw_k or any(
        isinstance(k, bool) or not isinstance(k, int) or k < 1 for k in raw_k
    ):
        raise ConfigError("config key 'k_values' must be a non-empty list of positive integers")
    cfg = spin_example.SpinExampleConfig(
        a=a, b=b, total_time=total_time, g_convention=convention
    )
    model = spin_example.build(cfg)
    rows = protocol.zeno_sweep(model.correlation, model.hamiltonian, model.psi0, tau, raw_k)
    return [
        (int(k), row.delta, row.survival_at_tau, row.delta_e, row.resolvability)
        for k, row in zip(raw_k, rows)
    ]


def _run_detect(params):
    _reject_unknown(
        params,
        {"a", "b", "total_time", "g_convention", "delta", "k_max",
         "survival_floor", "samples", "seed"},
        "detect",
    )
    a, b, total_time, convention = _spin_config(params)
    delta = _require_positive(params, "delta", total_time / 8.0)
    k_max = _require_int(params, "k_max", 10)
    floor = _require_number(params, "survival_floor", 1e-12)
    if not 0.0 <= floor < 1.0:
        raise ConfigError("config key 'survival_floor' must lie in [0, 1)")
    samples = _require_int(params, "samples", 0, minimum=1) if "samples" in params else 0
    if samples and "seed" not in params:
        raise ConfigError("config key 'seed' is required when 'samples' is given")
    seed = _require_int(params, "seed", 0, minimum=0) if "seed" in params else None
    cfg = spin_example.SpinExampleConfig(
        a=a, b=b, total_time=total_time, g_convention=convention, delta=delta
    )
    model = spin_example.build(cfg)
    sched = protocol.DetectionSchedule(delta=delta, k_max=k_max, survival_floor=floor)
    if samples:
        dist = protocol.sample_detection_distribution(
            model.correlation, model.hamiltonian, model.psi0, sched, samples, seed
        )
    else:
        dist = protocol.detection_distribution(
            model.correlation, model.hamiltonian, model.psi0, sched
        )
    return [
        (k + 1, float(t), float(p), float(s))
        for k, (t, p, s) in enumerate(zip(dist.times, dist.p_detect, dist.survival))
    ]


def _run_commutators(params):
    _reject_unknown(
        params, {"total_time", "g_convention", "t1", "t2"}, "commutators"
    )
    total_time = _require_positive(params, "total_time", 1.0)
    convention = _require_choice(
        params, "g_convention", spin_example.GCONVENTIONS, "paper"
    )
    t1s = _require_number_list(params, "t1", [total_time / 8.0])
    t2s = _require_number_list(params, "t2", [total_time / 4.0])
    if len(t1s) != len(t2s):
        raise ConfigError("config key 't2' must have the same length as 't1'")
    for t1, t2 in zip(t1s, t2s):
        if t1 < 0 or t2 < 0:
            raise ConfigError("config key 't1': times must be non-negative")
        if t1 == t2:
            raise ConfigError("config key 't2': each pair needs two distinct times")
    model = spin_example.build(
        spin_example.SpinExampleConfig(total_time=total_time, g_convention=convention)
    )
    rows = []
    for t1, t2 in zip(t1s, t2s):
        diag = detector.commutator_diagnostics(model.correlation, model.hamiltonian, t1, t2)
        rows.append((t1, t2, diag.same_time_norm, diag.two_time_norm))
    return rows


def _grid_params(params):
    n = _require_int(params, "grid_n", arrival.DEFAULT_N, minimum=8)
    if n & (n - 1):
        raise ConfigError("config key 'grid_n' must be a power of two")
    x_min = _require_number(params, "grid_x_min", arrival.DEFAULT_X_MIN)
    if x_min >= 0:
        raise ConfigError("config key 'grid_x_min' must be negative")
    return n, x_min


def _run_arrival_evolve(params):
    _reject_unknown(
        params, {"x0", "sigma", "p0", "t_max", "dt", "grid_n", "grid_x_min"},
        "arrival-evolve",
    )
    x0 = _require_number(params, "x0", -20.0)
    sigma = _require_positive(params, "sigma", 2.0)
    p0 = _require_number(params, "p0", 1.0)
    t_max = _require_positive(params, "t_max", 40.0)
    dt = _require_positive(params, "dt", 0.5)
    n, x_min = _grid_params(params)
    packet = arrival.gaussian_packet(x0, sigma, p0, n=n, x_min=x_min)
    count = max(1, int(round(t_max / dt)))
    times = np.linspace(0.0, t_max, count + 1)
    series = arrival.arrival_series(packet, times)
    return [
        (float(t), float(p), float(j))
        for t, p, j in zip(series.times, series.p_plus, series.j_origin)
    ]


def _run_arrival_backflow(params):
    _reject_unknown(
        params,
        {"p1", "p2", "s1", "s2", "w_values", "phi_values",
         "t_min", "t_max", "t_step", "grid_n", "grid_x_min"},
        "arrival-backflow",
    )
    p1 = _require_positive(params, "p1", 1.0)
    p2 = _require_positive(params, "p2", 3.0)
    s1 = _require_positive(params, "s1", 0.5)
    s2 = _require_positive(params, "s2", 0.5)
    w_values = _require_number_list(params, "w_values", [0.1 * i for i in range(1, 10)])
    phi_values = _require_number_list(params, "phi_values", [i * pi / 8.0 for i in range(16)])
    for w in w_values:
        if not 0.0 <= w <= 1.0:
            raise ConfigError("config key 'w_values' entries must lie in [0, 1]")
    for phi in phi_values:
        if not 0.0 <= phi < 2.0 * pi:
            raise ConfigError("config key 'phi_values' entries must lie in [0, 2*pi)")
    t_min = _require_number(params, "t_min", -6.0)
    t_max = _require_number(params, "t_max", 6.0)
    t_step = _require_positive(params, "t_step", 0.01)
    if t_max <= t_min:
        raise ConfigError("config key 't_max' must exceed 't_min'")
    n, x_min = _grid_params(params)
    count = max(1, int(round((t_max - t_min) / t_step)))
    t_grid = np.linspace(t_min, t_max, count + 1)
    candidates = tuple(
        arrival.BackflowCandidate(p1=p1, p2=p2, s1=s1, s2=s2, w=w, phi=phi)
        for w in w_values
        for phi in phi_values
    )
    result = arrival.backflow_scan(candidates, t_grid, n=n, x_min=x_min)
    best = result.best
    return [(p1, p2, s1, s2, best.w, best.phi, result.t_star, result.j_min)]


HANDLERS = {
    "spin-run": _run_spin_run,
    "zeno-sweep": _run_zeno_sweep,
    "detect": _run_detect,
    "commutators": _run_commutators,
    "arrival-evolve": _run_arrival_evolve,
    "arrival-backflow": _run_arrival_backflow,
}


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------

def _format_number(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


def _render_csv(columns, rows) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_format_number(v) for v in row))
    return "\n".join(lines) + "\n"


def _render_json(experiment, columns, rows) -> str:
    payload = {
        "experiment": experiment,
        "units": "hbar = m = 1 natural units",
        "columns": list(columns),
        "rows": [
            [int(v) if isinstance(v, (int, np.integer)) else float(v) for v in row]
            for row in rows
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".eventclock-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_run_config(experiment: str, config_path: str, out: str | None, fmt: str | None) -> RunConfig:
    """Assemble a RunConfig from the subcommand, config file and overrides."""
    if experiment not in HANDLERS:
        raise ConfigError(f"unknown experiment '{experiment}'")
    try:
        with open(config_path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except OSError as err:
        raise ConfigError(f"cannot read config file: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config file is not valid JSON: {err}") from err
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a single JSON object")
    params = dict(raw)
    fmt = fmt or params.pop("format", None) or "csv"
    if fmt not in FORMATS:
        raise ConfigError(f"config key 'format' must be one of {list(FORMATS)}")
    output_path = out or params.pop("output_path", None) or f"{experiment}.{fmt}"
    if not isinstance(output_path, str) or not output_path:
        raise ConfigError("config key 'output_path' must be a non-empty string")
    return RunConfig(experiment=experiment, parameters=params, output_path=output_path, format=fmt)


def run(config: RunConfig) -> int:
    """Validate, execute and atomically write one experiment."""
    rows = HANDLERS[config.experiment](config.parameters)
    columns = CSV_COLUMNS[config.experiment]
    if config.format == "csv":
        text = _render_csv(columns, rows)
    else:
        text = _render_json(config.experiment, columns, rows)
    _atomic_write(config.output_path, text)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="eventclock",
        description="Measurement-time statistics experiments (hbar = m = 1)",
    )
    parser.add_argument("experiment", choices=sorted(HANDLERS))
    parser.add_argument("--config", required=True, help="path to a flat JSON config")
    parser.add_argument("--out", default=None, help="output file path override")
    parser.add_argument("--format", default=None, choices=FORMATS, help="output format override")
    args = parser.parse_args(argv)
    try:
        config = load_run_config(args.experiment, args.config, args.out, args.format)
        status = run(config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except CertificationError as err:
        print(f"numerical certification failure: {err}", file=sys.stderr)
        return 3
    print(config.output_path)
    return status


if __name__ == "__main__":
    sys.exit(main())
