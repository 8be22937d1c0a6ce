"""Config-driven scenario runner.

Commands::

    survamp amplitude   --config cfg.json [--output-dir DIR] [--format csv|json]
    survamp hamiltonian --config cfg.json [--output-dir DIR] [--format csv|json]
    survamp crossover   --config cfg.json [--output-dir DIR]
    survamp selftest

Configs are strict UTF-8 JSON (unknown keys are rejected).  Exit codes:
0 success, 1 selftest failure, 2 config error, 3 numerical failure.
Identical configs produce byte-identical outputs; numeric CSV columns carry
17 significant digits.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import asymptotics, dynamics, quadrature, selftest as selftest_mod
from .asymptotics import AsymptoticOrder
from .densities import DensityKind, EnergyDensity, make_lorentzian, make_power_threshold
from .grids import TimeGrid, linear_grid, log_grid
from .quadrature import Method, QuadratureConfig, QuadratureError

__all__ = ["ScenarioConfig", "ConfigError", "load_config", "run_amplitude",
           "run_hamiltonian", "run_crossover", "run_selftest", "main"]

EXIT_OK = 0
EXIT_SELFTEST = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    """Invalid scenario configuration; message names the offending field."""


@dataclass(frozen=True)
class ScenarioConfig:
    hbar: float
    density: EnergyDensity
    grid: TimeGrid
    quadrature: QuadratureConfig
    order: int                      # 0 disables asymptotic columns
    outputs: dict                   # logical name -> path
    workers: int = 4


# --------------------------------------------------------------------------
# config parsing (strict)
# --------------------------------------------------------------------------

def _require_keys(block: dict, allowed: set, required: set, where: str):
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"unknown key '{sorted(unknown)[0]}' in {where}")
    missing = required - set(block)
    if missing:
        raise ConfigError(f"missing key '{sorted(missing)[0]}' in {where}")


def _number(block, key, where, positive=False):
    v = block[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number")
    if positive and not v > 0:
        raise ConfigError(f"{where}.{key} must be positive")
    return float(v)


def _parse_density(block) -> EnergyDensity:
    if not isinstance(block, dict):
        raise ConfigError("density must be an object")
    kind = block.get("kind")
    if kind == "truncated_lorentzian":
        _require_keys(block, {"kind", "e_min", "e0", "gamma0"},
                      {"kind", "e_min", "e0", "gamma0"}, "density")
        try:
            return make_lorentzian(_number(block, "e_min", "density"),
                                   _number(block, "e0", "density"),
                                   _number(block, "gamma0", "density"))
        except ValueError as exc:
            raise ConfigError(f"density: {exc}") from exc
    if kind == "power_threshold":
        _require_keys(block, {"kind", "e_min", "lambda", "eta_scale"},
                      {"kind", "e_min", "lambda", "eta_scale"}, "density")
        try:
            return make_power_threshold(_number(block, "e_min", "density"),
                                        _number(block, "lambda", "density"),
                                        _number(block, "eta_scale", "density"))
        except ValueError as exc:
            raise ConfigError(f"density: {exc}") from exc
    raise ConfigError(
        "density.kind must be 'truncated_lorentzian' or 'power_threshold'"
    )


def _parse_grid(block) -> TimeGrid:
    if not isinstance(block, dict):
        raise ConfigError("time_grid must be an object")
    _require_keys(block, {"kind", "t_min", "t_max", "points"},
                  {"kind", "t_min", "t_max", "points"}, "time_grid")
    kind = block["kind"]
    if kind not in ("log", "linear"):
        raise ConfigError("time_grid.kind must be 'log' or 'linear'")
    t_min = _number(block, "t_min", "time_grid")
    t_max = _number(block, "t_max", "time_grid")
    points = block["points"]
    if isinstance(points, bool) or not isinstance(points, int):
        raise ConfigError("time_grid.points must be an integer")
    if points < 2:
        raise ConfigError("time_grid.points must be at least 2")
    if kind == "log" and t_min <= 0:
        raise ConfigError("time_grid.t_min must be positive for log grids")
    try:
        return (log_grid if kind == "log" else linear_grid)(t_min, t_max, points)
    except ValueError as exc:
        raise ConfigError(f"time_grid: {exc}") from exc


def _parse_quadrature(block) -> QuadratureConfig:
    if block is None:
        return QuadratureConfig()
    if not isinstance(block, dict):
        raise ConfigError("quadrature must be an object")
    _require_keys(block, {"rel_tol", "abs_tol", "max_panels", "method"}, set(),
                  "quadrature")
    kwargs = {}
    if "rel_tol" in block:
        kwargs["rel_tol"] = _number(block, "rel_tol", "quadrature", positive=True)
    if "abs_tol" in block:
        kwargs["abs_tol"] = _number(block, "abs_tol", "quadrature")
    if "max_panels" in block:
        mp = block["max_panels"]
        if isinstance(mp, bool) or not isinstance(mp, int):
            raise ConfigError("quadrature.max_panels must be an integer")
        kwargs["max_panels"] = mp
    if "method" in block:
        try:
            kwargs["method"] = Method(block["method"])
        except ValueError:
            raise ConfigError(
                "quadrature.method must be 'double_exponential_fourier' or "
                "'panel_series_acceleration'"
            ) from None
    try:
        return QuadratureConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"quadrature: {exc}") from exc


def load_config(path: str, output_dir: str = ".") -> ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    _require_keys(
        raw,
        {"hbar", "density", "time_grid", "quadrature", "order", "outputs", "workers"},
        {"density", "time_grid"},
        "config",
    )
    hbar = _number(raw, "hbar", "config", positive=True) if "hbar" in raw else 1.0
    density = _parse_density(raw["density"])
    grid = _parse_grid(raw["time_grid"])
    qcfg = _parse_quadrature(raw.get("quadrature"))
    order = raw.get("order", 2)
    if isinstance(order, bool) or not isinstance(order, int) or not (0 <= order <= 4):
        raise ConfigError("order must be an integer in 0..4")
    workers = raw.get("workers", 4)
    if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
        raise ConfigError("workers must be a positive integer")

    outputs_block = raw.get("outputs", {})
    if not isinstance(outputs_block, dict):
        raise ConfigError("outputs must be an object")
    _require_keys(outputs_block, {"csv", "json"}, set(), "outputs")
    outputs = {}
    for name, default in (("csv", "table.csv"), ("json", "summary.json")):
        rel = outputs_block.get(name, default)
        if not isinstance(rel, str) or not rel:
            raise ConfigError(f"outputs.{name} must be a nonempty path string")
        full = rel if os.path.isabs(rel) else os.path.join(output_dir, rel)
        parent = os.path.dirname(full) or "."
        try:
            os.makedirs(parent, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"outputs.{name}: cannot create directory: {exc}") from exc
        if not os.access(parent, os.W_OK):
            raise ConfigError(f"outputs.{name}: directory {parent!r} is not writable")
        outputs[name] = full
    return ScenarioConfig(hbar=hbar, density=density, grid=grid, quadrature=qcfg,
                          order=order, outputs=outputs, workers=workers)


# --------------------------------------------------------------------------
# output helpers
# --------------------------------------------------------------------------

def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _density_summary(d: EnergyDensity) -> dict:
    if d.kind is DensityKind.TRUNCATED_LORENTZIAN:
        return {"kind": d.kind.value, "e_min": d.e_min, "e0": d.params.e0,
                "gamma0": d.params.gamma0, "norm_constant": d.norm_constant}
    return {"kind": d.kind.value, "e_min": d.e_min, "lambda": d.params.lam,
            "eta_scale": d.params.eta_scale, "norm_constant": d.norm_constant}


def _reference_energy(d: EnergyDensity) -> float:
    """E_u^0 of the scenario: Lorentzian pole position, or the density mode
    for the threshold family."""
    if d.kind is DensityKind.TRUNCATED_LORENTZIAN:
        return d.params.e0
    return d.e_min + d.params.lam * d.params.eta_scale


def _map_grid(fn, grid: TimeGrid, workers: int):
    """Apply fn to every grid time; returns (results, errors) with results
    ordered by t regardless of completion order."""
    results = [None] * len(grid)
    errors = []
    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = [pool.submit(fn, float(t)) for t in grid.times]
            for i, fut in enumerate(futs):
                try:
                    results[i] = fut.result()
                except (QuadratureError, dynamics.AmplitudeUnderflowError, ValueError) as exc:
                    errors.append((float(grid.times[i]), str(exc)))
    else:
        for i, t in enumerate(grid.times):
            try:
                results[i] = fn(float(t))
            except (QuadratureError, dynamics.AmplitudeUnderflowError, ValueError) as exc:
                errors.append((float(t), str(exc)))
    return results, errors


# --------------------------------------------------------------------------
# workflows
# --------------------------------------------------------------------------

def run_amplitude(cfg: ScenarioConfig, fmt: str = "csv") -> int:
    d, hbar = cfg.density, cfg.hbar
    order = AsymptoticOrder(cfg.order) if cfg.order > 0 else None

    def one(t):
        a = quadrature.amplitude(d, t, hbar, cfg.quadrature)
        row = [t, a.real, a.imag, abs(a) ** 2,
               math.log10(abs(a) ** 2) if a != 0 else float("-inf")]
        if order is not None:
            if d.kind is DensityKind.TRUNCATED_LORENTZIAN:
                asym = asymptotics.expansion_jump(d, t, hbar, order)
            else:
                asym = asymptotics.expansion_threshold(d, t, hbar, order)
            row += [asym.real, asym.imag, abs(asym - a) / abs(a)]
        return row

    rows, errors = _map_grid(one, cfg.grid, cfg.workers)
    rows = [r for r in rows if r is not None]

    header = ["t", "re_a", "im_a", "survival", "log10_survival"]
    if order is not None:
        header += ["re_a_asym", "im_a_asym", "rel_dev"]

    max_violation = max((r[3] ** 0.5 - 1.0 for r in rows), default=float("nan"))
    summary = {
        "workflow": "amplitude",
        "hbar": hbar,
        "density": _density_summary(d),
        "grid": {"t_min": float(cfg.grid.times[0]), "t_max": float(cfg.grid.times[-1]),
                 "points": len(cfg.grid)},
        "order": cfg.order,
        "max_unitarity_violation": max_violation,
        "failed_points": [{"t": t, "error": msg} for t, msg in errors],
    }
    if d.kind is DensityKind.TRUNCATED_LORENTZIAN:
        cr = dynamics.crossover_time(d, hbar)
        summary["t_as"] = cr.t_as

    if fmt == "json":
        _write_json(cfg.outputs["json"],
                    {"summary": summary,
                     "rows": [dict(zip(header, r)) for r in rows]})
    else:
        _write_csv(cfg.outputs["csv"], header, rows)
        _write_json(cfg.outputs["json"], summary)
    if errors:
        print(f"warning: {len(errors)} grid points failed; partial table written",
              file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def run_hamiltonian(cfg: ScenarioConfig, fmt: str = "csv") -> int:
    d, hbar = cfg.density, cfg.hbar
    order = AsymptoticOrder(cfg.order) if cfg.order > 0 else AsymptoticOrder(2)

    def one(t):
        h = dynamics.effective_hamiltonian(d, t, hbar, cfg.quadrature)
        h_asym = asymptotics.h_infinity(d, t, hbar, order)
        gamma_u = -2.0 * h.imag
        return [t, h.real, gamma_u, h_asym.real, -2.0 * h_asym.imag,
                gamma_u * t / hbar]

    rows, errors = _map_grid(one, cfg.grid, cfg.workers)
    rows = [r if r is not None else [float(t)] + [float("nan")] * 5
            for t, r in zip(cfg.grid.times, rows)]

    header = ["t", "e_u", "gamma_u", "e_u_asym", "gamma_u_asym", "gamma_t_over_hbar"]

    # limiting gamma * t / hbar over the last decade of usable points
    t_hi = float(cfg.grid.times[-1])
    tail = [r for r in rows if r[0] >= t_hi / 10.0 and not math.isnan(r[5])]
    gamma_t_tail = float(np.mean([r[5] for r in tail])) if tail else float("nan")

    summary = {
        "workflow": "hamiltonian",
        "hbar": hbar,
        "density": _density_summary(d),
        "grid": {"t_min": float(cfg.grid.times[0]), "t_max": t_hi,
                 "points": len(cfg.grid)},
        "order": order.n,
        "e_u0_reference": _reference_energy(d),
        "gamma_t_over_hbar_last_decade": gamma_t_tail,
        "failed_points": [{"t": t, "error": msg} for t, msg in errors],
    }
    try:
        samples = [dynamics.EffectiveSample(t=r[0], e_u=r[1], gamma_u=r[2],
                                            survival=1.0)
                   for r in rows if not math.isnan(r[1])]
        if not samples:
            raise ValueError("no usable grid points")
        series = dynamics.EffectiveSeries(samples=samples, errors=[])
        t_inf = dynamics.energy_inequality_time(
            d, cfg.grid, hbar, _reference_energy(d), cfg.quadrature, series=series)
        summary["t_infinity"] = t_inf
    except ValueError as exc:
        summary["t_infinity"] = None
        summary["t_infinity_error"] = str(exc)

    if fmt == "json":
        _write_json(cfg.outputs["json"],
                    {"summary": summary,
                     "rows": [dict(zip(header, r)) for r in rows]})
    else:
        _write_csv(cfg.outputs["csv"], header, rows)
        _write_json(cfg.outputs["json"], summary)
    if errors:
        print(f"warning: {len(errors)} grid points marked nan", file=sys.stderr)
    return EXIT_OK


def run_crossover(cfg: ScenarioConfig) -> int:
    d = cfg.density
    if d.kind is not DensityKind.TRUNCATED_LORENTZIAN:
        print("error: the crossover equation balances the exponential era "
              "against the power tail through omega(e_min) > 0; it is defined "
              "for jump-class (truncated Lorentzian) densities only",
              file=sys.stderr)
        return EXIT_CONFIG
    cr = dynamics.crossover_time(d, cfg.hbar)
    payload = {
        "workflow": "crossover",
        "hbar": cfg.hbar,
        "density": _density_summary(d),
        "t_as": cr.t_as,
        "residual": cr.residual,
        "bracket": [cr.bracket[0], cr.bracket[1]],
        "iterations": cr.iterations,
        "t_as_lifetimes": cr.t_as * d.params.gamma0 / cfg.hbar,
    }
    _write_json(cfg.outputs["json"], payload)
    print(f"t_as = {cr.t_as:.6f} ({payload['t_as_lifetimes']:.3f} lifetimes), "
          f"residual {cr.residual:.2e}")
    return EXIT_OK


def run_selftest(gamma_perturbation: float = 0.0) -> int:
    ok, lines, first_failure = selftest_mod.run_all(
        gamma_perturbation=gamma_perturbation, stream=sys.stdout)
    if ok:
        print(f"selftest: all {len(lines)} properties passed")
        return EXIT_OK
    print(f"selftest: FAILED at property '{first_failure}'")
    return EXIT_SELFTEST


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="survamp",
        description="Survival amplitude, decay law and effective Hamiltonian "
                    "of an unstable state from its energy density.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, desc in (
        ("amplitude", "amplitude/decay-law table over a time grid"),
        ("hamiltonian", "instantaneous energy and decay rate table"),
        ("crossover", "exponential-to-power-law crossover time"),
    ):
        p = sub.add_parser(name, help=desc)
        p.add_argument("--config", required=True, help="scenario config (JSON)")
        p.add_argument("--output-dir", default=".", help="base directory for outputs")
        if name != "crossover":
            p.add_argument("--format", choices=("csv", "json"), default="csv",
                           help="table serialization (default csv)")
    p = sub.add_parser("selftest", help="run the oracle and invariant suites")
    p.add_argument("--perturb-gamma", type=float, default=0.0,
                   help=argparse.SUPPRESS)  # testing hook
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "selftest":
        return run_selftest(gamma_perturbation=args.perturb_gamma)
    try:
        cfg = load_config(args.config, output_dir=args.output_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "amplitude":
            return run_amplitude(cfg, fmt=args.format)
        if args.command == "hamiltonian":
            return run_hamiltonian(cfg, fmt=args.format)
        return run_crossover(cfg)
    except (QuadratureError, dynamics.AmplitudeUnderflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
