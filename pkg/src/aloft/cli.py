"""Command-line entry point: run scenarios on a wind field and write results.

Outputs land in the chosen directory: one trajectory CSV per scenario, an
``alpha_sweep.csv`` when a sweep is requested, and a ``summary.json`` tying
everything together. Exit codes: 0 on success, 2 for configuration problems,
3 for unreadable or malformed wind data. Errors print one JSON line on
stderr.
"""
from __future__ import annotations

import argparse
import csv
import datetime
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from .evaluation import (
    DEFAULT_HORIZON_STEPS,
    DEFAULT_MAX_MOVE_CELLS,
    DEFAULT_START_KM,
    ScenarioSpec,
    SimResult,
    alpha_sweep,
    fixed_altitude_baselines,
    omniscient_baseline,
    simulate,
)
from .forecast import ForecastConfig
from .objectives import ObjectiveKind, ObjectiveSpec
from .power import TurbineParams
from .sensing import SensorConfig
from .windfield import (
    DEFAULT_DT_MINUTES,
    DEFAULT_FIELD_STEPS,
    AltitudeGrid,
    SyntheticFieldSpec,
    WindCsvError,
    WindFieldGrid,
    generate_synthetic_field,
    load_wind_csv,
)

__all__ = ["main", "build_parser"]


class ConfigError(ValueError):
    """A flag or config-file problem that should exit with code 2."""


@dataclass
class RunConfig:
    wind_csv: Path | None
    synthetic: SyntheticFieldSpec
    steps: int
    dt_minutes: float
    sensors: list[SensorConfig]
    objectives: list[ObjectiveKind]
    alpha: float
    n_quantiles: int
    sweep_alphas: list[float] | None
    out_dir: Path
    params: TurbineParams
    grid: AltitudeGrid
    forecast: ForecastConfig
    horizon: int
    max_move: int
    h_start_km: float | None  # None: nearest level to the default start


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aloft",
        description="Altitude-control simulation for an airborne wind energy system.",
    )
    source = parser.add_argument_group("wind source (choose one)")
    source.add_argument("--wind", type=Path, metavar="PATH", help="wind field CSV")
    source.add_argument("--synthetic", action="store_true", help="generate a synthetic field")
    parser.add_argument("--steps", type=int, help="synthetic field length in time steps")
    parser.add_argument("--seed", type=int, help="seed for the synthetic field")
    parser.add_argument(
        "--sensors", help="comma-separated subset of: single, multiple, remote"
    )
    parser.add_argument(
        "--objectives", help="comma-separated subset of: expected, ucb, poi"
    )
    parser.add_argument("--alpha", type=float, help="confidence level for the ucb objective")
    parser.add_argument(
        "--sweep-alpha",
        metavar="START:STOP:STEP",
        help="also sweep the ucb confidence level over this range",
    )
    parser.add_argument("--out", type=Path, metavar="DIR", help="output directory")
    parser.add_argument("--config", type=Path, metavar="PATH", help="TOML settings file")
    return parser


def _parse_names(value, default: str, parse_one, what: str) -> list:
    """Parse a comma-separated string or TOML array of names, keeping order."""
    if value is None:
        value = default
    if isinstance(value, (list, tuple)):
        value = ",".join(str(v) for v in value)
    if not isinstance(value, str):
        raise ConfigError(f"{what} must be a string or list, got {value!r}")
    names = [piece for piece in (p.strip() for p in value.split(",")) if piece]
    if not names:
        raise ConfigError(f"no {what} given")
    seen: list = []
    for name in names:
        try:
            item = parse_one(name)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if item not in seen:
            seen.append(item)
    return seen


def _parse_sweep(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"sweep range must be START:STOP:STEP, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"sweep range must be numeric, got {text!r}") from None
    if step <= 0 or stop < start:
        raise ConfigError(f"sweep range must increase, got {text!r}")
    alphas = []
    k = 0
    while True:
        alpha = round(start + k * step, 10)
        if alpha > stop + 1e-12:
            break
        alphas.append(alpha)
        k += 1
    for alpha in alphas:
        if not 0.5 < alpha < 1.0:
            raise ConfigError(f"sweep alphas must lie in (0.5, 1), got {alpha}")
    return alphas


def _section(raw: dict, name: str, cls):
    table = raw.get(name, {})
    if not isinstance(table, dict):
        raise ConfigError(f"[{name}] must be a table")
    try:
        return cls(**table)
    except TypeError as exc:
        raise ConfigError(f"[{name}]: {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"[{name}]: {exc}") from None


def resolve_config(args: argparse.Namespace) -> RunConfig:
    raw: dict = {}
    if args.config is not None:
        try:
            raw = tomllib.loads(args.config.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML in {args.config}: {exc}") from None

    def pick(flag_value, key: str, default):
        if flag_value is not None:
            return flag_value
        return raw.get(key, default)

    wind_csv = pick(args.wind, "wind", None)
    if wind_csv is not None:
        wind_csv = Path(wind_csv)
    use_synthetic = args.synthetic or bool(raw.get("synthetic_field", False))
    if wind_csv is not None and use_synthetic:
        raise ConfigError("choose either --wind or --synthetic, not both")
    if wind_csv is None and not use_synthetic:
        raise ConfigError("choose a wind source: --wind PATH or --synthetic")

    try:
        params = _section(raw, "turbine", TurbineParams)
        grid = _section(raw, "grid", AltitudeGrid)
        forecast = _section(raw, "forecast", ForecastConfig)
        synthetic = _section(raw, "synthetic", SyntheticFieldSpec)
        if args.seed is not None:
            synthetic = replace(synthetic, seed=args.seed)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    run_table = raw.get("run", {})
    if not isinstance(run_table, dict):
        raise ConfigError("[run] must be a table")

    steps = pick(args.steps, "steps", DEFAULT_FIELD_STEPS)
    alpha = pick(args.alpha, "alpha", 0.54)
    sweep_text = pick(args.sweep_alpha, "sweep_alpha", None)
    sensors = _parse_names(
        pick(args.sensors, "sensors", None), "single,multiple,remote", SensorConfig.parse, "sensors"
    )
    objectives = _parse_names(
        pick(args.objectives, "objectives", None), "expected,ucb,poi", ObjectiveKind.parse, "objectives"
    )

    if not isinstance(steps, int) or steps < 2:
        raise ConfigError(f"steps must be an integer >= 2, got {steps!r}")
    if any(o is ObjectiveKind.UCB for o in objectives) and not 0.5 < alpha < 1.0:
        raise ConfigError(f"alpha must lie in (0.5, 1), got {alpha!r}")

    return RunConfig(
        wind_csv=wind_csv,
        synthetic=synthetic,
        steps=steps,
        dt_minutes=run_table.get("dt_minutes", DEFAULT_DT_MINUTES),
        sensors=sensors,
        objectives=objectives,
        alpha=float(alpha),
        n_quantiles=int(run_table.get("n_quantiles", 100)),
        sweep_alphas=_parse_sweep(sweep_text) if sweep_text is not None else None,
        out_dir=Path(pick(args.out, "out", "results")),
        params=params,
        grid=grid,
        forecast=forecast,
        horizon=int(run_table.get("horizon", DEFAULT_HORIZON_STEPS)),
        max_move=int(run_table.get("max_move", DEFAULT_MAX_MOVE_CELLS)),
        h_start_km=float(run_table["h_start"]) if "h_start" in run_table else None,
    )


def _objective_spec(kind: ObjectiveKind, config: RunConfig) -> ObjectiveSpec:
    if kind is ObjectiveKind.UCB:
        return ObjectiveSpec(kind=kind, alpha=config.alpha, n_quantiles=config.n_quantiles)
    return ObjectiveSpec(kind=kind, n_quantiles=config.n_quantiles)


def _write_trajectory_csv(path: Path, result: SimResult, fld: WindFieldGrid) -> None:
    grid = fld.grid
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["step", "time_label", "altitude_km", "u_km", "wind_mps", "p1_kw", "p2_kw", "p3_kw", "net_kw"]
        )
        for i in range(result.steps):
            dest = int(result.trajectory[i + 1])
            move_km = grid.cell * (dest - int(result.trajectory[i]))
            writer.writerow(
                [
                    i + 1,
                    fld.label(i + 1),
                    repr(grid.level_km(dest)),
                    repr(float(move_km)),
                    repr(float(result.wind_mps[i])),
                    repr(float(result.p1_kw[i])),
                    repr(float(result.p2_kw[i])),
                    repr(float(result.p3_kw[i])),
                    repr(float(result.net_kw[i])),
                ]
            )


def _result_summary(result: SimResult) -> dict:
    return {
        "avg_power_kw": result.avg_power_kw,
        "actualized_ratio": result.actualized_ratio,
        "net_energy_kwh": result.net_energy_kwh,
        "sum_p1_kwh": result.sum_p1_kwh,
        "sum_p2_kwh": result.sum_p2_kwh,
        "sum_p3_kwh": result.sum_p3_kwh,
        "duration_hours": result.duration_hours,
    }


def run(config: RunConfig, fld: WindFieldGrid, source: str) -> None:
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)

    omni = omniscient_baseline(fld, config.params, config.h_start_km, config.max_move)
    best_fixed, worst_fixed = fixed_altitude_baselines(fld, config.params)

    scenario_entries = []
    for sensor in config.sensors:
        for kind in config.objectives:
            scenario = ScenarioSpec(
                sensor=sensor,
                objective=_objective_spec(kind, config),
                params=config.params,
                grid=config.grid,
                horizon=config.horizon,
                max_move=config.max_move,
                h_start_km=config.h_start_km,
                forecast=config.forecast,
            )
            result = simulate(scenario, fld)
            result.actualized_ratio = result.avg_power_kw / omni.avg_power_kw
            csv_name = f"trajectory_{sensor.value}_{kind.value}.csv"
            _write_trajectory_csv(out / csv_name, result, fld)
            entry = {"sensor": sensor.value, "objective": kind.value, "trajectory_csv": csv_name}
            if kind is ObjectiveKind.UCB:
                entry["alpha"] = config.alpha
            entry.update(_result_summary(result))
            scenario_entries.append(entry)

    summary = {
        "generated_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "field": {
            "source": source,
            "steps": fld.steps,
            "dt_minutes": fld.dt_minutes,
            "levels_km": [float(h) for h in fld.grid.levels],
        },
        "baselines": {
            "omniscient_avg_kw": omni.avg_power_kw,
            "fixed_best": {
                "h_km": fld.grid.level_km(int(best_fixed.trajectory[0])),
                **_result_summary(best_fixed),
            },
            "fixed_worst": {
                "h_km": fld.grid.level_km(int(worst_fixed.trajectory[0])),
                **_result_summary(worst_fixed),
            },
        },
        "scenarios": scenario_entries,
    }

    if config.sweep_alphas is not None:
        template = ScenarioSpec(
            sensor=config.sensors[0],
            objective=ObjectiveSpec(
                kind=ObjectiveKind.UCB, alpha=config.alpha, n_quantiles=config.n_quantiles
            ),
            params=config.params,
            grid=config.grid,
            horizon=config.horizon,
            max_move=config.max_move,
            h_start_km=config.h_start_km,
            forecast=config.forecast,
        )
        rows = alpha_sweep(template, fld, config.sweep_alphas, tuple(config.sensors))
        sweep_name = "alpha_sweep.csv"
        with (out / sweep_name).open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(
                ["alpha", "sensor", "avg_power_kw", "actualized_ratio", "sum_p1_kwh", "sum_p2_kwh", "sum_p3_kwh"]
            )
            for row in rows:
                writer.writerow(
                    [
                        repr(row.alpha),
                        row.sensor.value,
                        repr(row.avg_power_kw),
                        repr(row.actualized_ratio),
                        repr(row.sum_p1_kwh),
                        repr(row.sum_p2_kwh),
                        repr(row.sum_p3_kwh),
                    ]
                )
        summary["sweep_csv"] = sweep_name

    with (out / "summary.json").open("w") as handle:
        json.dump(summary, handle, indent=2)
        handle.write("\n")


def _emit_error(exc: Exception) -> None:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    for attr in ("row", "col"):
        if hasattr(exc, attr):
            payload[attr] = getattr(exc, attr)
    print(json.dumps(payload), file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
    except ConfigError as exc:
        _emit_error(exc)
        return 2

    if config.wind_csv is not None:
        try:
            fld = load_wind_csv(config.wind_csv, config.dt_minutes)
        except (WindCsvError, OSError) as exc:
            _emit_error(exc)
            return 3
        source = f"csv:{config.wind_csv}"
        if fld.grid != config.grid:
            config.grid = fld.grid
    else:
        try:
            fld = generate_synthetic_field(
                config.synthetic, config.grid, config.steps, config.dt_minutes
            )
        except ValueError as exc:
            _emit_error(exc)
            return 2
        source = "synthetic"

    if config.h_start_km is None:
        # default start: grid level nearest 0.5 km, ties toward the lower one
        config.h_start_km = float(
            min(fld.grid.levels, key=lambda h: (abs(h - DEFAULT_START_KM), h))
        )

    try:
        run(config, fld, source)
    except ValueError as exc:
        _emit_error(exc)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
