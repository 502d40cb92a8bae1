"""Closed-loop simulation and baseline evaluation.

A scenario pairs a sensor configuration with a planning objective. Each step
the controller observes the field, folds the new readings into its forecast
statistics, plans over a short horizon, and commits only the first move. The
realised energy account is settled against the true field: the wind that
matters for a step is the one at the destination altitude when the step ends.

Baselines bracket the controller: an omniscient planner that optimises the
whole run on the true field (upper), and the best and worst fixed altitudes
(the worst is the lower bracket an uncontrolled system could realise).
"""
from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field, replace

import numpy as np

from .forecast import ForecastConfig, make_forecast, update_delta_stats
from .objectives import ObjectiveKind, ObjectiveSpec
from .planner import PlanningProblem, plan_horizon, preference_order
from .power import PowerBreakdown, TurbineParams, movement_cost_curve, net_power_curve, stationary_net_curve
from .sensing import ObservationHistory, SensorConfig, observe
from .windfield import AltitudeGrid, WindFieldGrid

__all__ = [
    "ScenarioSpec",
    "SimResult",
    "SweepRow",
    "simulate",
    "omniscient_baseline",
    "fixed_altitude_baselines",
    "alpha_sweep",
    "default_alpha_grid",
]

DEFAULT_HORIZON_STEPS = 3
DEFAULT_MAX_MOVE_CELLS = 6
DEFAULT_START_KM = 0.5


@dataclass(frozen=True)
class ScenarioSpec:
    """Everything that defines one closed-loop run except the field itself."""

    sensor: SensorConfig
    objective: ObjectiveSpec
    params: TurbineParams = TurbineParams()
    grid: AltitudeGrid = AltitudeGrid()
    horizon: int = DEFAULT_HORIZON_STEPS
    max_move: int = DEFAULT_MAX_MOVE_CELLS
    h_start_km: float = DEFAULT_START_KM
    forecast: ForecastConfig = ForecastConfig()

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError(f"horizon must be at least 1 step, got {self.horizon}")
        if self.max_move < 1:
            raise ValueError(f"max_move must be at least 1 cell, got {self.max_move}")
        self.grid.index_of(self.h_start_km)


@dataclass
class SimResult:
    """Realised trajectory and energy account of one run.

    Arrays are per realised step (one fewer than trajectory points); energies
    integrate power over the step length, so ``avg_power_kw`` times
    ``duration_hours`` equals generation minus both cost totals exactly.
    """

    trajectory: np.ndarray
    wind_mps: np.ndarray
    p1_kw: np.ndarray
    p2_kw: np.ndarray
    p3_kw: np.ndarray
    net_kw: np.ndarray
    sum_p1_kwh: float
    sum_p2_kwh: float
    sum_p3_kwh: float
    net_energy_kwh: float
    duration_hours: float
    avg_power_kw: float
    actualized_ratio: float | None = dataclass_field(default=None)

    @property
    def steps(self) -> int:
        return len(self.trajectory) - 1

    def breakdown(self, step: int) -> PowerBreakdown:
        """Power terms of realised step ``step`` (0-based)."""
        return PowerBreakdown(
            p1=float(self.p1_kw[step]), p2=float(self.p2_kw[step]), p3=float(self.p3_kw[step])
        )


def _realized_result(trajectory: np.ndarray, fld: WindFieldGrid, params: TurbineParams) -> SimResult:
    """Settle a trajectory's energy account against the true field.

    Every run (controlled, omniscient, fixed) goes through this one routine,
    so reported totals are directly comparable bit for bit.
    """
    trajectory = np.asarray(trajectory, dtype=int)
    steps = len(trajectory) - 1
    dest = trajectory[1:]
    u_km = fld.grid.cell * (dest - trajectory[:-1])
    v = fld.speeds[np.arange(1, steps + 1), dest]

    m = np.minimum(v, params.v_r)
    p1 = params.k1 * (m * m * m)
    p2 = params.k2 * (v * v)
    p3 = movement_cost_curve(params, v) * np.abs(u_km)
    net = (p1 - p2) - p3

    dt_h = fld.dt_minutes / 60.0
    sum_p1 = float(p1.sum() * dt_h)
    sum_p2 = float(p2.sum() * dt_h)
    sum_p3 = float(p3.sum() * dt_h)
    net_energy = sum_p1 - sum_p2 - sum_p3
    duration = steps * dt_h
    return SimResult(
        trajectory=trajectory,
        wind_mps=v,
        p1_kw=p1,
        p2_kw=p2,
        p3_kw=p3,
        net_kw=net,
        sum_p1_kwh=sum_p1,
        sum_p2_kwh=sum_p2,
        sum_p3_kwh=sum_p3,
        net_energy_kwh=net_energy,
        duration_hours=duration,
        avg_power_kw=net_energy / duration,
    )


def simulate(scenario: ScenarioSpec, fld: WindFieldGrid) -> SimResult:
    """Run one sensor/objective scenario over the whole field.

    Decisions are made at every step but the last; each commits only the
    first move of a fresh horizon plan built from that step's observations.
    """
    if fld.grid != scenario.grid:
        raise ValueError("field and scenario use different altitude grids")
    if fld.steps < 2:
        raise ValueError("field must cover at least 2 time steps")

    grid = scenario.grid
    params = scenario.params
    needs_threshold = scenario.objective.kind is ObjectiveKind.PROB_IMPROVEMENT

    level = grid.index_of(scenario.h_start_km)
    hist = ObservationHistory(n_levels=grid.n_levels)
    stats = scenario.forecast.make_stats()
    prev = None
    trajectory = np.empty(fld.steps, dtype=int)
    trajectory[0] = level

    for t in range(fld.steps - 1):
        obs = observe(scenario.sensor, fld, t, level)
        hist.append(obs)
        update_delta_stats(stats, prev, obs)
        prev = obs

        forecast = make_forecast(hist, stats, scenario.horizon)
        threshold = None
        if needs_threshold:
            # Improvement is judged against the net power the platform is
            # producing right now, at the measured wind.
            threshold = float(net_power_curve(params, 0.0, obs.speed_at(level)))
        plan = plan_horizon(
            PlanningProblem(
                grid=grid,
                start_level=level,
                horizon=scenario.horizon,
                max_move=scenario.max_move,
                objective=scenario.objective,
                forecast=forecast,
                params=params,
                poi_threshold=threshold,
            )
        )
        level += plan.actions[0]
        trajectory[t + 1] = level

    return _realized_result(trajectory, fld, params)


def omniscient_baseline(
    fld: WindFieldGrid,
    params: TurbineParams = TurbineParams(),
    h_start_km: float = DEFAULT_START_KM,
    max_move: int = DEFAULT_MAX_MOVE_CELLS,
) -> SimResult:
    """Best achievable trajectory given the true field in advance.

    Exact dynamic programming over the full run with the same action set and
    tie-break order as the controller, rewarded with realised net power.
    """
    if fld.steps < 2:
        raise ValueError("field must cover at least 2 time steps")
    n_levels = fld.grid.n_levels
    base = stationary_net_curve(params, fld.speeds)
    cost = movement_cost_curve(params, fld.speeds)
    order = preference_order(max_move)

    value = np.zeros(n_levels)
    choice = np.zeros((fld.steps - 1, n_levels), dtype=int)
    for t in range(fld.steps - 2, -1, -1):
        best = np.full(n_levels, -np.inf)
        act = np.zeros(n_levels, dtype=int)
        for u in order:
            lo = max(0, -u)
            hi = n_levels - 1 - max(0, u)
            if lo > hi:
                continue
            move_km = fld.grid.cell * abs(u)
            candidate = (
                base[t + 1, lo + u : hi + u + 1]
                - cost[t + 1, lo + u : hi + u + 1] * move_km
                + value[lo + u : hi + u + 1]
            )
            current = best[lo : hi + 1]
            better = candidate > current
            current[better] = candidate[better]
            act[lo : hi + 1][better] = u
        value = best
        choice[t] = act

    level = fld.grid.index_of(h_start_km)
    trajectory = np.empty(fld.steps, dtype=int)
    trajectory[0] = level
    for t in range(fld.steps - 1):
        level += int(choice[t, level])
        trajectory[t + 1] = level
    return _realized_result(trajectory, fld, params)


def fixed_altitude_baselines(
    fld: WindFieldGrid, params: TurbineParams = TurbineParams()
) -> tuple[SimResult, SimResult]:
    """Results of the best and worst constant-altitude runs.

    Ties on total energy go to the lowest altitude.
    """
    if fld.steps < 2:
        raise ValueError("field must cover at least 2 time steps")
    totals = stationary_net_curve(params, fld.speeds[1:]).sum(axis=0)
    best_level = int(np.argmax(totals))
    worst_level = int(np.argmin(totals))
    best = _realized_result(np.full(fld.steps, best_level), fld, params)
    worst = _realized_result(np.full(fld.steps, worst_level), fld, params)
    return best, worst


def default_alpha_grid() -> tuple[float, ...]:
    """Confidence levels 0.52 to 0.98 in steps of 0.02, as exact decimals."""
    return tuple(k / 100 for k in range(52, 99, 2))


@dataclass(frozen=True)
class SweepRow:
    """One (confidence level, sensor) cell of an alpha sweep."""

    sensor: SensorConfig
    alpha: float
    avg_power_kw: float
    actualized_ratio: float
    sum_p1_kwh: float
    sum_p2_kwh: float
    sum_p3_kwh: float


def alpha_sweep(
    template: ScenarioSpec,
    fld: WindFieldGrid,
    alphas=None,
    sensors: tuple[SensorConfig, ...] = (
        SensorConfig.SINGLE,
        SensorConfig.MULTIPLE,
        SensorConfig.REMOTE,
    ),
) -> list[SweepRow]:
    """Run the upper-confidence-bound controller across alphas and sensors.

    Rows come back sorted by alpha, then by the given sensor order; each row
    normalises its average power by the omniscient baseline's.
    """
    if alphas is None:
        alphas = default_alpha_grid()
    omni = omniscient_baseline(fld, template.params, template.h_start_km, template.max_move)
    rows = []
    for alpha in sorted(alphas):
        for sensor in sensors:
            scenario = replace(
                template,
                sensor=sensor,
                objective=ObjectiveSpec(
                    kind=ObjectiveKind.UCB,
                    alpha=alpha,
                    n_quantiles=template.objective.n_quantiles,
                ),
            )
            result = simulate(scenario, fld)
            rows.append(
                SweepRow(
                    sensor=sensor,
                    alpha=alpha,
                    avg_power_kw=result.avg_power_kw,
                    actualized_ratio=result.avg_power_kw / omni.avg_power_kw,
                    sum_p1_kwh=result.sum_p1_kwh,
                    sum_p2_kwh=result.sum_p2_kwh,
                    sum_p3_kwh=result.sum_p3_kwh,
                )
            )
    return rows
