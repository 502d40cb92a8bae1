"""Altitude control for airborne wind energy systems.

Simulates a platform that adjusts its operating altitude to chase wind: it
forecasts the vertical wind profile by persistence from whatever its sensors
can see, plans a few steps ahead with dynamic programming under a stochastic
objective, and is scored on realised net energy against omniscient and
fixed-altitude baselines.
"""
from .evaluation import (
    ScenarioSpec,
    SimResult,
    SweepRow,
    alpha_sweep,
    default_alpha_grid,
    fixed_altitude_baselines,
    omniscient_baseline,
    simulate,
)
from .forecast import (
    DeltaStats,
    ForecastConfig,
    TruncatedGaussian,
    WindForecast,
    forecast_distribution,
    make_forecast,
    persistence_mean,
    persistence_variance,
    quantile,
    update_delta_stats,
)
from .objectives import (
    ObjectiveKind,
    ObjectiveSpec,
    expected_power,
    log_prob_improvement,
    stage_reward,
    ucb_power,
)
from .planner import Plan, PlanningProblem, feasible_actions, plan_horizon
from .power import PowerBreakdown, TurbineParams, power
from .sensing import ObservationHistory, ObservationSet, SensorConfig, observe
from .windfield import (
    AltitudeGrid,
    SyntheticFieldSpec,
    WindFieldGrid,
    generate_synthetic_field,
    load_wind_csv,
    wind_at,
    write_wind_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AltitudeGrid",
    "DeltaStats",
    "ForecastConfig",
    "ObjectiveKind",
    "ObjectiveSpec",
    "ObservationHistory",
    "ObservationSet",
    "Plan",
    "PlanningProblem",
    "PowerBreakdown",
    "ScenarioSpec",
    "SensorConfig",
    "SimResult",
    "SweepRow",
    "SyntheticFieldSpec",
    "TruncatedGaussian",
    "TurbineParams",
    "WindFieldGrid",
    "WindForecast",
    "alpha_sweep",
    "default_alpha_grid",
    "expected_power",
    "feasible_actions",
    "fixed_altitude_baselines",
    "forecast_distribution",
    "generate_synthetic_field",
    "load_wind_csv",
    "log_prob_improvement",
    "make_forecast",
    "observe",
    "omniscient_baseline",
    "persistence_mean",
    "persistence_variance",
    "plan_horizon",
    "power",
    "quantile",
    "simulate",
    "stage_reward",
    "ucb_power",
    "update_delta_stats",
    "wind_at",
    "write_wind_csv",
]
