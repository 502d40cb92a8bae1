"""Receding-horizon planning over the altitude grid.

Altitude is the only state and moves are limited to ``max_move`` grid cells
per step, so exact dynamic programming over (stage, level) is cheap. Stage
rewards score the transition *into* a level: the wind forecast for the
destination at that lead, net of the movement cost of getting there. Ties are
broken toward staying, then toward the smaller move, downward before upward,
which makes plans fully deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forecast import WindForecast, quantile_probs, truncated_quantiles
from .objectives import ObjectiveKind, ObjectiveSpec, nearest_rank
from .power import TurbineParams, movement_cost_curve, stationary_net_curve
from .windfield import AltitudeGrid

__all__ = ["PlanningProblem", "Plan", "feasible_actions", "preference_order", "plan_horizon"]


def feasible_actions(grid: AltitudeGrid, level: int, max_move: int) -> list[int]:
    """Altitude changes (in cells) allowed from ``level`` in one step."""
    if not 0 <= level < grid.n_levels:
        raise ValueError(f"level {level} outside [0, {grid.n_levels})")
    lo = max(-max_move, -level)
    hi = min(max_move, grid.n_levels - 1 - level)
    return list(range(lo, hi + 1))


def preference_order(max_move: int) -> list[int]:
    """Actions in tie-break order: stay, then each magnitude down before up."""
    order = [0]
    for m in range(1, max_move + 1):
        order.extend((-m, m))
    return order


@dataclass(frozen=True, eq=False)
class PlanningProblem:
    """One receding-horizon planning instance.

    ``poi_threshold`` is the net power currently being produced; it must be
    given exactly when the objective is probability of improvement.
    """

    grid: AltitudeGrid
    start_level: int
    horizon: int
    max_move: int
    objective: ObjectiveSpec
    forecast: WindForecast
    params: TurbineParams
    poi_threshold: float | None = None

    def __post_init__(self) -> None:
        if not 0 <= self.start_level < self.grid.n_levels:
            raise ValueError(f"start level {self.start_level} outside [0, {self.grid.n_levels})")
        if self.horizon < 1:
            raise ValueError(f"horizon must be at least 1 step, got {self.horizon}")
        if self.max_move < 1:
            raise ValueError(f"max_move must be at least 1 cell, got {self.max_move}")
        if self.forecast.n_levels != self.grid.n_levels:
            raise ValueError(
                f"forecast covers {self.forecast.n_levels} levels, grid has {self.grid.n_levels}"
            )
        if self.forecast.horizon < self.horizon:
            raise ValueError(
                f"forecast horizon {self.forecast.horizon} shorter than planning horizon {self.horizon}"
            )
        needs_threshold = self.objective.kind is ObjectiveKind.PROB_IMPROVEMENT
        if needs_threshold and self.poi_threshold is None:
            raise ValueError("probability-of-improvement planning needs poi_threshold")
        if not needs_threshold and self.poi_threshold is not None:
            raise ValueError(f"poi_threshold does not apply to {self.objective.kind.value}")


@dataclass(frozen=True)
class Plan:
    """A horizon-long action sequence; ``levels`` includes the start level."""

    actions: tuple[int, ...]
    levels: tuple[int, ...]
    stage_rewards: tuple[float, ...]
    total: float


def _reward_table(problem: PlanningProblem) -> np.ndarray:
    """Stage rewards indexed as [destination level, stage, move magnitude].

    The whole table is one batched evaluation of the same quantile and power
    arithmetic the scalar objective functions use, so a table entry matches
    the corresponding scalar call bitwise.
    """
    spec = problem.objective
    fc = problem.forecast
    n = spec.n_quantiles
    winds = truncated_quantiles(
        fc.mu[:, None], fc.sigma2[:, : problem.horizon], quantile_probs(n), fc.lower, fc.upper
    )  # (levels, stages, n)
    base = stationary_net_curve(problem.params, winds)
    cost = movement_cost_curve(problem.params, winds)
    moves_km = problem.grid.cell * np.arange(problem.max_move + 1)
    nets = base[:, :, None, :] - cost[:, :, None, :] * moves_km[None, None, :, None]

    if spec.kind is ObjectiveKind.EXPECTED_ENERGY:
        return nets.mean(axis=-1)
    if spec.kind is ObjectiveKind.UCB:
        rank = nearest_rank(spec.alpha, n)
        return np.partition(nets, rank - 1, axis=-1)[..., rank - 1]
    frac = np.count_nonzero(nets > problem.poi_threshold, axis=-1) / n
    return np.log(np.maximum(spec.effective_log_floor, frac))


def plan_horizon(problem: PlanningProblem) -> Plan:
    """Solve the horizon by backward induction and return the optimal plan.

    ``Plan.total`` is the left-to-right sum of the stage rewards along the
    chosen path.
    """
    rewards = _reward_table(problem)
    n_levels = problem.grid.n_levels
    horizon = problem.horizon
    order = preference_order(problem.max_move)

    value = np.zeros(n_levels)
    choice = np.zeros((horizon, n_levels), dtype=int)
    for stage in range(horizon - 1, -1, -1):
        best = np.full(n_levels, -np.inf)
        act = np.zeros(n_levels, dtype=int)
        for u in order:
            lo = max(0, -u)
            hi = n_levels - 1 - max(0, u)
            if lo > hi:
                continue
            candidate = rewards[lo + u : hi + u + 1, stage, abs(u)] + value[lo + u : hi + u + 1]
            current = best[lo : hi + 1]
            better = candidate > current
            current[better] = candidate[better]
            act[lo : hi + 1][better] = u
        value = best
        choice[stage] = act

    level = problem.start_level
    actions: list[int] = []
    levels = [level]
    stage_rewards: list[float] = []
    for stage in range(horizon):
        u = int(choice[stage, level])
        level += u
        actions.append(u)
        levels.append(level)
        stage_rewards.append(float(rewards[level, stage, abs(u)]))

    return Plan(
        actions=tuple(actions),
        levels=tuple(levels),
        stage_rewards=tuple(stage_rewards),
        total=sum(stage_rewards),
    )
