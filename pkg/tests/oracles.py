"""Independent reference implementations used to cross-check the optimisers.

Everything here recomputes results by brute force with scalar arithmetic:
plans by enumerating every feasible action sequence, omniscient trajectories
by enumerating every feasible path. Values accumulate right to left (r0 +
(r1 + (r2 + 0))) because that is the association a backward induction
produces, which is what makes zero-tolerance comparison meaningful; sequences
are visited in the planner's preference order with strictly-greater updates,
so ties resolve identically by construction rather than by luck.
"""
from __future__ import annotations

import itertools

from aloft import ObjectiveKind, PlanningProblem, power
from aloft.objectives import stage_reward
from aloft.planner import preference_order


def enumerate_best_plan(problem: PlanningProblem):
    """Best plan by exhaustive enumeration; returns (actions, levels, rewards, total).

    Stage rewards come from the scalar objective functions, not the planner's
    table. ``total`` is the forward (left-to-right) sum of the chosen path's
    rewards, matching the Plan.total convention.
    """
    n_levels = problem.grid.n_levels
    order = preference_order(problem.max_move)
    cell = problem.grid.cell

    # Scalar rewards per (destination, stage, |u|).
    reward = {}
    for dest in range(n_levels):
        for stage in range(problem.horizon):
            dist = problem.forecast.dist(dest, stage + 1)
            for mag in range(problem.max_move + 1):
                reward[dest, stage, mag] = stage_reward(
                    problem.objective,
                    problem.params,
                    cell * mag,
                    dist,
                    problem.poi_threshold,
                )

    best = None
    for seq in itertools.product(order, repeat=problem.horizon):
        level = problem.start_level
        levels = [level]
        feasible = True
        for u in seq:
            level += u
            if not 0 <= level < n_levels:
                feasible = False
                break
            levels.append(level)
        if not feasible:
            continue
        rewards = [
            reward[levels[k + 1], k, abs(seq[k])] for k in range(problem.horizon)
        ]
        value = 0.0
        for r in reversed(rewards):
            value = r + value
        if best is None or value > best[0]:
            best = (value, list(seq), levels, rewards)

    _, actions, levels, rewards = best
    return actions, levels, rewards, sum(rewards)


def enumerate_best_trajectory(fld, params, start_level: int, max_move: int):
    """Omniscient optimum by exhaustive path enumeration on the true field.

    Returns (trajectory levels, net kW per step via the scalar power model).
    """
    n_levels = fld.grid.n_levels
    steps = fld.steps - 1
    order = preference_order(max_move)
    cell = fld.grid.cell

    net = {}
    for t in range(steps):
        for dest in range(n_levels):
            for mag in range(max_move + 1):
                net[t, dest, mag] = power(params, cell * mag, float(fld.speeds[t + 1, dest])).net

    best = None
    for seq in itertools.product(order, repeat=steps):
        level = start_level
        levels = [level]
        feasible = True
        for u in seq:
            level += u
            if not 0 <= level < n_levels:
                feasible = False
                break
            levels.append(level)
        if not feasible:
            continue
        value = 0.0
        for t in range(steps - 1, -1, -1):
            value = net[t, levels[t + 1], abs(seq[t])] + value
        if best is None or value > best[0]:
            best = (value, levels)

    _, levels = best
    nets = [net[t, levels[t + 1], abs(levels[t + 1] - levels[t])] for t in range(steps)]
    return levels, nets


def random_plan_problem(rng, kinds=tuple(ObjectiveKind)):
    """A small random planning instance for oracle comparison."""
    from aloft import AltitudeGrid, ObjectiveSpec, TurbineParams, WindForecast

    n_levels = int(rng.integers(2, 6))
    horizon = int(rng.integers(1, 4))
    max_move = int(rng.integers(1, 5))
    grid = AltitudeGrid(h_min=0.15, h_max=0.15 + 0.05 * (n_levels - 1), cell=0.05)
    mu = rng.uniform(0.0, 17.0, size=n_levels)
    sigma2 = rng.uniform(0.0, 30.0, size=(n_levels, horizon))
    forecast = WindForecast(made_at=0, mu=mu, sigma2=sigma2)

    kind = kinds[int(rng.integers(0, len(kinds)))]
    threshold = None
    if kind is ObjectiveKind.UCB:
        objective = ObjectiveSpec(kind=kind, alpha=float(rng.uniform(0.51, 0.99)))
    elif kind is ObjectiveKind.PROB_IMPROVEMENT:
        objective = ObjectiveSpec(kind=kind)
        threshold = float(rng.uniform(-5.0, 60.0))
    else:
        objective = ObjectiveSpec(kind=kind)

    return PlanningProblem(
        grid=grid,
        start_level=int(rng.integers(0, n_levels)),
        horizon=horizon,
        max_move=max_move,
        objective=objective,
        forecast=forecast,
        params=TurbineParams(),
        poi_threshold=threshold,
    )
