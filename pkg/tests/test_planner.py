import numpy as np
import pytest

from aloft.forecast import WindForecast
from aloft.objectives import ObjectiveKind, ObjectiveSpec, stage_reward
from aloft.planner import (
    Plan,
    PlanningProblem,
    feasible_actions,
    plan_horizon,
    preference_order,
)
from aloft.power import TurbineParams
from aloft.windfield import AltitudeGrid
from oracles import enumerate_best_plan, random_plan_problem

PARAMS = TurbineParams()
GRID = AltitudeGrid()
EXPECTED = ObjectiveSpec(kind=ObjectiveKind.EXPECTED_ENERGY)


def flat_forecast(mu, n_levels=18, horizon=3, sigma2=0.0):
    return WindForecast(
        made_at=0,
        mu=np.full(n_levels, float(mu)) if np.isscalar(mu) else np.asarray(mu, dtype=float),
        sigma2=np.full((n_levels, horizon), float(sigma2)),
    )


def make_problem(forecast, start=7, horizon=3, max_move=6, objective=EXPECTED, grid=GRID, **kw):
    return PlanningProblem(
        grid=grid,
        start_level=start,
        horizon=horizon,
        max_move=max_move,
        objective=objective,
        forecast=forecast,
        params=PARAMS,
        **kw,
    )


class TestFeasibleActions:
    def test_interior_level_has_full_range(self):
        assert feasible_actions(GRID, 9, 3) == [-3, -2, -1, 0, 1, 2, 3]

    def test_clipped_at_bottom_and_top(self):
        assert feasible_actions(GRID, 0, 6) == list(range(0, 7))
        assert feasible_actions(GRID, 17, 6) == list(range(-6, 1))
        assert feasible_actions(GRID, 1, 6) == list(range(-1, 7))

    def test_level_validated(self):
        with pytest.raises(ValueError):
            feasible_actions(GRID, 18, 3)


def test_preference_order_stays_then_small_then_down():
    assert preference_order(3) == [0, -1, 1, -2, 2, -3, 3]


class TestProblemValidation:
    def test_forecast_must_cover_problem(self):
        with pytest.raises(ValueError):
            make_problem(flat_forecast(8.0, n_levels=10))
        with pytest.raises(ValueError):
            make_problem(flat_forecast(8.0, horizon=2), horizon=3)

    def test_start_level_in_range(self):
        with pytest.raises(ValueError):
            make_problem(flat_forecast(8.0), start=18)

    def test_poi_threshold_required_exactly_for_poi(self):
        poi = ObjectiveSpec(kind=ObjectiveKind.PROB_IMPROVEMENT)
        with pytest.raises(ValueError):
            make_problem(flat_forecast(8.0), objective=poi)
        make_problem(flat_forecast(8.0), objective=poi, poi_threshold=10.0)
        with pytest.raises(ValueError):
            make_problem(flat_forecast(8.0), poi_threshold=10.0)


class TestTieBreaking:
    def test_uniform_forecast_means_stay_put(self):
        # every level identical: moving only adds cost, ties prefer u = 0
        plan = plan_horizon(make_problem(flat_forecast(9.0)))
        assert plan.actions == (0, 0, 0)
        assert plan.levels == (7, 7, 7, 7)

    def test_zero_wind_ties_resolve_downward_never_move(self):
        # with no wind every action scores exactly 0; stay beats all moves
        plan = plan_horizon(make_problem(flat_forecast(0.0)))
        assert plan.actions == (0, 0, 0)
        assert plan.total == 0.0

    def test_symmetric_peaks_choose_the_lower_one(self):
        grid = AltitudeGrid(h_min=0.15, h_max=0.35, cell=0.05)  # 5 levels
        mu = np.array([5.0, 9.0, 6.0, 9.0, 5.0])
        forecast = flat_forecast(mu, n_levels=5, horizon=1)
        plan = plan_horizon(
            make_problem(forecast, start=2, horizon=1, max_move=2, grid=grid)
        )
        assert plan.actions == (-1,)


class TestPlanShape:
    def test_levels_chain_and_stay_feasible(self, rng):
        for _ in range(30):
            problem = random_plan_problem(rng)
            plan = plan_horizon(problem)
            assert len(plan.actions) == problem.horizon
            assert len(plan.levels) == problem.horizon + 1
            assert plan.levels[0] == problem.start_level
            for k, u in enumerate(plan.actions):
                assert abs(u) <= problem.max_move
                assert plan.levels[k + 1] == plan.levels[k] + u
                assert 0 <= plan.levels[k + 1] < problem.grid.n_levels

    def test_total_is_forward_sum_of_stage_rewards(self, rng):
        for _ in range(30):
            plan = plan_horizon(random_plan_problem(rng))
            assert plan.total == sum(plan.stage_rewards)

    def test_stage_rewards_match_scalar_objectives(self, rng):
        # the vectorized reward table and the scalar objective functions must
        # agree bitwise, not just approximately
        for _ in range(30):
            problem = random_plan_problem(rng)
            plan = plan_horizon(problem)
            for k, u in enumerate(plan.actions):
                dist = problem.forecast.dist(plan.levels[k + 1], k + 1)
                scalar = stage_reward(
                    problem.objective,
                    problem.params,
                    problem.grid.cell * u,
                    dist,
                    problem.poi_threshold,
                )
                assert scalar == plan.stage_rewards[k]


class TestAgainstEnumeration:
    def test_matches_brute_force_exactly(self, rng):
        for _ in range(60):
            problem = random_plan_problem(rng)
            plan = plan_horizon(problem)
            actions, levels, rewards, total = enumerate_best_plan(problem)
            assert list(plan.actions) == actions
            assert list(plan.levels) == levels
            assert list(plan.stage_rewards) == rewards
            assert plan.total == total

    def test_poi_ties_resolve_identically(self, rng):
        # probability-of-improvement rewards live on a coarse value lattice,
        # so ties are the norm rather than the exception
        for _ in range(40):
            problem = random_plan_problem(rng, kinds=(ObjectiveKind.PROB_IMPROVEMENT,))
            plan = plan_horizon(problem)
            actions, _, _, _ = enumerate_best_plan(problem)
            assert list(plan.actions) == actions


def test_plan_is_a_value_object():
    plan = Plan(actions=(0,), levels=(3, 3), stage_rewards=(1.5,), total=1.5)
    assert plan == Plan(actions=(0,), levels=(3, 3), stage_rewards=(1.5,), total=1.5)
