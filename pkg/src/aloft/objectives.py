"""Stage objectives scored against a wind forecast distribution.

Each objective reduces the distribution of next-step net power to one number.
The distribution is discretised once, as net power evaluated at a fixed
n-point quantile grid of the wind forecast, and every objective works on that
same sample set:

* expected energy: the sample mean,
* upper confidence bound: the nearest-rank alpha sample (alpha > 0.5), which
  rewards altitudes whose power distribution has a heavy upper tail,
* probability of improvement: log of the fraction of samples that beat the
  net power currently being produced.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .forecast import TruncatedGaussian, quantile_probs
from .power import TurbineParams, net_power_curve

__all__ = [
    "ObjectiveKind",
    "ObjectiveSpec",
    "quantile_samples",
    "nearest_rank",
    "expected_power",
    "ucb_power",
    "log_prob_improvement",
    "stage_reward",
]


class ObjectiveKind(enum.Enum):
    EXPECTED_ENERGY = "expected"
    UCB = "ucb"
    PROB_IMPROVEMENT = "poi"

    @classmethod
    def parse(cls, name: str) -> "ObjectiveKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown objective {name!r} (choices: {choices})") from None


@dataclass(frozen=True)
class ObjectiveSpec:
    """An objective kind plus its discretisation and tuning parameters."""

    kind: ObjectiveKind
    alpha: float | None = None
    n_quantiles: int = 100
    log_floor: float | None = None

    def __post_init__(self) -> None:
        if self.n_quantiles < 2:
            raise ValueError(f"n_quantiles must be at least 2, got {self.n_quantiles}")
        if self.kind is ObjectiveKind.UCB:
            if self.alpha is None:
                raise ValueError("ucb objective requires alpha")
            if not 0.5 < self.alpha < 1.0:
                raise ValueError(f"alpha must lie in (0.5, 1), got {self.alpha!r}")
        elif self.alpha is not None:
            raise ValueError(f"alpha only applies to the ucb objective, not {self.kind.value}")
        if self.log_floor is not None:
            if self.kind is not ObjectiveKind.PROB_IMPROVEMENT:
                raise ValueError("log_floor only applies to the poi objective")
            if not 0.0 < self.log_floor <= 1.0:
                raise ValueError(f"log_floor must lie in (0, 1], got {self.log_floor!r}")

    @property
    def effective_log_floor(self) -> float:
        if self.log_floor is not None:
            return self.log_floor
        return 1.0 / (2 * self.n_quantiles)

    @property
    def label(self) -> str:
        return self.kind.value


def quantile_samples(dist: TruncatedGaussian, n: int = 100) -> np.ndarray:
    """Wind speeds at the shared n-point quantile grid, nondecreasing."""
    return dist.quantiles(quantile_probs(n))


def nearest_rank(alpha: float, n: int) -> int:
    """1-based nearest-rank index of the alpha order statistic among n samples.

    A small tolerance keeps decimal alphas on their exact rank: 0.54 of 100
    samples is rank 54 even though 0.54 * 100 rounds up in floating point.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    rank = math.ceil(alpha * n - 1e-9)
    return min(max(rank, 1), n)


def expected_power(params: TurbineParams, u_km: float, dist: TruncatedGaussian, n: int = 100) -> float:
    """Mean net power (kW) over the quantile discretisation of the forecast."""
    nets = net_power_curve(params, u_km, quantile_samples(dist, n))
    return float(np.mean(nets))


def ucb_power(
    params: TurbineParams, u_km: float, dist: TruncatedGaussian, alpha: float, n: int = 100
) -> float:
    """The alpha order statistic (nearest rank) of net power over the samples.

    Requires alpha in (0.5, 1): above the median this is an optimistic bound.
    The rank is taken on the net-power samples themselves, not on the wind
    samples, because net power is not monotone in wind speed beyond the rated
    speed.
    """
    if not 0.5 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0.5, 1), got {alpha!r}")
    nets = net_power_curve(params, u_km, quantile_samples(dist, n))
    rank = nearest_rank(alpha, n)
    return float(np.partition(nets, rank - 1)[rank - 1])


def log_prob_improvement(
    params: TurbineParams,
    u_km: float,
    dist: TruncatedGaussian,
    threshold: float,
    n: int = 100,
    log_floor: float | None = None,
) -> float:
    """Log probability that next-step net power strictly beats ``threshold``.

    The probability is the fraction of quantile samples above the threshold,
    floored at ``log_floor`` (default 1/(2n)) so the logarithm stays finite.
    """
    if log_floor is None:
        log_floor = 1.0 / (2 * n)
    if not 0.0 < log_floor <= 1.0:
        raise ValueError(f"log_floor must lie in (0, 1], got {log_floor!r}")
    nets = net_power_curve(params, u_km, quantile_samples(dist, n))
    frac = np.count_nonzero(nets > threshold) / n
    return float(np.log(max(log_floor, frac)))


def stage_reward(
    spec: ObjectiveSpec,
    params: TurbineParams,
    u_km: float,
    dist: TruncatedGaussian,
    threshold: float | None = None,
) -> float:
    """Score one candidate (altitude change, forecast) pair under ``spec``.

    ``threshold`` is the net power currently being produced; it is required
    by (and only by) the probability-of-improvement objective.
    """
    if spec.kind is ObjectiveKind.EXPECTED_ENERGY:
        return expected_power(params, u_km, dist, spec.n_quantiles)
    if spec.kind is ObjectiveKind.UCB:
        return ucb_power(params, u_km, dist, spec.alpha, spec.n_quantiles)
    if threshold is None:
        raise ValueError("probability-of-improvement reward needs the current net power")
    return log_prob_improvement(
        params, u_km, dist, threshold, spec.n_quantiles, spec.effective_log_floor
    )
