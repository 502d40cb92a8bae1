"""Online persistence forecasting of the vertical wind profile.

The point forecast for altitude ``h`` and lead ``s`` is the latest reading at
the observed altitude nearest to ``h`` (ties toward the lower altitude). Its
error is modelled as a zero-mean Gaussian whose variance grows with the
spatial and temporal distance of the extrapolation:

    sigma^2(d) = d Sigma d',   d = (cells away, steps ahead)

where ``Sigma`` holds second moments of per-cell vertical differences and
per-step temporal differences of the wind speed, accumulated online from the
observations themselves. Forecast distributions are Gaussians truncated to
the physical band [0, 17] m/s.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri

from .sensing import ObservationHistory, ObservationSet, nearest_observed_level

__all__ = [
    "WIND_LOWER_MPS",
    "WIND_UPPER_MPS",
    "TruncatedGaussian",
    "DeltaStats",
    "ForecastConfig",
    "WindForecast",
    "quantile_probs",
    "truncated_quantiles",
    "truncated_cdf",
    "quantile",
    "update_delta_stats",
    "persistence_mean",
    "persistence_variance",
    "forecast_distribution",
    "make_forecast",
]

WIND_LOWER_MPS = 0.0
WIND_UPPER_MPS = 17.0


# --------------------------------------------------------------------------
# Truncated Gaussian
# --------------------------------------------------------------------------

@functools.lru_cache(maxsize=None)
def quantile_probs(n: int) -> np.ndarray:
    """The n-point probability grid used to discretise forecast distributions.

    Interior nodes q/n for q = 1..n-1 plus a top node at 1 - 1/(2n), so the
    grid stays strictly inside (0, 1) and still resolves the upper tail.
    """
    if n < 2:
        raise ValueError(f"need at least 2 quantile nodes, got {n}")
    probs = np.empty(n)
    probs[: n - 1] = np.arange(1, n) / n
    probs[n - 1] = 1.0 - 1.0 / (2 * n)
    probs.setflags(write=False)
    return probs


def truncated_quantiles(mu, sigma2, probs, lower=WIND_LOWER_MPS, upper=WIND_UPPER_MPS) -> np.ndarray:
    """Quantiles of Gaussians truncated to [lower, upper].

    ``mu`` and ``sigma2`` broadcast against each other; the result has their
    broadcast shape plus a trailing axis for ``probs``. Two formulations keep
    the computation in the well-conditioned tail: distributions centred above
    the band midpoint use the CDF of the standard normal, the rest use its
    survival function. Degenerate cases (zero variance, or a normaliser that
    underflows to zero) collapse to a point mass at ``mu`` clipped to the band.
    """
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 1 or probs.size == 0:
        raise ValueError("probs must be a non-empty 1-D array")
    if np.any(probs <= 0.0) or np.any(probs >= 1.0):
        raise ValueError("probs must lie strictly inside (0, 1)")

    mu_b, s2_b = np.broadcast_arrays(np.asarray(mu, dtype=float), np.asarray(sigma2, dtype=float))
    shape = mu_b.shape
    mu_f = mu_b.reshape(-1)
    s2_f = s2_b.reshape(-1)
    out = np.empty((mu_f.size, probs.size))

    sigma = np.sqrt(s2_f)
    point = np.clip(mu_f, lower, upper)
    degenerate = sigma == 0.0
    out[degenerate] = point[degenerate, None]

    mid = 0.5 * (lower + upper)
    live = ~degenerate

    upper_branch = live & (mu_f > mid)
    if np.any(upper_branch):
        m, s = mu_f[upper_branch], sigma[upper_branch]
        pa = ndtr((lower - m) / s)
        pb = ndtr((upper - m) / s)
        z = pb - pa
        x = m[:, None] + s[:, None] * ndtri(pa[:, None] + probs[None, :] * z[:, None])
        bad = z <= 0.0
        if np.any(bad):
            x[bad] = np.clip(m[bad], lower, upper)[:, None]
        out[upper_branch] = x

    lower_branch = live & (mu_f <= mid)
    if np.any(lower_branch):
        m, s = mu_f[lower_branch], sigma[lower_branch]
        sa = ndtr((m - lower) / s)
        sb = ndtr((m - upper) / s)
        z = sa - sb
        x = m[:, None] - s[:, None] * ndtri(sa[:, None] - probs[None, :] * z[:, None])
        bad = z <= 0.0
        if np.any(bad):
            x[bad] = np.clip(m[bad], lower, upper)[:, None]
        out[lower_branch] = x

    np.clip(out, lower, upper, out=out)
    return out.reshape(shape + (probs.size,))


def truncated_cdf(x, mu, sigma2, lower=WIND_LOWER_MPS, upper=WIND_UPPER_MPS) -> np.ndarray:
    """CDF of Gaussians truncated to [lower, upper], broadcast over all args."""
    x_b, mu_b, s2_b = np.broadcast_arrays(
        np.asarray(x, dtype=float), np.asarray(mu, dtype=float), np.asarray(sigma2, dtype=float)
    )
    shape = x_b.shape
    x_f, mu_f, s2_f = x_b.reshape(-1), mu_b.reshape(-1), s2_b.reshape(-1)
    out = np.empty(x_f.size)

    sigma = np.sqrt(s2_f)
    point = np.clip(mu_f, lower, upper)
    mid = 0.5 * (lower + upper)

    upper_branch = (mu_f > mid) & (sigma > 0.0)
    if np.any(upper_branch):
        m, s, xx = mu_f[upper_branch], sigma[upper_branch], x_f[upper_branch]
        pa = ndtr((lower - m) / s)
        z = ndtr((upper - m) / s) - pa
        with np.errstate(invalid="ignore", divide="ignore"):
            cdf = (ndtr((xx - m) / s) - pa) / z
        cdf[z <= 0.0] = np.where(xx[z <= 0.0] >= point[upper_branch][z <= 0.0], 1.0, 0.0)
        out[upper_branch] = cdf

    lower_branch = (mu_f <= mid) & (sigma > 0.0)
    if np.any(lower_branch):
        m, s, xx = mu_f[lower_branch], sigma[lower_branch], x_f[lower_branch]
        sa = ndtr((m - lower) / s)
        z = sa - ndtr((m - upper) / s)
        with np.errstate(invalid="ignore", divide="ignore"):
            cdf = (sa - ndtr((m - xx) / s)) / z
        cdf[z <= 0.0] = np.where(xx[z <= 0.0] >= point[lower_branch][z <= 0.0], 1.0, 0.0)
        out[lower_branch] = cdf

    degenerate = sigma == 0.0
    out[degenerate] = (x_f[degenerate] >= point[degenerate]).astype(float)

    out[x_f < lower] = 0.0
    out[x_f >= upper] = 1.0
    np.clip(out, 0.0, 1.0, out=out)
    return out.reshape(shape)


@dataclass(frozen=True)
class TruncatedGaussian:
    """Gaussian with mean ``mu`` and variance ``sigma2`` truncated to a band."""

    mu: float
    sigma2: float
    lower: float = WIND_LOWER_MPS
    upper: float = WIND_UPPER_MPS

    def __post_init__(self) -> None:
        if not np.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu!r}")
        if not self.sigma2 >= 0.0:
            raise ValueError(f"sigma2 must be non-negative, got {self.sigma2!r}")
        if not self.lower < self.upper:
            raise ValueError(f"need lower < upper, got [{self.lower!r}, {self.upper!r}]")

    def quantile(self, q: float) -> float:
        if not 0.0 < q < 1.0:
            raise ValueError(f"quantile level must lie in (0, 1), got {q!r}")
        return float(
            truncated_quantiles(self.mu, self.sigma2, np.array([q]), self.lower, self.upper)[0]
        )

    def quantiles(self, probs) -> np.ndarray:
        return truncated_quantiles(self.mu, self.sigma2, probs, self.lower, self.upper)

    def cdf(self, x) -> float | np.ndarray:
        result = truncated_cdf(x, self.mu, self.sigma2, self.lower, self.upper)
        return float(result) if np.isscalar(x) else result


def quantile(dist: TruncatedGaussian, q: float) -> float:
    """Quantile of a truncated Gaussian at level ``q`` in (0, 1)."""
    return dist.quantile(q)


# --------------------------------------------------------------------------
# Online difference statistics
# --------------------------------------------------------------------------

@dataclass
class DeltaStats:
    """Zero-mean second moments of wind-speed differences, updated online.

    Components: per-cell vertical differences, per-step temporal differences,
    and their cross moment. Each component switches from its prior to the
    online estimate once it has ``n_min`` samples; until then the prior entry
    is used. ``frozen_cov`` pins the whole matrix, bypassing accumulation.
    """

    prior_cov: np.ndarray
    n_min: int = 10
    frozen_cov: np.ndarray | None = None
    n_space: int = 0
    n_time: int = 0
    n_cross: int = 0
    sum_sq_space: float = 0.0
    sum_sq_time: float = 0.0
    sum_cross: float = 0.0

    def __post_init__(self) -> None:
        self.prior_cov = _check_psd_2x2(self.prior_cov, "prior_cov")
        if self.frozen_cov is not None:
            self.frozen_cov = _check_psd_2x2(self.frozen_cov, "frozen_cov")
        if self.n_min < 1:
            raise ValueError(f"n_min must be at least 1, got {self.n_min}")

    @property
    def active(self) -> bool:
        return min(self.n_space, self.n_time) >= self.n_min

    @property
    def cov(self) -> np.ndarray:
        """The 2x2 matrix the variance model currently uses."""
        if self.frozen_cov is not None:
            return self.frozen_cov.copy()
        if not self.active:
            return self.prior_cov.copy()
        var_h = self.sum_sq_space / self.n_space
        var_t = self.sum_sq_time / self.n_time
        cross = self.sum_cross / self.n_cross if self.n_cross >= self.n_min else self.prior_cov[0, 1]
        # Clamp the cross moment so the matrix stays positive semi-definite.
        bound = np.sqrt(var_h * var_t)
        cross = float(np.clip(cross, -bound, bound))
        return np.array([[var_h, cross], [cross, var_t]])


def _check_psd_2x2(matrix, name: str) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (2, 2):
        raise ValueError(f"{name} must be 2x2, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError(f"{name} must be finite")
    if matrix[0, 1] != matrix[1, 0]:
        raise ValueError(f"{name} must be symmetric")
    if matrix[0, 0] < 0 or matrix[1, 1] < 0 or matrix[0, 1] ** 2 > matrix[0, 0] * matrix[1, 1]:
        raise ValueError(f"{name} must be positive semi-definite")
    out = matrix.copy()
    out.setflags(write=False)
    return out


def update_delta_stats(stats: DeltaStats, prev: ObservationSet | None, curr: ObservationSet) -> DeltaStats:
    """Fold one step's observations into the difference statistics.

    Vertical samples come from readings one cell apart in ``curr``; temporal
    samples from altitudes observed in both ``prev`` and ``curr`` one step
    apart; cross samples pair a vertical difference with the temporal
    difference at its lower altitude. Mutates and returns ``stats``.
    """
    adjacent = np.diff(curr.levels) == 1
    d_space = (curr.speeds[1:] - curr.speeds[:-1])[adjacent]
    stats.n_space += d_space.size
    stats.sum_sq_space += float(d_space @ d_space)

    if prev is None or curr.t - prev.t != 1:
        return stats

    common, prev_idx, curr_idx = np.intersect1d(prev.levels, curr.levels, return_indices=True)
    if common.size:
        d_time = curr.speeds[curr_idx] - prev.speeds[prev_idx]
        stats.n_time += d_time.size
        stats.sum_sq_time += float(d_time @ d_time)

        anchors = curr.levels[:-1][adjacent]
        _, space_idx, time_idx = np.intersect1d(anchors, common, return_indices=True)
        if space_idx.size:
            paired = d_space[space_idx] * d_time[time_idx]
            stats.n_cross += paired.size
            stats.sum_cross += float(paired.sum())
    return stats


@dataclass(frozen=True)
class ForecastConfig:
    """Priors and activation threshold for the variance model."""

    prior_space_var: float = 0.25
    prior_time_var: float = 1.0
    prior_cross: float = 0.0
    n_min: int = 10
    frozen_cov: tuple[tuple[float, float], tuple[float, float]] | None = None

    def make_stats(self) -> DeltaStats:
        prior = np.array(
            [[self.prior_space_var, self.prior_cross], [self.prior_cross, self.prior_time_var]]
        )
        frozen = None if self.frozen_cov is None else np.asarray(self.frozen_cov, dtype=float)
        return DeltaStats(prior_cov=prior, n_min=self.n_min, frozen_cov=frozen)


# --------------------------------------------------------------------------
# Persistence forecast
# --------------------------------------------------------------------------

def persistence_mean(hist: ObservationHistory, level: int, lead: int = 1) -> float:
    """Point forecast for ``level``: the latest reading nearest to it.

    The persistence mean does not depend on the lead time; ``lead`` is only
    validated so callers cannot ask for a hindcast.
    """
    if lead < 1:
        raise ValueError(f"lead must be at least 1 step, got {lead}")
    latest = hist.latest()
    return latest.speed_at(nearest_observed_level(latest, level))


def _variance_form(cov: np.ndarray, cells, steps):
    cells = np.asarray(cells, dtype=float)
    steps = np.asarray(steps, dtype=float)
    var = (
        cells * cells * cov[0, 0]
        + 2.0 * cells * steps * cov[0, 1]
        + steps * steps * cov[1, 1]
    )
    return np.maximum(var, 0.0)


def persistence_variance(stats: DeltaStats, cells: int, steps: int) -> float:
    """Forecast error variance for an extrapolation of ``cells`` altitude
    cells and ``steps`` time steps: the quadratic form d' Sigma d."""
    if cells < 0 or steps < 1:
        raise ValueError(f"need cells >= 0 and steps >= 1, got ({cells}, {steps})")
    return float(_variance_form(stats.cov, cells, steps))


def forecast_distribution(
    hist: ObservationHistory, stats: DeltaStats, level: int, lead: int
) -> TruncatedGaussian:
    """Forecast distribution for altitude index ``level`` at lead ``lead``."""
    latest = hist.latest()
    anchor = nearest_observed_level(latest, level)
    mu = latest.speed_at(anchor)
    sigma2 = persistence_variance(stats, abs(level - anchor), lead)
    return TruncatedGaussian(mu=mu, sigma2=sigma2)


def _nearest_positions(obs_levels: np.ndarray, n_levels: int) -> np.ndarray:
    """For each grid level, position into ``obs_levels`` of the nearest
    observed altitude (ties toward the lower one)."""
    targets = np.arange(n_levels)
    pos = np.searchsorted(obs_levels, targets)
    hi = np.minimum(pos, len(obs_levels) - 1)
    lo = np.maximum(pos - 1, 0)
    above = obs_levels[hi]
    below = obs_levels[lo]
    choose_above = (pos == 0) | (
        (pos < len(obs_levels)) & ((above == targets) | (targets - below > above - targets))
    )
    return np.where(choose_above, hi, lo)


@dataclass(frozen=True, eq=False)
class WindForecast:
    """Forecast distributions for every level over a short horizon.

    ``mu`` has one entry per altitude level (persistence means are
    lead-invariant); ``sigma2[h, s-1]`` is the variance at lead ``s``.
    """

    made_at: int
    mu: np.ndarray
    sigma2: np.ndarray
    lower: float = WIND_LOWER_MPS
    upper: float = WIND_UPPER_MPS

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=float)
        sigma2 = np.asarray(self.sigma2, dtype=float)
        if mu.ndim != 1 or sigma2.ndim != 2 or sigma2.shape[0] != mu.shape[0]:
            raise ValueError("mu must be (levels,), sigma2 (levels, horizon)")
        if np.any(sigma2 < 0):
            raise ValueError("variances must be non-negative")
        mu.setflags(write=False)
        sigma2.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma2", sigma2)

    @property
    def n_levels(self) -> int:
        return len(self.mu)

    @property
    def horizon(self) -> int:
        return self.sigma2.shape[1]

    def dist(self, level: int, lead: int) -> TruncatedGaussian:
        if not 1 <= lead <= self.horizon:
            raise ValueError(f"lead {lead} outside [1, {self.horizon}]")
        return TruncatedGaussian(
            mu=float(self.mu[level]),
            sigma2=float(self.sigma2[level, lead - 1]),
            lower=self.lower,
            upper=self.upper,
        )


def make_forecast(hist: ObservationHistory, stats: DeltaStats, horizon: int) -> WindForecast:
    """Build the full (level, lead) forecast table from the latest observations."""
    if horizon < 1:
        raise ValueError(f"horizon must be at least 1 step, got {horizon}")
    latest = hist.latest()
    positions = _nearest_positions(latest.levels, hist.n_levels)
    mu = latest.speeds[positions]
    cells = np.abs(np.arange(hist.n_levels) - latest.levels[positions])
    leads = np.arange(1, horizon + 1)
    sigma2 = _variance_form(stats.cov, cells[:, None], leads[None, :])
    return WindForecast(made_at=latest.t, mu=mu, sigma2=sigma2)
