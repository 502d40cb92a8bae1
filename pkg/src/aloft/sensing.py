"""Sensor configurations and the observation record they produce.

Three idealised setups read the true field without noise:

* ``SINGLE``: an anemometer on the platform, so only the current altitude.
* ``MULTIPLE``: instruments along the tether, every level at or below the
  platform.
* ``REMOTE``: profiling equipment, every level in the operating band.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .windfield import WindFieldGrid

__all__ = [
    "SensorConfig",
    "ObservationSet",
    "ObservationHistory",
    "observe",
    "nearest_observed_level",
]


class SensorConfig(enum.Enum):
    SINGLE = "single"
    MULTIPLE = "multiple"
    REMOTE = "remote"

    @classmethod
    def parse(cls, name: str) -> "SensorConfig":
        try:
            return cls(name.strip().lower())
        except ValueError:
            choices = ", ".join(c.value for c in cls)
            raise ValueError(f"unknown sensor config {name!r} (choices: {choices})") from None


@dataclass(frozen=True, eq=False)
class ObservationSet:
    """Wind readings taken at one time step, keyed by altitude index."""

    t: int
    levels: np.ndarray
    speeds: np.ndarray

    def __post_init__(self) -> None:
        levels = np.asarray(self.levels, dtype=int)
        speeds = np.asarray(self.speeds, dtype=float)
        if levels.ndim != 1 or levels.shape != speeds.shape:
            raise ValueError("levels and speeds must be 1-D arrays of equal length")
        if len(levels) == 0:
            raise ValueError("an observation set cannot be empty")
        if np.any(np.diff(levels) <= 0):
            raise ValueError("levels must strictly increase")
        if np.any(speeds < 0) or not np.all(np.isfinite(speeds)):
            raise ValueError("speeds must be finite and non-negative")
        levels.setflags(write=False)
        speeds.setflags(write=False)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "speeds", speeds)

    def speed_at(self, level: int) -> float:
        idx = np.searchsorted(self.levels, level)
        if idx >= len(self.levels) or self.levels[idx] != level:
            raise KeyError(f"no reading at altitude index {level}")
        return float(self.speeds[idx])


def observe(config: SensorConfig, fld: WindFieldGrid, t: int, hub_level: int) -> ObservationSet:
    """Read the true field at time ``t`` from altitude ``hub_level``."""
    n = fld.grid.n_levels
    if not 0 <= t < fld.steps:
        raise IndexError(f"time index {t} outside [0, {fld.steps})")
    if not 0 <= hub_level < n:
        raise IndexError(f"altitude index {hub_level} outside [0, {n})")
    if config is SensorConfig.SINGLE:
        levels = np.array([hub_level])
    elif config is SensorConfig.MULTIPLE:
        levels = np.arange(hub_level + 1)
    else:
        levels = np.arange(n)
    return ObservationSet(t=t, levels=levels, speeds=fld.speeds[t, levels])


def nearest_observed_level(obs: ObservationSet, level: int) -> int:
    """Observed altitude index closest to ``level``; ties go to the lower one."""
    levels = obs.levels
    pos = int(np.searchsorted(levels, level))
    if pos == 0:
        return int(levels[0])
    if pos == len(levels):
        return int(levels[-1])
    below, above = int(levels[pos - 1]), int(levels[pos])
    if above == level:
        return above
    return below if level - below <= above - level else above


@dataclass
class ObservationHistory:
    """Chronological observation sets from one simulation run."""

    n_levels: int
    sets: list[ObservationSet] = field(default_factory=list)

    def append(self, obs: ObservationSet) -> None:
        if self.sets and obs.t <= self.sets[-1].t:
            raise ValueError(f"observation time {obs.t} not after {self.sets[-1].t}")
        if obs.levels[-1] >= self.n_levels:
            raise ValueError(f"altitude index {obs.levels[-1]} outside [0, {self.n_levels})")
        self.sets.append(obs)

    def latest(self) -> ObservationSet:
        if not self.sets:
            raise ValueError("no observations recorded yet")
        return self.sets[-1]

    def mask(self) -> np.ndarray:
        """Boolean (steps, levels) array: True where a reading exists."""
        out = np.zeros((len(self.sets), self.n_levels), dtype=bool)
        for row, obs in enumerate(self.sets):
            out[row, obs.levels] = True
        return out

    def __len__(self) -> int:
        return len(self.sets)
