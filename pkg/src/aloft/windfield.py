"""Ground-truth wind fields on a fixed altitude/time grid.

Wind speed lives on a regular grid: altitude levels spaced ``cell`` km apart
between ``h_min`` and ``h_max``, one row per ``dt``-minute time step. Fields
come from a CSV (header ``time`` plus integer altitudes in metres) or from a
seeded synthetic generator. Nothing downstream interpolates, so this grid is
the single source of spatial truth.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "DEFAULT_H_MIN_KM",
    "DEFAULT_H_MAX_KM",
    "DEFAULT_CELL_KM",
    "DEFAULT_DT_MINUTES",
    "DEFAULT_FIELD_STEPS",
    "AltitudeGrid",
    "WindFieldGrid",
    "SyntheticFieldSpec",
    "WindCsvError",
    "MalformedHeader",
    "NonMonotoneAltitudes",
    "RaggedRow",
    "MissingValue",
    "InvalidValue",
    "TooFewRows",
    "wind_at",
    "mean_profile",
    "generate_synthetic_field",
    "load_wind_csv",
    "write_wind_csv",
]

DEFAULT_H_MIN_KM = 0.15
DEFAULT_H_MAX_KM = 1.0
DEFAULT_CELL_KM = 0.05
DEFAULT_DT_MINUTES = 30.0
# Three months of half-hour steps: 92 days * 48.
DEFAULT_FIELD_STEPS = 4416


class WindCsvError(ValueError):
    """Raised when a wind CSV cannot be parsed into a field."""


class MalformedHeader(WindCsvError):
    pass


class NonMonotoneAltitudes(WindCsvError):
    pass


class RaggedRow(WindCsvError):
    def __init__(self, row: int, expected: int, got: int):
        super().__init__(f"row {row}: expected {expected} columns, got {got}")
        self.row = row


class MissingValue(WindCsvError):
    def __init__(self, row: int, col: int):
        super().__init__(f"row {row}, column {col}: missing wind speed")
        self.row = row
        self.col = col


class InvalidValue(WindCsvError):
    def __init__(self, row: int, col: int, text: str):
        super().__init__(f"row {row}, column {col}: invalid wind speed {text!r}")
        self.row = row
        self.col = col


class TooFewRows(WindCsvError):
    pass


@dataclass(frozen=True)
class AltitudeGrid:
    """Evenly spaced operating altitudes in km, stored to the metre.

    Construction snaps ``h_min``/``h_max``/``cell`` to integer metres so that
    level altitudes are exact decimals and index arithmetic never drifts.
    """

    h_min: float = DEFAULT_H_MIN_KM
    h_max: float = DEFAULT_H_MAX_KM
    cell: float = DEFAULT_CELL_KM
    levels: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        m_min = round(self.h_min * 1000)
        m_max = round(self.h_max * 1000)
        m_cell = round(self.cell * 1000)
        if m_cell <= 0:
            raise ValueError(f"cell size must be positive, got {self.cell!r}")
        if m_min < 0 or m_max <= m_min:
            raise ValueError(f"need 0 <= h_min < h_max, got [{self.h_min!r}, {self.h_max!r}]")
        if (m_max - m_min) % m_cell != 0:
            raise ValueError(
                f"band [{self.h_min}, {self.h_max}] km is not a whole number of {self.cell} km cells"
            )
        metres = np.arange(m_min, m_max + m_cell, m_cell)
        levels = metres / 1000.0
        levels.setflags(write=False)
        object.__setattr__(self, "levels", levels)

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    def level_km(self, index: int) -> float:
        return float(self.levels[index])

    def index_of(self, altitude_km: float) -> int:
        """Index of an altitude that must sit exactly on the grid."""
        metres = round(altitude_km * 1000)
        m_min = round(self.h_min * 1000)
        m_cell = round(self.cell * 1000)
        q, r = divmod(metres - m_min, m_cell)
        if r != 0 or q < 0 or q >= self.n_levels:
            raise ValueError(f"altitude {altitude_km!r} km is not on the grid")
        return int(q)


@dataclass(frozen=True, eq=False)
class WindFieldGrid:
    """Wind speeds (m/s) on a (time, altitude) grid, immutable once built."""

    grid: AltitudeGrid
    dt_minutes: float
    speeds: np.ndarray
    time_labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        speeds = np.asarray(self.speeds, dtype=float)
        if speeds.ndim != 2:
            raise ValueError(f"speeds must be 2-D (time, altitude), got shape {speeds.shape}")
        if speeds.shape[1] != self.grid.n_levels:
            raise ValueError(
                f"speeds have {speeds.shape[1]} altitude columns, grid has {self.grid.n_levels}"
            )
        if self.dt_minutes <= 0:
            raise ValueError(f"dt_minutes must be positive, got {self.dt_minutes!r}")
        if not np.all(np.isfinite(speeds)):
            raise ValueError("speeds must be finite")
        if np.any(speeds < 0):
            raise ValueError("speeds must be non-negative")
        if self.time_labels is not None and len(self.time_labels) != speeds.shape[0]:
            raise ValueError("one time label per row required")
        speeds = speeds.copy()
        speeds.setflags(write=False)
        object.__setattr__(self, "speeds", speeds)

    @property
    def steps(self) -> int:
        return self.speeds.shape[0]

    def label(self, t: int) -> str:
        if self.time_labels is not None:
            return self.time_labels[t]
        return str(t)


def wind_at(fld: WindFieldGrid, t: int, level: int) -> float:
    """True wind speed at time index ``t`` and altitude index ``level``."""
    if not 0 <= t < fld.steps:
        raise IndexError(f"time index {t} outside [0, {fld.steps})")
    if not 0 <= level < fld.grid.n_levels:
        raise IndexError(f"altitude index {level} outside [0, {fld.grid.n_levels})")
    return float(fld.speeds[t, level])


@dataclass(frozen=True)
class SyntheticFieldSpec:
    """Parameters of the seeded synthetic wind field.

    The field is a power-law mean profile plus a shared diurnal oscillation
    plus vertically coherent AR(1) noise, clipped at zero. With the noise and
    oscillation amplitudes set to zero the field is constant in time and
    equals the mean profile.
    """

    seed: int = 2014
    ref_speed: float = 7.5
    ref_altitude_km: float = 0.5
    shear_exponent: float = 0.2
    diurnal_amplitude: float = 1.5
    diurnal_period_steps: float = 48.0
    ar1_rho: float = 0.97
    noise_sd: float = 2.2
    coherence_km: float = 0.3

    def __post_init__(self) -> None:
        if self.ref_speed < 0:
            raise ValueError("ref_speed must be non-negative")
        if self.ref_altitude_km <= 0:
            raise ValueError("ref_altitude_km must be positive")
        if not 0.0 <= self.ar1_rho < 1.0:
            raise ValueError(f"ar1_rho must lie in [0, 1), got {self.ar1_rho!r}")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be non-negative")
        if self.diurnal_period_steps <= 0:
            raise ValueError("diurnal_period_steps must be positive")
        if self.coherence_km <= 0:
            raise ValueError("coherence_km must be positive")


def mean_profile(spec: SyntheticFieldSpec, grid: AltitudeGrid) -> np.ndarray:
    """Power-law mean wind speed per grid level."""
    return spec.ref_speed * (grid.levels / spec.ref_altitude_km) ** spec.shear_exponent


def generate_synthetic_field(
    spec: SyntheticFieldSpec,
    grid: AltitudeGrid | None = None,
    steps: int = DEFAULT_FIELD_STEPS,
    dt_minutes: float = DEFAULT_DT_MINUTES,
) -> WindFieldGrid:
    """Generate a reproducible synthetic wind field.

    The same spec, grid, and step count always produce the same field; the
    noise is drawn once from ``numpy.random.default_rng(spec.seed)``.
    """
    if grid is None:
        grid = AltitudeGrid()
    if steps < 2:
        raise ValueError(f"need at least 2 time steps, got {steps}")

    base = mean_profile(spec, grid)[None, :]
    phase = 2.0 * np.pi * np.arange(steps) / spec.diurnal_period_steps
    diurnal = spec.diurnal_amplitude * np.sin(phase)[:, None]

    if spec.noise_sd > 0.0:
        rng = np.random.default_rng(spec.seed)
        # Vertical correlation: exponential kernel in altitude separation.
        sep = np.abs(grid.levels[:, None] - grid.levels[None, :])
        corr = np.exp(-sep / spec.coherence_km)
        chol = np.linalg.cholesky(corr)
        shocks = rng.standard_normal((steps, grid.n_levels)) @ chol.T
        noise = np.empty_like(shocks)
        noise[0] = shocks[0]
        scale = np.sqrt(1.0 - spec.ar1_rho**2)
        for t in range(1, steps):
            noise[t] = spec.ar1_rho * noise[t - 1] + scale * shocks[t]
        noise *= spec.noise_sd
    else:
        noise = 0.0

    speeds = np.maximum(base + diurnal + noise, 0.0)
    return WindFieldGrid(grid=grid, dt_minutes=dt_minutes, speeds=speeds)


def load_wind_csv(path: str | Path, dt_minutes: float = DEFAULT_DT_MINUTES) -> WindFieldGrid:
    """Load a wind field from CSV.

    Expected layout: header ``time,<alt_m>,<alt_m>,...`` with altitudes as
    strictly increasing, evenly spaced integer metres; one row per time step
    with a label followed by one non-negative speed per altitude. Any
    structural or value problem raises a :class:`WindCsvError` subclass that
    names the offending row and column (1-based, counting the header).
    """
    path = Path(path)
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedHeader("empty file") from None

        if len(header) < 3:
            raise MalformedHeader("need a time column and at least two altitude columns")
        if header[0].strip().lower() != "time":
            raise MalformedHeader(f"first column must be 'time', got {header[0]!r}")
        try:
            alts_m = [int(cell.strip()) for cell in header[1:]]
        except ValueError as exc:
            raise MalformedHeader(f"altitude columns must be integer metres: {exc}") from None
        if any(b <= a for a, b in zip(alts_m, alts_m[1:])):
            raise NonMonotoneAltitudes(f"altitudes must strictly increase, got {alts_m}")
        spacing = {b - a for a, b in zip(alts_m, alts_m[1:])}
        if len(spacing) != 1:
            raise MalformedHeader(f"altitude spacing must be uniform, got steps {sorted(spacing)}")
        if alts_m[0] < 0:
            raise MalformedHeader(f"altitudes must be non-negative, got {alts_m[0]}")

        cell_m = spacing.pop()
        grid = AltitudeGrid(h_min=alts_m[0] / 1000.0, h_max=alts_m[-1] / 1000.0, cell=cell_m / 1000.0)

        labels: list[str] = []
        rows: list[list[float]] = []
        expected = 1 + len(alts_m)
        for line_no, row in enumerate(reader, start=2):
            if len(row) != expected:
                raise RaggedRow(line_no, expected, len(row))
            labels.append(row[0])
            values = []
            for col_no, text in enumerate(row[1:], start=2):
                text = text.strip()
                if not text:
                    raise MissingValue(line_no, col_no)
                try:
                    value = float(text)
                except ValueError:
                    raise InvalidValue(line_no, col_no, text) from None
                if not np.isfinite(value) or value < 0.0:
                    raise InvalidValue(line_no, col_no, text)
                values.append(value)
            rows.append(values)

    if len(rows) < 2:
        raise TooFewRows(f"need at least 2 data rows, got {len(rows)}")

    return WindFieldGrid(
        grid=grid,
        dt_minutes=dt_minutes,
        speeds=np.asarray(rows, dtype=float),
        time_labels=tuple(labels),
    )


def write_wind_csv(fld: WindFieldGrid, path: str | Path) -> None:
    """Write a field in the same CSV layout that :func:`load_wind_csv` reads.

    Speeds are written with ``repr`` so a load/write/load round trip is
    bitwise exact.
    """
    path = Path(path)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["time"] + [str(round(h * 1000)) for h in fld.grid.levels])
        for t in range(fld.steps):
            writer.writerow([fld.label(t)] + [repr(float(v)) for v in fld.speeds[t]])
