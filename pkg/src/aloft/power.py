"""Tether-power model for a crosswind kite system.

Net electrical power over one decision interval splits into three terms:
generation from the crosswind cycle (rated above ``v_r``), the cost of
station-keeping against drag, and the extra cost of reeling while the
operating altitude changes. Speeds are in m/s, altitude changes in km per
interval, and every term is reported in kW.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "TurbineParams",
    "PowerBreakdown",
    "power",
    "stationary_net_curve",
    "movement_cost_curve",
    "net_power_curve",
]


@dataclass(frozen=True)
class TurbineParams:
    """Coefficients of the three power terms (kW when fed m/s and km)."""

    k1: float = 0.0579
    k2: float = 0.09
    k3: float = 1.08
    v_r: float = 12.0

    def __post_init__(self) -> None:
        for name in ("k1", "k2", "k3", "v_r"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")


@dataclass(frozen=True)
class PowerBreakdown:
    """Per-interval power terms in kW; ``net`` is generation minus both costs."""

    p1: float
    p2: float
    p3: float

    @property
    def net(self) -> float:
        return self.p1 - self.p2 - self.p3


def stationary_net_curve(params: TurbineParams, v):
    """Net power (kW) at constant altitude: generation minus keeping cost.

    Accepts scalar or array wind speed; the generation term saturates at the
    rated speed ``v_r``.
    """
    v = np.asarray(v, dtype=float)
    m = np.minimum(v, params.v_r)
    # cube by multiplication: pow() rounds differently in scalar and SIMD
    # code paths, and scalar/batched calls here must agree bitwise
    p1 = params.k1 * (m * m * m)
    return p1 - params.k2 * (v * v)


def movement_cost_curve(params: TurbineParams, v):
    """Movement cost per km of altitude change (kW/km) at wind speed ``v``."""
    v = np.asarray(v, dtype=float)
    return params.k3 * (v * v)


def net_power_curve(params: TurbineParams, u_km, v):
    """Net power (kW) for altitude change ``u_km`` under wind speed ``v``.

    Broadcasting follows numpy rules; this is the single arithmetic path the
    planner, objectives, and evaluation all share, so scalar and batched
    calls agree bitwise.
    """
    return stationary_net_curve(params, v) - movement_cost_curve(params, v) * np.abs(u_km)


def power(params: TurbineParams, u_km: float, v: float) -> PowerBreakdown:
    """Break one interval's power into generation, keeping, and movement terms.

    Args:
        params: power-curve coefficients.
        u_km: signed altitude change over the interval, km.
        v: wind speed at the destination altitude, m/s (must be >= 0).
    """
    if not np.isfinite(v) or v < 0.0:
        raise ValueError(f"wind speed must be finite and non-negative, got {v!r}")
    if not np.isfinite(u_km):
        raise ValueError(f"altitude change must be finite, got {u_km!r}")
    m = np.minimum(v, params.v_r)
    p1 = float(params.k1 * (m * m * m))
    p2 = float(params.k2 * (v * v))
    p3 = float(movement_cost_curve(params, v) * np.abs(u_km))
    return PowerBreakdown(p1=p1, p2=p2, p3=p3)
