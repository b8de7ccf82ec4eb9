"""Analytic bubble-plume field over a cylindrical column.

Stands in for unpublished simulation data: a Gaussian gas plume rises
from a sparger on the axis, widening with height, with hydrostatic
pressure reduced by the gas fraction. All three fields are deterministic
functions of (r, z), so a seeded sampler yields reproducible node tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import DataSet, FeatureStage, Sample

RAMP_LENGTH = 0.1  # m over which the plume switches on above the sparger


@dataclass(frozen=True)
class ReactorGeometry:
    """Cylindrical column dimensions (meters)."""

    height: float = 2.6
    diameter: float = 0.288
    sparger_height: float = 0.5

    def __post_init__(self):
        if not self.height > self.sparger_height >= 0.0:
            raise ValueError("geometry requires height > sparger_height >= 0")
        if self.diameter <= 0.0:
            raise ValueError("geometry requires diameter > 0")

    @property
    def radius(self) -> float:
        return self.diameter / 2.0


@dataclass(frozen=True)
class PlumeParams:
    """Plume shape, fluid constants, and target noise level.

    Defaults are physically plausible for an air-water column; they are
    configuration, not measured truth.
    """

    alpha_max: float = 0.15   # peak gas holdup on the axis
    sigma0: float = 0.03      # plume half-width at the sparger (m)
    spread: float = 0.02      # half-width growth per meter of rise
    u_max: float = 0.25       # peak gas superficial velocity (m/s)
    rho_liquid: float = 998.0
    g: float = 9.81
    p_atm: float = 101325.0
    noise_sd: float = 0.005   # additive Gaussian noise on the target

    def __post_init__(self):
        if not 0.0 < self.alpha_max < 1.0:
            raise ValueError("alpha_max must be in (0, 1)")
        if self.sigma0 <= 0.0 or self.spread < 0.0 or self.noise_sd < 0.0:
            raise ValueError("sigma0 > 0, spread >= 0, noise_sd >= 0 required")


def _check_inside(x, y, z, geom: ReactorGeometry) -> None:
    r2 = np.asarray(x) ** 2 + np.asarray(y) ** 2
    z = np.asarray(z)
    if np.any(r2 > geom.radius ** 2 * (1.0 + 1e-12)) or np.any(z < 0.0) \
            or np.any(z > geom.height):
        raise ValueError("point outside cylinder")


def _width(z, geom: ReactorGeometry, params: PlumeParams):
    return params.sigma0 + params.spread * np.maximum(z - geom.sparger_height, 0.0)


def _ramp(z, geom: ReactorGeometry):
    return np.clip((np.asarray(z, dtype=float) - geom.sparger_height) / RAMP_LENGTH,
                   0.0, 1.0)


def _holdup(x, y, z, geom: ReactorGeometry, params: PlumeParams):
    r2 = np.asarray(x) ** 2 + np.asarray(y) ** 2
    sigma = _width(z, geom, params)
    alpha = params.alpha_max * np.exp(-r2 / (2.0 * sigma ** 2)) * _ramp(z, geom)
    return np.clip(alpha, 0.0, 1.0)


def holdup_at(point, geom: ReactorGeometry, params: PlumeParams) -> float:
    """Gas volume fraction at an interior point (x, y, z)."""
    x, y, z = point
    _check_inside(x, y, z, geom)
    return float(_holdup(x, y, z, geom, params))


def mean_holdup(z, geom: ReactorGeometry, params: PlumeParams):
    """Cross-section average of the holdup field at height z.

    Closed form of the disc integral of the radial Gaussian:
    alpha_max * ramp(z) * (2 sigma^2 / R^2) * (1 - exp(-R^2 / (2 sigma^2))).
    """
    sigma = _width(z, geom, params)
    R2 = geom.radius ** 2
    frac = 2.0 * sigma ** 2 / R2 * (1.0 - np.exp(-R2 / (2.0 * sigma ** 2)))
    return params.alpha_max * _ramp(z, geom) * frac


def _pressure(z, geom: ReactorGeometry, params: PlumeParams):
    head = (geom.height - np.asarray(z, dtype=float))
    return params.p_atm + params.rho_liquid * params.g * head \
        * (1.0 - mean_holdup(z, geom, params))


def pressure_at(point, geom: ReactorGeometry, params: PlumeParams) -> float:
    """Hydrostatic pressure at an interior point, corrected for mean holdup."""
    x, y, z = point
    _check_inside(x, y, z, geom)
    return float(_pressure(z, geom, params))


def _velocity(x, y, z, geom: ReactorGeometry, params: PlumeParams):
    r2 = np.asarray(x) ** 2 + np.asarray(y) ** 2
    sigma = _width(z, geom, params)
    return params.u_max * np.exp(-r2 / (2.0 * sigma ** 2)) * _ramp(z, geom)


def velocity_at(point, geom: ReactorGeometry, params: PlumeParams) -> float:
    """Gas superficial velocity at an interior point (same profile as holdup)."""
    x, y, z = point
    _check_inside(x, y, z, geom)
    return float(_velocity(x, y, z, geom, params))


def generate_dataset(geom: ReactorGeometry, params: PlumeParams, n: int,
                     seed: int, stage: FeatureStage = FeatureStage.XYZPV5,
                     ) -> DataSet:
    """Sample n nodes uniformly inside the cylinder and tabulate the fields.

    Polar sampling with radius R*sqrt(U) gives the area-correct radial
    density. The target is holdup plus seeded Gaussian noise, clamped to
    [0, 1]. Row order equals sampling order; identical (geom, params, n,
    seed) reproduce identical datasets.
    """
    if n < 1:
        raise ValueError(f"generate_dataset: n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    u = rng.random((n, 3))
    eps = rng.standard_normal(n)
    r = geom.radius * np.sqrt(u[:, 0])
    theta = 2.0 * math.pi * u[:, 1]
    x = r * np.cos(theta)
    y = r * np.sin(theta)
    z = geom.height * u[:, 2]
    pressure = _pressure(z, geom, params)
    velocity = _velocity(x, y, z, geom, params)
    alpha = np.clip(_holdup(x, y, z, geom, params) + params.noise_sd * eps,
                    0.0, 1.0)
    samples = tuple(
        Sample(float(x[i]), float(y[i]), float(z[i]), float(pressure[i]),
               float(velocity[i]), float(alpha[i]))
        for i in range(n)
    )
    return DataSet(samples, stage)
