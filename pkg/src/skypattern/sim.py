"""Synthetic flights over a known ground-truth pattern.

Trajectories are laid out in the station-centered ENU frame (altitude means
meters above the station antenna) and converted to geodetic positions, so a
simulated log exercises the same geodesy path as a real one. RSRP per sample
is tx_power - FSPL + truth gain + seeded Gaussian noise (i.i.d. in dB).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .errors import (
    DegenerateTrajectoryError,
    IncompleteGridError,
    ValueOutOfRangeError,
    ZeroDistanceError,
)
from .geometry import Attitude, EnuVector, enu_to_geodetic, link_angles
from .link_budget import fspl_db

if TYPE_CHECKING:
    from .dataio import FlightSample, GroundStation
    from .pattern import PatternGrid

TRAJECTORY_KINDS = ("orbit", "radial", "lawnmower")


@dataclass(frozen=True)
class TrajectorySpec:
    """Geometry of one synthetic flight, in station-centered ENU.

    orbit: circle of ``radius_m`` at ``altitude_m``, starting due north,
    clockwise. radial: straight south-to-north overflight of ``length_m``
    centered on the station. lawnmower: ``passes`` north-south legs
    ``spacing_m`` apart, swath centered on the station.
    """

    kind: str
    altitude_m: float
    speed_mps: float = 5.0
    sample_rate_hz: float = 10.0
    radius_m: float | None = None
    length_m: float | None = None
    spacing_m: float | None = None
    passes: int = 1
    attitude: Attitude = field(default_factory=lambda: Attitude(0.0, 0.0, 0.0))
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in TRAJECTORY_KINDS:
            raise ValueOutOfRangeError("kind", f"{self.kind!r} not one of {TRAJECTORY_KINDS}")
        if not self.speed_mps > 0:
            raise ValueOutOfRangeError("speed_mps", "must be > 0")
        if not self.sample_rate_hz > 0:
            raise ValueOutOfRangeError("sample_rate_hz", "must be > 0")
        if self.kind == "orbit":
            if self.radius_m is None or not self.radius_m > 0:
                raise ValueOutOfRangeError("radius_m", "orbit needs radius_m > 0")
        else:
            if self.length_m is None or not self.length_m > 0:
                raise ValueOutOfRangeError("length_m", f"{self.kind} needs length_m > 0")
        if self.kind == "lawnmower":
            if self.spacing_m is None or not self.spacing_m > 0:
                raise ValueOutOfRangeError("spacing_m", "lawnmower needs spacing_m > 0")
            if self.passes < 1:
                raise ValueOutOfRangeError("passes", "must be >= 1")


class TruthPattern:
    """Ground-truth combined gain: an explicit grid or a parametric lobe.

    The parametric form is gain(theta) = g0 + g1 * cos(90deg - theta)^n,
    azimuth-symmetric; below the horizon the lobe term is zero (the base of
    the power is clamped at 0 to keep gains finite for fractional n).
    """

    def __init__(self, fn):
        self._fn = fn

    @classmethod
    def parametric(cls, g0_db: float, g1_db: float, exponent: float) -> "TruthPattern":
        if not exponent > 0:
            raise ValueOutOfRangeError("exponent", "must be > 0")

        def fn(phi_deg: float, theta_deg: float) -> float:
            base = max(math.cos(math.radians(90.0 - theta_deg)), 0.0)
            return g0_db + g1_db * base**exponent

        return cls(fn)

    @classmethod
    def from_grid(cls, grid: "PatternGrid") -> "TruthPattern":
        if not grid.is_complete():
            raise IncompleteGridError("truth grid must have no missing cells")
        return cls(grid.gain_at)

    def gain_db(self, phi_deg: float, theta_deg: float) -> float:
        return self._fn(phi_deg, theta_deg)


def _sample_distances(length_m: float, step_m: float) -> np.ndarray:
    n = int(math.floor(length_m / step_m)) + 1
    return np.arange(n) * step_m


def trajectory_enu(spec: TrajectorySpec) -> list[EnuVector]:
    """ENU sample positions along the trajectory at the configured spacing."""
    step = spec.speed_mps / spec.sample_rate_hz
    points: list[EnuVector] = []
    if spec.kind == "orbit":
        radius = float(spec.radius_m)
        circumference = 2.0 * math.pi * radius
        n = max(1, math.ceil(circumference / step - 1e-12))
        for k in range(n):
            psi = k * step / radius
            points.append(EnuVector(radius * math.sin(psi), radius * math.cos(psi), spec.altitude_m))
    elif spec.kind == "radial":
        half = spec.length_m / 2.0
        for s in _sample_distances(spec.length_m, step):
            points.append(EnuVector(0.0, -half + s, spec.altitude_m))
    else:  # lawnmower
        half = spec.length_m / 2.0
        offsets = (np.arange(spec.passes) - (spec.passes - 1) / 2.0) * spec.spacing_m
        along = _sample_distances(spec.length_m, step)
        for p, east in enumerate(offsets):
            leg = along if p % 2 == 0 else along[::-1]
            for s in leg:
                points.append(EnuVector(float(east), -half + float(s), spec.altitude_m))
    return points


def generate_flight(
    spec: TrajectorySpec,
    station: "GroundStation",
    truth: TruthPattern,
    noise_sigma_db: float = 0.0,
) -> list["FlightSample"]:
    """Simulate one flight log; deterministic for a given spec (seed included)."""
    from .dataio import FlightSample

    if noise_sigma_db < 0:
        raise ValueOutOfRangeError("noise_sigma_db", "must be >= 0")
    points = trajectory_enu(spec)
    rng = np.random.default_rng(spec.rng_seed)
    noise = rng.normal(0.0, noise_sigma_db, len(points))
    samples: list[FlightSample] = []
    for k, enu in enumerate(points):
        position = enu_to_geodetic(enu, station.position)
        try:
            angles = link_angles(position, spec.attitude, station)
        except ZeroDistanceError:
            raise DegenerateTrajectoryError(
                f"sample {k} coincides with the station position"
            ) from None
        rsrp = (
            station.tx_power_dbm
            - fspl_db(angles.d3d_m, station.frequency_hz)
            + truth.gain_db(angles.phi_u_deg, angles.theta_u_deg)
            + noise[k]
        )
        samples.append(FlightSample(k / spec.sample_rate_hz, position, spec.attitude, float(rsrp)))
    return samples
