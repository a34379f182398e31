"""Geodesy and link-angle extraction.

Converts WGS-84 geodetic positions into the local east/north/up frame at the
ground-station antenna, and from there into the four link angles (azimuth and
elevation on each end) plus 3D distance. Azimuths are compass bearings
(degrees clockwise from true north); elevations are referenced to the local
horizontal (0 deg = horizon, 90 deg = zenith).

The UAV-frame angles assume the fixed-orientation regime: constant yaw, zero
pitch and roll. Out-of-tolerance attitudes are rejected rather than rotated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

from .errors import OrientationOutOfScopeError, ValueOutOfRangeError, ZeroDistanceError

if TYPE_CHECKING:
    from .dataio import FlightSample, GroundStation

# WGS-84 ellipsoid
WGS84_A = 6378137.0
WGS84_F = 1.0 / 298.257223563
WGS84_E2 = WGS84_F * (2.0 - WGS84_F)

# Below this 3D distance the link angles are undefined.
MIN_LINK_DISTANCE_M = 1e-3

# |elevation| within this many degrees of 90 pins azimuth to 0 (pole rows are
# azimuth-degenerate anyway).
ZENITH_TOL_DEG = 1e-9

DEFAULT_ORIENTATION_TOL_DEG = 5.0


@dataclass(frozen=True)
class GeodeticPosition:
    """WGS-84 position; altitude is meters above the ellipsoid."""

    lat_deg: float
    lon_deg: float
    alt_m: float

    def __post_init__(self):
        if not (-90.0 <= self.lat_deg <= 90.0):
            raise ValueOutOfRangeError("lat_deg", f"{self.lat_deg} not in [-90, 90]")
        if not (-180.0 <= self.lon_deg < 180.0):
            raise ValueOutOfRangeError("lon_deg", f"{self.lon_deg} not in [-180, 180)")
        if not math.isfinite(self.alt_m):
            raise ValueOutOfRangeError("alt_m", "must be finite")


@dataclass(frozen=True)
class Attitude:
    """UAV body attitude. Yaw is compass convention: 0 = true north, clockwise."""

    yaw_deg: float
    pitch_deg: float
    roll_deg: float

    def __post_init__(self):
        if not (0.0 <= self.yaw_deg < 360.0):
            raise ValueOutOfRangeError("yaw_deg", f"{self.yaw_deg} not in [0, 360)")
        if not (-90.0 <= self.pitch_deg <= 90.0):
            raise ValueOutOfRangeError("pitch_deg", f"{self.pitch_deg} not in [-90, 90]")
        if not (-180.0 <= self.roll_deg < 180.0):
            raise ValueOutOfRangeError("roll_deg", f"{self.roll_deg} not in [-180, 180)")


@dataclass(frozen=True)
class LinkAngles:
    """The four link angles of one sample plus the 3D distance.

    phi_g/theta_g: azimuth/elevation of the UAV as seen from the ground
    station. phi_u/theta_u: azimuth/elevation of the ground station in the
    UAV body frame.
    """

    phi_g_deg: float
    theta_g_deg: float
    phi_u_deg: float
    theta_u_deg: float
    d3d_m: float


@dataclass(frozen=True)
class EnuVector:
    """Displacement in the local east/north/up frame at the ground station."""

    east_m: float
    north_m: float
    up_m: float

    def norm(self) -> float:
        return math.sqrt(self.east_m**2 + self.north_m**2 + self.up_m**2)


def geodetic_to_ecef(pos: GeodeticPosition) -> tuple[float, float, float]:
    lat = math.radians(pos.lat_deg)
    lon = math.radians(pos.lon_deg)
    sin_lat = math.sin(lat)
    cos_lat = math.cos(lat)
    n = WGS84_A / math.sqrt(1.0 - WGS84_E2 * sin_lat * sin_lat)
    x = (n + pos.alt_m) * cos_lat * math.cos(lon)
    y = (n + pos.alt_m) * cos_lat * math.sin(lon)
    z = (n * (1.0 - WGS84_E2) + pos.alt_m) * sin_lat
    return x, y, z


def ecef_to_geodetic(x: float, y: float, z: float) -> GeodeticPosition:
    """Iterative ECEF -> geodetic conversion (sub-micrometer after a few passes)."""
    lon = math.atan2(y, x)
    p = math.hypot(x, y)
    lat = math.atan2(z, p * (1.0 - WGS84_E2))
    alt = 0.0
    for _ in range(10):
        sin_lat = math.sin(lat)
        n = WGS84_A / math.sqrt(1.0 - WGS84_E2 * sin_lat * sin_lat)
        alt = p / math.cos(lat) - n if abs(lat) < math.pi / 4 else z / sin_lat - n * (1.0 - WGS84_E2)
        new_lat = math.atan2(z, p * (1.0 - WGS84_E2 * n / (n + alt)))
        if abs(new_lat - lat) < 1e-14:
            lat = new_lat
            break
        lat = new_lat
    lon_deg = math.degrees(lon)
    if lon_deg >= 180.0:
        lon_deg -= 360.0
    return GeodeticPosition(math.degrees(lat), lon_deg, alt)


def geodetic_to_enu(target: GeodeticPosition, origin: GeodeticPosition) -> EnuVector:
    """ECEF displacement of target from origin, rotated into ENU at origin."""
    xt, yt, zt = geodetic_to_ecef(target)
    x0, y0, z0 = geodetic_to_ecef(origin)
    dx, dy, dz = xt - x0, yt - y0, zt - z0
    lat = math.radians(origin.lat_deg)
    lon = math.radians(origin.lon_deg)
    sin_lat, cos_lat = math.sin(lat), math.cos(lat)
    sin_lon, cos_lon = math.sin(lon), math.cos(lon)
    east = -sin_lon * dx + cos_lon * dy
    north = -sin_lat * cos_lon * dx - sin_lat * sin_lon * dy + cos_lat * dz
    up = cos_lat * cos_lon * dx + cos_lat * sin_lon * dy + sin_lat * dz
    return EnuVector(east, north, up)


def enu_to_geodetic(enu: EnuVector, origin: GeodeticPosition) -> GeodeticPosition:
    """Inverse of :func:`geodetic_to_enu` around the same origin."""
    lat = math.radians(origin.lat_deg)
    lon = math.radians(origin.lon_deg)
    sin_lat, cos_lat = math.sin(lat), math.cos(lat)
    sin_lon, cos_lon = math.sin(lon), math.cos(lon)
    e, n, u = enu.east_m, enu.north_m, enu.up_m
    dx = -sin_lon * e - sin_lat * cos_lon * n + cos_lat * cos_lon * u
    dy = cos_lon * e - sin_lat * sin_lon * n + cos_lat * sin_lon * u
    dz = cos_lat * n + sin_lat * u
    x0, y0, z0 = geodetic_to_ecef(origin)
    return ecef_to_geodetic(x0 + dx, y0 + dy, z0 + dz)


def link_angles(
    uav: GeodeticPosition,
    attitude: Attitude,
    station: "GroundStation",
    orientation_tol_deg: float = DEFAULT_ORIENTATION_TOL_DEG,
) -> LinkAngles:
    """Link angles and 3D distance for one UAV position.

    Valid only in the fixed-orientation regime: raises
    OrientationOutOfScopeError when |pitch| or |roll| exceeds the tolerance,
    since the yaw-only azimuth identity does not apply there.
    """
    if abs(attitude.pitch_deg) > orientation_tol_deg or abs(attitude.roll_deg) > orientation_tol_deg:
        raise OrientationOutOfScopeError(
            f"pitch={attitude.pitch_deg} roll={attitude.roll_deg} exceed tolerance {orientation_tol_deg} deg"
        )
    enu = geodetic_to_enu(uav, station.position)
    d3d = enu.norm()
    if d3d < MIN_LINK_DISTANCE_M:
        raise ZeroDistanceError(f"UAV within {MIN_LINK_DISTANCE_M} m of the station antenna")
    theta_g = math.degrees(math.asin(max(-1.0, min(1.0, enu.up_m / d3d))))
    if abs(abs(theta_g) - 90.0) <= ZENITH_TOL_DEG:
        phi_g = 0.0
    else:
        phi_g = math.degrees(math.atan2(enu.east_m, enu.north_m)) % 360.0
    phi_u = (phi_g + 180.0 - attitude.yaw_deg) % 360.0
    theta_u = theta_g
    return LinkAngles(phi_g, theta_g, phi_u, theta_u, d3d)


def circular_distance_deg(a: float, b: float) -> float:
    """Smallest absolute angular difference between two bearings."""
    return abs((a - b + 180.0) % 360.0 - 180.0)


@dataclass(frozen=True)
class RejectedSample:
    sample: "FlightSample"
    reasons: tuple[str, ...]


@dataclass
class OrientationPartition:
    accepted: list["FlightSample"]
    rejected: list[RejectedSample]


def validate_fixed_orientation(
    samples: Iterable["FlightSample"],
    expected_yaw_deg: float,
    tolerance_deg: float = DEFAULT_ORIENTATION_TOL_DEG,
) -> OrientationPartition:
    """Partition samples by the fixed-orientation assumption.

    A sample is accepted iff |pitch| and |roll| are within the tolerance and
    the yaw is within the tolerance of the expected yaw (circularly).
    Rejection reasons are per-sample, machine-readable codes.
    """
    if tolerance_deg < 0:
        raise ValueOutOfRangeError("tolerance_deg", "must be >= 0")
    accepted: list[FlightSample] = []
    rejected: list[RejectedSample] = []
    for sample in samples:
        att = sample.attitude
        reasons = []
        if abs(att.pitch_deg) > tolerance_deg:
            reasons.append("pitch-exceeds-tolerance")
        if abs(att.roll_deg) > tolerance_deg:
            reasons.append("roll-exceeds-tolerance")
        if circular_distance_deg(att.yaw_deg, expected_yaw_deg) > tolerance_deg:
            reasons.append("yaw-deviates-from-expected")
        if reasons:
            rejected.append(RejectedSample(sample, tuple(reasons)))
        else:
            accepted.append(sample)
    return OrientationPartition(accepted, rejected)
