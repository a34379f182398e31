"""File ingestion and emission: flight logs, station configs, grids, residuals, reports.

Flight logs are pre-joined CSVs (telemetry and RSRP on a common timestamp).
Parsing is total: malformed rows are rejected with a line number and a
machine-readable reason, never a crash. All writers go through an atomic
temp-file-plus-rename so partial outputs cannot appear.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

from .errors import (
    EmptyFileError,
    IoError,
    MissingFieldError,
    MissingHeaderError,
    NonMonotoneTimestampsWarning,
    ParseError,
    ValueOutOfRangeError,
)
from .geometry import Attitude, GeodeticPosition
from .pattern import PatternGrid, parse_pattern_text, write_pattern_text

if TYPE_CHECKING:
    from .evaluate import EvalReport

FLIGHT_HEADER = "timestamp_s,lat_deg,lon_deg,alt_m,yaw_deg,pitch_deg,roll_deg,rsrp_dbm"
RESIDUAL_HEADER = "timestamp_s,d3d_m,phi_u_deg,theta_u_deg,rsrp_meas_dbm,rsrp_pred_dbm,abs_err_db,predictor"


def read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"{path}: {exc}") from exc


def write_text(path, text: str) -> None:
    """Atomic write: temp file in the target directory, then rename."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class GroundStation:
    """Ground-station antenna site and radio parameters."""

    position: GeodeticPosition
    tx_power_dbm: float
    frequency_hz: float
    boresight_azimuth_deg: float = 0.0
    expected_uav_yaw_deg: float = 0.0
    anechoic_gs_pattern: str | None = None
    anechoic_uav_pattern: str | None = None
    label: str = ""

    def __post_init__(self):
        if not self.frequency_hz > 0:
            raise ValueOutOfRangeError("frequency_hz", f"{self.frequency_hz} must be > 0")
        if not math.isfinite(self.tx_power_dbm):
            raise ValueOutOfRangeError("tx_power_dbm", "must be finite")
        if not (0.0 <= self.boresight_azimuth_deg < 360.0):
            raise ValueOutOfRangeError("boresight_azimuth_deg", "must be in [0, 360)")
        if not (0.0 <= self.expected_uav_yaw_deg < 360.0):
            raise ValueOutOfRangeError("expected_uav_yaw_deg", "must be in [0, 360)")


@dataclass(frozen=True)
class FlightSample:
    """One pre-joined telemetry/RSRP row."""

    timestamp_s: float
    position: GeodeticPosition
    attitude: Attitude
    rsrp_dbm: float

    def __post_init__(self):
        if not math.isfinite(self.timestamp_s):
            raise ValueOutOfRangeError("timestamp_s", "must be finite")
        if not math.isfinite(self.rsrp_dbm):
            raise ValueOutOfRangeError("rsrp_dbm", "must be finite")


@dataclass(frozen=True)
class RowReject:
    line: int
    reason: str


@dataclass
class FlightLog:
    samples: list[FlightSample]
    rejected: list[RowReject]
    alt_offset_m: float = 0.0


def read_flight_log(path) -> FlightLog:
    """Parse a flight-log CSV; bad rows are rejected with line numbers.

    Leading ``#`` metadata lines are honored; ``# alt_offset_m=X`` shifts
    every altitude by X (for logs recorded above ground level rather than the
    ellipsoid). Decreasing timestamps raise a warning, not an error.
    """
    text = read_text(path)
    if text.strip() == "":
        raise EmptyFileError(f"{path}: file is empty")
    lines = text.splitlines()

    alt_offset = 0.0
    header_line = None
    body_start = 0
    for line_no, line in enumerate(lines, start=1):
        if line.startswith("#"):
            body = line[1:].strip()
            key, sep, value = body.partition("=")
            if sep and key.strip() == "alt_offset_m":
                try:
                    alt_offset = float(value)
                except ValueError:
                    raise ParseError(f"{path}: bad alt_offset_m '{value}'", line=line_no) from None
            continue
        if line.strip() == "":
            continue
        header_line = line.strip()
        body_start = line_no
        break
    if header_line is None:
        raise EmptyFileError(f"{path}: no rows after metadata")
    if header_line != FLIGHT_HEADER:
        raise MissingHeaderError(f"{path}: expected header '{FLIGHT_HEADER}', got '{header_line}'")

    samples: list[FlightSample] = []
    rejected: list[RowReject] = []
    prev_ts = None
    non_monotone_at = None
    for line_no, line in enumerate(lines[body_start:], start=body_start + 1):
        if line.strip() == "" or line.startswith("#"):
            continue
        fields = line.split(",")
        if len(fields) != 8:
            rejected.append(RowReject(line_no, "wrong-field-count"))
            continue
        try:
            values = [float(f) for f in fields]
        except ValueError:
            rejected.append(RowReject(line_no, "non-numeric-field"))
            continue
        if not all(math.isfinite(v) for v in values):
            rejected.append(RowReject(line_no, "non-finite-field"))
            continue
        ts, lat, lon, alt, yaw, pitch, roll, rsrp = values
        try:
            sample = FlightSample(
                ts,
                GeodeticPosition(lat, lon, alt + alt_offset),
                Attitude(yaw, pitch, roll),
                rsrp,
            )
        except ValueOutOfRangeError as exc:
            rejected.append(RowReject(line_no, f"{exc.name}-out-of-range"))
            continue
        if prev_ts is not None and ts < prev_ts and non_monotone_at is None:
            non_monotone_at = line_no
        prev_ts = ts
        samples.append(sample)
    if non_monotone_at is not None:
        warnings.warn(
            f"{path}: timestamps decrease at line {non_monotone_at}",
            NonMonotoneTimestampsWarning,
            stacklevel=2,
        )
    return FlightLog(samples, rejected, alt_offset)


def flight_log_text(samples: Sequence[FlightSample]) -> str:
    lines = [FLIGHT_HEADER]
    for s in samples:
        p, a = s.position, s.attitude
        lines.append(
            f"{s.timestamp_s!r},{p.lat_deg!r},{p.lon_deg!r},{p.alt_m!r},"
            f"{a.yaw_deg!r},{a.pitch_deg!r},{a.roll_deg!r},{s.rsrp_dbm!r}"
        )
    return "\n".join(lines) + "\n"


def write_flight_log(samples: Sequence[FlightSample], path) -> None:
    write_text(path, flight_log_text(samples))


def _require(obj: dict, name: str, prefix: str = ""):
    if name not in obj:
        raise MissingFieldError(prefix + name)
    return obj[name]


def read_station_config(path) -> GroundStation:
    """Load a ground-station JSON config; pattern paths resolve relative to it."""
    text = read_text(path)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}", line=exc.lineno, column=exc.colno) from None
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: top-level JSON value must be an object")

    pos_raw = _require(raw, "position")
    if not isinstance(pos_raw, dict):
        raise ParseError(f"{path}: 'position' must be an object")
    position = GeodeticPosition(
        float(_require(pos_raw, "lat_deg", "position.")),
        float(_require(pos_raw, "lon_deg", "position.")),
        float(_require(pos_raw, "alt_m", "position.")),
    )

    base = Path(path).resolve().parent

    def resolve(name):
        value = raw.get(name)
        if value is None:
            return None
        return str((base / value).resolve()) if not os.path.isabs(value) else str(value)

    return GroundStation(
        position=position,
        tx_power_dbm=float(_require(raw, "tx_power_dbm")),
        frequency_hz=float(_require(raw, "frequency_hz")),
        boresight_azimuth_deg=float(raw.get("boresight_azimuth_deg", 0.0)),
        expected_uav_yaw_deg=float(raw.get("expected_uav_yaw_deg", 0.0)),
        anechoic_gs_pattern=resolve("anechoic_gs_pattern"),
        anechoic_uav_pattern=resolve("anechoic_uav_pattern"),
        label=str(raw.get("label", "")),
    )


def write_pattern(grid: PatternGrid, path) -> None:
    write_text(path, write_pattern_text(grid))


def read_pattern(path) -> PatternGrid:
    return parse_pattern_text(read_text(path), source=str(path))


@dataclass(frozen=True)
class ResidualRecord:
    """One test sample's measured-versus-predicted outcome."""

    timestamp_s: float
    d3d_m: float
    phi_u_deg: float
    theta_u_deg: float
    rsrp_meas_dbm: float
    rsrp_pred_dbm: float
    abs_err_db: float
    predictor: str


def residuals_text(records: Sequence[ResidualRecord]) -> str:
    lines = [RESIDUAL_HEADER]
    for r in records:
        lines.append(
            f"{r.timestamp_s!r},{r.d3d_m!r},{r.phi_u_deg!r},{r.theta_u_deg!r},"
            f"{r.rsrp_meas_dbm!r},{r.rsrp_pred_dbm!r},{r.abs_err_db!r},{r.predictor}"
        )
    return "\n".join(lines) + "\n"


def write_residuals(records: Sequence[ResidualRecord], path) -> None:
    write_text(path, residuals_text(records))


def read_residuals(path) -> list[ResidualRecord]:
    text = read_text(path)
    lines = text.splitlines()
    if not lines:
        raise EmptyFileError(f"{path}: file is empty")
    if lines[0].strip() != RESIDUAL_HEADER:
        raise MissingHeaderError(f"{path}: expected header '{RESIDUAL_HEADER}'")
    records = []
    for line_no, line in enumerate(lines[1:], start=2):
        if line.strip() == "":
            continue
        fields = line.split(",")
        if len(fields) != 8:
            raise ParseError(f"{path}: expected 8 fields, got {len(fields)}", line=line_no)
        try:
            records.append(
                ResidualRecord(*(float(f) for f in fields[:7]), predictor=fields[7])
            )
        except ValueError:
            raise ParseError(f"{path}: non-numeric field", line=line_no) from None
    return records


def serialize_report(report: "EvalReport") -> str:
    """Canonical report JSON (used verbatim by write_report and for provenance hashes)."""
    payload = {
        "mae_db": report.mae_db,
        "rmse_db": report.rmse_db,
        "n_samples": report.n_samples,
        "error_cdf": [
            {"abs_err_db": err, "cum_prob": prob} for err, prob in report.error_cdf
        ],
        "per_elevation": [
            {
                "el_lo_deg": b.el_lo_deg,
                "el_hi_deg": b.el_hi_deg,
                "mae_db": b.mae_db,
                "density": b.density,
            }
            for b in report.per_elevation
        ],
    }
    return json.dumps(payload, indent=2) + "\n"


def write_report(report: "EvalReport", path) -> None:
    write_text(path, serialize_report(report))


def read_report(path) -> "EvalReport":
    from .evaluate import ElevationBinStat, EvalReport

    text = read_text(path)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}", line=exc.lineno, column=exc.colno) from None
    for name in ("mae_db", "rmse_db", "n_samples", "error_cdf", "per_elevation"):
        if name not in raw:
            raise MissingFieldError(name)
    return EvalReport(
        mae_db=float(raw["mae_db"]),
        rmse_db=float(raw["rmse_db"]),
        n_samples=int(raw["n_samples"]),
        error_cdf=[(float(e["abs_err_db"]), float(e["cum_prob"])) for e in raw["error_cdf"]],
        per_elevation=[
            ElevationBinStat(
                el_lo_deg=float(b["el_lo_deg"]),
                el_hi_deg=float(b["el_hi_deg"]),
                mae_db=None if b["mae_db"] is None else float(b["mae_db"]),
                density=float(b["density"]),
            )
            for b in raw["per_elevation"]
        ],
        residuals=[],
    )
