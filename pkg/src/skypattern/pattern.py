"""Angular gain grids: per-bin estimation, count filtering, and completion.

A pattern grid covers azimuth [0, 360) x elevation [-90, 90] with regular
bins; cell values live at bin centers. Gains are estimated per bin as the
plain dB-domain mean of the observed gain samples, with the unbiased sample
variance kept as a diagnostic. Unobserved cells are filled afterwards by
harmonic (Laplace) inpainting: known cells stay fixed, each missing cell is
relaxed to the mean of its neighbors, azimuth-periodic and mirrored at the
elevation poles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from . import kernels
from .errors import (
    EmptyGridError,
    GridShapeMismatchError,
    IncompleteGridError,
    InvalidBinWidthError,
    ParseError,
    SkyPatternError,
    ValueOutOfRangeError,
)
from .geometry import link_angles
from .link_budget import fspl_db

if TYPE_CHECKING:
    from .dataio import FlightSample, GroundStation

DEFAULT_AZ_BIN_DEG = 5.0
DEFAULT_EL_BIN_DEG = 2.0
DEFAULT_K_MIN = 5
DEFAULT_TOL_DB = 1e-6
DEFAULT_MAX_ITERS = 50_000

PATTERN_HEADER = "az_deg,el_deg,gain_db,count,variance_db2"


def _bins_for(span_deg: float, width_deg: float, name: str) -> int:
    if not width_deg > 0:
        raise InvalidBinWidthError(f"{name} must be > 0, got {width_deg}")
    n = span_deg / width_deg
    if abs(n - round(n)) > 1e-9:
        raise InvalidBinWidthError(f"{name}={width_deg} does not divide {span_deg} evenly")
    return int(round(n))


@dataclass(frozen=True)
class CompletionInfo:
    converged: bool
    iterations: int
    max_update_db: float
    tol_db: float
    backend: str


@dataclass
class PatternGrid:
    """Azimuth x elevation gain grid with per-cell counts and variances.

    gains[i, j] is the dB gain of azimuth bin i, elevation bin j (NaN where
    missing). counts holds the number of samples per bin; variances the
    unbiased sample variance (NaN where fewer than two samples).
    """

    az_bin_deg: float
    el_bin_deg: float
    gains: np.ndarray
    counts: np.ndarray
    variances: np.ndarray
    frequency_hz: float | None = None
    label: str = ""
    completion: CompletionInfo | None = None

    def __post_init__(self):
        n_az = _bins_for(360.0, self.az_bin_deg, "az_bin_deg")
        n_el = _bins_for(180.0, self.el_bin_deg, "el_bin_deg")
        self.gains = np.ascontiguousarray(self.gains, dtype=np.float64)
        self.counts = np.ascontiguousarray(self.counts, dtype=np.int64)
        self.variances = np.ascontiguousarray(self.variances, dtype=np.float64)
        shape = (n_az, n_el)
        for name, arr in (("gains", self.gains), ("counts", self.counts), ("variances", self.variances)):
            if arr.shape != shape:
                raise GridShapeMismatchError(f"{name} has shape {arr.shape}, expected {shape}")
        if (self.counts < 0).any():
            raise ValueOutOfRangeError("counts", "must be nonnegative")
        # Missing gains are only legal in never-observed bins; filled cells
        # (gain present, count 0) appear after completion and are fine.
        missing = np.isnan(self.gains)
        if (missing & (self.counts > 0)).any():
            raise ValueOutOfRangeError("gains", "missing gain in a bin with samples")
        if (~np.isnan(self.variances) & (self.counts < 2)).any():
            raise ValueOutOfRangeError("variances", "variance present in a bin with fewer than 2 samples")

    @property
    def n_az(self) -> int:
        return self.gains.shape[0]

    @property
    def n_el(self) -> int:
        return self.gains.shape[1]

    def az_centers(self) -> np.ndarray:
        return (np.arange(self.n_az) + 0.5) * self.az_bin_deg

    def el_centers(self) -> np.ndarray:
        return -90.0 + (np.arange(self.n_el) + 0.5) * self.el_bin_deg

    @classmethod
    def empty(cls, az_bin_deg: float, el_bin_deg: float,
              frequency_hz: float | None = None, label: str = "") -> "PatternGrid":
        n_az = _bins_for(360.0, az_bin_deg, "az_bin_deg")
        n_el = _bins_for(180.0, el_bin_deg, "el_bin_deg")
        return cls(
            az_bin_deg, el_bin_deg,
            np.full((n_az, n_el), np.nan),
            np.zeros((n_az, n_el), dtype=np.int64),
            np.full((n_az, n_el), np.nan),
            frequency_hz=frequency_hz, label=label,
        )

    @classmethod
    def from_gains(cls, az_bin_deg: float, el_bin_deg: float, gains: np.ndarray,
                   frequency_hz: float | None = None, label: str = "") -> "PatternGrid":
        """Fully-known grid (anechoic-style): counts pinned to 1, no variances."""
        gains = np.asarray(gains, dtype=np.float64)
        return cls(
            az_bin_deg, el_bin_deg, gains.copy(),
            np.ones(gains.shape, dtype=np.int64),
            np.full(gains.shape, np.nan),
            frequency_hz=frequency_hz, label=label,
        )

    def bin_index(self, phi_deg: float, theta_deg: float) -> tuple[int, int]:
        """Bin containing the angle; half-open [lo, hi) bins, azimuth-periodic,
        elevation +90 assigned to the top bin."""
        i = int(math.floor((phi_deg % 360.0) / self.az_bin_deg)) % self.n_az
        j = int(math.floor((theta_deg + 90.0) / self.el_bin_deg))
        j = min(max(j, 0), self.n_el - 1)
        return i, j

    def is_complete(self) -> bool:
        return not np.isnan(self.gains).any()

    def n_missing(self) -> int:
        return int(np.isnan(self.gains).sum())

    def gain_at(self, phi_deg: float, theta_deg: float) -> float:
        """Bilinear interpolation at a continuous angle.

        Azimuth wraps periodically; elevation is clamped to the pole rows.
        Raises IncompleteGridError when the interpolation touches a missing
        cell.
        """
        u = (phi_deg % 360.0) / self.az_bin_deg - 0.5
        i0 = math.floor(u)
        fu = u - i0
        i0 = int(i0) % self.n_az
        i1 = (i0 + 1) % self.n_az
        v = (theta_deg + 90.0) / self.el_bin_deg - 0.5
        if v <= 0.0:
            j0 = j1 = 0
            fv = 0.0
        elif v >= self.n_el - 1:
            j0 = j1 = self.n_el - 1
            fv = 0.0
        else:
            j0 = int(math.floor(v))
            fv = v - j0
            j1 = j0 + 1
        g = self.gains
        g00, g10, g01, g11 = g[i0, j0], g[i1, j0], g[i0, j1], g[i1, j1]
        if math.isnan(g00) or math.isnan(g10) or math.isnan(g01) or math.isnan(g11):
            raise IncompleteGridError(
                f"gain lookup at ({phi_deg:.3f}, {theta_deg:.3f}) deg touches a missing cell"
            )
        return float((g00 * (1.0 - fu) + g10 * fu) * (1.0 - fv) + (g01 * (1.0 - fu) + g11 * fu) * fv)


@dataclass(frozen=True)
class GainObservation:
    """One de-embedded gain sample: rsrp - tx_power + fspl, in dB."""

    phi_u_deg: float
    theta_u_deg: float
    gain_db: float


@dataclass(frozen=True)
class SkippedSample:
    index: int
    code: str
    message: str


@dataclass
class ExtractResult:
    observations: list[GainObservation]
    skipped: list[SkippedSample]


def extract_observations(
    samples: Sequence["FlightSample"],
    station: "GroundStation",
    orientation_tol_deg: float | None = None,
) -> ExtractResult:
    """Turn accepted flight samples into combined-gain observations.

    Per-sample geometry failures are collected, not fatal; callers are
    expected to have run the orientation filter already.
    """
    kwargs = {}
    if orientation_tol_deg is not None:
        kwargs["orientation_tol_deg"] = orientation_tol_deg
    observations: list[GainObservation] = []
    skipped: list[SkippedSample] = []
    for index, sample in enumerate(samples):
        try:
            angles = link_angles(sample.position, sample.attitude, station, **kwargs)
            gain = sample.rsrp_dbm - station.tx_power_dbm + fspl_db(angles.d3d_m, station.frequency_hz)
        except SkyPatternError as exc:
            skipped.append(SkippedSample(index, exc.code, str(exc)))
            continue
        observations.append(GainObservation(angles.phi_u_deg, angles.theta_u_deg, gain))
    return ExtractResult(observations, skipped)


def accumulate(
    observations: Iterable[GainObservation],
    az_bin_deg: float = DEFAULT_AZ_BIN_DEG,
    el_bin_deg: float = DEFAULT_EL_BIN_DEG,
    frequency_hz: float | None = None,
    label: str = "",
) -> PatternGrid:
    """Bin observations into a grid of per-bin means, counts, and variances.

    Observations are canonically ordered (bin, value) before summation so the
    result is bit-identical under any permutation of the input.
    """
    n_az = _bins_for(360.0, az_bin_deg, "az_bin_deg")
    n_el = _bins_for(180.0, el_bin_deg, "el_bin_deg")
    obs = list(observations)
    n_cells = n_az * n_el
    if not obs:
        return PatternGrid.empty(az_bin_deg, el_bin_deg, frequency_hz=frequency_hz, label=label)

    phi = np.array([o.phi_u_deg for o in obs])
    theta = np.array([o.theta_u_deg for o in obs])
    gain = np.array([o.gain_db for o in obs])

    i = np.floor((phi % 360.0) / az_bin_deg).astype(np.int64) % n_az
    j = np.clip(np.floor((theta + 90.0) / el_bin_deg).astype(np.int64), 0, n_el - 1)
    idx = i * n_el + j

    order = np.lexsort((gain, idx))
    idx = idx[order]
    gain = gain[order]

    counts = np.bincount(idx, minlength=n_cells).astype(np.int64)
    sums = np.bincount(idx, weights=gain, minlength=n_cells)
    sumsq = np.bincount(idx, weights=gain * gain, minlength=n_cells)

    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(counts > 0, sums / counts, np.nan)
        variances = np.where(
            counts >= 2,
            np.maximum(sumsq - counts * means * means, 0.0) / np.maximum(counts - 1, 1),
            np.nan,
        )
    return PatternGrid(
        az_bin_deg, el_bin_deg,
        means.reshape(n_az, n_el),
        counts.reshape(n_az, n_el),
        variances.reshape(n_az, n_el),
        frequency_hz=frequency_hz, label=label,
    )


def apply_min_count(grid: PatternGrid, k_min: int) -> PatternGrid:
    """Demote bins with fewer than k_min samples to missing.

    Demoted bins lose their gain, count, and variance; a stray single-sample
    bin would otherwise act as a hard anchor for the completion step.
    """
    if k_min < 1:
        raise ValueOutOfRangeError("k_min", "must be >= 1")
    demote = grid.counts < k_min
    gains = grid.gains.copy()
    counts = grid.counts.copy()
    variances = grid.variances.copy()
    gains[demote] = np.nan
    counts[demote] = 0
    variances[demote] = np.nan
    return PatternGrid(
        grid.az_bin_deg, grid.el_bin_deg, gains, counts, variances,
        frequency_hz=grid.frequency_hz, label=grid.label,
    )


def complete_grid(
    grid: PatternGrid,
    tol_db: float = DEFAULT_TOL_DB,
    max_iters: int = DEFAULT_MAX_ITERS,
) -> PatternGrid:
    """Fill missing cells by harmonic inpainting; known cells are untouched.

    Gauss-Seidel sweeps run until the largest per-cell update drops below
    tol_db or max_iters is reached; the outcome is recorded on the returned
    grid's ``completion`` field (non-convergence is flagged, not raised).
    """
    missing = np.isnan(grid.gains)
    if not missing.any():
        return replace(grid, completion=CompletionInfo(True, 0, 0.0, tol_db, kernels.BACKEND))
    if missing.all():
        raise EmptyGridError("cannot complete a grid with no observed cells")
    work = grid.gains.copy()
    work[missing] = work[~missing].mean()
    iterations, max_update, converged = kernels.gauss_seidel_fill(work, missing, tol_db, max_iters)
    return PatternGrid(
        grid.az_bin_deg, grid.el_bin_deg, work, grid.counts.copy(), grid.variances.copy(),
        frequency_hz=grid.frequency_hz, label=grid.label,
        completion=CompletionInfo(bool(converged), int(iterations), float(max_update), tol_db, kernels.BACKEND),
    )


def _format_value(value: float) -> str:
    value = float(value)
    return "" if math.isnan(value) else repr(value)


def write_pattern_text(grid: PatternGrid) -> str:
    """Canonical pattern-file text: metadata lines, header, azimuth-major rows."""
    lines = [
        f"# frequency_hz={'' if grid.frequency_hz is None else repr(float(grid.frequency_hz))}",
        f"# az_bin_deg={repr(float(grid.az_bin_deg))}",
        f"# el_bin_deg={repr(float(grid.el_bin_deg))}",
        f"# label={grid.label}",
        PATTERN_HEADER,
    ]
    az = grid.az_centers()
    el = grid.el_centers()
    for i in range(grid.n_az):
        for j in range(grid.n_el):
            lines.append(
                f"{repr(float(az[i]))},{repr(float(el[j]))},"
                f"{_format_value(grid.gains[i, j])},{int(grid.counts[i, j])},"
                f"{_format_value(grid.variances[i, j])}"
            )
    return "\n".join(lines) + "\n"


def parse_pattern_text(text: str, source: str = "<pattern>") -> PatternGrid:
    """Parse pattern-file text; duplicate or missing cells are rejected."""
    meta: dict[str, str] = {}
    lines = text.splitlines()
    row_start = 0
    for line_no, line in enumerate(lines, start=1):
        if line.startswith("#"):
            body = line[1:].strip()
            key, sep, value = body.partition("=")
            if sep:
                meta[key.strip()] = value
            continue
        if line.strip() == "":
            continue
        if line.strip() != PATTERN_HEADER:
            raise ParseError(f"{source}: expected header '{PATTERN_HEADER}', got '{line.strip()}'", line=line_no)
        row_start = line_no
        break
    else:
        raise ParseError(f"{source}: no header row found")

    try:
        az_bin = float(meta["az_bin_deg"])
        el_bin = float(meta["el_bin_deg"])
    except KeyError as exc:
        raise ParseError(f"{source}: missing metadata line '# {exc.args[0]}='") from None
    except ValueError:
        raise ParseError(f"{source}: bin-width metadata is not numeric") from None
    freq_text = meta.get("frequency_hz", "").strip()
    frequency = float(freq_text) if freq_text else None
    label = meta.get("label", "")

    n_az = _bins_for(360.0, az_bin, "az_bin_deg")
    n_el = _bins_for(180.0, el_bin, "el_bin_deg")
    gains = np.full((n_az, n_el), np.nan)
    counts = np.zeros((n_az, n_el), dtype=np.int64)
    variances = np.full((n_az, n_el), np.nan)
    seen = np.zeros((n_az, n_el), dtype=bool)

    for line_no, line in enumerate(lines[row_start:], start=row_start + 1):
        if line.strip() == "" or line.startswith("#"):
            continue
        fields = line.split(",")
        if len(fields) != 5:
            raise ParseError(f"{source}: expected 5 fields, got {len(fields)}", line=line_no)
        try:
            az = float(fields[0])
        except ValueError:
            raise ParseError(f"{source}: bad az_deg '{fields[0]}'", line=line_no, column=1) from None
        try:
            el = float(fields[1])
        except ValueError:
            raise ParseError(f"{source}: bad el_deg '{fields[1]}'", line=line_no, column=2) from None
        i = int(round(az / az_bin - 0.5))
        j = int(round((el + 90.0) / el_bin - 0.5))
        if not (0 <= i < n_az) or abs((i + 0.5) * az_bin - az) > 1e-6:
            raise ParseError(f"{source}: az_deg {az} is not a bin center", line=line_no, column=1)
        if not (0 <= j < n_el) or abs(-90.0 + (j + 0.5) * el_bin - el) > 1e-6:
            raise ParseError(f"{source}: el_deg {el} is not a bin center", line=line_no, column=2)
        if seen[i, j]:
            raise ParseError(f"{source}: duplicate cell ({az}, {el})", line=line_no)
        seen[i, j] = True
        try:
            gains[i, j] = float(fields[2]) if fields[2].strip() else np.nan
        except ValueError:
            raise ParseError(f"{source}: bad gain_db '{fields[2]}'", line=line_no, column=3) from None
        try:
            counts[i, j] = int(fields[3])
        except ValueError:
            raise ParseError(f"{source}: bad count '{fields[3]}'", line=line_no, column=4) from None
        try:
            variances[i, j] = float(fields[4]) if fields[4].strip() else np.nan
        except ValueError:
            raise ParseError(f"{source}: bad variance_db2 '{fields[4]}'", line=line_no, column=5) from None

    if not seen.all():
        n_absent = int((~seen).sum())
        raise GridShapeMismatchError(
            f"{source}: {n_absent} cell(s) absent; rows must tile the full 360x180 grid"
        )
    try:
        return PatternGrid(az_bin, el_bin, gains, counts, variances,
                           frequency_hz=frequency, label=label)
    except ValueOutOfRangeError as exc:
        raise ParseError(f"{source}: {exc}") from None


def load_anechoic(path) -> PatternGrid:
    """Load an anechoic-chamber pattern: must be fully populated.

    Counts are pinned to a sentinel of 1 and variances dropped, whatever the
    file carried.
    """
    from .dataio import read_text

    grid = parse_pattern_text(read_text(path), source=str(path))
    if not grid.is_complete():
        raise ParseError(f"{path}: anechoic pattern has {grid.n_missing()} missing gain cell(s)")
    return PatternGrid(
        grid.az_bin_deg, grid.el_bin_deg, grid.gains,
        np.ones((grid.n_az, grid.n_el), dtype=np.int64),
        np.full((grid.n_az, grid.n_el), np.nan),
        frequency_hz=grid.frequency_hz, label=grid.label,
    )
