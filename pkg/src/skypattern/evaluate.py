"""Prediction-quality reports: MAE/RMSE, error CDF, per-elevation profile, plots.

The per-elevation profile bins test samples by UAV-frame elevation over
[0, 90] degrees (values outside are clamped into the edge bins so every
sample is counted) and reports each bin's MAE together with its share of the
samples, mirroring the shaded-density elevation plots used to compare the
two predictors.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Sequence

import numpy as np

from . import dataio
from .errors import EmptySamplesError, MismatchedTestSetsError, ValueOutOfRangeError
from .geometry import link_angles
from .link_budget import LinkBudgetParams

if TYPE_CHECKING:
    from .dataio import FlightSample, GroundStation, ResidualRecord

DEFAULT_EL_BIN_DEG = 5.0


@dataclass(frozen=True)
class ElevationBinStat:
    el_lo_deg: float
    el_hi_deg: float
    mae_db: float | None
    density: float


@dataclass
class EvalReport:
    mae_db: float
    rmse_db: float
    n_samples: int
    error_cdf: list[tuple[float, float]]
    per_elevation: list[ElevationBinStat]
    residuals: list["ResidualRecord"]


def report_from_residuals(
    residuals: Sequence["ResidualRecord"],
    el_bin_deg: float = DEFAULT_EL_BIN_DEG,
) -> EvalReport:
    """Aggregate residual records into an EvalReport."""
    if not residuals:
        raise EmptySamplesError("no residuals to aggregate")
    if not el_bin_deg > 0:
        raise ValueOutOfRangeError("el_bin_deg", "must be > 0")
    n = len(residuals)
    abs_err = np.array([r.abs_err_db for r in residuals])
    theta = np.array([r.theta_u_deg for r in residuals])

    mae = float(abs_err.mean())
    rmse = float(math.sqrt(float((abs_err**2).mean())))

    sorted_err = np.sort(abs_err)
    cdf = [(float(e), (k + 1) / n) for k, e in enumerate(sorted_err)]

    n_bins = max(1, math.ceil(90.0 / el_bin_deg - 1e-9))
    bin_idx = np.clip(np.floor(theta / el_bin_deg).astype(int), 0, n_bins - 1)
    per_elevation = []
    for b in range(n_bins):
        mask = bin_idx == b
        count = int(mask.sum())
        per_elevation.append(
            ElevationBinStat(
                el_lo_deg=b * el_bin_deg,
                el_hi_deg=min((b + 1) * el_bin_deg, 90.0),
                mae_db=float(abs_err[mask].mean()) if count else None,
                density=count / n,
            )
        )
    return EvalReport(mae, rmse, n, cdf, per_elevation, list(residuals))


def evaluate(
    test_samples: Sequence["FlightSample"],
    station: "GroundStation",
    predictor,
    el_bin_deg: float = DEFAULT_EL_BIN_DEG,
    orientation_tol_deg: float | None = None,
) -> EvalReport:
    """Predict every test sample and aggregate the errors.

    ``predictor`` is a CombinedPredictor or BaselinePredictor; samples are
    expected to have passed the orientation filter already.
    """
    from .dataio import ResidualRecord

    samples = list(test_samples)
    if not samples:
        raise EmptySamplesError("no test samples")
    params = LinkBudgetParams(station.tx_power_dbm, station.frequency_hz)
    kwargs = {}
    if orientation_tol_deg is not None:
        kwargs["orientation_tol_deg"] = orientation_tol_deg
    residuals = []
    for sample in samples:
        angles = link_angles(sample.position, sample.attitude, station, **kwargs)
        prediction = predictor.predict(angles, params)
        residuals.append(
            ResidualRecord(
                timestamp_s=sample.timestamp_s,
                d3d_m=angles.d3d_m,
                phi_u_deg=angles.phi_u_deg,
                theta_u_deg=angles.theta_u_deg,
                rsrp_meas_dbm=sample.rsrp_dbm,
                rsrp_pred_dbm=prediction.rsrp_dbm,
                abs_err_db=abs(sample.rsrp_dbm - prediction.rsrp_dbm),
                predictor=predictor.gain_source.value,
            )
        )
    return report_from_residuals(residuals, el_bin_deg)


@dataclass(frozen=True)
class MetricDelta:
    metric: str
    a: float
    b: float
    delta: float
    winner: str


@dataclass(frozen=True)
class ElevationDelta:
    el_lo_deg: float
    el_hi_deg: float
    mae_a_db: float | None
    mae_b_db: float | None
    delta_db: float | None
    winner: str


@dataclass
class Comparison:
    label_a: str
    label_b: str
    n_samples: int
    metrics: list[MetricDelta]
    per_elevation: list[ElevationDelta]

    def to_dict(self) -> dict:
        return {
            "label_a": self.label_a,
            "label_b": self.label_b,
            "n_samples": self.n_samples,
            "metrics": [
                {"metric": m.metric, "a": m.a, "b": m.b, "delta": m.delta, "winner": m.winner}
                for m in self.metrics
            ],
            "per_elevation": [
                {
                    "el_lo_deg": e.el_lo_deg,
                    "el_hi_deg": e.el_hi_deg,
                    "mae_a_db": e.mae_a_db,
                    "mae_b_db": e.mae_b_db,
                    "delta_db": e.delta_db,
                    "winner": e.winner,
                }
                for e in self.per_elevation
            ],
        }

    def format_table(self) -> str:
        lines = [
            f"{'metric':<16}{self.label_a:>14}{self.label_b:>14}{'delta':>12}  winner",
        ]
        for m in self.metrics:
            lines.append(
                f"{m.metric:<16}{m.a:>14.3f}{m.b:>14.3f}{m.delta:>12.3f}  {m.winner}"
            )
        for e in self.per_elevation:
            label = f"el {e.el_lo_deg:.0f}-{e.el_hi_deg:.0f} deg"
            fmt = lambda v: f"{v:>14.3f}" if v is not None else f"{'-':>14}"
            delta = f"{e.delta_db:>12.3f}" if e.delta_db is not None else f"{'-':>12}"
            lines.append(f"{label:<16}{fmt(e.mae_a_db)}{fmt(e.mae_b_db)}{delta}  {e.winner}")
        return "\n".join(lines)


def _winner(a: float | None, b: float | None) -> str:
    if a is None and b is None:
        return "n/a"
    if a is None:
        return "b"
    if b is None:
        return "a"
    if a < b:
        return "a"
    if b < a:
        return "b"
    return "tie"


def compare(report_a: EvalReport, report_b: EvalReport,
            label_a: str = "a", label_b: str = "b") -> Comparison:
    """Paired metric deltas between two reports over the same test set."""
    if report_a.n_samples != report_b.n_samples:
        raise MismatchedTestSetsError(
            f"test sets differ: {report_a.n_samples} vs {report_b.n_samples} samples"
        )
    edges_a = [(s.el_lo_deg, s.el_hi_deg) for s in report_a.per_elevation]
    edges_b = [(s.el_lo_deg, s.el_hi_deg) for s in report_b.per_elevation]
    if edges_a != edges_b:
        raise MismatchedTestSetsError("reports use different elevation binning")
    metrics = [
        MetricDelta("mae_db", report_a.mae_db, report_b.mae_db,
                    report_a.mae_db - report_b.mae_db, _winner(report_a.mae_db, report_b.mae_db)),
        MetricDelta("rmse_db", report_a.rmse_db, report_b.rmse_db,
                    report_a.rmse_db - report_b.rmse_db, _winner(report_a.rmse_db, report_b.rmse_db)),
    ]
    per_elevation = []
    for sa, sb in zip(report_a.per_elevation, report_b.per_elevation):
        delta = None if sa.mae_db is None or sb.mae_db is None else sa.mae_db - sb.mae_db
        per_elevation.append(
            ElevationDelta(sa.el_lo_deg, sa.el_hi_deg, sa.mae_db, sb.mae_db,
                           delta, _winner(sa.mae_db, sb.mae_db))
        )
    return Comparison(label_a, label_b, report_a.n_samples, metrics, per_elevation)


def _scatter_csv(report: EvalReport) -> str:
    lines = ["d3d_m,rsrp_meas_dbm,rsrp_pred_dbm"]
    for r in report.residuals:
        lines.append(f"{r.d3d_m!r},{r.rsrp_meas_dbm!r},{r.rsrp_pred_dbm!r}")
    return "\n".join(lines) + "\n"


def _cdf_csv(report: EvalReport) -> str:
    lines = ["abs_err_db,cum_prob"]
    for err, prob in report.error_cdf:
        lines.append(f"{err!r},{prob!r}")
    return "\n".join(lines) + "\n"


def _elevation_csv(report: EvalReport) -> str:
    lines = ["el_lo_deg,el_hi_deg,mae_db,density"]
    for b in report.per_elevation:
        mae = "" if b.mae_db is None else repr(b.mae_db)
        lines.append(f"{b.el_lo_deg!r},{b.el_hi_deg!r},{mae},{b.density!r}")
    return "\n".join(lines) + "\n"


def render_plots(report: EvalReport, out_dir) -> list[Path]:
    """Emit the three comparison plots as SVGs plus their backing CSVs.

    Rendering is deterministic (pinned hash salt, no embedded dates) and each
    SVG carries a provenance comment: the sha256 of the report JSON it was
    drawn from.
    """
    if not report.residuals:
        raise EmptySamplesError("report has no residuals to plot")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    provenance = "report-sha256:" + hashlib.sha256(
        dataio.serialize_report(report).encode()
    ).hexdigest()
    metadata = {"Date": None, "Description": provenance}
    written: list[Path] = []

    dataio.write_text(out_dir / "scatter_rsrp.csv", _scatter_csv(report))
    dataio.write_text(out_dir / "error_cdf.csv", _cdf_csv(report))
    dataio.write_text(out_dir / "mae_elevation.csv", _elevation_csv(report))
    written += [out_dir / "scatter_rsrp.csv", out_dir / "error_cdf.csv", out_dir / "mae_elevation.csv"]

    d3d = [r.d3d_m for r in report.residuals]
    meas = [r.rsrp_meas_dbm for r in report.residuals]
    pred = [r.rsrp_pred_dbm for r in report.residuals]
    errs = [e for e, _ in report.error_cdf]
    probs = [p for _, p in report.error_cdf]

    with plt.rc_context({"svg.hashsalt": "skypattern"}):
        fig, ax = plt.subplots(figsize=(5.0, 3.5))
        ax.scatter(d3d, meas, s=4, alpha=0.5, label="measured")
        ax.scatter(d3d, pred, s=4, alpha=0.5, label="predicted")
        ax.set_xlabel("3D distance (m)")
        ax.set_ylabel("RSRP (dBm)")
        ax.legend(loc="best")
        fig.tight_layout()
        path = out_dir / "scatter_rsrp.svg"
        fig.savefig(path, format="svg", metadata=metadata)
        plt.close(fig)
        written.append(path)

        fig, ax = plt.subplots(figsize=(5.0, 3.5))
        ax.step([0.0] + errs, [0.0] + probs, where="post")
        ax.set_xlim(0.0, max(errs) if errs else 1.0)
        ax.set_ylim(0.0, 1.0)
        ax.set_xlabel("absolute error (dB)")
        ax.set_ylabel("cumulative probability")
        fig.tight_layout()
        path = out_dir / "error_cdf.svg"
        fig.savefig(path, format="svg", metadata=metadata)
        plt.close(fig)
        written.append(path)

        centers = [(b.el_lo_deg + b.el_hi_deg) / 2.0 for b in report.per_elevation]
        maes = [b.mae_db if b.mae_db is not None else math.nan for b in report.per_elevation]
        density = [b.density for b in report.per_elevation]
        fig, ax = plt.subplots(figsize=(5.0, 3.5))
        ax.plot(centers, maes, marker="o", ms=3)
        ax.set_xlabel("elevation angle (deg)")
        ax.set_ylabel("MAE (dB)")
        ax2 = ax.twinx()
        ax2.fill_between(centers, density, alpha=0.2, color="gray", step="mid")
        ax2.set_ylabel("sample density")
        ax2.set_ylim(bottom=0.0)
        fig.tight_layout()
        path = out_dir / "mae_elevation.svg"
        fig.savefig(path, format="svg", metadata=metadata)
        plt.close(fig)
        written.append(path)

    return written
