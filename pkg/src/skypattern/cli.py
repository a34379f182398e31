"""Command-line pipeline: simulate -> learn -> complete -> predict -> evaluate -> report.

Every invocation writes a manifest next to its outputs recording the resolved
parameters, input file hashes, and kernel backend, so a rerun with the same
manifest reproduces the outputs byte for byte. Exit codes: 0 success, 2 usage
error, 1 runtime error (one machine-parseable line on stderr).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__, dataio, kernels
from . import evaluate as ev
from . import pattern as pat
from . import sim
from .errors import NoAcceptedSamplesError, SkyPatternError
from .geometry import DEFAULT_ORIENTATION_TOL_DEG, Attitude, validate_fixed_orientation
from .link_budget import BaselinePredictor, CombinedPredictor

log = logging.getLogger("skypattern")


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(path, subcommand: str, parameters: dict, inputs, outputs) -> None:
    manifest = {
        "tool": "skypattern",
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "subcommand": subcommand,
        "parameters": parameters,
        "inputs": {str(Path(p).resolve()): _sha256(p) for p in inputs},
        "outputs": sorted(str(o) for o in outputs),
    }
    dataio.write_text(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _load_accepted_samples(log_paths, station, tolerance_deg):
    """Read logs, apply the fixed-orientation filter, and demand survivors."""
    samples = []
    for p in log_paths:
        flight = dataio.read_flight_log(p)
        if flight.rejected:
            log.info("%s: rejected %d malformed row(s)", p, len(flight.rejected))
        samples.extend(flight.samples)
    partition = validate_fixed_orientation(samples, station.expected_uav_yaw_deg, tolerance_deg)
    if partition.rejected:
        log.info("orientation filter rejected %d of %d samples",
                 len(partition.rejected), len(samples))
    if not partition.accepted:
        raise NoAcceptedSamplesError(
            f"no samples passed the orientation filter (tolerance {tolerance_deg} deg)"
        )
    return partition.accepted


def _cmd_simulate(args) -> int:
    station = dataio.read_station_config(args.station)
    if args.truth_grid:
        truth = sim.TruthPattern.from_grid(pat.load_anechoic(args.truth_grid))
    else:
        truth = sim.TruthPattern.parametric(args.truth_g0_db, args.truth_g1_db, args.truth_exponent)
    spec = sim.TrajectorySpec(
        kind=args.kind,
        altitude_m=args.altitude_m,
        speed_mps=args.speed_mps,
        sample_rate_hz=args.sample_rate_hz,
        radius_m=args.radius_m,
        length_m=args.length_m,
        spacing_m=args.spacing_m,
        passes=args.passes,
        attitude=Attitude(args.yaw_deg, args.pitch_deg, args.roll_deg),
        rng_seed=args.seed,
    )
    samples = sim.generate_flight(spec, station, truth, args.noise_sigma_db)
    out = Path(args.out)
    dataio.write_flight_log(samples, out)
    _write_manifest(
        out.parent / (out.name + ".manifest.json"),
        "simulate",
        {
            "kind": args.kind, "altitude_m": args.altitude_m,
            "speed_mps": args.speed_mps, "sample_rate_hz": args.sample_rate_hz,
            "radius_m": args.radius_m, "length_m": args.length_m,
            "spacing_m": args.spacing_m, "passes": args.passes,
            "yaw_deg": args.yaw_deg, "pitch_deg": args.pitch_deg, "roll_deg": args.roll_deg,
            "truth_grid": args.truth_grid,
            "truth_g0_db": args.truth_g0_db, "truth_g1_db": args.truth_g1_db,
            "truth_exponent": args.truth_exponent,
            "noise_sigma_db": args.noise_sigma_db, "seed": args.seed,
        },
        [args.station] + ([args.truth_grid] if args.truth_grid else []),
        [out.name],
    )
    log.info("wrote %d samples to %s", len(samples), out)
    return 0


def _cmd_learn(args) -> int:
    station = dataio.read_station_config(args.station)
    accepted = _load_accepted_samples(args.logs, station, args.orientation_tol_deg)
    extraction = pat.extract_observations(accepted, station, args.orientation_tol_deg)
    if extraction.skipped:
        log.info("skipped %d sample(s) during extraction", len(extraction.skipped))
    label = station.label or "learned"
    grid = pat.accumulate(
        extraction.observations, args.az_bin_deg, args.el_bin_deg,
        frequency_hz=station.frequency_hz, label=label,
    )
    grid = pat.apply_min_count(grid, args.k_min)
    completed = pat.complete_grid(grid, args.tol_db, args.max_iters)
    info = completed.completion
    if not info.converged:
        log.warning("completion did not converge after %d sweeps (max update %.3g dB)",
                    info.iterations, info.max_update_db)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataio.write_pattern(grid, out_dir / "pattern_observed.csv")
    dataio.write_pattern(completed, out_dir / "pattern_completed.csv")
    _write_manifest(
        out_dir / "manifest.json",
        "learn",
        {
            "az_bin_deg": args.az_bin_deg, "el_bin_deg": args.el_bin_deg,
            "k_min": args.k_min, "tol_db": args.tol_db, "max_iters": args.max_iters,
            "orientation_tol_deg": args.orientation_tol_deg,
            "completion_converged": info.converged,
            "completion_iterations": info.iterations,
        },
        list(args.logs) + [args.station],
        ["pattern_observed.csv", "pattern_completed.csv"],
    )
    return 0


def _cmd_complete(args) -> int:
    grid = dataio.read_pattern(args.in_path)
    completed = pat.complete_grid(grid, args.tol_db, args.max_iters)
    info = completed.completion
    if not info.converged:
        log.warning("completion did not converge after %d sweeps", info.iterations)
    out = Path(args.out)
    dataio.write_pattern(completed, out)
    _write_manifest(
        out.parent / (out.name + ".manifest.json"),
        "complete",
        {
            "tol_db": args.tol_db, "max_iters": args.max_iters,
            "completion_converged": info.converged,
            "completion_iterations": info.iterations,
        },
        [args.in_path],
        [out.name],
    )
    return 0


def _build_predictors(args, parser, station):
    """Predictors requested by flags; baseline grids may come from the config."""
    predictors = []
    if args.combined_grid:
        grid = dataio.read_pattern(args.combined_grid)
        predictors.append(("combined", CombinedPredictor(grid)))
    uav_ref = args.uav_grid or station.anechoic_uav_pattern
    gs_ref = args.gs_grid or station.anechoic_gs_pattern
    if args.uav_grid or args.gs_grid or (args.baseline and uav_ref and gs_ref):
        if not (uav_ref and gs_ref):
            parser.error("baseline predictor needs both --uav-grid and --gs-grid "
                         "(or anechoic references in the station config)")
        predictors.append((
            "baseline",
            BaselinePredictor(
                pat.load_anechoic(uav_ref),
                pat.load_anechoic(gs_ref),
                station.boresight_azimuth_deg,
            ),
        ))
    if not predictors:
        parser.error("no predictor requested: pass --combined-grid and/or "
                     "--uav-grid/--gs-grid (or --baseline with config references)")
    return predictors


def _predictor_inputs(args, station):
    inputs = []
    if args.combined_grid:
        inputs.append(args.combined_grid)
    uav_ref = args.uav_grid or station.anechoic_uav_pattern
    gs_ref = args.gs_grid or station.anechoic_gs_pattern
    if args.uav_grid or args.gs_grid or (args.baseline and uav_ref and gs_ref):
        inputs += [uav_ref, gs_ref]
    return inputs


def _eval_params(args) -> dict:
    return {
        "el_bin_deg": getattr(args, "el_bin_deg", None),
        "orientation_tol_deg": args.orientation_tol_deg,
        "combined_grid": args.combined_grid,
        "uav_grid": args.uav_grid,
        "gs_grid": args.gs_grid,
        "baseline": args.baseline,
    }


def _cmd_predict(args, parser) -> int:
    station = dataio.read_station_config(args.station)
    predictors = _build_predictors(args, parser, station)
    accepted = _load_accepted_samples([args.test_log], station, args.orientation_tol_deg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    for name, predictor in predictors:
        report = ev.evaluate(accepted, station, predictor,
                             orientation_tol_deg=args.orientation_tol_deg)
        fname = f"residuals_{name}.csv"
        dataio.write_residuals(report.residuals, out_dir / fname)
        outputs.append(fname)
        log.info("%s: MAE %.3f dB over %d samples", name, report.mae_db, report.n_samples)
    _write_manifest(
        out_dir / "manifest.json", "predict", _eval_params(args),
        [args.test_log, args.station] + _predictor_inputs(args, station),
        outputs,
    )
    return 0


def _cmd_evaluate(args, parser) -> int:
    station = dataio.read_station_config(args.station)
    predictors = _build_predictors(args, parser, station)
    accepted = _load_accepted_samples([args.test_log], station, args.orientation_tol_deg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    reports = {}
    for name, predictor in predictors:
        report = ev.evaluate(accepted, station, predictor, args.el_bin_deg,
                             orientation_tol_deg=args.orientation_tol_deg)
        reports[name] = report
        dataio.write_residuals(report.residuals, out_dir / f"residuals_{name}.csv")
        dataio.write_report(report, out_dir / f"report_{name}.json")
        outputs += [f"residuals_{name}.csv", f"report_{name}.json"]
        plot_files = ev.render_plots(report, out_dir / f"plots_{name}")
        outputs += [str(p.relative_to(out_dir)) for p in plot_files]
        print(f"{name}: MAE {report.mae_db:.3f} dB, RMSE {report.rmse_db:.3f} dB "
              f"over {report.n_samples} samples")
    if len(reports) == 2:
        comparison = ev.compare(reports["combined"], reports["baseline"],
                                label_a="combined", label_b="baseline")
        dataio.write_text(out_dir / "compare.json",
                          json.dumps(comparison.to_dict(), indent=2) + "\n")
        outputs.append("compare.json")
        print(comparison.format_table())
    _write_manifest(
        out_dir / "manifest.json", "evaluate", _eval_params(args),
        [args.test_log, args.station] + _predictor_inputs(args, station),
        outputs,
    )
    return 0


def _cmd_report(args) -> int:
    records = dataio.read_residuals(args.residuals)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    by_predictor: dict[str, list] = {}
    for r in records:
        by_predictor.setdefault(r.predictor, []).append(r)
    outputs = []
    for predictor, recs in sorted(by_predictor.items()):
        name = "combined" if predictor == "combined-learned" else "baseline"
        report = ev.report_from_residuals(recs, args.el_bin_deg)
        dataio.write_report(report, out_dir / f"report_{name}.json")
        outputs.append(f"report_{name}.json")
        plot_files = ev.render_plots(report, out_dir / f"plots_{name}")
        outputs += [str(p.relative_to(out_dir)) for p in plot_files]
        print(f"{name}: MAE {report.mae_db:.3f} dB, RMSE {report.rmse_db:.3f} dB "
              f"over {report.n_samples} samples")
    _write_manifest(
        out_dir / "manifest.json", "report",
        {"el_bin_deg": args.el_bin_deg},
        [args.residuals],
        outputs,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skypattern",
        description="Learn combined UAV/ground-station radiation patterns from "
                    "flight logs and predict received power.",
    )
    parser.add_argument("--version", action="version", version=f"skypattern {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic flight log")
    p.add_argument("--station", required=True, help="station config JSON")
    p.add_argument("--kind", required=True, choices=sim.TRAJECTORY_KINDS)
    p.add_argument("--altitude-m", type=float, required=True,
                   help="height above the station antenna (ENU up)")
    p.add_argument("--speed-mps", type=float, default=5.0)
    p.add_argument("--sample-rate-hz", type=float, default=10.0)
    p.add_argument("--radius-m", type=float, default=None)
    p.add_argument("--length-m", type=float, default=None)
    p.add_argument("--spacing-m", type=float, default=None)
    p.add_argument("--passes", type=int, default=1)
    p.add_argument("--yaw-deg", type=float, default=0.0)
    p.add_argument("--pitch-deg", type=float, default=0.0)
    p.add_argument("--roll-deg", type=float, default=0.0)
    p.add_argument("--truth-grid", default=None, help="pattern CSV used as ground truth")
    p.add_argument("--truth-g0-db", type=float, default=0.0)
    p.add_argument("--truth-g1-db", type=float, default=0.0)
    p.add_argument("--truth-exponent", type=float, default=2.0)
    p.add_argument("--noise-sigma-db", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output flight-log CSV")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("learn", help="estimate the combined pattern from flight logs")
    p.add_argument("logs", nargs="+", help="flight-log CSVs")
    p.add_argument("--station", required=True)
    p.add_argument("--az-bin-deg", type=float, default=pat.DEFAULT_AZ_BIN_DEG)
    p.add_argument("--el-bin-deg", type=float, default=pat.DEFAULT_EL_BIN_DEG)
    p.add_argument("--k-min", type=int, default=pat.DEFAULT_K_MIN)
    p.add_argument("--tol-db", type=float, default=pat.DEFAULT_TOL_DB)
    p.add_argument("--max-iters", type=int, default=pat.DEFAULT_MAX_ITERS)
    p.add_argument("--orientation-tol-deg", type=float, default=DEFAULT_ORIENTATION_TOL_DEG)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_learn)

    p = sub.add_parser("complete", help="fill missing cells of a pattern file")
    p.add_argument("--in", dest="in_path", required=True, help="pattern CSV to complete")
    p.add_argument("--out", required=True)
    p.add_argument("--tol-db", type=float, default=pat.DEFAULT_TOL_DB)
    p.add_argument("--max-iters", type=int, default=pat.DEFAULT_MAX_ITERS)
    p.set_defaults(func=_cmd_complete)

    def add_eval_args(p, with_el_bin: bool):
        p.add_argument("test_log", help="flight-log CSV to predict on")
        p.add_argument("--station", required=True)
        p.add_argument("--combined-grid", default=None, help="completed learned pattern CSV")
        p.add_argument("--uav-grid", default=None, help="anechoic UAV pattern CSV")
        p.add_argument("--gs-grid", default=None, help="anechoic ground-station pattern CSV")
        p.add_argument("--baseline", action="store_true",
                       help="use the anechoic references from the station config")
        p.add_argument("--orientation-tol-deg", type=float, default=DEFAULT_ORIENTATION_TOL_DEG)
        if with_el_bin:
            p.add_argument("--el-bin-deg", type=float, default=ev.DEFAULT_EL_BIN_DEG)
        p.add_argument("--out-dir", required=True)

    p = sub.add_parser("predict", help="emit per-sample residuals for a test log")
    add_eval_args(p, with_el_bin=False)
    p.set_defaults(func=lambda args, _p=p: _cmd_predict(args, _p))

    p = sub.add_parser("evaluate", help="residuals, report, plots, and comparison")
    add_eval_args(p, with_el_bin=True)
    p.set_defaults(func=lambda args, _p=p: _cmd_evaluate(args, _p))

    p = sub.add_parser("report", help="rebuild report and plots from a residuals file")
    p.add_argument("--residuals", required=True)
    p.add_argument("--el-bin-deg", type=float, default=ev.DEFAULT_EL_BIN_DEG)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    level = os.environ.get("SKYPATTERN_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SkyPatternError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # keep the one-line contract even for bugs
        print(f"error: Internal: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
