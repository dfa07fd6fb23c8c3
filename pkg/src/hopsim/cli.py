"""Command-line front end: ``hopsim run|calibrate|estimate|scenario``."""

from __future__ import annotations

import argparse
import csv
import io
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .autonomy.scenario import ScenarioError, parse_scenario, run_scenario, write_log
from .config import ConfigError, ExperimentSuite, bundled_config, load_suite, write_gain_sidecar
from .errors import (
    DegenerateConfiguration,
    InsufficientSamples,
    NoConvergence,
    NonmonotonicTime,
    NoSeparation,
)
from .estimation import (
    fit_hop_velocity,
    read_detections_csv,
    read_markers_csv,
    read_track_csv,
    track_from_detections,
)
from .model import HopResult
from .sim import calibrate_motor_gain, run_hop, separation_result, write_trajectory_csv

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NO_SEPARATION = 3
EXIT_NO_CONVERGENCE = 4

SUMMARY_COLUMNS = ("case", "v_hx", "v_hy", "v_h", "theta_h", "t_h")
ERROR_COLUMNS = ("rel_err_v_h", "rel_err_theta_h", "rel_err_t_h")


def _fail(message: str, code: int) -> int:
    print(f"hopsim: {message}", file=sys.stderr)
    return code


def _load(path: Optional[str], step: Optional[float]) -> ExperimentSuite:
    suite = load_suite(path or bundled_config())
    if step is not None:
        try:
            suite.sim = replace(suite.sim, step_size=step)
        except ValueError as exc:
            raise ConfigError(f"--step: {exc}") from None
    return suite


def case_filename(label: str) -> str:
    return "case_" + (re.sub(r"[^A-Za-z0-9_-]+", "", label) or "unnamed") + ".csv"


def _run_case(args):
    label, suite = args
    result, trajectory = run_hop(suite.body, suite.env, suite.case(label), suite.motor, suite.sim)
    buf = io.StringIO()
    write_trajectory_csv(trajectory, buf)
    return label, result, trajectory, buf.getvalue()


def _rel(value: Optional[float], ref: Optional[float]) -> str:
    if value is None or ref is None or ref == 0:
        return ""
    return f"{(value - ref) / ref:+.3f}"


def summary_rows(results: Sequence[tuple[str, HopResult]], references: dict[str, HopResult]) -> list[list[str]]:
    with_refs = bool(references)
    rows = [list(SUMMARY_COLUMNS) + (list(ERROR_COLUMNS) if with_refs else [])]
    for label, r in results:
        row = [
            label,
            f"{r.v_hx:.1f}",
            f"{r.v_hy:.1f}",
            f"{r.v_h:.1f}",
            f"{r.theta_h:.1f}",
            "" if r.t_h is None else f"{r.t_h:.2f}",
        ]
        if with_refs:
            ref = references.get(label)
            row += [
                _rel(r.v_h, ref and ref.v_h),
                _rel(r.theta_h, ref and ref.theta_h),
                _rel(r.t_h, ref and ref.t_h),
            ]
        rows.append(row)
    return rows


def cmd_run(
    config: Optional[str],
    out: str,
    step: Optional[float] = None,
    jobs: int = 1,
    seed: int = 0,
    noise: float = 0.0,
) -> int:
    try:
        suite = _load(config, step)
    except (ConfigError, OSError) as exc:
        return _fail(str(exc), EXIT_USAGE)
    if suite.cases and suite.motor is None:
        return _fail("[motor] torque_gain is not set; run `hopsim calibrate` first", EXIT_USAGE)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)

    work = [(label, suite) for label, _ in suite.cases]
    try:
        if jobs > 1 and len(work) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                finished = list(pool.map(_run_case, work))
        else:
            finished = [_run_case(w) for w in work]
    except NoSeparation as exc:
        return _fail(f"NoSeparation: {exc}", EXIT_NO_SEPARATION)

    rng = np.random.default_rng(seed)
    for label, _, trajectory, text in finished:
        (out_dir / case_filename(label)).write_text(text)
        if noise > 0:
            _write_noisy_track(out_dir / case_filename(label).replace(".csv", "_track.csv"), trajectory, rng, noise)

    rows = summary_rows([(label, result) for label, result, _, _ in finished], suite.reference_results)
    with open(out_dir / "summary.csv", "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    for r in rows:
        print("  ".join(cell.rjust(w) for cell, w in zip(r, widths)))
    return EXIT_OK


def _write_noisy_track(path: Path, trajectory, rng, sigma: float) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("t", "x", "y"))
        for s in trajectory.samples:
            dx, dy = rng.normal(0.0, sigma, 2)
            writer.writerow((repr(s.t), repr(s.state.position[0] + dx), repr(s.state.position[1] + dy)))


def cmd_calibrate(config: Optional[str], reference: str, step: Optional[float] = None) -> int:
    path = config or bundled_config()
    try:
        suite = _load(path, step)
    except (ConfigError, OSError) as exc:
        return _fail(str(exc), EXIT_USAGE)
    if reference not in suite.reference_results:
        return _fail(f"no [reference {reference}] section in {path}", EXIT_USAGE)
    ref = suite.reference_results[reference]
    cmd = suite.case(reference)
    try:
        motor = calibrate_motor_gain(ref, suite.body, suite.env, cmd, suite.sim)
    except NoConvergence as exc:
        return _fail(f"NoConvergence: {exc}", EXIT_NO_CONVERGENCE)
    achieved = separation_result(suite.body, suite.env, cmd, motor, suite.sim)
    sidecar = write_gain_sidecar(path, motor)
    print(f"torque_gain={motor.torque_gain!r}")
    print(f"v_h={achieved.v_h:.4f} reference={ref.v_h:.4f} residual={achieved.v_h - ref.v_h:+.4f}")
    print(f"written {sidecar}")
    return EXIT_OK


def cmd_estimate(track: str, markers: Optional[str] = None, separation: Optional[float] = None) -> int:
    try:
        with open(track, newline="") as fh:
            if markers is None:
                rows = read_track_csv(fh)
            else:
                observations = read_detections_csv(fh)
                with open(markers, newline="") as mh:
                    marker_set = read_markers_csv(mh)
                rows = track_from_detections(marker_set, sorted(observations, key=lambda o: o.time))
        result = fit_hop_velocity(rows, separation)
    except (ValueError, KeyError, OSError) as exc:
        return _fail(str(exc), EXIT_USAGE)
    except (InsufficientSamples, NonmonotonicTime, DegenerateConfiguration) as exc:
        return _fail(f"{type(exc).__name__}: {exc}", EXIT_USAGE)
    print(f"v_hx={result.v_hx:.1f} mm/s")
    print(f"v_hy={result.v_hy:.1f} mm/s")
    print(f"v_h={result.v_h:.1f} mm/s")
    print(f"theta_h={result.theta_h:.1f} deg")
    print(f"fit_start={result.t_h:.4f} s")
    return EXIT_OK


def cmd_scenario(scenario: str, out: Optional[str] = None) -> int:
    try:
        with open(scenario) as fh:
            events = parse_scenario(fh)
        rover = run_scenario(events)
    except (ScenarioError, OSError) as exc:
        return _fail(str(exc), EXIT_USAGE)
    if out:
        with open(out, "w", newline="") as fh:
            write_log(rover.log, fh)
    else:
        write_log(rover.log, sys.stdout)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hopsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate every case of an experiment suite")
    run.add_argument("--config", help="suite file (default: bundled jamic.cfg)")
    run.add_argument("--out", default="hopsim_out", help="output directory")
    run.add_argument("--step", type=float, help="override the integration step (s)")
    run.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    run.add_argument("--seed", type=int, default=0, help="seed for --noise")
    run.add_argument("--noise", type=float, default=0.0, help="also write tracks with this position noise (mm)")

    cal = sub.add_parser("calibrate", help="fit the torque gain to a reference case")
    cal.add_argument("--config", help="suite file (default: bundled jamic.cfg)")
    cal.add_argument("--reference", default="#1", help="case label with a reference result")
    cal.add_argument("--step", type=float, help="override the integration step (s)")

    est = sub.add_parser("estimate", help="hop velocity from a position track")
    est.add_argument("track", help="CSV with t,x,y columns (or t,id,x,y with --markers)")
    est.add_argument("--markers", help="marker layout CSV id,bx,by; track holds per-frame detections")
    est.add_argument("--separation", type=float, help="fit only samples at or after this time (s)")

    scn = sub.add_parser("scenario", help="replay an autonomy event script")
    scn.add_argument("scenario", help="event script")
    scn.add_argument("--out", help="decision log CSV (default: stdout)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.out, args.step, args.jobs, args.seed, args.noise)
    if args.command == "calibrate":
        return cmd_calibrate(args.config, args.reference, args.step)
    if args.command == "estimate":
        return cmd_estimate(args.track, args.markers, args.separation)
    return cmd_scenario(args.scenario, args.out)


if __name__ == "__main__":
    sys.exit(main())
