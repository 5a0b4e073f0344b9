"""Command-line entry point.

Exit codes: 0 success, 2 usage or configuration error, 3 I/O error.
"""

import argparse
import json
import math
import os
import sys
import warnings
from dataclasses import replace

import numpy as np

from . import __version__
from .analysis import compare_to_truth
from .config import load_config
from .errors import (
    CalibrationError,
    ConfigError,
    DomainError,
    IncompleteCycleWarning,
    NoCrossingError,
    RecordError,
    SingularInformationError,
)
from .estimator import GridSpec, calibrate, track
from .fisher import crb_curve
from .io import (
    BOUNDS_HEADER,
    KINETICS_HEADER,
    atomic_writer,
    fmt,
    read_records,
    write_estimates,
    write_records,
    write_rows,
    write_truth,
)
from .kinetics import composition_at, optical_rotation, phase_at, zero_crossing_time
from .simulator import cycle_times, simulate_run, water_run

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3


class StageError(Exception):
    def __init__(self, stage, exc):
        super().__init__(f"[{stage}] {exc}")
        self.stage = stage
        self.cause = exc


def _with_seed(cfg, seed):
    if seed is None:
        return cfg
    return replace(cfg, probe=replace(cfg.probe, seed=seed))


def _truth_path(out):
    root, ext = os.path.splitext(out)
    return f"{root}.truth{ext or '.csv'}"


def cmd_simulate(args):
    cfg = _with_seed(load_config(args.config), args.seed)
    records, truth = simulate_run(cfg.reaction, cfg.probe, cfg.drift, cfg.duration, cfg.phase_offset)
    write_records(args.out, records)
    write_truth(args.truth or _truth_path(args.out), truth)
    return EXIT_OK


def _calibration(value, grid, settings):
    if value is None:
        return 0.0
    try:
        return float(value)
    except ValueError:
        pass
    return calibrate(read_records(value), grid, settings)


def _track_with_warnings(records, phi_ref, cfg):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", IncompleteCycleWarning)
        estimates = track(records, phi_ref, cfg.grid, cfg.probe.settings, cfg.probe.cycle_s)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return estimates


def cmd_estimate(args):
    cfg = load_config(args.config)
    records = read_records(args.records)
    if not records:
        raise RecordError(f"{args.records}: no records")
    phi_ref = _calibration(args.calibration, cfg.grid, cfg.probe.settings)
    estimates = _track_with_warnings(records, phi_ref, cfg)
    write_estimates(args.out, estimates)
    return EXIT_OK


def _bound_or_none(v, phi, n, model):
    try:
        return crb_curve(v, [phi], n, model)[0]
    except SingularInformationError:
        return None


def bounds_rows(v_min, v_max, n_phi, n_events):
    """Rows of the bounds table over ``n_phi`` phases in [-pi/2, pi/2).

    Quantum columns are per ``n_events`` coincidences; the classical
    column spends the same number of detected photons.  Singular points
    are written as ``inf`` variances and ``nan`` covariance.
    """
    if not 0.0 <= v_min <= v_max <= 1.0:
        raise DomainError(f"need 0 <= v_min <= v_max <= 1, got {v_min}, {v_max}")
    if n_phi < 1 or not n_events > 0:
        raise DomainError("n_phi and n_events must be positive")
    rows = []
    for phi in -math.pi / 2 + math.pi * np.arange(n_phi) / n_phi:
        lo = _bound_or_none(v_min, phi, n_events, "quantum")
        hi = _bound_or_none(v_max, phi, n_events, "quantum")
        classical = _bound_or_none(1.0, phi, 2 * n_events, "classical")
        values = [phi]
        for point, attr in ((lo, "var_phase"), (hi, "var_phase"), (classical, "var_phase"),
                            (lo, "var_vis"), (hi, "var_vis"), (lo, "covar"), (hi, "covar")):
            if point is None:
                values.append(math.nan if attr == "covar" else math.inf)
            else:
                values.append(getattr(point, attr))
        rows.append(tuple(fmt(x) for x in values))
    return rows


def cmd_crb(args):
    rows = bounds_rows(args.v_min, args.v_max, args.n_phi, args.n_events)
    write_rows(args.out, BOUNDS_HEADER, rows)
    return EXIT_OK


def kinetics_rows(reaction, duration, step):
    t = np.arange(0.0, duration + 0.5 * step, step)
    comp = composition_at(t, reaction)
    rotation = optical_rotation(comp, reaction)
    phase = phase_at(t, reaction)
    return [
        tuple(fmt(x) for x in row)
        for row in zip(t, comp.sucrose, comp.glucose, comp.fructose, rotation, phase)
    ]


def cmd_kinetics(args):
    cfg = load_config(args.config)
    step = args.step or cfg.probe.cycle_s
    if not step > 0:
        raise DomainError("step must be positive")
    write_rows(args.out, KINETICS_HEADER, kinetics_rows(cfg.reaction, cfg.duration, step))
    return EXIT_OK


def _stage(name, fn, *a, **kw):
    try:
        return fn(*a, **kw)
    except (ConfigError, DomainError, RecordError, CalibrationError, OSError) as exc:
        raise StageError(name, exc) from exc


def run_pipeline(cfg, out_dir):
    """Water calibration, simulation, tracking, kinetics truth and report."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {k: os.path.join(out_dir, v) for k, v in cfg.output.items()}
    settings, grid = cfg.probe.settings, cfg.grid

    v_water = cfg.water_visibility if cfg.water_visibility is not None else cfg.drift.v0
    n_water = cfg.water_cycles
    if n_water is None:
        n_water = len(cycle_times(cfg.duration, cfg.probe.cycle_s))
    water = _stage("water", water_run, cfg.probe, v_water, n_water, cfg.phase_offset)
    _stage("water", write_records, paths["water"], water)
    phi_ref = _stage("calibrate", calibrate, water, grid, settings)

    records, truth = _stage("simulate", simulate_run, cfg.reaction, cfg.probe, cfg.drift, cfg.duration, cfg.phase_offset)
    _stage("simulate", write_records, paths["records"], records)
    _stage("simulate", write_truth, paths["truth"], truth)

    estimates = _stage("estimate", _track_with_warnings, records, phi_ref, cfg)
    _stage("estimate", write_estimates, paths["estimates"], estimates)

    _stage("kinetics", write_rows, paths["kinetics"], KINETICS_HEADER,
           kinetics_rows(cfg.reaction, cfg.duration, cfg.probe.cycle_s))

    vis = [e.vis_mean for e in estimates]
    n_events = float(np.mean([e.total_counts for e in estimates])) if estimates else 1.0
    # the [crb] section overrides the estimated visibility range
    bounds = dict(v_min=min(vis), v_max=max(vis), n_phi=180, n_events=max(n_events, 1.0))
    bounds.update(cfg.crb)
    rows = _stage("bounds", bounds_rows, **bounds)
    _stage("bounds", write_rows, paths["bounds"], BOUNDS_HEADER, rows)

    try:
        t_true = zero_crossing_time(cfg.reaction)
    except NoCrossingError:
        t_true = math.nan
    report = _stage("report", compare_to_truth, estimates, truth, cfg.probe.cycle_s, t_true, phi_ref)
    summary = report.as_dict()
    summary["seed"] = cfg.probe.seed
    summary["rate_constant_per_s"] = cfg.reaction.k
    summary["visibility_range"] = [min(vis), max(vis)]
    with atomic_writer(paths["report"]) as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def cmd_pipeline(args):
    cfg = _with_seed(load_config(args.config), args.seed)
    summary = run_pipeline(cfg, args.out_dir)
    if args.json_summary:
        print(json.dumps(summary, sort_keys=True))
    else:
        print(
            f"cycles={summary['n_cycles']} rmse={summary['rmse_phi_rad']:.4g} rad "
            f"coverage(2sigma)={summary['coverage_2sigma']:.3f} "
            f"crossing est={summary['crossing_est_s']:.1f} s true={summary['crossing_true_s']:.1f} s"
        )
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="chiraltrack", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a reaction run")
    p.add_argument("config")
    p.add_argument("out", help="records CSV")
    p.add_argument("--truth", help="truth CSV (default: <out>.truth.csv)")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="track phase and visibility from records")
    p.add_argument("records")
    p.add_argument("out", help="estimates CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--calibration", help="reference phase in rad, or a water records CSV")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("crb", help="Cramer-Rao bound table versus phase")
    p.add_argument("out", help="bounds CSV")
    p.add_argument("--v-min", type=float, required=True)
    p.add_argument("--v-max", type=float, required=True)
    p.add_argument("--n-phi", type=int, default=180)
    p.add_argument("--n-events", type=float, default=1.0)
    p.set_defaults(func=cmd_crb)

    p = sub.add_parser("kinetics", help="composition, rotation and phase trajectory")
    p.add_argument("config")
    p.add_argument("out", help="trajectory CSV")
    p.add_argument("--step", type=float, help="time step in s (default: probe.cycle_s)")
    p.set_defaults(func=cmd_kinetics)

    p = sub.add_parser("pipeline", help="calibrate, simulate, estimate and report")
    p.add_argument("config")
    p.add_argument("out_dir")
    p.add_argument("--seed", type=int)
    p.add_argument("--json-summary", action="store_true", help="print the report as JSON")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO if isinstance(exc.cause, OSError) else EXIT_USAGE
    except (ConfigError, DomainError, RecordError, CalibrationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
