"""CSV formats for records, truth tables, estimates, bounds and trajectories.

All files are UTF-8 with LF line endings.  Floats are written with 9
significant digits.  Writes go to a temporary file in the target
directory and are renamed into place.
"""

import csv
import math
import os
import tempfile
from contextlib import contextmanager

from .errors import RecordError
from .estimator import ProbeEstimate
from .simulator import MeasurementRecord, TruthRow

RECORDS_HEADER = ("t_s", "setting_rad", "window_s", "counts")
TRUTH_HEADER = ("t_s", "phi_true_rad", "vis_true")
ESTIMATES_HEADER = ("t_s", "phi_rad", "phi_std_rad", "vis", "vis_std", "total_counts", "flags")
BOUNDS_HEADER = (
    "phi_rad",
    "var_phi_q_vmin",
    "var_phi_q_vmax",
    "var_phi_classical",
    "var_vis_q_vmin",
    "var_vis_q_vmax",
    "cov_q_vmin",
    "cov_q_vmax",
)
KINETICS_HEADER = ("t_s", "sucrose", "glucose", "fructose", "rotation_deg", "phase_rad")

FLAG_SEP = ";"


def fmt(x):
    """Format a float with 9 significant digits."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".9g")


@contextmanager
def atomic_writer(path):
    """Open a text file for writing that appears at ``path`` only on success."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_rows(path, header, rows):
    with atomic_writer(path) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _read(path, header):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise RecordError(f"{path}: empty file") from None
        if tuple(first) != header:
            raise RecordError(f"{path}:1: expected header {','.join(header)}, got {','.join(first)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise RecordError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            yield lineno, row


def write_records(path, records):
    write_rows(path, RECORDS_HEADER, ((fmt(r.t), fmt(r.setting), fmt(r.window_s), str(int(r.counts))) for r in records))


def read_records(path):
    out = []
    for lineno, row in _read(path, RECORDS_HEADER):
        try:
            t, setting, window, counts = float(row[0]), float(row[1]), float(row[2]), int(row[3])
        except ValueError as exc:
            raise RecordError(f"{path}:{lineno}: {exc}") from None
        if counts < 0:
            raise RecordError(f"{path}:{lineno}: negative counts")
        out.append(MeasurementRecord(t, setting, window, counts))
    return out


def write_truth(path, truth):
    write_rows(path, TRUTH_HEADER, ((fmt(r.t), fmt(r.phi_true), fmt(r.vis_true)) for r in truth))


def read_truth(path):
    out = []
    for lineno, row in _read(path, TRUTH_HEADER):
        try:
            out.append(TruthRow(float(row[0]), float(row[1]), float(row[2])))
        except ValueError as exc:
            raise RecordError(f"{path}:{lineno}: {exc}") from None
    return out


def write_estimates(path, estimates):
    write_rows(
        path,
        ESTIMATES_HEADER,
        (
            (fmt(e.t), fmt(e.phi_mean), fmt(e.phi_std), fmt(e.vis_mean), fmt(e.vis_std), str(e.total_counts), FLAG_SEP.join(e.flags))
            for e in estimates
        ),
    )


def read_estimates(path):
    out = []
    for lineno, row in _read(path, ESTIMATES_HEADER):
        try:
            flags = tuple(f for f in row[6].split(FLAG_SEP) if f)
            out.append(ProbeEstimate(float(row[0]), float(row[1]), float(row[2]), float(row[3]), float(row[4]), int(row[5]), flags))
        except ValueError as exc:
            raise RecordError(f"{path}:{lineno}: {exc}") from None
    return out


def read_table(path, header):
    """Rows of a float CSV with the given header, as tuples."""
    return [tuple(float(x) for x in row) for _, row in _read(path, header)]
