"""Synthetic coincidence records for reaction and water-calibration runs.

Each cycle projects onto every setting in turn for ``window_s`` seconds,
and cycles start every ``cycle_s`` seconds.  Counts per window are
independent Poisson draws with mean ``4 * mean_pairs_per_window * p``, so
a window at ``p = 1/4`` averages ``mean_pairs_per_window`` coincidences.
The sample phase is held fixed within a cycle.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .kinetics import phase_at
from .model import CANONICAL_SETTINGS, check_visibility, probability_vector

__all__ = [
    "ProbeConfig",
    "VisibilityDrift",
    "MeasurementRecord",
    "TruthRow",
    "make_rng",
    "sample_counts",
    "cycle_times",
    "simulate_run",
    "water_run",
]


@dataclass(frozen=True)
class ProbeConfig:
    mean_pairs_per_window: float = 250.0
    window_s: float = 2.0
    cycle_s: float = 30.0
    settings: tuple = CANONICAL_SETTINGS
    seed: int = 0

    def __post_init__(self):
        if not self.mean_pairs_per_window > 0:
            raise DomainError("mean_pairs_per_window must be positive")
        if not self.window_s > 0:
            raise DomainError("window_s must be positive")
        if not self.settings:
            raise DomainError("settings must be nonempty")
        if self.cycle_s < len(self.settings) * self.window_s:
            raise DomainError(
                f"cycle_s={self.cycle_s} is shorter than {len(self.settings)} windows of {self.window_s} s"
            )


@dataclass(frozen=True)
class VisibilityDrift:
    """Visibility as a function of time, clamped to ``[floor, ceil]``.

    ``constant`` holds ``v0``; ``linear`` moves by ``slope`` per second;
    ``random-walk`` adds a Gaussian step of ``step_std`` each cycle.
    """

    kind: str = "constant"
    v0: float = 0.9
    slope: float = 0.0
    step_std: float = 0.0
    floor: float = 0.0
    ceil: float = 1.0

    def __post_init__(self):
        if self.kind not in ("constant", "linear", "random-walk"):
            raise DomainError(f"unknown drift kind {self.kind!r}")
        if not 0.0 <= self.floor <= self.ceil <= 1.0:
            raise DomainError(f"need 0 <= floor <= ceil <= 1, got [{self.floor}, {self.ceil}]")
        check_visibility(self.v0)
        if self.step_std < 0:
            raise DomainError("step_std must be nonnegative")

    def trajectory(self, times, rng=None):
        times = np.asarray(times, dtype=float)
        if self.kind == "constant":
            v = np.full(times.shape, self.v0)
        elif self.kind == "linear":
            v = self.v0 + self.slope * times
        else:
            if rng is None:
                raise ValueError("random-walk drift needs a random generator")
            steps = rng.normal(0.0, self.step_std, size=times.shape)
            v = np.empty(times.shape)
            current = min(max(self.v0, self.floor), self.ceil)
            for i, step in enumerate(steps):
                if i:
                    current = min(max(current + step, self.floor), self.ceil)
                v[i] = current
            return v
        return np.clip(v, self.floor, self.ceil)


@dataclass(frozen=True)
class MeasurementRecord:
    t: float
    setting: float
    window_s: float
    counts: int


@dataclass(frozen=True)
class TruthRow:
    t: float
    phi_true: float
    vis_true: float


def make_rng(seed):
    """Independent generators (sample counts, drift, water counts) from one seed."""
    return tuple(np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3))


def sample_counts(phase, visibility, cfg, rng):
    """One Poisson count per setting at fixed (phase, visibility)."""
    p = probability_vector(phase, visibility, cfg.settings)
    return rng.poisson(4.0 * cfg.mean_pairs_per_window * p)


def cycle_times(duration, cycle_s):
    if not duration > 0:
        raise DomainError(f"duration must be positive, got {duration!r}")
    n = math.ceil(duration / cycle_s - 1e-9)
    return cycle_s * np.arange(n)


def _emit(cycle_starts, phases, visibilities, cfg, rng):
    records = []
    for t0, phi, v in zip(cycle_starts, phases, visibilities):
        counts = sample_counts(phi, v, cfg, rng)
        for i, (setting, n) in enumerate(zip(cfg.settings, counts)):
            records.append(MeasurementRecord(float(t0 + i * cfg.window_s), float(setting), float(cfg.window_s), int(n)))
    return records


def simulate_run(reaction, probe, drift, duration, phase_offset=0.0):
    """Records and truth table for one reaction run.

    ``phase_offset`` is an instrumental phase added to the sample phase in
    the measured counts; the truth table holds the sample phase alone.

    Returns
    -------
    records : list of MeasurementRecord
        One record per setting per cycle, timestamped at the window start.
    truth : list of TruthRow
        True phase and visibility at each cycle start.
    """
    starts = cycle_times(duration, probe.cycle_s)
    count_rng, drift_rng, _ = make_rng(probe.seed)
    phases = np.atleast_1d(phase_at(starts, reaction))
    visibilities = drift.trajectory(starts, drift_rng)
    records = _emit(starts, phases + phase_offset, visibilities, probe, count_rng)
    truth = [TruthRow(float(t), float(phi), float(v)) for t, phi, v in zip(starts, phases, visibilities)]
    return records, truth


def water_run(probe, visibility, n_cycles, phase_offset=0.0):
    """Records of an achiral reference sample at a constant instrumental phase."""
    if n_cycles < 1:
        raise DomainError(f"n_cycles must be at least 1, got {n_cycles!r}")
    check_visibility(visibility)
    _, _, count_rng = make_rng(probe.seed)
    starts = probe.cycle_s * np.arange(n_cycles)
    phases = np.full(n_cycles, float(phase_offset))
    visibilities = np.full(n_cycles, float(visibility))
    return _emit(starts, phases, visibilities, probe, count_rng)
