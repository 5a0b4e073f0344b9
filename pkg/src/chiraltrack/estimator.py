"""Bayesian joint estimation of phase and visibility on a grid.

The posterior over (phi, v) is evaluated on a regular grid covering one
period of the phase, ``[-pi/2, pi/2)``, and the full visibility range
``[0, 1]``.  Likelihoods are multinomial in the four setting counts, so
the total-count factor drops out.

Point estimates treat the phase as circular with period pi: statistics
are computed on the doubled angle ``2 phi`` and halved.  The phase
uncertainty is the wrapped-normal standard deviation
``sqrt(-2 ln R) / 2``, where ``R`` is the mean resultant length of
``exp(2i phi)``.  For concentrated posteriors this coincides with the
ordinary standard deviation.
"""

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .errors import CalibrationError, IncompleteCycleWarning, RecordError
from .model import CANONICAL_SETTINGS, wrap_phase

__all__ = [
    "GridSpec",
    "PosteriorGrid",
    "ProbeEstimate",
    "UNIFORM_PHASE_STD",
    "posterior",
    "point_estimate",
    "estimate_counts",
    "group_cycles",
    "pooled_counts",
    "calibration_estimate",
    "calibrate",
    "track",
    "unwrap_series",
]

UNIFORM_PHASE_STD = math.pi / math.sqrt(12.0)

_RESULTANT_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    n_phi: int = 1024
    n_v: int = 512

    def __post_init__(self):
        if self.n_phi < 2 or self.n_v < 2:
            raise ValueError(f"grid resolutions must be >= 2, got {self.n_phi}x{self.n_v}")

    @property
    def phi_axis(self):
        return -math.pi / 2 + math.pi * np.arange(self.n_phi) / self.n_phi

    @property
    def vis_axis(self):
        return np.linspace(0.0, 1.0, self.n_v)


@dataclass
class PosteriorGrid:
    phi_axis: np.ndarray
    vis_axis: np.ndarray
    density: np.ndarray
    phi_marginal: np.ndarray = None
    vis_marginal: np.ndarray = None
    flags: tuple = ()

    def __post_init__(self):
        if self.phi_marginal is None:
            self.phi_marginal = self.density.sum(axis=1)
        if self.vis_marginal is None:
            self.vis_marginal = self.density.sum(axis=0)

    @classmethod
    def uniform(cls, grid=GridSpec()):
        density = np.full((grid.n_phi, grid.n_v), 1.0 / (grid.n_phi * grid.n_v))
        return cls(grid.phi_axis, grid.vis_axis, density)


@dataclass(frozen=True)
class ProbeEstimate:
    t: float
    phi_mean: float
    phi_std: float
    vis_mean: float
    vis_std: float
    total_counts: int
    flags: tuple = field(default=())


@lru_cache(maxsize=8)
def _log_prob_table(n_phi, n_v, settings, fixed_visibility):
    phi = GridSpec(n_phi, 2).phi_axis
    vis = np.linspace(0.0, 1.0, n_v) if fixed_visibility is None else np.array([fixed_visibility])
    theta = np.asarray(settings, dtype=float)
    cos_term = np.cos(8.0 * theta[:, None] - 2.0 * phi[None, :])
    p = 0.25 * (1.0 + cos_term[:, :, None] * vis[None, None, :])
    with np.errstate(divide="ignore"):
        table = np.log(np.clip(p, 0.0, None))
    table.setflags(write=False)
    return table, phi, vis


def posterior(counts, settings=CANONICAL_SETTINGS, grid=GridSpec(), prior=None, fixed_visibility=None):
    """Posterior over (phi, v) given one set of setting counts.

    Parameters
    ----------
    counts : sequence of int
        Coincidence counts, one per setting.
    settings : sequence of float
        Wave-plate angles matching ``counts``.
    grid : GridSpec
    prior : PosteriorGrid, optional
        Defaults to a uniform prior.  Must share the grid.
    fixed_visibility : float, optional
        Evaluate the phase-only posterior with v held at this value.  The
        returned grid then has a single visibility column.

    Returns
    -------
    PosteriorGrid
        With the ``"degenerate"`` flag and the prior unchanged when all
        counts are zero.
    """
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    settings = tuple(float(s) for s in settings)
    if counts.shape != (len(settings),):
        raise ValueError(f"expected {len(settings)} counts, got shape {counts.shape}")
    if np.any(counts < 0):
        raise ValueError("counts must be nonnegative")
    table, phi, vis = _log_prob_table(grid.n_phi, grid.n_v, settings, fixed_visibility)
    if prior is not None and prior.density.shape != (phi.size, vis.size):
        raise ValueError("prior grid does not match the requested grid")
    if counts.sum() == 0:
        if prior is None:
            density = np.full((phi.size, vis.size), 1.0 / (phi.size * vis.size))
            return PosteriorGrid(phi, vis, density, flags=("degenerate",))
        return PosteriorGrid(phi, vis, prior.density.copy(), flags=("degenerate",))
    logprior = None
    if prior is not None:
        with np.errstate(divide="ignore"):
            logprior = np.ascontiguousarray(np.log(prior.density))
    density = np.empty((phi.size, vis.size))
    phi_marg = np.empty(phi.size)
    vis_marg = np.empty(vis.size)
    _kernels.grid_posterior(table, counts, logprior, density, phi_marg, vis_marg)
    return PosteriorGrid(phi, vis, density, phi_marg, vis_marg)


def point_estimate(g, t=0.0, total_counts=0):
    """Posterior means and standard deviations of phase and visibility."""
    flags = list(g.flags)
    w_phi = g.phi_marginal
    resultant = np.sum(w_phi * np.exp(2j * g.phi_axis))
    r = abs(resultant)
    if r < _RESULTANT_TOL:
        flags.append("undefined_phase")
        phi_mean = 0.0  # midpoint of the phase axis
        phi_std = UNIFORM_PHASE_STD
    else:
        phi_mean = wrap_phase(0.5 * math.atan2(resultant.imag, resultant.real))
        phi_std = min(0.5 * math.sqrt(max(-2.0 * math.log(min(r, 1.0)), 0.0)), UNIFORM_PHASE_STD)
    w_vis = g.vis_marginal
    if g.vis_axis.size == 1:
        vis_mean, vis_var = float(g.vis_axis[0]), 0.0
    else:
        vis_mean = float(np.sum(w_vis * g.vis_axis))
        vis_var = float(np.sum(w_vis * (g.vis_axis - vis_mean) ** 2))
    return ProbeEstimate(
        t=float(t),
        phi_mean=float(phi_mean),
        phi_std=float(phi_std),
        vis_mean=min(max(vis_mean, 0.0), 1.0),
        vis_std=math.sqrt(max(vis_var, 0.0)),
        total_counts=int(total_counts),
        flags=tuple(flags),
    )


def estimate_counts(counts, t=0.0, settings=CANONICAL_SETTINGS, grid=GridSpec(), prior=None, fixed_visibility=None):
    """Posterior followed by :func:`point_estimate` for one cycle of counts."""
    g = posterior(counts, settings, grid, prior, fixed_visibility)
    return point_estimate(g, t, int(np.sum(counts)))


def _setting_index(setting, settings):
    for i, s in enumerate(settings):
        if math.isclose(setting, s, rel_tol=1e-7, abs_tol=1e-7):
            return i
    return None


def group_cycles(records, settings=CANONICAL_SETTINGS, cycle_s=30.0):
    """Split records into measurement cycles.

    Records are binned by ``floor((t - t0) / cycle_s)``.  A cycle is complete
    when it holds each setting exactly once, in protocol order.

    Returns
    -------
    complete : list of (float, ndarray)
        Cycle start time and counts in setting order.
    dropped : list of float
        Start times of incomplete cycles.
    """
    records = list(records)
    if not records:
        return [], []
    times = [r.t for r in records]
    if any(b < a for a, b in zip(times, times[1:])):
        raise RecordError("record timestamps are not in nondecreasing order")
    t0 = times[0]
    bins = {}
    order = []
    for r in records:
        key = int(math.floor((r.t - t0) / cycle_s + 1e-9))
        if key not in bins:
            bins[key] = []
            order.append(key)
        bins[key].append(r)
    complete, dropped = [], []
    for key in order:
        group = bins[key]
        idx = [_setting_index(r.setting, settings) for r in group]
        if idx == list(range(len(settings))):
            complete.append((group[0].t, np.array([r.counts for r in group], dtype=np.int64)))
        else:
            dropped.append(group[0].t)
    return complete, dropped


def pooled_counts(records, settings=CANONICAL_SETTINGS):
    """Sum counts per setting over all records."""
    totals = np.zeros(len(settings), dtype=np.int64)
    for r in records:
        i = _setting_index(r.setting, settings)
        if i is None:
            raise RecordError(f"record setting {r.setting!r} is not in the protocol")
        totals[i] += r.counts
    return totals


def calibration_estimate(water_records, grid=GridSpec(), settings=CANONICAL_SETTINGS):
    """Pooled estimate over a water run; raises CalibrationError if degenerate."""
    water_records = list(water_records)
    if not water_records:
        raise CalibrationError("no water records")
    counts = pooled_counts(water_records, settings)
    est = estimate_counts(counts, water_records[0].t, settings, grid)
    if "degenerate" in est.flags or "undefined_phase" in est.flags:
        raise CalibrationError(f"water calibration posterior is degenerate ({','.join(est.flags)})")
    return est


def calibrate(water_records, grid=GridSpec(), settings=CANONICAL_SETTINGS):
    """Reference phase of the empty (water) cell."""
    return calibration_estimate(water_records, grid, settings).phi_mean


def unwrap_series(phases, valid=None):
    """Shift each phase by a multiple of pi to stay within pi/2 of the previous one.

    The first phase is mapped into [-pi/2, pi/2).  Entries with
    ``valid[i] == False`` are shifted the same way but do not move the
    reference.
    """
    phases = np.asarray(phases, dtype=float)
    out = np.empty_like(phases)
    ref = None
    for i, x in enumerate(phases):
        if ref is None:
            y = wrap_phase(x)
        else:
            y = x + math.pi * round((ref - x) / math.pi)
        out[i] = y
        if valid is None or valid[i]:
            ref = y
    return out


def track(records, phi_ref=0.0, grid=GridSpec(), settings=CANONICAL_SETTINGS, cycle_s=30.0,
          sequential=False, fixed_visibility=None):
    """Per-cycle estimates of a run, calibrated and unwrapped.

    Each complete cycle gets an independent uniform-prior posterior unless
    ``sequential`` is set, in which case the previous posterior becomes
    the next prior.  Reported phases are ``raw - phi_ref`` unwrapped along
    the series.  Incomplete cycles are dropped with an
    :class:`IncompleteCycleWarning`.
    """
    cycles, dropped = group_cycles(records, settings, cycle_s)
    for t in dropped:
        warnings.warn(f"dropped incomplete cycle starting at t={t:.9g} s", IncompleteCycleWarning, stacklevel=2)
    raw = []
    prior = None
    for t, counts in cycles:
        g = posterior(counts, settings, grid, prior, fixed_visibility)
        raw.append(point_estimate(g, t, int(counts.sum())))
        if sequential:
            prior = g
    if not raw:
        return []
    valid = ["undefined_phase" not in e.flags and "degenerate" not in e.flags for e in raw]
    shifted = unwrap_series([e.phi_mean - phi_ref for e in raw], valid)
    return [
        ProbeEstimate(e.t, float(phi), e.phi_std, e.vis_mean, e.vis_std, e.total_counts, e.flags)
        for e, phi in zip(raw, shifted)
    ]
