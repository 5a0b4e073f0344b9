"""Comparison of tracked estimates against simulation truth.

The zero crossing of a noisy phase series is located by fitting the
first-order relaxation ``phi(t) = a + b exp(-k t)`` by weighted least
squares.  Near the crossing the phase moves by far less than the
per-cycle noise within one cycle, so a raw sign change is not a useful
locator.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import curve_fit, minimize_scalar

from .fisher import crb, fisher_matrix, V_REGULAR_MAX

__all__ = [
    "RelaxationFit",
    "fit_relaxation",
    "sign_change_time",
    "crb_sigma",
    "TrackingReport",
    "compare_to_truth",
]


@dataclass(frozen=True)
class RelaxationFit:
    offset: float
    amplitude: float
    rate: float
    crossing_s: float
    crossing_std_s: float


def _relaxation(t, a, b, k):
    return a + b * np.exp(-k * t)


def _profile(log_k, t, y, w):
    e = np.exp(-math.exp(log_k) * t)
    design = np.column_stack([np.ones_like(t), e])
    weighted = design * w[:, None]
    beta = np.linalg.solve(design.T @ weighted, weighted.T @ y)
    resid = y - design @ beta
    return float(np.sum(w * resid * resid)), beta


def fit_relaxation(t, phi, phi_std, k_bounds=(1e-6, 1e-1)):
    """Weighted fit of ``a + b exp(-k t)`` and the implied zero crossing.

    The rate is located by scanning the profiled chi-square over a log
    grid, then refined jointly with the linear terms.  Returns ``None``
    when the fit does not cross zero from above.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(phi, dtype=float)
    sd = np.asarray(phi_std, dtype=float)
    if t.size < 4:
        return None
    w = 1.0 / np.maximum(sd, 1e-12) ** 2
    grid = np.linspace(math.log(k_bounds[0]), math.log(k_bounds[1]), 241)
    chi2 = [_profile(g, t, y, w)[0] for g in grid]
    best = int(np.argmin(chi2))
    lo, hi = grid[max(best - 1, 0)], grid[min(best + 1, grid.size - 1)]
    refined = minimize_scalar(lambda g: _profile(g, t, y, w)[0], bounds=(lo, hi), method="bounded")
    log_k = refined.x
    (a, b) = _profile(log_k, t, y, w)[1]
    k = math.exp(log_k)
    try:
        params, cov = curve_fit(_relaxation, t, y, p0=(a, b, k), sigma=sd, absolute_sigma=True, maxfev=2000)
        a, b, k = params
    except (RuntimeError, ValueError):
        cov = None
    if not (k > 0 and a < 0 < b):
        return None
    crossing = math.log(-b / a) / k
    std = math.nan
    if cov is not None and np.all(np.isfinite(cov)):
        grad = np.array([-1.0 / (a * k), 1.0 / (b * k), -crossing / k])
        std = math.sqrt(max(float(grad @ cov @ grad), 0.0))
    return RelaxationFit(float(a), float(b), float(k), float(crossing), std)


def sign_change_time(t, phi, window=9):
    """First time a centred running mean of ``phi`` turns negative, or None."""
    phi = np.asarray(phi, dtype=float)
    if phi.size < window:
        window = max(phi.size, 1)
    smooth = np.convolve(phi, np.ones(window) / window, mode="same")
    below = np.nonzero(smooth < 0)[0]
    if below.size == 0 or below[0] == 0:
        return None
    return float(t[below[0]])


def crb_sigma(phase, visibility, n_events):
    """Phase standard deviation predicted by the quantum bound for ``n_events`` coincidences."""
    v = min(float(visibility), V_REGULAR_MAX)
    return math.sqrt(crb(fisher_matrix(phase, v), n_events).var_phase)


@dataclass(frozen=True)
class TrackingReport:
    n_cycles: int
    calibration_phi_rad: float
    rmse_phi_rad: float
    mean_crb_sigma_rad: float
    mean_reported_sigma_rad: float
    coverage_2sigma: float
    crossing_true_s: float
    crossing_est_s: float
    crossing_est_std_s: float
    crossing_cycle_true: int
    crossing_cycle_est: int
    crossing_method: str

    def as_dict(self):
        return asdict(self)


def compare_to_truth(estimates, truth, cycle_s, crossing_true_s, calibration_phi=0.0):
    """Accuracy, bound-relative error and crossing-time summary of a tracked run.

    ``truth`` rows are matched to estimates by cycle start time.
    """
    by_time = {round(r.t, 6): r for r in truth}
    pairs = [(e, by_time[round(e.t, 6)]) for e in estimates if round(e.t, 6) in by_time]
    if not pairs:
        raise ValueError("no estimate matches a truth row")
    t = np.array([e.t for e, _ in pairs])
    est = np.array([e.phi_mean for e, _ in pairs])
    sd = np.array([e.phi_std for e, _ in pairs])
    true = np.array([r.phi_true for _, r in pairs])
    err = est - true
    bounds = [crb_sigma(r.phi_true, r.vis_true, max(e.total_counts, 1)) for e, r in pairs]

    fit = fit_relaxation(t, est, sd)
    if fit is not None:
        crossing, crossing_std, method = fit.crossing_s, fit.crossing_std_s, "relaxation-fit"
    else:
        crossing, crossing_std, method = sign_change_time(t, est), math.nan, "running-mean"
    if crossing is None:
        crossing, method = math.nan, "none"

    def cycle_of(x):
        return int(math.floor(x / cycle_s)) if math.isfinite(x) else -1

    return TrackingReport(
        n_cycles=len(pairs),
        calibration_phi_rad=float(calibration_phi),
        rmse_phi_rad=float(np.sqrt(np.mean(err**2))),
        mean_crb_sigma_rad=float(np.mean(bounds)),
        mean_reported_sigma_rad=float(np.mean(sd)),
        coverage_2sigma=float(np.mean(np.abs(err) <= 2 * sd)),
        crossing_true_s=float(crossing_true_s),
        crossing_est_s=float(crossing),
        crossing_est_std_s=float(crossing_std),
        crossing_cycle_true=cycle_of(crossing_true_s),
        crossing_cycle_est=cycle_of(crossing),
        crossing_method=method,
    )
