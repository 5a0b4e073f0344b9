"""Fisher information and Cramér-Rao bounds for the joint (phase, visibility) problem.

Quantum information is per detected coincidence (two photons); classical
information is per detected photon.  Comparisons between the two are
always made per photon.

At ``v = 1`` one coincidence outcome can have zero probability and the
information density becomes 0/0.  The default mode rejects visibilities
above ``V_REGULAR_MAX``; ``limit=True`` substitutes the analytic limits,
in which the phase entry stays finite, the visibility entry is infinite
at a dark outcome and the cross term takes its limit along the fringe, 0.
The phase entry is discontinuous there (``2 v**2 -> 2`` from below but
exactly 4 at ``v = 1`` for the canonical settings).
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularInformationError
from .model import (
    CANONICAL_SETTINGS,
    check_visibility,
    classical_settings,
    wrap_phase,
)

__all__ = [
    "V_REGULAR_MAX",
    "PHOTONS_PER_EVENT",
    "FisherMatrix",
    "CrbPoint",
    "fisher_matrix",
    "classical_fisher",
    "numeric_fisher",
    "crb",
    "crb_curve",
    "per_photon_phase_bound",
    "advantage_threshold",
]

V_REGULAR_MAX = 1.0 - 1e-9

PHOTONS_PER_EVENT = {"quantum": 2, "classical": 1}

_DET_TOL = 1e-14


@dataclass(frozen=True)
class FisherMatrix:
    f_pp: float
    f_pv: float
    f_vv: float

    def as_array(self):
        return np.array([[self.f_pp, self.f_pv], [self.f_pv, self.f_vv]])

    @property
    def det(self):
        return self.f_pp * self.f_vv - self.f_pv**2

    def __add__(self, other):
        return FisherMatrix(self.f_pp + other.f_pp, self.f_pv + other.f_pv, self.f_vv + other.f_vv)

    def scaled(self, factor):
        return FisherMatrix(factor * self.f_pp, factor * self.f_pv, factor * self.f_vv)


@dataclass(frozen=True)
class CrbPoint:
    phase: float
    visibility: float
    var_phase: float
    var_vis: float
    covar: float


def _check_mode(visibility, limit):
    v = float(check_visibility(visibility))
    if v > V_REGULAR_MAX and not (limit and v == 1.0):
        raise DomainError(
            f"visibility {v!r} exceeds {V_REGULAR_MAX!r}; pass limit=True to evaluate v = 1"
        )
    return v


def fisher_matrix(phase, visibility, settings=CANONICAL_SETTINGS, limit=False):
    """Per-coincidence Fisher matrix of the two-photon model.

    ``F_ij = sum_theta dp/dl_i dp/dl_j / p`` over the supplied settings,
    with ``l = (phi, v)``.
    """
    v = _check_mode(visibility, limit)
    x = 8.0 * np.asarray(settings, dtype=float) - 2.0 * phase
    s, c = np.sin(x), np.cos(x)
    denom = 1.0 + v * c
    if v < 1.0:
        # p = denom / 4, dp/dphi = v s / 2, dp/dv = c / 4
        pp = v * v * s * s / denom
        pv = 0.5 * v * s * c / denom
        vv = 0.25 * c * c / denom
    else:
        # v = 1: s^2 / (1 + c) -> 1 - c; at p = 0, f_vv is infinite and s c / (1 + c) -> 0
        zero = np.isclose(denom, 0.0, atol=1e-12)
        safe = np.where(zero, 1.0, denom)
        pp = 1.0 - c
        pv = np.where(zero, 0.0, 0.5 * s * c / safe)
        vv = np.where(zero, np.inf, 0.25 * c * c / safe)
    return FisherMatrix(float(pp.sum()), float(pv.sum()), float(vv.sum()))


def classical_fisher(phase, visibility, settings=None, limit=False):
    """Per-photon Fisher matrix of the classical binary polarimeter.

    Each setting contributes the information of a Bernoulli trial and the
    settings are weighted equally.  With ``settings=None`` the settings
    are placed so the fringe phases are {0, pi/2, pi, 3pi/2} at ``phase``.
    """
    v = _check_mode(visibility, limit)
    if settings is None:
        settings = classical_settings(phase)
    settings = np.asarray(settings, dtype=float)
    x = 4.0 * settings - phase
    s, c = np.sin(x), np.cos(x)
    weight = 1.0 / settings.size
    # p (1 - p) = (1 - v^2 c^2) / 4
    denom = 1.0 - v * v * c * c
    if v < 1.0:
        pp = v * v * s * s / denom
        pv = v * s * c / denom
        vv = c * c / denom
    else:
        zero = np.isclose(denom, 0.0, atol=1e-12)
        safe = np.where(zero, 1.0, denom)
        pp = np.where(zero, 1.0, s * s / safe)
        pv = np.where(zero, 0.0, s * c / safe)
        vv = np.where(zero, np.inf, c * c / safe)
    return FisherMatrix(
        float(weight * pp.sum()), float(weight * pv.sum()), float(weight * vv.sum())
    )


def numeric_fisher(prob_fn, phase, visibility, step=1e-6):
    """Fisher matrix of a normalized outcome distribution by central differences.

    ``prob_fn(phase, visibility)`` returns the outcome probabilities.  Used
    as an independent check of the analytic matrices.
    """
    p = np.asarray(prob_fn(phase, visibility))
    d_phi = (np.asarray(prob_fn(phase + step, visibility)) - np.asarray(prob_fn(phase - step, visibility))) / (2 * step)
    d_v = (np.asarray(prob_fn(phase, visibility + step)) - np.asarray(prob_fn(phase, visibility - step))) / (2 * step)
    return FisherMatrix(
        float(np.sum(d_phi * d_phi / p)),
        float(np.sum(d_phi * d_v / p)),
        float(np.sum(d_v * d_v / p)),
    )


def crb(f, n_events, phase=math.nan, visibility=math.nan):
    """Cramér-Rao covariance bound ``F^-1 / n_events``.

    Raises
    ------
    SingularInformationError
        If the matrix is not finite or its determinant is at most 1e-14.
    """
    if not n_events > 0:
        raise DomainError(f"n_events must be positive, got {n_events!r}")
    entries = (f.f_pp, f.f_pv, f.f_vv)
    if not all(math.isfinite(e) for e in entries):
        raise SingularInformationError(f"non-finite Fisher matrix {f!r}")
    det = f.det
    if det <= _DET_TOL:
        raise SingularInformationError(f"Fisher matrix is singular (det = {det:.3g})")
    scale = 1.0 / (det * n_events)
    return CrbPoint(
        phase=phase,
        visibility=visibility,
        var_phase=f.f_vv * scale,
        var_vis=f.f_pp * scale,
        covar=-f.f_pv * scale,
    )


def _model_fisher(model, phase, visibility):
    # v = 1 is read as the v -> 1- limit of the multiparameter bound
    v = min(float(visibility), V_REGULAR_MAX)
    if model == "quantum":
        return fisher_matrix(phase, v)
    if model == "classical":
        return classical_fisher(phase, v)
    raise DomainError(f"unknown model {model!r}")


def crb_curve(visibility, phase_grid, n_events, model="quantum"):
    """Bounds at each phase of ``phase_grid`` for a fixed visibility.

    ``n_events`` counts coincidences for the quantum model and photons for
    the classical one.  A visibility of exactly 1 is evaluated as the
    limit from below.
    """
    phase_grid = np.atleast_1d(np.asarray(phase_grid, dtype=float))
    if phase_grid.size == 0:
        raise DomainError("phase grid must be nonempty")
    check_visibility(visibility)
    return [
        crb(_model_fisher(model, phi, visibility), n_events, phase=float(phi), visibility=float(visibility))
        for phi in phase_grid
    ]


def per_photon_phase_bound(phase, visibility, model="quantum"):
    """Phase variance bound for one detected photon, ``[F^-1]_pp * photons/event``."""
    point = crb(_model_fisher(model, phase, visibility), 1)
    return point.var_phase * PHOTONS_PER_EVENT[model]


def advantage_threshold(phase, model="quantum", reference="classical", tol=1e-6):
    """Smallest visibility at which ``model`` matches the ideal ``reference`` bound.

    The reference is evaluated at ``v -> 1``.  The per-photon phase bound
    of ``model`` decreases with visibility; the returned ``v*`` is where
    it equals the reference.  Returns ``None`` when ``model`` stays worse
    for every visibility in (0, 1).
    """
    phase = wrap_phase(phase)
    target = per_photon_phase_bound(phase, 1.0, reference)

    def excess(v):
        return per_photon_phase_bound(phase, v, model) - target

    hi = V_REGULAR_MAX
    top = excess(hi)
    if abs(top) <= 1e-7 * target:
        return 1.0
    if top > 0:
        return None
    lo = 1e-6
    if excess(lo) <= 0:
        return lo
    while hi - lo > tol * 1e-3:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
