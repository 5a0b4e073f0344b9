"""Outcome probabilities of the two-photon polarimetric measurement.

The quantum model gives the coincidence probability for a wave-plate
setting ``theta`` as ``(1 + v cos(8 theta - 2 phi)) / 4``.  Over the four
canonical settings the fringe phases are a full quadrature set, so the
probabilities form a normalized distribution.

The classical benchmark is a single-photon binary polarimeter,
``(1 + v cos(4 theta - phi)) / 2``.  Its phase coefficient is half the
two-photon one.

All functions broadcast over numpy arrays.
"""

import numpy as np

from .errors import DomainError

__all__ = [
    "CANONICAL_SETTINGS",
    "CLASSICAL_SETTINGS",
    "wrap_phase",
    "check_visibility",
    "coincidence_probability",
    "probability_vector",
    "classical_probability",
    "classical_settings",
    "model_derivatives",
    "classical_derivatives",
]

CANONICAL_SETTINGS = (0.0, np.pi / 16, np.pi / 8, 3 * np.pi / 16)

# Classical fringe phases 4*theta land on {0, pi/2, pi, 3pi/2} at phi = 0.
CLASSICAL_SETTINGS = (0.0, np.pi / 8, np.pi / 4, 3 * np.pi / 8)


def wrap_phase(phase):
    """Map a phase onto its canonical representative in [-pi/2, pi/2).

    The measurement model has period pi in the phase, so every phase is
    equivalent to exactly one value in the half-open interval.
    """
    wrapped = np.mod(np.asarray(phase, dtype=float) + np.pi / 2, np.pi) - np.pi / 2
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def check_visibility(visibility):
    """Raise :class:`DomainError` unless every visibility is in [0, 1]."""
    v = np.asarray(visibility, dtype=float)
    if np.any(np.isnan(v)) or np.any(v < 0.0) or np.any(v > 1.0):
        raise DomainError(f"visibility must lie in [0, 1], got {visibility!r}")
    return v


def coincidence_probability(setting, phase, visibility):
    """Probability of a coincidence for one wave-plate setting.

    Parameters
    ----------
    setting : float or array_like
        Wave-plate angle theta in radians.
    phase : float or array_like
        Sample phase phi in radians; any real value is accepted.
    visibility : float or array_like
        Fringe visibility in [0, 1].

    Returns
    -------
    float or np.ndarray
        ``(1 + v cos(8 theta - 2 phi)) / 4``.
    """
    v = check_visibility(visibility)
    p = 0.25 * (1.0 + v * np.cos(8.0 * np.asarray(setting) - 2.0 * np.asarray(phase)))
    return float(p) if np.ndim(p) == 0 else p


def probability_vector(phase, visibility, settings=CANONICAL_SETTINGS):
    """Coincidence probabilities for each setting, in setting order."""
    settings = np.asarray(settings, dtype=float)
    if settings.size == 0:
        raise DomainError("settings must be nonempty")
    return np.asarray(coincidence_probability(settings, phase, visibility), dtype=float)


def classical_probability(setting, phase, visibility):
    """Single-photon transmission probability ``(1 + v cos(4 theta - phi)) / 2``."""
    v = check_visibility(visibility)
    p = 0.5 * (1.0 + v * np.cos(4.0 * np.asarray(setting) - np.asarray(phase)))
    return float(p) if np.ndim(p) == 0 else p


def classical_settings(phase=0.0):
    """Classical settings whose fringe phases are {0, pi/2, pi, 3pi/2} at ``phase``."""
    return tuple(float(s + phase / 4.0) for s in CLASSICAL_SETTINGS)


def model_derivatives(setting, phase, visibility):
    """Partial derivatives of :func:`coincidence_probability`.

    Returns
    -------
    tuple
        ``(dp/dphi, dp/dv) = (v/2 sin(8 theta - 2 phi), cos(8 theta - 2 phi)/4)``.
    """
    x = 8.0 * np.asarray(setting, dtype=float) - 2.0 * np.asarray(phase, dtype=float)
    v = np.asarray(visibility, dtype=float)
    dphi = 0.5 * v * np.sin(x)
    dv = 0.25 * np.cos(x) * np.ones_like(dphi)
    if np.ndim(dphi) == 0:
        return float(dphi), float(dv)
    return dphi, dv


def classical_derivatives(setting, phase, visibility):
    """Partial derivatives of :func:`classical_probability` in (phi, v)."""
    x = 4.0 * np.asarray(setting, dtype=float) - np.asarray(phase, dtype=float)
    v = np.asarray(visibility, dtype=float)
    dphi = 0.5 * v * np.sin(x)
    dv = 0.5 * np.cos(x) * np.ones_like(dphi)
    if np.ndim(dphi) == 0:
        return float(dphi), float(dv)
    return dphi, dv
