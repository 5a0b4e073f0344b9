"""Pseudo-first-order sucrose inversion and the resulting optical rotation.

Sucrose (dextrorotatory) hydrolyses into equimolar glucose (dextro) and
fructose (levo).  Fructose rotates more strongly than glucose, so the
net rotation of the solution drifts from positive to negative.

Concentrations are mass concentrations in g/mL.  Each mole of sucrose
yields one mole of each monomer, so the monomer mass grows by the
molar-mass ratio ``M_monomer / M_sucrose`` per gram of sucrose consumed.
"""

import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import DomainError, NoCrossingError

__all__ = [
    "ReactionParams",
    "Composition",
    "composition_at",
    "optical_rotation",
    "rotation_at",
    "phase_at",
    "zero_crossing_time",
    "rate_from_completion",
]


@dataclass(frozen=True)
class ReactionParams:
    """Reaction and sample-cell parameters.

    Specific rotations are in deg mL / (g dm) at the sodium D line, path in
    dm, rate constant in 1/s.
    """

    k: float
    s0: float = 0.3
    path: float = 0.2
    rot_sucrose: float = 66.4
    rot_glucose: float = 52.7
    rot_fructose: float = -92.3
    molar_mass_sucrose: float = 342.30
    molar_mass_monomer: float = 180.16
    rotation_to_phase_factor: float = 1.0

    def __post_init__(self):
        for name in ("k", "s0", "path", "molar_mass_sucrose", "molar_mass_monomer"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive, got {value!r}")
        for f in fields(self):
            if not math.isfinite(getattr(self, f.name)):
                raise DomainError(f"{f.name} must be finite")

    @property
    def mass_ratio(self):
        return self.molar_mass_monomer / self.molar_mass_sucrose


@dataclass(frozen=True)
class Composition:
    t: np.ndarray | float
    sucrose: np.ndarray | float
    glucose: np.ndarray | float
    fructose: np.ndarray | float


def composition_at(t, params):
    """Mass concentrations of the three sugars at time ``t`` (seconds).

    ``t`` may be a scalar or an array.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(np.isnan(t_arr)) or np.any(t_arr < 0):
        raise DomainError(f"time must be nonnegative, got {t!r}")
    remaining = np.exp(-params.k * t_arr)
    sucrose = params.s0 * remaining
    # -expm1 keeps precision when k*t is tiny
    monomer = params.s0 * -np.expm1(-params.k * t_arr) * params.mass_ratio
    if t_arr.ndim == 0:
        return Composition(float(t_arr), float(sucrose), float(monomer), float(monomer))
    return Composition(t_arr, sucrose, monomer, monomer.copy())


def optical_rotation(c, params):
    """Optical rotation in degrees, ``path * sum(specific rotation * concentration)``."""
    alpha = params.path * (
        params.rot_sucrose * np.asarray(c.sucrose)
        + params.rot_glucose * np.asarray(c.glucose)
        + params.rot_fructose * np.asarray(c.fructose)
    )
    return float(alpha) if np.ndim(alpha) == 0 else alpha


def rotation_at(t, params):
    return optical_rotation(composition_at(t, params), params)


def phase_at(t, params):
    """Probe phase in radians produced by the sample at time ``t``."""
    phase = params.rotation_to_phase_factor * np.radians(rotation_at(t, params))
    return float(phase) if np.ndim(phase) == 0 else phase


def _rotation_amplitudes(params):
    # alpha(t) = path * ((A + B) exp(-k t) - B)
    a = params.rot_sucrose * params.s0
    b = -(params.rot_glucose + params.rot_fructose) * params.s0 * params.mass_ratio
    return a, b


def zero_crossing_time(params):
    """Time in seconds at which the optical rotation passes through zero.

    Raises
    ------
    NoCrossingError
        If the rotation does not go from positive to negative.
    """
    a, b = _rotation_amplitudes(params)
    if not (a > 0 and b > 0):
        raise NoCrossingError(
            f"rotation does not change sign (initial {params.path * a:.6g} deg, "
            f"final {-params.path * b:.6g} deg)"
        )
    return math.log((a + b) / b) / params.k


def rate_from_completion(fraction, t):
    """First-order rate constant that reaches ``fraction`` conversion at ``t`` seconds."""
    if not 0.0 < fraction < 1.0:
        raise DomainError(f"fraction must lie in (0, 1), got {fraction!r}")
    if not t > 0:
        raise DomainError(f"completion time must be positive, got {t!r}")
    return -math.log1p(-fraction) / t
