"""Simulation and Bayesian tracking of N00N-state polarimetry on a reacting sample."""

__version__ = "0.1.0"

from ._kernels import BACKEND
from .estimator import GridSpec, calibrate, point_estimate, posterior, track
from .fisher import advantage_threshold, classical_fisher, crb, crb_curve, fisher_matrix
from .kinetics import (
    ReactionParams,
    composition_at,
    optical_rotation,
    phase_at,
    rate_from_completion,
    zero_crossing_time,
)
from .model import (
    CANONICAL_SETTINGS,
    classical_probability,
    coincidence_probability,
    model_derivatives,
    probability_vector,
)
from .simulator import ProbeConfig, VisibilityDrift, simulate_run, water_run
