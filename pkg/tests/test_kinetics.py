import math

import numpy as np
import pytest
from scipy.optimize import brentq

from chiraltrack.errors import DomainError, NoCrossingError
from chiraltrack.kinetics import (
    ReactionParams,
    composition_at,
    optical_rotation,
    phase_at,
    rate_from_completion,
    rotation_at,
    zero_crossing_time,
)

# mpmath references (30 digits) from the default constants
MONOMER_FINAL = 0.157896581945662
ALPHA_0 = 3.984
ALPHA_INF = -1.25054092900964
PHI_0 = 0.0695339173994541
PHI_INF = -0.0218260566421669


@pytest.fixture
def params():
    return ReactionParams(k=1e-3)


class TestComposition:
    def test_initial(self, params):
        c = composition_at(0.0, params)
        assert (c.sucrose, c.glucose, c.fructose) == (0.3, 0.0, 0.0)

    def test_complete(self, params):
        c = composition_at(1e9, params)
        assert c.sucrose == pytest.approx(0.0, abs=1e-300)
        assert c.glucose == pytest.approx(MONOMER_FINAL, abs=1e-12)
        assert c.fructose == pytest.approx(MONOMER_FINAL, abs=1e-12)

    def test_half_life(self, params):
        c = composition_at(math.log(2) / params.k, params)
        assert c.sucrose == pytest.approx(0.15, abs=1e-12)
        assert c.glucose == pytest.approx(MONOMER_FINAL / 2, abs=1e-12)

    def test_negative_time(self, params):
        with pytest.raises(DomainError):
            composition_at(-1.0, params)

    def test_mole_conservation(self):
        rng = np.random.default_rng(3)
        for k, t in zip(10 ** rng.uniform(-6, -1, 1000), rng.uniform(0, 1e5, 1000)):
            p = ReactionParams(k=k)
            c = composition_at(t, p)
            total = c.sucrose + p.molar_mass_sucrose / (2 * p.molar_mass_monomer) * (c.glucose + c.fructose)
            assert abs(total - p.s0) <= 1e-12 * p.s0
            assert min(c.sucrose, c.glucose, c.fructose) >= 0

    def test_array_input(self, params):
        c = composition_at(np.array([0.0, 100.0]), params)
        assert c.sucrose.shape == (2,)


class TestRotation:
    def test_initial(self, params):
        assert rotation_at(0.0, params) == pytest.approx(ALPHA_0, abs=1e-12)

    def test_final(self, params):
        assert rotation_at(1e9, params) == pytest.approx(ALPHA_INF, abs=1e-12)

    def test_empty(self, params):
        c = composition_at(0.0, params)
        assert optical_rotation(type(c)(0.0, 0.0, 0.0, 0.0), params) == 0.0

    def test_strictly_decreasing(self, params):
        alpha = rotation_at(np.linspace(0, 2e4, 2001), params)
        assert np.all(np.diff(alpha) < 0)


class TestPhase:
    def test_endpoints(self, params):
        assert phase_at(0.0, params) == pytest.approx(PHI_0, abs=1e-12)
        assert phase_at(1e9, params) == pytest.approx(PHI_INF, abs=1e-12)
        assert phase_at(0.0, params) > 0 > phase_at(1e9, params)

    def test_zero_factor(self):
        p = ReactionParams(k=1e-3, rotation_to_phase_factor=0.0)
        assert np.all(phase_at(np.linspace(0, 1e4, 11), p) == 0.0)


class TestZeroCrossing:
    def test_example_rate(self):
        # mpmath: ln(4.18582135744658) / 1.664e-3
        assert zero_crossing_time(ReactionParams(k=1.664e-3)) == pytest.approx(860.398405599687, abs=1e-9)

    def test_scales_inversely_with_rate(self):
        t1 = zero_crossing_time(ReactionParams(k=1e-3))
        t2 = zero_crossing_time(ReactionParams(k=2e-3))
        assert t2 == pytest.approx(t1 / 2, rel=1e-15)

    @pytest.mark.parametrize("k", [1e-5, 1.3869e-4, 1.6643e-3, 5e-2])
    def test_matches_bisection(self, k):
        p = ReactionParams(k=k)
        root = brentq(lambda t: rotation_at(t, p), 0.0, 50.0 / k, xtol=1e-12 / k, rtol=1e-14)
        assert zero_crossing_time(p) == pytest.approx(root, rel=1e-6)

    def test_no_crossing(self):
        with pytest.raises(NoCrossingError):
            zero_crossing_time(ReactionParams(k=1e-3, rot_fructose=52.7))


class TestRateFromCompletion:
    def test_three_molar(self):
        assert rate_from_completion(0.95, 1800) == pytest.approx(math.log(20) / 1800, rel=1e-15)
        assert rate_from_completion(0.95, 1800) == pytest.approx(1.6643e-3, abs=1e-7)

    def test_half_life(self):
        assert rate_from_completion(0.5, 123.0) == pytest.approx(math.log(2) / 123.0, rel=1e-15)

    def test_six_hours(self):
        assert rate_from_completion(0.95, 21600) == pytest.approx(1.3869e-4, abs=1e-8)

    @pytest.mark.parametrize("fraction", [0.0, 1.0, -0.1, 1.5])
    def test_domain(self, fraction):
        with pytest.raises(DomainError):
            rate_from_completion(fraction, 100.0)


@pytest.mark.parametrize("field", ["k", "s0", "path", "molar_mass_sucrose"])
def test_params_positive(field):
    with pytest.raises(DomainError):
        ReactionParams(**{"k": 1e-3, field: 0.0})
