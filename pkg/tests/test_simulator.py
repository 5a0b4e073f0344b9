import math

import numpy as np
import pytest
from scipy.stats import chisquare

from chiraltrack.errors import DomainError
from chiraltrack.kinetics import ReactionParams, phase_at, rate_from_completion
from chiraltrack.model import probability_vector
from chiraltrack.simulator import (
    ProbeConfig,
    VisibilityDrift,
    sample_counts,
    simulate_run,
    water_run,
)


@pytest.fixture
def reaction():
    return ReactionParams(k=rate_from_completion(0.95, 1800))


class TestSampleCounts:
    def test_tiny_rate_gives_zeros(self):
        rng = np.random.default_rng(0)
        cfg = ProbeConfig(mean_pairs_per_window=1e-4)
        total = sum(sample_counts(0.3, 0.7, cfg, rng).sum() for _ in range(100))
        assert total <= 1

    def test_dark_outcome_never_fires(self):
        rng = np.random.default_rng(1)
        cfg = ProbeConfig(mean_pairs_per_window=5.0)
        draws = np.array([sample_counts(0.0, 1.0, cfg, rng) for _ in range(100_000)])
        assert draws[:, 2].sum() == 0
        assert draws[:, 0].mean() == pytest.approx(10.0, rel=0.01)

    def test_means_match_probabilities(self):
        rng = np.random.default_rng(2)
        cfg = ProbeConfig(mean_pairs_per_window=250.0)
        draws = np.array([sample_counts(0.1, 0.8, cfg, rng) for _ in range(10_000)])
        expected = 1000.0 * probability_vector(0.1, 0.8)
        se = np.sqrt(expected / draws.shape[0])
        assert np.all(np.abs(draws.mean(axis=0) - expected) < 3 * se)


class TestSimulateRun:
    def test_record_count(self, reaction):
        records, truth = simulate_run(reaction, ProbeConfig(), VisibilityDrift(), 1800.0)
        assert len(truth) == 60
        assert len(records) == 240

    def test_window_timestamps_and_order(self, reaction):
        probe = ProbeConfig()
        records, _ = simulate_run(reaction, probe, VisibilityDrift(), 120.0)
        assert [r.t for r in records[:5]] == [0.0, 2.0, 4.0, 6.0, 30.0]
        assert [r.setting for r in records[:4]] == list(probe.settings)
        assert all(r.counts >= 0 and r.window_s == 2.0 for r in records)

    def test_constant_drift_truth(self, reaction):
        _, truth = simulate_run(reaction, ProbeConfig(), VisibilityDrift("constant", 0.8), 600.0)
        assert {r.vis_true for r in truth} == {0.8}

    def test_truth_crosses_zero_between_cycles(self, reaction):
        _, truth = simulate_run(reaction, ProbeConfig(), VisibilityDrift(), 3600.0)
        signs = {r.t: r.phi_true > 0 for r in truth}
        assert signs[840.0] and not signs[870.0]
        assert sum(signs.values()) == 29

    def test_truth_matches_kinetics(self, reaction):
        _, truth = simulate_run(reaction, ProbeConfig(), VisibilityDrift(), 900.0)
        for r in truth:
            assert r.phi_true == phase_at(r.t, reaction)

    def test_deterministic(self, reaction):
        drift = VisibilityDrift("random-walk", 0.8, step_std=0.01)
        a = simulate_run(reaction, ProbeConfig(seed=5), drift, 900.0)
        b = simulate_run(reaction, ProbeConfig(seed=5), drift, 900.0)
        c = simulate_run(reaction, ProbeConfig(seed=6), drift, 900.0)
        assert a == b
        assert a != c

    def test_long_run_fractions(self):
        flat = ReactionParams(k=1e-3, rotation_to_phase_factor=0.0)
        records, _ = simulate_run(flat, ProbeConfig(seed=9), VisibilityDrift("constant", 0.75), 30.0 * 10_000, phase_offset=0.3)
        pooled = np.zeros(4)
        for i, r in enumerate(records):
            pooled[i % 4] += r.counts
        expected = pooled.sum() * probability_vector(0.3, 0.75)
        assert chisquare(pooled, expected).pvalue > 0.001

    def test_bad_duration(self, reaction):
        with pytest.raises(DomainError):
            simulate_run(reaction, ProbeConfig(), VisibilityDrift(), 0.0)


class TestDrift:
    def test_linear(self):
        v = VisibilityDrift("linear", 0.85, slope=-0.05 / 3600).trajectory([0.0, 1800.0, 3600.0])
        np.testing.assert_allclose(v, [0.85, 0.825, 0.80])

    def test_linear_clamped(self):
        v = VisibilityDrift("linear", 0.5, slope=-1.0, floor=0.2).trajectory([0.0, 10.0])
        assert v.tolist() == [0.5, 0.2]

    def test_random_walk_stays_in_bounds(self):
        drift = VisibilityDrift("random-walk", 0.5, step_std=0.05, floor=0.3, ceil=0.9)
        v = drift.trajectory(np.arange(1_000_000), np.random.default_rng(4))
        assert v.min() >= 0.3 and v.max() <= 0.9
        assert v.min() == 0.3 and v.max() == 0.9

    @pytest.mark.parametrize(
        "kwargs",
        [dict(kind="sine"), dict(floor=0.6, ceil=0.5), dict(v0=1.2), dict(step_std=-1.0), dict(ceil=1.1)],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            VisibilityDrift(**kwargs)


class TestProbeConfig:
    def test_defaults(self):
        cfg = ProbeConfig()
        assert (cfg.window_s, cfg.cycle_s, cfg.mean_pairs_per_window) == (2.0, 30.0, 250.0)
        assert cfg.settings == (0.0, math.pi / 16, math.pi / 8, 3 * math.pi / 16)

    @pytest.mark.parametrize(
        "kwargs", [dict(mean_pairs_per_window=0.0), dict(window_s=0.0), dict(cycle_s=7.9), dict(settings=())]
    )
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            ProbeConfig(**kwargs)


class TestWaterRun:
    def test_shape(self):
        records = water_run(ProbeConfig(), 0.9, 10, 0.05)
        assert len(records) == 40

    def test_needs_a_cycle(self):
        with pytest.raises(DomainError):
            water_run(ProbeConfig(), 0.9, 0)

    def test_independent_of_sample_stream(self, reaction):
        flat = ReactionParams(k=1e-3, rotation_to_phase_factor=0.0)
        sample, _ = simulate_run(flat, ProbeConfig(seed=3), VisibilityDrift("constant", 0.9), 300.0)
        water = water_run(ProbeConfig(seed=3), 0.9, 10)
        assert [r.counts for r in sample] != [r.counts for r in water]
