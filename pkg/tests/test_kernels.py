import os
import subprocess
import sys

import numpy as np
import pytest

from chiraltrack import _core_py, _kernels
from chiraltrack.estimator import GridSpec, _log_prob_table
from chiraltrack.model import CANONICAL_SETTINGS

try:
    from chiraltrack import _core
except ImportError:  # extension not built
    _core = None

needs_core = pytest.mark.skipif(_core is None, reason="compiled kernel not built")


def run(kernel, logp, counts, logprior):
    P, V = logp.shape[1:]
    density, phi_marg, vis_marg = np.empty((P, V)), np.empty(P), np.empty(V)
    kernel(logp, np.asarray(counts, dtype=np.int64), logprior, density, phi_marg, vis_marg)
    return density, phi_marg, vis_marg


def table(n_phi=256, n_v=64):
    return _log_prob_table(n_phi, n_v, CANONICAL_SETTINGS, None)[0]


def test_fallback_matches_direct_formula():
    logp = table(32, 8)
    counts = [12, 7, 0, 9]
    density, phi_marg, vis_marg = run(_core_py.grid_posterior, logp, counts, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        like = np.prod([np.exp(logp[s]) ** n for s, n in enumerate(counts)], axis=0)
    np.testing.assert_allclose(density, like / like.sum(), rtol=1e-12, atol=1e-300)
    np.testing.assert_allclose(phi_marg, density.sum(axis=1), rtol=1e-14)
    np.testing.assert_allclose(vis_marg, density.sum(axis=0), rtol=1e-14)


@needs_core
@pytest.mark.parametrize("counts", [[250, 180, 60, 140], [1000, 0, 0, 0], [1, 1, 1, 1], [0, 0, 5, 0], [40000, 31000, 9000, 20000]])
def test_backends_agree(counts):
    logp = table()
    a = run(_core_py.grid_posterior, logp, counts, None)
    b = run(_core.grid_posterior, logp, counts, None)
    for x, y in zip(a, b):
        assert np.max(np.abs(x - y)) <= 1e-14
    assert abs(b[0].sum() - 1.0) <= 1e-12


@needs_core
def test_backends_agree_with_prior():
    logp = table()
    prior, _, _ = run(_core_py.grid_posterior, logp, [30, 20, 5, 25], None)
    with np.errstate(divide="ignore"):
        logprior = np.log(prior)
    a = run(_core_py.grid_posterior, logp, [10, 14, 3, 9], logprior)
    b = run(_core.grid_posterior, logp, [10, 14, 3, 9], logprior)
    assert np.max(np.abs(a[0] - b[0])) <= 1e-14


@needs_core
def test_core_rejects_bad_shapes():
    logp = table(16, 4)
    with pytest.raises((ValueError, TypeError)):
        run(_core.grid_posterior, logp, [1, 2, 3], None)


def test_default_backend():
    expected = "python" if os.environ.get("CHIRALTRACK_PURE") or _core is None else "cython"
    assert _kernels.BACKEND == expected


def test_pure_env_forces_fallback():
    env = dict(os.environ, CHIRALTRACK_PURE="1")
    out = subprocess.run(
        [sys.executable, "-c", "import chiraltrack; print(chiraltrack.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


def test_grid_spec_axes():
    g = GridSpec(8, 3)
    assert g.phi_axis[0] == -np.pi / 2 and g.phi_axis[-1] < np.pi / 2
    np.testing.assert_allclose(np.diff(g.phi_axis), np.pi / 8)
    assert g.vis_axis.tolist() == [0.0, 0.5, 1.0]
