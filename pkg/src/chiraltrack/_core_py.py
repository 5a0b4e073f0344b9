"""Pure numpy implementation of the grid posterior kernel.

Mirrors ``_core.pyx`` exactly; used when the compiled extension is not
available or ``CHIRALTRACK_PURE=1`` is set.
"""

import numpy as np


def grid_posterior(logp, counts, logprior, density, phi_marg, vis_marg):
    """Normalized posterior ``prior * prod_s p_s ** n_s`` on a (phi, v) grid.

    Parameters
    ----------
    logp : ndarray, shape (S, P, V)
        Log outcome probabilities per setting and grid cell.
    counts : ndarray of int64, shape (S,)
    logprior : ndarray, shape (P, V), or None for a uniform prior
    density, phi_marg, vis_marg : ndarray
        Output buffers of shapes (P, V), (P,), (V,).
    """
    if logprior is None:
        density.fill(0.0)
    else:
        np.copyto(density, logprior)
    for s in range(logp.shape[0]):
        n = counts[s]
        # zero counts must not touch log(0) = -inf cells
        if n != 0:
            density += n * logp[s]
    peak = density.max()
    density -= peak
    np.exp(density, out=density)
    density /= density.sum()
    density.sum(axis=1, out=phi_marg)
    density.sum(axis=0, out=vis_marg)
