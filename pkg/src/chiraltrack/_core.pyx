# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled grid posterior kernel; see ``_core_py.py`` for the reference version."""

from libc.math cimport exp, log, INFINITY
from libc.stdlib cimport malloc, free

# Cells more than ln(size) + 60 ln 2 below the peak hold < 2**-60 of the
# total mass together, so they are set to zero without calling exp.
cdef double TAIL_BITS = 60.0


def grid_posterior(const double[:, :, ::1] logp,
                   const long long[::1] counts,
                   logprior,
                   double[:, ::1] density,
                   double[::1] phi_marg,
                   double[::1] vis_marg):
    cdef Py_ssize_t n_s = logp.shape[0]
    cdef Py_ssize_t n_p = logp.shape[1]
    cdef Py_ssize_t n_v = logp.shape[2]
    cdef Py_ssize_t size = n_p * n_v
    cdef Py_ssize_t s, i, j, k, n_used = 0
    cdef double peak = -INFINITY
    cdef double total = 0.0
    cdef double acc, x, w, row
    cdef double cut = -(log(<double>size) + TAIL_BITS * log(2.0))
    cdef double* d = &density[0, 0]
    cdef const double* p0 = NULL
    cdef const double[:, ::1] prior
    if counts.shape[0] != n_s:
        raise ValueError("counts length does not match the table")
    if (density.shape[0] != n_p or density.shape[1] != n_v
            or phi_marg.shape[0] != n_p or vis_marg.shape[0] != n_v):
        raise ValueError("output buffers do not match the grid")
    if logprior is not None:
        prior = logprior
        if prior.shape[0] != n_p or prior.shape[1] != n_v:
            raise ValueError("prior does not match the grid")
        p0 = &prior[0, 0]

    # zero counts must not touch log(0) = -inf cells
    cdef const double** tables = <const double**>malloc(n_s * sizeof(double*))
    cdef double* weights = <double*>malloc(n_s * sizeof(double))
    if tables == NULL or weights == NULL:
        free(tables)
        free(weights)
        raise MemoryError()
    for s in range(n_s):
        if counts[s] != 0:
            tables[n_used] = &logp[s, 0, 0]
            weights[n_used] = <double>counts[s]
            n_used += 1

    with nogil:
        for k in range(size):
            acc = p0[k] if p0 != NULL else 0.0
            for s in range(n_used):
                acc += weights[s] * tables[s][k]
            d[k] = acc
            if acc > peak:
                peak = acc

        for k in range(size):
            x = d[k] - peak
            if x < cut:
                d[k] = 0.0
            else:
                w = exp(x)
                d[k] = w
                total += w

        for j in range(n_v):
            vis_marg[j] = 0.0
        w = 1.0 / total
        for i in range(n_p):
            row = 0.0
            for j in range(n_v):
                x = d[i * n_v + j] * w
                d[i * n_v + j] = x
                row += x
                vis_marg[j] += x
            phi_marg[i] = row

    free(tables)
    free(weights)
