# Compiled mixture-posterior kernel. Same contract as _kernels_py.
import numpy as np

from libc.math cimport exp

BACKEND = "cython"


def posterior_mean(const double[::1] v, const double[:, ::1] corpus,
                   const double[::1] alpha, const double[::1] inv_two_sigma_sq):
    cdef Py_ssize_t n = corpus.shape[0]
    cdef Py_ssize_t e = corpus.shape[1]
    if v.shape[0] != e or alpha.shape[0] != e or inv_two_sigma_sq.shape[0] != e:
        raise ValueError("entry dimension mismatch")

    logw_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] logw = logw_arr
    cdef Py_ssize_t i, j
    cdef double acc, d, mx, total

    for j in range(n):
        acc = 0.0
        for i in range(e):
            d = v[i] - alpha[i] * corpus[j, i]
            acc += d * d * inv_two_sigma_sq[i]
        logw[j] = -acc

    mx = logw[0]
    for j in range(1, n):
        if logw[j] > mx:
            mx = logw[j]
    total = 0.0
    for j in range(n):
        logw[j] = exp(logw[j] - mx)
        total += logw[j]
    for j in range(n):
        logw[j] /= total

    mean_arr = np.zeros(e, dtype=np.float64)
    cdef double[::1] mean = mean_arr
    cdef double wj
    for j in range(n):
        wj = logw[j]
        for i in range(e):
            mean[i] += wj * corpus[j, i]
    return mean_arr, logw_arr
