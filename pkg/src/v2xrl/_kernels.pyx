# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-step kernels: link-rate math and single-observation forward.

Semantics mirror _kernels_np exactly; the parity test suite holds the two
implementations together.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport log2

cnp.import_array()


def link_rates(
    cnp.float64_t[:, :, ::1] g_vv,
    cnp.float64_t[:, ::1] g_vb,
    cnp.float64_t[::1] g_ib,
    cnp.float64_t[:, ::1] g_iv,
    cnp.int64_t[::1] subband,
    cnp.float64_t[::1] p_mw,
    double pc_mw,
    double noise_bs_mw,
    double noise_veh_mw,
    double w_hz,
):
    cdef Py_ssize_t K = g_vv.shape[0]
    cdef Py_ssize_t M = g_vv.shape[2]

    v2i_sinr = np.empty(M)
    v2v_sinr = np.empty(K)
    interference = np.empty((K, M))
    v2i_capacity = np.empty(M)
    v2v_capacity = np.empty(K)
    cdef cnp.float64_t[::1] v2i_sinr_v = v2i_sinr
    cdef cnp.float64_t[::1] v2v_sinr_v = v2v_sinr
    cdef cnp.float64_t[:, ::1] interf_v = interference
    cdef cnp.float64_t[::1] v2i_cap_v = v2i_capacity
    cdef cnp.float64_t[::1] v2v_cap_v = v2v_capacity

    cdef Py_ssize_t k, j, m, band
    cdef double acc, s

    for m in range(M):
        acc = 0.0
        for j in range(K):
            if subband[j] == m:
                acc += p_mw[j] * g_vb[j, m]
        s = pc_mw * g_ib[m] / (noise_bs_mw + acc)
        v2i_sinr_v[m] = s
        v2i_cap_v[m] = w_hz * log2(1.0 + s)

    for k in range(K):
        for m in range(M):
            acc = pc_mw * g_iv[m, k]
            for j in range(K):
                if j != k and subband[j] == m:
                    acc += p_mw[j] * g_vv[j, k, m]
            interf_v[k, m] = acc
        band = subband[k]
        s = p_mw[k] * g_vv[k, k, band] / (noise_veh_mw + interf_v[k, band])
        v2v_sinr_v[k] = s
        v2v_cap_v[k] = w_hz * log2(1.0 + s)

    return v2i_sinr, v2v_sinr, interference, v2i_capacity, v2v_capacity


def qnet_forward_1(list weights, list biases, cnp.float64_t[::1] x):
    cdef Py_ssize_t n_layers = len(weights)
    cdef cnp.float64_t[::1] a = x
    cdef cnp.float64_t[:, ::1] w
    cdef cnp.float64_t[::1] b
    cdef cnp.float64_t[::1] o
    cdef Py_ssize_t li, i, j, n_in, n_out
    cdef double xi
    out = None

    for li in range(n_layers):
        w = weights[li]
        b = biases[li]
        n_in = w.shape[0]
        n_out = w.shape[1]
        out = np.empty(n_out)
        o = out
        for j in range(n_out):
            o[j] = b[j]
        for i in range(n_in):
            xi = a[i]
            if xi != 0.0:  # ReLU leaves many zeros; skip dead rows
                for j in range(n_out):
                    o[j] += xi * w[i, j]
        if li != n_layers - 1:
            for j in range(n_out):
                if o[j] < 0.0:
                    o[j] = 0.0
        a = o
    return out
