# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled series-exponential kernel.

Single pass over the coefficient box in C order: every predecessor
``alpha - e_i`` has a smaller flat index, so one sweep fills the box.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def exp_quadratic(lin, quad, caps, long max_degree=-1):
    """Taylor coefficients of ``exp(lin . x + sum_{i<=j} quad[i,j] x_i x_j)`` on a box."""
    cdef Py_ssize_t n = len(caps)
    cdef Py_ssize_t i, j, k, f, size, t, n_lin, n_quad
    cdef long deg, total = 0

    lin_a = np.asarray(lin, dtype=np.complex128)
    quad_a = np.triu(np.asarray(quad, dtype=np.complex128))
    caps_a = np.asarray(caps, dtype=np.int64)
    shape = tuple(int(c) + 1 for c in caps_a)
    for i in range(n):
        total += caps_a[i]
    if max_degree < 0 or max_degree > total:
        max_degree = total

    cdef long[::1] cap = caps_a.astype(np.int_)
    cdef Py_ssize_t[::1] stride = np.zeros(n, dtype=np.intp)
    size = 1
    for k in range(n - 1, -1, -1):
        stride[k] = size
        size *= cap[k] + 1

    li, lc, qi, qj, qc = [], [], [], [], []
    for i in range(n):
        if lin_a[i] != 0 and caps_a[i] > 0:
            li.append(i)
            lc.append(lin_a[i])
        for j in range(i, n):
            if quad_a[i, j] != 0 and caps_a[i] > 0 and caps_a[j] > 0 and (i != j or caps_a[i] > 1):
                qi.append(i)
                qj.append(j)
                qc.append(2.0 * quad_a[i, j])
    n_lin = len(li)
    n_quad = len(qi)
    cdef Py_ssize_t[::1] lin_idx = np.asarray(li, dtype=np.intp).reshape(-1)
    cdef double complex[::1] lin_c = np.asarray(lc, dtype=np.complex128).reshape(-1)
    cdef Py_ssize_t[::1] q_i = np.asarray(qi, dtype=np.intp).reshape(-1)
    cdef Py_ssize_t[::1] q_j = np.asarray(qj, dtype=np.intp).reshape(-1)
    cdef double complex[::1] q_c = np.asarray(qc, dtype=np.complex128).reshape(-1)

    out = np.zeros(size, dtype=np.complex128)
    cdef double complex[::1] F = out
    cdef long[::1] alpha = np.zeros(n, dtype=np.int_)
    cdef double complex acc

    F[0] = 1.0
    deg = 0
    for f in range(1, size):
        # odometer increment of the multi-index in C order
        k = n - 1
        while alpha[k] == cap[k]:
            deg -= alpha[k]
            alpha[k] = 0
            k -= 1
        alpha[k] += 1
        deg += 1
        if deg > max_degree:
            continue
        acc = 0.0
        for t in range(n_lin):
            i = lin_idx[t]
            if alpha[i] > 0:
                acc = acc + lin_c[t] * F[f - stride[i]]
        for t in range(n_quad):
            i = q_i[t]
            j = q_j[t]
            if i == j:
                if alpha[i] > 1:
                    acc = acc + q_c[t] * F[f - 2 * stride[i]]
            elif alpha[i] > 0 and alpha[j] > 0:
                acc = acc + q_c[t] * F[f - stride[i] - stride[j]]
        F[f] = acc / deg
    return out.reshape(shape)
