"""Pure-numpy fallback for the series-exponential kernel.

Same contract as the compiled ``_series_core.exp_quadratic``.
"""

import numpy as np


def _shift(arr, axis):
    # out[..., k, ...] = arr[..., k-1, ...], zero at k = 0
    out = np.zeros_like(arr)
    dst = [slice(None)] * arr.ndim
    src = [slice(None)] * arr.ndim
    dst[axis] = slice(1, None)
    src[axis] = slice(None, -1)
    out[tuple(dst)] = arr[tuple(src)]
    return out


def exp_quadratic(lin, quad, caps, max_degree=-1):
    """Taylor coefficients of ``exp(sum_i lin[i] x_i + sum_{i<=j} quad[i,j] x_i x_j)``.

    Coefficients are returned on the box ``0 <= alpha_i <= caps[i]`` with the
    constant term equal to one; entries of total degree above ``max_degree``
    (when non-negative) are zero. Uses the Euler-operator recurrence
    ``|alpha| F_alpha = sum_i lin_i F_{alpha-e_i} + 2 sum_{i<=j} quad_ij F_{alpha-e_i-e_j}``.
    """
    lin = np.asarray(lin, dtype=complex)
    quad = np.triu(np.asarray(quad, dtype=complex))
    caps = [int(c) for c in caps]
    shape = tuple(c + 1 for c in caps)
    n = len(caps)
    total = sum(caps)
    if max_degree < 0 or max_degree > total:
        max_degree = total

    deg = np.zeros(shape, dtype=int)
    for ax, c in enumerate(caps):
        idx = [1] * n
        idx[ax] = c + 1
        deg = deg + np.arange(c + 1).reshape(idx)

    lin_terms = [(i, lin[i]) for i in range(n) if lin[i] != 0 and caps[i] > 0]
    quad_terms = [
        (i, j, quad[i, j])
        for i in range(n)
        for j in range(i, n)
        if quad[i, j] != 0 and caps[i] > 0 and caps[j] > 0 and (i != j or caps[i] > 1)
    ]

    F = np.zeros(shape, dtype=complex)
    F[(0,) * n] = 1.0
    for d in range(1, max_degree + 1):
        acc = np.zeros(shape, dtype=complex)
        for i, c in lin_terms:
            acc += c * _shift(F, i)
        for i, j, c in quad_terms:
            acc += (2.0 * c) * _shift(_shift(F, i), j)
        layer = deg == d
        F[layer] = acc[layer] / d
    return F
