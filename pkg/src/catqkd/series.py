"""Multivariate truncated Taylor series.

Coefficients live in a dense complex array indexed by exponent tuples, cut
off per variable (``caps``) and in total degree (``degree``). The exponential
of a quadratic polynomial is the hot path of the catalysis module and is
delegated to a compiled kernel when one was built.
"""

import math
import os

import numpy as np

from . import _series_py
from .errors import DomainError, IntegrityError

try:
    if os.environ.get("CATQKD_PURE_PYTHON"):
        raise ImportError("compiled kernel disabled by CATQKD_PURE_PYTHON")
    from ._series_core import exp_quadratic as _exp_quadratic_compiled
except ImportError:
    _exp_quadratic_compiled = None

BACKEND = "compiled" if _exp_quadratic_compiled is not None else "python"
exp_quadratic = _exp_quadratic_compiled or _series_py.exp_quadratic

# variable order used by the catalysis module
VARIABLES = ("u1", "v1", "u2", "v2", "t1", "s1", "t2", "s2")


class TruncatedSeries:
    """Polynomial in ``n`` variables truncated to a box and a total degree.

    Args:
        coeffs: dense coefficient array, one axis per variable.
        degree: total-degree bound; defaults to the sum of the box sides.
    """

    def __init__(self, coeffs, degree=None):
        coeffs = np.asarray(coeffs, dtype=complex)
        self.caps = tuple(s - 1 for s in coeffs.shape)
        self.degree = sum(self.caps) if degree is None else int(degree)
        self.coeffs = np.where(self._degree_grid() <= self.degree, coeffs, 0.0)

    @classmethod
    def zeros(cls, caps, degree=None):
        return cls(np.zeros(tuple(c + 1 for c in caps), dtype=complex), degree)

    @classmethod
    def constant(cls, value, caps, degree=None):
        s = cls.zeros(caps, degree)
        s.coeffs[(0,) * len(caps)] = value
        return s

    @classmethod
    def variable(cls, index, caps, degree=None, coeff=1.0):
        s = cls.zeros(caps, degree)
        if caps[index] > 0:
            idx = [0] * len(caps)
            idx[index] = 1
            s.coeffs[tuple(idx)] = coeff
        return s

    @classmethod
    def from_quadratic(cls, const, lin, quad, caps, degree=None):
        """Series of ``const + lin . x + sum_{i<=j} quad[i,j] x_i x_j``."""
        s = cls.constant(const, caps, degree)
        n = len(caps)
        for i in range(n):
            if caps[i] > 0:
                idx = [0] * n
                idx[i] = 1
                s.coeffs[tuple(idx)] += lin[i]
            for j in range(i, n):
                idx = [0] * n
                idx[i] += 1
                idx[j] += 1
                if all(a <= c for a, c in zip(idx, caps)):
                    s.coeffs[tuple(idx)] += quad[i][j]
        s.coeffs = np.where(s._degree_grid() <= s.degree, s.coeffs, 0.0)
        return s

    @property
    def nvars(self):
        return len(self.caps)

    def _degree_grid(self):
        grids = np.indices(tuple(c + 1 for c in self.caps))
        return grids.sum(axis=0) if len(self.caps) else np.zeros(())

    def _check_compatible(self, other):
        if self.caps != other.caps:
            raise DomainError(f"series boxes differ: {self.caps} vs {other.caps}")

    def __getitem__(self, exponents):
        exponents = tuple(exponents)
        if any(e > c for e, c in zip(exponents, self.caps)) or sum(exponents) > self.degree:
            raise IntegrityError(f"exponent {exponents} exceeds truncation {self.caps}/{self.degree}")
        return self.coeffs[exponents]

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            return TruncatedSeries(self.coeffs + self._const_array(other), self.degree)
        self._check_compatible(other)
        return TruncatedSeries(self.coeffs + other.coeffs, min(self.degree, other.degree))

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(-self.coeffs, self.degree)

    def __sub__(self, other):
        return self + (-other)

    def _const_array(self, value):
        arr = np.zeros_like(self.coeffs)
        arr[(0,) * self.nvars] = value
        return arr

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return TruncatedSeries(self.coeffs * other, self.degree)
        self._check_compatible(other)
        out = np.zeros_like(self.coeffs)
        shape = self.coeffs.shape
        for idx in zip(*np.nonzero(self.coeffs)):
            c = self.coeffs[idx]
            dst = tuple(slice(i, None) for i in idx)
            src = tuple(slice(0, s - i) for i, s in zip(idx, shape))
            out[dst] += c * other.coeffs[src]
        return TruncatedSeries(out, min(self.degree, other.degree))

    __rmul__ = __mul__

    def is_quadratic(self):
        return bool(np.all(self.coeffs[self._degree_grid() > 2] == 0))

    def exp(self):
        """Truncated exponential.

        Quadratic arguments go through the recurrence kernel; anything else
        falls back to the power sum ``sum_k Q^k / k!``.
        """
        n = self.nvars
        c0 = self.coeffs[(0,) * n]
        if self.is_quadratic():
            lin = np.zeros(n, dtype=complex)
            quad = np.zeros((n, n), dtype=complex)
            for i in range(n):
                idx = [0] * n
                idx[i] = 1
                if self.caps[i] >= 1:
                    lin[i] = self.coeffs[tuple(idx)]
                for j in range(i, n):
                    idx = [0] * n
                    idx[i] += 1
                    idx[j] += 1
                    if all(a <= c for a, c in zip(idx, self.caps)):
                        quad[i, j] = self.coeffs[tuple(idx)]
            coeffs = exp_quadratic(lin, quad, list(self.caps), self.degree)
            return TruncatedSeries(np.exp(c0) * coeffs, self.degree)
        return self.exp_power_sum()

    def exp_power_sum(self):
        """Reference exponential via the truncated power sum."""
        n = self.nvars
        c0 = self.coeffs[(0,) * n]
        q = self - c0
        term = TruncatedSeries.constant(1.0, self.caps, self.degree)
        total = term
        for k in range(1, self.degree + 1):
            term = term * q * (1.0 / k)
            total = total + term
        return total * np.exp(c0)


def taylor_to_derivative(coeff, exponents):
    """Mixed partial derivative at the origin from its Taylor coefficient."""
    return coeff * math.prod(math.factorial(e) for e in exponents)
