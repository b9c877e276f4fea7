"""Photon-catalysed two-mode squeezed coherent states.

Mode ``A2`` of a two-mode squeezed coherent state is mixed with a Fock state
``|m>`` on a beam splitter of transmissivity ``T_C``; the ancilla output is
post-selected on ``m`` photons. The unnormalised characteristic function of
the heralded state is a Gaussian integral over the ancilla phase-space
variable once both Fock-state Laguerre polynomials are replaced by their
generating functions in ``(u1, v1)`` and ``(u2, v2)``. That integral is done
here in matrix form, which leaves an exact quadratic exponent in the eight
variables ``(u1, v1, u2, v2, tau1, sigma1, tau2, sigma2)``. Laguerre
derivatives and Weyl-ordered moments are then Taylor coefficients of its
exponential.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError, IntegrityError
from .gaussian import GaussianState, Z2, symplectic_eigenvalues, symplectic_form
from .series import exp_quadratic

__all__ = [
    "M_MAX",
    "CatalysisParams",
    "CatalyzedState",
    "GeneratingExponent",
    "lambda_from_variance",
    "variance_from_lambda",
    "tmsc_state",
    "zero_pc_state",
    "generating_exponent",
    "m_pc_unnormalized_char",
    "success_probability",
    "moments",
]

M_MAX = 3

# index layout of the eight generating variables
U1, V1, U2, V2, T1, S1, T2, S2 = range(8)
_UV = slice(0, 4)
_LAM = slice(4, 8)

_PATTERN_TOL = 1e-8
_PROB_TOL = 1e-9


def lambda_from_variance(V):
    if V < 1.0:
        raise DomainError(f"variance must be >= 1, got {V}")
    return math.sqrt((V - 1.0) / (V + 1.0))


def variance_from_lambda(lam):
    return (1.0 + lam**2) / (1.0 - lam**2)


@dataclass(frozen=True)
class CatalysisParams:
    """Squeezing ``lam = tanh r``, displacement ``d``, splitter ``T_C`` and order ``m``."""

    lam: float
    d: float = 0.0
    T_C: float = 1.0
    m: int = 0

    def __post_init__(self):
        if not 0.0 <= self.lam < 1.0:
            raise DomainError(f"lambda must lie in [0, 1), got {self.lam}")
        if not self.d >= 0.0:
            raise DomainError(f"displacement must be >= 0, got {self.d}")
        if not 0.0 < self.T_C <= 1.0:
            raise DomainError(f"T_C must lie in (0, 1], got {self.T_C}")
        if int(self.m) != self.m or not 0 <= self.m <= M_MAX:
            raise DomainError(f"m must be an integer in [0, {M_MAX}], got {self.m}")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "d", float(self.d))
        object.__setattr__(self, "T_C", float(self.T_C))
        object.__setattr__(self, "m", int(self.m))

    @classmethod
    def from_variance(cls, V, d=0.0, T_C=1.0, m=0):
        return cls(lambda_from_variance(V), d, T_C, m)

    @property
    def V(self):
        return variance_from_lambda(self.lam)


@dataclass(frozen=True)
class CatalyzedState:
    """Mean, covariance and heralding probability of an m-PC state."""

    mean: np.ndarray
    cov: np.ndarray
    success_prob: float
    params: CatalysisParams = field(compare=False)

    @property
    def gaussian(self):
        return GaussianState(self.mean, self.cov)

    def entries(self):
        c = self.cov
        return {
            "V_A_q": c[0, 0],
            "V_A_p": c[1, 1],
            "V_B_q": c[2, 2],
            "V_B_p": c[3, 3],
            "V_C_q": c[0, 2],
            "V_C_p": c[1, 3],
        }


def tmsc_state(p):
    lam, d = p.lam, p.d
    mu = d * (1.0 + lam) / math.sqrt(1.0 - lam**2)
    a = (1.0 + lam**2) / (1.0 - lam**2)
    c = 2.0 * lam / (1.0 - lam**2)
    cov = np.block([[a * np.eye(2), c * Z2], [c * Z2, a * np.eye(2)]])
    return GaussianState(np.array([mu, 0.0, mu, 0.0]), cov)


def zero_pc_state(p):
    """Closed-form 0-photon catalysis: still Gaussian, squeezing ``lam * sqrt(T_C)``."""
    if p.m != 0:
        raise DomainError("zero_pc_state requires m = 0")
    lam, d, T = p.lam, p.d, p.T_C
    den = 1.0 - lam**2 * T
    mean = (d * math.sqrt(1.0 - lam**2) / den) * np.array(
        [1.0 + lam * T, 0.0, (1.0 + lam) * math.sqrt(T), 0.0]
    )
    lb = lam * math.sqrt(T)
    a = (1.0 + lb**2) / (1.0 - lb**2)
    c = 2.0 * lb / (1.0 - lb**2)
    cov = np.block([[a * np.eye(2), c * Z2], [c * Z2, a * np.eye(2)]])
    prob = (1.0 - lam**2) / den * math.exp(-(d**2) * (lam + 1.0) ** 2 * (1.0 - T) / (4.0 * den))
    return CatalyzedState(mean, cov, prob, p)


@dataclass(frozen=True)
class GeneratingExponent:
    """Exponent ``-x.P.x/2 + q.x + c0`` of the heralded characteristic function.

    ``x`` runs over ``(u1, v1, u2, v2, tau1, sigma1, tau2, sigma2)``; the
    overall factor in front of the exponential is ``prefactor``, so that at
    ``u = v = 0`` the expression reduces to the unnormalised 0-PC function.
    """

    P: np.ndarray
    q: np.ndarray
    c0: complex
    prefactor: float
    params: CatalysisParams = field(compare=False)

    def coefficient(self, i, j=None):
        """Coefficient of ``x_i`` (or of the monomial ``x_i x_j``) in the exponent."""
        if j is None:
            return self.q[i]
        if i == j:
            return -0.5 * self.P[i, i]
        return -self.P[i, j]

    def series_terms(self):
        """Linear and upper-triangular quadratic coefficients for the series kernel."""
        quad = -np.triu(self.P, 1) - 0.5 * np.diag(np.diag(self.P))
        return self.q.copy(), quad

    def linear_form(self, i):
        """``(constant, coefficients on tau1, sigma1, tau2, sigma2)`` multiplying ``x_i``."""
        return self.q[i], -self.P[i, _LAM]

    # named coefficients, same roles as in the generating-function literature
    @property
    def x0(self):
        return 1.0 / (self.params.T_C * self.params.lam**2 - 1.0)

    @property
    def x1(self):
        return -self.coefficient(U1, V1)

    @property
    def x4(self):
        return -self.coefficient(U2, V2)

    @property
    def x7(self):
        return self.coefficient(U1, V2)

    @property
    def x2(self):
        return self.linear_form(U1)

    @property
    def x3(self):
        return self.linear_form(V1)

    @property
    def x5(self):
        return self.linear_form(U2)

    @property
    def x6(self):
        return self.linear_form(V2)

    @property
    def y0(self):
        return self.q[U1]

    @property
    def y1(self):
        return self.q[U2]

    def value(self, x):
        """Full expression ``prefactor * exp(exponent)`` at a numeric point ``x``."""
        x = np.asarray(x, dtype=complex)
        return self.prefactor * np.exp(-0.5 * x @ self.P @ x + self.q @ x + self.c0)


def _laguerre_linear(iu, iv):
    # rows: coefficients of (u - v) and i (u + v) on the 10-vector
    L = np.zeros((2, 10), dtype=complex)
    L[0, iu], L[0, iv] = 1.0, -1.0
    L[1, iu], L[1, iv] = 1j, 1j
    return L


def generating_exponent(p):
    """Do the ancilla phase-space integral in closed form.

    The integrand's exponent is a quadratic form in
    ``z = (u1, v1, u2, v2, tau1, sigma1, tau2, sigma2, tau3, sigma3)``;
    ``(u1, v1)`` generate the Laguerre polynomial of the Fock state after the
    beam splitter and ``(u2, v2)`` the one of the projector.
    """
    T = p.T_C
    st = tmsc_state(p)
    om = symplectic_form(2)
    K = om @ st.cov @ om.T
    k = om @ st.mean
    t, r = math.sqrt(T), math.sqrt(1.0 - T)

    # (Lambda1, Lambda2') with Lambda2' = t Lambda2 - r Lambda3
    R = np.zeros((4, 10))
    R[0, 4] = R[1, 5] = 1.0
    R[2, 6] = R[3, 7] = t
    R[2, 8] = R[3, 9] = -r
    # Lambda3' = r Lambda2 + t Lambda3
    R3 = np.zeros((2, 10))
    R3[0, 6] = R3[1, 7] = r
    R3[0, 8] = R3[1, 9] = t
    P3 = np.zeros((2, 10))
    P3[0, 8] = P3[1, 9] = 1.0
    L1 = _laguerre_linear(U1, V1)
    L2 = _laguerre_linear(U2, V2)

    M = (R.T @ K @ R).astype(complex)
    h = -1j * (R.T @ k)
    M += R3.T @ R3 + P3.T @ P3
    M -= L1.T @ R3 + R3.T @ L1
    M += L2.T @ P3 + P3.T @ L2
    M[U1, V1] -= 1.0
    M[V1, U1] -= 1.0
    M[U2, V2] -= 1.0
    M[V2, U2] -= 1.0

    x, y = slice(0, 8), slice(8, 10)
    A = M[y, y].real
    Ainv = np.linalg.inv(A)
    Pm = M[x, x] - M[x, y] @ Ainv @ M[y, x]
    q = h[x] - M[x, y] @ Ainv @ h[y]
    c0 = 0.5 * h[y] @ Ainv @ h[y]
    pref = 2.0 / math.sqrt(np.linalg.det(A))
    return GeneratingExponent(0.5 * (Pm + Pm.T), q, complex(c0), pref, p)


def m_pc_unnormalized_char(p, L):
    """Unnormalised characteristic function of the m-PC state at ``L = (tau1, sigma1, tau2, sigma2)``."""
    ge = generating_exponent(p)
    L = np.asarray(L, dtype=float)
    m = p.m
    P = ge.P
    lin = ge.q[_UV] - P[_UV, _LAM] @ L
    quad = -np.triu(P[_UV, _UV], 1) - 0.5 * np.diag(np.diag(P[_UV, _UV]))
    const = -0.5 * L @ P[_LAM, _LAM] @ L + ge.q[_LAM] @ L + ge.c0
    coeffs = exp_quadratic(lin, quad, [m] * 4, 4 * m)
    return math.factorial(m) ** 2 * ge.prefactor * np.exp(const) * coeffs[m, m, m, m]


def success_probability(p):
    prob = m_pc_unnormalized_char(p, np.zeros(4))
    return _checked_probability(prob, p)


def _checked_probability(prob, p):
    if abs(prob.imag) > 1e-10 * max(1.0, abs(prob.real)):
        raise IntegrityError(f"success probability has imaginary part {prob.imag}")
    prob = float(prob.real)
    if not 0.0 < prob <= 1.0 + _PROB_TOL:
        raise IntegrityError(f"success probability {prob} outside (0, 1] for {p}")
    return min(prob, 1.0)


# quadrature q_k <-> sigma_k with factor -i, p_k <-> tau_k with factor +i
_QUAD_VAR = (1, 0, 3, 2)
_QUAD_FACTOR = (-1j, 1j, -1j, 1j)
_OFF_PATTERN = ((0, 1), (0, 3), (1, 2), (2, 3))


def moments(p):
    """Mean, covariance and success probability of the m-PC state.

    Weyl-ordered moments up to second order are read off the Taylor
    coefficients of the normalised characteristic function.
    """
    return _moments_cached(p.lam, p.d, p.T_C, p.m)


@lru_cache(maxsize=1 << 16)
def _moments_cached(lam, d, T_C, m):
    p = CatalysisParams(lam, d, T_C, m)
    ge = generating_exponent(p)
    lin, quad = ge.series_terms()
    caps = [m] * 4 + [2] * 4
    coeffs = exp_quadratic(lin, quad, caps, 4 * m + 4)
    chi = math.factorial(m) ** 2 * ge.prefactor * np.exp(ge.c0) * coeffs[m, m, m, m]
    prob = _checked_probability(chi[0, 0, 0, 0], p)
    chi = chi / chi[0, 0, 0, 0]

    mean = np.empty(4, dtype=complex)
    second = np.empty((4, 4), dtype=complex)
    for a in range(4):
        e = [0] * 4
        e[_QUAD_VAR[a]] += 1
        mean[a] = _QUAD_FACTOR[a] * chi[tuple(e)]
        for b in range(a, 4):
            e2 = list(e)
            e2[_QUAD_VAR[b]] += 1
            mult = 2.0 if a == b else 1.0
            second[a, b] = second[b, a] = _QUAD_FACTOR[a] * _QUAD_FACTOR[b] * mult * chi[tuple(e2)]

    scale = max(1.0, float(np.max(np.abs(second))))
    if np.max(np.abs(mean.imag)) > _PATTERN_TOL * scale or np.max(np.abs(second.imag)) > _PATTERN_TOL * scale:
        raise IntegrityError("Weyl-ordered moments are not real")
    mean = mean.real
    cov = second.real - np.outer(mean, mean)

    bad = max(abs(cov[i, j]) for i, j in _OFF_PATTERN)
    bad = max(bad, abs(mean[1]), abs(mean[3]))
    if bad > _PATTERN_TOL * scale:
        raise IntegrityError(f"covariance breaks the q/p block pattern by {bad:.3g}")
    for i, j in _OFF_PATTERN:
        cov[i, j] = cov[j, i] = 0.0
    mean[1] = mean[3] = 0.0
    cov = 0.5 * (cov + cov.T)
    symplectic_eigenvalues(cov)
    mean.setflags(write=False)
    cov.setflags(write=False)
    return CatalyzedState(mean, cov, prob, p)
