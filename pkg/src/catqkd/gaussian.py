"""Phase-space linear algebra in shot-noise units.

Quadratures are ordered ``(q1, p1, q2, p2)`` with ``q = a + a^dagger`` and
``p = -i (a - a^dagger)``, so the vacuum covariance matrix is the identity and
a coherent amplitude ``alpha`` has mean ``q = 2 Re(alpha)``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, IntegrityError

__all__ = [
    "GaussianState",
    "symplectic_form",
    "two_mode_squeezer",
    "beam_splitter",
    "apply_symplectic",
    "char_fn",
    "symplectic_eigenvalues",
    "gaussian_entropy",
    "vacuum",
]

OMEGA1 = np.array([[0.0, 1.0], [-1.0, 0.0]])
Z2 = np.diag([1.0, -1.0])
I2 = np.eye(2)

# clamp window for floating-point noise near purity
_CLAMP_TOL = 1e-9
_PHYS_TOL = 1e-6


def symplectic_form(n_modes):
    """Block-diagonal symplectic form for ``n_modes`` modes."""
    return np.kron(np.eye(n_modes), OMEGA1)


@dataclass(frozen=True)
class GaussianState:
    """First and second moments of a Gaussian state."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (mean.size, mean.size) or mean.size % 2:
            raise DomainError(f"shape mismatch: mean {mean.shape}, cov {cov.shape}")
        if not np.all(np.isfinite(mean)) or not np.all(np.isfinite(cov)):
            raise DomainError("non-finite moments")
        if np.max(np.abs(cov - cov.T)) > 1e-12 * max(1.0, np.max(np.abs(cov))):
            raise DomainError("covariance matrix is not symmetric")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self):
        return self.mean.size // 2


def vacuum(n_modes=2):
    return GaussianState(np.zeros(2 * n_modes), np.eye(2 * n_modes))


def two_mode_squeezer(lam):
    """Symplectic matrix of the two-mode squeezer with ``lam = tanh(r)``."""
    if not 0.0 <= lam < 1.0:
        raise DomainError(f"lambda must lie in [0, 1), got {lam}")
    pref = 1.0 / np.sqrt(1.0 - lam**2)
    return pref * np.block([[I2, lam * Z2], [lam * Z2, I2]])


def beam_splitter(T_C):
    """Symplectic beam-splitter matrix acting on two modes.

    The transmitted mode picks up ``+sqrt(1 - T_C)`` of the second input and
    the reflected mode ``-sqrt(1 - T_C)`` of the first.
    """
    if not 0.0 <= T_C <= 1.0:
        raise DomainError(f"transmissivity must lie in [0, 1], got {T_C}")
    t = np.sqrt(T_C)
    r = np.sqrt(1.0 - T_C)
    return np.block([[t * I2, r * I2], [-r * I2, t * I2]])


def apply_symplectic(S, st):
    S = np.asarray(S, dtype=float)
    if S.shape != st.cov.shape:
        raise DomainError(f"symplectic matrix {S.shape} does not match state {st.cov.shape}")
    cov = S @ st.cov @ S.T
    return GaussianState(S @ st.mean, 0.5 * (cov + cov.T))


def char_fn(st, L):
    """Wigner characteristic function of a Gaussian state at ``L``."""
    L = np.asarray(L, dtype=float)
    om = symplectic_form(st.n_modes)
    quad = L @ (om @ st.cov @ om.T) @ L
    lin = (om @ st.mean) @ L
    return np.exp(-0.5 * quad - 1j * lin)


def symplectic_eigenvalues(cov):
    """Symplectic spectrum of one covariance matrix or a stack of them.

    Returns the moduli of the eigenvalues of ``i Omega cov``, one per mode and
    sorted ascending. For a single-mode block this is ``sqrt(det(cov))``.

    Raises:
        IntegrityError: if any eigenvalue falls below ``1 - 1e-6``.
    """
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[-1] // 2
    om = symplectic_form(n)
    ev = np.abs(np.linalg.eigvals(1j * om @ cov))
    ev = np.sort(ev, axis=-1)[..., ::2]
    if np.any(ev < 1.0 - _PHYS_TOL):
        raise IntegrityError(
            f"covariance violates the uncertainty relation (min nu = {np.min(ev):.12g})"
        )
    return np.where((ev < 1.0) & (ev >= 1.0 - _CLAMP_TOL), 1.0, ev)


def gaussian_entropy(nu):
    """Von Neumann entropy in bits of a thermal mode with symplectic eigenvalue ``nu``."""
    nu = np.asarray(nu, dtype=float)
    if np.any(nu < 1.0 - _PHYS_TOL):
        raise DomainError(f"symplectic eigenvalue below 1: {np.min(nu)}")
    nu = np.maximum(nu, 1.0)
    hp = (nu + 1.0) / 2.0
    hm = (nu - 1.0) / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        minus = np.where(hm > 0.0, hm * np.log2(np.where(hm > 0.0, hm, 1.0)), 0.0)
    out = hp * np.log2(hp) - minus
    return float(out) if out.ndim == 0 else out
