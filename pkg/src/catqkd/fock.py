"""Brute-force photon catalysis in a truncated Fock space.

Independent of the characteristic-function machinery: the two-mode state is
a complex amplitude matrix ``psi[n1, n2]``, operators are exponentiated
numerically, and moments come from explicit ladder-operator algebra.

The beam splitter conserves the photon number of ``A2`` plus ancilla, so
heralding ``m`` photons with ``m`` photons in acts diagonally on ``A2``:
``|k> -> <k, m| U |k, m> |k>``. Each matrix element is taken from the
exponentiated generator on the ``k + m`` photon block, which is finite and
needs no truncation.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import CutoffError, DomainError, IntegrityError

__all__ = [
    "N_CUT",
    "LEAKAGE_TOL",
    "FockVector",
    "OracleResult",
    "coherent_amplitudes",
    "squeezer_unitary_blocks",
    "beam_splitter_block",
    "tmsc_fock",
    "suggest_cutoff",
    "heralding_amplitudes",
    "catalyze_fock",
    "fock_moments",
    "oracle",
]

N_CUT = 60
LEAKAGE_TOL = 1e-10
_PAD = 20


@dataclass
class FockVector:
    """Two-mode amplitudes ``amps[n1, n2]`` with per-mode cutoff ``amps.shape[0]``."""

    amps: np.ndarray
    leakage: float = 0.0

    @property
    def n_cut(self):
        return self.amps.shape[0]

    def norm2(self):
        return float(np.vdot(self.amps, self.amps).real)


@dataclass(frozen=True)
class OracleResult:
    mean: np.ndarray
    cov: np.ndarray
    success_prob: float
    leakage: float = 0.0


def coherent_amplitudes(alpha, n_cut):
    n = np.arange(n_cut)
    logf = np.array([math.lgamma(k + 1) for k in n])
    if alpha == 0:
        out = np.zeros(n_cut, dtype=complex)
        out[0] = 1.0
        return out
    mag = np.exp(-0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * logf)
    return mag * np.exp(1j * n * np.angle(alpha))


def squeezer_unitary_blocks(r, n_cut):
    """``exp[r (a^dag b^dag - a b)]`` restricted to fixed ``n1 - n2`` chains.

    Yields ``(diff, U)`` where ``U`` acts on the chain
    ``|diff + j, j>`` (``diff >= 0``) or ``|j, j - diff>`` (``diff < 0``).
    """
    for diff in range(-(n_cut - 1), n_cut):
        length = n_cut - abs(diff)
        lo = abs(diff)
        j = np.arange(length - 1)
        # <lo+j+1, j+1| a^dag b^dag |lo+j, j> = sqrt((lo+j+1)(j+1))
        off = np.sqrt((lo + j + 1.0) * (j + 1.0))
        G = np.zeros((length, length))
        G[j + 1, j] = r * off
        G[j, j + 1] = -r * off
        yield diff, expm(G)


def _chain_index(diff, length):
    j = np.arange(length)
    if diff >= 0:
        return diff + j, j
    return j, j - diff


def tmsc_fock(lam, d, n_cut=N_CUT, check=True):
    """Two-mode squeezer applied to ``|alpha> x |alpha>`` with ``alpha = d / 2``.

    The squeezer is exponentiated on a padded space of ``n_cut + _PAD``
    levels per mode and the result cut back to ``n_cut``; the norm lost in
    that last step is reported as ``leakage``.
    """
    if not 0.0 <= lam < 1.0:
        raise DomainError(f"lambda must lie in [0, 1), got {lam}")
    n_work = n_cut + _PAD
    c = coherent_amplitudes(d / 2.0, n_work)
    psi0 = np.outer(c, c)
    r = math.atanh(lam)
    psi = np.zeros_like(psi0)
    for diff, U in squeezer_unitary_blocks(r, n_work):
        i1, i2 = _chain_index(diff, U.shape[0])
        psi[i1, i2] = U @ psi0[i1, i2]
    amps = psi[:n_cut, :n_cut].copy()
    leak = max(0.0, 1.0 - float(np.vdot(amps, amps).real))
    if check and leak > LEAKAGE_TOL:
        raise CutoffError(
            f"truncation leakage {leak:.3g} exceeds {LEAKAGE_TOL:g} at N_cut={n_cut}",
            suggested_cutoff=suggest_cutoff(lam, d),
        )
    return FockVector(amps, leak)


def suggest_cutoff(lam, d, tol=LEAKAGE_TOL):
    """Smallest multiple of 10 whose leakage stays below ``tol``."""
    n = 20
    while n < 400:
        if tmsc_fock(lam, d, n, check=False).leakage < tol:
            return n
        n += 10
    return n


def beam_splitter_block(n_total, T_C):
    """``exp[theta (a^dag f - a f^dag)]`` on the block with ``n_total`` photons.

    Basis ``|j, n_total - j>`` for ``j = 0..n_total``, ``cos(theta) = sqrt(T_C)``.
    """
    theta = math.acos(math.sqrt(T_C))
    j = np.arange(n_total)
    # a^dag f |j, n-j> = sqrt((j+1)(n-j)) |j+1, n-j-1>
    off = np.sqrt((j + 1.0) * (n_total - j))
    G = np.zeros((n_total + 1, n_total + 1))
    G[j + 1, j] = theta * off
    G[j, j + 1] = -theta * off
    return expm(G)


def heralding_amplitudes(T_C, m, n_cut):
    """``<k, m| U_BS |k, m>`` for ``k = 0..n_cut-1``."""
    if not 0.0 <= T_C <= 1.0:
        raise DomainError(f"T_C must lie in [0, 1], got {T_C}")
    return np.array([beam_splitter_block(k + m, T_C)[k, k] for k in range(n_cut)])


def catalyze_fock(state, T_C, m):
    """Herald ``m`` photons after mixing mode 2 with ``|m>``; returns moments and probability."""
    amps = state.amps * heralding_amplitudes(T_C, m, state.n_cut)[None, :]
    prob = float(np.vdot(amps, amps).real)
    if not prob > 0.0:
        raise IntegrityError("heralding probability vanished")
    mean, cov = fock_moments(amps / math.sqrt(prob))
    return OracleResult(mean, cov, prob, state.leakage)


def fock_moments(amps):
    """Mean and symmetrised covariance of a normalised two-mode pure state."""
    n = amps.shape[0]
    psi = np.zeros((n + 1, n + 1), dtype=complex)
    psi[:n, :n] = amps
    sq = np.sqrt(np.arange(1, n + 1, dtype=float))

    def lower(x, axis):
        out = np.zeros_like(x)
        if axis == 0:
            out[:-1, :] = sq[:, None] * x[1:, :]
        else:
            out[:, :-1] = sq[None, :] * x[:, 1:]
        return out

    def raise_(x, axis):
        out = np.zeros_like(x)
        if axis == 0:
            out[1:, :] = sq[:, None] * x[:-1, :]
        else:
            out[:, 1:] = sq[None, :] * x[:, :-1]
        return out

    xi = []
    for axis in (0, 1):
        a, ad = lower(psi, axis), raise_(psi, axis)
        xi.append(a + ad)
        xi.append(-1j * (a - ad))
    mean = np.array([np.vdot(psi, v).real for v in xi])
    second = np.array([[np.vdot(u, v).real for v in xi] for u in xi])
    cov = second - np.outer(mean, mean)
    return mean, 0.5 * (cov + cov.T)


def oracle(lam, d, T_C, m, n_cut=N_CUT):
    """Catalysed TMSC moments and heralding probability, by brute force."""
    return catalyze_fock(tmsc_fock(lam, d, n_cut), T_C, m)
