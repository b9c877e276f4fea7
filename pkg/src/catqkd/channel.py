"""Equivalent one-way channel and secret key rate of the MDI protocol.

Alice keeps mode ``A1`` and sends the catalysed mode through the relay;
with Bob's operations other than detection treated as untrusted, the scheme
reduces to a one-way channel of transmissivity ``T`` and excess noise
``eps_th`` followed by heterodyne detection on both sides. Eve performs a
one-mode collective Gaussian attack; reverse reconciliation is assumed.
"""

from dataclasses import dataclass, field

import numpy as np

from .catalysis import CatalysisParams, moments
from .errors import DomainError, IntegrityError
from .gaussian import gaussian_entropy, symplectic_eigenvalues

__all__ = [
    "ProtocolParams",
    "EquivalentChannel",
    "KeyRateReport",
    "attenuation",
    "equivalent_channel",
    "propagate",
    "mutual_information",
    "holevo_bound",
    "key_rate",
    "key_rate_batch",
]


@dataclass(frozen=True)
class ProtocolParams:
    """Link geometry and post-processing settings.

    ``gain=None`` selects the asymptotic optimal gain ``g**2 = 2 / T_B``.
    """

    L_AC: float = 0.0
    L_BC: float = 0.0
    gamma: float = 0.2
    eps_A: float = 0.002
    eps_B: float = 0.002
    beta: float = 0.96
    gain: float | None = None

    def __post_init__(self):
        if self.L_AC < 0 or self.L_BC < 0:
            raise DomainError(f"link lengths must be >= 0, got L_AC={self.L_AC}, L_BC={self.L_BC}")
        if not 0.0 < self.beta <= 1.0:
            raise DomainError(f"beta must lie in (0, 1], got {self.beta}")
        if not self.gamma > 0.0:
            raise DomainError(f"gamma must be > 0, got {self.gamma}")
        if self.gain is not None and not self.gain > 0.0:
            raise DomainError(f"gain must be > 0, got {self.gain}")

    @property
    def L_AB(self):
        return self.L_AC + self.L_BC

    def at_distance(self, L_AC):
        return ProtocolParams(L_AC, self.L_BC, self.gamma, self.eps_A, self.eps_B, self.beta, self.gain)


@dataclass(frozen=True)
class EquivalentChannel:
    T_A: float
    T_B: float
    T: float
    eps_th: float
    chi_ch: float


@dataclass(frozen=True)
class KeyRateReport:
    I_AB: float
    chi_BE: float
    success_prob: float
    K: float
    params: CatalysisParams
    proto: ProtocolParams
    channel: EquivalentChannel = field(repr=False)


def attenuation(L, gamma=0.2):
    if L < 0:
        raise DomainError(f"length must be >= 0, got {L}")
    return 10.0 ** (-gamma * L / 10.0)


def equivalent_channel(proto):
    T_A = attenuation(proto.L_AC, proto.gamma)
    T_B = attenuation(proto.L_BC, proto.gamma)
    g2 = 2.0 / T_B if proto.gain is None else proto.gain**2
    T = 0.5 * g2 * T_A
    if not T > 0.0:
        raise DomainError(f"effective transmissivity must be > 0, got {T}")
    # (T_B/T_A)(eps_B - 2) + eps_A + 2/T_A, regrouped so the 2/T_A terms do not cancel
    eps_th = (T_B * proto.eps_B + 2.0 * (1.0 - T_B)) / T_A + proto.eps_A
    chi_ch = (1.0 - T) / T + eps_th
    return EquivalentChannel(T_A, T_B, T, eps_th, chi_ch)


def propagate(state, ch):
    """Joint Alice-Bob covariance after the second mode crosses the channel."""
    cov = np.asarray(getattr(state, "cov", state), dtype=float)
    out = _propagate(cov, ch)
    symplectic_eigenvalues(out)
    return out


def _propagate(cov, ch):
    out = np.array(cov, dtype=float, copy=True)
    out[..., :2, 2:] *= np.sqrt(ch.T)
    out[..., 2:, :2] *= np.sqrt(ch.T)
    out[..., 2:, 2:] = ch.T * (out[..., 2:, 2:] + ch.chi_ch * np.eye(2))
    return out


def _blocks(joint):
    a = joint[..., [0, 1], [0, 1]]
    b = joint[..., [2, 3], [2, 3]]
    c = joint[..., [0, 1], [2, 3]]
    return a, b, c


def mutual_information(joint):
    """Alice-Bob mutual information in bits for heterodyne detection on both sides."""
    joint = np.asarray(joint, dtype=float)
    a, b, c = _blocks(joint)
    b_cond = b - c**2 / (a + 1.0)
    num, den = b + 1.0, b_cond + 1.0
    if np.any(num <= 0.0) or np.any(den <= 0.0):
        raise IntegrityError("non-positive argument in mutual information")
    out = 0.5 * np.log2(num / den).sum(axis=-1)
    return float(out) if out.ndim == 0 else out


def holevo_bound(joint):
    """Holevo information between Bob's heterodyne outcomes and Eve, in bits.

    Eve holds the purification of the joint state, so her entropy equals the
    joint one, and after Bob's outcome it equals that of Alice's conditional
    state ``A - C (B + 1)^-1 C^T``.
    """
    joint = np.asarray(joint, dtype=float)
    nu = symplectic_eigenvalues(joint)
    A = joint[..., :2, :2]
    B = joint[..., 2:, 2:]
    C = joint[..., :2, 2:]
    cond = A - C @ np.linalg.inv(B + np.eye(2)) @ np.swapaxes(C, -1, -2)
    det = np.linalg.det(cond)
    if np.any(det < (1.0 - 1e-6) ** 2):
        raise IntegrityError("conditional covariance violates the uncertainty relation")
    nu3 = np.sqrt(np.maximum(det, 1.0))
    chi = gaussian_entropy(nu).sum(axis=-1) - gaussian_entropy(nu3)
    if np.any(chi < -1e-9):
        raise IntegrityError(f"negative Holevo information {np.min(chi)}")
    chi = np.maximum(chi, 0.0)
    return float(chi) if np.ndim(chi) == 0 else chi


def key_rate(p, proto):
    state = moments(p)
    ch = equivalent_channel(proto)
    joint = propagate(state, ch)
    I_AB = mutual_information(joint)
    chi_BE = holevo_bound(joint)
    K = state.success_prob * (proto.beta * I_AB - chi_BE)
    return KeyRateReport(I_AB, chi_BE, state.success_prob, K, p, proto, ch)


def key_rate_batch(covs, probs, proto):
    """Key rates for stacked covariances ``(n, 4, 4)`` and probabilities ``(n,)``."""
    ch = equivalent_channel(proto)
    joint = _propagate(np.asarray(covs, dtype=float), ch)
    I_AB = mutual_information(joint)
    chi_BE = holevo_bound(joint)
    return np.asarray(probs) * (proto.beta * I_AB - chi_BE)
