"""Photon-catalysed two-mode squeezed states and CV-MDI-QKD key rates."""

from .catalysis import (
    M_MAX,
    CatalysisParams,
    CatalyzedState,
    generating_exponent,
    m_pc_unnormalized_char,
    moments,
    success_probability,
    tmsc_state,
    zero_pc_state,
)
from .channel import ProtocolParams, attenuation, equivalent_channel, key_rate
from .errors import CatQKDError, CutoffError, DomainError, IntegrityError, NoDistanceError
from .gaussian import GaussianState, gaussian_entropy, symplectic_eigenvalues
from .optimize import TMSV, OptDomain, max_distance, optimize_all, optimize_fixed_variance
from .series import BACKEND, TruncatedSeries

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "M_MAX",
    "CatalysisParams",
    "CatalyzedState",
    "CatQKDError",
    "CutoffError",
    "DomainError",
    "GaussianState",
    "IntegrityError",
    "NoDistanceError",
    "OptDomain",
    "ProtocolParams",
    "TMSV",
    "TruncatedSeries",
    "attenuation",
    "equivalent_channel",
    "gaussian_entropy",
    "generating_exponent",
    "key_rate",
    "m_pc_unnormalized_char",
    "max_distance",
    "moments",
    "optimize_all",
    "optimize_fixed_variance",
    "success_probability",
    "symplectic_eigenvalues",
    "tmsc_state",
    "zero_pc_state",
]
