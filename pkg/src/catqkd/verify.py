"""Cross-checks of the characteristic-function path against independent oracles."""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import eval_laguerre

from .catalysis import (
    CatalysisParams,
    generating_exponent,
    m_pc_unnormalized_char,
    moments,
    tmsc_state,
    zero_pc_state,
)
from .fock import N_CUT, oracle
from .gaussian import char_fn

__all__ = [
    "DEFAULT_GRID",
    "Check",
    "VerifyReport",
    "ancilla_integral",
    "generating_integral",
    "run_verification",
]

DEFAULT_GRID = {
    "m": (0, 1, 2),
    "lam": (0.3, 0.6),
    "d": (0.0, 1.0, 3.0),
    "T_C": (0.7, 0.9),
}

# trapezoid nodes over the ancilla plane; the integrand is a Gaussian of
# width <= 1 so the rule converges exponentially
_HALF_WIDTH = 12.0
_NODES = 481


def _plane():
    x = np.linspace(-_HALF_WIDTH, _HALF_WIDTH, _NODES)
    w = np.full(_NODES, x[1] - x[0])
    w[0] = w[-1] = 0.5 * w[0]
    t3, s3 = np.meshgrid(x, x, indexing="ij")
    return t3, s3, np.outer(w, w)


def _transformed(p, L, t3, s3):
    t, r = math.sqrt(p.T_C), math.sqrt(1.0 - p.T_C)
    t2p = t * L[2] - r * t3
    s2p = t * L[3] - r * s3
    t3p = r * L[2] + t * t3
    s3p = r * L[3] + t * s3
    return t2p, s2p, t3p, s3p


def _tmsc_char_on_plane(p, L, t2p, s2p):
    st = tmsc_state(p)
    om = np.kron(np.eye(2), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    K = om @ st.cov @ om.T
    k = om @ st.mean
    lam = np.stack([np.full_like(t2p, L[0]), np.full_like(t2p, L[1]), t2p, s2p])
    quad = np.einsum("i...,ij,j...->...", lam, K, lam)
    lin = np.einsum("i,i...->...", k, lam)
    return np.exp(-0.5 * quad - 1j * lin)


def ancilla_integral(p, L):
    """Unnormalised m-PC characteristic function by direct quadrature.

    Integrates the product of the beam-split TMSC/Fock characteristic function
    and the Fock projector's, with Laguerre polynomials evaluated as such.
    """
    L = np.asarray(L, dtype=float)
    t3, s3, w = _plane()
    t2p, s2p, t3p, s3p = _transformed(p, L, t3, s3)
    chi_ab = _tmsc_char_on_plane(p, L, t2p, s2p)
    rp = t3p**2 + s3p**2
    r0 = t3**2 + s3**2
    fock_in = np.exp(-0.5 * rp) * eval_laguerre(p.m, rp)
    fock_proj = np.exp(-0.5 * r0) * eval_laguerre(p.m, r0)
    return np.sum(w * chi_ab * fock_in * fock_proj) / math.pi


def generating_integral(p, L, uv):
    """Quadrature of the generating-function integrand at numeric ``(u1, v1, u2, v2)``."""
    L = np.asarray(L, dtype=float)
    u1, v1, u2, v2 = uv
    t3, s3, w = _plane()
    t2p, s2p, t3p, s3p = _transformed(p, L, t3, s3)
    chi_ab = _tmsc_char_on_plane(p, L, t2p, s2p)
    z_in = t3p + 1j * s3p
    z_pr = -(t3 + 1j * s3)
    gen_in = np.exp(-0.5 * abs(z_in) ** 2 + u1 * v1 + u1 * z_in - v1 * np.conj(z_in))
    gen_pr = np.exp(-0.5 * abs(z_pr) ** 2 + u2 * v2 + u2 * z_pr - v2 * np.conj(z_pr))
    return np.sum(w * chi_ab * gen_in * gen_pr) / math.pi


@dataclass
class Check:
    name: str
    delta: float
    tol: float

    @property
    def ok(self):
        return self.delta <= self.tol


@dataclass
class VerifyReport:
    checks: list = field(default_factory=list)

    @property
    def ok(self):
        return all(c.ok for c in self.checks)

    def worst(self):
        return max(self.checks, key=lambda c: c.delta / c.tol)

    def lines(self):
        for c in self.checks:
            yield f"{'PASS' if c.ok else 'FAIL'}  {c.name:<48s} delta={c.delta:.3e}  tol={c.tol:.0e}"


def _state_delta(a, b):
    return max(
        float(np.max(np.abs(a.mean - b.mean))),
        float(np.max(np.abs(a.cov - b.cov))),
        abs(a.success_prob - b.success_prob),
    )


def run_verification(grid=None, n_cut=N_CUT, tol=1e-7, quad_points=20, seed=0):
    """Run every oracle comparison and collect worst-case deltas."""
    grid = grid or DEFAULT_GRID
    report = VerifyReport()

    worst = 0.0
    for m, lam, d, T in itertools.product(grid["m"], grid["lam"], grid["d"], grid["T_C"]):
        worst = max(worst, _state_delta(moments(CatalysisParams(lam, d, T, m)), oracle(lam, d, T, m, n_cut)))
    report.checks.append(Check(f"fock oracle vs series (N_cut={n_cut})", worst, tol))

    worst = 0.0
    for m, lam, d in itertools.product(grid["m"], grid["lam"], grid["d"]):
        st = moments(CatalysisParams(lam, d, 1.0, m))
        ref = tmsc_state(CatalysisParams(lam, d))
        worst = max(worst, float(np.max(np.abs(st.mean - ref.mean))),
                    float(np.max(np.abs(st.cov - ref.cov))), abs(st.success_prob - 1.0))
    report.checks.append(Check("T_C = 1 recovers TMSC", worst, 1e-10))

    worst = 0.0
    for lam, d, T in itertools.product(grid["lam"], grid["d"], grid["T_C"]):
        p = CatalysisParams(lam, d, T, 0)
        worst = max(worst, _state_delta(moments(p), zero_pc_state(p)))
    report.checks.append(Check("m = 0 series vs closed form", worst, 1e-10))

    rng = np.random.default_rng(seed)
    p = CatalysisParams(0.5, 1.0, 0.8, 1)
    ge = generating_exponent(p)
    worst_gen = worst_lag = 0.0
    for _ in range(quad_points):
        L = rng.uniform(-1.0, 1.0, 4)
        uv = rng.uniform(-0.5, 0.5, 4)
        ref = generating_integral(p, L, uv)
        worst_gen = max(worst_gen, abs(ge.value(np.concatenate([uv, L])) - ref))
        worst_lag = max(worst_lag, abs(m_pc_unnormalized_char(p, L) - ancilla_integral(p, L)))
    report.checks.append(Check("generating exponent vs quadrature", worst_gen, tol))
    report.checks.append(Check("m-PC characteristic function vs quadrature", worst_lag, tol))

    worst = 0.0
    for _ in range(quad_points):
        L = rng.uniform(-1.0, 1.0, 4)
        q = CatalysisParams(0.5, 1.0, 1.0, 1)
        worst = max(worst, abs(m_pc_unnormalized_char(q, L) - char_fn(tmsc_state(q), L)))
    report.checks.append(Check("T_C = 1 characteristic function is TMSC", worst, 1e-10))
    return report
