import itertools
import math

import numpy as np
import pytest

from catqkd.catalysis import CatalysisParams, moments, tmsc_state, zero_pc_state
from catqkd.errors import CutoffError, DomainError
from catqkd.fock import (
    FockVector,
    beam_splitter_block,
    catalyze_fock,
    fock_moments,
    heralding_amplitudes,
    oracle,
    squeezer_unitary_blocks,
    suggest_cutoff,
    tmsc_fock,
)


def test_vacuum_input():
    s = tmsc_fock(0.0, 0.0, 10)
    assert s.amps[0, 0] == pytest.approx(1.0) and np.sum(np.abs(s.amps) ** 2) == pytest.approx(1.0)


def test_tmsv_amplitudes_geometric():
    lam = 0.6
    s = tmsc_fock(lam, 0.0)
    n = np.arange(10)
    expected = math.sqrt(1 - lam**2) * lam**n
    assert np.allclose(np.abs(np.diag(s.amps)[:10]), expected, atol=1e-12)
    off = s.amps - np.diag(np.diag(s.amps))
    assert np.max(np.abs(off)) < 1e-14


@pytest.mark.parametrize("lam, d", [(0.6, 0.0), (0.5, 1.0), (0.3, 3.0)])
def test_tmsc_moments_match_gaussian(lam, d):
    mean, cov = fock_moments(tmsc_fock(lam, d).amps)
    ref = tmsc_state(CatalysisParams(lam, d))
    assert np.max(np.abs(mean - ref.mean)) < 1e-8 and np.max(np.abs(cov - ref.cov)) < 1e-8


def test_tmsc_moments_at_cutoff_40():
    mean, cov = fock_moments(tmsc_fock(0.5, 1.0, 40).amps)
    ref = tmsc_state(CatalysisParams(0.5, 1.0))
    assert np.max(np.abs(cov - ref.cov)) < 1e-8


def test_single_photon_convention():
    # |1, 0> -> sqrt(T)|1, 0> - sqrt(1-T)|0, 1> in the (signal, ancilla) basis
    T = 0.7
    U = beam_splitter_block(1, T)
    # basis |j, 1-j>: index 1 is the signal photon
    assert U[1, 1] == pytest.approx(math.sqrt(T))
    assert abs(U[0, 1]) == pytest.approx(math.sqrt(1 - T))


@pytest.mark.parametrize("n", [1, 3, 6])
def test_blocks_unitary(n):
    U = beam_splitter_block(n, 0.37)
    assert np.allclose(U @ U.T, np.eye(n + 1), atol=1e-12)
    for _, S in squeezer_unitary_blocks(0.4, 8):
        assert np.allclose(S @ S.T, np.eye(S.shape[0]), atol=1e-12)


def test_transparent_heralding_is_identity():
    assert np.allclose(heralding_amplitudes(1.0, 2, 10), 1.0)
    r = oracle(0.5, 1.0, 1.0, 0)
    assert r.success_prob == pytest.approx(1.0, abs=1e-10)


def test_zero_photon_example():
    r = oracle(0.6, 0.0, 0.64, 0)
    assert r.success_prob == pytest.approx(0.8316, abs=1e-4)
    assert r.cov[0, 0] == pytest.approx(1.5987, abs=1e-4)
    ref = zero_pc_state(CatalysisParams(0.6, 0.0, 0.64))
    assert np.max(np.abs(r.cov - ref.cov)) < 1e-9


# At the heavily displaced corner the N_cut=60 tail (leakage 3.5e-11) is
# amplified by post-selection and photon-number weighting to ~5e-9.
_TAIL_LIMITED = {(1, 0.6, 3.0, 0.9), (2, 0.6, 3.0, 0.9)}


def _grid():
    for m, lam, d, T in itertools.product((0, 1, 2), (0.3, 0.6), (0.0, 1.0, 3.0), (0.7, 0.9)):
        marks = ()
        if (m, lam, d, T) in _TAIL_LIMITED:
            marks = pytest.mark.xfail(strict=True, reason="N_cut=60 truncation tail exceeds 1e-9 here")
        yield pytest.param(m, lam, d, T, marks=marks)


@pytest.mark.slow
@pytest.mark.parametrize("m, lam, d, T", list(_grid()))
def test_cutoff_doubling_convergence(m, lam, d, T):
    a = oracle(lam, d, T, m, 60)
    b = oracle(lam, d, T, m, 120)
    assert a.leakage < 1e-10
    delta = max(np.max(np.abs(a.cov - b.cov)), np.max(np.abs(a.mean - b.mean)), abs(a.success_prob - b.success_prob))
    assert delta < 1e-9


def test_leakage_reported_and_enforced():
    with pytest.raises(CutoffError) as err:
        tmsc_fock(0.9, 3.0, 20)
    assert err.value.suggested_cutoff > 20
    s = tmsc_fock(0.9, 3.0, 20, check=False)
    assert s.leakage > 1e-10
    assert suggest_cutoff(0.6, 1.0) <= 60


def test_domain_checks():
    with pytest.raises(DomainError):
        tmsc_fock(1.0, 0.0)
    with pytest.raises(DomainError):
        heralding_amplitudes(1.5, 1, 5)


def test_catalyze_matches_series_m2():
    st = tmsc_fock(0.5, 1.0)
    r = catalyze_fock(st, 0.8, 2)
    s = moments(CatalysisParams(0.5, 1.0, 0.8, 2))
    assert np.max(np.abs(r.cov - s.cov)) < 1e-7 and abs(r.success_prob - s.success_prob) < 1e-7


def test_fock_vector_norm():
    v = FockVector(np.eye(3) / math.sqrt(3))
    assert v.norm2() == pytest.approx(1.0) and v.n_cut == 3
