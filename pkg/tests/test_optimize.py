import numpy as np
import pytest

from catqkd.channel import ProtocolParams
from catqkd.errors import DomainError, NoDistanceError
from catqkd.optimize import (
    TMSV,
    OptDomain,
    evaluate,
    max_distance,
    optimize_all,
    optimize_fixed_variance,
)

P = ProtocolParams()
SMALL = OptDomain(n_V=8, n_d=6, n_T=16)


def test_domain_validation():
    with pytest.raises(DomainError):
        OptDomain(V=(0.5, 15))
    with pytest.raises(DomainError):
        OptDomain(d=(0, 6))
    with pytest.raises(DomainError):
        OptDomain(fixed={"x": 1})
    assert OptDomain(T_C=(0.0, 1.0)).T_C == (0.01, 1.0)


def test_transmissivity_grid_clusters_near_one():
    g = OptDomain(n_T=11).grid("T_C")
    assert g[0] == pytest.approx(0.01) and g[-1] == 1.0
    assert np.all(np.diff(g) > 0) and np.diff(g)[-1] < np.diff(g)[0]


def test_deterministic():
    a = optimize_fixed_variance(15.0, 1, P.at_distance(60), SMALL)
    b = optimize_fixed_variance(15.0, 1, P.at_distance(60), SMALL)
    assert (a.V, a.d, a.T_C, a.K, a.evaluations) == (b.V, b.d, b.T_C, b.K, b.evaluations)


@pytest.mark.parametrize("m, L", [(0, 30), (1, 60), (1, 75)])
def test_refinement_not_below_grid(m, L):
    r = optimize_fixed_variance(15.0, m, P.at_distance(L), SMALL)
    assert r.K >= r.grid_K
    assert r.trace[0][0] == "grid" and r.trace[-1][0] == "refine"


def test_fixed_variance_m1_long_distance_no_displacement():
    r = optimize_fixed_variance(15.0, 1, P.at_distance(76))
    assert r.d == 0.0 and r.K > 0


@pytest.mark.parametrize("V", [3.0, 8.0, 15.0])
def test_fixed_variance_m0_no_displacement(V):
    r = optimize_fixed_variance(V, 0, P.at_distance(60))
    assert r.d == 0.0


def test_fixed_variance_m0_matches_tmsv_near_range_limit():
    proto = P.at_distance(78.0)
    r = optimize_fixed_variance(5.0, 0, proto)
    k = evaluate(5.0, 0.0, 1.0, 0, proto)
    assert abs(r.K - k) <= 1e-3 * abs(k)
    assert r.T_C == pytest.approx(1.0, abs=1e-6)


def test_short_distance_zero_pc_embeds_tmsv():
    proto = P.at_distance(5.0)
    assert optimize_all(0, proto).K >= optimize_all(0, proto, TMSV).K - 1e-12


@pytest.mark.parametrize("m, L", [(0, 60), (1, 20)])
def test_full_not_below_fixed_variance(m, L):
    proto = P.at_distance(L)
    full = optimize_all(m, proto)
    for V in OptDomain().grid("V")[::3]:
        assert full.K >= optimize_fixed_variance(V, m, proto).K - 1e-12


def test_all_negative_flagged():
    r = optimize_fixed_variance(15.0, 1, P.at_distance(110), SMALL)
    assert r.all_negative and r.K <= 0


def test_max_distance_monotone_in_target():
    kw = dict(V=15.0, d=3.5, T_C=0.9)
    a = max_distance(1e-3, 1, "none", P, **kw)
    b = max_distance(1e-5, 1, "none", P, **kw)
    assert a <= b


def test_max_distance_bisection_brackets():
    L = max_distance(1e-5, 0, "none", P, V=5.0)
    assert evaluate(5.0, 0, 1, 0, P.at_distance(L)) >= 1e-5
    assert evaluate(5.0, 0, 1, 0, P.at_distance(L + 0.01)) < 1e-5


def test_low_displacement_performs_poorly():
    low = max_distance(1e-5, 1, "none", P, V=15.0, d=2.0, T_C=0.9)
    tmsv = max_distance(1e-5, 0, "none", P, V=15.0)
    assert low < tmsv


def test_max_distance_errors():
    with pytest.raises(NoDistanceError):
        max_distance(10.0, 0, "none", P, V=5.0)
    with pytest.raises(DomainError):
        max_distance(0.0, 0, "none", P, V=5.0)
    with pytest.raises(DomainError):
        max_distance(1e-5, 0, "fixed-variance", P)
    with pytest.raises(DomainError):
        max_distance(1e-5, 0, "bogus", P, V=5.0)


def test_params_roundtrip():
    r = optimize_fixed_variance(5.0, 1, P.at_distance(40), SMALL)
    assert r.params.V == pytest.approx(r.V) and r.params.m == 1
