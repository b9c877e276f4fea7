"""Key-rate maximisation over state parameters and distance searches.

Every search starts from a deterministic coarse grid and refines the best
cell with a bounded Nelder-Mead simplex. The catalysed state does not depend
on the link length, so grid states are computed once per grid and reused for
every distance.
"""

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .catalysis import CatalysisParams, moments
from .channel import key_rate, key_rate_batch
from .errors import DomainError, NoDistanceError

__all__ = [
    "OptDomain",
    "OptResult",
    "TMSV",
    "optimize_fixed_variance",
    "optimize_all",
    "evaluate",
    "max_distance",
]

log = logging.getLogger(__name__)

_PARAMS = ("V", "d", "T_C")


@dataclass(frozen=True)
class OptDomain:
    """Search box and grid resolution; ``fixed`` pins parameters to values."""

    V: tuple = (1.0, 15.0)
    d: tuple = (0.0, 5.0)
    T_C: tuple = (0.01, 1.0)
    fixed: dict = field(default_factory=dict)
    n_V: int = 15
    n_d: int = 26
    n_T: int = 51
    fatol: float = 1e-8
    xatol: float = 1e-6
    max_evals: int = 500

    def __post_init__(self):
        if not 1.0 <= self.V[0] <= self.V[1] <= 15.0 + 1e-12:
            raise DomainError(f"V range must lie in [1, 15], got {self.V}")
        if not 0.0 <= self.d[0] <= self.d[1] <= 5.0 + 1e-12:
            raise DomainError(f"d range must lie in [0, 5], got {self.d}")
        if not 0.0 <= self.T_C[0] <= self.T_C[1] <= 1.0:
            raise DomainError(f"T_C range must lie in [0, 1], got {self.T_C}")
        unknown = set(self.fixed) - set(_PARAMS)
        if unknown:
            raise DomainError(f"unknown fixed parameters: {sorted(unknown)}")
        # full reflection is degenerate; keep a small positive floor
        object.__setattr__(self, "T_C", (max(self.T_C[0], 0.01), self.T_C[1]))

    def bounds(self, name):
        return getattr(self, name)

    def grid(self, name):
        lo, hi = self.bounds(name)
        n = {"V": self.n_V, "d": self.n_d, "T_C": self.n_T}[name]
        if hi <= lo or n < 2:
            return np.array([lo])
        if name == "T_C":
            # positive-rate windows near unit transmissivity are narrow
            u = np.linspace(1.0, 0.0, n)
            return hi - (hi - lo) * u**2
        return np.linspace(lo, hi, n)

    def with_fixed(self, **values):
        return OptDomain(
            self.V, self.d, self.T_C, {**self.fixed, **values},
            self.n_V, self.n_d, self.n_T, self.fatol, self.xatol, self.max_evals,
        )


# the uncatalysed reference: no displacement, transparent splitter
TMSV = OptDomain(fixed={"d": 0.0, "T_C": 1.0})


@dataclass
class OptResult:
    V: float
    d: float
    T_C: float
    K: float
    m: int
    evaluations: int = 0
    grid_K: float = float("nan")
    all_negative: bool = False
    trace: list = field(default_factory=list)

    @property
    def params(self):
        return CatalysisParams.from_variance(self.V, self.d, self.T_C, self.m)


def evaluate(V, d, T_C, m, proto):
    return key_rate(CatalysisParams.from_variance(V, d, T_C, m), proto).K


_grid_cache = {}


def _grid_states(m, axes):
    key = (m, tuple(tuple(a) for a in axes))
    hit = _grid_cache.get(key)
    if hit is not None:
        return hit
    points = np.array(list(itertools.product(*axes)))
    covs = np.empty((len(points), 4, 4))
    probs = np.empty(len(points))
    for i, (V, d, T) in enumerate(points):
        st = moments(CatalysisParams.from_variance(V, d, T, m))
        covs[i] = st.cov
        probs[i] = st.success_prob
    if len(_grid_cache) > 32:
        _grid_cache.clear()
    _grid_cache[key] = (points, covs, probs)
    return points, covs, probs


def _optimize(m, proto, domain, free):
    axes = []
    for name in _PARAMS:
        if name in domain.fixed:
            axes.append(np.array([float(domain.fixed[name])]))
        else:
            axes.append(domain.grid(name))
    points, covs, probs = _grid_states(m, axes)
    K_grid = key_rate_batch(covs, probs, proto)
    # ties (e.g. any d at T_C = 1) resolve to the first point, i.e. smallest V and d
    best = int(np.flatnonzero(K_grid >= K_grid.max() - 1e-13)[0])
    start = points[best]
    res = OptResult(*start, float(K_grid[best]), m, evaluations=len(points), grid_K=float(K_grid[best]))
    res.trace.append(("grid", *start, res.K))
    if not free:
        res.all_negative = res.K <= 0.0
        return res

    idx = [_PARAMS.index(n) for n in free]
    lo = np.array([domain.bounds(n)[0] for n in free])
    hi = np.array([domain.bounds(n)[1] for n in free])
    steps = np.array([
        (axes[i][1] - axes[i][0]) if len(axes[i]) > 1 else 0.1 * (h - l)
        for i, l, h in zip(idx, lo, hi)
    ])

    def full(x):
        p = start.copy()
        p[idx] = np.clip(x, lo, hi)
        return p

    def objective(x):
        V, d, T = full(x)
        return -evaluate(V, d, T, m, proto)

    x0 = start[idx]
    simplex = [x0]
    for k in range(len(free)):
        v = x0.copy()
        v[k] = v[k] + steps[k] if v[k] + steps[k] <= hi[k] else v[k] - steps[k]
        simplex.append(v)
    opt = minimize(
        objective, x0, method="Nelder-Mead", bounds=list(zip(lo, hi)),
        options={
            "initial_simplex": np.array(simplex), "fatol": domain.fatol,
            "xatol": domain.xatol, "maxfev": domain.max_evals,
        },
    )
    res.evaluations += int(opt.nfev)
    if -opt.fun > res.K:
        res.V, res.d, res.T_C = (float(v) for v in full(opt.x))
        res.K = float(-opt.fun)
    if res.T_C >= 1.0 - 1e-12:
        # transparent splitter: displacement leaves the covariance and P untouched
        res.d = 0.0
    res.trace.append(("refine", res.V, res.d, res.T_C, res.K))
    res.all_negative = res.K <= 0.0
    if res.all_negative:
        log.info("no positive key rate over the domain at L_AC=%g km", proto.L_AC)
    return res


def optimize_fixed_variance(V, m, proto, domain=None):
    """Maximise the key rate over displacement and splitter transmissivity at fixed ``V``."""
    domain = (domain or OptDomain()).with_fixed(V=float(V))
    free = [n for n in ("d", "T_C") if n not in domain.fixed]
    return _optimize(m, proto, domain, free)


def optimize_all(m, proto, domain=None):
    """Maximise the key rate over variance, displacement and transmissivity."""
    domain = domain or OptDomain(n_V=15, n_d=11, n_T=31)
    free = [n for n in _PARAMS if n not in domain.fixed]
    return _optimize(m, proto, domain, free)


def _rate_at(L, target_mode, m, proto, V, d, T_C, domain):
    p = proto.at_distance(L)
    if target_mode == "none":
        return evaluate(V, d, T_C, m, p)
    if target_mode == "fixed-variance":
        return optimize_fixed_variance(V, m, p, domain).K
    if target_mode == "all":
        return optimize_all(m, p, domain).K
    raise DomainError(f"unknown optimisation mode {target_mode!r}")


def max_distance(target_K, m, optimize_mode, proto, V=None, d=0.0, T_C=1.0,
                 domain=None, L_max=120.0, step=1.0, tol=0.01):
    """Largest ``L_AC`` at which the (optimised) key rate still reaches ``target_K``.

    ``optimize_mode`` is ``"none"`` (use ``V, d, T_C`` as given),
    ``"fixed-variance"`` or ``"all"``. Scans in ``step`` km increments and
    bisects the bracketing interval down to ``tol`` km.
    """
    if not target_K > 0:
        raise DomainError(f"target key rate must be > 0, got {target_K}")
    if optimize_mode in ("none", "fixed-variance") and V is None:
        raise DomainError(f"mode {optimize_mode!r} needs a variance")

    def ok(L):
        return _rate_at(L, optimize_mode, m, proto, V, d, T_C, domain) >= target_K

    if not ok(0.0):
        raise NoDistanceError(f"key rate below {target_K:g} already at L = 0")
    lo = 0.0
    while lo + step <= L_max:
        if not ok(lo + step):
            break
        lo += step
    else:
        return lo
    hi = lo + step
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo
