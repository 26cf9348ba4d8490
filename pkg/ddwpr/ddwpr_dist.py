"""
DDWPR Distribution
pmf, cdf, survival, hazard family, mean residual life, quantiles, sampling and moments of R(T) = floor(range)
"""
import logging
import math
import operator
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ddwpr.core.errors import DomainError, SeriesConvergenceError, UndefinedMeasureError
from ddwpr.core.series_kernel import Horizon, SeriesControl, range_cdf_and_sf
from ddwpr.dist_analytics import DiscreteDistView

logger = logging.getLogger(__name__)

SUPPORT_CAP_DEFAULT = 1_000_000
# Moments stop at the first r with r^4 * S(r) < eps * MOMENT_TAIL_FACTOR
MOMENT_TAIL_FACTOR = 1e-2
LEVEL_CACHE_SIZE = 1 << 16


class DdwprSpec(BaseModel):
    """The DDWPR law for horizon T, evaluated under the given series controls"""
    model_config = ConfigDict(frozen=True)

    T: Horizon
    ctrl: SeriesControl = Field(default_factory=SeriesControl)


class MomentSummary(BaseModel):
    """Raw moments 1..4, central moments 2..4 and the shape coefficients derived from them"""
    model_config = ConfigDict(frozen=True)

    raw: Tuple[float, float, float, float]
    central: Tuple[float, float, float]
    skewness: float
    excess_kurtosis: float
    tail_cutoff_r: int
    tail_bound: float

    @property
    def mean(self) -> float:
        return self.raw[0]

    @property
    def variance(self) -> float:
        return self.central[0]


def as_index(r, name: str = "r") -> int:
    """Coerce an integer-like argument, raising DomainError for anything else"""
    try:
        return operator.index(r)
    except TypeError:
        if isinstance(r, float) and r.is_integer():
            return int(r)
        raise DomainError(f"{name} must be an integer, got {r!r}")


# -------------------------------------------------------
# Shared evaluations of the continuous range law
# -------------------------------------------------------
@lru_cache(maxsize=LEVEL_CACHE_SIZE)
def _level(h: int, T: float, ctrl: SeriesControl) -> Tuple[float, float]:
    return range_cdf_and_sf(float(h), T, ctrl)


def _cdf_sf(spec: DdwprSpec, r: int) -> Tuple[float, float]:
    """(P[R <= r], P[R > r]); both come from the continuous law at level r + 1."""
    if r < 0:
        return 0.0, 1.0
    return _level(r + 1, spec.T, spec.ctrl)


def interval_mass(spec: DdwprSpec, lo: int, hi: int) -> float:
    """
    P(lo < R <= hi).

    Differences are taken between cdf values in the left part of the law and
    between survival values in the right tail, so small masses far out keep
    their relative accuracy.
    """
    lo = as_index(lo, "lo")
    hi = as_index(hi, "hi")
    if hi <= lo:
        return 0.0
    cdf_lo, sf_lo = _cdf_sf(spec, lo)
    cdf_hi, sf_hi = _cdf_sf(spec, hi)
    if sf_lo < 0.5:
        mass = sf_lo - sf_hi
    else:
        mass = cdf_hi - cdf_lo
    return max(mass, 0.0)


# -------------------------------------------------------
# pmf / cdf / survival
# -------------------------------------------------------
def pmf(spec: DdwprSpec, r: int) -> float:
    """P[R = r] = F(r + 1) - F(r) for the continuous range cdf F, with F(0) = 0."""
    r = as_index(r)
    if r < 0:
        raise DomainError(f"pmf is defined for r >= 0, got {r}")
    return interval_mass(spec, r - 1, r)


def cdf(spec: DdwprSpec, r: int) -> float:
    """P[R <= r]; 0 for r < 0."""
    r = as_index(r)
    return _cdf_sf(spec, r)[0]


def survival(spec: DdwprSpec, r: int) -> float:
    """P[R >= r], computed from the survival series directly; 1 for r <= 0."""
    r = as_index(r)
    return _cdf_sf(spec, r - 1)[1]


def pmf_table(spec: DdwprSpec, r_max: int) -> np.ndarray:
    """pmf(0..r_max) as an array."""
    return np.array([pmf(spec, r) for r in range(as_index(r_max, "r_max") + 1)], dtype=float)


def cdf_table(spec: DdwprSpec, r_max: int) -> np.ndarray:
    """cdf(0..r_max) as an array."""
    return np.array([cdf(spec, r) for r in range(as_index(r_max, "r_max") + 1)], dtype=float)


# -------------------------------------------------------
# Reliability measures
# -------------------------------------------------------
def _nonnegative(r, name: str = "r") -> int:
    r = as_index(r, name)
    if r < 0:
        raise DomainError(f"{name} must be >= 0, got {r}")
    return r


def hazard(spec: DdwprSpec, r: int) -> float:
    """h(r) = pmf(r) / P[R >= r]."""
    r = _nonnegative(r)
    s = survival(spec, r)
    if s <= spec.ctrl.eps:
        raise UndefinedMeasureError(f"hazard undefined at r={r}: survival {s:.3e} is below eps")
    return pmf(spec, r) / s


def reversed_hazard(spec: DdwprSpec, r: int) -> float:
    """h*(r) = pmf(r) / P[R <= r]."""
    r = _nonnegative(r)
    c = cdf(spec, r)
    if c <= 0.0:
        raise UndefinedMeasureError(f"reversed hazard undefined at r={r}: cdf is 0")
    return pmf(spec, r) / c


def second_rate_of_failure(spec: DdwprSpec, r: int) -> float:
    """log(S(r) / S(r + 1)) with S(r) = P[R >= r]."""
    r = _nonnegative(r)
    s_next = survival(spec, r + 1)
    if s_next <= spec.ctrl.eps:
        raise UndefinedMeasureError(f"second rate undefined at r={r}: S(r+1) {s_next:.3e} is below eps")
    return max(math.log(survival(spec, r) / s_next), 0.0)


def mrl_L(spec: DdwprSpec, r: int, support_cap: int = SUPPORT_CAP_DEFAULT) -> float:
    """Mean residual life E[R - r | R >= r] by direct summation over the tail."""
    r = _nonnegative(r)
    s = survival(spec, r)
    if s <= spec.ctrl.eps:
        raise UndefinedMeasureError(f"mean residual life undefined at r={r}: survival {s:.3e} is below eps")

    terms = []
    j = r
    while True:
        j += 1
        terms.append((j - r) * pmf(spec, j))
        # residual tail weight beyond j
        bound = (j + 1 - r) ** 2 * survival(spec, j + 1)
        if bound < spec.ctrl.eps * s:
            break
        if j - r > support_cap:
            raise SeriesConvergenceError(f"mean residual life at r={r} passed the support cap",
                                         math.fsum(terms) / s, bound)
    return math.fsum(terms) / s


def mrl_mu(spec: DdwprSpec, r: int, support_cap: int = SUPPORT_CAP_DEFAULT) -> float:
    """The second MRL form, L(r + 1) + 1."""
    r = _nonnegative(r)
    s_next = survival(spec, r + 1)
    if s_next <= spec.ctrl.eps:
        raise UndefinedMeasureError(f"mean residual life undefined at r={r}: S(r+1) {s_next:.3e} is below eps")
    return mrl_L(spec, r + 1, support_cap) + 1.0


# -------------------------------------------------------
# Quantiles and sampling
# -------------------------------------------------------
def _check_level(u) -> float:
    try:
        u = float(u)
    except (TypeError, ValueError):
        raise DomainError(f"quantile level must be a real number, got {u!r}")
    if not 0.0 < u < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {u!r}")
    return u


def quantile(spec: DdwprSpec, u: float) -> int:
    """Smallest integer r with cdf(r) >= u (exponential then binary search)."""
    u = _check_level(u)
    if cdf(spec, 0) >= u:
        return 0

    lo, hi = 0, 1
    while cdf(spec, hi) < u:
        lo, hi = hi, 2 * hi
        if hi > SUPPORT_CAP_DEFAULT:
            c = cdf(spec, lo)
            raise SeriesConvergenceError(f"quantile search for u={u} passed the support cap", c, 1.0 - c)
    # cdf(lo) < u <= cdf(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if cdf(spec, mid) >= u:
            hi = mid
        else:
            lo = mid
    return hi


def median(spec: DdwprSpec) -> int:
    return quantile(spec, 0.5)


def sample(spec: DdwprSpec, uniforms: Sequence[float]) -> np.ndarray:
    """Inverse-transform variates: quantile applied elementwise to the supplied uniforms."""
    u = np.asarray(uniforms, dtype=float).ravel()
    bad = np.flatnonzero(~((u > 0.0) & (u < 1.0)))
    if bad.size:
        i = int(bad[0])
        raise DomainError(f"uniform at index {i} is {u[i]!r}, outside (0, 1)")
    if u.size == 0:
        return np.empty(0, dtype=np.int64)

    top = quantile(spec, float(u.max()))
    table = np.maximum.accumulate(cdf_table(spec, top))
    return np.searchsorted(table, u, side="left").astype(np.int64)


# -------------------------------------------------------
# Moments
# -------------------------------------------------------
def central_from_raw(raw: Sequence[float]) -> Tuple[Tuple[float, float, float], float, float]:
    """Central moments 2..4, skewness and excess kurtosis from raw moments 1..4."""
    m1, m2, m3, m4 = (float(v) for v in raw)
    mu2 = m2 - m1 ** 2
    mu3 = m3 - 3.0 * m1 * m2 + 2.0 * m1 ** 3
    mu4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 ** 2 * m2 - 3.0 * m1 ** 4
    if mu2 > 0:
        skewness = mu3 / mu2 ** 1.5
        excess_kurtosis = mu4 / mu2 ** 2 - 3.0
    else:
        skewness = excess_kurtosis = math.nan
    return (mu2, mu3, mu4), skewness, excess_kurtosis


def summarize_masses(support: Sequence[int], masses: Sequence[float],
                     tail_cutoff_r: int, tail_bound: float) -> MomentSummary:
    """Build a MomentSummary from a finite table of (r, mass) pairs."""
    rs = np.asarray(support, dtype=float)
    f = np.asarray(masses, dtype=float)
    raw = tuple(math.fsum(rs ** q * f) for q in range(1, 5))
    central, skewness, excess_kurtosis = central_from_raw(raw)
    return MomentSummary(raw=raw, central=central, skewness=skewness,
                         excess_kurtosis=excess_kurtosis,
                         tail_cutoff_r=tail_cutoff_r, tail_bound=tail_bound)


def moments(spec: DdwprSpec, support_cap: int = SUPPORT_CAP_DEFAULT) -> MomentSummary:
    """Moments by direct summation, stopping where r^4 * S(r) falls below eps * 1e-2."""
    tol = spec.ctrl.eps * MOMENT_TAIL_FACTOR
    masses = []
    r = 0
    while True:
        masses.append(pmf(spec, r))
        bound = (r + 1) ** 4 * survival(spec, r + 1)
        if bound < tol:
            break
        r += 1
        if r > support_cap:
            raise SeriesConvergenceError(f"moment summation for T={spec.T} passed the support cap {support_cap}",
                                         math.fsum(masses), bound)

    logger.debug(f"moments T={spec.T}: tail cutoff r={r}, bound {bound:.3e}")
    return summarize_masses(range(r + 1), masses, r, bound)


# -------------------------------------------------------
# Analytics view
# -------------------------------------------------------
class DdwprView(DiscreteDistView):
    """DiscreteDistView over the full DDWPR law"""

    def __init__(self, spec: DdwprSpec):
        self.spec = spec

    def pmf_at(self, r: int) -> float:
        return pmf(self.spec, r) if r >= 0 else 0.0

    def cdf_at(self, r: int) -> float:
        return cdf(self.spec, r)

    def sf_at(self, r: int) -> float:
        return _cdf_sf(self.spec, r)[1]

    @property
    def support_lo(self) -> int:
        return 0

    @property
    def support_hi_hint(self) -> Optional[int]:
        return None
