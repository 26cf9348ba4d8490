"""
Distribution Analytics
Order statistics and the stress-strength parameter for any integer-supported law exposing pmf and cdf
"""
import logging
import math
from abc import ABC, abstractmethod
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import special, stats

from ddwpr.core.errors import SeriesConvergenceError

logger = logging.getLogger(__name__)

# Probability both laws may leave beyond the stress-strength summation cap
TAIL_TOLERANCE = 1e-10


class DiscreteDistView(ABC):
    """Read interface over an integer-valued law"""

    @abstractmethod
    def pmf_at(self, r: int) -> float:
        ...

    @abstractmethod
    def cdf_at(self, r: int) -> float:
        ...

    def sf_at(self, r: int) -> float:
        """P[X > r]; views with an accurate tail override this."""
        return 1.0 - self.cdf_at(r)

    @property
    @abstractmethod
    def support_lo(self) -> int:
        ...

    @property
    @abstractmethod
    def support_hi_hint(self) -> Optional[int]:
        """Largest support point, or None when the support is unbounded."""
        ...


class OrderStatQuery(BaseModel):
    """Rank p among n independent copies"""
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    p: int = Field(ge=1)

    @model_validator(mode="after")
    def check_rank(self) -> "OrderStatQuery":
        if self.p > self.n:
            raise ValueError(f"rank p={self.p} exceeds sample size n={self.n}")
        return self


def order_stat_cdf(view: DiscreteDistView, q: OrderStatQuery, r: int) -> float:
    """P[X_(p:n) <= r] = P[Binomial(n, F(r)) >= p]."""
    F = min(max(view.cdf_at(r), 0.0), 1.0)
    value = float(stats.binom.sf(q.p - 1, q.n, F))
    return min(max(value, 0.0), 1.0)


def order_stat_pmf_exact(view: DiscreteDistView, q: OrderStatQuery, r: int) -> float:
    """Exact mass of the order statistic at r, by differencing its cdf."""
    return max(order_stat_cdf(view, q, r) - order_stat_cdf(view, q, r - 1), 0.0)


def _log_rank_coefficient(q: OrderStatQuery) -> float:
    # log of n! / ((p-1)! (n-p)!)
    return float(special.gammaln(q.n + 1) - special.gammaln(q.p) - special.gammaln(q.n - q.p + 1))


def order_stat_pmf_formula(view: DiscreteDistView, q: OrderStatQuery, r: int) -> float:
    """
    n! / ((p-1)! (n-p)!) * F(r)^(p-1) * (1 - F(r))^(n-p) * f(r), evaluated in log space.

    This is the continuous-law density carried over to the discrete case. It
    ignores ties, so it does not sum to 1: for the maximum of two copies the
    total is 1 + sum f^2, for the minimum 1 - sum f^2.
    """
    f = view.pmf_at(r)
    if f <= 0.0:
        return 0.0
    F = min(max(view.cdf_at(r), 0.0), 1.0)
    log_value = (_log_rank_coefficient(q)
                 + float(special.xlogy(q.p - 1, F))
                 + float(special.xlog1py(q.n - q.p, -F))
                 + math.log(f))
    return math.exp(log_value)


def order_stat_tie_gap(view: DiscreteDistView, q: OrderStatQuery, r_cap: int) -> float:
    """Sum of the tie-free formula minus the sum of the exact masses over support_lo..r_cap."""
    rs = range(view.support_lo, r_cap + 1)
    formula = math.fsum(order_stat_pmf_formula(view, q, r) for r in rs)
    exact = math.fsum(order_stat_pmf_exact(view, q, r) for r in rs)
    return formula - exact


def stress_strength(strength: DiscreteDistView, stress: DiscreteDistView,
                    support_cap: int, strict: bool = False) -> float:
    """
    Stress-strength parameter sum_r f_strength(r) * F_stress(r) = P(stress <= strength).

    strict=True uses F_stress(r - 1) instead, giving P(stress < strength).
    """
    tails = (strength.sf_at(support_cap), stress.sf_at(support_cap))
    if max(tails) >= TAIL_TOLERANCE:
        logger.warning(f"stress-strength cap {support_cap} leaves tail mass {max(tails):.3e}")
        raise SeriesConvergenceError(f"support cap {support_cap} leaves non-negligible tail mass",
                                     partial_sum=math.nan, bound=max(tails))

    start = min(strength.support_lo, stress.support_lo)
    shift = 1 if strict else 0
    terms = [strength.pmf_at(r) * stress.cdf_at(r - shift) for r in range(start, support_cap + 1)]
    value = math.fsum(terms)
    return float(np.clip(value, 0.0, 1.0))
