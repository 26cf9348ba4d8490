"""
TDDWPR Distribution
DDWPR doubly truncated to integer bounds a < b: pmf, cdf, survival, hazard family, moments and sampling

The window functions follow the printed forms: t_pmf is defined on a..b and
t_cdf starts from 0 at r = a, so the mass that t_cdf accumulates lives on
a+1..b. TddwprView exposes that conditional law for the analytics and the
oracle.
"""
import logging
import math
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr

from ddwpr.core.errors import DomainError, UndefinedMeasureError
from ddwpr.dist_analytics import DiscreteDistView
from ddwpr.ddwpr_dist import (
    DdwprSpec,
    MomentSummary,
    as_index,
    interval_mass,
    pmf,
    summarize_masses,
)

logger = logging.getLogger(__name__)


class TddwprSpec(BaseModel):
    """DDWPR truncated to the integer window [a, b]; the normalizer is cached at construction"""
    model_config = ConfigDict(frozen=True)

    base: DdwprSpec
    a: int = Field(ge=0)
    b: int

    _xi: float = PrivateAttr(default=math.nan)

    def model_post_init(self, __context) -> None:
        if self.a >= self.b:
            raise DomainError(f"truncation bounds need a < b, got a={self.a}, b={self.b}")
        xi = interval_mass(self.base, self.a, self.b)
        if xi <= 0.0:
            raise DomainError(f"window ({self.a}, {self.b}] carries no mass at T={self.base.T}")
        self._xi = xi
        logger.debug(f"TDDWPR T={self.base.T} a={self.a} b={self.b}: normalizer {xi:.10g}")

    @property
    def xi(self) -> float:
        """F(b + 1) - F(a + 1) for the continuous range cdf F."""
        return self._xi


def _in_window(spec: TddwprSpec, r) -> int:
    r = as_index(r)
    if not spec.a <= r <= spec.b:
        raise DomainError(f"r={r} lies outside the truncation window [{spec.a}, {spec.b}]")
    return r


def _undefined_below(value: float, spec: TddwprSpec) -> bool:
    return value <= spec.base.ctrl.eps


def t_pmf(spec: TddwprSpec, r: int) -> float:
    """pmf(r) / xi for a <= r <= b."""
    r = _in_window(spec, r)
    return pmf(spec.base, r) / spec.xi


def t_cdf(spec: TddwprSpec, r: int) -> float:
    """(F(r + 1) - F(a + 1)) / xi; 0 at a and 1 at b."""
    r = _in_window(spec, r)
    return interval_mass(spec.base, spec.a, r) / spec.xi


def t_survival(spec: TddwprSpec, r: int) -> float:
    """1 - t_cdf(r), computed as the mass of (r, b] over xi."""
    r = _in_window(spec, r)
    return interval_mass(spec.base, r, spec.b) / spec.xi


def t_hazard(spec: TddwprSpec, r: int) -> float:
    r = _in_window(spec, r)
    omega = t_survival(spec, r)
    if _undefined_below(omega, spec):
        raise UndefinedMeasureError(f"truncated hazard undefined at r={r}: survival is {omega:.3e}")
    return t_pmf(spec, r) / omega


def t_reversed_hazard(spec: TddwprSpec, r: int) -> float:
    r = _in_window(spec, r)
    g = t_cdf(spec, r)
    if g <= 0.0:
        raise UndefinedMeasureError(f"truncated reversed hazard undefined at r={r}: cdf is 0")
    return t_pmf(spec, r) / g


def t_second_rate(spec: TddwprSpec, r: int) -> float:
    """log(Omega(r) / Omega(r + 1)) with Omega = 1 - t_cdf."""
    r = _in_window(spec, r)
    if r == spec.b:
        raise UndefinedMeasureError(f"truncated second rate undefined at r=b={r}")
    omega_next = t_survival(spec, r + 1)
    if _undefined_below(omega_next, spec):
        raise UndefinedMeasureError(f"truncated second rate undefined at r={r}: next survival is {omega_next:.3e}")
    return max(math.log(t_survival(spec, r) / omega_next), 0.0)


def t_moments(spec: TddwprSpec, include_lower_bound: bool = False) -> MomentSummary:
    """
    Moments of the truncated law as finite sums.

    By default the sum runs over a+1..b, where the normalized mass lives.
    include_lower_bound=True sums the printed range a..b, whose masses add up
    to 1 + t_pmf(a).
    """
    start = spec.a if include_lower_bound else spec.a + 1
    support = range(start, spec.b + 1)
    masses = [t_pmf(spec, r) for r in support]
    return summarize_masses(support, masses, spec.b, 0.0)


def t_sample(spec: TddwprSpec, uniforms: Sequence[float]) -> np.ndarray:
    """Inverse-transform variates from the conditional law on (a, b]."""
    u = np.asarray(uniforms, dtype=float).ravel()
    bad = np.flatnonzero(~((u > 0.0) & (u < 1.0)))
    if bad.size:
        i = int(bad[0])
        raise DomainError(f"uniform at index {i} is {u[i]!r}, outside (0, 1)")
    support = np.arange(spec.a + 1, spec.b + 1)
    table = np.maximum.accumulate([t_cdf(spec, int(r)) for r in support])
    table[-1] = 1.0
    return support[np.searchsorted(table, u, side="left")].astype(np.int64)


class TddwprView(DiscreteDistView):
    """DiscreteDistView over the conditional law of R given a < R <= b"""

    def __init__(self, spec: TddwprSpec):
        self.spec = spec

    def pmf_at(self, r: int) -> float:
        if r <= self.spec.a or r > self.spec.b:
            return 0.0
        return t_pmf(self.spec, r)

    def cdf_at(self, r: int) -> float:
        if r <= self.spec.a:
            return 0.0
        if r >= self.spec.b:
            return 1.0
        return t_cdf(self.spec, r)

    def sf_at(self, r: int) -> float:
        if r <= self.spec.a:
            return 1.0
        if r >= self.spec.b:
            return 0.0
        return t_survival(self.spec, r)

    @property
    def support_lo(self) -> int:
        return self.spec.a + 1

    @property
    def support_hi_hint(self) -> Optional[int]:
        return self.spec.b
