"""
Series Kernel for the Wiener Range Law
Truncated odd-square exponential sums, theta acceleration and the continuous range cdf/pdf

All higher modules evaluate the range law only through this module. Every sum
is cut off by one rule: stop once the bound on the next term is below
eps (relative to the partial sum when that is smaller than one), and fail with
SeriesConvergenceError when kmax terms were not enough.

Each function has two representations of the same theta series. For
x = pi^2 T / (2 h^2) >= pi/2 the odd-square series decays fast and is summed
as printed; below that point the Jacobi imaginary transformation gives a
Gaussian/erfc series that decays just as fast. A handful of terms therefore
suffices over the whole (h, T) range.
"""
import logging
import math
from itertools import count
from typing import Annotated, Iterator, List, Tuple

from pydantic import BaseModel, ConfigDict, Field
from scipy import special

from ddwpr.core.errors import DomainError, SeriesConvergenceError

logger = logging.getLogger(__name__)

DEFAULT_EPS = 1e-14
DEFAULT_KMAX = 10_000

PI_SQUARED = math.pi ** 2

# Both theta representations decay at the same rate here
SELF_DUAL_X = math.pi / 2

# Positive, finite time-interval length of the Wiener process
Horizon = Annotated[float, Field(gt=0, allow_inf_nan=False)]


class SeriesControl(BaseModel):
    """Truncation tolerance and term cap governing every infinite sum"""
    model_config = ConfigDict(frozen=True)

    eps: float = Field(default=DEFAULT_EPS, gt=0, allow_inf_nan=False)
    kmax: int = Field(default=DEFAULT_KMAX, ge=1)


DEFAULT_CONTROL = SeriesControl()


def _as_real(value, name: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError):
        raise DomainError(f"{name} must be a real number, got {value!r}")


def validate_horizon(T: float) -> float:
    """Return T as a float, raising DomainError unless it is positive and finite"""
    value = _as_real(T, "horizon T")
    if not math.isfinite(value) or value <= 0:
        raise DomainError(f"horizon T must be positive and finite, got {T!r}")
    return value


def _truncated_sum(terms: Iterator[Tuple[float, float]], ctrl: SeriesControl, label: str) -> float:
    """Sum (term, next_term_bound) pairs until the bound meets the tolerance."""
    parts: List[float] = []
    partial = 0.0
    bound = math.inf
    for k, (term, next_bound) in zip(count(1), terms):
        parts.append(term)
        partial += term
        bound = next_bound
        if bound <= ctrl.eps * min(1.0, abs(partial)):
            return math.fsum(parts)
        if k >= ctrl.kmax:
            break
    total = math.fsum(parts)
    logger.warning(f"{label}: no convergence within kmax={ctrl.kmax} (bound {bound:.3e})")
    raise SeriesConvergenceError(f"{label}: term cap {ctrl.kmax} reached", total, bound)


# -------------------------------------------------------
# Odd-square exponential sum and theta function
# -------------------------------------------------------
def _odd_square_direct_terms(x: float) -> Iterator[Tuple[float, float]]:
    for k in count(1):
        m = 2 * k - 1
        yield math.exp(-m * m * x), math.exp(-(m + 2) ** 2 * x)


def _odd_square_dual_terms(x: float) -> Iterator[Tuple[float, float]]:
    # 1/4 sqrt(pi/x) * [1 + 2 sum (-1)^n exp(-n^2 pi^2 / (4x))]
    prefactor = 0.25 * math.sqrt(math.pi / x)
    a = PI_SQUARED / (4.0 * x)
    yield prefactor, 2.0 * prefactor * math.exp(-a)
    for n in count(1):
        sign = -1.0 if n % 2 else 1.0
        term = 2.0 * prefactor * sign * math.exp(-n * n * a)
        yield term, 2.0 * prefactor * math.exp(-(n + 1) ** 2 * a)


def odd_square_exp_sum(x: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """S(x) = sum over k >= 1 of exp(-(2k-1)^2 x), equal to theta_2(0, exp(-4x)) / 2."""
    x = _as_real(x, "x")
    if not math.isfinite(x) or x <= 0:
        raise DomainError(f"odd_square_exp_sum needs a positive finite x, got {x!r}")
    if x >= SELF_DUAL_X:
        return _truncated_sum(_odd_square_direct_terms(x), ctrl, "odd_square_exp_sum")
    return _truncated_sum(_odd_square_dual_terms(x), ctrl, "odd_square_exp_sum")


def theta2(q: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Jacobi theta_2(0, q) = 2 * sum over j >= 0 of q^((j + 1/2)^2), summed directly."""
    q = _as_real(q, "nome q")
    if not 0.0 < q < 1.0:
        raise DomainError(f"theta2 nome must lie in (0, 1), got {q!r}")
    log_q = math.log(q)

    def terms() -> Iterator[Tuple[float, float]]:
        for j in count(0):
            yield (2.0 * math.exp((j + 0.5) ** 2 * log_q),
                   2.0 * math.exp((j + 1.5) ** 2 * log_q))

    return _truncated_sum(terms(), ctrl, "theta2")


# -------------------------------------------------------
# Continuous range law
# -------------------------------------------------------
def _range_cdf_direct_terms(x: float) -> Iterator[Tuple[float, float]]:
    # (8/(m^2 pi^2) + 8T/h^2) exp(-m^2 x) with 8T/h^2 = 16x/pi^2
    c = 16.0 * x / PI_SQUARED
    lead = 8.0 / PI_SQUARED
    for k in count(1):
        m = 2 * k - 1
        term = (lead / (m * m) + c) * math.exp(-m * m * x)
        yield term, (lead + c) * math.exp(-(m + 2) ** 2 * x)


def _range_sf_dual_terms(z: float) -> Iterator[Tuple[float, float]]:
    # 4 sum (-1)^(n+1) n erfc(n z), z = h / sqrt(2T)
    for n in count(1):
        sign = 1.0 if n % 2 else -1.0
        term = 4.0 * sign * n * float(special.erfc(n * z))
        yield term, 4.0 * (n + 1) * float(special.erfc((n + 1) * z))


def range_cdf_and_sf(h: float, T: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> Tuple[float, float]:
    """
    Return (P[range <= h], P[range > h]) for the Wiener range on (0, T).

    The member of the pair that is small is computed by its own series, so
    far-tail probabilities keep their relative accuracy; the other one is its
    complement.
    """
    T = validate_horizon(T)
    h = _as_real(h, "range level h")
    if not math.isfinite(h):
        raise DomainError(f"range level h must be finite, got {h!r}")
    if h <= 0:
        return 0.0, 1.0

    x = PI_SQUARED * T / (2.0 * h * h)
    if not math.isfinite(x):
        return 0.0, 1.0
    if x >= SELF_DUAL_X:
        cdf = _truncated_sum(_range_cdf_direct_terms(x), ctrl, "range_cdf")
        cdf = min(max(cdf, 0.0), 1.0)
        return cdf, 1.0 - cdf

    z = h / math.sqrt(2.0 * T)
    sf = _truncated_sum(_range_sf_dual_terms(z), ctrl, "range_sf")
    sf = min(max(sf, 0.0), 1.0)
    return 1.0 - sf, sf


def continuous_range_cdf(h: float, T: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """P[R(T) <= h] for the continuous range; 0 for h <= 0."""
    return range_cdf_and_sf(h, T, ctrl)[0]


def continuous_range_sf(h: float, T: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """P[R(T) > h] for the continuous range; 1 for h <= 0."""
    return range_cdf_and_sf(h, T, ctrl)[1]


def continuous_range_pdf(r: float, T: float, ctrl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Density of the continuous range at r, the r-derivative of the cdf series; 0 for r <= 0."""
    T = validate_horizon(T)
    r = _as_real(r, "range level r")
    if not math.isfinite(r):
        raise DomainError(f"range level r must be finite, got {r!r}")
    if r <= 0:
        return 0.0

    x = PI_SQUARED * T / (2.0 * r * r)
    if not math.isfinite(x):
        return 0.0
    if x >= SELF_DUAL_X:
        scale = 8.0 * T / r ** 3

        def direct_terms() -> Iterator[Tuple[float, float]]:
            for k in count(1):
                m2 = (2 * k - 1) ** 2
                next_m2 = (2 * k + 1) ** 2
                yield (scale * (2.0 * m2 * x - 1.0) * math.exp(-m2 * x),
                       scale * 2.0 * next_m2 * x * math.exp(-next_m2 * x))

        density = _truncated_sum(direct_terms(), ctrl, "range_pdf")
    else:
        scale = 8.0 / math.sqrt(2.0 * math.pi * T)
        a = r * r / (2.0 * T)

        def dual_terms() -> Iterator[Tuple[float, float]]:
            for n in count(1):
                sign = 1.0 if n % 2 else -1.0
                yield (scale * sign * n * n * math.exp(-n * n * a),
                       scale * (n + 1) ** 2 * math.exp(-(n + 1) ** 2 * a))

        density = _truncated_sum(dual_terms(), ctrl, "range_pdf")
    return max(density, 0.0)
