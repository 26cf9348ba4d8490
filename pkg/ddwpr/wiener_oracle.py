"""
Wiener Path Oracle
Brute-force Monte-Carlo check of the analytic law: simulate discretized Wiener paths, floor their ranges, compare
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ddwpr.core.errors import DomainError, ResourceCapError
from ddwpr.core.series_kernel import Horizon
from ddwpr.ddwpr_dist import DdwprSpec, DdwprView, moments, quantile
from ddwpr.tddwpr_dist import TddwprSpec, TddwprView, t_moments

logger = logging.getLogger(__name__)

# Largest accepted paths * steps
WORK_CAP = 10 ** 10
BASE_STEPS = 16384
DKW_ALPHA = 0.01
# Budget for the downward bias of grid-monitored extrema, times sqrt(T / steps)
BIAS_COEFFICIENT = 1.2
CHUNK_PATHS = 1024
# cdf level up to which the comparison grid extends when r_max is not given
COMPARISON_LEVEL = 1.0 - 1e-9


class OracleConfig(BaseModel):
    """One simulation run: horizon, number of paths, grid size and seed"""
    model_config = ConfigDict(frozen=True)

    T: Horizon
    paths: int = Field(ge=1)
    steps: int = Field(ge=2)
    seed: int = Field(ge=0, le=2 ** 64 - 1)
    r_max: Optional[int] = Field(default=None, ge=1)


class OracleReport(BaseModel):
    """Empirical law of a sample next to the analytic one"""
    n: int
    empirical_pmf: Dict[int, float]
    empirical_cdf: Dict[int, float]
    mean: float
    variance: float
    third_central: float
    fourth_central: float
    std_error_mean: float
    analytic_mean: float
    mean_deviation: float
    max_abs_cdf_deviation: float
    dkw_band: float
    discretization_bias_bound: float
    passed: bool


def default_steps(T: float) -> int:
    """Grid size holding the bias budget roughly constant as T grows."""
    return BASE_STEPS * max(1, math.ceil(T)) if T > 4 else BASE_STEPS


def dkw_band(n: int, alpha: float = DKW_ALPHA) -> float:
    """Half-width of the (1 - alpha) Dvoretzky-Kiefer-Wolfowitz band for n observations."""
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * n))


def bias_bound(T: float, steps: Optional[int]) -> float:
    return BIAS_COEFFICIENT * math.sqrt(T / steps) if steps else 0.0


# -------------------------------------------------------
# Path simulation
# -------------------------------------------------------
def path_generator(seed: int, path_index: int) -> np.random.Generator:
    """Counter-based stream for one path: Philox keyed on the seed, path index in the top counter word."""
    return np.random.Generator(np.random.Philox(key=seed, counter=path_index << 192))


def _floored_range(rng: np.random.Generator, steps: int, scale: float) -> int:
    walk = np.cumsum(rng.standard_normal(steps) * scale)
    top = max(0.0, float(walk.max()))
    bottom = min(0.0, float(walk.min()))
    return int(math.floor(top - bottom))


def _simulate_chunk(cfg: OracleConfig, start: int, stop: int, out: np.ndarray) -> None:
    scale = math.sqrt(cfg.T / cfg.steps)
    for i in range(start, stop):
        out[i] = _floored_range(path_generator(cfg.seed, i), cfg.steps, scale)
    logger.debug(f"simulated paths {start}..{stop - 1}")


def simulate_ranges(cfg: OracleConfig, workers: int = 1) -> np.ndarray:
    """
    Floored ranges of cfg.paths simulated Wiener paths on (0, T).

    Each path draws from its own counter-based stream, so the output depends
    only on (seed, paths, steps, T), never on the number of workers.
    """
    if cfg.paths * cfg.steps > WORK_CAP:
        raise ResourceCapError(f"paths*steps = {cfg.paths * cfg.steps:.3e} exceeds the cap of {WORK_CAP:.0e}")
    if workers < 1:
        raise DomainError(f"workers must be >= 1, got {workers}")

    logger.info(f"simulating {cfg.paths} paths x {cfg.steps} steps at T={cfg.T} (seed {cfg.seed}, {workers} workers)")
    out = np.zeros(cfg.paths, dtype=np.int64)
    chunks = [(s, min(s + CHUNK_PATHS, cfg.paths)) for s in range(0, cfg.paths, CHUNK_PATHS)]
    if workers == 1:
        for start, stop in chunks:
            _simulate_chunk(cfg, start, stop, out)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_simulate_chunk, cfg, start, stop, out) for start, stop in chunks]
            for future in futures:
                future.result()
    return out


# -------------------------------------------------------
# Comparison with the analytic law
# -------------------------------------------------------
def compare_to_analytic(sample: Sequence[int], spec: Union[DdwprSpec, TddwprSpec],
                        steps: Optional[int] = None, r_max: Optional[int] = None,
                        alpha: float = DKW_ALPHA) -> OracleReport:
    """
    Empirical pmf, cdf and moments of sample against the analytic law.

    For a TddwprSpec the sample is first restricted to a < R <= b. steps is the
    path grid the sample came from; None means the sample was drawn from the
    analytic law itself and carries no discretization bias.
    """
    values = np.asarray(sample, dtype=np.int64).ravel()
    if isinstance(spec, TddwprSpec):
        values = values[(values > spec.a) & (values <= spec.b)]
        view = TddwprView(spec)
        T = spec.base.T
        analytic_mean = t_moments(spec).mean
        default_r_max = spec.b
    else:
        view = DdwprView(spec)
        T = spec.T
        analytic_mean = moments(spec).mean
        default_r_max = quantile(spec, COMPARISON_LEVEL)
    if values.size == 0:
        raise DomainError("cannot compare an empty sample")
    if values.min() < 0:
        raise DomainError("sample contains negative values")

    n = int(values.size)
    counts = np.bincount(values)
    freqs = counts / n
    cum = np.cumsum(counts) / n
    empirical_pmf = {r: float(freqs[r]) for r in range(len(freqs)) if counts[r]}
    empirical_cdf = {r: float(cum[r]) for r in range(len(cum))}

    grid_top = r_max if r_max is not None else max(default_r_max, len(counts) - 1)
    deviations: List[float] = []
    for r in range(grid_top + 1):
        emp = float(cum[r]) if r < len(cum) else 1.0
        deviations.append(abs(emp - view.cdf_at(r)))
    max_dev = max(deviations)

    x = values.astype(float)
    mean = float(x.mean())
    centered = x - mean
    variance = float(centered.var(ddof=1)) if n > 1 else 0.0
    band = dkw_band(n, alpha)
    bias = bias_bound(T, steps)
    passed = max_dev <= band + bias
    level = logging.INFO if passed else logging.WARNING
    logger.log(level, f"oracle n={n}: max cdf deviation {max_dev:.4g} vs band {band:.4g} + bias {bias:.4g} -> "
                      f"{'PASS' if passed else 'FAIL'}")

    return OracleReport(
        n=n,
        empirical_pmf=empirical_pmf,
        empirical_cdf=empirical_cdf,
        mean=mean,
        variance=variance,
        third_central=float(np.mean(centered ** 3)),
        fourth_central=float(np.mean(centered ** 4)),
        std_error_mean=math.sqrt(variance / n),
        analytic_mean=analytic_mean,
        mean_deviation=mean - analytic_mean,
        max_abs_cdf_deviation=max_dev,
        dkw_band=band,
        discretization_bias_bound=bias,
        passed=passed,
    )
