"""
Statistics for ensembles
Monte Carlo means, fractional moments, two-sample KS distances with bootstrap bands and trend verdicts
"""

import math
import logging
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

logger = logging.getLogger(__name__)

BOOTSTRAP_RESAMPLES = 200
NULL_SPLITS = 200
BAND_LEVEL = 0.95


def mc_estimate(samples) -> Tuple[float, float]:
    """(mean, standard error); the error is nan for fewer than two samples"""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("Need at least one sample")
    if samples.size < 2:
        return float(samples.mean()), float("nan")
    return float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(samples.size))


def fractional_moment(values, q: float) -> Tuple[float, float]:
    """Estimate of E|V|^{2q} with its standard error; |0|^0 counts as 1"""
    if q < 0:
        raise ValueError(f"q={q} must be non-negative")
    return mc_estimate(np.abs(np.asarray(values)) ** (2.0 * q))


def ks_two_sample(a, b) -> Dict[str, float]:
    result = stats.ks_2samp(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    return {'statistic': float(result.statistic), 'pvalue': float(result.pvalue)}


def bootstrap_band(a, b, resamples: int = BOOTSTRAP_RESAMPLES, seed: int = 0,
                   level: float = BAND_LEVEL) -> Tuple[float, float]:
    """Percentile band of the KS distance when both samples are resampled with replacement"""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    values = np.empty(resamples)
    for i in range(resamples):
        values[i] = ks_two_sample(rng.choice(a, a.size), rng.choice(b, b.size))['statistic']
    tail = (1.0 - level) / 2.0
    return float(np.quantile(values, tail)), float(np.quantile(values, 1.0 - tail))


def self_split_null(samples, splits: int = NULL_SPLITS, seed: int = 0, level: float = BAND_LEVEL) -> float:
    """
    Upper `level` quantile of the KS distance between random halves of one sample

    Distances below it are what exchangeable draws produce at this sample size.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size < 4:
        raise ValueError("Need at least 4 samples for a split")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    half = samples.size // 2
    values = np.empty(splits)
    for i in range(splits):
        order = rng.permutation(samples.size)
        values[i] = ks_two_sample(samples[order[:half]], samples[order[half:2 * half]])['statistic']
    return float(np.quantile(values, level))


def halves_ks(samples) -> float:
    """KS distance between the first and second half of a sample"""
    samples = np.asarray(samples, dtype=float)
    half = samples.size // 2
    return ks_two_sample(samples[:half], samples[half:2 * half])['statistic']


def trend_verdict(values: Sequence[float], errors: Optional[Sequence[float]] = None,
                  direction: str = "decreasing") -> Dict[str, object]:
    """
    Three-point (or longer) monotonicity check

    'monotone' asks for strict monotonicity of the point values, 'separated'
    additionally asks each step to exceed the combined standard error.
    """
    if direction not in ("decreasing", "increasing"):
        raise ValueError(f"Unknown direction {direction!r}")
    values = np.asarray(values, dtype=float)
    errors = np.zeros_like(values) if errors is None else np.nan_to_num(np.asarray(errors, dtype=float))
    steps = np.diff(values) if direction == "increasing" else -np.diff(values)
    combined = np.sqrt(errors[:-1] ** 2 + errors[1:] ** 2)
    monotone = bool(np.all(steps > 0))
    separated = bool(np.all(steps > combined))
    verdict = "separated" if separated else ("monotone" if monotone else "not monotone")
    return {'direction': direction, 'monotone': monotone, 'separated': separated, 'verdict': verdict}


def band_ratio(ratios: Sequence[float]) -> float:
    """max/min of a positive sequence; within a factor-2 band when at most 2"""
    ratios = np.asarray(ratios, dtype=float)
    if np.any(ratios <= 0):
        return float("inf")
    return float(ratios.max() / ratios.min())
