"""Balls-and-bins quantities behind the bucket-overflow bounds.

Exact probabilities use rational arithmetic; Monte Carlo trials draw from a
generator keyed by ``(seed, trial index)`` so any subset of trials can be
recomputed on its own.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

EXACT_BUDGET = 10**6


@dataclass(frozen=True)
class BallsBinsParams:
    m: int
    n: int
    trials: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if self.m < 0 or self.n < 1 or self.trials < 1:
            raise ValueError("need m >= 0, n >= 1, trials >= 1")


def f_bound(n: int, m: int, epsilon: float) -> float:
    """n * exp(-2 eps^2 h) with h = m / n."""
    return n * math.exp(-2.0 * epsilon * epsilon * (m / n))


def exact_overflow_probability(m: int, n: int, alpha: int) -> Fraction:
    """P(max load > alpha) for m balls thrown uniformly into n bins, exactly.

    Counts placements with every load <= alpha as ``m! [x^m] (sum_{j<=alpha} x^j/j!)^n``
    by repeated polynomial multiplication over the rationals.
    """
    if m < 0 or n < 1 or alpha < 0:
        raise ValueError("need m >= 0, n >= 1, alpha >= 0")
    if m <= alpha:
        return Fraction(0)
    if alpha * n < m:
        return Fraction(1)
    base = [Fraction(1, math.factorial(j)) for j in range(min(alpha, m) + 1)]
    poly = [Fraction(1)]
    for _ in range(n):
        nxt = [Fraction(0)] * min(len(poly) + len(base) - 1, m + 1)
        for i, a in enumerate(poly):
            if not a:
                continue
            for j, b in enumerate(base):
                if i + j > m:
                    break
                nxt[i + j] += a * b
        poly = nxt
    ok = poly[m] * math.factorial(m) if len(poly) > m else Fraction(0)
    return 1 - ok / Fraction(n) ** m


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed & ((1 << 64) - 1), trial]))


def _loads(params: BallsBinsParams, trial: int) -> np.ndarray:
    rng = _trial_rng(params.seed, trial)
    return rng.multinomial(params.m, np.full(params.n, 1.0 / params.n))


def mc_overflow_probability(params: BallsBinsParams, alpha: int) -> tuple:
    """Fraction of trials whose fullest bin holds more than ``alpha`` balls, with its binomial stderr."""
    if alpha >= params.m:
        return 0.0, 0.0
    hits = sum(1 for i in range(params.trials) if _loads(params, i).max() > alpha)
    p = hits / params.trials
    return p, math.sqrt(p * (1 - p) / params.trials)


@dataclass
class SaturationStats:
    epsilon: float
    h: float
    f_value: float
    threshold_load: int
    saturated_counts: np.ndarray = field(repr=False)
    frac_exceeding: float = 0.0  # trials with more than f/8 saturated bins
    stderr: float = 0.0
    out_of_range: bool = False

    def as_dict(self) -> dict:
        return {"epsilon": self.epsilon, "h": self.h, "f_value": self.f_value,
                "threshold_load": self.threshold_load,
                "frac_exceeding": self.frac_exceeding, "stderr": self.stderr,
                "out_of_range": self.out_of_range,
                "mean_saturated": float(np.mean(self.saturated_counts))}


def saturation_threshold(m: int, n: int, epsilon: float) -> int:
    """Smallest integer load that is at least h + eps*h, computed exactly."""
    return math.ceil(Fraction(m, n) * (1 + Fraction(epsilon)))


def mc_saturated_bins(params: BallsBinsParams, epsilon: float) -> SaturationStats:
    """Per-trial count of bins with load >= h + eps*h.

    Epsilon outside ``[0, n - 2]`` (or n < 2) still runs but sets
    ``out_of_range``.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    m, n = params.m, params.n
    out_of_range = n < 2 or epsilon > n - 2
    thr = saturation_threshold(m, n, epsilon)
    counts = np.fromiter(
        (int((_loads(params, i) >= thr).sum()) for i in range(params.trials)),
        dtype=np.int64, count=params.trials)
    f = f_bound(n, m, epsilon)
    frac = float(np.mean(counts > f / 8))
    se = math.sqrt(frac * (1 - frac) / params.trials)
    return SaturationStats(epsilon, m / n, f, thr, counts, frac, se, out_of_range)


def overflow_bound(k: int, alpha: int, delta: float) -> float:
    """Upper bound exp(-delta^2 alpha / 12) on the overflow probability."""
    return math.exp(-delta * delta * alpha / 12)


def saturation_lower_bound(n: int, m: int, epsilon: float) -> float:
    """Lower bound 1 - exp(-f/32) on P(more than f/8 saturated bins)."""
    return 1 - math.exp(-f_bound(n, m, epsilon) / 32)


def lemma_delta(k: int, alpha: int) -> float:
    """Smallest delta the overflow bound admits: sqrt(12 ln(k/alpha) / alpha)."""
    return math.sqrt(12 * math.log(k / alpha) / alpha)
