"""Request-sequence generators: the lower-bound adversaries and synthetic baselines.

Traces are plain lists (or int64 arrays for the long ones) of item ids.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

MAX_ITEM = (1 << 63) - 1


def restrict(trace: Sequence[int], subset: Iterable[int]) -> list:
    """The subsequence of requests for items in ``subset``."""
    keep = set(subset)
    return [x for x in trace if x in keep]


@dataclass(frozen=True)
class TradeoffAdversaryParams:
    """Parameters of the repeated disjoint-scan adversary.

    ``phases`` and ``repeats`` are the number of disjoint scan sets and the
    number of scans per set; left unset they follow the theoretical values,
    which explode quickly, so desk-scale runs override them.
    """

    k: int
    alpha: int
    delta: float
    c: float = 1.0
    s_override: Optional[int] = None
    t_override: Optional[int] = None

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.k < 1 or self.alpha < 1 or self.c <= 0:
            raise ValueError("k, alpha and c must be positive")
        for v in (self.s_override, self.t_override):
            if v is not None and v < 1:
                raise ValueError("overrides must be positive")

    @property
    def k_prime(self) -> int:
        return math.ceil((1 - self.delta) * self.k)

    @property
    def s_theory(self) -> int:
        return math.ceil(16 * math.exp(8 * self.delta ** 2 * self.alpha / (1 - self.delta)))

    @property
    def t_theory(self) -> int:
        return math.ceil(self.c * self.alpha * self.s_theory ** 2)

    @property
    def s(self) -> int:
        return self.s_override if self.s_override is not None else self.s_theory

    @property
    def t(self) -> int:
        if self.t_override is not None:
            return self.t_override
        return math.ceil(self.c * self.alpha * self.s ** 2)

    @property
    def length(self) -> int:
        return self.s * self.t * self.k_prime

    @property
    def universe_needed(self) -> int:
        return self.s * self.k_prime

    @property
    def universe_needed_theory(self) -> float:
        """Universe size the lower-bound theorem asks for (not scaled by overrides)."""
        return 16 * self.k * math.exp(8 * self.delta ** 2 * self.alpha / (1 - self.delta))

    def summary(self) -> dict:
        return {"k": self.k, "alpha": self.alpha, "delta": self.delta, "c": self.c,
                "k_prime": self.k_prime, "s": self.s, "t": self.t,
                "s_theory": self.s_theory, "t_theory": self.t_theory,
                "length": self.length, "theory_universe_met": self.universe_needed >= self.universe_needed_theory}


def phase_sets(params: TradeoffAdversaryParams, universe_start: int = 0) -> list:
    kp = params.k_prime
    return [range(universe_start + i * kp, universe_start + (i + 1) * kp) for i in range(params.s)]


def tradeoff_adversary(params: TradeoffAdversaryParams, universe_start: int = 0,
                       universe_size: Optional[int] = None) -> np.ndarray:
    """``s`` disjoint blocks of ``k'`` consecutive ids, each scanned ``t`` times in a row."""
    need = params.universe_needed
    limit = MAX_ITEM - universe_start + 1 if universe_size is None else universe_size
    if need > limit:
        raise ValueError(f"universe too small: need {need} items, have {limit}")
    if params.length > 10**9:
        raise ValueError(f"trace of length {params.length} is too long to materialize; use overrides")
    kp, s, t = params.k_prime, params.s, params.t
    block = np.arange(kp, dtype=np.int64)
    one_phase = np.tile(block, t)
    return np.concatenate([one_phase + universe_start + i * kp for i in range(s)]) if s else block[:0]


def fixed_set_cycler(k_prime: int, repetitions: int, universe_start: int = 0) -> np.ndarray:
    """One block of ``k_prime`` ids scanned cyclically ``repetitions`` times."""
    if k_prime < 1 or repetitions < 1:
        raise ValueError("k_prime and repetitions must be >= 1")
    return np.tile(np.arange(universe_start, universe_start + k_prime, dtype=np.int64), repetitions)


def zipf_trace(universe_size: int, exponent: float, length: int, seed: int,
               universe_start: int = 0) -> np.ndarray:
    """i.i.d. draws with P(rank r) proportional to r**-exponent; rank r is id ``universe_start + r - 1``."""
    if exponent < 0:
        raise ValueError("exponent must be >= 0")
    if universe_size < 1 or length < 0:
        raise ValueError("bad universe size or length")
    w = np.arange(1, universe_size + 1, dtype=np.float64) ** -exponent
    cdf = np.cumsum(w)
    cdf /= cdf[-1]
    rng = np.random.default_rng(seed)
    ranks = np.searchsorted(cdf, rng.random(length), side="right")
    np.minimum(ranks, universe_size - 1, out=ranks)
    return ranks.astype(np.int64) + universe_start


def mixed_adversary(params: TradeoffAdversaryParams, exponent: float, seed: int,
                    universe_start: int = 0) -> np.ndarray:
    """The disjoint-scan adversary with an equal-length Zipf filler interleaved.

    Within phase ``i`` every scan request is followed by one filler request
    drawn Zipf(``exponent``) over the phase's own block ``S_i`` (popularity
    rank follows a per-phase random permutation).  The filler never leaves
    the current block, so the reference's working set per phase stays
    exactly ``k'`` items.
    """
    adv = tradeoff_adversary(params, universe_start)
    kp, s, t = params.k_prime, params.s, params.t
    per_phase = t * kp
    out = np.empty(2 * adv.size, dtype=np.int64)
    rng = np.random.default_rng(seed)
    for i in range(s):
        lo = universe_start + i * kp
        filler = zipf_trace(kp, exponent, per_phase, int(rng.integers(0, 2**63)))
        perm = rng.permutation(kp)
        seg = slice(2 * i * per_phase, 2 * (i + 1) * per_phase)
        out[seg][0::2] = adv[i * per_phase:(i + 1) * per_phase]
        out[seg][1::2] = perm[filler] + lo
    return out
