"""Trace-driven paging lab for set-associative caches."""

__version__ = "0.1.0"

from .policies import (CLOCK, FIFO, FLUSH_WHEN_FULL, LFU, LRU, REUSE_DISTANCE, AccessOutcome,
                       OrderFamilyKey, Policy, PolicyKind, UnsupportedKind, lru_k, miss_count,
                       new_policy, replay)
from .cache import (FULL_FLUSH, INCREMENTAL, NONE, HashIndexer, PairRunReport, RehashConfig,
                    RehashError, SAOutcome, SetAssocCache, run_pair, sa_new)
from .classes import (BudgetExceeded, ClassVerdict, SearchSpace, audit, check_conforms,
                      check_conservative, check_family_monotone, check_family_self_similar,
                      check_lazy, check_stable, check_stack, find_belady_anomaly, replay_witness)
from .adversary import (TradeoffAdversaryParams, fixed_set_cycler, mixed_adversary,
                        tradeoff_adversary, zipf_trace)
from .ballsbins import (BallsBinsParams, SaturationStats, exact_overflow_probability, f_bound,
                        mc_overflow_probability, mc_saturated_bins)
from .opt import compute_opt_cost
from .experiments import (ExperimentConfig, LongRunRow, SweepRow, TraceSource, run_rehash_longrun,
                          run_threshold_sweep)
from .io import emit_report, load_trace, save_trace


def sa_access(cache: SetAssocCache, item: int) -> SAOutcome:
    return cache.access(item)
