"""Set-associative caches built from per-bucket policy instances, with rehashing."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .policies import AccessOutcome, ItemId, Policy, PolicyKind, new_policy

MASK64 = (1 << 64) - 1

NONE = "NONE"
FULL_FLUSH = "FULL-FLUSH"
INCREMENTAL = "INCREMENTAL"
REHASH_MODES = (NONE, FULL_FLUSH, INCREMENTAL)


def mix64(x: int) -> int:
    """splitmix64 finalizer."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(seed: int, generation: int) -> int:
    """Seed of the ``generation``-th hash function drawn from ``seed``."""
    if generation == 0:
        return seed & MASK64
    return mix64((seed & MASK64) ^ mix64(generation))


class HashIndexer:
    """Seeded item -> bucket map standing in for a fully random hash function.

    Results are memoized, so the same (seed, item) always lands in the same
    bucket.  ``mapping`` pins chosen items to chosen buckets (tests use it to
    stage collisions); unpinned items fall back to the mixer.
    """

    def __init__(self, seed: int, bucket_count: int, mapping: Optional[Mapping[ItemId, int]] = None):
        if bucket_count < 1:
            raise ValueError("bucket_count must be >= 1")
        self.seed = seed & MASK64
        self.bucket_count = bucket_count
        self._salt = mix64(self.seed)
        self.memo: dict = dict(mapping) if mapping else {}
        for b in self.memo.values():
            if not 0 <= b < bucket_count:
                raise ValueError(f"pinned bucket {b} out of range")

    def __call__(self, item: ItemId) -> int:
        b = self.memo.get(item)
        if b is None:
            b = mix64((int(item) & MASK64) ^ self._salt) % self.bucket_count
            self.memo[item] = b
        return b

    def __repr__(self):
        return f"HashIndexer(seed={self.seed:#x}, bucket_count={self.bucket_count})"


@dataclass(frozen=True)
class RehashConfig:
    """When and how the cache redraws its hash function.

    ``threshold`` is the number of demand misses between rehashes; when left
    as ``None`` it resolves to ``ceil(k ** d)``.
    """

    mode: str = NONE
    threshold: Optional[int] = None
    d: float = 2.0

    def __post_init__(self):
        if self.mode not in REHASH_MODES:
            raise ValueError(f"unknown rehash mode {self.mode!r}")
        if self.threshold is not None and self.threshold < 1:
            raise ValueError("threshold must be positive")
        if self.d < 2:
            raise ValueError("d must be >= 2")

    def resolve(self, k: int) -> int:
        if self.threshold is not None:
            return self.threshold
        return math.ceil(k ** self.d)


@dataclass(frozen=True)
class SAOutcome(AccessOutcome):
    """Access outcome of a set-associative cache.

    ``forced`` is the part of ``evicted`` caused by rehashing (a full flush or
    an incremental remap eviction) rather than by a bucket's policy.  A hit on
    a not-yet-remapped item may still evict: the item moves into its new
    bucket, which can be full.
    """

    forced: frozenset = frozenset()


class RehashError(RuntimeError):
    pass


class SetAssocCache:
    """``k`` slots split into ``k // alpha`` buckets, each its own policy instance."""

    def __init__(
        self,
        k: int,
        alpha: int,
        kind: PolicyKind | str,
        seed: int = 0,
        rehash: RehashConfig = RehashConfig(),
        *,
        allow_fully_associative: bool = False,
        mapping: Optional[Mapping[ItemId, int]] = None,
    ):
        if alpha < 1 or k < 1:
            raise ValueError("k and alpha must be positive")
        if k % alpha:
            raise ValueError(f"alpha={alpha} does not divide k={k}")
        if alpha == k and not allow_fully_associative:
            raise ValueError("alpha == k is fully associative; pass allow_fully_associative=True")
        if isinstance(kind, str):
            kind = PolicyKind.parse(kind)
        self.k = k
        self.alpha = alpha
        self.n = k // alpha
        self.kind = kind
        self.seed = seed & MASK64
        self.rehash = rehash
        self.threshold = rehash.resolve(k)
        if rehash.mode == INCREMENTAL and self.threshold < k:
            raise ValueError("incremental rehashing needs threshold >= k")
        self.generation = 0
        self.active_indexer = HashIndexer(self.seed, self.n, mapping)
        self.buckets = self._fresh_buckets()
        self.retiring_indexer: Optional[HashIndexer] = None
        self.retiring_buckets: Optional[list] = None
        self.pending_remap: set = set()
        self._pending_order: list = []
        self._pending_pos = 0
        self.miss_counter = 0
        self.rehash_count = 0

    # -- construction helpers -------------------------------------------------

    def _fresh_buckets(self) -> list:
        return [new_policy(self.kind, self.alpha) for _ in range(self.n)]

    def _next_indexer(self) -> HashIndexer:
        self.generation += 1
        return HashIndexer(derive_seed(self.seed, self.generation), self.n)

    # -- queries --------------------------------------------------------------

    @property
    def rehash_in_progress(self) -> bool:
        return self.retiring_indexer is not None

    def contents(self) -> frozenset:
        out = set(self.pending_remap)
        for b in self.buckets:
            out.update(b.contents())
        return frozenset(out)

    def __len__(self):
        return sum(len(b) for b in self.buckets) + len(self.pending_remap)

    def __contains__(self, item):
        return item in self.buckets[self.active_indexer(item)] or item in self.pending_remap

    def bucket_of(self, item: ItemId) -> int:
        return self.active_indexer(item)

    # -- rehashing ------------------------------------------------------------

    def trigger_full_flush(self) -> frozenset:
        if self.rehash.mode != FULL_FLUSH:
            raise RehashError(f"full flush requested in mode {self.rehash.mode}")
        flushed = self.contents()
        self.active_indexer = self._next_indexer()
        self.buckets = self._fresh_buckets()
        self.miss_counter = 0
        self.rehash_count += 1
        return flushed

    def begin_incremental_rehash(self) -> None:
        if self.rehash.mode != INCREMENTAL:
            raise RehashError(f"incremental rehash requested in mode {self.rehash.mode}")
        if self.rehash_in_progress:
            raise RehashError("a rehash is already in progress")
        self.retiring_indexer = self.active_indexer
        self.retiring_buckets = self.buckets
        self.pending_remap = set(self.contents())
        self._pending_order = sorted(self.pending_remap)
        self._pending_pos = 0
        self.active_indexer = self._next_indexer()
        self.buckets = self._fresh_buckets()
        self.miss_counter = 0
        self.rehash_count += 1
        if not self.pending_remap:
            self._finish_rehash()

    def _finish_rehash(self):
        self.retiring_indexer = None
        self.retiring_buckets = None
        self._pending_order = []
        self._pending_pos = 0

    def incremental_evict_step(self) -> Optional[ItemId]:
        """Evict the smallest not-yet-remapped item from its old bucket."""
        if not self.pending_remap:
            return None
        order = self._pending_order
        while order[self._pending_pos] not in self.pending_remap:
            self._pending_pos += 1
        item = order[self._pending_pos]
        self._pending_pos += 1
        self.retiring_buckets[self.retiring_indexer(item)].delete(item)
        self.pending_remap.discard(item)
        if not self.pending_remap:
            self._finish_rehash()
        return item

    def _migrate(self, item: ItemId, bucket: Policy) -> SAOutcome:
        out = bucket.access(item)
        self.retiring_buckets[self.retiring_indexer(item)].delete(item)
        self.pending_remap.discard(item)
        if not self.pending_remap:
            self._finish_rehash()
        return SAOutcome(True, out.evicted)

    # -- the access path ------------------------------------------------------

    def access(self, item: ItemId) -> SAOutcome:
        bucket = self.buckets[self.active_indexer(item)]
        if item in bucket:
            bucket.access(item)
            return SAOutcome(True)
        if item in self.pending_remap:
            return self._migrate(item, bucket)

        mode = self.rehash.mode
        forced: frozenset = frozenset()
        self.miss_counter += 1
        if mode != NONE and self.miss_counter >= self.threshold:
            if mode == FULL_FLUSH:
                forced = self.trigger_full_flush()
            else:
                drained = []
                while self.pending_remap:
                    drained.append(self.incremental_evict_step())
                self.begin_incremental_rehash()
                forced = frozenset(drained)
            bucket = self.buckets[self.active_indexer(item)]

        out = bucket.access(item)
        evicted = out.evicted

        if mode == INCREMENTAL and self.pending_remap:
            step = [self.incremental_evict_step()]
            remaining = self.threshold - self.miss_counter
            if self.pending_remap and len(self.pending_remap) >= remaining:
                while self.pending_remap:
                    step.append(self.incremental_evict_step())
            forced = forced | frozenset(step)

        if forced:
            return SAOutcome(False, evicted | forced, forced)
        return SAOutcome(False, evicted)

    def __repr__(self):
        return (f"SetAssocCache(k={self.k}, alpha={self.alpha}, kind={self.kind}, "
                f"mode={self.rehash.mode}, threshold={self.threshold})")


def sa_new(k, alpha, kind, seed=0, rehash=RehashConfig(), **kw) -> SetAssocCache:
    return SetAssocCache(k, alpha, kind, seed, rehash, **kw)


@dataclass
class PairRunReport:
    """Lockstep comparison of a test cache against a fully associative reference.

    ``bad_evictions`` counts policy evictions of items the reference holds at
    that instant; ``flush_evictions`` counts every rehash-caused eviction.
    ``ledger_violations`` counts prefixes where
    ``misses_test > misses_ref + bad_evictions + flush_evictions``.
    ``snapshots`` holds ``(misses_test, misses_ref, B, F)`` at each requested
    prefix length.
    """

    misses_test: int = 0
    misses_ref: int = 0
    bad_evictions: int = 0
    flush_evictions: int = 0
    ledger_violations: int = 0
    accesses: int = 0
    log: Optional[list] = field(default=None, repr=False)
    snapshots: list = field(default_factory=list, repr=False)

    @property
    def ratio(self) -> float:
        return self.misses_test / self.misses_ref if self.misses_ref else math.inf


def run_pair(
    trace: Iterable[ItemId],
    test: SetAssocCache,
    ref_kind: PolicyKind | str,
    ref_capacity: int,
    *,
    log: bool = False,
    checkpoints: Iterable[int] = (),
) -> PairRunReport:
    ref = new_policy(ref_kind, ref_capacity)
    rep = PairRunReport(log=[] if log else None)
    cps = sorted(checkpoints)
    ci = 0
    t_access, r_access = test.access, ref.access
    mt = mr = bad = fl = viol = n = 0
    for x in trace:
        n += 1
        ot = t_access(x)
        orf = r_access(x)
        if not ot.hit:
            mt += 1
        if not orf.hit:
            mr += 1
        flag = False
        if ot.evicted:
            forced = ot.forced
            fl += len(forced)
            for e in ot.evicted:
                if e not in forced and e in ref:
                    bad += 1
                    flag = True
        if mt > mr + bad + fl:
            viol += 1
        if log:
            rep.log.append((ot.hit, orf.hit, flag))
        while ci < len(cps) and cps[ci] == n:
            rep.snapshots.append((mt, mr, bad, fl))
            ci += 1
    rep.misses_test, rep.misses_ref = mt, mr
    rep.bad_evictions, rep.flush_evictions = bad, fl
    rep.ledger_violations, rep.accesses = viol, n
    return rep
