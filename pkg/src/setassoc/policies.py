"""Single-cache eviction policies and the order families behind them.

Items are plain ``int`` identifiers; their natural order is the tie-break
order used by every order-family policy.
"""
from __future__ import annotations

import math
import re
from collections import OrderedDict, deque
from dataclasses import dataclass, field
from functools import total_ordering
from typing import Iterable, Sequence

INF = math.inf

ItemId = int


class UnsupportedKind(ValueError):
    """Raised when an operation needs an order family the policy lacks."""


@dataclass(frozen=True)
class PolicyKind:
    name: str
    K: int = 1

    NAMES = ("LRU", "LRU-K", "LFU", "FIFO", "CLOCK", "FLUSH-WHEN-FULL", "REUSE-DISTANCE")

    def __post_init__(self):
        if self.name not in self.NAMES:
            raise ValueError(f"unknown policy {self.name!r}")
        if self.K < 1:
            raise ValueError("LRU-K needs K >= 1")

    @classmethod
    def parse(cls, text: str) -> "PolicyKind":
        """Parse ``LRU``, ``LRU-2``, ``LFU``, ``FIFO``, ``CLOCK``, ``FWF`` etc."""
        t = text.strip().upper().replace("_", "-")
        aliases = {"FWF": "FLUSH-WHEN-FULL", "REUSE": "REUSE-DISTANCE", "RD": "REUSE-DISTANCE"}
        t = aliases.get(t, t)
        m = re.fullmatch(r"LRU-(\d+)", t)
        if m:
            return cls("LRU-K", int(m.group(1)))
        return cls(t)

    @property
    def has_order_family(self) -> bool:
        return self.name in ("LRU", "LRU-K", "LFU", "REUSE-DISTANCE")

    @property
    def is_lazy(self) -> bool:
        return self.name != "FLUSH-WHEN-FULL"

    def __str__(self):
        return f"LRU-{self.K}" if self.name == "LRU-K" else self.name


LRU = PolicyKind("LRU")
LFU = PolicyKind("LFU")
FIFO = PolicyKind("FIFO")
CLOCK = PolicyKind("CLOCK")
FLUSH_WHEN_FULL = PolicyKind("FLUSH-WHEN-FULL")
REUSE_DISTANCE = PolicyKind("REUSE-DISTANCE")


def lru_k(K: int) -> PolicyKind:
    return PolicyKind("LRU-K", K)


@dataclass(frozen=True)
class AccessOutcome:
    hit: bool
    evicted: frozenset = frozenset()


_HIT = AccessOutcome(True)
_COLD = AccessOutcome(False)


@total_ordering
@dataclass(frozen=True)
class OrderFamilyKey:
    """Position of an item in the policy's current total order.

    The largest resident under this order is the eviction victim.  ``phi``
    may be ``math.inf``.  With ``larger_phi_is_larger`` false (LFU) a larger
    ``phi`` ranks the item *smaller*.  Unaccessed items rank after every
    accessed one.
    """

    phi: float
    tiebreak: ItemId
    larger_phi_is_larger: bool = True
    accessed: bool = True

    def sort_key(self) -> tuple:
        phi = self.phi if self.larger_phi_is_larger else -self.phi
        return (not self.accessed, phi, self.tiebreak)

    def __lt__(self, other: "OrderFamilyKey") -> bool:
        return self.sort_key() < other.sort_key()

    def __eq__(self, other) -> bool:
        if not isinstance(other, OrderFamilyKey):
            return NotImplemented
        return self.sort_key() == other.sort_key()

    def __hash__(self):
        return hash(self.sort_key())


class Policy:
    """Base class: one eviction policy over a fixed-capacity cache."""

    kind: PolicyKind

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.clock = 0

    def __len__(self):
        return len(self._resident)

    def __contains__(self, item):
        return item in self._resident

    def contents(self) -> frozenset:
        return frozenset(self._resident)

    def access(self, item: ItemId) -> AccessOutcome:
        raise NotImplementedError

    def delete(self, item: ItemId) -> bool:
        raise NotImplementedError

    def eviction_rank_key(self, item: ItemId) -> OrderFamilyKey:
        raise UnsupportedKind(f"{self.kind} has no order family")

    def clone(self) -> "Policy":
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} {self.kind} cap={self.capacity} resident={sorted(self._resident)}>"


class LRUPolicy(Policy):
    kind = LRU

    def __init__(self, capacity):
        super().__init__(capacity)
        self._resident: OrderedDict = OrderedDict()
        self._last: dict = {}

    def access(self, item):
        self.clock += 1
        self._last[item] = self.clock
        res = self._resident
        if item in res:
            res.move_to_end(item)
            return _HIT
        res[item] = None
        if len(res) > self.capacity:
            victim, _ = res.popitem(last=False)
            return AccessOutcome(False, frozenset((victim,)))
        return _COLD

    def delete(self, item):
        if item in self._resident:
            del self._resident[item]
            return True
        return False

    def eviction_rank_key(self, item):
        t = self._last.get(item)
        if t is None:
            return OrderFamilyKey(INF, item, True, accessed=False)
        return OrderFamilyKey(self.clock - t, item)

    def clone(self):
        new = LRUPolicy.__new__(LRUPolicy)
        new.capacity, new.clock = self.capacity, self.clock
        new._resident = self._resident.copy()
        new._last = self._last.copy()
        return new


class _OrderFamilyPolicy(Policy):
    """Lazy policy that always evicts the order-maximal resident."""

    def __init__(self, capacity):
        super().__init__(capacity)
        self._resident: set = set()

    def _record(self, item):
        raise NotImplementedError

    def _victim_key(self, item):
        # sortable stand-in for eviction_rank_key, residents are all accessed
        raise NotImplementedError

    def access(self, item):
        self.clock += 1
        self._record(item)
        res = self._resident
        if item in res:
            return _HIT
        evicted = frozenset()
        if len(res) >= self.capacity:
            victim = max(res, key=self._victim_key)
            res.discard(victim)
            evicted = frozenset((victim,))
        res.add(item)
        return AccessOutcome(False, evicted) if evicted else _COLD

    def delete(self, item):
        if item in self._resident:
            self._resident.discard(item)
            return True
        return False

    def _clone_base(self):
        new = type(self).__new__(type(self))
        new.capacity, new.clock = self.capacity, self.clock
        new._resident = set(self._resident)
        return new


class LRUKPolicy(_OrderFamilyPolicy):
    def __init__(self, capacity, K):
        super().__init__(capacity)
        self.kind = lru_k(K)
        self.K = K
        self._hist: dict = {}

    def _record(self, item):
        h = self._hist.get(item)
        if h is None:
            h = self._hist[item] = deque(maxlen=self.K)
        h.append(self.clock)

    def _phi(self, item):
        h = self._hist[item]
        return self.clock - h[0] if len(h) == self.K else INF

    def _victim_key(self, item):
        return (self._phi(item), item)

    def eviction_rank_key(self, item):
        if item not in self._hist:
            return OrderFamilyKey(INF, item, True, accessed=False)
        return OrderFamilyKey(self._phi(item), item)

    def clone(self):
        new = self._clone_base()
        new.kind, new.K = self.kind, self.K
        new._hist = {x: deque(h, maxlen=self.K) for x, h in self._hist.items()}
        return new


class LFUPolicy(_OrderFamilyPolicy):
    kind = LFU

    def __init__(self, capacity):
        super().__init__(capacity)
        self._count: dict = {}

    def _record(self, item):
        self._count[item] = self._count.get(item, 0) + 1

    def _victim_key(self, item):
        return (-self._count[item], item)

    def eviction_rank_key(self, item):
        c = self._count.get(item, 0)
        return OrderFamilyKey(c, item, False, accessed=c > 0)

    def clone(self):
        new = self._clone_base()
        new._count = self._count.copy()
        return new


class ReuseDistancePolicy(_OrderFamilyPolicy):
    """Evicts the resident with the largest gap between its last two accesses."""

    kind = REUSE_DISTANCE

    def __init__(self, capacity):
        super().__init__(capacity)
        self._last: dict = {}
        self._gap: dict = {}

    def _record(self, item):
        prev = self._last.get(item)
        if prev is not None:
            self._gap[item] = self.clock - prev - 1
        self._last[item] = self.clock

    def _victim_key(self, item):
        return (self._gap.get(item, INF), item)

    def eviction_rank_key(self, item):
        if item not in self._last:
            return OrderFamilyKey(INF, item, True, accessed=False)
        return OrderFamilyKey(self._gap.get(item, INF), item)

    def clone(self):
        new = self._clone_base()
        new._last = self._last.copy()
        new._gap = self._gap.copy()
        return new


class FIFOPolicy(Policy):
    kind = FIFO

    def __init__(self, capacity):
        super().__init__(capacity)
        self._resident: OrderedDict = OrderedDict()

    def access(self, item):
        self.clock += 1
        res = self._resident
        if item in res:
            return _HIT
        res[item] = None
        if len(res) > self.capacity:
            victim, _ = res.popitem(last=False)
            return AccessOutcome(False, frozenset((victim,)))
        return _COLD

    def delete(self, item):
        if item in self._resident:
            del self._resident[item]
            return True
        return False

    def clone(self):
        new = FIFOPolicy.__new__(FIFOPolicy)
        new.capacity, new.clock = self.capacity, self.clock
        new._resident = self._resident.copy()
        return new


class ClockPolicy(Policy):
    """Second-chance clock: one reference bit per slot.

    The bit is set whenever the slot's item is referenced, including the
    reference that loads it.  On a miss with every slot taken the hand
    sweeps, clearing set bits, and replaces the first clear slot.
    """

    kind = CLOCK

    def __init__(self, capacity):
        super().__init__(capacity)
        self._slots: list = [None] * capacity
        self._ref: list = [False] * capacity
        self._resident: dict = {}  # item -> slot index
        self.hand = 0

    def access(self, item):
        self.clock += 1
        res = self._resident
        slot = res.get(item)
        if slot is not None:
            self._ref[slot] = True
            return _HIT
        if len(res) < self.capacity:
            slot = self._slots.index(None)
            self._slots[slot] = item
            self._ref[slot] = True
            res[item] = slot
            return _COLD
        while self._ref[self.hand]:
            self._ref[self.hand] = False
            self.hand = (self.hand + 1) % self.capacity
        slot = self.hand
        victim = self._slots[slot]
        del res[victim]
        self._slots[slot] = item
        self._ref[slot] = True
        res[item] = slot
        self.hand = (slot + 1) % self.capacity
        return AccessOutcome(False, frozenset((victim,)))

    def delete(self, item):
        slot = self._resident.pop(item, None)
        if slot is None:
            return False
        self._slots[slot] = None
        self._ref[slot] = False
        return True

    def clone(self):
        new = ClockPolicy.__new__(ClockPolicy)
        new.capacity, new.clock, new.hand = self.capacity, self.clock, self.hand
        new._slots = list(self._slots)
        new._ref = list(self._ref)
        new._resident = dict(self._resident)
        return new


class FlushWhenFullPolicy(Policy):
    kind = FLUSH_WHEN_FULL

    def __init__(self, capacity):
        super().__init__(capacity)
        self._resident: set = set()

    def access(self, item):
        self.clock += 1
        res = self._resident
        if item in res:
            return _HIT
        evicted = frozenset()
        if len(res) >= self.capacity:
            evicted = frozenset(res)
            res.clear()
        res.add(item)
        return AccessOutcome(False, evicted) if evicted else _COLD

    def delete(self, item):
        if item in self._resident:
            self._resident.discard(item)
            return True
        return False

    def clone(self):
        new = FlushWhenFullPolicy.__new__(FlushWhenFullPolicy)
        new.capacity, new.clock = self.capacity, self.clock
        new._resident = set(self._resident)
        return new


def new_policy(kind: PolicyKind | str, capacity: int) -> Policy:
    if isinstance(kind, str):
        kind = PolicyKind.parse(kind)
    if capacity < 1:
        raise ValueError("capacity must be >= 1")
    name = kind.name
    if name == "LRU" or (name == "LRU-K" and kind.K == 1):
        return LRUPolicy(capacity)
    if name == "LRU-K":
        return LRUKPolicy(capacity, kind.K)
    if name == "LFU":
        return LFUPolicy(capacity)
    if name == "REUSE-DISTANCE":
        return ReuseDistancePolicy(capacity)
    if name == "FIFO":
        return FIFOPolicy(capacity)
    if name == "CLOCK":
        return ClockPolicy(capacity)
    return FlushWhenFullPolicy(capacity)


@dataclass
class ReplayResult:
    contents: frozenset
    misses: int
    outcomes: list = field(repr=False)

    def __iter__(self):
        return iter((self.contents, self.misses, self.outcomes))


def replay(kind: PolicyKind | str, capacity: int, trace: Iterable[ItemId]) -> ReplayResult:
    """Fold ``access`` over ``trace`` from a fresh policy instance."""
    policy = new_policy(kind, capacity)
    outcomes = [policy.access(x) for x in trace]
    misses = sum(1 for o in outcomes if not o.hit)
    return ReplayResult(policy.contents(), misses, outcomes)


def miss_count(kind: PolicyKind | str, capacity: int, trace: Sequence[ItemId]) -> int:
    policy = new_policy(kind, capacity)
    access = policy.access
    return sum(1 for x in trace if not access(x).hit)
