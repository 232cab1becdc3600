"""Bounded exhaustive checks of paging-algorithm classes.

Every check enumerates all request sequences of length <= ``max_len`` over
``universe_size`` items in length-then-lexicographic order, so the first
counterexample found is the minimal one.  Items are ``0..u-1``.

Each check returns a :class:`ClassVerdict`; failing verdicts carry a witness
that :func:`replay_witness` re-checks from scratch with fresh policies.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

from .policies import Policy, PolicyKind, UnsupportedKind, new_policy

LAZY = "LAZY"
CONSERVATIVE = "CONSERVATIVE"
STACK = "STACK"
STABLE = "STABLE"
CONFORMS = "CONFORMS"
MONOTONE_FAMILY = "MONOTONE-FAMILY"
SELF_SIMILAR_FAMILY = "SELF-SIMILAR-FAMILY"
BELADY_ANOMALY_FREE = "BELADY-ANOMALY-FREE"

DEFAULT_BUDGET = 10**7

KindLike = Union[PolicyKind, str, Callable[[int], Policy]]


class BudgetExceeded(ValueError):
    pass


@dataclass(frozen=True)
class SearchSpace:
    universe_size: int = 4
    max_len: int = 8
    capacities: tuple = (2, 3, 4)
    subsets: Optional[tuple] = None  # None means every subset of the universe
    budget: int = DEFAULT_BUDGET
    # only traces whose items first appear in increasing order; sound for
    # kinds that ignore item labels (FIFO, CLOCK, LRU, FLUSH-WHEN-FULL)
    canonical: bool = False

    def __post_init__(self):
        object.__setattr__(self, "capacities", tuple(sorted(set(self.capacities))))
        if self.universe_size < 1 or self.max_len < 1 or not self.capacities:
            raise ValueError("empty search space")
        if min(self.capacities) < 1:
            raise ValueError("capacities must be positive")

    @property
    def size(self) -> int:
        if self.canonical:
            return _restricted_growth_count(self.max_len, self.universe_size)
        return self.universe_size ** self.max_len

    def require_budget(self):
        if self.size > self.budget:
            raise BudgetExceeded(
                f"{self.size} traces of length {self.max_len} over {self.universe_size} items "
                f"exceeds budget {self.budget}")

    def require_full(self):
        if self.canonical:
            raise ValueError("canonical enumeration only supports the Belady search")
        self.require_budget()

    def subset_family(self) -> list:
        if self.subsets is not None:
            fam = [frozenset(s) for s in self.subsets]
        else:
            u = range(self.universe_size)
            fam = [frozenset(c) for r in range(1, self.universe_size + 1)
                   for c in itertools.combinations(u, r)]
        return sorted(set(fam), key=lambda s: (len(s), sorted(s)))

    def as_dict(self) -> dict:
        return {
            "universe_size": self.universe_size,
            "max_len": self.max_len,
            "capacities": list(self.capacities),
            "subsets": "all" if self.subsets is None else [sorted(s) for s in self.subsets],
            "canonical": self.canonical,
        }


def _restricted_growth_count(n: int, u: int) -> int:
    # sequences of length n over <= u labels, first occurrences in order
    row = [1] + [0] * u  # row[j]: sequences using exactly j labels
    for _ in range(n):
        row = [0] + [row[j] * j + row[j - 1] for j in range(1, u + 1)]
    return sum(row)


@dataclass
class ClassVerdict:
    predicate: str
    kind: str
    passed: bool
    witness: Optional[dict] = None
    space: dict = field(default_factory=dict)
    note: str = ""

    def as_dict(self) -> dict:
        return {"predicate": self.predicate, "kind": self.kind, "pass": self.passed,
                "witness": self.witness, "space": self.space, "note": self.note}


def _factory(kind: KindLike) -> tuple:
    if callable(kind) and not isinstance(kind, (PolicyKind, str)):
        name = getattr(kind, "kind_name", getattr(kind, "__name__", "custom"))
        return kind, str(name)
    if isinstance(kind, str):
        kind = PolicyKind.parse(kind)
    return (lambda c: new_policy(kind, c)), str(kind)


def _traces(space: SearchSpace, min_len: int = 1):
    u = range(space.universe_size)
    for n in range(min_len, space.max_len + 1):
        yield from itertools.product(u, repeat=n)


def restrict(trace: Sequence[int], subset) -> tuple:
    return tuple(x for x in trace if x in subset)


class _Table:
    """Per-trace replay results for every capacity in the space.

    ``state[c][trace] = (contents, evicted_at_last_access, cumulative_misses)``
    and ``keys[trace]`` maps every item of ``trace`` to its order-family sort
    key after ``trace`` (only when ``with_keys``).
    """

    def __init__(self, factory, space: SearchSpace, with_keys: bool = False):
        self.space = space
        self.state: dict = {c: {(): (frozenset(), frozenset(), 0)} for c in space.capacities}
        self.keys: dict = {(): {}}
        u = range(space.universe_size)
        level = {c: {(): factory(c)} for c in space.capacities}
        key_level = {(): factory(max(space.universe_size, 1))} if with_keys else None
        for _ in range(space.max_len):
            nxt = {c: {} for c in space.capacities}
            for c in space.capacities:
                table = self.state[c]
                for trace, pol in level[c].items():
                    misses = table[trace][2]
                    for z in u:
                        p = pol.clone()
                        out = p.access(z)
                        t2 = trace + (z,)
                        nxt[c][t2] = p
                        table[t2] = (p.contents(), out.evicted, misses + (not out.hit))
            level = nxt
            if with_keys:
                nxt_keys = {}
                for trace, pol in key_level.items():
                    for z in u:
                        p = pol.clone()
                        p.access(z)
                        t2 = trace + (z,)
                        nxt_keys[t2] = p
                        self.keys[t2] = {x: p.eviction_rank_key(x).sort_key() for x in set(t2)}
                key_level = nxt_keys


def _verdict(pred, name, space, witness=None, note=""):
    return ClassVerdict(pred, name, witness is None, witness, space.as_dict(), note)


def check_lazy(kind: KindLike, space: SearchSpace = SearchSpace()) -> ClassVerdict:
    """Fetch on demand only, evict at most one item per miss, evict only when full."""
    space.require_full()
    factory, name = _factory(kind)
    tab = _Table(factory, space)
    for trace in _traces(space):
        tau, z = trace[:-1], trace[-1]
        for c in space.capacities:
            before = tab.state[c][tau][0]
            after, _, _ = tab.state[c][trace]
            evicted = before - after
            fetched = after - before
            reason = None
            if len(evicted) > 1:
                reason = "evicted more than one item"
            elif evicted and z in before:
                reason = "evicted on a hit"
            elif evicted and len(before) < c:
                reason = "evicted while not full"
            elif fetched - {z}:
                reason = "fetched an unrequested item"
            if reason:
                return _verdict(LAZY, name, space, {
                    "trace": list(trace), "capacity": c, "evicted": sorted(evicted), "reason": reason})
    return _verdict(LAZY, name, space)


def check_conservative(kind: KindLike, space: SearchSpace = SearchSpace(), k: Optional[int] = None) -> ClassVerdict:
    """At most ``k`` misses on any window holding at most ``k`` distinct items."""
    space.require_full()
    factory, name = _factory(kind)
    caps = (k,) if k is not None else space.capacities
    sub = SearchSpace(space.universe_size, space.max_len, caps, space.subsets, space.budget)
    tab = _Table(factory, sub)
    for trace in _traces(sub):
        n = len(trace)
        for c in caps:
            table = tab.state[c]
            end = table[trace][2]
            seen = set()
            for i in range(n - 1, -1, -1):
                seen.add(trace[i])
                if len(seen) > c:
                    break
                if end - table[trace[:i]][2] > c:
                    return _verdict(CONSERVATIVE, name, space, {
                        "trace": list(trace), "capacity": c, "window": [i, n],
                        "misses": end - table[trace[:i]][2]})
    return _verdict(CONSERVATIVE, name, space)


def check_stack(kind: KindLike, space: SearchSpace = SearchSpace()) -> ClassVerdict:
    """Contents at each capacity are contained in contents at the next capacity."""
    space.require_full()
    factory, name = _factory(kind)
    caps = space.capacities
    pairs = list(zip(caps, caps[1:]))
    if not pairs:
        return _verdict(STACK, name, space, note="single capacity: vacuous")
    tab = _Table(factory, space)
    for trace in _traces(space):
        for small, big in pairs:
            s = tab.state[small][trace][0]
            b = tab.state[big][trace][0]
            if not s <= b:
                return _verdict(STACK, name, space, {
                    "trace": list(trace), "a": big, "b": small, "violating": sorted(s - b)})
    return _verdict(STACK, name, space)


def check_stable(kind: KindLike, space: SearchSpace = SearchSpace()) -> ClassVerdict:
    """Quantifies over tau, X containing z, and capacities a > b.

    Violation: the b-instance fed ``tau[X] z`` evicts something the a-instance
    fed ``tau z`` still holds, yet keeps an item the a-instance lacks.
    """
    space.require_full()
    factory, name = _factory(kind)
    caps = space.capacities
    pairs = [(a, b) for a in caps for b in caps if a > b]
    tab = _Table(factory, space)
    family = space.subset_family()
    for trace in _traces(space):
        z = trace[-1]
        tau = trace[:-1]
        for X in family:
            if z not in X:
                continue
            sub = restrict(tau, X)
            sub_z = sub + (z,)
            for a, b in pairs:
                small_before = tab.state[b][sub][0]
                small_after = tab.state[b][sub_z][0]
                big_after = tab.state[a][trace][0]
                out = small_before - small_after
                if out & big_after and not small_after <= big_after:
                    return _verdict(STABLE, name, space, {
                        "trace": list(trace), "subset": sorted(X), "item": z, "a": a, "b": b,
                        "evicted_by_b": sorted(out), "violating": sorted(small_after - big_after)})
    return _verdict(STABLE, name, space)


def _require_family(factory, name):
    try:
        p = factory(1)
        p.access(0)
        p.eviction_rank_key(0)
    except UnsupportedKind as exc:
        raise UnsupportedKind(f"{name}: unsupported kind (no order family)") from exc


def check_conforms(kind: KindLike, space: SearchSpace = SearchSpace()) -> ClassVerdict:
    """Every eviction removes the order-maximal resident (lazy kinds only)."""
    space.require_full()
    factory, name = _factory(kind)
    _require_family(factory, name)
    tab = _Table(factory, space, with_keys=True)
    for trace in _traces(space):
        tau = trace[:-1]
        keys = tab.keys[trace]
        for c in space.capacities:
            evicted = tab.state[c][trace][1]
            if not evicted:
                continue
            before = tab.state[c][tau][0]
            top = max(before, key=keys.__getitem__)
            if evicted != {top}:
                return _verdict(CONFORMS, name, space, {
                    "trace": list(trace), "capacity": c, "evicted": sorted(evicted), "expected": top})
    return _verdict(CONFORMS, name, space)


def _precedes(keys, x, y):
    return keys[x] <= keys[y]


def check_family_monotone(kind: KindLike, space: SearchSpace = SearchSpace()) -> ClassVerdict:
    """For x, y, z in sigma with y != z: x below y after sigma stays so after sigma z."""
    space.require_full()
    factory, name = _factory(kind)
    _require_family(factory, name)
    tab = _Table(factory, SearchSpace(space.universe_size, space.max_len, (1,), space.subsets, space.budget),
                 with_keys=True)
    for trace in _traces(space, min_len=2):
        sigma, z = trace[:-1], trace[-1]
        if z not in sigma:
            continue
        k0, k1 = tab.keys[sigma], tab.keys[trace]
        items = sorted(set(sigma))
        for x in items:
            for y in items:
                if y == z or x == y:
                    continue
                if _precedes(k0, x, y) and not _precedes(k1, x, y):
                    return _verdict(MONOTONE_FAMILY, name, space, {
                        "trace": list(sigma), "item": z, "x": x, "y": y})
    return _verdict(MONOTONE_FAMILY, name, space)


def check_family_self_similar(kind: KindLike, space: SearchSpace = SearchSpace()) -> ClassVerdict:
    """x below y after sigma[X] implies x below y after sigma."""
    space.require_full()
    factory, name = _factory(kind)
    _require_family(factory, name)
    tab = _Table(factory, SearchSpace(space.universe_size, space.max_len, (1,), space.subsets, space.budget),
                 with_keys=True)
    family = space.subset_family()
    for sigma in _traces(space):
        full = tab.keys[sigma]
        for X in family:
            sub = restrict(sigma, X)
            if len(set(sub)) < 2:
                continue
            ks = tab.keys[sub]
            items = sorted(set(sub))
            for x in items:
                for y in items:
                    if x != y and _precedes(ks, x, y) and not _precedes(full, x, y):
                        return _verdict(SELF_SIMILAR_FAMILY, name, space, {
                            "trace": list(sigma), "subset": sorted(X), "x": x, "y": y})
    return _verdict(SELF_SIMILAR_FAMILY, name, space)


def find_belady_anomaly(kind: KindLike, space: SearchSpace = SearchSpace()) -> ClassVerdict:
    """Search for a trace on which a larger cache misses more than a smaller one.

    Depth-first in lexicographic order; once an anomaly of length ``n`` is
    found only shorter traces are explored, so the result is the
    length-then-lex minimum.  Memory stays proportional to ``max_len``.
    """
    space.require_budget()
    factory, name = _factory(kind)
    caps = space.capacities
    best = None
    limit = space.max_len
    u = space.universe_size

    root = [factory(c) for c in caps]
    # explicit stack of (trace, policies, miss counts)
    stack = [((), root, [0] * len(caps))]
    while stack:
        trace, pols, misses = stack.pop()
        if trace and best is None or (trace and len(trace) < len(best)):
            for i in range(len(caps)):
                for j in range(i):
                    if misses[i] > misses[j]:
                        best = trace
                        limit = len(trace) - 1
                        break
                else:
                    continue
                break
        if len(trace) >= limit:
            continue
        top = min(u, max(trace, default=-1) + 2) if space.canonical else u
        for z in range(top - 1, -1, -1):
            new_pols, new_m = [], []
            for p, m in zip(pols, misses):
                q = p.clone()
                new_m.append(m + (not q.access(z).hit))
                new_pols.append(q)
            stack.append((trace + (z,), new_pols, new_m))
    if best is None:
        return _verdict(BELADY_ANOMALY_FREE, name, space)
    costs = {c: _miss(factory, c, best) for c in caps}
    a, b = next((a, b) for a in reversed(caps) for b in caps if a > b and costs[a] > costs[b])
    return _verdict(BELADY_ANOMALY_FREE, name, space, {
        "trace": list(best), "a": a, "b": b, "cost_a": costs[a], "cost_b": costs[b]})


def _miss(factory, capacity, trace):
    p = factory(capacity)
    return sum(1 for x in trace if not p.access(x).hit)


def _run(factory, capacity, trace):
    """Replay from scratch; returns (contents before last access, after, evicted)."""
    p = factory(capacity)
    for x in trace[:-1]:
        p.access(x)
    before = p.contents()
    out = p.access(trace[-1]) if trace else None
    return before, p.contents(), (out.evicted if out else frozenset())


def replay_witness(kind: KindLike, verdict: ClassVerdict) -> bool:
    """Re-derive a failing verdict's violation with fresh policy instances."""
    if verdict.passed or verdict.witness is None:
        return False
    factory, _ = _factory(kind)
    w = verdict.witness
    pred = verdict.predicate
    trace = tuple(w["trace"])
    if pred == LAZY:
        c = w["capacity"]
        before, after, _ = _run(factory, c, trace)
        ev, fetched = before - after, after - before
        return (len(ev) > 1 or (ev and trace[-1] in before) or (ev and len(before) < c)
                or bool(fetched - {trace[-1]}))
    if pred == CONSERVATIVE:
        c = w["capacity"]
        i, j = w["window"]
        window = trace[i:j]
        return (len(set(window)) <= c
                and _miss(factory, c, trace) - _miss(factory, c, trace[:i]) > c)
    if pred == STACK:
        s = _run(factory, w["b"], trace)[1]
        b = _run(factory, w["a"], trace)[1]
        return not s <= b
    if pred == STABLE:
        X, z = set(w["subset"]), w["item"]
        if z not in X or trace[-1] != z:
            return False
        sub = restrict(trace, X)
        before, after, _ = _run(factory, w["b"], sub)
        big = _run(factory, w["a"], trace)[1]
        return bool((before - after) & big) and not after <= big
    if pred == CONFORMS:
        c = w["capacity"]
        before, _, ev = _run(factory, c, trace)
        keyer = factory(max(len(set(trace)), 1))
        for x in trace:
            keyer.access(x)
        top = max(before, key=lambda x: keyer.eviction_rank_key(x).sort_key())
        return bool(ev) and ev != {top}
    if pred in (MONOTONE_FAMILY, SELF_SIMILAR_FAMILY):
        def keys_after(seq):
            p = factory(max(len(set(seq)), 1))
            for x in seq:
                p.access(x)
            return lambda v: p.eviction_rank_key(v).sort_key()
        x, y = w["x"], w["y"]
        if pred == MONOTONE_FAMILY:
            k0, k1 = keys_after(trace), keys_after(trace + (w["item"],))
            return y != w["item"] and k0(x) <= k0(y) and not k1(x) <= k1(y)
        ks, kf = keys_after(restrict(trace, set(w["subset"]))), keys_after(trace)
        return ks(x) <= ks(y) and not kf(x) <= kf(y)
    if pred == BELADY_ANOMALY_FREE:
        return w["a"] > w["b"] and _miss(factory, w["a"], trace) > _miss(factory, w["b"], trace)
    raise ValueError(f"unknown predicate {pred}")


CHECKS = {
    LAZY: check_lazy,
    CONSERVATIVE: check_conservative,
    STACK: check_stack,
    STABLE: check_stable,
    CONFORMS: check_conforms,
    MONOTONE_FAMILY: check_family_monotone,
    SELF_SIMILAR_FAMILY: check_family_self_similar,
    BELADY_ANOMALY_FREE: find_belady_anomaly,
}


def audit(kinds, predicates=None, space: SearchSpace = SearchSpace()) -> list:
    """Run every predicate on every kind; kinds without an order family get a
    failing verdict with note ``unsupported kind`` for the family predicates."""
    predicates = list(predicates or CHECKS)
    out = []
    for kind in kinds:
        for pred in predicates:
            try:
                out.append(CHECKS[pred](kind, space))
            except UnsupportedKind:
                out.append(ClassVerdict(pred, str(kind), False, None, space.as_dict(), "unsupported kind"))
    return out
