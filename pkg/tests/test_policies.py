import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from setassoc import (CLOCK, FIFO, FLUSH_WHEN_FULL, LFU, LRU, REUSE_DISTANCE, PolicyKind,
                      UnsupportedKind, lru_k, miss_count, new_policy, replay)

A, B, C, D, Y = 0, 1, 2, 3, 4

LAZY_KINDS = [LRU, lru_k(2), lru_k(3), LFU, FIFO, CLOCK, REUSE_DISTANCE]
FAMILY_KINDS = [LRU, lru_k(2), lru_k(3), LFU, REUSE_DISTANCE]
STACK_KINDS = [LRU, lru_k(2), LFU, REUSE_DISTANCE]

traces = st.lists(st.integers(0, 6), max_size=40)


def test_parse_names():
    assert PolicyKind.parse("lru-2") == lru_k(2)
    assert PolicyKind.parse("FWF") == FLUSH_WHEN_FULL
    assert str(lru_k(3)) == "LRU-3"
    with pytest.raises(ValueError):
        PolicyKind.parse("MRU")
    with pytest.raises(ValueError):
        new_policy(LRU, 0)


def test_fresh_instance_is_empty():
    assert new_policy(LRU, 3).contents() == frozenset()


def test_lru_forced_victim():
    p = new_policy(LRU, 3)
    for x in (A, B, C):
        p.access(x)
    out = p.access(D)
    assert not out.hit and out.evicted == {A}


def test_lru_replay_examples():
    assert replay(LRU, 3, [A, B, C, A, B, C]).misses == 3
    assert replay(LRU, 3, [A, B, C, D] * 2).misses == 8
    assert replay(LRU, 2, [A, B, A, C]).contents == {A, C}


def test_lfu_examples():
    assert replay(LFU, 2, [A, A, B, C]).contents == {A, C}
    p = new_policy(LFU, 2)
    p.access(B)
    p.access(C)
    assert p.access(A).evicted == {C}


def test_reuse_distance_evicts_b():
    p = new_policy(REUSE_DISTANCE, 3)
    for x in (A, Y, A, B, Y, Y, B):
        p.access(x)
    assert p.access(C).evicted == {B}


def test_reuse_distance_order():
    p = new_policy(REUSE_DISTANCE, 8)
    for x in (A, Y, A, B, Y, Y, B, C):
        p.access(x)
    key = p.eviction_rank_key
    assert key(Y) < key(A) < key(B)


def test_flush_when_full():
    p = new_policy(FLUSH_WHEN_FULL, 2)
    p.access(A)
    p.access(B)
    out = p.access(C)
    assert out.evicted == {A, B} and p.contents() == {C}


def test_fifo_belady():
    t = [1, 2, 3, 4, 1, 2, 5, 1, 2, 3, 4, 5]
    assert miss_count(FIFO, 4, t) == 10
    assert miss_count(FIFO, 3, t) == 9


def test_rank_key_values():
    p = new_policy(LRU, 4)
    for x in (A, B, B, B, B, B, B):
        p.access(x)
    p.access(C)
    p.access(C)
    p.access(C)
    # A accessed at clock 1, clock is now 10
    assert p.eviction_rank_key(A).phi == 9
    q = new_policy(LRU, 4)
    for x in [B] * 6 + [A] + [B] * 3:
        q.access(x)
    assert q.eviction_rank_key(A).phi == 3
    r = new_policy(lru_k(2), 4)
    r.access(A)
    assert math.isinf(r.eviction_rank_key(A).phi)


def test_unaccessed_rank_after_accessed():
    for kind in FAMILY_KINDS:
        p = new_policy(kind, 4)
        p.access(5)
        assert p.eviction_rank_key(5) < p.eviction_rank_key(1) < p.eviction_rank_key(2)


def test_no_family_kinds_raise():
    for kind in (FIFO, CLOCK, FLUSH_WHEN_FULL):
        p = new_policy(kind, 2)
        p.access(A)
        with pytest.raises(UnsupportedKind):
            p.eviction_rank_key(A)


def test_delete_semantics():
    p = new_policy(LRU, 2)
    p.access(A)
    p.access(B)
    assert not p.delete(C)
    assert p.delete(A) and p.contents() == {B}
    assert p.access(C).evicted == frozenset()
    assert not p.access(A).hit
    q = new_policy(LFU, 2)
    q.access(A)
    q.delete(A)
    assert not q.access(A).hit
    # history survives delete: A now has count 2
    assert q.eviction_rank_key(A).phi == 2


def test_clock_second_chance():
    p = new_policy(CLOCK, 3)
    for x in (A, B, C):
        p.access(x)
    # every bit is set after loading, so a full sweep clears them and evicts A
    assert p.access(D).evicted == {A}
    p.access(B)
    # the hand passes B (bit set again by the hit) and takes C
    assert p.access(Y).evicted == {C}
    assert p.contents() == {B, D, Y}


@given(traces, st.integers(1, 5))
def test_lru1_equals_lru(trace, cap):
    assert replay(lru_k(1), cap, trace).outcomes == replay(LRU, cap, trace).outcomes


@given(traces, st.integers(1, 5))
def test_lazy_outcomes(trace, cap):
    for kind in LAZY_KINDS:
        p = new_policy(kind, cap)
        for x in trace:
            before = p.contents()
            out = p.access(x)
            after = p.contents()
            assert len(after) <= cap
            assert x in after
            assert after - before <= {x}
            assert len(out.evicted) <= 1
            if out.hit:
                assert not out.evicted
            if out.evicted:
                assert len(before) == cap and out.evicted == before - after


@given(traces, st.integers(1, 5))
def test_conformance(trace, cap):
    for kind in FAMILY_KINDS:
        p = new_policy(kind, cap)
        for x in trace:
            before = p.contents()
            out = p.access(x)
            if out.evicted:
                # the order is the one after the access, victim history included
                top = max(before, key=p.eviction_rank_key)
                assert out.evicted == {top}


@given(traces, st.integers(1, 4))
def test_stack_inclusion(trace, cap):
    for kind in STACK_KINDS:
        small, big = new_policy(kind, cap), new_policy(kind, cap + 1)
        for x in trace:
            small.access(x)
            big.access(x)
            assert small.contents() <= big.contents()


@settings(max_examples=50)
@given(st.lists(st.integers(0, 5), min_size=1, max_size=12))
def test_rank_order_is_strict_total(trace):
    for kind in FAMILY_KINDS:
        p = new_policy(kind, 6)
        for x in trace:
            p.access(x)
        keys = {x: p.eviction_rank_key(x) for x in range(8)}
        for x in keys:
            for y in keys:
                if x != y:
                    assert (keys[x] < keys[y]) != (keys[y] < keys[x])
                for z in keys:
                    if keys[x] < keys[y] and keys[y] < keys[z]:
                        assert keys[x] < keys[z]


@given(traces, st.integers(1, 4))
def test_replay_deterministic(trace, cap):
    for kind in LAZY_KINDS + [FLUSH_WHEN_FULL]:
        assert replay(kind, cap, trace).outcomes == replay(kind, cap, trace).outcomes


@given(traces, st.integers(1, 4))
def test_clone_is_independent(trace, cap):
    for kind in LAZY_KINDS:
        p = new_policy(kind, cap)
        for x in trace[: len(trace) // 2]:
            p.access(x)
        q = p.clone()
        rest = trace[len(trace) // 2:]
        assert [p.access(x) for x in rest] == [q.access(x) for x in rest]
