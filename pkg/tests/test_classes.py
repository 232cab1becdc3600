import pytest

from setassoc import (CLOCK, FIFO, FLUSH_WHEN_FULL, LFU, LRU, REUSE_DISTANCE, BudgetExceeded,
                      SearchSpace, UnsupportedKind, check_conforms, check_conservative,
                      check_family_monotone, check_family_self_similar, check_lazy, check_stable,
                      check_stack, find_belady_anomaly, lru_k, replay_witness)
from setassoc.classes import _restricted_growth_count, audit
from setassoc.policies import LRUKPolicy

SMALL = SearchSpace(3, 6, (1, 2, 3))
MID = SearchSpace(4, 6, (2, 3))


class MinEvictingLRU2(LRUKPolicy):
    """Negative control: evicts the order-minimal resident instead of the maximal one."""

    kind_name = "LRU-2-corrupted"

    def __init__(self, capacity):
        super().__init__(capacity, 2)

    def _victim_key(self, item):
        phi, i = super()._victim_key(item)
        return (-phi, -i)


def failing(verdict, kind):
    return not verdict.passed and replay_witness(kind, verdict)


def test_lazy():
    assert check_lazy(LRU, SMALL).passed
    assert check_lazy(CLOCK, SMALL).passed
    v = check_lazy(FLUSH_WHEN_FULL, SMALL)
    assert failing(v, FLUSH_WHEN_FULL)
    assert len(v.witness["trace"]) == v.witness["capacity"] + 1


@pytest.mark.parametrize("kind", [LRU, FIFO, CLOCK])
def test_conservative_pass(kind):
    assert check_conservative(kind, SMALL).passed


def test_conservative_lfu_counterexample():
    # 0 outranks 1 and 2 on the id tie-break, so 1 and 2 evict each other
    # three times in a window holding only two distinct items
    v = check_conservative(LFU, SMALL)
    assert failing(v, LFU)
    assert v.witness == {"trace": [0, 1, 2, 1], "capacity": 2, "window": [1, 4], "misses": 3}


def test_conservative_fwf_fails():
    v = check_conservative(FLUSH_WHEN_FULL, SMALL)
    assert failing(v, FLUSH_WHEN_FULL)


def test_conservative_single_k():
    v = check_conservative(FLUSH_WHEN_FULL, SMALL, k=2)
    assert not v.passed and v.witness["capacity"] == 2


@pytest.mark.parametrize("kind", [LRU, lru_k(2), LFU, REUSE_DISTANCE])
def test_stack_pass(kind):
    assert check_stack(kind, MID).passed


def test_stack_fifo_fails():
    v = check_stack(FIFO, SearchSpace(4, 6, (2, 3)))
    assert failing(v, FIFO)


def test_stack_single_capacity_vacuous():
    assert check_stack(FIFO, SearchSpace(3, 4, (2,))).passed


def test_stable_small():
    assert check_stable(LRU, SMALL).passed
    v = check_stable(FIFO, SearchSpace(4, 5, (2, 3)))
    assert failing(v, FIFO)


@pytest.mark.parametrize("kind", [LRU, lru_k(2), LFU, REUSE_DISTANCE])
def test_conforms(kind):
    assert check_conforms(kind, MID).passed


def test_conforms_negative_control():
    v = check_conforms(MinEvictingLRU2, SMALL)
    assert failing(v, MinEvictingLRU2)


def test_family_checks_need_family():
    with pytest.raises(UnsupportedKind):
        check_conforms(FIFO, SMALL)
    with pytest.raises(UnsupportedKind):
        check_family_monotone(CLOCK, SMALL)


@pytest.mark.parametrize("kind", [LRU, lru_k(2), LFU])
def test_monotone_and_self_similar(kind):
    assert check_family_monotone(kind, MID).passed
    assert check_family_self_similar(kind, MID).passed


def test_reuse_distance_family_reported():
    v = check_family_monotone(REUSE_DISTANCE, MID)
    if not v.passed:
        assert replay_witness(REUSE_DISTANCE, v)


def test_self_similar_whole_universe_trivial():
    space = SearchSpace(3, 5, (1,), subsets=((0, 1, 2),))
    assert check_family_self_similar(REUSE_DISTANCE, space).passed


def test_belady_lru_free():
    assert find_belady_anomaly(LRU, SearchSpace(4, 8, (2, 3, 4))).passed


def test_belady_fifo_found():
    space = SearchSpace(5, 12, (3, 4), canonical=True)
    v = find_belady_anomaly(FIFO, space)
    assert failing(v, FIFO)
    assert v.witness["cost_a"] > v.witness["cost_b"]


def test_canonical_count():
    # Bell-number style counts: sequences of length 3 over <= 2 labels
    assert _restricted_growth_count(3, 2) == 4
    assert _restricted_growth_count(4, 4) == 15


def test_budget_and_canonical_guards():
    with pytest.raises(BudgetExceeded):
        check_lazy(LRU, SearchSpace(10, 10, (2,), budget=1000))
    with pytest.raises(ValueError):
        check_stack(LRU, SearchSpace(3, 4, (2, 3), canonical=True))


def test_verdicts_deterministic():
    a = [v.as_dict() for v in audit([FIFO, CLOCK], ["STACK", "STABLE"], SearchSpace(4, 6, (2, 3)))]
    b = [v.as_dict() for v in audit([FIFO, CLOCK], ["STACK", "STABLE"], SearchSpace(4, 6, (2, 3)))]
    assert a == b


def test_audit_marks_unsupported():
    (v,) = audit([FIFO], ["CONFORMS"], SMALL)
    assert not v.passed and "unsupported" in v.note


def test_witness_replay_rejects_passing():
    assert not replay_witness(LRU, check_stack(LRU, SMALL))
