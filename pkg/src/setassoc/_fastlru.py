"""Compiled lockstep runner for set-associative LRU versus fully associative LRU.

Mirrors ``SetAssocCache`` + ``run_pair`` for the LRU kind exactly (same hash,
same seed derivation, same rehash schedule); tests hold the two paths to
identical counts.  Used by the long experiments, which replay tens of
millions of requests.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .cache import FULL_FLUSH, INCREMENTAL, NONE, PairRunReport, derive_seed, mix64

_MODE_CODE = {NONE: 0, FULL_FLUSH: 1, INCREMENTAL: 2}


@njit(cache=True)
def _mix(x):
    x = x + np.uint64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


@njit(cache=True)
def _bucket(raw, salt, n):
    return np.int64(_mix(raw ^ salt) % np.uint64(n))


@njit(cache=True)
def _clear_slot(side, b, s, x, slot_item, slot_time, bcount, loc_side):
    slot_item[side, b, s] = -1
    slot_time[side, b, s] = 0
    bcount[side, b] -= 1
    loc_side[x] = -1


@njit(cache=True)
def _kernel(raw, dense, n_items, n, alpha, mode, threshold, salts, ref_cap, checkpoints):
    slot_item = np.full((2, n, alpha), -1, np.int64)
    slot_time = np.zeros((2, n, alpha), np.int64)
    bcount = np.zeros((2, n), np.int64)
    loc_side = np.full(n_items, -1, np.int64)
    loc_bucket = np.zeros(n_items, np.int64)
    loc_slot = np.zeros(n_items, np.int64)
    pend = np.zeros(n_items, np.bool_)
    pend_list = np.zeros(n_items, np.int64)
    pend_len = 0
    pend_pos = 0
    pend_count = 0
    rehashing = False

    # fully associative LRU reference: doubly linked list, head = most recent
    nxt = np.full(n_items, -1, np.int64)
    prv = np.full(n_items, -1, np.int64)
    in_ref = np.zeros(n_items, np.bool_)
    head = -1
    tail = -1
    ref_size = 0

    out = np.zeros((checkpoints.shape[0], 4), np.int64)
    cp = 0
    cs = 0
    g = 0
    counter = 0
    mt = 0
    mr = 0
    bad = 0
    fl = 0
    viol = 0
    T = raw.shape[0]

    for i in range(T):
        x = dense[i]
        t = i + 1
        victim = -1

        if loc_side[x] == cs:
            slot_time[cs, loc_bucket[x], loc_slot[x]] = t
        elif rehashing and pend[x]:
            b = _bucket(raw[i], salts[g], n)
            # insert into new bucket
            if bcount[cs, b] < alpha:
                s = 0
                while slot_item[cs, b, s] != -1:
                    s += 1
                bcount[cs, b] += 1
            else:
                s = 0
                for j in range(1, alpha):
                    if slot_time[cs, b, j] < slot_time[cs, b, s]:
                        s = j
                victim = slot_item[cs, b, s]
                loc_side[victim] = -1
            # delete from old bucket
            os_ = 1 - cs
            _clear_slot(os_, loc_bucket[x], loc_slot[x], x, slot_item, slot_time, bcount, loc_side)
            slot_item[cs, b, s] = x
            slot_time[cs, b, s] = t
            loc_side[x] = cs
            loc_bucket[x] = b
            loc_slot[x] = s
            pend[x] = False
            pend_count -= 1
            if pend_count == 0:
                rehashing = False
        else:
            mt += 1
            counter += 1
            if mode != 0 and counter >= threshold:
                if mode == 1:
                    for b in range(n):
                        for s in range(alpha):
                            y = slot_item[cs, b, s]
                            if y != -1:
                                fl += 1
                                _clear_slot(cs, b, s, y, slot_item, slot_time, bcount, loc_side)
                    g += 1
                    counter = 0
                else:
                    while pend_count > 0:
                        y = pend_list[pend_pos]
                        pend_pos += 1
                        if pend[y]:
                            _clear_slot(1 - cs, loc_bucket[y], loc_slot[y], y, slot_item, slot_time, bcount, loc_side)
                            pend[y] = False
                            pend_count -= 1
                            fl += 1
                    rehashing = False
                    # begin: every resident of the active side becomes pending
                    pend_len = 0
                    pend_pos = 0
                    for y in range(n_items):
                        if loc_side[y] == cs:
                            pend[y] = True
                            pend_list[pend_len] = y
                            pend_len += 1
                    pend_count = pend_len
                    cs = 1 - cs
                    g += 1
                    counter = 0
                    rehashing = pend_count > 0
            b = _bucket(raw[i], salts[g], n)
            if bcount[cs, b] < alpha:
                s = 0
                while slot_item[cs, b, s] != -1:
                    s += 1
                bcount[cs, b] += 1
            else:
                s = 0
                for j in range(1, alpha):
                    if slot_time[cs, b, j] < slot_time[cs, b, s]:
                        s = j
                victim = slot_item[cs, b, s]
                loc_side[victim] = -1
            slot_item[cs, b, s] = x
            slot_time[cs, b, s] = t
            loc_side[x] = cs
            loc_bucket[x] = b
            loc_slot[x] = s

            if mode == 2 and pend_count > 0:
                steps = 1
                remaining = threshold - counter
                while steps > 0 and pend_count > 0:
                    y = pend_list[pend_pos]
                    pend_pos += 1
                    if pend[y]:
                        _clear_slot(1 - cs, loc_bucket[y], loc_slot[y], y, slot_item, slot_time, bcount, loc_side)
                        pend[y] = False
                        pend_count -= 1
                        fl += 1
                        steps -= 1
                        if steps == 0 and pend_count > 0 and pend_count >= remaining:
                            steps = pend_count
                if pend_count == 0:
                    rehashing = False

        # reference
        if in_ref[x]:
            if head != x:
                p = prv[x]
                q = nxt[x]
                nxt[p] = q
                if q != -1:
                    prv[q] = p
                else:
                    tail = p
                prv[x] = -1
                nxt[x] = head
                prv[head] = x
                head = x
        else:
            mr += 1
            if ref_size == ref_cap:
                y = tail
                in_ref[y] = False
                tail = prv[y]
                if tail != -1:
                    nxt[tail] = -1
                else:
                    head = -1
                prv[y] = -1
                nxt[y] = -1
                ref_size -= 1
            in_ref[x] = True
            prv[x] = -1
            nxt[x] = head
            if head != -1:
                prv[head] = x
            head = x
            if tail == -1:
                tail = x
            ref_size += 1

        if victim != -1 and in_ref[victim]:
            bad += 1
        if mt > mr + bad + fl:
            viol += 1
        while cp < checkpoints.shape[0] and checkpoints[cp] == t:
            out[cp, 0] = mt
            out[cp, 1] = mr
            out[cp, 2] = bad
            out[cp, 3] = fl
            cp += 1

    totals = np.array([mt, mr, bad, fl, viol, g], np.int64)
    return totals, out


def fast_lru_pair(trace, k, alpha, seed, rehash, ref_capacity, checkpoints=()):
    """Run set-associative LRU against fully associative LRU at ``ref_capacity``.

    Returns ``(report, table)``: a ``PairRunReport`` for the whole trace and an
    int array with one ``[misses_sa, misses_ref, B, F]`` row per checkpoint
    (checkpoints are prefix lengths).
    """
    raw = np.asarray(trace, dtype=np.int64)
    if raw.size and raw.min() < 0:
        raise ValueError("item ids must be non-negative")
    if k % alpha:
        raise ValueError(f"alpha={alpha} does not divide k={k}")
    threshold = rehash.resolve(k)
    if rehash.mode == INCREMENTAL and threshold < k:
        raise ValueError("incremental rehashing needs threshold >= k")
    uniq, dense = np.unique(raw, return_inverse=True)
    n_gen = raw.size // threshold + 2 if rehash.mode != NONE else 1
    salts = np.array([mix64(derive_seed(seed, g)) for g in range(n_gen)], dtype=np.uint64)
    cps = np.asarray(sorted(checkpoints), dtype=np.int64)
    totals, table = _kernel(
        raw.astype(np.uint64), dense.astype(np.int64), max(len(uniq), 1), k // alpha, alpha,
        _MODE_CODE[rehash.mode], threshold, salts, ref_capacity, cps,
    )
    mt, mr, bad, fl, viol, _ = (int(v) for v in totals)
    rep = PairRunReport(mt, mr, bad, fl, viol, int(raw.size))
    rep.snapshots = [tuple(int(v) for v in row) for row in table]
    return rep, table
