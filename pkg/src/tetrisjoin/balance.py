"""Load balancing: dimension partitions and the lift to 2n-2 dimensions.

The first ``n - 2`` attributes of the splitting order are each cut by a
partition ``P`` of the domain into prefix-free intervals. A component ``s``
is then written as ``s'`` (its part inside a member of ``P``) followed by
``s''`` (the rest), and the two halves become separate dimensions placed at
opposite ends of the lifted order::

    (A1', ..., A{n-2}', An, A{n-1}, A{n-2}'', ..., A1'')

Boxes keep exactly the same points after lifting, so running the engine in
the lifted space gives the same answer while the partitions keep the number
of boxes inside any one part small.
"""

from __future__ import annotations

import math
from collections import Counter
from typing import Iterable, Sequence

from .boxindex import BoxOracle, KnowledgeBase
from .dyadic import LAMBDA, Box, bits, length
from .engine import (RunStats, Trace, _permute, _unpermute, check_sao, tetris,
                     tetris_skeleton)


def _sort_key(code: int) -> str:
    return bits(code)


def prefix_counts(components: Iterable[int]) -> Counter:
    """For each interval x, how many components strictly extend x."""
    counts: Counter = Counter()
    for s in components:
        s >>= 1
        while s:
            counts[s] += 1
            s >>= 1
    return counts


def build_balanced_partition(boxes: Sequence[Sequence[int]], attr: int) -> list[int]:
    """Balanced partition of attribute ``attr`` for the box set ``boxes``.

    Starts from the whole domain and keeps halving any part that strictly
    contains more than sqrt(|boxes|) of the boxes' ``attr`` components.
    Returned as interval codes in lexicographic order.
    """
    counts = prefix_counts(b[attr] for b in boxes)
    limit = math.sqrt(len(boxes))
    parts = []
    todo = [LAMBDA]
    while todo:
        x = todo.pop()
        if counts.get(x, 0) > limit:
            todo.extend((x << 1 | 1, x << 1))
        else:
            parts.append(x)
    return sorted(parts, key=_sort_key)


def is_partition(parts: Iterable[int], d: int) -> bool:
    """Prefix-free and covering every length-d string."""
    parts = set(parts)
    total = 0
    for p in parts:
        q = p >> 1
        while q:
            if q in parts:
                return False
            q >>= 1
        if length(p) > d:
            return False
        total += 1 << (d - length(p))
    return total == 1 << d


def split_component(s: int, parts) -> tuple[int, int]:
    """Split ``s`` into (s', s'') with respect to a partition.

    If some member p of the partition is a prefix of ``s`` the split is
    ``(p, rest)``; otherwise ``s`` lies above the partition and the split is
    ``(s, λ)``.
    """
    n = s.bit_length() - 1
    for k in range(n + 1):
        p = s >> (n - k)
        if p in parts:
            rest = n - k
            return p, (1 << rest) | (s & ((1 << rest) - 1))
    return s, LAMBDA


def join_component(head: int, tail: int) -> int:
    """Concatenate two interval strings."""
    k = tail.bit_length() - 1
    return (head << k) | (tail ^ (1 << k))


def balance_box(b: Sequence[int], partitions: Sequence) -> Box:
    """Lift an n-dimensional box (in splitting order) to 2n-2 dimensions."""
    n = len(b)
    m = n - 2
    if len(partitions) != m:
        raise ValueError(f"need {m} partitions for a {n}-dimensional box")
    heads, tails = [], []
    for i in range(m):
        h, t = split_component(b[i], partitions[i])
        heads.append(h)
        tails.append(t)
    return tuple(heads) + (b[n - 1], b[n - 2]) + tuple(reversed(tails))


def unbalance_box(lifted: Sequence[int], n: int) -> Box:
    """Inverse of ``balance_box``."""
    m = n - 2
    if len(lifted) != 2 * n - 2:
        raise ValueError("lifted box has the wrong arity")
    out = [join_component(lifted[i], lifted[2 * n - 3 - i]) for i in range(m)]
    out.append(lifted[m + 1])
    out.append(lifted[m])
    return tuple(out)


class LiftedDomain:
    """Which lifted positions can still be split.

    A head position is exhausted once it names a partition member, a tail
    position once head and tail together reach ``d`` bits, and the two
    middle positions behave as usual.
    """

    def __init__(self, n: int, d: int, partitions: list[set]):
        self.n = n
        self.m = n - 2
        self.d = d
        self.partitions = partitions

    def first_thick(self, b: Sequence[int]) -> int:
        m, d = self.m, self.d
        parts = self.partitions
        for i in range(m):
            if b[i] not in parts[i]:
                return i
        if not b[m] >> d:
            return m
        if not b[m + 1] >> d:
            return m + 1
        last = 2 * m + 1
        for pos in range(m + 2, 2 * m + 2):
            i = last - pos
            if b[pos].bit_length() + b[i].bit_length() - 2 < d:
                return pos
        return -1


def _bypass(oracle, mode, sao, trace):
    stats_mode = "preloaded" if mode == "preloaded-lb" else "reloaded"
    tuples, stats = tetris(oracle, stats_mode, sao, trace=trace)
    stats.extra.update(partition_sizes=[], update_balance_count=0, lb_bypassed=True)
    return tuples, stats


def _lifted_stats(n: int) -> RunStats:
    return RunStats(resolutions_by_attr=[0] * (2 * n - 2))


def tetris_preloaded_lb(oracle: BoxOracle, sao: Sequence[int] | None = None,
                        trace: Trace | None = None) -> tuple[list[Box], RunStats]:
    """Preloaded Tetris on the lifted boxes, partitions built once up front."""
    n, d = oracle.n, oracle.d
    sao = check_sao(sao, n)
    if n < 3:
        return _bypass(oracle, "preloaded-lb", sao, trace)
    boxes = [_permute(b, sao) for b in oracle.boxes()]
    partitions = [set(build_balanced_partition(boxes, i)) for i in range(n - 2)]
    domain = LiftedDomain(n, d, partitions)
    kb = KnowledgeBase(2 * n - 2)
    for b in boxes:
        kb.insert(balance_box(b, partitions))
    stats = _lifted_stats(n)
    tainted: set = set()
    outputs: list[Box] = []
    if trace is not None:
        trace.meta.update(mode="preloaded-lb", sao=list(sao), n=n, d=d, lifted=True)
    top = (LAMBDA,) * (2 * n - 2)
    while True:
        r = tetris_skeleton(kb, top, domain, stats, tainted, trace=trace)
        if r.covered:
            break
        w = r.witness
        stats.probes += 1
        point = unbalance_box(w, n)
        if oracle.all_containing(_unpermute(point, sao)):
            raise RuntimeError("uncovered point lies inside an input box")
        outputs.append(point)
        if trace is not None:
            trace.output(w)
        kb.insert(w)
        tainted.add(w)
    stats.boxes_loaded = len(oracle)
    stats.output_count = len(outputs)
    stats.extra.update(partition_sizes=[len(p) for p in partitions], update_balance_count=0)
    outputs.sort()
    return [_unpermute(t, sao) for t in outputs], stats


class _IndexedKB(KnowledgeBase):
    """Knowledge base that also indexes boxes by head component.

    Only boxes with a non-empty tail are indexed, since those are the only
    ones a partition refinement rewrites.
    """

    def __init__(self, n_orig: int):
        super().__init__(2 * n_orig - 2)
        self.m = n_orig - 2
        self.heads: list[dict[int, set]] = [{} for _ in range(self.m)]

    def insert(self, b) -> bool:
        if not super().insert(b):
            return False
        last = 2 * self.m + 1
        for i in range(self.m):
            if b[last - i] != LAMBDA:
                self.heads[i].setdefault(b[i], set()).add(b)
        return True

    def remove(self, b) -> bool:
        if not super().remove(b):
            return False
        last = 2 * self.m + 1
        for i in range(self.m):
            if b[last - i] != LAMBDA:
                bucket = self.heads[i].get(b[i])
                if bucket is not None:
                    bucket.discard(b)
        return True


def update_balance(kb: KnowledgeBase, attr: int, x: int, n: int,
                   tainted: set | None = None, candidates: Iterable[Box] | None = None) -> int:
    """Rewrite stored boxes after part ``x`` of partition ``attr`` was halved.

    Every stored box whose head is ``x`` and whose tail is ``b·y`` becomes
    head ``x·b``, tail ``y``. Boxes with an empty tail stay as they are.
    Returns the number of rewritten boxes.
    """
    tail_pos = 2 * n - 3 - attr
    if candidates is None:
        candidates = [b for b in kb if b[attr] == x and b[tail_pos] != LAMBDA]
    else:
        candidates = list(candidates)
    rewritten = []
    for b in candidates:
        tail = b[tail_pos]
        k = tail.bit_length() - 1
        if b[attr] != x or k == 0:
            continue
        bit = (tail >> (k - 1)) & 1
        new_tail = (1 << (k - 1)) | (tail & ((1 << (k - 1)) - 1))
        nb = list(b)
        nb[attr] = x << 1 | bit
        nb[tail_pos] = new_tail
        rewritten.append((b, tuple(nb)))
    for b, _ in rewritten:
        kb.remove(b)
    for b, nb in rewritten:
        kb.insert(nb)
        if tainted is not None and b in tainted:
            tainted.discard(b)
            tainted.add(nb)
    return len(rewritten)


def tetris_reloaded_lb(oracle: BoxOracle, sao: Sequence[int] | None = None,
                       trace: Trace | None = None) -> tuple[list[Box], RunStats]:
    """Reloaded Tetris in the lifted space with partitions refined online.

    Partitions start as the whole domain. Whenever loading boxes makes some
    part strictly contain more than sqrt(|C|) loaded boxes (C being all boxes
    loaded so far) that part is halved and the knowledge base is rewritten to
    match. Parts are never merged back.
    """
    n, d = oracle.n, oracle.d
    sao = check_sao(sao, n)
    if n < 3:
        return _bypass(oracle, "reloaded-lb", sao, trace)
    m = n - 2
    partitions: list[set] = [{LAMBDA} for _ in range(m)]
    counts = [Counter() for _ in range(m)]
    domain = LiftedDomain(n, d, partitions)
    kb = _IndexedKB(n)
    stats = _lifted_stats(n)
    tainted: set = set()
    outputs: list[Box] = []
    loaded_total = 0
    updates = 0
    history: list[list[list[int]]] = []
    if trace is not None:
        trace.meta.update(mode="reloaded-lb", sao=list(sao), n=n, d=d, lifted=True)
    top = (LAMBDA,) * (2 * n - 2)
    while True:
        r = tetris_skeleton(kb, top, domain, stats, tainted, trace=trace)
        if r.covered:
            break
        w = r.witness
        stats.probes += 1
        point = unbalance_box(w, n)
        new = [_permute(b, sao) for b in oracle.all_containing(_unpermute(point, sao))]
        if not new:
            outputs.append(point)
            if trace is not None:
                trace.output(w)
            kb.insert(w)
            tainted.add(w)
            continue
        loaded_total += len(new)
        limit = math.sqrt(loaded_total)
        for i in range(m):
            touched = set()
            for b in new:
                s = b[i] >> 1
                while s:
                    counts[i][s] += 1
                    if s in partitions[i]:
                        touched.add(s)
                    s >>= 1
            todo = sorted(touched, key=_sort_key, reverse=True)
            while todo:
                x = todo.pop()
                if x not in partitions[i] or counts[i].get(x, 0) <= limit:
                    continue
                partitions[i].discard(x)
                partitions[i].update((x << 1, x << 1 | 1))
                updates += 1
                if trace is not None:
                    trace.rebalance(i, x)
                update_balance(kb, i, x, n, tainted, kb.heads[i].pop(x, ()))
                todo.extend((x << 1 | 1, x << 1))
        sizes = [len(p) for p in partitions]
        if not history or history[-1] != sizes:
            history.append(sizes)
        lifted = [balance_box(b, partitions) for b in new]
        if trace is not None:
            trace.load(balance_box(point, partitions), lifted)
        for b in lifted:
            if kb.insert(b):
                stats.boxes_loaded += 1
    stats.output_count = len(outputs)
    stats.extra.update(partition_sizes=[len(p) for p in partitions],
                       update_balance_count=updates, partition_history=history)
    outputs.sort()
    return [_unpermute(t, sao) for t in outputs], stats
