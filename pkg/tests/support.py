"""Shared helpers: box literals, random instances, hypothesis strategies."""

from __future__ import annotations

import itertools
import random

from hypothesis import strategies as st

from tetrisjoin.dyadic import interval
from tetrisjoin.verify import brute_force_bcp


def bx(*parts: str) -> tuple[int, ...]:
    """Box literal: bx("10", "*") is <10,λ>."""
    return tuple(interval("" if p in ("*", "") else p) for p in parts)


def members(code: int, d: int) -> set[int]:
    """Integers of an interval, computed from the bitstring text (independent of int_range)."""
    s = bin(code)[3:]
    return {v for v in range(1 << d) if format(v, f"0{d}b").startswith(s)}


def box_points(b, d: int) -> set[tuple[int, ...]]:
    return set(itertools.product(*(sorted(members(c, d)) for c in b)))


def all_intervals(d: int) -> list[int]:
    return [(1 << k) | v for k in range(d + 1) for v in range(1 << k)]


def random_box(rng: random.Random, n: int, d: int, p_lambda: float = 0.3):
    out = []
    for _ in range(n):
        k = 0 if rng.random() < p_lambda else rng.randint(1, d)
        out.append((1 << k) | rng.randrange(1 << k))
    return tuple(out)


def random_bcp(rng: random.Random, max_dn: int = 16, max_out: int = 256, ns=(1, 2, 3, 4)):
    """A random instance (n, d, boxes, expected uncovered points).

    Boxes come from a random dyadic subdivision of the space with some leaves
    dropped, plus a few arbitrary boxes; instances whose output exceeds
    ``max_out`` points are redrawn so that listing the output stays cheap.
    """
    while True:
        n = rng.choice(ns)
        d = rng.randint(1, max(1, max_dn // n))
        leaves, todo = [], [(1,) * n]
        while todo:
            b = todo.pop()
            thick = [i for i in range(n) if not b[i] >> d]
            if not thick or (rng.random() < 0.25 and len(leaves) + len(todo) > 2):
                leaves.append(b)
                continue
            i = rng.choice(thick)
            todo += [b[:i] + (b[i] * 2 + j,) + b[i + 1:] for j in (0, 1)]
            if len(leaves) + len(todo) > 40:
                leaves += todo
                todo = []
        boxes = [b for b in leaves if rng.random() > 0.15]
        boxes += [random_box(rng, n, d) for _ in range(rng.randint(0, n))]
        rng.shuffle(boxes)
        expected = brute_force_bcp(boxes, n, d).uncovered_points
        if len(expected) <= max_out:
            return n, d, boxes, expected


@st.composite
def intervals(draw, d: int):
    k = draw(st.integers(0, d))
    return (1 << k) | draw(st.integers(0, (1 << k) - 1))


@st.composite
def boxes(draw, n: int, d: int):
    return tuple(draw(intervals(d)) for _ in range(n))


def bits_key(b) -> tuple[str, ...]:
    return tuple(bin(c)[3:] for c in b)
