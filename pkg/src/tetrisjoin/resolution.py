"""Geometric resolution between dyadic boxes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

from .dyadic import LAMBDA, Box, comparable, points_of

Taint = Literal["gap", "output"]


@dataclass(frozen=True)
class Resolvent:
    box: Box
    parents: tuple[Box, Box]
    dimension: int
    taint: Taint


def _adjacent(a: int, b: int) -> bool:
    # a = x0 and b = x1 for some x (a, b both non-empty)
    return a > 1 and b == a + 1 and not a & 1


def can_resolve(w1: Sequence[int], w2: Sequence[int]) -> int | None:
    """Smallest position where the two boxes can be resolved, or None.

    A position qualifies when the boxes hold sibling halves ``x0``/``x1`` there
    (in either order) and every other pair of components is nested.
    """
    if len(w1) != len(w2):
        raise ValueError("boxes have different arity")
    candidates = [i for i, (a, b) in enumerate(zip(w1, w2))
                  if _adjacent(a, b) or _adjacent(b, a)]
    if not candidates:
        return None
    for ell in candidates:
        if all(comparable(a, b) for i, (a, b) in enumerate(zip(w1, w2)) if i != ell):
            return ell
    return None


def resolve(w1: Sequence[int], w2: Sequence[int], ell: int) -> Box:
    """Resolvent of two boxes on position ``ell``.

    Position ``ell`` becomes the common parent string, every other position
    the longer (more specific) of the two components.
    """
    a, b = w1[ell], w2[ell]
    if not (_adjacent(a, b) or _adjacent(b, a)):
        raise ValueError(f"position {ell} does not hold sibling intervals")
    out = []
    for i, (x, y) in enumerate(zip(w1, w2)):
        if i == ell:
            out.append(x >> 1)
        elif not comparable(x, y):
            raise ValueError(f"components at position {i} are not nested")
        else:
            # for nested codes the longer string is also the larger integer
            out.append(max(x, y))
    return tuple(out)


def is_ordered_instance(w1: Sequence[int], w2: Sequence[int], ell: int) -> bool:
    """True iff both inputs are the full domain at every position after ``ell``."""
    return all(c == LAMBDA for c in w1[ell + 1:]) and all(c == LAMBDA for c in w2[ell + 1:])


def combine_taint(t1: Taint, t2: Taint) -> Taint:
    return "output" if "output" in (t1, t2) else "gap"


def resolve_tracked(w1: Sequence[int], t1: Taint, w2: Sequence[int], t2: Taint,
                    ell: int | None = None) -> Resolvent:
    if ell is None:
        ell = can_resolve(w1, w2)
        if ell is None:
            raise ValueError("boxes cannot be resolved")
    return Resolvent(resolve(w1, w2, ell), (tuple(w1), tuple(w2)), ell, combine_taint(t1, t2))


def is_sound(w1: Sequence[int], w2: Sequence[int], w: Sequence[int], d: int) -> bool:
    """Pointwise check that ``w`` lies inside the union of ``w1`` and ``w2``.

    Enumerates every point of ``w``; intended for small ``d``.
    """
    from .dyadic import box_contains, point
    for p in points_of(w, d):
        u = point(p, d)
        if not (box_contains(w1, u) or box_contains(w2, u)):
            return False
    return True
