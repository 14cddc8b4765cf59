"""Dyadic intervals and boxes.

An interval is a bitstring of length at most ``d``, read MSB-first: the string
``x`` stands for every ``d``-bit value whose binary expansion starts with
``x``. Internally an interval is stored as a single int with a sentinel bit
on top, ``(1 << len(x)) | int(x, 2)``, so the empty string (the whole
domain) is ``1``, the children of ``c`` are ``2c`` and ``2c + 1`` and the
parent is ``c >> 1``. A box is a plain tuple of such codes.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Sequence

LAMBDA = 1

Box = tuple[int, ...]


def interval(bits: str) -> int:
    """Code of the interval spelled by ``bits`` ('' or '*' is the full domain)."""
    if bits in ("", "*"):
        return LAMBDA
    if any(ch not in "01" for ch in bits):
        raise ValueError(f"not a bitstring: {bits!r}")
    return (1 << len(bits)) | int(bits, 2)


def bits(code: int) -> str:
    """Bitstring spelled by an interval code."""
    n = code.bit_length() - 1
    if n == 0:
        return ""
    return format(code & ((1 << n) - 1), f"0{n}b")


def length(code: int) -> int:
    return code.bit_length() - 1


def is_full(code: int, d: int) -> bool:
    return code >> d != 0


def int_range(code: int, d: int) -> tuple[int, int]:
    """Inclusive integer range covered by an interval."""
    n = length(code)
    if n > d:
        raise ValueError(f"interval {bits(code)!r} longer than d={d}")
    value = code ^ (1 << n)
    span = d - n
    return value << span, ((value + 1) << span) - 1


def value_interval(v: int, d: int) -> int:
    """The length-``d`` interval holding the single value ``v``."""
    if not 0 <= v < (1 << d):
        raise ValueError(f"value {v} outside [0, 2^{d})")
    return (1 << d) | v


def interval_contains(a: int, b: int) -> bool:
    """True iff ``a`` is a prefix of ``b``, i.e. a contains b as a set."""
    shift = b.bit_length() - a.bit_length()
    return shift >= 0 and b >> shift == a


def box_contains(a: Sequence[int], b: Sequence[int]) -> bool:
    for x, y in zip(a, b):
        shift = y.bit_length() - x.bit_length()
        if shift < 0 or y >> shift != x:
            return False
    return True


def comparable(a: int, b: int) -> bool:
    return interval_contains(a, b) or interval_contains(b, a)


def universal(n: int) -> Box:
    return (LAMBDA,) * n


def is_unit(b: Sequence[int], d: int) -> bool:
    return all(c >> d for c in b)


def first_thick(b: Sequence[int], d: int) -> int:
    """Index of the first component shorter than ``d``, or -1 for a unit box."""
    for i, c in enumerate(b):
        if not c >> d:
            return i
    return -1


def split_first_thick(b: Sequence[int], d: int) -> tuple[Box, Box]:
    """Halve ``b`` along its first component that is not full length."""
    i = first_thick(b, d)
    if i < 0:
        raise ValueError("unit box has no thick dimension")
    b = tuple(b)
    x = b[i]
    return b[:i] + (x << 1,) + b[i + 1:], b[:i] + (x << 1 | 1,) + b[i + 1:]


def project(b: Sequence[int], attrs: Iterable[int]) -> Box:
    """Keep the components listed in ``attrs`` and widen the rest to the full domain."""
    keep = set(attrs)
    return tuple(c if i in keep else LAMBDA for i, c in enumerate(b))


def support(b: Sequence[int]) -> frozenset[int]:
    return frozenset(i for i, c in enumerate(b) if c != LAMBDA)


def prefix_box(b: Sequence[int], pos: int, keep: int) -> Box:
    """Prefix of ``b``: components before ``pos`` kept, ``keep`` bits at ``pos``, λ after."""
    c = b[pos]
    drop = length(c) - keep
    if drop < 0:
        raise ValueError("cannot keep more bits than the component has")
    return tuple(b[:pos]) + (c >> drop,) + (LAMBDA,) * (len(b) - pos - 1)


def is_prefix_box_of(p: Sequence[int], t: Sequence[int]) -> bool:
    """True iff ``p`` is a prefix of the unit box ``t`` (per the truncation rule)."""
    k = len(p)
    while k > 0 and p[k - 1] == LAMBDA:
        k -= 1
    if k == 0:
        return True
    if tuple(p[:k - 1]) != tuple(t[:k - 1]):
        return False
    return interval_contains(p[k - 1], t[k - 1])


def decompose_range(lo: int, hi: int, d: int) -> list[int]:
    """Canonical disjoint dyadic cover of ``[lo, hi]`` in increasing order.

    Works bottom-up like a segment tree query: at each level an unpaired left
    or right end is emitted on its own and the remaining range is merged into
    parent intervals.
    """
    if lo > hi:
        raise ValueError(f"empty range [{lo}, {hi}]")
    if lo < 0 or hi >= (1 << d):
        raise ValueError(f"range [{lo}, {hi}] outside [0, 2^{d})")
    left: list[int] = []
    right: list[int] = []
    lo_node = (1 << d) | lo
    hi_node = (1 << d) + hi + 1  # exclusive bound
    while lo_node < hi_node:
        if lo_node & 1:
            left.append(lo_node)
            lo_node += 1
        if hi_node & 1:
            hi_node -= 1
            right.append(hi_node)
        lo_node >>= 1
        hi_node >>= 1
    return left + right[::-1]


def point(values: Sequence[int], d: int) -> Box:
    return tuple(value_interval(v, d) for v in values)


def point_values(b: Sequence[int], d: int) -> tuple[int, ...]:
    if not is_unit(b, d):
        raise ValueError("not a unit box")
    mask = (1 << d) - 1
    return tuple(c & mask for c in b)


def prefixes(code: int) -> list[int]:
    """All prefixes of an interval, shortest first."""
    n = length(code)
    return [code >> (n - k) for k in range(n + 1)]


def boxes_containing_point(t: Sequence[int], d: int | None = None) -> set[Box]:
    """Every dyadic box containing the unit box ``t``: (d+1)^n of them."""
    if d is not None and not is_unit(t, d):
        raise ValueError("not a unit box")
    return set(itertools.product(*(prefixes(c) for c in t)))


def points_of(b: Sequence[int], d: int) -> Iterable[tuple[int, ...]]:
    """Enumerate the integer points of a box (only sensible for small d·n)."""
    ranges = [range(lo, hi + 1) for lo, hi in (int_range(c, d) for c in b)]
    return itertools.product(*ranges)


# -- text format -------------------------------------------------------------

def format_box(b: Sequence[int]) -> str:
    return "<" + ",".join(bits(c) or "*" for c in b) + ">"


def parse_box(text: str) -> Box:
    text = text.strip()
    if not (text.startswith("<") and text.endswith(">")):
        raise ValueError(f"box must look like <x1,...,xn>: {text!r}")
    body = text[1:-1]
    return tuple(interval(part.strip()) for part in body.split(","))


def format_header(d: int, attrs: Sequence[str]) -> str:
    return f"d={d} n={len(attrs)} attrs={','.join(attrs)}"


def parse_header(line: str) -> tuple[int, list[str]]:
    fields = dict(tok.split("=", 1) for tok in line.split())
    try:
        d = int(fields["d"])
        n = int(fields["n"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"bad header line: {line!r}") from exc
    attrs = fields.get("attrs")
    names = attrs.split(",") if attrs else [f"A{i + 1}" for i in range(n)]
    if len(names) != n:
        raise ValueError(f"header lists {len(names)} attributes but n={n}")
    return d, names


def read_boxes(path) -> tuple[int, list[str], list[Box]]:
    """Read a box file: header line then one ``<...>`` box per line."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError(f"{path}: empty box file")
    d, attrs = parse_header(lines[0])
    boxes = []
    for ln in lines[1:]:
        b = parse_box(ln)
        if len(b) != len(attrs):
            raise ValueError(f"{path}: box {ln} has {len(b)} components, expected {len(attrs)}")
        if any(length(c) > d for c in b):
            raise ValueError(f"{path}: box {ln} has a component longer than d={d}")
        boxes.append(b)
    return d, attrs, boxes


def write_boxes(path, d: int, attrs: Sequence[str], boxes: Iterable[Sequence[int]]) -> None:
    with open(path, "w") as fh:
        fh.write(format_header(d, attrs) + "\n")
        for b in boxes:
            fh.write(format_box(b) + "\n")
