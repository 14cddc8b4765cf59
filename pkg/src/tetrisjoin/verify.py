"""Ground truth by enumeration, and replay checks for recorded engine runs."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .dyadic import LAMBDA, Box, box_contains, format_box, int_range, point, prefix_box
from .resolution import can_resolve, is_ordered_instance, resolve

MAX_POINT_BITS = 24


class GuardError(ValueError):
    pass


@dataclass
class OracleResult:
    uncovered_points: list[Box]
    covered_all: bool


def coverage_grid(boxes: Iterable[Sequence[int]], n: int, d: int,
                  override: bool = False) -> np.ndarray:
    """Boolean array over all 2^(d·n) points, True where some box covers the point."""
    if d * n > MAX_POINT_BITS and not override:
        raise GuardError(f"d*n = {d * n} exceeds {MAX_POINT_BITS}; pass override=True to force")
    grid = np.zeros((1 << d,) * n, dtype=bool)
    for b in boxes:
        if len(b) != n:
            raise ValueError(f"box has {len(b)} components, expected {n}")
        grid[tuple(slice(lo, hi + 1) for lo, hi in (int_range(c, d) for c in b))] = True
    return grid


def brute_force_bcp(boxes: Iterable[Sequence[int]], n: int, d: int,
                    override: bool = False) -> OracleResult:
    """Every point of the 2^(d·n) grid covered by no box, in lexicographic order."""
    grid = coverage_grid(boxes, n, d, override)
    pts = [point(tuple(int(v) for v in p), d) for p in np.argwhere(~grid)]
    return OracleResult(pts, not pts)


def brute_force_join(q) -> list[tuple[int, ...]]:
    """Nested-loop evaluation of a natural join, sorted by the query's attribute order."""
    attrs = list(q.attributes)
    results = [dict()]
    for rel in q.relations:
        nxt = []
        for partial in results:
            for t in rel.tuples:
                if all(partial.get(a, v) == v for a, v in zip(rel.attrs, t)):
                    merged = dict(partial)
                    merged.update(zip(rel.attrs, t))
                    nxt.append(merged)
        results = nxt
    free = [a for a in attrs if not any(a in r.attrs for r in q.relations)]
    out = set()
    for partial in results:
        for vals in itertools.product(range(1 << q.d), repeat=len(free)):
            full = dict(partial)
            full.update(zip(free, vals))
            out.add(tuple(full[a] for a in attrs))
    return sorted(out)


def is_minimal_cover(boxes: Sequence[Sequence[int]], n: int, d: int) -> bool:
    """Covers everything, and dropping any single box leaves a point uncovered."""
    if not brute_force_bcp(boxes, n, d).covered_all:
        return False
    counts = np.zeros((1 << d,) * n, dtype=np.int32)
    slices = []
    for b in boxes:
        s = tuple(slice(lo, hi + 1) for lo, hi in (int_range(c, d) for c in b))
        counts[s] += 1
        slices.append(s)
    return all((counts[s] == 1).any() for s in slices)


@dataclass
class TraceReport:
    violations: list[str] = field(default_factory=list)
    checked_resolutions: int = 0
    checked_loads: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_trace(trace) -> TraceReport:
    """Replay the recorded events of one run and list everything that looks wrong.

    Checks, per resolution: the two inputs admit the recorded position, the
    resolvent matches, both inputs are λ after that position, the taint
    follows the parents, and each half of the resolvent (split at the
    resolved position) lies inside one of the two inputs. Loaded
    boxes must contain the probe that triggered them. For plain runs every
    output-tainted resolvent must be a prefix of some reported output.
    """
    report = TraceReport()
    meta = trace.meta
    lifted = meta.get("lifted", False)
    outputs = [ev["point"] for ev in trace.events if ev["kind"] == "output"]
    tainted_resolvents = []
    for k, ev in enumerate(trace.events):
        kind = ev["kind"]
        if kind == "resolve":
            report.checked_resolutions += 1
            w1, w2, ell, w = ev["w1"], ev["w2"], ev["ell"], ev["w"]
            tag = f"event {k}: resolve {format_box(w1)} + {format_box(w2)}"
            if can_resolve(w1, w2) is None or not _adjacent_at(w1, w2, ell):
                report.violations.append(f"{tag}: not resolvable on position {ell}")
                continue
            if resolve(w1, w2, ell) != tuple(w):
                report.violations.append(f"{tag}: recorded resolvent {format_box(w)} is wrong")
            if not is_ordered_instance(w1, w2, ell):
                report.violations.append(f"{tag}: inputs are not λ after position {ell}")
            if ev["taint"] != (ev["t1"] or ev["t2"]):
                report.violations.append(f"{tag}: taint bookkeeping mismatch")
            if not _halves_covered(w1, w2, tuple(w), ell):
                report.violations.append(f"{tag}: resolvent covers points outside its inputs")
            if ev["taint"]:
                tainted_resolvents.append((k, tuple(w)))
        elif kind == "load":
            report.checked_loads += 1
            probe = ev["probe"]
            for b in ev["boxes"]:
                if not box_contains(b, probe):
                    report.violations.append(
                        f"event {k}: loaded box {format_box(b)} misses probe {format_box(probe)}")
    if not lifted:
        prefix_set = set()
        for o in outputs:
            for pos in range(len(o)):
                for keep in range(o[pos].bit_length()):
                    prefix_set.add(prefix_box(o, pos, keep))
        for k, w in tainted_resolvents:
            if w not in prefix_set:
                report.violations.append(
                    f"event {k}: output-tainted resolvent {format_box(w)} is not a prefix of any output")
    return report


def _adjacent_at(w1, w2, ell) -> bool:
    a, b = w1[ell], w2[ell]
    return a > LAMBDA and b > LAMBDA and a >> 1 == b >> 1 and a != b


def _halves_covered(w1, w2, w, ell) -> bool:
    x = w[ell]
    for half in (x << 1, x << 1 | 1):
        h = w[:ell] + (half,) + w[ell + 1:]
        if not (box_contains(w1, h) or box_contains(w2, h)):
            return False
    return True
