"""Tetris: recursive box covering by geometric resolution.

The skeleton explores the dyadic subdivision of a target box, backtracking as
soon as some known box covers the current piece and resolving the witnesses
of two covered halves into a witness for the whole. The outer loop restarts
the skeleton from the universal box until everything is covered, loading
input boxes (or reporting output points) at every uncovered point found.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

from .boxindex import BoxOracle, KnowledgeBase
from .dyadic import LAMBDA, Box, format_box

MODES = ("preloaded", "reloaded", "preloaded-nocache", "preloaded-lb", "reloaded-lb")


class ConfigurationError(ValueError):
    pass


@dataclass
class RunStats:
    resolutions_gap: int = 0
    resolutions_output: int = 0
    probes: int = 0
    boxes_loaded: int = 0
    skeleton_calls: int = 0
    output_count: int = 0
    resolutions_by_attr: list[int] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def resolutions(self) -> int:
        return self.resolutions_gap + self.resolutions_output

    def to_dict(self, **context) -> dict:
        out = asdict(self)
        extra = out.pop("extra")
        out["resolutions"] = self.resolutions
        out.update(extra)
        out.update(context)
        return out

    def to_json(self, **context) -> str:
        return json.dumps(self.to_dict(**context), sort_keys=True)


@dataclass
class SkeletonResult:
    covered: bool
    witness: Box
    tainted: bool = False


class Trace:
    """Event log of one engine run, consumed by ``verify.validate_trace``.

    Boxes are recorded in the engine's internal attribute order; ``sao`` maps
    internal positions back to original attributes.
    """

    def __init__(self):
        self.events: list[dict] = []
        self.meta: dict = {}

    def resolution(self, w1, t1, w2, t2, ell, w, taint):
        self.events.append({"kind": "resolve", "w1": w1, "t1": t1, "w2": w2, "t2": t2,
                            "ell": ell, "w": w, "taint": taint})

    def load(self, probe, boxes):
        self.events.append({"kind": "load", "probe": probe, "boxes": list(boxes)})

    def output(self, t):
        self.events.append({"kind": "output", "point": t})

    def rebalance(self, attr, x):
        self.events.append({"kind": "rebalance", "attr": attr, "x": x})

    def dump(self, path) -> None:
        def enc(v):
            if isinstance(v, tuple):
                return format_box(v)
            if isinstance(v, list):
                return [enc(x) for x in v]
            return v
        with open(path, "w") as fh:
            fh.write(json.dumps({"kind": "meta", **self.meta}) + "\n")
            for ev in self.events:
                fh.write(json.dumps({k: enc(v) for k, v in ev.items()}) + "\n")


class PlainDomain:
    """Every position ranges over all strings of length up to ``d``."""

    def __init__(self, d: int):
        self.d = d

    def first_thick(self, b: Sequence[int]) -> int:
        d = self.d
        for i, c in enumerate(b):
            if not c >> d:
                return i
        return -1


def tetris_skeleton(kb: KnowledgeBase, target: Box, domain, stats: RunStats,
                    tainted: set, cache: bool = True,
                    report: Callable[[Box], None] | None = None,
                    trace: Trace | None = None) -> SkeletonResult:
    """Cover ``target`` with boxes of ``kb``, resolving witnesses as needed.

    Runs the recursion with an explicit stack. With ``report`` set, an
    uncovered unit box is reported, stored and treated as covered instead of
    aborting the whole call. ``tainted`` holds the stored boxes whose
    derivation involves an output point.
    """
    first_thick = domain.first_thick
    find = kb.find_superbox
    by_attr = stats.resolutions_by_attr
    if not by_attr:
        by_attr.extend([0] * len(target))
    # frame: [box, stage, ell, x, w1, t1]
    stack = [[target, 0, -1, 0, None, False]]
    w: Box = target
    t = False
    calls = 0
    while stack:
        fr = stack[-1]
        stage = fr[1]
        if stage == 0:
            b = fr[0]
            calls += 1
            a = find(b)
            if a is not None:
                w, t = a, a in tainted
                stack.pop()
                continue
            ell = first_thick(b)
            if ell < 0:
                if report is None:
                    stats.skeleton_calls += calls
                    return SkeletonResult(False, b)
                report(b)
                kb.insert(b)
                tainted.add(b)
                w, t = b, True
                stack.pop()
                continue
            x = b[ell]
            fr[1], fr[2], fr[3] = 1, ell, x
            stack.append([b[:ell] + (x << 1,) + b[ell + 1:], 0, -1, 0, None, False])
            continue
        ell = fr[2]
        x = fr[3]
        if w[ell].bit_length() <= x.bit_length():
            # the witness of a half already covers the whole box
            stack.pop()
            continue
        b = fr[0]
        if stage == 1:
            fr[1], fr[4], fr[5] = 2, w, t
            stack.append([b[:ell] + (x << 1 | 1,) + b[ell + 1:], 0, -1, 0, None, False])
            continue
        w1, t1 = fr[4], fr[5]
        res = tuple(map(max, w1, w))
        res = res[:ell] + (x,) + res[ell + 1:]
        taint = t1 or t
        if taint:
            stats.resolutions_output += 1
        else:
            stats.resolutions_gap += 1
        by_attr[ell] += 1
        if trace is not None:
            trace.resolution(w1, t1, w, t, ell, res, taint)
        if cache and kb.insert(res) and taint:
            tainted.add(res)
        w, t = res, taint
        stack.pop()
    stats.skeleton_calls += calls
    return SkeletonResult(True, w, t)


def _permute(b: Sequence[int], sao: Sequence[int]) -> Box:
    return tuple(b[a] for a in sao)


def _unpermute(b: Sequence[int], sao: Sequence[int]) -> Box:
    out = [LAMBDA] * len(sao)
    for pos, a in enumerate(sao):
        out[a] = b[pos]
    return tuple(out)


def check_sao(sao: Sequence[int] | None, n: int) -> tuple[int, ...]:
    if sao is None:
        return tuple(range(n))
    sao = tuple(sao)
    if sorted(sao) != list(range(n)):
        raise ConfigurationError(f"SAO {list(sao)} is not a permutation of 0..{n - 1}")
    return sao


def tetris(oracle: BoxOracle, mode: str = "preloaded", sao: Sequence[int] | None = None,
           trace: Trace | None = None) -> tuple[list[Box], RunStats]:
    """Solve the box cover problem for the boxes behind ``oracle``.

    Returns the uncovered unit boxes (original attribute order, sorted in SAO
    order) and the run counters. Modes: ``preloaded`` starts with every input
    box, ``reloaded`` starts empty and loads boxes on demand,
    ``preloaded-nocache`` never stores resolvents and reports outputs inside
    the recursion.
    """
    if mode in ("preloaded-lb", "reloaded-lb"):
        raise ConfigurationError("load-balanced modes are run through tetrisjoin.balance")
    if mode not in MODES:
        raise ConfigurationError(f"unknown mode {mode!r}")
    n = oracle.n
    sao = check_sao(sao, n)
    kb = KnowledgeBase(n)
    stats = RunStats(resolutions_by_attr=[0] * n)
    domain = PlainDomain(oracle.d)
    tainted: set = set()
    outputs: list[Box] = []
    if trace is not None:
        trace.meta.update(mode=mode, sao=list(sao), n=n, d=oracle.d)

    if mode != "reloaded":
        for b in oracle.boxes():
            kb.insert(_permute(b, sao))

    def report(t: Box) -> None:
        outputs.append(t)
        if trace is not None:
            trace.output(t)

    top = (LAMBDA,) * n
    if mode == "preloaded-nocache":
        tetris_skeleton(kb, top, domain, stats, tainted, cache=False, report=report, trace=trace)
    else:
        while True:
            r = tetris_skeleton(kb, top, domain, stats, tainted, trace=trace)
            if r.covered:
                break
            w = r.witness
            stats.probes += 1
            loaded = [_permute(b, sao) for b in oracle.all_containing(_unpermute(w, sao))]
            if not loaded:
                report(w)
                kb.insert(w)
                tainted.add(w)
            else:
                if trace is not None:
                    trace.load(w, loaded)
                for b in loaded:
                    if kb.insert(b):
                        stats.boxes_loaded += 1
    if mode != "reloaded":
        stats.boxes_loaded = len(oracle)
    stats.output_count = len(outputs)
    outputs.sort()
    return [_unpermute(t, sao) for t in outputs], stats


def solve(oracle: BoxOracle, mode: str = "preloaded", sao: Sequence[int] | None = None,
          trace: Trace | None = None) -> tuple[list[Box], RunStats]:
    """Dispatch to the plain engine or the load-balanced variants."""
    if mode in ("preloaded-lb", "reloaded-lb"):
        from . import balance
        if mode == "preloaded-lb":
            return balance.tetris_preloaded_lb(oracle, sao, trace=trace)
        return balance.tetris_reloaded_lb(oracle, sao, trace=trace)
    return tetris(oracle, mode, sao, trace=trace)


def suggest_sao(hg, strategy: str = "reverse_gyo") -> list:
    """Pick a splitting attribute order for a query hypergraph.

    ``reverse_gyo`` reverses a GYO elimination order (needs an alpha-acyclic
    hypergraph), ``min_induced_width`` searches for an order of least induced
    width, ``fixed`` keeps the vertex order.
    """
    from . import joins
    strategy = strategy.replace("-", "_")
    if strategy == "reverse_gyo":
        order = joins.gyo_eliminate(hg)
        if order is None:
            raise joins.NotAcyclicError("hypergraph is not alpha-acyclic")
        return list(reversed(order))
    if strategy in ("min_induced_width", "min_width"):
        return joins.min_induced_width_order(hg)
    if strategy == "fixed":
        return list(hg.vertices)
    raise ConfigurationError(f"unknown SAO strategy {strategy!r}")
