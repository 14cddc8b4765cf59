"""Generators for worked examples and hard instance families."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

from .dyadic import LAMBDA, Box, interval, write_boxes


@dataclass
class BcpInstance:
    family: str
    attrs: list[str]
    d: int
    boxes: list[Box]
    params: dict = field(default_factory=dict)
    cert_size: int | None = None
    empty_output: bool | None = None
    sao: list[int] | None = None

    @property
    def n(self) -> int:
        return len(self.attrs)

    def oracle(self):
        from .boxindex import BoxOracle
        return BoxOracle(self.boxes, self.n, self.d, self.attrs)

    def manifest(self) -> dict:
        return {"family": self.family, "params": self.params, "d": self.d, "n": self.n,
                "attrs": self.attrs, "num_boxes": len(self.boxes),
                "cert_size": self.cert_size, "empty_output": self.empty_output,
                "sao": self.sao}

    def save(self, box_path, manifest_path=None) -> None:
        write_boxes(box_path, self.d, self.attrs, self.boxes)
        if manifest_path:
            with open(manifest_path, "w") as fh:
                json.dump(self.manifest(), fh, indent=2, sort_keys=True)


def _strings(k: int) -> list[str]:
    return ["".join(p) for p in itertools.product("01", repeat=k)]


def _box(n: int, comps: dict[int, str]) -> Box:
    b = [LAMBDA] * n
    for i, s in comps.items():
        b[i] = interval(s)
    return tuple(b)


def _dedup(boxes) -> list[Box]:
    return list(dict.fromkeys(boxes))


def bn_sequence(n: int) -> list[str]:
    """(0, 10, 110, ..., 1^(n-2)0, 1^(n-1)): a prefix-free split of the domain into n parts."""
    if n < 1:
        raise ValueError("n must be positive")
    return ["1" * (i - 1) + "0" for i in range(1, n)] + ["1" * (n - 1)]


def gen_parity_chain(n: int, d: int) -> BcpInstance:
    """Path query forcing equal parity along A1..An but opposite parity at the ends.

    End relations: A1 holds odd values only, An even values only; each
    consecutive pair holds equal-parity pairs only. The join is empty.
    """
    if n < 2 or d < 1:
        raise ValueError("need n >= 2 and d >= 1")
    heads = _strings(d - 1)
    boxes = [_box(n, {0: x + "0"}) for x in heads]
    for i in range(1, n):
        for b in "01":
            nb = "1" if b == "0" else "0"
            for x in heads:
                for y in heads:
                    boxes.append(_box(n, {i: x + b, i - 1: y + nb}))
    boxes += [_box(n, {n - 1: x + "1"}) for x in heads]
    return BcpInstance("parity_chain", [f"A{i + 1}" for i in range(n)], d, _dedup(boxes),
                       {"n": n, "d": d}, cert_size=None, empty_output=True,
                       sao=list(range(n - 1, -1, -1)))


def gen_ord_lb_n1(n: int, c: int, slack: int = 1) -> BcpInstance:
    """Minimal cover needing about |C|^(n-1) ordered resolutions under any order.

    Block ``i`` (selected by the i-th string of the n-part split on A1) holds a
    copy of ``C_i``: boxes naming A_i by one of n-1 prefix-free strings (one
    string per other attribute j) together with a d'-bit value on A_j.
    """
    if n < 2 or c < 2:
        raise ValueError("need n >= 2 and c >= 2")
    dp = math.ceil(math.log2(c))
    outer = bn_sequence(n)
    inner = bn_sequence(n - 1)
    d = dp + (n - 1) + max(0, n - 2 - dp) + slack
    values = _strings(dp)
    boxes = []
    for i in range(n):
        others = [j for j in range(n) if j != i]
        for rank, j in enumerate(others):
            for v in values:
                comps = {i: inner[rank], j: v}
                comps[0] = outer[i] + comps.get(0, "")
                boxes.append(_box(n, comps))
    boxes = _dedup(boxes)
    return BcpInstance("ord_lb_n1", [f"A{i + 1}" for i in range(n)], d, boxes,
                       {"n": n, "c": c, "d_prime": dp, "slack": slack},
                       cert_size=len(boxes), empty_output=True)


def gen_ord_lb_w1(w: int, c: int, slack: int = 1) -> BcpInstance:
    """Minimal cover on a width-w graph needing about |C|^(w+1) ordered resolutions.

    Primary attributes A1..A{w+1} form a clique; every pair (i, j) and every
    k in 1..w adds a secondary attribute B_ijk joined to A_i and A_j. Boxes on
    {A_i, B_ijk} with B=0 and on {A_j, B_ijk} with B=1 pin the primary value's
    suffix (after d' free bits) to the k-th string of the w-part split.
    """
    if w < 2 or c < 2:
        raise ValueError("need w >= 2 and c >= 2")
    dp = math.ceil(math.log2(c))
    split = bn_sequence(w)
    d = dp + (w - 1) + slack
    attrs = [f"A{i + 1}" for i in range(w + 1)]
    secondary = {}
    for i, j in itertools.combinations(range(w + 1), 2):
        for k in range(w):
            secondary[(i, j, k)] = len(attrs)
            attrs.append(f"B{i + 1}_{j + 1}_{k + 1}")
    n = len(attrs)
    values = _strings(dp)
    boxes = []
    for (i, j, k), bpos in secondary.items():
        for v in values:
            boxes.append(_box(n, {i: v + split[k], bpos: "0"}))
        for v in values:
            boxes.append(_box(n, {j: v + split[k], bpos: "1"}))
    edges = [frozenset((f"A{i + 1}", f"A{j + 1}")) for i, j in itertools.combinations(range(w + 1), 2)]
    for (i, j, k), bpos in secondary.items():
        edges.append(frozenset((f"A{i + 1}", attrs[bpos])))
        edges.append(frozenset((f"A{j + 1}", attrs[bpos])))
    inst = BcpInstance("ord_lb_w1", attrs, d, _dedup(boxes),
                       {"w": w, "c": c, "d_prime": dp, "slack": slack},
                       cert_size=len(boxes), empty_output=True)
    inst.params["graph_edges"] = sorted(sorted(e) for e in edges)
    return inst


def gen_geo_lb_half(n: int, c: int, slack: int = 1) -> BcpInstance:
    """Pigeonhole cover needing about |C|^(n/2) resolutions of any kind.

    Every box constrains two attributes to share the same (n-1)-way suffix
    after d' free leading bits, with d' about half of log2(c).
    """
    if n < 3 or c < 2:
        raise ValueError("need n >= 3 and c >= 2")
    dp = math.ceil(0.5 * math.log2(c))
    suffixes = bn_sequence(n - 1)
    d = dp + (n - 2) + slack
    values = _strings(dp)
    boxes = []
    for i, j in itertools.combinations(range(n), 2):
        for s in suffixes:
            for x in values:
                for y in values:
                    boxes.append(_box(n, {i: x + s, j: y + s}))
    boxes = _dedup(boxes)
    return BcpInstance("geo_lb_half", [f"A{i + 1}" for i in range(n)], d, boxes,
                       {"n": n, "c": c, "d_prime": dp, "slack": slack},
                       cert_size=len(boxes), empty_output=True)


def gen_fig_triangle(variant: str = "empty", d: int = 2) -> BcpInstance:
    """Triangle over (A, B, C) where every relation is decided by top bits alone.

    R(A,B) and S(B,C) hold the pairs whose leading bits differ. In the
    ``empty`` variant T(A,C) does too and the join is empty; in the
    ``nonempty`` variant T holds the pairs whose leading bits agree.
    """
    if d < 1:
        raise ValueError("d must be positive")
    n = 3
    boxes = [_box(n, {0: "0", 1: "0"}), _box(n, {0: "1", 1: "1"}),
             _box(n, {1: "0", 2: "0"}), _box(n, {1: "1", 2: "1"})]
    if variant == "empty":
        boxes += [_box(n, {0: "0", 2: "0"}), _box(n, {0: "1", 2: "1"})]
    elif variant == "nonempty":
        boxes += [_box(n, {0: "0", 2: "1"}), _box(n, {0: "1", 2: "0"})]
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return BcpInstance(f"fig_triangle_{variant}", ["A", "B", "C"], d, boxes,
                       {"variant": variant, "d": d}, cert_size=None,
                       empty_output=(variant == "empty"))


def triangle_grid_query(m: int, d: int):
    """Triangle query with R = S = T = [m] x [m] (dense grids)."""
    from .joins import Query, Relation
    if m > 1 << d:
        raise ValueError("grid does not fit in the domain")
    grid = [(a, b) for a in range(m) for b in range(m)]
    rels = [Relation("R", ["A", "B"], grid), Relation("S", ["B", "C"], grid),
            Relation("T", ["A", "C"], grid)]
    return Query(["A", "B", "C"], rels, d)


def gen_triangle_grid(N: int, d: int | None = None) -> BcpInstance:
    """Gap boxes of the dense-grid triangle with about N tuples per relation.

    Indices follow the attribute order (A, B, C), which is also the SAO.
    """
    from .joins import IndexSpec, query_gap_boxes
    m = max(1, math.isqrt(N))
    if d is None:
        d = max(1, math.ceil(math.log2(m)) + 1)
    q = triangle_grid_query(m, d)
    specs = {r.name: [IndexSpec("gao", list(r.attrs))] for r in q.relations}
    boxes = query_gap_boxes(q, specs)
    return BcpInstance("triangle_grid", q.attributes, d, boxes, {"N": N, "m": m, "d": d},
                       empty_output=False, sao=[0, 1, 2])


FAMILIES = {
    "fig3_triangle": lambda d=2, **_: gen_fig_triangle("empty", d),
    "fig5_triangle": lambda d=2, **_: gen_fig_triangle("nonempty", d),
    "parity_chain": lambda n=3, d=4, **_: gen_parity_chain(n, d),
    "ord_lb_n1": lambda n=3, c=8, slack=1, **_: gen_ord_lb_n1(n, c, slack),
    "ord_lb_w1": lambda w=2, c=4, slack=1, **_: gen_ord_lb_w1(w, c, slack),
    "geo_lb_half": lambda n=3, c=16, slack=1, **_: gen_geo_lb_half(n, c, slack),
    "triangle_grid": lambda N=64, d=None, **_: gen_triangle_grid(N, d),
}


def generate(family: str, **params) -> BcpInstance:
    try:
        make = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}") from None
    return make(**params)
