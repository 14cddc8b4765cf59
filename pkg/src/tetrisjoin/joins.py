"""Relations, queries and their hypergraphs.

Relations are turned into gap boxes either by walking a sorted trie of the
tuples (the boxes a B-tree with a fixed attribute order exposes) or by a
dyadic subdivision of the relation's own subspace (a quad-tree style index).
Gap boxes are then lifted to the query's full attribute space.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .boxindex import BoxOracle
from .dyadic import LAMBDA, Box, decompose_range, point_values, value_interval


class NotAcyclicError(ValueError):
    pass


class BlowupError(RuntimeError):
    pass


@dataclass
class Relation:
    name: str
    attrs: list[str]
    tuples: list[tuple[int, ...]]

    def __post_init__(self):
        self.attrs = list(self.attrs)
        k = len(self.attrs)
        if len(set(self.attrs)) != k:
            raise ValueError(f"relation {self.name} repeats an attribute")
        clean = set()
        for t in self.tuples:
            t = tuple(int(v) for v in t)
            if len(t) != k:
                raise ValueError(f"relation {self.name}: tuple {t} does not have arity {k}")
            clean.add(t)
        self.tuples = sorted(clean)


@dataclass
class IndexSpec:
    kind: str = "gao"  # "gao" or "dyadic_tree"
    order: list[str] | None = None


@dataclass
class Query:
    attributes: list[str]
    relations: list[Relation]
    d: int
    indices: dict[str, list[IndexSpec]] = field(default_factory=dict)
    dictionaries: dict[str, list] | None = None

    def __post_init__(self):
        known = set(self.attributes)
        for r in self.relations:
            missing = set(r.attrs) - known
            if missing:
                raise ValueError(f"relation {r.name} uses unknown attributes {sorted(missing)}")
            for t in r.tuples:
                if any(v >= 1 << self.d or v < 0 for v in t):
                    raise ValueError(f"relation {r.name}: value out of range for d={self.d}")

    def hypergraph(self) -> "Hypergraph":
        return Hypergraph(list(self.attributes), [frozenset(r.attrs) for r in self.relations])

    def decode(self, values: Sequence[int]) -> tuple:
        if not self.dictionaries:
            return tuple(values)
        return tuple(self.dictionaries[a][v] for a, v in zip(self.attributes, values))


# -- gap boxes ----------------------------------------------------------------

def _gap_intervals(children: Sequence[int], d: int) -> list[int]:
    """Dyadic intervals covering every value of [0, 2^d) not in ``children``."""
    out = []
    prev = -1
    for v in list(children) + [1 << d]:
        if v - prev > 1:
            out.extend(decompose_range(prev + 1, v - 1, d))
        prev = v
    return out


def gao_gap_boxes(rel: Relation, order: Sequence[str], d: int) -> list[Box]:
    """Gap boxes read off a sorted trie of ``rel`` in attribute order ``order``.

    Each box fixes the trie path above a node to single values, covers one
    dyadic piece of a gap between the node's children, and is the full domain
    on every later attribute. Boxes are returned in the relation's own
    attribute order.
    """
    if sorted(order) != sorted(rel.attrs):
        raise ValueError(f"order {list(order)} is not a permutation of {rel.attrs}")
    k = len(order)
    pos = [rel.attrs.index(a) for a in order]
    rows = sorted(tuple(t[p] for p in pos) for t in rel.tuples)
    out: list[Box] = []

    def emit(path: tuple, piece: int):
        comps = [value_interval(v, d) for v in path] + [piece] + [LAMBDA] * (k - len(path) - 1)
        box = [LAMBDA] * k
        for j, p in enumerate(pos):
            box[p] = comps[j]
        out.append(tuple(box))

    # iterative walk over trie nodes: (depth, path, rows under this node)
    stack = [(0, (), rows)]
    while stack:
        depth, path, sub = stack.pop()
        children = []
        groups = []
        for v, grp in itertools.groupby(sub, key=lambda r: r[depth]):
            children.append(v)
            groups.append(list(grp))
        for piece in _gap_intervals(children, d):
            emit(path, piece)
        if depth + 1 < k:
            for v, grp in reversed(list(zip(children, groups))):
                stack.append((depth + 1, path + (v,), grp))
    return out


def dyadic_tree_gap_boxes(rel: Relation, d: int) -> list[Box]:
    """Gap boxes of a dyadic subdivision of the relation's subspace.

    A box is halved while it holds some tuple, always along its shortest
    component (ties to the earlier attribute), so the attributes are cut in
    turn as in a quad-tree; an empty box reached this way is emitted. The
    result is a set of disjoint boxes whose union is exactly the complement
    of ``rel``.
    """
    k = len(rel.attrs)
    pts = [tuple(value_interval(v, d) for v in t) for t in rel.tuples]
    out: list[Box] = []
    stack: list[tuple[Box, list]] = [((LAMBDA,) * k, pts)]
    while stack:
        box, inside = stack.pop()
        if not inside:
            out.append(box)
            continue
        lens = [c.bit_length() for c in box]
        i = min(range(k), key=lens.__getitem__)
        if box[i] >> d:
            continue
        x = box[i]
        shift = d - (x.bit_length() - 1) - 1
        left = [p for p in inside if not (p[i] >> shift) & 1]
        right = [p for p in inside if (p[i] >> shift) & 1]
        b0 = box[:i] + (x << 1,) + box[i + 1:]
        b1 = box[:i] + (x << 1 | 1,) + box[i + 1:]
        stack.append((b1, right))
        stack.append((b0, left))
    return out


def lift(box: Sequence[int], attrs: Sequence[str], all_attrs: Sequence[str]) -> Box:
    where = {a: i for i, a in enumerate(attrs)}
    return tuple(box[where[a]] if a in where else LAMBDA for a in all_attrs)


def relation_gap_boxes(rel: Relation, spec: IndexSpec, d: int) -> list[Box]:
    kind = spec.kind.replace("-", "_")
    if kind in ("gao", "gao_consistent", "btree", "trie"):
        return gao_gap_boxes(rel, spec.order or rel.attrs, d)
    if kind in ("dyadic_tree", "quadtree"):
        return dyadic_tree_gap_boxes(rel, d)
    raise ValueError(f"unknown index kind {spec.kind!r}")


def query_gap_boxes(q: Query, indices: dict[str, list[IndexSpec]] | None = None) -> list[Box]:
    """All gap boxes of all indices of all relations, lifted and deduplicated."""
    indices = indices if indices is not None else q.indices
    seen = set()
    out = []
    for r in q.relations:
        specs = indices.get(r.name) or [IndexSpec("gao", list(r.attrs))]
        for spec in specs:
            for b in relation_gap_boxes(r, spec, q.d):
                lb = lift(b, r.attrs, q.attributes)
                if lb not in seen:
                    seen.add(lb)
                    out.append(lb)
    return out


def query_oracle(q: Query, indices: dict[str, list[IndexSpec]] | None = None) -> BoxOracle:
    return BoxOracle(query_gap_boxes(q, indices), len(q.attributes), q.d, q.attributes)


def is_gao_consistent(box: Sequence[int], order_positions: Sequence[int], d: int) -> bool:
    """At most one component that is neither a point nor λ, and λ after it (in order)."""
    seen_partial = False
    for p in order_positions:
        c = box[p]
        if seen_partial:
            if c != LAMBDA:
                return False
        elif c != LAMBDA and not c >> d:
            seen_partial = True
        elif c == LAMBDA:
            seen_partial = True
    return True


# -- query files -------------------------------------------------------------

def _sort_values(values: Iterable[str]) -> list:
    vals = set(values)
    try:
        return sorted(vals, key=lambda v: (float(v), v))
    except ValueError:
        return sorted(vals)


def read_table(path: str) -> tuple[list[str], list[list[str]]]:
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    with open(path, newline="") as fh:
        sample = fh.read(4096)
        fh.seek(0)
        delim = "\t" if path.endswith((".tsv", ".tab")) or ("\t" in sample and "," not in sample) else ","
        reader = csv.reader(fh, delimiter=delim)
        rows = [row for row in reader if row]
    if not rows:
        raise ValueError(f"{path}: missing header row")
    header = [h.strip() for h in rows[0]]
    return header, [[v.strip() for v in row] for row in rows[1:]]


def load_query(path: str) -> Query:
    """Load a query description plus its CSV/TSV relations.

    Raw values are dictionary-encoded per attribute in sorted order; ``d`` is
    the smallest bit width that fits every attribute's dictionary.
    """
    with open(path) as fh:
        spec = json.load(fh)
    base = os.path.dirname(os.path.abspath(path))
    attributes = list(spec["attributes"])
    raw_rels = []
    for r in spec["relations"]:
        file = r["file"]
        if not os.path.isabs(file):
            file = os.path.join(base, file)
        header, rows = read_table(file)
        attrs = list(r.get("attrs", header))
        missing = [a for a in attrs if a not in header]
        if missing:
            raise ValueError(f"{file}: columns {missing} not found in header {header}")
        cols = [header.index(a) for a in attrs]
        raw_rels.append((r, attrs, [[row[c] for c in cols] for row in rows]))
    domains: dict[str, set] = {a: set() for a in attributes}
    for _, attrs, rows in raw_rels:
        for row in rows:
            for a, v in zip(attrs, row):
                domains[a].add(v)
    dictionaries = {a: _sort_values(domains[a]) for a in attributes}
    size = max([len(v) for v in dictionaries.values()] + [2])
    d = max(1, math.ceil(math.log2(size)))
    codes = {a: {v: i for i, v in enumerate(vals)} for a, vals in dictionaries.items()}
    relations = []
    indices = {}
    for r, attrs, rows in raw_rels:
        tuples = [tuple(codes[a][v] for a, v in zip(attrs, row)) for row in rows]
        relations.append(Relation(r["name"], attrs, tuples))
        specs = [IndexSpec(ix.get("kind", "gao"), ix.get("order")) for ix in r.get("indices", [])]
        indices[r["name"]] = specs or [IndexSpec("gao", attrs)]
    return Query(attributes, relations, d, indices, dictionaries)


def padding_boxes(q: Query) -> list[Box]:
    """Per attribute, boxes excluding the codes past the end of its dictionary."""
    out = []
    if not q.dictionaries:
        return out
    for i, a in enumerate(q.attributes):
        size = len(q.dictionaries[a])
        if size < 1 << q.d:
            for piece in decompose_range(size, (1 << q.d) - 1, q.d):
                b = [LAMBDA] * len(q.attributes)
                b[i] = piece
                out.append(tuple(b))
    return out


def evaluate(q: Query, mode: str = "preloaded", sao: Sequence[str] | None = None,
             indices: dict[str, list[IndexSpec]] | None = None, trace=None):
    """Run the engine on a query's gap boxes; returns (sorted encoded tuples, stats).

    ``sao`` lists attribute names; by default the query's attribute order.
    """
    from .engine import ConfigurationError, solve
    boxes = query_gap_boxes(q, indices)
    seen = set(boxes)
    boxes += [b for b in padding_boxes(q) if b not in seen]
    oracle = BoxOracle(boxes, len(q.attributes), q.d, q.attributes)
    order = None
    if sao is not None:
        unknown = [a for a in sao if a not in q.attributes]
        if unknown or len(sao) != len(q.attributes):
            raise ConfigurationError(f"SAO {list(sao)} does not list the attributes {q.attributes}")
        order = [q.attributes.index(a) for a in sao]
    tuples, stats = solve(oracle, mode, order, trace=trace)
    return sorted(point_values(t, q.d) for t in tuples), stats


# -- hypergraphs ----------------------------------------------------------------

@dataclass
class Hypergraph:
    vertices: list
    edges: list[frozenset]

    def __post_init__(self):
        self.edges = [frozenset(e) for e in self.edges]
        vs = set(self.vertices)
        for e in self.edges:
            if not e <= vs:
                raise ValueError(f"edge {sorted(e)} has vertices outside the vertex set")


def gyo_eliminate(hg: Hypergraph) -> list | None:
    """Vertex removal order of a GYO reduction, or None if it gets stuck.

    Repeatedly drops edges contained in another edge and vertices that lie
    in at most one edge. Ties are broken by vertex order so the result is
    deterministic.
    """
    rank = {v: i for i, v in enumerate(hg.vertices)}
    edges = [set(e) for e in hg.edges]
    alive = list(hg.vertices)
    order = []
    while alive:
        # drop empty, duplicate and contained edges
        edges = [e for e in edges if e]
        kept: list[set] = []
        for i, e in enumerate(edges):
            if any(e < f or (e == f and j < i) for j, f in enumerate(edges) if j != i):
                continue
            kept.append(e)
        edges = kept
        private = None
        for v in sorted(alive, key=rank.__getitem__):
            if sum(1 for e in edges if v in e) <= 1:
                private = v
                break
        if private is None:
            return None
        order.append(private)
        alive.remove(private)
        for e in edges:
            e.discard(private)
    return order


def is_alpha_acyclic(hg: Hypergraph) -> bool:
    return gyo_eliminate(hg) is not None


def _neighbours(hg: Hypergraph) -> dict:
    nb = {v: set() for v in hg.vertices}
    for e in hg.edges:
        for v in e:
            nb[v] |= e - {v}
    return nb


def induced_width(hg: Hypergraph, sao: Sequence) -> int:
    """Induced width of an attribute order.

    Vertices are eliminated from the last in ``sao`` to the first; each
    vertex's support is the union of the current edges containing it, which
    is added back as an edge (minus the vertex) once the vertex is removed.
    """
    if sorted(map(str, sao)) != sorted(map(str, hg.vertices)) or len(sao) != len(hg.vertices):
        raise ValueError("order is not a permutation of the vertices")
    edges = [set(e) for e in hg.edges]
    width = 0
    for v in reversed(list(sao)):
        sup = {v}
        for e in edges:
            if v in e:
                sup |= e
        width = max(width, len(sup) - 1)
        edges = [e - {v} for e in edges if e - {v}]
        if len(sup) > 1:
            edges.append(sup - {v})
    return width


def min_induced_width_order(hg: Hypergraph) -> list:
    """An order of least induced width, found by dynamic programming over subsets.

    The width of eliminating ``v`` after the set ``S`` depends only on ``S``:
    it is the number of vertices outside ``S`` reachable from ``v`` through
    ``S`` in the primal graph. Limited to 12 vertices.
    """
    vs = list(hg.vertices)
    n = len(vs)
    if n > 12:
        raise ValueError("exhaustive width search is limited to 12 vertices")
    if n == 0:
        return []
    idx = {v: i for i, v in enumerate(vs)}
    nb = _neighbours(hg)
    adj = [0] * n
    for v, ns in nb.items():
        for u in ns:
            adj[idx[v]] |= 1 << idx[u]

    def degree_after(s: int, v: int) -> int:
        # vertices outside s ∪ {v} reachable from v through s
        seen = 1 << v
        frontier = adj[v]
        reach = 0
        while frontier:
            u = (frontier & -frontier).bit_length() - 1
            frontier &= frontier - 1
            if seen >> u & 1:
                continue
            seen |= 1 << u
            if s >> u & 1:
                frontier |= adj[u] & ~seen
            else:
                reach |= 1 << u
        return bin(reach).count("1")

    full = (1 << n) - 1
    best = [math.inf] * (1 << n)
    choice = [-1] * (1 << n)
    best[0] = 0
    for s in range(1, full + 1):
        for v in range(n):
            if s >> v & 1:
                prev = s & ~(1 << v)
                cost = max(best[prev], degree_after(prev, v))
                if cost < best[s]:
                    best[s] = cost
                    choice[s] = v
    elim = []
    s = full
    while s:
        v = choice[s]
        elim.append(vs[v])
        s &= ~(1 << v)
    elim.reverse()
    # elimination runs from the end of the order backwards
    return list(reversed(elim))


def min_induced_width(hg: Hypergraph) -> int:
    return induced_width(hg, min_induced_width_order(hg))


def _cover_number(edges: Sequence[frozenset]) -> int:
    verts = frozenset().union(*edges) if edges else frozenset()
    if not verts:
        return 0
    uniq = list(set(edges))
    for k in range(1, len(uniq) + 1):
        for combo in itertools.combinations(uniq, k):
            if frozenset().union(*combo) == verts:
                return k
    raise AssertionError("edges do not cover their own vertex set")


def cover_width(hg: Hypergraph, sao: Sequence, limit: int = 1 << 16) -> int:
    """Induced cover-width of an attribute order.

    Builds, for each vertex from the last in ``sao`` to the first, the family
    of hypergraphs that contain it (closed under union), records the largest
    integral edge-cover number seen, then folds the family back into the pool
    and deletes the vertex everywhere. Raises ``BlowupError`` once more than
    ``limit`` hypergraphs have been generated.
    """
    if sorted(map(str, sao)) != sorted(map(str, hg.vertices)) or len(sao) != len(hg.vertices):
        raise ValueError("order is not a permutation of the vertices")
    pool: set[frozenset] = {frozenset([e]) for e in hg.edges if e}
    generated = len(pool)
    width = 0
    for v in reversed(list(sao)):
        family = {g for g in pool if any(v in e for e in g)}
        members = list(family)
        i = 0
        while i < len(members):
            g1 = members[i]
            for j in range(i):
                u = g1 | members[j]
                if u not in family:
                    family.add(u)
                    members.append(u)
                    generated += 1
                    if generated > limit:
                        raise BlowupError(f"cover-width closure exceeded {limit} hypergraphs")
            i += 1
        for g in family:
            width = max(width, _cover_number(list(g)))
        pool |= family
        pool = {frozenset(e - {v} for e in g if e - {v}) for g in pool}
        pool.discard(frozenset())
    return width


def min_cover_width(hg: Hypergraph, limit: int = 1 << 16) -> int:
    """Cover-width of the hypergraph: the least induced cover-width over all orders."""
    return min(cover_width(hg, p, limit) for p in itertools.permutations(hg.vertices))


def primal_treewidth(hg: Hypergraph) -> int:
    return min_induced_width(hg)
