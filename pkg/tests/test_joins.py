import itertools
import json
import random

import pytest

from support import box_points, bx
from tetrisjoin.dyadic import LAMBDA, box_contains, value_interval
from tetrisjoin.engine import suggest_sao
from tetrisjoin.instances import gen_fig_triangle
from tetrisjoin.joins import (BlowupError, Hypergraph, IndexSpec, Query, Relation,
                              cover_width, dyadic_tree_gap_boxes, evaluate, gao_gap_boxes,
                              gyo_eliminate, induced_width, is_alpha_acyclic, is_gao_consistent,
                              load_query, min_cover_width, min_induced_width,
                              primal_treewidth, query_gap_boxes, query_oracle, read_table)
from tetrisjoin.verify import brute_force_join


def cross_relation():
    return Relation("R", ["A", "B"],
                    [(4, b) for b in range(1, 8)] + [(a, 4) for a in range(1, 8)])


def _complement(rel, d):
    return set(itertools.product(range(1 << d), repeat=len(rel.attrs))) - set(rel.tuples)


def _union(boxes, d):
    out = set()
    for b in boxes:
        out |= box_points(b, d)
    return out


def test_cross_gap_boxes_ab():
    got = set(gao_gap_boxes(cross_relation(), ["A", "B"], 3))
    want = {bx("000", "*"), bx("100", "000")}
    for a in (1, 2, 3, 5, 6, 7):
        col = format(a, "03b")
        want |= {bx(col, "0"), bx(col, "101"), bx(col, "11")}
    assert got == want


def test_cross_gap_boxes_ba():
    got = set(gao_gap_boxes(cross_relation(), ["B", "A"], 3))
    want = {bx("*", "000"), bx("000", "100")}
    for b in (1, 2, 3, 5, 6, 7):
        row = format(b, "03b")
        want |= {bx("0", row), bx("101", row), bx("11", row)}
    assert got == want


def test_cross_quadtree_has_empty_quadrant():
    boxes = dyadic_tree_gap_boxes(cross_relation(), 3)
    assert bx("0", "0") in boxes
    assert _union(boxes, 3) == _complement(cross_relation(), 3)


def test_empty_relation_gap():
    rel = Relation("E", ["A", "B"], [])
    assert gao_gap_boxes(rel, ["A", "B"], 2) == [bx("*", "*")]
    assert dyadic_tree_gap_boxes(rel, 2) == [bx("*", "*")]


def test_full_relation_no_gap():
    rel = Relation("F", ["A", "B"], list(itertools.product(range(4), repeat=2)))
    assert dyadic_tree_gap_boxes(rel, 2) == []
    assert gao_gap_boxes(rel, ["A", "B"], 2) == []


def test_single_tuple_quadtree():
    rel = Relation("S", ["A", "B"], [(0, 0)])
    assert set(dyadic_tree_gap_boxes(rel, 1)) == {bx("1", "*"), bx("0", "1")}


def test_gap_boxes_complement_exhaustive():
    rng = random.Random(4)
    for _ in range(150):
        k = rng.randint(1, 3)
        d = rng.randint(1, 16 // k if k > 1 else 4)
        d = min(d, 5)
        universe = list(itertools.product(range(1 << d), repeat=k))
        tuples = rng.sample(universe, rng.randint(0, min(40, len(universe))))
        rel = Relation("R", [f"X{i}" for i in range(k)], tuples)
        comp = _complement(rel, d)
        order = list(rel.attrs)
        rng.shuffle(order)
        gao = gao_gap_boxes(rel, order, d)
        assert _union(gao, d) == comp
        positions = [rel.attrs.index(a) for a in order]
        assert all(is_gao_consistent(b, positions, d) for b in gao)
        quad = dyadic_tree_gap_boxes(rel, d)
        assert _union(quad, d) == comp
        assert sum(len(box_points(b, d)) for b in quad) == len(comp)


def test_is_gao_consistent():
    assert is_gao_consistent(bx("011", "10", "*"), [0, 1, 2], 3)
    assert not is_gao_consistent(bx("01", "10", "*"), [0, 1, 2], 3)
    assert not is_gao_consistent(bx("011", "10", "1"), [0, 1, 2], 3)
    assert is_gao_consistent(bx("10", "011", "*"), [1, 0, 2], 3)


def test_query_oracle_empty_triangle():
    inst = gen_fig_triangle("empty", 2)
    rels = [Relation("R", ["A", "B"], [(a, b) for a in range(4) for b in range(4) if (a >> 1) != (b >> 1)]),
            Relation("S", ["B", "C"], [(a, b) for a in range(4) for b in range(4) if (a >> 1) != (b >> 1)]),
            Relation("T", ["A", "C"], [(a, b) for a in range(4) for b in range(4) if (a >> 1) != (b >> 1)])]
    q = Query(["A", "B", "C"], rels, 2)
    specs = {r.name: [IndexSpec("dyadic_tree")] for r in rels}
    assert set(query_gap_boxes(q, specs)) == set(inst.boxes)
    assert len(query_gap_boxes(q, specs)) == 6
    oracle = query_oracle(q, specs)
    assert evaluate(q, "preloaded", indices=specs)[0] == []
    assert oracle.all_containing(tuple(value_interval(v, 2) for v in (0, 2, 1))) != []


def test_multiple_indices_union():
    rel = cross_relation()
    q = Query(["A", "B"], [rel], 3)
    both = query_gap_boxes(q, {"R": [IndexSpec("gao", ["A", "B"]), IndexSpec("gao", ["B", "A"])]})
    naive = set(gao_gap_boxes(rel, ["A", "B"], 3)) | set(gao_gap_boxes(rel, ["B", "A"], 3))
    assert set(both) == naive and len(both) == len(naive)


def test_output_probe_is_empty():
    q = Query(["A", "B"], [cross_relation()], 3)
    oracle = query_oracle(q)
    for t in cross_relation().tuples:
        assert oracle.all_containing(tuple(value_interval(v, 3) for v in t)) == []


def test_gyo():
    bowtie = Hypergraph(["A", "B"], [frozenset("A"), frozenset("AB"), frozenset("B")])
    assert gyo_eliminate(bowtie) is not None
    tri = Hypergraph(list("ABC"), [frozenset("AB"), frozenset("BC"), frozenset("AC")])
    assert gyo_eliminate(tri) is None and not is_alpha_acyclic(tri)
    single = Hypergraph(list("ABC"), [frozenset("ABC")])
    assert sorted(gyo_eliminate(single)) == ["A", "B", "C"]


def test_induced_width_examples():
    path = Hypergraph(list("ABC"), [frozenset("AB"), frozenset("BC")])
    assert induced_width(path, list("ABC")) == 1
    tri = Hypergraph(list("ABC"), [frozenset("AB"), frozenset("BC"), frozenset("AC")])
    assert all(induced_width(tri, p) == 2 for p in itertools.permutations("ABC"))
    assert induced_width(Hypergraph(["A"], []), ["A"]) == 0
    # a bad order for the path: eliminating B first joins A and C
    assert induced_width(Hypergraph(list("ABC"), [frozenset("AB"), frozenset("BC")]), list("ACB")) == 2


def test_min_width_dp_matches_permutations():
    rng = random.Random(8)
    for _ in range(40):
        n = rng.randint(1, 6)
        vs = [f"V{i}" for i in range(n)]
        edges = [frozenset(rng.sample(vs, rng.randint(1, min(3, n)))) for _ in range(rng.randint(0, 6))]
        hg = Hypergraph(vs, edges)
        brute = min(induced_width(hg, p) for p in itertools.permutations(vs))
        assert min_induced_width(hg) == brute == primal_treewidth(hg)


def test_cover_width_values():
    tri = Hypergraph(list("ABC"), [frozenset("AB"), frozenset("BC"), frozenset("AC")])
    k4 = Hypergraph(list("ABCD"), [frozenset(e) for e in itertools.combinations("ABCD", 2)])
    nested = Hypergraph(list("ABC"), [frozenset("A"), frozenset("AB"), frozenset("ABC")])
    assert min_cover_width(tri) == 2
    assert min_cover_width(k4) == 3
    assert cover_width(nested, list("ABC")) == 1


def test_cover_width_guard():
    k5 = Hypergraph(list("ABCDE"), [frozenset(e) for e in itertools.combinations("ABCDE", 2)])
    with pytest.raises(BlowupError):
        cover_width(k5, list("ABCDE"), limit=50)


def _write_query(tmp_path, rels, attributes, extra=None):
    spec = {"attributes": attributes, "relations": []}
    for name, attrs, rows in rels:
        path = tmp_path / f"{name}.csv"
        path.write_text(",".join(attrs) + "\n" + "".join(",".join(map(str, r)) + "\n" for r in rows))
        spec["relations"].append({"name": name, "attrs": attrs, "file": path.name, **(extra or {})})
    qpath = tmp_path / "q.json"
    qpath.write_text(json.dumps(spec))
    return qpath


def test_load_query_dictionary_encoding(tmp_path):
    qpath = _write_query(tmp_path, [("R", ["A", "B"], [("x", 10), ("y", 2)]),
                                    ("S", ["B"], [(2,), (10,), (7,)])], ["A", "B"])
    q = load_query(str(qpath))
    assert q.dictionaries["B"] == ["2", "7", "10"]
    assert q.d == 2
    rows, _ = evaluate(q, "reloaded", ["A", "B"])
    assert sorted(q.decode(r) for r in rows) == [("x", "10"), ("y", "2")]


def test_read_table_tsv(tmp_path):
    p = tmp_path / "t.tsv"
    p.write_text("A\tB\n1\t2\n")
    assert read_table(str(p)) == (["A", "B"], [["1", "2"]])
    with pytest.raises(FileNotFoundError):
        read_table(str(tmp_path / "missing.csv"))


def test_relation_validation():
    with pytest.raises(ValueError):
        Relation("R", ["A", "A"], [])
    with pytest.raises(ValueError):
        Relation("R", ["A"], [(1, 2)])
    with pytest.raises(ValueError):
        Query(["A"], [Relation("R", ["A"], [(4,)])], 2)
    with pytest.raises(ValueError):
        Query(["A"], [Relation("R", ["B"], [(0,)])], 2)


def test_bowtie_join():
    q = Query(["A", "B"], [Relation("R", ["A"], [(0,), (2,), (3,)]),
                           Relation("S", ["A", "B"], [(0, 1), (2, 2), (1, 3)]),
                           Relation("T", ["B"], [(1,), (2,)])], 2)
    sao = suggest_sao(q.hypergraph(), "reverse_gyo")
    assert evaluate(q, "preloaded", sao)[0] == brute_force_join(q) == [(0, 1), (2, 2)]


def test_padding_excluded():
    q = Query(["A", "B"], [Relation("R", ["A"], [(0,), (1,)])], 2, dictionaries={"A": ["a", "b"], "B": ["u", "v", "w"]})
    rows, _ = evaluate(q, "preloaded")
    assert all(r[1] < 3 for r in rows)
    assert len(rows) == 6
    assert LAMBDA == 1 and box_contains(bx("*", "*"), bx("0", "1"))
