import io
import itertools
import random

from hypothesis import given
from hypothesis import strategies as st

from support import bits_key, boxes, bx, random_box
from tetrisjoin.boxindex import BoxOracle, KnowledgeBase
from tetrisjoin.dyadic import box_contains, boxes_containing_point, point


def test_insert_and_duplicates():
    kb = KnowledgeBase(2)
    assert kb.insert(bx("0", "*"))
    assert not kb.insert(bx("0", "*"))
    assert len(kb) == 1
    # no subsumption pruning: a sub-box is stored separately
    assert kb.insert(bx("0", "1"))
    assert len(kb) == 2
    assert bx("0", "*") in kb and bx("0", "1") in kb


def test_find_superbox_examples():
    assert KnowledgeBase(2, [bx("*", "*")]).find_superbox(bx("10", "01")) == bx("*", "*")
    assert KnowledgeBase(2, [bx("0", "*")]).find_superbox(bx("1", "*")) is None
    kb = KnowledgeBase(2, [bx("0", "*"), bx("0", "1")])
    assert kb.find_superbox(bx("01", "11")) == bx("0", "*")


def test_find_superbox_tie_break():
    # totals: <1,*> and <*,0> both have length 1; lexicographic order on bitstrings
    # puts "" (λ) before "1", so <*,0> wins
    kb = KnowledgeBase(2, [bx("1", "*"), bx("*", "0"), bx("10", "01")])
    assert kb.find_superbox(bx("10", "01")) == bx("*", "0")


def test_remove_and_iterate():
    kb = KnowledgeBase(3, [bx("0", "*", "1"), bx("0", "1", "1"), bx("1", "*", "*")])
    assert kb.remove(bx("0", "1", "1"))
    assert not kb.remove(bx("0", "1", "1"))
    assert sorted(kb) == sorted([bx("0", "*", "1"), bx("1", "*", "*")])
    assert len(kb) == 2


def test_dump_load_roundtrip():
    kb = KnowledgeBase(2, [bx("10", "*"), bx("*", "0")])
    buf = io.StringIO()
    kb.dump(buf)
    assert buf.getvalue() == "<*,0>\n<10,*>\n"
    buf.seek(0)
    assert sorted(KnowledgeBase.load(2, buf)) == sorted(kb)


def _scan_best(stored, q):
    """Oracle for find_superbox: linear scan with the documented tie-break."""
    hits = [a for a in stored if box_contains(a, q)]
    if not hits:
        return None
    return min(hits, key=lambda a: (sum(c.bit_length() - 1 for c in a), bits_key(a)))


@given(st.data())
def test_find_superbox_matches_scan(data):
    n, d = data.draw(st.integers(1, 3)), data.draw(st.integers(1, 4))
    stored = data.draw(st.lists(boxes(n, d), max_size=25))
    kb = KnowledgeBase(n, stored)
    for _ in range(5):
        q = data.draw(boxes(n, d))
        assert kb.find_superbox(q) == _scan_best(stored, q)


def test_all_containing_full_set():
    t = bx("10", "01")
    kb = KnowledgeBase(2, boxes_containing_point(t))
    assert len(kb.all_containing(t)) == 9


def test_all_containing_matches_scan():
    rng = random.Random(7)
    for _ in range(200):
        n, d = rng.randint(1, 4), rng.randint(1, 4)
        stored = [random_box(rng, n, d) for _ in range(rng.randint(0, 30))]
        kb = KnowledgeBase(n, stored)
        t = point([rng.randrange(1 << d) for _ in range(n)], d)
        assert sorted(kb.all_containing(t)) == sorted({a for a in stored if box_contains(a, t)})


def test_nodes_visited_grows():
    kb = KnowledgeBase(2, [bx("0", "1")])
    kb.find_superbox(bx("01", "10"))
    assert 0 < kb.nodes_visited <= (2 + 1) * 2


def test_oracle_dedup_and_probe_count():
    o = BoxOracle([bx("0", "*"), bx("0", "*"), bx("1", "1")], 2, 1)
    assert len(o) == 2
    assert o.attrs == ["A1", "A2"]
    t = bx("1", "1")
    assert o.all_containing(t) == o.brute_containing(t) == [bx("1", "1")]
    assert o.probes == 1


def test_oracle_rejects_wrong_arity():
    try:
        BoxOracle([bx("0")], 2, 1)
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")


def test_exhaustive_superbox_small():
    # every stored subset of the 7 one-dimensional d=2 intervals
    ivs = [(c,) for c in (1, 2, 3, 4, 5, 6, 7)]
    for r in range(len(ivs) + 1):
        for stored in itertools.combinations(ivs, r):
            kb = KnowledgeBase(1, stored)
            for q in ivs:
                assert kb.find_superbox(q) == _scan_best(stored, q)
