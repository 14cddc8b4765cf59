"""Knowledge base of dyadic boxes stored in a multilevel dyadic tree.

Level ``i`` of the tree is a binary trie over component ``i``; a node that
ends a stored component string is "marked" and points to the trie of the
next level. Tries are kept as dicts keyed by interval code, so walking the
prefixes of a query component is a handful of dict probes.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence

from .dyadic import Box, box_contains, format_box, parse_box, prefixes

_LEAF = True


class KnowledgeBase:
    """A set of n-dimensional boxes with superbox lookup.

    Boxes are stored exactly as given; containment between stored boxes is
    never used to prune.
    """

    def __init__(self, n: int, boxes: Iterable[Sequence[int]] = ()):
        if n < 1:
            raise ValueError("need at least one dimension")
        self.n = n
        self._root: dict = {}
        self._size = 0
        self.nodes_visited = 0
        for b in boxes:
            self.insert(b)

    def __len__(self) -> int:
        return self._size

    def __contains__(self, b) -> bool:
        node = self._root
        for c in b:
            node = node.get(c)
            if node is None:
                return False
        return True

    def __iter__(self) -> Iterator[Box]:
        n = self.n
        stack: list[tuple[dict, tuple]] = [(self._root, ())]
        while stack:
            node, acc = stack.pop()
            for c, child in node.items():
                if len(acc) + 1 == n:
                    yield acc + (c,)
                else:
                    stack.append((child, acc + (c,)))

    def insert(self, b: Sequence[int]) -> bool:
        """Store ``b``; returns False (and changes nothing) if it is already stored."""
        if len(b) != self.n:
            raise ValueError(f"box has {len(b)} components, expected {self.n}")
        node = self._root
        last = self.n - 1
        for i, c in enumerate(b):
            if i == last:
                if c in node:
                    return False
                node[c] = _LEAF
            else:
                nxt = node.get(c)
                if nxt is None:
                    nxt = node[c] = {}
                node = nxt
        self._size += 1
        return True

    def remove(self, b: Sequence[int]) -> bool:
        path = []
        node = self._root
        for c in b[:-1]:
            nxt = node.get(c)
            if nxt is None:
                return False
            path.append((node, c))
            node = nxt
        if b[-1] not in node:
            return False
        del node[b[-1]]
        while path and not node:
            parent, c = path.pop()
            del parent[c]
            node = parent
        self._size -= 1
        return True

    def find_superbox(self, b: Sequence[int]) -> Box | None:
        """A stored box containing ``b``, or None.

        Among several candidates the one with the smallest total component
        length wins, ties going to the lexicographically smallest tuple of
        bitstrings. All candidates contain ``b``, so at every level they are
        prefixes of the same string; visiting the prefixes shortest first
        therefore enumerates candidates in lexicographic order, and the first
        candidate seen at the best total is the answer.
        """
        n = self.n
        best: Box | None = None
        best_len = 1 << 30
        last = n - 1
        visited = 0
        lens = [c.bit_length() - 1 for c in b]
        stack: list[tuple[int, dict, tuple, int]] = [(0, self._root, (), 0)]
        while stack:
            level, node, acc, acc_len = stack.pop()
            if acc_len >= best_len:
                continue
            c = b[level]
            ln = lens[level]
            children = []
            for k in range(ln + 1):
                if acc_len + k >= best_len:
                    break
                p = c >> (ln - k)
                child = node.get(p)
                visited += 1
                if child is None:
                    continue
                if level == last:
                    best, best_len = acc + (p,), acc_len + k
                    break
                children.append((level + 1, child, acc + (p,), acc_len + k))
            # push in reverse so the shortest prefix is explored first
            stack.extend(reversed(children))
        self.nodes_visited += visited
        return best

    def has_superbox(self, b: Sequence[int]) -> bool:
        return self.find_superbox(b) is not None

    def all_containing(self, t: Sequence[int]) -> list[Box]:
        """Every stored box containing ``t``, in lexicographic order."""
        n = self.n
        last = n - 1
        out: list[Box] = []
        stack: list[tuple[int, dict, tuple]] = [(0, self._root, ())]
        while stack:
            level, node, acc = stack.pop()
            children = []
            for p in prefixes(t[level]):
                child = node.get(p)
                if child is None:
                    continue
                if level == last:
                    out.append(acc + (p,))
                else:
                    children.append((level + 1, child, acc + (p,)))
            stack.extend(reversed(children))
        return out

    def boxes(self) -> list[Box]:
        return sorted(self, key=_bit_key)

    def dump(self, fh) -> None:
        for b in self.boxes():
            fh.write(format_box(b) + "\n")

    @classmethod
    def load(cls, n: int, fh) -> "KnowledgeBase":
        kb = cls(n)
        for line in fh:
            line = line.strip()
            if line:
                kb.insert(parse_box(line))
        return kb


def _bit_key(b: Sequence[int]) -> tuple:
    from .dyadic import bits
    return tuple(bits(c) for c in b)


class BoxOracle:
    """Read-only access to an input box set.

    Supports full enumeration (for preloading) and the "which input boxes
    contain this point" probe used when boxes are loaded on demand.
    """

    def __init__(self, boxes: Iterable[Sequence[int]], n: int, d: int,
                 attrs: Sequence[str] | None = None):
        self.n = n
        self.d = d
        self.attrs = list(attrs) if attrs is not None else [f"A{i + 1}" for i in range(n)]
        seen = set()
        self._boxes: list[Box] = []
        for b in boxes:
            b = tuple(b)
            if len(b) != n:
                raise ValueError(f"box has {len(b)} components, expected {n}")
            if b not in seen:
                seen.add(b)
                self._boxes.append(b)
        self._kb = KnowledgeBase(n, self._boxes)
        self.probes = 0

    def __len__(self) -> int:
        return len(self._boxes)

    def boxes(self) -> list[Box]:
        return list(self._boxes)

    def all_containing(self, t: Sequence[int]) -> list[Box]:
        self.probes += 1
        return self._kb.all_containing(t)

    def brute_containing(self, t: Sequence[int]) -> list[Box]:
        return [b for b in self._boxes if box_contains(b, t)]
