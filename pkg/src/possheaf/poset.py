"""Finite posets as finite topological spaces (Alexandrov: opens are up-sets).

Elements carry stable string identifiers; derived structure is indexed by
position.  Monotone maps are the continuous maps between these spaces.
"""

from __future__ import annotations

import heapq


class UnknownElement(Exception):
    pass


class NotMonotone(Exception):
    pass


class Poset:
    """Finite poset given by elements and covering pairs x < y (x covered by y)."""

    def __init__(self, elements, covers):
        self.elements = list(elements)
        if len(set(self.elements)) != len(self.elements):
            raise ValueError("duplicate element identifiers")
        self.index = {e: i for i, e in enumerate(self.elements)}
        self.covers = []
        for x, y in covers:
            if x not in self.index or y not in self.index:
                raise UnknownElement("cover (%r, %r) uses unknown element" % (x, y))
            self.covers.append((self.index[x], self.index[y]))
        n = len(self.elements)
        # reflexive-transitive closure of the cover relation
        leq = [set([i]) for i in range(n)]
        succ = [set() for _ in range(n)]
        for i, j in self.covers:
            succ[i].add(j)
        order = self._toposort(succ, n)
        for i in reversed(order):
            for j in succ[i]:
                leq[i] |= leq[j]
        self.up = leq  # up[i] = {j : i <= j}
        self.down = [set() for _ in range(n)]
        for i in range(n):
            for j in self.up[i]:
                self.down[j].add(i)
        for i in range(n):
            for j in self.up[i]:
                if j != i and i in self.up[j]:
                    raise ValueError("cover graph has a cycle through %r" % self.elements[i])
        self._check_transitive_reduction()

    @staticmethod
    def _toposort(succ, n):
        indeg = [0] * n
        for i in range(n):
            for j in succ[i]:
                indeg[j] += 1
        stack = [i for i in range(n) if indeg[i] == 0]
        order = []
        while stack:
            i = stack.pop()
            order.append(i)
            for j in succ[i]:
                indeg[j] -= 1
                if indeg[j] == 0:
                    stack.append(j)
        if len(order) != n:
            raise ValueError("cover graph has a cycle")
        return order

    def _check_transitive_reduction(self):
        cov = set(self.covers)
        for i, j in cov:
            # a cover must not be implied by a longer path
            for k in self.up[i]:
                if k != i and k != j and j in self.up[k]:
                    raise ValueError(
                        "cover (%s, %s) is not in the transitive reduction"
                        % (self.elements[i], self.elements[j])
                    )

    def __len__(self):
        return len(self.elements)

    def idx(self, x) -> int:
        if x not in self.index:
            raise UnknownElement("unknown element %r" % x)
        return self.index[x]

    def leq(self, x, y) -> bool:
        return self.idx(y) in self.up[self.idx(x)]

    def up_set(self, x):
        """Minimal open U_x = {y : y >= x}, as a set of identifiers."""
        return {self.elements[j] for j in self.up[self.idx(x)]}

    def up_idx(self, i):
        return self.up[i]

    def down_idx(self, i):
        return self.down[i]

    def is_open(self, names) -> bool:
        idxs = {self.idx(x) for x in names}
        return all(self.up[i] <= idxs for i in idxs)

    def open_sets(self):
        """All up-sets, as frozensets of indices (exponential; small posets)."""
        # grow from the empty open by unioning in the minimal opens U_x
        gens = [frozenset(self.up[i]) for i in range(len(self.elements))]
        seen = {frozenset()}
        frontier = [frozenset()]
        while frontier:
            s = frontier.pop()
            for g in gens:
                t = s | g
                if t not in seen:
                    seen.add(t)
                    frontier.append(t)
        return sorted(seen, key=lambda s: (len(s), sorted(s)))

    def longest_chain_length(self) -> int:
        """Edge count of the longest chain."""
        n = len(self.elements)
        succ = [set() for _ in range(n)]
        for i, j in self.covers:
            succ[i].add(j)
        depth = [0] * n
        for i in reversed(self._toposort(succ, n)):
            depth[i] = max((depth[j] + 1 for j in succ[i]), default=0)
        return max(depth, default=0)

    def linear_extension(self):
        """Element indices in a topological (low-to-high) order, deterministic."""
        n = len(self.elements)
        succ = [set() for _ in range(n)]
        for i, j in self.covers:
            succ[i].add(j)
        indeg = [0] * n
        for i in range(n):
            for j in succ[i]:
                indeg[j] += 1
        heap = [i for i in range(n) if indeg[i] == 0]
        heapq.heapify(heap)
        order = []
        while heap:
            i = heapq.heappop(heap)
            order.append(i)
            for j in sorted(succ[i]):
                indeg[j] -= 1
                if indeg[j] == 0:
                    heapq.heappush(heap, j)
        return order

    def __repr__(self):
        return "Poset(%d elements, %d covers)" % (len(self.elements), len(self.covers))


def product(p: Poset, q: Poset, sep: str = ".") -> Poset:
    """Product poset with componentwise order; identifiers joined by sep."""
    elements = ["%s%s%s" % (a, sep, b) for a in p.elements for b in q.elements]
    covers = []
    for a in p.elements:
        for b in q.elements:
            for (i, j) in p.covers:
                if p.elements[i] == a:
                    covers.append(("%s%s%s" % (a, sep, b), "%s%s%s" % (p.elements[j], sep, b)))
            for (i, j) in q.covers:
                if q.elements[i] == b:
                    covers.append(("%s%s%s" % (a, sep, b), "%s%s%s" % (a, sep, q.elements[j])))
    return Poset(elements, covers)


class MonotoneMap:
    """Order-preserving map of posets, i.e. a continuous map of finite spaces."""

    def __init__(self, source: Poset, target: Poset, values):
        self.source = source
        self.target = target
        if set(values) != set(source.elements):
            raise UnknownElement("map must be total on the source")
        self.values = [target.idx(values[e]) for e in source.elements]
        bad = self.violations()
        if bad:
            x, y = bad[0]
            raise NotMonotone("not monotone on %d pairs, first (%s <= %s)" % (len(bad), x, y))

    def violations(self):
        out = []
        for i, j in self.source.covers:
            if self.values[j] not in self.target.up[self.values[i]]:
                out.append((self.source.elements[i], self.source.elements[j]))
        return out

    def apply(self, x):
        return self.target.elements[self.values[self.source.idx(x)]]

    def preimage(self, names):
        idxs = {self.target.idx(x) for x in names}
        return {self.source.elements[i] for i in range(len(self.source)) if self.values[i] in idxs}

    def preimage_idx(self, idxs):
        return {i for i in range(len(self.source)) if self.values[i] in idxs}

    @classmethod
    def identity(cls, p: Poset) -> "MonotoneMap":
        return cls(p, p, {e: e for e in p.elements})

    @classmethod
    def to_point(cls, p: Poset, point: Poset | None = None) -> "MonotoneMap":
        pt = point if point is not None else Poset(["pt"], [])
        return cls(p, pt, {e: pt.elements[0] for e in p.elements})

    @classmethod
    def product_projection(cls, p: Poset, q: Poset, axis: int, sep: str = ".") -> "MonotoneMap":
        prod = product(p, q, sep)
        tgt = p if axis == 0 else q
        values = {}
        for a in p.elements:
            for b in q.elements:
                values["%s%s%s" % (a, sep, b)] = a if axis == 0 else b
        return cls(prod, tgt, values)


def fence_x4() -> Poset:
    """The pseudocircle: minimal finite model of the circle."""
    return Poset(["a", "b", "c", "d"], [("a", "c"), ("a", "d"), ("b", "c"), ("b", "d")])


def chain(n: int) -> Poset:
    """Chain 0 < 1 < ... < n-1."""
    return Poset([str(i) for i in range(n)], [(str(i), str(i + 1)) for i in range(n - 1)])
