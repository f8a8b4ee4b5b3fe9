"""Small simple graphs stored as neighbour bitsets.

Everything here is exact and brute force: vertex counts never exceed
``MAX_VERTICES`` so subset enumeration is cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

from . import graph6
from .canon import canonical_labelling

MAX_VERTICES = 16


@dataclass(frozen=True)
class Graph:
    """Immutable simple graph on vertices ``0..n-1``."""

    n: int
    adj: tuple[int, ...]

    def __post_init__(self):
        if not 0 <= self.n <= MAX_VERTICES:
            raise ValueError(f"vertex count {self.n} outside [0, {MAX_VERTICES}]")
        if len(self.adj) != self.n:
            raise ValueError("adjacency length does not match n")
        full = (1 << self.n) - 1
        for v, row in enumerate(self.adj):
            if row & ~full:
                raise ValueError(f"vertex {v} has a neighbour out of range")
            if row >> v & 1:
                raise ValueError(f"self-loop at vertex {v}")
            for u in _bits(row):
                if not self.adj[u] >> v & 1:
                    raise ValueError(f"asymmetric adjacency between {v} and {u}")

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for v in range(self.n) for u in _bits(self.adj[v]) if u < v]

    @property
    def num_edges(self) -> int:
        return sum(a.bit_count() for a in self.adj) // 2

    def induced(self, vertices: Sequence[int]) -> "Graph":
        """Subgraph on ``vertices``; vertex ``vertices[i]`` becomes ``i``."""
        return Graph(len(vertices), _induced_adj(self.adj, tuple(vertices)))

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Graph with vertex ``v`` renamed ``perm[v]``."""
        adj = [0] * self.n
        for v in range(self.n):
            m = 0
            for u in _bits(self.adj[v]):
                m |= 1 << perm[u]
            adj[perm[v]] = m
        return Graph(self.n, tuple(adj))

    def add_vertex(self, neighbours: int) -> "Graph":
        adj = list(self.adj)
        for u in _bits(neighbours):
            adj[u] |= 1 << self.n
        adj.append(neighbours)
        return Graph(self.n + 1, tuple(adj))

    def to_graph6(self) -> str:
        return graph6.encode(self.n, self.adj)

    @classmethod
    def from_graph6(cls, text: str) -> "Graph":
        n, adj = graph6.decode(text)
        return cls(n, adj)

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.edges()})"


@dataclass(frozen=True, order=True)
class CanonicalLabel:
    """Isomorphism-class fingerprint: canonical graph6 bytes plus |Aut|."""

    bytes: bytes
    aut_count: int

    def graph(self) -> Graph:
        return Graph.from_graph6(self.bytes.decode("ascii"))


@dataclass(frozen=True)
class BlowupSpec:
    base: Graph
    sizes: tuple[int, ...]

    def __post_init__(self):
        if len(self.sizes) != self.base.n:
            raise ValueError("one part size per base vertex is required")
        if any(s < 0 for s in self.sizes):
            raise ValueError("part sizes must be non-negative")


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _induced_adj(adj, vertices):
    pos = {v: i for i, v in enumerate(vertices)}
    out = []
    for v in vertices:
        m = 0
        for u in _bits(adj[v]):
            i = pos.get(u)
            if i is not None:
                m |= 1 << i
        out.append(m)
    return tuple(out)


def make_graph(n: int, edges: Iterable[tuple[int, int]]) -> Graph:
    if n > MAX_VERTICES:
        raise ValueError(f"at most {MAX_VERTICES} vertices supported, got {n}")
    if n < 0:
        raise ValueError("negative vertex count")
    adj = [0] * n
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
        if u == v:
            raise ValueError(f"loop at vertex {u}")
        if adj[u] >> v & 1:
            raise ValueError(f"duplicate edge ({u}, {v})")
        adj[u] |= 1 << v
        adj[v] |= 1 << u
    return Graph(n, tuple(adj))


def is_triangle_free(g: Graph) -> bool:
    adj = g.adj
    for v in range(g.n):
        for u in _bits(adj[v] >> (v + 1) << (v + 1)):
            if adj[u] & adj[v]:
                return False
    return True


def canonical_form(g: Graph) -> CanonicalLabel:
    lab = canonical_labelling(g.n, g.adj)
    code = graph6.encode(g.n, lab.code).encode("ascii")
    return CanonicalLabel(code, lab.aut_order)


def canonical_graph(g: Graph) -> Graph:
    """The canonical representative of ``g``'s isomorphism class."""
    return Graph(g.n, canonical_labelling(g.n, g.adj).code)


@lru_cache(maxsize=None)
def _class_key(n: int, adj: tuple[int, ...]) -> tuple[int, ...]:
    return canonical_labelling(n, adj).code


def is_isomorphic(g: Graph, h: Graph) -> bool:
    return g.n == h.n and g.num_edges == h.num_edges and _class_key(g.n, g.adj) == _class_key(h.n, h.adj)


def count_c5(g: Graph) -> int:
    """Number of 5-cycle subgraphs, each counted once."""
    adj = g.adj
    total = 0
    for a in range(g.n):
        higher = ~((1 << (a + 1)) - 1)
        # paths a-b-c-d-e with all of b..e > a, closing e-a
        for b in _bits(adj[a] & higher):
            for c in _bits(adj[b] & higher & ~(1 << a)):
                for d in _bits(adj[c] & higher & ~(1 << b)):
                    if d == b:
                        continue
                    ends = adj[d] & adj[a] & higher & ~((1 << b) | (1 << c))
                    total += ends.bit_count()
    return total // 2


def count_induced(g: Graph, h: Graph) -> int:
    """Number of vertex sets ``S`` with ``g[S]`` isomorphic to ``h``."""
    k = h.n
    if k > 7:
        raise ValueError("pattern graphs are limited to 7 vertices")
    if k > g.n:
        return 0
    target = _class_key(h.n, h.adj)
    m = h.num_edges
    count = 0
    for s in combinations(range(g.n), k):
        sub = _induced_adj(g.adj, s)
        if sum(a.bit_count() for a in sub) != 2 * m:
            continue
        if _class_key(k, sub) == target:
            count += 1
    return count


def blowup(spec: BlowupSpec) -> Graph:
    base, sizes = spec.base, spec.sizes
    total = sum(sizes)
    if total > MAX_VERTICES:
        raise ValueError(f"blow-up has {total} vertices, above {MAX_VERTICES}")
    parts = []
    start = 0
    for s in sizes:
        parts.append(range(start, start + s))
        start += s
    part_mask = [sum(1 << v for v in p) for p in parts]
    adj = [0] * total
    for i, p in enumerate(parts):
        m = 0
        for j in _bits(base.adj[i]):
            m |= part_mask[j]
        for v in p:
            adj[v] = m
    return Graph(total, tuple(adj))


def cycle(n: int) -> Graph:
    return make_graph(n, [(i, (i + 1) % n) for i in range(n)])


C5 = cycle(5)
C5_PLUS = blowup(BlowupSpec(C5, (2, 1, 1, 1, 1)))
K3 = make_graph(3, [(0, 1), (1, 2), (0, 2)])
EDGE = make_graph(2, [(0, 1)])


def balanced_sizes(n: int, parts: int = 5) -> tuple[int, ...]:
    q, r = divmod(n, parts)
    return tuple(q + 1 if i < r else q for i in range(parts))


def balanced_blowup_c5(n: int) -> Graph:
    return blowup(BlowupSpec(C5, balanced_sizes(n)))


def max_c5_formula(n: int) -> int:
    """Product of floor((n + i) / 5) over i = 0..4."""
    out = 1
    for i in range(5):
        out *= (n + i) // 5
    return out


def mobius_ladder_8() -> Graph:
    edges = [(i, (i + 1) % 8) for i in range(8)] + [(i, i + 4) for i in range(4)]
    return make_graph(8, edges)


def petersen() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return make_graph(10, outer + spokes + inner)
