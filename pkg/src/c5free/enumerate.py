"""Isomorph-free generation of triangle-free graphs by canonical augmentation.

Each graph on ``n + 1`` vertices is built from a parent on ``n`` vertices by
adding a vertex whose neighbourhood is an independent set (so no triangle
can appear). A child is kept only when the new vertex lies in the orbit of
the child's canonical deletion vertex: the maximum-degree vertex placed
last by the canonical labelling. Duplicates among the children of a single
parent are removed with a per-parent set, so memory stays proportional to
the depth of the tree.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .canon import canonical_labelling, orbit_partition
from .graphs import CanonicalLabel, Graph, canonical_form, count_c5

MAX_ENUMERATION_N = 12


@dataclass
class Census:
    n: int
    total: int = 0
    max_c5: int = -1
    winners: list[CanonicalLabel] = field(default_factory=list)

    def add(self, g: Graph) -> None:
        self.total += 1
        c = count_c5(g)
        if c > self.max_c5:
            self.max_c5 = c
            self.winners = [canonical_form(g)]
        elif c == self.max_c5:
            self.winners.append(canonical_form(g))

    def merge(self, other: "Census") -> None:
        self.total += other.total
        if other.max_c5 > self.max_c5:
            self.max_c5, self.winners = other.max_c5, list(other.winners)
        elif other.max_c5 == self.max_c5:
            self.winners.extend(other.winners)

    def finish(self) -> "Census":
        self.winners = sorted(set(self.winners))
        return self


def independent_sets(g: Graph) -> Iterator[int]:
    """All independent vertex sets of ``g`` as bitmasks, including the empty set."""
    adj = g.adj

    def rec(v, chosen, blocked):
        if v == g.n:
            yield chosen
            return
        yield from rec(v + 1, chosen, blocked)
        if not blocked >> v & 1:
            yield from rec(v + 1, chosen | (1 << v), blocked | adj[v])

    yield from rec(0, 0, 0)


def _accept(child: Graph) -> bool:
    new = child.n - 1
    degs = [child.degree(v) for v in range(child.n)]
    top = max(degs)
    if degs[new] != top:
        return False
    lab = canonical_labelling(child.n, child.adj)
    # canonical deletion vertex: the max-degree vertex with the last position
    w = next(v for v in reversed(lab.lab) if degs[v] == top)
    if w == new:
        return True
    orbit = orbit_partition(child.n, lab.generators)
    return orbit[w] == orbit[new]


def children(g: Graph) -> Iterator[Graph]:
    """Canonical children of ``g``, one per isomorphism class."""
    seen = set()
    for s in independent_sets(g):
        child = g.add_vertex(s)
        if not _accept(child):
            continue
        key = canonical_labelling(child.n, child.adj).code
        if key in seen:
            continue
        seen.add(key)
        yield child


def _walk(g: Graph, target: int, visit: Callable[[Graph], None]) -> int:
    if g.n == target:
        visit(g)
        return 1
    return sum(_walk(c, target, visit) for c in children(g))


def iter_level(n: int) -> Iterator[Graph]:
    """Yield one triangle-free graph per isomorphism class on ``n`` vertices."""
    if n < 0:
        raise ValueError("negative vertex count")

    def rec(g):
        if g.n == n:
            yield g
            return
        for c in children(g):
            yield from rec(c)

    yield from rec(Graph(0, ()))


def enumerate_triangle_free(n: int, visit: Callable[[Graph], None] | None = None,
                            workers: int = 1) -> int:
    """Visit every triangle-free graph on ``n`` vertices up to isomorphism.

    Returns the number of classes. With ``workers > 1`` the tree is split
    below the first few levels and explored in separate processes; the
    visitor then only sees graphs in the parent process order of completion,
    so pass ``visit=None`` or an order-insensitive aggregator.
    """
    if n > MAX_ENUMERATION_N:
        raise ValueError(f"enumeration is limited to n <= {MAX_ENUMERATION_N}")
    visit = visit or (lambda g: None)
    if workers <= 1 or n < 7:
        count = 0
        for g in iter_level(n):
            visit(g)
            count += 1
        return count
    split = min(n - 1, 6)
    roots = list(iter_level(split))
    with ProcessPoolExecutor(workers) as pool:
        parts = pool.map(_collect_g6, [r.to_graph6() for r in roots], [n] * len(roots))
        count = 0
        for part in parts:
            for s in part:
                visit(Graph.from_graph6(s))
                count += 1
    return count


def _collect_g6(root_g6: str, n: int) -> list[str]:
    out: list[str] = []
    _walk(Graph.from_graph6(root_g6), n, lambda g: out.append(g.to_graph6()))
    return out


def _census_subtree(root_g6: str, n: int) -> Census:
    c = Census(n)
    _walk(Graph.from_graph6(root_g6), n, c.add)
    return c


def extremal_c5(n: int, workers: int = 1) -> Census:
    """Maximum 5-cycle count over triangle-free graphs on ``n`` vertices and all maximisers."""
    if not 0 <= n <= MAX_ENUMERATION_N:
        raise ValueError(f"n must lie in [0, {MAX_ENUMERATION_N}]")
    census = Census(n)
    if workers <= 1 or n < 7:
        for g in iter_level(n):
            census.add(g)
        return census.finish()
    roots = [r.to_graph6() for r in iter_level(min(n - 1, 6))]
    with ProcessPoolExecutor(workers) as pool:
        for part in pool.map(_census_subtree, roots, [n] * len(roots)):
            census.merge(part)
    return census.finish()


def level_counts(max_n: int) -> list[int]:
    """Class counts for every order ``0..max_n`` from a single tree walk."""
    if max_n > MAX_ENUMERATION_N:
        raise ValueError(f"enumeration is limited to n <= {MAX_ENUMERATION_N}")
    counts = [0] * (max_n + 1)

    def rec(g):
        counts[g.n] += 1
        if g.n < max_n:
            for c in children(g):
                rec(c)

    rec(Graph(0, ()))
    return counts
