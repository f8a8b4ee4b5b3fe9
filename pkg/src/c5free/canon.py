"""Canonical labelling of small graphs by partition refinement.

A stripped-down version of McKay's individualisation-refinement search:
equitable refinement, a depth-first search tree over the first
non-singleton cell, and pruning with the automorphisms discovered along
the way. Good enough for the 16-vertex ceiling used in this package.

The search also yields generators of the automorphism group and its
order, computed from the stabiliser orbits along the first path.
"""

from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple


class Labelling(NamedTuple):
    lab: tuple[int, ...]          # lab[i] is the vertex placed at position i
    code: tuple[int, ...]         # adjacency masks of the relabelled graph
    generators: tuple[tuple[int, ...], ...]
    aut_order: int


def _mask(cell) -> int:
    m = 0
    for v in cell:
        m |= 1 << v
    return m


def _refine(adj, cells, queue):
    """Coarsest equitable refinement of ``cells``, splitting with ``queue``.

    Fragments are ordered by neighbour count so the result only depends on
    isomorphism-invariant data.
    """
    n_cells = len(cells)
    n = sum(len(c) for c in cells)
    qi = 0
    while qi < len(queue) and n_cells < n:
        w = queue[qi]
        qi += 1
        out = []
        for cell in cells:
            if len(cell) == 1:
                out.append(cell)
                continue
            groups: dict[int, list[int]] = {}
            for v in cell:
                groups.setdefault((adj[v] & w).bit_count(), []).append(v)
            if len(groups) == 1:
                out.append(cell)
                continue
            for key in sorted(groups):
                frag = groups[key]
                out.append(frag)
                queue.append(_mask(frag))
            n_cells += len(groups) - 1
        cells = out
    return cells


def _relabel_code(adj, lab):
    pos = [0] * len(lab)
    for i, v in enumerate(lab):
        pos[v] = i
    code = []
    for v in lab:
        m = 0
        a = adj[v]
        while a:
            low = a & -a
            m |= 1 << pos[low.bit_length() - 1]
            a ^= low
        code.append(m)
    return tuple(code)


class _Orbits:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _orbits(n, gens, fixed):
    orb = _Orbits(n)
    for g in gens:
        if all(g[v] == v for v in fixed):
            for v in range(n):
                orb.union(v, g[v])
    return orb


class _Search:
    def __init__(self, n, adj):
        self.n = n
        self.adj = adj
        self.first_lab = None
        self.first_code = None
        self.first_path = None
        self.best_lab = None
        self.best_code = None
        self.gens: list[tuple[int, ...]] = []

    def _automorphism(self, lab_from, lab_to):
        g = [0] * self.n
        for a, b in zip(lab_from, lab_to):
            g[a] = b
        g = tuple(g)
        if g not in self.gens and any(g[v] != v for v in range(self.n)):
            self.gens.append(g)

    def leaf(self, cells, path):
        lab = tuple(c[0] for c in cells)
        code = _relabel_code(self.adj, lab)
        if self.first_lab is None:
            self.first_lab, self.first_code, self.first_path = lab, code, list(path)
            self.best_lab, self.best_code = lab, code
            return None
        if code == self.first_code:
            self._automorphism(self.first_lab, lab)
            common = 0
            for a, b in zip(path, self.first_path):
                if a != b:
                    break
                common += 1
            return common
        if code == self.best_code:
            self._automorphism(self.best_lab, lab)
        elif code > self.best_code:
            self.best_lab, self.best_code = lab, code
        return None

    def visit(self, cells, path):
        """Explore the subtree; return a depth to jump back to, or None."""
        if len(cells) == self.n:
            return self.leaf(cells, path)
        depth = len(path)
        ti = next(i for i, c in enumerate(cells) if len(c) > 1)
        target = sorted(cells[ti])
        done: list[int] = []
        for v in target:
            if done:
                orb = _orbits(self.n, self.gens, path)
                rv = orb.find(v)
                if any(orb.find(u) == rv for u in done):
                    continue
            rest = [u for u in cells[ti] if u != v]
            child = cells[:ti] + [[v], rest] + cells[ti + 1:]
            child = _refine(self.adj, child, [1 << v])
            jump = self.visit(child, path + [v])
            done.append(v)
            if jump is not None and jump < depth:
                return jump
        return None


def canonical_labelling(n: int, adj: tuple[int, ...], cells=None) -> Labelling:
    """Canonical labelling of a graph given by neighbour bitmasks.

    ``cells`` is an optional ordered partition (tuple of tuples) that the
    labelling must respect; flags pass their roots as leading singletons.
    """
    if cells is None:
        cells = (tuple(range(n)),) if n else ()
    return _canonical_cached(n, tuple(adj), tuple(tuple(c) for c in cells))


@lru_cache(maxsize=200_000)
def _canonical_cached(n, adj, cells):
    if n == 0:
        return Labelling((), (), (), 1)
    start = [list(c) for c in cells if c]
    start = _refine(adj, start, [_mask(c) for c in start])
    s = _Search(n, adj)
    s.visit(start, [])
    order = 1
    path = s.first_path
    for d, v in enumerate(path):
        orb = _orbits(n, s.gens, path[:d])
        rv = orb.find(v)
        order *= sum(1 for u in range(n) if orb.find(u) == rv)
    return Labelling(s.best_lab, s.best_code, tuple(s.gens), order)


def orbit_partition(n: int, gens) -> list[int]:
    """Orbit representative (smallest member) of every vertex."""
    orb = _orbits(n, gens, ())
    return [orb.find(v) for v in range(n)]
