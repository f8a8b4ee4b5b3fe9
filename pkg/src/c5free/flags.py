"""Types, flags and the coefficient tables behind level-``l`` expansions.

Conventions
-----------
A flag is a graph whose first ``k`` vertices (in the canonical
representative) are the labelled roots. Flag classes are identified by
canonical labelling with the roots individualised in order.

The unlabelled square ``[[x^T M x]]`` of a type ``sigma`` is expanded by
averaging over *all* injective ``k``-tuples of a host graph; tuples that do
not induce ``sigma`` contribute zero. That folds the probability of seeing
``sigma`` into the coefficients and keeps the expansion non-negative
graphon by graphon.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from math import comb, perm
from typing import Sequence

from .canon import canonical_labelling
from .enumerate import iter_level
from .graphs import Graph, _induced_adj, canonical_form, count_induced, is_triangle_free


@dataclass(frozen=True)
class Type:
    """Fully labelled root graph; labelings distinguish types."""

    sigma: Graph

    @property
    def k(self) -> int:
        return self.sigma.n

    @property
    def id(self) -> str:
        return f"{self.k}:{self.sigma.to_graph6()}"

    @classmethod
    def from_id(cls, text: str) -> "Type":
        k, g6 = text.split(":", 1)
        sigma = Graph.from_graph6(g6)
        if sigma.n != int(k):
            raise ValueError(f"type id {text!r} has inconsistent size")
        return cls(sigma)


@dataclass(frozen=True)
class Flag:
    graph: Graph
    roots: tuple[int, ...]

    def __post_init__(self):
        if len(set(self.roots)) != len(self.roots):
            raise ValueError("flag roots must be distinct")
        if any(not 0 <= r < self.graph.n for r in self.roots):
            raise ValueError("flag root out of range")

    @property
    def type(self) -> Type:
        return Type(self.graph.induced(self.roots))

    @property
    def size(self) -> int:
        return self.graph.n

    def key(self) -> tuple[int, ...]:
        """Canonical code; equal keys iff the flags are isomorphic."""
        order = list(self.roots) + [v for v in range(self.graph.n) if v not in self.roots]
        adj = _induced_adj(self.graph.adj, tuple(order))
        return flag_key(len(self.roots), adj)

    def canonical(self) -> "Flag":
        k = len(self.roots)
        return Flag(Graph(self.graph.n, self.key()), tuple(range(k)))


@lru_cache(maxsize=None)
def flag_key(k: int, adj: tuple[int, ...]) -> tuple[int, ...]:
    """Canonical code of the flag on ``adj`` whose roots are vertices ``0..k-1``."""
    n = len(adj)
    cells = tuple((v,) for v in range(k)) + ((tuple(range(k, n)),) if n > k else ())
    return canonical_labelling(n, adj, cells).code


@dataclass
class DensityVector:
    """Coefficients indexed by the triangle-free graphs on ``level`` vertices."""

    level: int
    entries: dict[bytes, Fraction]

    def evaluate(self, densities: dict[bytes, Fraction]) -> Fraction:
        return sum((c * densities[k] for k, c in self.entries.items()), Fraction(0))

    def values(self) -> list[Fraction]:
        return [self.entries[k] for k in level_keys(self.level)]

    def __sub__(self, other: "DensityVector") -> "DensityVector":
        return DensityVector(self.level, {k: v - other.entries[k] for k, v in self.entries.items()})


def _check_level(level: int) -> None:
    if not 1 <= level <= 7:
        raise ValueError(f"level must lie in [1, 7], got {level}")
    if level == 7:
        warnings.warn("level 7 expansions involve 107 graphs and large type lists; expect slow runs",
                      ResourceWarning, stacklevel=3)


@lru_cache(maxsize=None)
def level_graphs(level: int) -> tuple[Graph, ...]:
    """Canonical representatives of the triangle-free graphs on ``level`` vertices,
    sorted by canonical graph6 bytes."""
    reps = [Graph(g.n, canonical_labelling(g.n, g.adj).code) for g in iter_level(level)]
    return tuple(sorted(reps, key=lambda g: canonical_form(g).bytes))


@lru_cache(maxsize=None)
def level_keys(level: int) -> tuple[bytes, ...]:
    return tuple(canonical_form(g).bytes for g in level_graphs(level))


def enumerate_types(k: int) -> list[Type]:
    """Every triangle-free labelled graph on ``k`` vertices."""
    if not 0 <= k <= 5:
        raise ValueError("types are limited to 5 vertices")
    pairs = list(combinations(range(k), 2))
    out = []
    for mask in range(1 << len(pairs)):
        adj = [0] * k
        for b, (u, v) in enumerate(pairs):
            if mask >> b & 1:
                adj[u] |= 1 << v
                adj[v] |= 1 << u
        g = Graph(k, tuple(adj))
        if is_triangle_free(g):
            out.append(Type(g))
    return out


def type_representatives(k: int) -> list[Type]:
    """One labelled type per isomorphism class on ``k`` vertices, in canonical order."""
    return [Type(g) for g in level_graphs(k)] if k else [Type(Graph(0, ()))]


def enumerate_flags(t: Type, m: int) -> list[Flag]:
    """Flag classes of type ``t`` on ``m`` vertices, roots first, sorted by key."""
    k = t.k
    if m < k or m > 7:
        raise ValueError(f"flag size {m} must lie in [{k}, 7]")
    new_pairs = [(u, v) for v in range(k, m) for u in range(v)]
    found: dict[tuple[int, ...], Flag] = {}
    base = list(t.sigma.adj) + [0] * (m - k)
    for mask in range(1 << len(new_pairs)):
        adj = list(base)
        for b, (u, v) in enumerate(new_pairs):
            if mask >> b & 1:
                adj[u] |= 1 << v
                adj[v] |= 1 << u
        g = Graph(m, tuple(adj))
        if not is_triangle_free(g):
            continue
        key = flag_key(k, g.adj)
        if key not in found:
            found[key] = Flag(Graph(m, key), tuple(range(k)))
    return [found[key] for key in sorted(found)]


def expansion_coefficients(h: Graph, level: int) -> DensityVector:
    """Induced density of ``h`` in each graph of the level."""
    if h.n > level:
        raise ValueError(f"cannot expand a {h.n}-vertex graph at level {level}")
    _check_level(level)
    denom = comb(level, h.n)
    return DensityVector(level, {key: Fraction(count_induced(g, h), denom)
                                 for key, g in zip(level_keys(level), level_graphs(level))})


def _split_counts(g: Graph, theta: Sequence[int], size1: int, index: dict) -> dict:
    """Count ordered splits of the non-root vertices into flag pairs.

    ``index`` maps flag keys to basis positions; splits whose halves fall
    outside the basis are ignored.
    """
    k = len(theta)
    rest = [v for v in range(g.n) if v not in theta]
    counts: dict[tuple[int, int], int] = {}
    for s1 in combinations(rest, size1):
        s2 = tuple(v for v in rest if v not in s1)
        i = index.get(flag_key(k, _induced_adj(g.adj, tuple(theta) + s1)))
        if i is None:
            continue
        j = index.get(flag_key(k, _induced_adj(g.adj, tuple(theta) + s2)))
        if j is None:
            continue
        counts[i, j] = counts.get((i, j), 0) + 1
    return counts


def pair_density(f1: Flag, f2: Flag, host: Graph, theta: Sequence[int]) -> Fraction:
    """Probability that a random split of ``host`` minus ``theta`` yields ``f1`` and ``f2``."""
    t = f1.type
    if f2.type != t:
        raise ValueError("flags have different types")
    k = t.k
    if f1.size + f2.size - k != host.n:
        raise ValueError("flag sizes do not add up to the host size")
    if len(theta) != k or host.induced(theta) != t.sigma:
        raise ValueError("theta does not induce the flags' type")
    k1, k2 = f1.key(), f2.key()
    index = {k1: 0} if k1 == k2 else {k1: 0, k2: 1}
    counts = _split_counts(host, theta, f1.size - k, index)
    hit = counts.get((0, 0 if k1 == k2 else 1), 0)
    return Fraction(hit, comb(host.n - k, f1.size - k))


@lru_cache(maxsize=None)
def product_table(t: Type, basis: tuple[Flag, ...], level: int) -> tuple[dict, ...]:
    """Per level graph, the map ``(i, j) -> coefficient`` of ``M[i, j]`` in the
    expansion of ``[[x^T M x]]``; symmetric in ``i, j``."""
    k = t.k
    if (level - k) % 2:
        raise ValueError(f"level {level} and type size {k} must have equal parity")
    size = (level + k) // 2
    if any(f.size != size or f.type != t for f in basis):
        raise ValueError(f"basis flags must have type {t.id} and {size} vertices")
    index = {f.key(): i for i, f in enumerate(basis)}
    denom = perm(level, k) * comb(level - k, size - k)
    out = []
    for g in level_graphs(level):
        acc: dict[tuple[int, int], int] = {}
        for theta in permutations(range(level), k):
            if _induced_adj(g.adj, theta) != t.sigma.adj:
                continue
            for ij, c in _split_counts(g, theta, size - k, index).items():
                acc[ij] = acc.get(ij, 0) + c
        out.append({ij: Fraction(c, denom) for ij, c in acc.items()})
    return tuple(out)


def sos_coefficients(t: Type, basis: Sequence[Flag], m, level: int) -> DensityVector:
    """Level expansion of the unlabelled square ``[[x^T M x]]`` of type ``t``."""
    _check_level(level)
    basis = tuple(basis)
    if len(m) != len(basis) or any(len(row) != len(basis) for row in m):
        raise ValueError("matrix dimension does not match the flag basis")
    table = product_table(t, basis, level)
    entries = {}
    for key, row in zip(level_keys(level), table):
        entries[key] = sum((Fraction(m[i][j]) * c for (i, j), c in row.items()), Fraction(0))
    return DensityVector(level, entries)


def flag_basis(t: Type, level: int) -> tuple[Flag, ...]:
    """Default basis for type ``t`` at ``level``: all flags of size ``(level + k) / 2``."""
    if (level - t.k) % 2:
        raise ValueError(f"level {level} and type size {t.k} must have equal parity")
    return tuple(enumerate_flags(t, (level + t.k) // 2))


def default_types(level: int) -> list[Type]:
    """All admissible types below ``level`` of matching parity, one per isomorphism class."""
    return [t for k in range(level % 2, level - 1, 2) for t in type_representatives(k)]


def basis_listing(types: Sequence[Type], level: int) -> list[tuple[str, int, str, tuple[int, ...]]]:
    """Rows ``(type id, index, flag graph6, roots)`` for every basis flag."""
    rows = []
    for t in types:
        for i, f in enumerate(flag_basis(t, level)):
            rows.append((t.id, i, f.graph.to_graph6(), f.roots))
    return rows
