"""Exact densities in graphons of finite graphs and the pentagon lemma arithmetic.

A graphon here is the step function of a graph on ``n`` equal parts. Sampling
``h`` points picks parts with replacement; two points in the same part are
never adjacent. Because the induced pattern only depends on the multiset of
parts, densities are accumulated over multisets weighted by their number of
orderings instead of over all ``n**h`` functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from math import factorial
from typing import NamedTuple, Sequence

from .canon import canonical_labelling
from .flags import Flag, flag_key, level_graphs, level_keys
from .graphs import Graph, balanced_blowup_c5

# Decimal constants of the lemma, read exactly.
C5_MAX = Fraction("0.0384")            # 24/625
C5PLUS_AT_MAX = Fraction("0.1152")     # 72/625
LOW_LB = Fraction("0.034")
LOW_SLOPE = Fraction("4.57771")
LOW_VALUE = Fraction("0.095058")
TIGHT_SLOPE = Fraction(6)


@dataclass(frozen=True)
class Graphon:
    source: Graph
    roots: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.roots is not None:
            if len(set(self.roots)) != len(self.roots):
                raise ValueError("graphon roots must be distinct parts")
            if any(not 0 <= r < self.source.n for r in self.roots):
                raise ValueError("graphon root out of range")


def _pattern(adj, parts: Sequence[int]) -> tuple[int, ...]:
    out = []
    for a in parts:
        row = adj[a]
        m = 0
        for j, b in enumerate(parts):
            if row >> b & 1:
                m |= 1 << j
        out.append(m)
    return tuple(out)


def _multiplicity(parts: Sequence[int]) -> int:
    out = factorial(len(parts))
    run = 1
    for a, b in zip(parts, parts[1:]):
        if a == b:
            run += 1
            out //= run
        else:
            run = 1
    return out


@lru_cache(maxsize=None)
def _class_code(adj: tuple[int, ...]) -> tuple[int, ...]:
    return canonical_labelling(len(adj), adj).code


@lru_cache(maxsize=4096)
def pattern_distribution(g: Graph, h: int) -> dict[tuple[int, ...], Fraction]:
    """Probability of each ``h``-vertex isomorphism class (by canonical code)."""
    n = g.n
    if n == 0:
        raise ValueError("the graphon of the empty graph is undefined")
    acc: dict[tuple[int, ...], int] = {}
    for parts in combinations_with_replacement(range(n), h):
        code = _class_code(_pattern(g.adj, parts))
        acc[code] = acc.get(code, 0) + _multiplicity(parts)
    total = n ** h
    return {code: Fraction(c, total) for code, c in acc.items()}


def graphon_density(b: Graphon, h: Graph) -> Fraction:
    if b.roots:
        raise ValueError("graphon_density expects an unrooted graphon")
    if h.n > 7:
        raise ValueError("densities are limited to 7-vertex graphs")
    dist = pattern_distribution(b.source, h.n)
    return dist.get(_class_code(h.adj), Fraction(0))


def level_densities(g: Graph, level: int) -> dict[bytes, Fraction]:
    """Densities of every triangle-free ``level``-vertex graph in the graphon of ``g``.

    Non-triangle-free patterns carry zero mass whenever ``g`` is triangle-free.
    """
    dist = pattern_distribution(g, level)
    return {key: dist.get(_class_code(f.adj), Fraction(0))
            for key, f in zip(level_keys(level), level_graphs(level))}


def flag_density(b: Graphon, f: Flag) -> Fraction:
    roots = b.roots or ()
    k = len(f.roots)
    if len(roots) != k:
        raise ValueError(f"graphon has {len(roots)} roots, flag has {k}")
    if b.source.induced(roots) != f.type.sigma:
        raise ValueError("graphon roots do not induce the flag's type")
    target = f.key()
    free = f.size - k
    n = b.source.n
    hits = 0
    for parts in combinations_with_replacement(range(n), free):
        if flag_key(k, _pattern(b.source.adj, tuple(roots) + parts)) == target:
            hits += _multiplicity(parts)
    return Fraction(hits, n ** free)


def density_by_functions(g: Graph, h: Graph) -> Fraction:
    """Reference count over all ``n**|h|`` maps; slow, kept for cross-checks."""
    from itertools import product

    target = _class_code(h.adj)
    hits = sum(1 for f in product(range(g.n), repeat=h.n)
               if _class_code(_pattern(g.adj, f)) == target)
    return Fraction(hits, g.n ** h.n)


# ----------------------------------------------------------------------------
# balanced blow-up density and the lemma checks


def d_n(n: int) -> Fraction:
    """Induced C5 density in the graphon of the balanced blow-up of C5 on ``n`` vertices."""
    if n < 5:
        raise ValueError("d_n needs n >= 5")
    i = n % 5
    big = Fraction(n + 5 - i, 5)
    small = Fraction(n - i, 5)
    return 120 * big ** i * small ** (5 - i) / Fraction(n) ** 5


class LemmaCheck(NamedTuple):
    n: int
    holds: bool
    margin: Fraction
    ratio: Fraction
    d_n: Fraction


def lemma_ratio_small_n(n: int, slope: Fraction = LOW_SLOPE, lb: Fraction = LOW_LB,
                        value: Fraction = LOW_VALUE) -> LemmaCheck:
    """Check ``(slope*(d_n - lb) + value) / (3 d_n) > 1 - 1/n`` exactly."""
    if not 10 <= n < 100:
        raise ValueError("the small-n branch covers 10 <= n < 100")
    dn = d_n(n)
    if dn < lb:
        raise ArithmeticError(f"d_{n} = {dn} is below the bound's precondition {lb}")
    ratio = (slope * (dn - lb) + value) / (3 * dn)
    margin = ratio - (1 - Fraction(1, n))
    return LemmaCheck(n, margin > 0, margin, ratio, dn)


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_pow(a, e):
    out = [1]
    for _ in range(e):
        out = _poly_mul(out, a)
    return out


def _poly_add(a, b, sb=1):
    size = max(len(a), len(b))
    a = a + [0] * (size - len(a))
    b = b + [0] * (size - len(b))
    return [x + sb * y for x, y in zip(a, b)]


def asymptotic_polynomial(i: int, m0: int) -> list[int]:
    """Coefficients (constant first) in ``t`` of

    ``625 * (d_n n^5 n^2 - 0.0384 (n^2 - 50) n^5)`` with ``n = 5(t + m0) + i``.
    """
    m = [m0, 1]                      # m = t + m0
    n = [5 * m0 + i, 5]              # n = 5m + i
    n2 = _poly_mul(n, n)
    lhs = _poly_mul([75000], _poly_mul(_poly_mul(_poly_pow(_poly_add(m, [1]), i),
                                                 _poly_pow(m, 5 - i)), n2))
    rhs = _poly_mul([24], _poly_mul(_poly_add(n2, [50], -1), _poly_pow(n, 5)))
    out = _poly_add(lhs, rhs, -1)
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def asymptotic_check(i: int, m0: int = 20) -> bool:
    """Sufficient test that ``d_n > 0.0384 (1 - 50/n^2)`` for all ``n = 5m + i``, ``m >= m0``."""
    if not 0 <= i <= 4:
        raise ValueError("residue must lie in 0..4")
    if m0 < 20:
        raise ValueError("m0 must be at least 20 (n >= 100)")
    coeffs = asymptotic_polynomial(i, m0)
    return coeffs[0] > 0 and all(c >= 0 for c in coeffs)


def dn_lower_bound_holds(n: int) -> bool:
    return d_n(n) > C5_MAX * (1 - Fraction(50, n * n))


class ChainCheck(NamedTuple):
    n: int
    holds: bool
    ratio_bound: Fraction      # (slope (d_n - 0.0384) + 0.1152) / 0.1152
    closed_form: Fraction      # 1 - slope*50 / (3 n^2)
    margin: Fraction           # closed_form - (1 - 1/n)


def final_chain_check(n: int, slope: Fraction = TIGHT_SLOPE) -> ChainCheck:
    """Exact arithmetic of the n >= 100 branch for one ``n``."""
    if n < 100:
        raise ValueError("the large-n branch covers n >= 100")
    dn = d_n(n)
    eps = Fraction(50, n * n)
    ratio_bound = (slope * (dn - C5_MAX) + C5PLUS_AT_MAX) / C5PLUS_AT_MAX
    closed = (-slope * C5_MAX * eps + C5PLUS_AT_MAX) / C5PLUS_AT_MAX
    margin = closed - (1 - Fraction(1, n))
    holds = (dn > C5_MAX * (1 - eps)
             and ratio_bound > closed
             and (slope != 6 or closed == 1 - Fraction(100, n * n))
             and margin >= 0)
    return ChainCheck(n, holds, ratio_bound, closed, margin)


def lemma_table(ns: Sequence[int], **kw) -> list[LemmaCheck]:
    return [lemma_ratio_small_n(n, **kw) for n in ns]


def blowup_density_check(n: int) -> bool:
    """``d_n`` against a first-principles count on the blow-up graphon."""
    from .graphs import C5

    return d_n(n) == graphon_density(Graphon(balanced_blowup_c5(n)), C5)

