"""Exact rational linear algebra on lists of ``Fraction`` rows."""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple, Sequence

Matrix = list[list[Fraction]]


def to_fractions(rows) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)]


def is_symmetric(a: Sequence[Sequence]) -> bool:
    n = len(a)
    return all(len(row) == n for row in a) and all(
        a[i][j] == a[j][i] for i in range(n) for j in range(i + 1, n))


class LDL(NamedTuple):
    psd: bool
    pivots: list[Fraction]
    failure: str | None


def ldl_psd(m: Sequence[Sequence]) -> LDL:
    """Decide positive semidefiniteness by LDL^T with diagonal pivoting.

    At each step the largest remaining diagonal entry is eliminated. When
    every remaining diagonal entry is zero the rest of the matrix must be
    zero as well; a negative diagonal entry is an immediate witness.
    """
    a = to_fractions(m)
    n = len(a)
    if not is_symmetric(a):
        return LDL(False, [], "matrix is not symmetric")
    alive = list(range(n))
    pivots: list[Fraction] = []
    while alive:
        p = max(alive, key=lambda i: a[i][i])
        d = a[p][p]
        if d < 0:
            return LDL(False, pivots, f"negative pivot {d} at row {p}")
        if d == 0:
            neg = next((i for i in alive if a[i][i] < 0), None)
            if neg is not None:
                return LDL(False, pivots, f"negative pivot {a[neg][neg]} at row {neg}")
            for i in alive:
                for j in alive:
                    if a[i][j] != 0:
                        return LDL(False, pivots, f"zero pivot with nonzero entry at ({i}, {j})")
            pivots.extend(Fraction(0) for _ in alive)
            break
        pivots.append(d)
        alive.remove(p)
        row = a[p]
        for i in alive:
            f = row[i] / d
            if f:
                ai = a[i]
                for j in alive:
                    if row[j]:
                        ai[j] -= f * row[j]
    return LDL(True, pivots, None)


def rref(a: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    m = [list(r) for r in a]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m[:r], pivots


def nullspace(a: Matrix, ncols: int) -> Matrix:
    """Basis (as rows) of ``{x : a x = 0}``."""
    if not a:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    red, pivots = rref(a)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, pc in zip(red, pivots):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def solve_basic(a: Matrix, b: Sequence[Fraction], order: Sequence[int] | None = None) -> list[Fraction]:
    """Exact solution of ``a x = b`` supported on independent columns.

    Columns are taken greedily in ``order``; all others stay zero, which
    keeps the number of touched entries at the rank of ``a``.
    """
    ncols = len(a[0])
    order = list(order) if order is not None else list(range(ncols))
    aug = [[row[c] for c in order] + [Fraction(v)] for row, v in zip(a, b)]
    red, pivots = rref(aug)
    if ncols in pivots:
        raise ArithmeticError("linear system is inconsistent")
    x = [Fraction(0)] * ncols
    for row, pc in zip(red, pivots):
        x[order[pc]] = row[ncols]
    return x

