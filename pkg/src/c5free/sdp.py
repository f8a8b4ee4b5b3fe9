"""Solver-facing side of the certificate pipeline.

``generate_sdp`` writes the bound optimisation as a sparse SDPA file, an
external solver produces a floating-point solution, and ``round_solution``
turns it into an exact :class:`~c5free.certificate.Certificate`.

Problem encoding
----------------
SDPA "dual" standard form, i.e. the problem solved over the block matrix
``X``::

    maximise   tr(C X)
    subject to tr(A_F X) = a_F      for every F in the level,
               X >= 0 (positive semidefinite, block diagonal)

Blocks ``1..T`` are the matrices ``M_sigma`` (one per type, indexed by the
flag basis). The last block is diagonal and holds, in order, ``y`` (only
when the multiplier is free), ``K+``, ``K-`` and one slack per ``F``. With
``K = K+ - K-`` the constraint for ``F`` reads::

    K + y c_F(C5) + sum_sigma <Q_sigma,F, M_sigma> + slack_F = c_F(C5+)     (lower)
    K +             sum_sigma <Q_sigma,F, M_sigma> + slack_F = -c_F(C5)     (upper)

and the objective is ``K + lb y`` (``K`` alone when ``y`` is fixed, in
which case ``y c_F(C5)`` moves to the right-hand side). Header lines begin
with ``*``; the first one carries a JSON record of the problem metadata so
that a solution can be matched to its problem.

Solution format (CSDP)
----------------------
The first line holds the ``m`` dual values. Every further line is
``matno blkno i j value`` with 1-based indices, upper triangle only;
``matno`` 2 entries form ``X``, ``matno`` 1 entries (the dual slack) are
ignored::

    -0.0384 0.0 ...
    2 1 1 1 0.0123
    2 1 1 2 -0.0045
    2 11 3 3 0.0384
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations_with_replacement, product
from typing import Sequence

import numpy as np

from .certificate import Block, Certificate, verify_certificate
from .densities import _multiplicity, _pattern, level_densities
from .flags import (Flag, Type, default_types, expansion_coefficients, flag_basis, flag_key,
                    level_keys, product_table)
from .graphs import C5, C5_PLUS, Graph
from .linalg import ldl_psd, matmul, nullspace, solve_basic, transpose

log = logging.getLogger(__name__)

HEADER_TAG = "* c5free-sdp "


class SdpError(ValueError):
    pass


@dataclass
class SdpProblem:
    kind: str
    level: int
    lb: Fraction
    y: Fraction | None
    types: list[Type]

    def __post_init__(self):
        if self.kind not in ("lower", "upper"):
            raise SdpError(f"unknown problem kind {self.kind!r}")
        if self.level not in (5, 6, 7):
            raise SdpError("level must be 5, 6 or 7")
        if self.kind == "lower" and self.level < 6:
            raise SdpError("the C5+ bound needs level >= 6")
        if self.kind == "upper" and self.y is not None:
            raise SdpError("upper problems have no multiplier")

    @cached_property
    def bases(self) -> list[tuple[Flag, ...]]:
        return [flag_basis(t, self.level) for t in self.types]

    @cached_property
    def keys(self) -> tuple[bytes, ...]:
        return level_keys(self.level)

    @property
    def num_constraints(self) -> int:
        return len(self.keys)

    @cached_property
    def c5(self) -> list[Fraction]:
        return expansion_coefficients(C5, self.level).values()

    @cached_property
    def objective(self) -> list[Fraction]:
        """Coefficients of the quantity being bounded below."""
        if self.kind == "upper":
            return [-x for x in self.c5]
        return expansion_coefficients(C5_PLUS, self.level).values()

    @property
    def free_y(self) -> bool:
        return self.kind == "lower" and self.y is None

    @property
    def y_value(self) -> Fraction:
        return self.y if self.y is not None else Fraction(0)

    def rhs(self) -> list[Fraction]:
        if self.kind == "lower" and self.y is not None:
            return [a - self.y * b for a, b in zip(self.objective, self.c5)]
        return list(self.objective)

    def scalar_names(self) -> list[str]:
        return (["y"] if self.free_y else []) + ["K+", "K-"] + [f"slack{i}" for i in range(len(self.keys))]

    def metadata(self) -> dict:
        return {"version": 1, "kind": self.kind, "level": self.level,
                "lb": f"{self.lb.numerator}/{self.lb.denominator}",
                "y": None if self.y is None else f"{self.y.numerator}/{self.y.denominator}",
                "types": [t.id for t in self.types]}

    @classmethod
    def from_metadata(cls, meta: dict) -> "SdpProblem":
        return cls(meta["kind"], meta["level"], Fraction(meta["lb"]),
                   None if meta["y"] is None else Fraction(meta["y"]),
                   [Type.from_id(t) for t in meta["types"]])


def generate_sdp(level: int, lb: Fraction = Fraction(0), kind: str = "lower",
                 y: Fraction | None = None, types: Sequence[Type] | None = None) -> SdpProblem:
    """Problem maximising the provable constant ``K + y lb``.

    ``kind="upper"`` gives the plain ``d(C5)`` maximisation (no multiplier).
    Types default to one representative per isomorphism class of every
    admissible size.
    """
    if types is None:
        types = default_types(level)
    return SdpProblem(kind, level, Fraction(lb), None if y is None else Fraction(y), list(types))


def _num(x) -> str:
    return repr(float(x))


def write_sdpa(p: SdpProblem) -> str:
    """Sparse SDPA text; identical problems give identical text."""
    tables = [product_table(t, b, p.level) for t, b in zip(p.types, p.bases)]
    names = p.scalar_names()
    nscal = len(names)
    sizes = [len(b) for b in p.bases]
    lines = [HEADER_TAG + json.dumps(p.metadata(), sort_keys=True),
             "* blocks 1..T: M_sigma per type in 'types' order; last block diagonal: "
             + " ".join(names[:3 if p.free_y else 2]) + " slack_F...",
             "* constraint F: K+ - K- " + ("+ y c_F(C5) " if p.free_y else "")
             + "+ sum <Q_F, M> + slack_F = rhs_F",
             str(p.num_constraints),
             str(len(sizes) + 1),
             " ".join(str(s) for s in sizes) + f" -{nscal}",
             " ".join(_num(v) for v in p.rhs())]
    diag = len(sizes) + 1
    ky = 0 if p.free_y else None
    kp = 1 if p.free_y else 0
    # objective
    if p.free_y and p.lb:
        lines.append(f"0 {diag} {ky + 1} {ky + 1} {_num(p.lb)}")
    lines.append(f"0 {diag} {kp + 1} {kp + 1} 1.0")
    lines.append(f"0 {diag} {kp + 2} {kp + 2} -1.0")
    for fi in range(p.num_constraints):
        con = fi + 1
        for bi, tab in enumerate(tables):
            for (i, j), v in sorted(tab[fi].items()):
                if i <= j:
                    lines.append(f"{con} {bi + 1} {i + 1} {j + 1} {_num(v)}")
        if p.free_y and p.c5[fi]:
            lines.append(f"{con} {diag} {ky + 1} {ky + 1} {_num(p.c5[fi])}")
        lines.append(f"{con} {diag} {kp + 1} {kp + 1} 1.0")
        lines.append(f"{con} {diag} {kp + 2} {kp + 2} -1.0")
        lines.append(f"{con} {diag} {kp + 3 + fi} {kp + 3 + fi} 1.0")
    return "\n".join(lines) + "\n"


def read_problem_header(text: str) -> SdpProblem:
    for line in text.splitlines():
        if line.startswith(HEADER_TAG):
            return SdpProblem.from_metadata(json.loads(line[len(HEADER_TAG):]))
        if not line.startswith(("*", '"')):
            break
    raise SdpError("problem file lacks the c5free metadata header")


@dataclass
class FloatSolution:
    problem: SdpProblem
    blocks: list[np.ndarray]
    scalars: np.ndarray
    dual: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def y(self) -> float:
        if self.problem.free_y:
            return float(self.scalars[0])
        return float(self.problem.y_value)

    @property
    def K(self) -> float:
        off = 1 if self.problem.free_y else 0
        return float(self.scalars[off] - self.scalars[off + 1])

    @property
    def objective(self) -> float:
        return self.K + self.y * float(self.problem.lb)


def parse_solution(text: str, problem: SdpProblem) -> FloatSolution:
    """Read a CSDP-style solution for ``problem``."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise SdpError("empty solution file")
    try:
        dual = np.array([float(x) for x in lines[0].split()])
    except ValueError as exc:
        raise SdpError(f"bad dual vector line: {exc}") from exc
    if len(dual) != problem.num_constraints:
        raise SdpError(f"dual vector has {len(dual)} entries, expected {problem.num_constraints}")
    sizes = [len(b) for b in problem.bases]
    nscal = len(problem.scalar_names())
    blocks = [np.zeros((s, s)) for s in sizes]
    scalars = np.zeros(nscal)
    seen_x = False
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 5:
            raise SdpError(f"malformed entry line {ln!r}")
        try:
            matno, blk, i, j = (int(x) for x in parts[:4])
            v = float(parts[4])
        except ValueError as exc:
            raise SdpError(f"malformed entry line {ln!r}") from exc
        if matno == 1:
            continue
        if matno != 2:
            raise SdpError(f"unknown matrix number {matno}")
        seen_x = True
        if 1 <= blk <= len(sizes):
            s = sizes[blk - 1]
            if not (1 <= i <= s and 1 <= j <= s):
                raise SdpError(f"entry ({i}, {j}) outside block {blk} of size {s}")
            blocks[blk - 1][i - 1, j - 1] = v
            blocks[blk - 1][j - 1, i - 1] = v
        elif blk == len(sizes) + 1:
            if i != j or not 1 <= i <= nscal:
                raise SdpError(f"bad diagonal-block entry ({i}, {j})")
            scalars[i - 1] = v
        else:
            raise SdpError(f"block {blk} does not exist")
    if not seen_x:
        raise SdpError("solution contains no primal matrix entries")
    return FloatSolution(problem, blocks, scalars, dual)


# ----------------------------------------------------------------------------
# rounding


def best_rational(x: float, cap: int) -> Fraction:
    """Closest rational with denominator at most ``cap`` (continued fractions)."""
    return Fraction(x).limit_denominator(cap)


def _round_matrix(m: np.ndarray, cap: int) -> list[list[Fraction]]:
    m = (m + m.T) / 2
    d = m.shape[0]
    out = [[Fraction(0)] * d for _ in range(d)]
    for i in range(d):
        for j in range(i, d):
            out[i][j] = out[j][i] = best_rational(float(m[i, j]), cap)
    return out


def psd_repair(m: list[list[Fraction]], start: Fraction, budget: Fraction) -> tuple[list[list[Fraction]], Fraction]:
    """Add ``delta * I`` with ``delta`` doubled from ``start`` until PSD."""
    if ldl_psd(m).psd:
        return m, Fraction(0)
    delta = start
    while delta <= budget:
        shifted = [[x + (delta if i == j else 0) for j, x in enumerate(row)] for i, row in enumerate(m)]
        if ldl_psd(shifted).psd:
            return shifted, delta
        delta *= 2
    raise SdpError(f"PSD repair exceeded the shift budget {budget}")


def _finish(problem: SdpProblem, blocks: list[Block], y: Fraction,
            claim: tuple[Fraction, Fraction] | None) -> Certificate:
    kind = problem.kind
    probe = Certificate(kind, problem.level, blocks, Fraction(0), Fraction(0),
                        lb=problem.lb if kind == "lower" else Fraction(0), y=y)
    v = verify_certificate(probe)
    if claim is None:
        claim = (v.proven_a, v.proven_b)
    cert = Certificate(kind, problem.level, blocks, claim[0], claim[1], lb=probe.lb, y=y)
    v = verify_certificate(cert)
    if not v.valid:
        raise SdpError(f"rounded certificate does not verify: {v.failure}")
    return cert


def rounding_gain(s: FloatSolution, cert: Certificate) -> float:
    """Exact objective of ``cert`` minus the solver's float objective."""
    v = verify_certificate(cert)
    return float(v.K + cert.y * s.problem.lb) - s.objective


def round_solution(s: FloatSolution, denominator_cap: int = 10_000,
                   psd_shift_budget: Fraction = Fraction(1, 100),
                   claim: tuple[Fraction, Fraction] | None = None,
                   construction: Graph | None = None) -> Certificate:
    """Exact certificate from a floating-point solution.

    Without ``construction`` every matrix entry is rounded to its best
    rational approximation and repaired to PSD by a diagonal shift; ``y`` is
    rounded down. With ``construction`` the bound is made to meet the
    construction's value exactly (see :func:`round_tight`).

    ``claim`` is the ``(A, B)`` pair written into the certificate; by default
    the proven line itself. The certificate is verified before it is
    returned.
    """
    if construction is not None:
        return round_tight(s, construction, denominator_cap, claim)
    p = s.problem
    if p.free_y:
        y = Fraction(math.floor(max(s.y, 0.0) * denominator_cap), denominator_cap)
    else:
        y = p.y_value
    blocks = []
    for t, basis, m in zip(p.types, p.bases, s.blocks):
        exact = _round_matrix(m, denominator_cap)
        exact, delta = psd_repair(exact, Fraction(1, denominator_cap), Fraction(psd_shift_budget))
        if delta:
            log.info("type %s shifted by %s", t.id, delta)
        blocks.append(Block(t, basis, tuple(tuple(r) for r in exact)))
    return _finish(p, blocks, y, claim)


# ----------------------------------------------------------------------------
# tight rounding


def rooted_flag_vector(g: Graph, roots: Sequence[int], basis: Sequence[Flag]) -> list[Fraction]:
    """Densities of the basis flags in the graphon of ``g`` with roots at the given
    parts; roots may share a part."""
    k = len(roots)
    free = basis[0].size - k
    index = {f.key(): i for i, f in enumerate(basis)}
    out = [Fraction(0)] * len(basis)
    for parts in combinations_with_replacement(range(g.n), free):
        i = index.get(flag_key(k, _pattern(g.adj, tuple(roots) + parts)))
        if i is not None:
            out[i] += _multiplicity(parts)
    total = g.n ** free
    return [x / total for x in out]


def zero_vectors(g: Graph, t: Type, basis: Sequence[Flag]) -> list[list[Fraction]]:
    """Flag density vectors over every root placement in ``g``'s graphon inducing ``t``."""
    seen = set()
    out = []
    for roots in product(range(g.n), repeat=t.k):
        if _pattern(g.adj, roots) != t.sigma.adj:
            continue
        v = tuple(rooted_flag_vector(g, roots, basis))
        if v not in seen:
            seen.add(v)
            out.append(list(v))
    return out


def construction_value(problem: SdpProblem, g: Graph) -> Fraction:
    dens = level_densities(g, problem.level)
    obj = [a - problem.y_value * b for a, b in zip(problem.objective, problem.c5)] \
        if problem.kind == "lower" else problem.objective
    return sum((o * dens[k] for o, k in zip(obj, problem.keys)), Fraction(0))


def round_tight(s: FloatSolution, construction: Graph, denominator_cap: int = 1_000_000,
                claim: tuple[Fraction, Fraction] | None = None) -> Certificate:
    """Round so that the bound equals the construction's value exactly.

    Each ``M_sigma`` is written as ``W^T M' W`` where the rows of ``W`` span
    the orthogonal complement of the construction's rooted density vectors,
    which an optimal solution must annihilate. ``M'`` is rounded, then
    corrected by an exact basic solution (few touched entries) that makes
    every graph of positive density in the construction meet the bound with
    equality.
    Requires a fixed multiplier for lower problems.
    """
    p = s.problem
    if p.free_y:
        raise SdpError("tight rounding needs the multiplier fixed in the problem")
    target = construction_value(p, construction)
    dens = level_densities(construction, p.level)
    sharp = [fi for fi, k in enumerate(p.keys) if dens[k] > 0]
    rhs = p.rhs()
    tables = [product_table(t, b, p.level) for t, b in zip(p.types, p.bases)]

    reduced = []          # per block: (W, M'_0 exact)
    for t, basis, m in zip(p.types, p.bases, s.blocks):
        d = len(basis)
        z = zero_vectors(construction, t, basis)
        w = nullspace(z, d) if z else nullspace([], d)
        if not w:
            reduced.append((w, []))
            continue
        wf = np.array([[float(x) for x in row] for row in w])
        g_inv = np.linalg.inv(wf @ wf.T)
        mp = g_inv @ wf @ m @ wf.T @ g_inv
        reduced.append((w, _round_matrix(mp, denominator_cap)))

    # unknowns: upper-triangular entries of every reduced block
    unknowns = [(bi, a, b) for bi, (w, mp) in enumerate(reduced)
                for a in range(len(w)) for b in range(a, len(w))]
    rows, resid = [], []
    for fi in sharp:
        row = []
        value = rhs[fi] - target
        for bi, (w, mp) in enumerate(reduced):
            if not w:
                continue
            q = _dense(tables[bi][fi], len(p.bases[bi]))
            qr = matmul(matmul(w, q), transpose(w))
            r = len(w)
            for a in range(r):
                for b in range(a, r):
                    coef = qr[a][b] if a == b else qr[a][b] + qr[b][a]
                    row.append(coef)
                    value -= coef * mp[a][b]
        rows.append(row)
        resid.append(value)
    if rows and unknowns:
        norms = [sum(r[c] * r[c] for r in rows) for c in range(len(unknowns))]
        order = sorted(range(len(unknowns)), key=lambda c: -norms[c])
        try:
            delta = solve_basic(rows, resid, order)
        except ArithmeticError as exc:
            raise SdpError("cannot meet the construction's value with this face") from exc
        for (bi, a, b), dv in zip(unknowns, delta):
            mp = reduced[bi][1]
            mp[a][b] += dv
            if a != b:
                mp[b][a] += dv
    blocks = []
    for bi, (t, basis) in enumerate(zip(p.types, p.bases)):
        w, mp = reduced[bi]
        if not w:
            continue
        res = ldl_psd(mp)
        if not res.psd:
            raise SdpError(f"reduced block for type {t.id} is not PSD after correction: {res.failure}")
        full = matmul(matmul(transpose(w), mp), w)
        blocks.append(Block(t, basis, tuple(tuple(r) for r in full)))
    cert = _finish(p, blocks, p.y_value, claim)
    v = verify_certificate(cert)
    if v.K != target:
        raise SdpError(f"tight rounding reached K = {v.K}, construction gives {target}")
    return cert


def _dense(table_row: dict, d: int) -> list[list[Fraction]]:
    q = [[Fraction(0)] * d for _ in range(d)]
    for (i, j), v in table_row.items():
        q[i][j] = v
    return q

