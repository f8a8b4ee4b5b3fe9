"""Exact verification of flag-algebra certificates.

Two kinds of statement are supported, both linear in densities of triangle-free
graphons:

``lower``
    ``d(C5+) >= y * d(C5) + K``, hence ``d(C5+) >= y (d(C5) - lb) + (K + y lb)``
    whenever ``d(C5) >= lb``.
``upper``
    ``d(C5) <= -K``.

For every graph ``F`` on ``level`` vertices the verifier forms the net
coefficient of the objective after subtracting every sum-of-squares block,
and ``K`` is their minimum. Slack values stored in a document are parsed
and checked for sign but play no role in the proof.

Document format (JSON, canonical form produced by :func:`emit_certificate`)::

    {"format": "c5free-certificate", "version": 1, "kind": "lower",
     "level": 6, "lb": "17/500", "y": "4746/1000",
     "claimed": {"A": "...", "B": "..."},
     "blocks": [{"type": "2:A_",
                 "flags": [{"graph6": "C^", "roots": [0, 1]}, ...],
                 "matrix": [["p/q", ...], ...]}, ...],
     "slacks": {"<graph6 of F>": "p/q", ...}}        # optional

Rationals are strings ``"p/q"``; the canonical form always writes the
denominator. Types are identified by ``"<k>:<graph6 of sigma>"``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, NamedTuple, Sequence

from .densities import (C5_MAX, C5PLUS_AT_MAX, LOW_LB, LOW_SLOPE, LOW_VALUE,
                        asymptotic_check, final_chain_check, lemma_ratio_small_n)
from .flags import Flag, Type, expansion_coefficients, level_keys, product_table
from .graphs import C5, C5_PLUS, Graph, canonical_form
from .linalg import ldl_psd

FORMAT = "c5free-certificate"
VERSION = 1
KINDS = ("lower", "upper")


class CertificateError(ValueError):
    pass


@dataclass(frozen=True)
class Block:
    type: Type
    flags: tuple[Flag, ...]
    matrix: tuple[tuple[Fraction, ...], ...]


@dataclass
class Certificate:
    kind: str
    level: int
    blocks: list[Block]
    claimed_a: Fraction
    claimed_b: Fraction
    lb: Fraction = Fraction(0)
    y: Fraction = Fraction(0)
    slacks: dict[str, Fraction] | None = None

    def __post_init__(self):
        validate(self)


@dataclass
class Verdict:
    valid: bool
    K: Fraction
    per_F_slack: dict[bytes, Fraction]
    proven_a: Fraction
    proven_b: Fraction
    claimed_a: Fraction
    claimed_b: Fraction
    failure: str | None = None
    depends_on: list[str] = field(default_factory=list)


def verify_psd(m: Sequence[Sequence]) -> bool:
    return ldl_psd(m).psd


def validate(c: Certificate) -> None:
    if c.kind not in KINDS:
        raise CertificateError(f"unknown certificate kind {c.kind!r}")
    if not 1 <= c.level <= 7:
        raise CertificateError(f"level {c.level} outside [1, 7]")
    if c.level < 6 and c.kind == "lower":
        raise CertificateError(f"C5+ has 6 vertices; level {c.level} is too small")
    if c.level < 5:
        raise CertificateError(f"C5 has 5 vertices; level {c.level} is too small")
    if c.y < 0:
        raise CertificateError("y must be non-negative")
    if c.kind == "upper" and (c.y != 0 or c.claimed_a != 0 or c.lb != 0):
        raise CertificateError("upper certificates carry no y, lb or slope")
    for name, a in (c.slacks or {}).items():
        if a < 0:
            raise CertificateError(f"negative slack for {name}")
    for bi, b in enumerate(c.blocks):
        k = b.type.k
        if (c.level - k) % 2:
            raise CertificateError(f"block {bi}: level and type size differ in parity")
        size = (c.level + k) // 2
        for f in b.flags:
            if f.size != size:
                raise CertificateError(f"block {bi}: flag of size {f.size}, expected {size}")
            if f.type != b.type:
                raise CertificateError(f"block {bi}: flag type differs from block type")
        if len({f.key() for f in b.flags}) != len(b.flags):
            raise CertificateError(f"block {bi}: repeated flag in the basis")
        d = len(b.flags)
        if len(b.matrix) != d or any(len(r) != d for r in b.matrix):
            raise CertificateError(f"block {bi}: matrix is not {d}x{d}")
        for i in range(d):
            for j in range(i + 1, d):
                if b.matrix[i][j] != b.matrix[j][i]:
                    raise CertificateError(f"block {bi}: matrix not symmetric at ({i}, {j})")


# ----------------------------------------------------------------------------
# serialisation


def _q(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _parse_q(s: Any) -> Fraction:
    if not isinstance(s, str):
        raise CertificateError(f"rational must be a string, got {s!r}")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise CertificateError(f"bad rational {s!r}") from exc


def to_document(c: Certificate) -> dict:
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "kind": c.kind,
        "level": c.level,
        "lb": _q(c.lb),
        "y": _q(c.y),
        "claimed": {"A": _q(c.claimed_a), "B": _q(c.claimed_b)},
        "blocks": [{
            "type": b.type.id,
            "flags": [{"graph6": f.graph.to_graph6(), "roots": list(f.roots)} for f in b.flags],
            "matrix": [[_q(x) for x in row] for row in b.matrix],
        } for b in c.blocks],
    }
    if c.slacks is not None:
        doc["slacks"] = {k: _q(v) for k, v in sorted(c.slacks.items())}
    return doc


def emit_certificate(c: Certificate) -> str:
    """Canonical text: sorted keys, one-space indent, trailing newline."""
    return json.dumps(to_document(c), indent=1, sort_keys=True) + "\n"


def parse_certificate(document: str | dict) -> Certificate:
    if isinstance(document, str):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise CertificateError(f"not a JSON document: {exc}") from exc
    else:
        doc = document
    if not isinstance(doc, dict):
        raise CertificateError("certificate document must be an object")
    if doc.get("format") != FORMAT:
        raise CertificateError(f"format field must be {FORMAT!r}")
    if doc.get("version") != VERSION:
        raise CertificateError(f"unsupported version {doc.get('version')!r}")
    allowed = {"format", "version", "kind", "level", "lb", "y", "claimed", "blocks", "slacks"}
    extra = set(doc) - allowed
    if extra:
        raise CertificateError(f"unknown fields {sorted(extra)}")
    try:
        level = doc["level"]
        if not isinstance(level, int) or isinstance(level, bool):
            raise CertificateError("level must be an integer")
        claimed = doc["claimed"]
        blocks = []
        for b in doc["blocks"]:
            t = Type.from_id(b["type"])
            flags = []
            for f in b["flags"]:
                g = Graph.from_graph6(f["graph6"])
                flags.append(Flag(g, tuple(int(r) for r in f["roots"])))
            matrix = tuple(tuple(_parse_q(x) for x in row) for row in b["matrix"])
            blocks.append(Block(t, tuple(flags), matrix))
        slacks = None
        if "slacks" in doc:
            slacks = {str(k): _parse_q(v) for k, v in doc["slacks"].items()}
        return Certificate(kind=doc["kind"], level=level, blocks=blocks,
                           claimed_a=_parse_q(claimed["A"]), claimed_b=_parse_q(claimed["B"]),
                           lb=_parse_q(doc["lb"]), y=_parse_q(doc["y"]), slacks=slacks)
    except (KeyError, TypeError, AttributeError) as exc:
        raise CertificateError(f"malformed certificate: {exc!r}") from exc
    except ValueError as exc:
        if isinstance(exc, CertificateError):
            raise
        raise CertificateError(str(exc)) from exc


def load_certificate(path) -> Certificate:
    if hasattr(path, "read_text"):
        return parse_certificate(path.read_text())
    with open(path) as fh:
        return parse_certificate(fh.read())


def save_certificate(c: Certificate, path) -> None:
    with open(path, "w") as fh:
        fh.write(emit_certificate(c))


# ----------------------------------------------------------------------------
# verification


def objective_vector(kind: str, level: int, y: Fraction) -> list[Fraction]:
    c5 = expansion_coefficients(C5, level).values()
    if kind == "upper":
        return [-x for x in c5]
    c5p = expansion_coefficients(C5_PLUS, level).values()
    return [a - y * b for a, b in zip(c5p, c5)]


def net_coefficients(c: Certificate) -> list[Fraction]:
    net = objective_vector(c.kind, c.level, c.y)
    for b in c.blocks:
        table = product_table(b.type, b.flags, c.level)
        m = b.matrix
        for fi, row in enumerate(table):
            if row:
                net[fi] -= sum((m[i][j] * v for (i, j), v in row.items()), Fraction(0))
    return net


def verify_certificate(c: Certificate) -> Verdict:
    validate(c)
    net = net_coefficients(c)
    K = min(net)
    keys = level_keys(c.level)
    slack = {k: v - K for k, v in zip(keys, net)}
    if c.kind == "upper":
        pa, pb = Fraction(0), -K
    else:
        pa, pb = c.y, K + c.y * c.lb
    v = Verdict(True, K, slack, pa, pb, c.claimed_a, c.claimed_b)
    for bi, b in enumerate(c.blocks):
        res = ldl_psd(b.matrix)
        if not res.psd:
            v.valid = False
            v.failure = f"block {bi} ({b.type.id}) is not PSD: {res.failure}"
            return v
    if c.kind == "upper":
        if pb > c.claimed_b:
            v.valid = False
            v.failure = f"proven upper bound {pb} exceeds claimed {c.claimed_b} by {pb - c.claimed_b}"
        return v
    right = max(c.lb, C5_MAX)
    if right > c.lb:
        v.depends_on.append(f"d(C5) <= {C5_MAX}")
    for x in (c.lb, right):
        gap = pa * (x - c.lb) + pb - (c.claimed_a * (x - c.lb) + c.claimed_b)
        if gap < 0:
            v.valid = False
            v.failure = f"proven line falls below the claimed line at d(C5) = {x} by {-gap}"
            return v
    return v


# ----------------------------------------------------------------------------
# the lemma, end to end


class Step(NamedTuple):
    name: str
    ok: bool
    detail: str


@dataclass
class ChainReport:
    steps: list[Step]
    ok: bool
    failed_at: str | None

    def lines(self) -> list[str]:
        return [f"{'PASS' if s.ok else 'FAIL'}\t{s.name}\t{s.detail}" for s in self.steps]


class ChainFailure(Exception):
    def __init__(self, report: ChainReport):
        super().__init__(report.failed_at)
        self.report = report


def verify_claim_chain(upper: Certificate, low: Certificate, tight: Certificate,
                       raise_on_failure: bool = False) -> ChainReport:
    """Check both branches of the lemma from three certificates.

    ``upper`` must prove ``d(C5) <= 24/625``; ``low`` and ``tight`` are lower
    certificates. Each branch uses the claimed line of its certificate. The
    run stops at the first failing step.
    """
    steps: list[Step] = []

    def record(name, ok, detail=""):
        steps.append(Step(name, bool(ok), detail))
        return ok

    def done(ok):
        failed = None if ok else steps[-1].name
        rep = ChainReport(steps, ok, failed)
        if not ok and raise_on_failure:
            raise ChainFailure(rep)
        return rep

    vu = verify_certificate(upper) if upper.kind == "upper" else None
    if not record("certificate d(C5) <= 24/625",
                  vu is not None and vu.valid and vu.proven_b <= C5_MAX,
                  f"proven {vu.proven_b}" if vu else "not an upper certificate"):
        return done(False)

    vl = verify_certificate(low)
    a, b, lb = low.claimed_a, low.claimed_b, low.lb
    if not record("certificate small-n line", low.kind == "lower" and vl.valid,
                  f"{a}*(x - {lb}) + {b}" + ("" if vl.valid else f"; {vl.failure}")):
        return done(False)
    # (a (x - lb) + b) / 3x is non-decreasing in x exactly when b <= a lb
    if not record("small-n ratio monotone in d(C5)", b <= a * lb, f"b - a*lb = {b - a * lb}"):
        return done(False)
    for n in range(10, 100):
        try:
            chk = lemma_ratio_small_n(n, slope=a, lb=lb, value=b)
        except ArithmeticError as exc:
            record(f"small n={n}", False, str(exc))
            return done(False)
        if not record(f"small n={n}", chk.holds, f"margin {chk.margin} ~ {float(chk.margin):.3e}"):
            return done(False)

    vt = verify_certificate(tight)
    ta, tb = tight.claimed_a, tight.claimed_b
    at_max = ta * (C5_MAX - tight.lb) + tb
    ok = (tight.kind == "lower" and vt.valid and tight.lb <= C5_MAX and at_max >= C5PLUS_AT_MAX
          and ta >= 0)
    if not record("certificate tight line", ok,
                  f"slope {ta}, value {at_max} at d(C5) = {C5_MAX}"
                  + ("" if vt.valid else f"; {vt.failure}")):
        return done(False)
    for i in range(5):
        if not record(f"asymptotic residue {i}", asymptotic_check(i, 20), "shift m = t + 20"):
            return done(False)
    # 1 - 50 a / (3 n^2) >= 1 - 1/n for all n >= 100 iff 50 a / 3 <= 100
    chk = final_chain_check(100, slope=ta)
    if not record("final chain n>=100", chk.holds and Fraction(50) * ta / 3 <= 100,
                  f"margin at n=100: {chk.margin}"):
        return done(False)
    return done(True)
