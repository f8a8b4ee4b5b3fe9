"""Command line entry point.

Every subcommand prints either a human table (``--format text``) or
tab-separated rows under a ``#`` header that names the tool version and the
columns (``--format rows``). Exit status: 0 when every check passes, 1 when
a mathematical check fails, 2 on usage or I/O errors.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path
from typing import Callable

from . import __version__, bundled_certificate
from .certificate import (Certificate, CertificateError, emit_certificate, load_certificate,
                          verify_certificate, verify_claim_chain)
from .densities import (LOW_LB, LOW_SLOPE, LOW_VALUE, asymptotic_check, d_n,
                        dn_lower_bound_holds, final_chain_check, lemma_ratio_small_n)
from .enumerate import MAX_ENUMERATION_N, extremal_c5, iter_level
from .graphs import C5, max_c5_formula
from .sdp import SdpError, generate_sdp, parse_solution, read_problem_header, round_solution, write_sdpa

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def parse_range(text: str) -> tuple[int, int]:
    """``"a..b"`` or a single integer; the range must be non-empty."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected a..b") from None
    if lo > hi:
        raise UsageError(f"empty range {text!r}")
    return lo, hi


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad rational {text!r}") from None


class Table:
    """Collects rows and renders them as text or as versioned TSV."""

    def __init__(self, name: str, columns: list[str]):
        self.name = name
        self.columns = columns
        self.rows: list[list] = []
        self.notes: list[str] = []

    def add(self, *row) -> None:
        self.rows.append([str(x) for x in row])

    def render(self, fmt: str) -> str:
        if fmt == "rows":
            head = [f"# c5free {__version__} {self.name}", "# " + "\t".join(self.columns)]
            body = ["\t".join(r) for r in self.rows]
            return "\n".join(head + body + [f"# {n}" for n in self.notes]) + "\n"
        table = [self.columns] + self.rows
        widths = [max(len(r[i]) for r in table) for i in range(len(self.columns))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in table]
        return "\n".join(lines + self.notes) + "\n"


def _range(args, default: tuple[int, int] | None = None) -> tuple[int, int]:
    if args.n is not None and args.range is not None:
        raise UsageError("give either --n or --range")
    if args.n is not None:
        return args.n, args.n
    if args.range is not None:
        return parse_range(args.range)
    if default is None:
        raise UsageError("--n or --range is required")
    return default


def _enum_range(args) -> tuple[int, int]:
    lo, hi = _range(args)
    if lo < 0 or hi > MAX_ENUMERATION_N:
        raise UsageError(f"n must lie in [0, {MAX_ENUMERATION_N}]")
    return lo, hi


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


# ----------------------------------------------------------------------------
# subcommands


def cmd_census(args) -> int:
    lo, hi = _enum_range(args)
    t = Table("census", ["n", "classes", "max_c5", "winners", "cumulative"])
    total = 0
    stream = []
    for n in range(lo, hi + 1):
        c = extremal_c5(n, workers=args.workers)
        total += c.total
        t.add(n, c.total, max(c.max_c5, 0), len(c.winners), total)
        if args.graph6 == "winners":
            stream.extend(w.graph().to_graph6() for w in c.winners)
    t.notes.append(f"total {lo}..{hi}: {total}")
    if lo == 1:
        t.notes.append(f"total 0..{hi}: {total + 1} (with the empty graph on 0 vertices)")
    elif lo == 0 and hi > 0:
        t.notes.append(f"total 1..{hi}: {total - 1}")
    if args.graph6 == "all":
        stream = [g.to_graph6() for n in range(max(lo, 1), hi + 1) for g in iter_level(n)]
    if args.graph6 != "none":
        if args.out is None:
            raise UsageError("--graph6 needs --out for the graph6 stream")
        args.out.write_text("".join(s + "\n" for s in stream))
    sys.stdout.write(t.render(args.format))
    return EXIT_OK


def cmd_extremal(args) -> int:
    lo, hi = _enum_range(args)
    t = Table("extremal", ["n", "max_c5", "formula", "match", "winners", "graph6"])
    ok = True
    stream = []
    for n in range(lo, hi + 1):
        c = extremal_c5(n, workers=args.workers)
        best = max(c.max_c5, 0)
        formula = max_c5_formula(n)
        ok &= best == formula
        g6 = [w.graph().to_graph6() for w in c.winners]
        stream.extend(g6)
        shown = ",".join(g6) if len(g6) <= 8 or args.format == "rows" else f"{','.join(g6[:8])},..."
        t.add(n, best, formula, "yes" if best == formula else "NO", len(g6), shown)
    if args.out is not None:
        args.out.write_text("".join(s + "\n" for s in stream))
    sys.stdout.write(t.render(args.format))
    return EXIT_OK if ok else EXIT_FAIL


def _load(path) -> Certificate:
    try:
        return load_certificate(path)
    except OSError as exc:
        raise UsageError(f"cannot read certificate {path}: {exc}") from None
    except CertificateError as exc:
        raise UsageError(f"malformed certificate {path}: {exc}") from None


def cmd_lemma_check(args) -> int:
    if args.constants:
        return _lemma_constants(args)
    names = {"upper": "upper_l5", "low": "lowbound_l6", "tight": "tightup_l6"}
    certs = {}
    for role, name in names.items():
        given = getattr(args, role)
        certs[role] = _load(given if given is not None else bundled_certificate(name))
    report = verify_claim_chain(certs["upper"], certs["low"], certs["tight"])
    t = Table("lemma-check", ["status", "step", "detail"])
    for s in report.steps:
        t.add("PASS" if s.ok else "FAIL", s.name, s.detail)
    t.notes.append(f"chain {'PASS' if report.ok else 'FAIL at ' + str(report.failed_at)}")
    _emit(t.render(args.format), args.out)
    return EXIT_OK if report.ok else EXIT_FAIL


def _lemma_constants(args) -> int:
    lo, hi = _range(args, (10, 99))
    if lo < 10:
        raise UsageError("the lemma checks start at n = 10")
    t = Table("lemma-constants", ["status", "n", "d_n", "margin", "margin_float"])
    ok = True
    for n in range(lo, hi + 1):
        if n < 100:
            try:
                chk = lemma_ratio_small_n(n, LOW_SLOPE, LOW_LB, LOW_VALUE)
            except ArithmeticError as exc:
                t.add("FAIL", n, d_n(n), str(exc), "nan")
                ok = False
                continue
            good, margin = chk.holds, chk.margin
        else:
            chk = final_chain_check(n)
            good, margin = chk.holds and dn_lower_bound_holds(n), chk.margin
        ok &= good
        t.add("PASS" if good else "FAIL", n, d_n(n), margin, f"{float(margin):.6e}")
    if hi >= 100:
        for i in range(5):
            res = asymptotic_check(i, 20)
            ok &= res
            t.notes.append(f"asymptotic residue {i} (m >= 20): {'PASS' if res else 'FAIL'}")
    _emit(t.render(args.format), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(args) -> int:
    cert = _load(args.certificate)
    v = verify_certificate(cert)
    t = Table("verify", ["field", "value"])
    t.add("valid", v.valid)
    t.add("kind", cert.kind)
    t.add("level", cert.level)
    t.add("K", v.K)
    if cert.kind == "upper":
        t.add("proven", f"d(C5) <= {v.proven_b}")
        t.add("claimed", f"d(C5) <= {v.claimed_b}")
    else:
        t.add("proven", f"d(C5+) >= {v.proven_a}*(d(C5) - {cert.lb}) + {v.proven_b}")
        t.add("claimed", f"d(C5+) >= {v.claimed_a}*(d(C5) - {cert.lb}) + {v.claimed_b}")
    for dep in v.depends_on:
        t.add("depends_on", dep)
    t.add("failure", v.failure or "-")
    _emit(t.render(args.format), args.out)
    return EXIT_OK if v.valid else EXIT_FAIL


def cmd_sdp_gen(args) -> int:
    if args.level not in (5, 6, 7):
        raise UsageError("--level must be 5, 6 or 7")
    lb = parse_fraction(args.lb)
    y = parse_fraction(args.y) if args.y is not None else None
    try:
        problem = generate_sdp(args.level, lb, kind=args.kind, y=y)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    text = write_sdpa(problem)
    _emit(text, args.out)
    print(f"{problem.num_constraints} constraints, {len(problem.types)} PSD blocks",
          file=sys.stderr)
    return EXIT_OK


def cmd_round(args) -> int:
    try:
        problem = read_problem_header(Path(args.problem).read_text())
        solution = parse_solution(Path(args.solution).read_text(), problem)
    except OSError as exc:
        raise UsageError(str(exc)) from None
    except SdpError as exc:
        raise UsageError(f"cannot parse: {exc}") from None
    tight = args.tight or (args.tight is None and not problem.free_y)
    cap = args.den_cap or (10**6 if tight else 10**4)
    try:
        if tight:
            cert = round_solution(solution, cap, construction=C5)
        else:
            cert = round_solution(solution, cap, parse_fraction(args.shift_budget))
    except SdpError as exc:
        print(f"rounding failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.out is not None:
        args.out.write_text(emit_certificate(cert))
    v = verify_certificate(cert)
    line = (f"d(C5) <= {v.proven_b}" if cert.kind == "upper"
            else f"d(C5+) >= {v.proven_a}*(d(C5) - {cert.lb}) + {v.proven_b}")
    t = Table("round", ["field", "value"])
    t.add("mode", "tight" if tight else "plain")
    t.add("float_objective", repr(solution.objective))
    t.add("valid", v.valid)
    t.add("proven", line)
    sys.stdout.write(t.render(args.format))
    return EXIT_OK if v.valid else EXIT_FAIL


# ----------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="c5free", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"c5free {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, ranged=False, out_help="write the output here instead of stdout"):
        p.add_argument("--format", choices=("text", "rows"), default="text")
        p.add_argument("--out", type=Path, help=out_help)
        if ranged:
            p.add_argument("--n", type=int)
            p.add_argument("--range", help="a..b, inclusive")
        return p

    p = common(sub.add_parser("census", help="triangle-free classes per order"), True,
               "graph6 stream destination (see --graph6)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--graph6", choices=("none", "all", "winners"), default="none")
    p.set_defaults(run=cmd_census)

    p = common(sub.add_parser("extremal", help="maximum 5-cycle counts and their maximisers"), True,
               "write every winner as graph6 here")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(run=cmd_extremal)

    p = common(sub.add_parser("lemma-check", help="both branches of the density-ratio lemma"), True)
    p.add_argument("--constants", action="store_true",
                   help="check the stated decimal constants instead of certificates")
    p.add_argument("--upper", type=Path)
    p.add_argument("--low", type=Path)
    p.add_argument("--tight", type=Path)
    p.set_defaults(run=cmd_lemma_check)

    p = common(sub.add_parser("verify", help="exactly verify a certificate"))
    p.add_argument("certificate", type=Path)
    p.set_defaults(run=cmd_verify)

    p = common(sub.add_parser("sdp-gen", help="write an SDPA problem"))
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--lb", default="0")
    p.add_argument("--kind", choices=("lower", "upper"), default="lower")
    p.add_argument("--y", help="fix the multiplier instead of optimising it")
    p.set_defaults(run=cmd_sdp_gen)

    p = common(sub.add_parser("round", help="round a solver solution to a certificate"), False,
               "certificate destination")
    p.add_argument("problem")
    p.add_argument("solution")
    p.add_argument("--den-cap", type=int)
    p.add_argument("--shift-budget", default="1/100")
    p.add_argument("--tight", action=argparse.BooleanOptionalAction, default=None,
                   help="meet the C5 construction exactly (default when y is fixed)")
    p.set_defaults(run=cmd_round)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    run: Callable = args.run
    try:
        return run(args)
    except UsageError as exc:
        print(f"c5free {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"c5free {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
