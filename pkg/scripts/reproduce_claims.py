#!/usr/bin/env python3
"""Regenerate the three certificates the lemma needs and run the full chain.

    python scripts/reproduce_claims.py [--out certificates] [--solver CLARABEL]

Each certificate goes through generate_sdp -> solve_sdpa.py -> rounding ->
verification. Rounding is deterministic given the solver output, but solver
output itself may differ across platforms, so the committed certificates are
the reference copies.
"""

import argparse
import subprocess
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path

from c5free.certificate import save_certificate, verify_certificate, verify_claim_chain
from c5free.densities import C5_MAX, LOW_LB, TIGHT_SLOPE
from c5free.graphs import C5
from c5free.sdp import generate_sdp, parse_solution, round_solution, write_sdpa

HERE = Path(__file__).resolve().parent
SOLVER = HERE / "solve_sdpa.py"

# name, generate_sdp arguments, rounding arguments
JOBS = [
    ("upper_l5", dict(level=5, kind="upper"), dict(denominator_cap=10**6, construction=C5)),
    ("lowbound_l6", dict(level=6, lb=Fraction(17, 500), kind="lower"),
     dict(denominator_cap=10**4, psd_shift_budget=Fraction(1, 100))),
    ("tightup_l6", dict(level=6, lb=C5_MAX, kind="lower", y=TIGHT_SLOPE),
     dict(denominator_cap=10**6, construction=C5)),
]

assert JOBS[1][1]["lb"] == LOW_LB


def solve(problem, workdir: Path, solver: str):
    dat = workdir / "problem.dat-s"
    sol = workdir / "problem.sol"
    dat.write_text(write_sdpa(problem))
    subprocess.run([sys.executable, str(SOLVER), str(dat), str(sol), "--solver", solver], check=True)
    return parse_solution(sol.read_text(), problem)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(HERE.parent / "src" / "c5free" / "certificates"))
    ap.add_argument("--solver", default="CLARABEL")
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    certs = {}
    with tempfile.TemporaryDirectory() as tmp:
        for name, gen, rnd in JOBS:
            t0 = time.time()
            problem = generate_sdp(**gen)
            s = solve(problem, Path(tmp), args.solver)
            cert = round_solution(s, **rnd)
            v = verify_certificate(cert)
            save_certificate(cert, out / f"{name}.json")
            certs[name] = cert
            print(f"{name}: valid={v.valid} y={v.proven_a} K={v.K} "
                  f"float objective {s.objective:.6f} ({time.time() - t0:.1f}s)")

    report = verify_claim_chain(certs["upper_l5"], certs["lowbound_l6"], certs["tightup_l6"])
    small = sum(st.name.startswith("small n=") for st in report.steps)
    for st, line in zip(report.steps, report.lines()):
        if not st.name.startswith("small n=") or not st.ok:
            print(line)
    print(f"chain {'PASS' if report.ok else 'FAIL'} ({len(report.steps)} steps, {small} small-n checks)")
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
