#!/usr/bin/env python3
"""Stand-in external SDP solver: sparse SDPA in, CSDP-style solution out.

Solves  max tr(C X)  s.t.  tr(A_i X) = a_i,  X >= 0  with cvxpy. Diagonal
blocks (negative sizes in the SDPA header) become non-negative vectors.

    python scripts/solve_sdpa.py problem.dat-s solution.sol [--solver CLARABEL]

Knows nothing about flag algebras; any SDPA file works.
"""

import argparse
import sys

import cvxpy as cp
import numpy as np
import scipy.sparse as sp


def read_sdpa(path):
    with open(path) as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.startswith(("*", '"'))]
    m = int(lines[0].split()[0])
    nblocks = int(lines[1].split()[0])
    sizes = [int(x) for x in lines[2].replace(",", " ").replace("{", " ").replace("}", " ").split()]
    assert len(sizes) == nblocks, "block count mismatch"
    a = np.array([float(x) for x in lines[3].replace(",", " ").split()])
    assert len(a) == m, "right-hand side length mismatch"
    entries = []
    for ln in lines[4:]:
        mat, blk, i, j, v = ln.split()
        entries.append((int(mat), int(blk) - 1, int(i) - 1, int(j) - 1, float(v)))
    return m, sizes, a, entries


def solve(m, sizes, a, entries, solver):
    xs = []
    for s in sizes:
        xs.append(cp.Variable((s, s), PSD=True) if s > 0 else cp.Variable(-s, nonneg=True))
    rows = [[[], [], []] for _ in sizes]  # per block: constraint rows, flat cols, values
    obj = 0
    for mat, b, i, j, v in entries:
        s = sizes[b]
        if s > 0:
            flat = [i * s + j] if i == j else [i * s + j, j * s + i]
        else:
            assert i == j, "diagonal block with off-diagonal entry"
            flat = [i]
        for f in flat:
            r = rows[b]
            r[0].append(mat)
            r[1].append(f)
            r[2].append(v)
    exprs = []
    c_terms = []
    for b, s in enumerate(sizes):
        width = s * s if s > 0 else -s
        mat = sp.csr_matrix((rows[b][2], (rows[b][0], rows[b][1])), shape=(m + 1, width))
        x = cp.vec(xs[b], order="C") if s > 0 else xs[b]
        exprs.append(mat[1:] @ x)
        c_terms.append(mat[0] @ x)
    cons = [sum(exprs) == a]
    prob = cp.Problem(cp.Maximize(sum(c_terms)), cons)
    prob.solve(solver=solver)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise SystemExit(f"solver status {prob.status}")
    return prob, xs, cons[0].dual_value


def write_solution(path, sizes, xs, dual):
    with open(path, "w") as fh:
        fh.write(" ".join(repr(float(v)) for v in np.atleast_1d(dual)) + "\n")
        for b, (s, x) in enumerate(zip(sizes, xs)):
            val = np.asarray(x.value)
            if s > 0:
                for i in range(s):
                    for j in range(i, s):
                        fh.write(f"2 {b + 1} {i + 1} {j + 1} {float(val[i, j])!r}\n")
            else:
                for i in range(-s):
                    fh.write(f"2 {b + 1} {i + 1} {i + 1} {float(val[i])!r}\n")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("problem")
    ap.add_argument("solution")
    ap.add_argument("--solver", default="CLARABEL")
    args = ap.parse_args(argv)
    m, sizes, a, entries = read_sdpa(args.problem)
    prob, xs, dual = solve(m, sizes, a, entries, args.solver)
    write_solution(args.solution, sizes, xs, dual)
    print(f"status {prob.status} objective {prob.value!r}", file=sys.stderr)


if __name__ == "__main__":
    main()
