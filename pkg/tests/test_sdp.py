import random
import re
import shutil
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from c5free.certificate import verify_certificate
from c5free.graphs import C5
from c5free.sdp import (FloatSolution, SdpError, best_rational, generate_sdp, parse_solution,
                        psd_repair, read_problem_header, round_solution, rounding_gain, write_sdpa,
                        zero_vectors)

FIXTURES = Path(__file__).parent / "fixtures"
SOLVER = Path(__file__).parent.parent / "scripts" / "solve_sdpa.py"


def _header_counts(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("*")]
    return int(body[0]), int(body[1]), body[2].split()


def test_constraint_counts():
    assert _header_counts(write_sdpa(generate_sdp(5, kind="upper")))[0] == 14
    assert _header_counts(write_sdpa(generate_sdp(6, Fraction(17, 500))))[0] == 38


def test_block_structure():
    p = generate_sdp(6, Fraction(17, 500))
    m, nblocks, sizes = _header_counts(write_sdpa(p))
    assert nblocks == 11
    assert sizes == ["3", "15", "10", "16", "12", "10", "9", "9", "8", "7", "-41"]


def test_deterministic():
    a = write_sdpa(generate_sdp(6, Fraction(17, 500)))
    b = write_sdpa(generate_sdp(6, Fraction(17, 500)))
    assert a == b


def test_lb_moves_only_the_objective():
    a = write_sdpa(generate_sdp(6, Fraction(17, 500))).splitlines()
    b = write_sdpa(generate_sdp(6, Fraction(24, 625))).splitlines()
    constraints = lambda lines: [ln for ln in lines if re.match(r"[1-9]\d* ", ln)]
    objective = lambda lines: [ln for ln in lines if ln.startswith("0 ")]
    assert constraints(a) == constraints(b)
    assert objective(a) != objective(b)


def test_header_round_trip():
    p = generate_sdp(6, Fraction(24, 625), y=6)
    q = read_problem_header(write_sdpa(p))
    assert (q.kind, q.level, q.lb, q.y, q.types) == (p.kind, p.level, p.lb, p.y, p.types)
    with pytest.raises(SdpError):
        read_problem_header("1\n2\n")


def test_problem_guards():
    with pytest.raises(SdpError):
        generate_sdp(5, kind="lower")
    with pytest.raises(SdpError):
        generate_sdp(5, kind="upper", y=1)


@pytest.fixture(scope="module")
def upper5():
    p = generate_sdp(5, kind="upper")
    return p, (FIXTURES / "upper_l5.sol").read_text()


def test_parse_well_formed(upper5):
    p, text = upper5
    s = parse_solution(text, p)
    assert len(s.blocks) == 4 and s.blocks[0].shape == (5, 5)
    assert abs(s.K + 0.0384) < 1e-6
    assert np.allclose(s.blocks[1], s.blocks[1].T)


@pytest.mark.parametrize("cut", [0, 1, 3])
def test_parse_truncated(upper5, cut):
    p, text = upper5
    lines = text.splitlines()
    if cut == 0:
        bad = ""
    elif cut == 1:
        bad = lines[0]
    else:
        bad = "\n".join(lines[:3] + [lines[3][: len(lines[3]) // 2].rsplit(" ", 1)[0]])
    with pytest.raises(SdpError):
        parse_solution(bad, p)


@pytest.mark.parametrize("line", ["2 9 1 1 0.5", "2 1 9 9 0.5", "3 1 1 1 0.5", "2 5 1 2 0.5", "2 1 1 x 1"])
def test_parse_rejects_bad_entries(upper5, line):
    p, text = upper5
    with pytest.raises(SdpError):
        parse_solution(text + line + "\n", p)


def test_parse_wrong_dual_length(upper5):
    p, text = upper5
    with pytest.raises(SdpError):
        parse_solution("0.1 0.2\n" + text.split("\n", 1)[1], p)


def test_parse_accepts_slightly_indefinite_matrices(upper5):
    p, text = upper5
    s = parse_solution(text, p)
    d = s.blocks[0].shape[0]
    lines = [text.splitlines()[0]]
    for b, m in enumerate(s.blocks):
        shifted = m - 1e-9 * np.eye(m.shape[0]) if b == 0 else m
        lines += [f"2 {b + 1} {i + 1} {j + 1} {float(shifted[i, j])!r}" for i in range(m.shape[0]) for j in range(i, m.shape[0])]
    lines += [f"2 5 {i + 1} {i + 1} {float(v)!r}" for i, v in enumerate(s.scalars)]
    s2 = parse_solution("\n".join(lines), p)
    assert np.linalg.eigvalsh(s2.blocks[0]).min() < np.linalg.eigvalsh(s.blocks[0]).min()
    assert d == 5


def test_best_rational():
    assert best_rational(0.333333, 100) == Fraction(1, 3)
    assert best_rational(0.5, 1) in (Fraction(0), Fraction(1))
    assert best_rational(-2.25, 10) == Fraction(-9, 4)


def test_psd_repair_keeps_exact_gram():
    rnd = random.Random(4)
    a = [[Fraction(rnd.randint(-3, 3)) for _ in range(4)] for _ in range(3)]
    m = [[sum(r[i] * r[j] for r in a) for j in range(4)] for i in range(4)]
    out, delta = psd_repair(m, Fraction(1, 10 ** 4), Fraction(1, 100))
    assert out == m and delta == 0
    bad = [[Fraction(1), Fraction(1)], [Fraction(1), Fraction(1) - Fraction(1, 10 ** 5)]]
    out, delta = psd_repair(bad, Fraction(1, 10 ** 4), Fraction(1, 100))
    assert 0 < delta <= Fraction(1, 100)
    with pytest.raises(SdpError):
        psd_repair([[Fraction(-1)]], Fraction(1, 10 ** 4), Fraction(1, 100))


def test_round_exact_gram_solution_is_unchanged():
    p = generate_sdp(5, kind="upper")
    blocks = []
    rnd = random.Random(1)
    for basis in p.bases:
        d = len(basis)
        a = np.array([[rnd.randint(-2, 2) for _ in range(d)] for _ in range(2)], dtype=float) / 8
        blocks.append(a.T @ a)
    s = FloatSolution(p, blocks, np.zeros(len(p.scalar_names())))
    cert = round_solution(s, 10 ** 4, Fraction(1, 100))
    for b, m in zip(cert.blocks, blocks):
        assert np.array_equal(np.array(b.matrix, dtype=float), m)


def test_round_fixture_plain_and_tight(upper5):
    p, text = upper5
    s = parse_solution(text, p)
    plain = round_solution(s, 10 ** 4, Fraction(1, 100))
    vp = verify_certificate(plain)
    assert vp.valid and Fraction(24, 625) <= vp.proven_b < Fraction(24, 625) + Fraction(1, 10 ** 3)
    assert abs(rounding_gain(s, plain)) < 1e-3
    tight = round_solution(s, 10 ** 6, construction=C5)
    vt = verify_certificate(tight)
    assert vt.valid and vt.proven_b == Fraction(24, 625)
    assert abs(rounding_gain(s, tight)) < 1e-6


@pytest.mark.parametrize("seed", range(8))
def test_round_never_returns_unverified(upper5, seed):
    p, text = upper5
    s = parse_solution(text, p)
    rng = np.random.default_rng(seed)
    noisy = [m + rng.normal(0, 10.0 ** -rng.integers(2, 6), m.shape) for m in s.blocks]
    noisy = [(m + m.T) / 2 for m in noisy]
    bad = FloatSolution(p, noisy, s.scalars, s.dual)
    try:
        cert = round_solution(bad, 10 ** 4, Fraction(1, 100))
    except SdpError:
        return
    assert verify_certificate(cert).valid


def test_tight_rounding_needs_fixed_multiplier():
    p = generate_sdp(6, Fraction(17, 500))
    s = FloatSolution(p, [np.zeros((len(b), len(b))) for b in p.bases], np.zeros(len(p.scalar_names())))
    with pytest.raises(SdpError):
        round_solution(s, construction=C5)


def test_zero_vectors_are_annihilated_by_tight_blocks():
    from c5free import bundled_certificate
    from c5free.certificate import load_certificate

    cert = load_certificate(bundled_certificate("tightup_l6"))
    for b in cert.blocks:
        for z in zero_vectors(C5, b.type, b.flags):
            mz = [sum(x * y for x, y in zip(row, z)) for row in b.matrix]
            assert all(v == 0 for v in mz)


@pytest.mark.solver
@pytest.mark.skipif(shutil.which("python3") is None or __import__("importlib").util.find_spec("cvxpy") is None,
                    reason="cvxpy not installed")
def test_external_solver_round_trip(tmp_path):
    p = generate_sdp(5, kind="upper")
    dat, sol = tmp_path / "p.dat-s", tmp_path / "p.sol"
    dat.write_text(write_sdpa(p))
    subprocess.run([sys.executable, str(SOLVER), str(dat), str(sol)], check=True, capture_output=True)
    s = parse_solution(sol.read_text(), read_problem_header(dat.read_text()))
    assert verify_certificate(round_solution(s, 10 ** 6, construction=C5)).proven_b == Fraction(24, 625)
