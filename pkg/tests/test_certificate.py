import json
import random
from fractions import Fraction

import pytest

import certtools
from c5free import bundled_certificate
from c5free.certificate import (Block, Certificate, CertificateError, emit_certificate,
                                load_certificate, parse_certificate, verify_certificate,
                                verify_claim_chain, verify_psd)
from c5free.densities import LOW_LB, lemma_ratio_small_n
from c5free.enumerate import iter_level
from c5free.flags import default_types, flag_basis

SMALL_GRAPHS = [g for n in range(1, 7) for g in iter_level(n)]


@pytest.fixture(scope="module")
def bundled():
    return {name: load_certificate(bundled_certificate(name))
            for name in ("upper_l5", "lowbound_l6", "tightup_l6")}


def zero_lower(level=6, **kw):
    return Certificate("lower", level, [], Fraction(0), Fraction(0), **kw)


def test_verify_psd_examples():
    assert verify_psd([[2, 1], [1, 1]])
    assert not verify_psd([[1, 2], [2, 1]])
    assert verify_psd([[1, 1], [1, 1]])


def test_zero_certificate():
    v = verify_certificate(zero_lower())
    assert v.valid and v.K == 0
    assert v.proven_a == 0 and v.proven_b == 0


def test_level_guard():
    doc = json.loads(emit_certificate(zero_lower()))
    doc["level"] = 5
    with pytest.raises(CertificateError):
        parse_certificate(doc)


def test_asymmetric_matrix_rejected(bundled):
    doc = json.loads(emit_certificate(bundled["tightup_l6"]))
    m = doc["blocks"][0]["matrix"]
    m[0][1] = str(Fraction(m[0][1]) + 1)
    with pytest.raises(CertificateError, match="not symmetric"):
        parse_certificate(doc)


def test_symmetric_perturbation_detected(bundled):
    doc = json.loads(emit_certificate(bundled["tightup_l6"]))
    m = doc["blocks"][3]["matrix"]
    m[0][1] = m[1][0] = str(Fraction(m[0][1]) + 1)
    v = verify_certificate(parse_certificate(doc))
    assert not v.valid and v.failure


@pytest.mark.parametrize("bad", [
    "not json", "[]", '{"format": "other"}',
    '{"format": "c5free-certificate", "version": 2}',
    '{"format": "c5free-certificate", "version": 1, "kind": "lower"}',
])
def test_parse_errors(bad):
    with pytest.raises(CertificateError):
        parse_certificate(bad)


def test_float_rationals_rejected(bundled):
    doc = json.loads(emit_certificate(bundled["upper_l5"]))
    doc["y"] = 0.0
    with pytest.raises(CertificateError):
        parse_certificate(doc)


def test_repeated_flag_rejected():
    t = default_types(6)[1]
    f = flag_basis(t, 6)[0]
    with pytest.raises(CertificateError, match="repeated"):
        Certificate("lower", 6, [Block(t, (f, f), ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))))],
                    Fraction(0), Fraction(0))


def test_round_trip_is_byte_identical(bundled):
    for c in bundled.values():
        text = emit_certificate(c)
        assert emit_certificate(parse_certificate(text)) == text
    assert bundled_certificate("upper_l5").read_text() == emit_certificate(bundled["upper_l5"])


def test_bundled_certificates(bundled):
    up = verify_certificate(bundled["upper_l5"])
    assert up.valid and up.proven_b == Fraction(24, 625)
    tight = verify_certificate(bundled["tightup_l6"])
    assert tight.valid and tight.proven_a == 6
    assert tight.proven_b == Fraction(72, 625)
    low = verify_certificate(bundled["lowbound_l6"])
    assert low.valid and bundled["lowbound_l6"].lb == LOW_LB
    assert low.depends_on == ["d(C5) <= 24/625"]


def _permuted(c: Certificate, rnd: random.Random) -> Certificate:
    blocks = []
    for b in c.blocks:
        order = list(range(len(b.flags)))
        rnd.shuffle(order)
        flags = tuple(b.flags[i] for i in order)
        matrix = tuple(tuple(b.matrix[i][j] for j in order) for i in order)
        blocks.append(Block(b.type, flags, matrix))
    rnd.shuffle(blocks)
    return Certificate(c.kind, c.level, blocks, c.claimed_a, c.claimed_b, c.lb, c.y)


@pytest.mark.parametrize("seed", range(3))
def test_order_invariance(bundled, seed):
    for c in bundled.values():
        a, b = verify_certificate(c), verify_certificate(_permuted(c, random.Random(seed)))
        assert (a.K, a.per_F_slack, a.valid) == (b.K, b.per_F_slack, b.valid)


@pytest.mark.parametrize("name", ["upper_l5", "lowbound_l6", "tightup_l6"])
def test_bounds_hold_on_small_graphons(bundled, name):
    v = verify_certificate(bundled[name])
    for g in SMALL_GRAPHS:
        assert certtools.bound_holds(bundled[name], g, v)


def test_tamper_fuzz_quick():
    text = bundled_certificate("upper_l5").read_text()
    rep = certtools.tamper_fuzz(text, 200, seed=11, soundness_graphs=SMALL_GRAPHS[:20])
    assert rep.trials > 150
    assert rep.false_accepts == []


def test_chain_passes_with_bundled(bundled):
    rep = verify_claim_chain(bundled["upper_l5"], bundled["lowbound_l6"], bundled["tightup_l6"])
    assert rep.ok
    small = [s for s in rep.steps if s.name.startswith("small n=")]
    residues = [s for s in rep.steps if s.name.startswith("asymptotic residue")]
    assert len(small) == 90 and len(residues) == 5
    assert rep.steps[-1].name == "final chain n>=100"


def test_chain_fails_at_n10_with_zero_certificate(bundled):
    rep = verify_claim_chain(bundled["upper_l5"], zero_lower(lb=LOW_LB), bundled["tightup_l6"])
    assert not rep.ok and rep.failed_at == "small n=10"


def test_chain_reports_first_failing_n(bundled):
    low = bundled["lowbound_l6"]
    weak = Certificate("lower", 6, low.blocks, Fraction(9, 2), Fraction(935, 10000), low.lb, low.y)
    assert verify_certificate(weak).valid
    rep = verify_claim_chain(bundled["upper_l5"], weak, bundled["tightup_l6"])
    first = next((n for n in range(10, 100)
                  if not lemma_ratio_small_n(n, Fraction(9, 2), low.lb, Fraction(935, 10000)).holds), None)
    assert rep.failed_at == (None if first is None else f"small n={first}")


def test_chain_raises_on_request(bundled):
    from c5free.certificate import ChainFailure

    with pytest.raises(ChainFailure):
        verify_claim_chain(bundled["upper_l5"], zero_lower(lb=LOW_LB), bundled["tightup_l6"],
                           raise_on_failure=True)


def test_chain_rejects_wrong_kinds(bundled):
    rep = verify_claim_chain(bundled["tightup_l6"], bundled["lowbound_l6"], bundled["tightup_l6"])
    assert not rep.ok and rep.failed_at == "certificate d(C5) <= 24/625"


def test_overclaim_is_invalid(bundled):
    c = bundled["tightup_l6"]
    over = Certificate("lower", 6, c.blocks, c.claimed_a, c.claimed_b + Fraction(1, 10 ** 9), c.lb, c.y)
    v = verify_certificate(over)
    assert not v.valid and "below the claimed line" in v.failure
