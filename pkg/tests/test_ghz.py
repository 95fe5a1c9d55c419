import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyperqss.ghz import (
    ALL_LABELS,
    PSI0_PLUS,
    CheckResult,
    PauliOp,
    PolGHZLabel,
    apply_pauli,
    check_round,
    decode_key,
    iter_op_triples,
    key_bit,
    key_bits_from_codes,
    predict_codes,
    predict_state,
)

labels = st.sampled_from(ALL_LABELS)
ops = st.sampled_from(list(PauliOp))


def test_eight_distinct_labels():
    assert len(set(ALL_LABELS)) == 8
    assert sorted(lab.code for lab in ALL_LABELS) == list(range(8))


@pytest.mark.parametrize("text", ["psi0+", "psi1-", "psi2+", "psi3-"])
def test_parse_round_trip(text):
    assert str(PolGHZLabel.parse(text)) == text


@pytest.mark.parametrize("bad", ["psi4+", "phi0+", "psi0", ""])
def test_parse_rejects_garbage(bad):
    with pytest.raises(ValueError):
        PolGHZLabel.parse(bad)


def test_bad_position_rejected():
    with pytest.raises(ValueError):
        apply_pauli(PSI0_PLUS, PauliOp.X, 0)


def test_worked_example():
    out = predict_state(PSI0_PLUS, (PauliOp.X, PauliOp.I, PauliOp.Y))
    assert out == PolGHZLabel.parse("psi2-")
    assert decode_key(PSI0_PLUS, out) == 1


def test_identity_ops_keep_state():
    for lab in ALL_LABELS:
        assert predict_state(lab, (PauliOp.I,) * 3) == lab


@given(labels, ops, st.integers(1, 3))
def test_pauli_is_involution(lab, op, pos):
    assert apply_pauli(apply_pauli(lab, op, pos), op, pos) == lab


@given(labels, ops, ops, ops)
def test_key_depends_only_on_bob_and_charlie(lab, a, b, c):
    measured = predict_state(lab, (a, b, c))
    assert decode_key(lab, measured) == key_bit(b, c) == b.key_class ^ c.key_class


@given(labels, labels)
def test_compose_is_group_operation(x, y):
    assert x.compose(y) == y.compose(x)
    assert x.compose(x) == PSI0_PLUS
    assert x.compose(PSI0_PLUS) == x


def test_check_round():
    ops3 = (PauliOp.Z, PauliOp.X, PauliOp.Y)
    good = predict_state(PSI0_PLUS, ops3)
    assert check_round(PSI0_PLUS, ops3, good) is CheckResult.CONSISTENT
    bad = PolGHZLabel.from_code(good.code ^ 1)
    assert check_round(PSI0_PLUS, ops3, bad) is CheckResult.ERROR


def test_vectorised_prediction_matches_scalar():
    triples = list(iter_op_triples())
    op_codes = np.array([[op.code for op in t] for t in triples])
    for lab in ALL_LABELS:
        got = predict_codes(np.full(len(triples), lab.code), op_codes)
        want = [predict_state(lab, t).code for t in triples]
        assert got.tolist() == want
    measured = np.array([predict_state(PSI0_PLUS, t).code for t in triples])
    bits = key_bits_from_codes(measured)
    assert bits.tolist() == [key_bit(t[1], t[2]) for t in triples]


def test_key_balanced_over_ops():
    bits = [key_bit(b, c) for _, b, c in iter_op_triples()]
    assert sum(bits) == 32
