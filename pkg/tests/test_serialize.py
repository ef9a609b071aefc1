import json

import numpy as np
import pytest

from qelab.errors import MalformedKeyError
from qelab.quantum import basis_state, bell_state, random_mixed_state, trace_distance
from qelab.rng import Stream
from qelab.schemes import PrfSymmetricScheme, SkeCiphertext
from qelab.serialize import (
    base64_to_bits,
    bits_to_base64,
    canonical_json,
    ciphertext_from_json,
    ciphertext_to_json,
    matrix_from_json,
    matrix_to_json,
    result_document,
    results_to_csv,
    state_from_json,
    state_to_json,
)


def test_matrix_round_trip_row_major_pairs():
    mat = np.array([[0.5, 0.5j], [-0.5j, 0.5]], dtype=complex)
    blob = matrix_to_json(mat)
    assert blob[0][1] == [0.0, 0.5]  # row-major [re, im] pairs
    assert np.max(np.abs(matrix_from_json(blob) - mat)) == 0.0


def test_state_round_trip():
    state = random_mixed_state(2, Stream(1))
    blob = state_to_json(state)
    back = state_from_json(blob)
    assert back.names == state.names
    assert trace_distance(back, state) < 1e-12


def test_bit_packing():
    bits = "101100111000"
    assert base64_to_bits(bits_to_base64(bits), len(bits)) == bits
    assert bits_to_base64("") == ""
    with pytest.raises(MalformedKeyError):
        bits_to_base64("10a")
    with pytest.raises(MalformedKeyError):
        base64_to_bits(bits_to_base64("10"), 99)


def test_ciphertext_round_trip():
    scheme = PrfSymmetricScheme(2, 1, setup_rng=Stream(2).child("s"))
    kp = scheme.keygen(Stream(3).child("kg"))
    ct = scheme.encrypt(kp.ek, basis_state("1"), Stream(4).child("enc"))
    blob = ciphertext_to_json(ct)
    restored = ciphertext_from_json(blob, "ske")
    assert isinstance(restored, SkeCiphertext)
    assert restored.tag == ct.tag
    assert trace_distance(scheme.decrypt(kp.dk, restored), basis_state("1")) < 1e-9


def test_result_document_and_canonical_json():
    doc = result_document("game", {"seed": 1}, [{"b": 2, "a": 1}], True)
    text = canonical_json(doc)
    assert text.endswith("\n")
    assert text == canonical_json(json.loads(text))  # stable fixed point
    assert text.index('"a"') < text.index('"b"')  # sorted keys


def test_csv_mirror_flattens_scalars():
    doc = result_document(
        "demo",
        {},
        [{"x": 1, "y": 0.5, "nested": {"skip": True}}, {"x": 2, "label": "ok"}],
        True,
    )
    csv_text = results_to_csv(doc)
    lines = csv_text.strip().split("\n")
    assert lines[0] == "command,label,x,y"
    assert len(lines) == 3
    assert results_to_csv(result_document("demo", {}, [], True)) == ""
