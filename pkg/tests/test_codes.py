import itertools

import pytest

from qkd_nutshell.circuit import PauliString, conjugate_through
from qkd_nutshell.codes import (STEANE_LUT, code_422, code_steane, encoder_circuit, get_code,
                                lut_decode, stabilizer_type, steane_correction)

P = PauliString.from_label


@pytest.mark.parametrize("factory", [code_422, code_steane])
def test_code_invariants(factory):
    code = factory()
    code.check()
    assert len(code.stabilizers) == code.n - code.k


def test_check_rejects_bad_code():
    good = code_422()
    bad = type(good)("bad", 4, 2, 2, (P("XXXX"), P("ZIII")), good.logical_x, good.logical_z)
    with pytest.raises(ValueError):
        bad.check()


def test_get_code():
    assert get_code("steane").t == 1 and get_code("422").t == 0
    with pytest.raises(ValueError):
        get_code("surface")


def test_encoder_422_maps_onto_code_space():
    code = code_422()
    enc = encoder_circuit(code)
    # inputs 0, 1 carry the logical qubits; Z on qubits 2, 3 must become stabilizers
    assert code.in_stabilizer_group(conjugate_through(enc, P("IIZI")))
    assert code.in_stabilizer_group(conjugate_through(enc, P("IIIZ")))
    for q in (0, 1):
        for kind, logicals in (("X", code.logical_x), ("Z", code.logical_z)):
            img = conjugate_through(enc, PauliString.from_sparse(4, kind, (q,)))
            assert code.in_stabilizer_group(img * logicals[q])


def test_encoder_steane_logicals_and_stabilizers():
    code = code_steane()
    enc = encoder_circuit(code)
    assert code.in_stabilizer_group(conjugate_through(enc, P("XIIIIII")) * code.logical_x[0])
    assert code.in_stabilizer_group(conjugate_through(enc, P("ZIIIIII")) * code.logical_z[0])
    for q in range(1, 7):
        assert code.in_stabilizer_group(conjugate_through(enc, PauliString.from_sparse(7, "Z", (q,))))


def test_stabilizer_type():
    assert stabilizer_type(P("XXXX")) == "X"
    assert stabilizer_type(P("ZIZI")) == "Z"
    with pytest.raises(ValueError):
        stabilizer_type(P("XZII"))


def test_lut_all_syndromes():
    expected = {"000": None, "001": 3, "010": 0, "011": 6, "100": 1, "101": 5, "110": 2, "111": 4}
    for s, q in expected.items():
        assert lut_decode(s) == q and STEANE_LUT[s] == q
    with pytest.raises(ValueError):
        lut_decode("0101")


def test_lut_collision_with_weight2():
    code = code_steane()
    err = PauliString.from_sparse(7, "Z", (0, 4))
    syn = code.syndrome(err)
    assert syn[:3] == (0, 0, 0) and lut_decode(syn[3:]) == 5


def test_weight1_errors_corrected():
    code = code_steane()
    for q, kind in itertools.product(range(7), "XYZ"):
        err = PauliString.from_sparse(7, kind, (q,))
        syn = code.syndrome(err)
        assert any(syn)
        assert code.in_stabilizer_group(err * steane_correction(syn))


def test_weight2_error_gives_logical():
    code = code_steane()
    err = PauliString.from_sparse(7, "X", (0, 1))
    residual = err * steane_correction(code.syndrome(err))
    assert not code.in_stabilizer_group(residual)
    assert all(g.commutes(residual) for g in code.stabilizers)
