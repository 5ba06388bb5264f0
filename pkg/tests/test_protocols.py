import math

import pytest

from qkd_nutshell.attacks import ClonerSpec
from qkd_nutshell.noise import BitFlip, HeraldedErase
from qkd_nutshell.protocols import (ABORT_QBER, CSV_HEADER, Basis, RoundRecord, correlation,
                                    qber_abort_check, records_to_csv, run_bb84, run_bbm92, sift)


def test_noiseless_bb84_is_perfect():
    recs = sift(run_bb84(400, master_seed=1))
    assert recs and all(r.x_A == r.x_B for r in recs)
    assert qber_abort_check(recs) == {"qber": 0.0, "abort": False}


def test_sifting_fraction():
    recs = run_bb84(4000, master_seed=2)
    frac = len(sift(recs)) / len(recs)
    assert abs(frac - 0.5) < 4 * math.sqrt(0.25 / 4000)


def test_bb84_is_seeded():
    a = run_bb84(200, ClonerSpec("pccm", theta=1.0), master_seed=5)
    b = run_bb84(200, ClonerSpec("pccm", theta=1.0), master_seed=5)
    assert a == b
    assert records_to_csv(a) == records_to_csv(b)


def test_bb84_bitflip_qber():
    recs = sift(run_bb84(8000, channel_noise=BitFlip(0.1), master_seed=3))
    z = [r for r in recs if r.b_B == Basis.Z]
    qber = qber_abort_check(z)["qber"]
    assert abs(qber - 0.1) < 4 * math.sqrt(0.09 / len(z))
    x = [r for r in recs if r.b_B == Basis.X]
    assert qber_abort_check(x)["qber"] == 0.0


def test_pccm_sampled_correlation():
    theta = 1.2
    recs = sift(run_bb84(4000, ClonerSpec("pccm", theta=theta), master_seed=4))
    c = correlation(recs, "AB")
    assert abs(c.value - math.cos(theta / 2)) < 4 * c.std_err + 1e-3
    e = correlation(recs, "AE")
    assert abs(e.value - math.sin(theta / 2)) < 4 * e.std_err + 1e-3


def test_bbm92_noiseless_and_eve_fields():
    recs = run_bbm92(400, ClonerSpec("pccm", theta=0.0), master_seed=6)
    for r in recs:
        if r.b_A == r.b_B:
            assert r.x_A == r.x_B and r.x_E is not None
        else:
            assert r.x_E is None
    assert abs(sum(r.x_A for r in recs) / 400 - 0.5) < 0.1


def test_heralded_channel_marks_rounds():
    recs = run_bb84(300, channel_noise=HeraldedErase(0.5), master_seed=7)
    frac = sum(r.herald for r in recs) / 300
    assert 0.35 < frac < 0.65


def test_abort_threshold():
    rec = [RoundRecord(i, 0, Basis.Z, Basis.Z, int(i < 15)) for i in range(100)]
    assert qber_abort_check(rec) == {"qber": 0.15, "abort": True}
    assert ABORT_QBER == 0.145
    with pytest.raises(ValueError):
        qber_abort_check([])


def test_correlation_errors():
    recs = sift(run_bb84(50, master_seed=1))
    with pytest.raises(ValueError):
        correlation(recs, "AE")
    with pytest.raises(ValueError):
        correlation(recs, "XY")


def test_csv_layout():
    text = records_to_csv(run_bb84(5, ClonerSpec("pccm", theta=0.5), master_seed=2))
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_HEADER) and len(lines) == 6


def test_invalid_rounds():
    with pytest.raises(ValueError):
        run_bb84(0)
