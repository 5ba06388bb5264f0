import numpy as np
import pytest

from qkd_nutshell.protocols import run_bb84, sift
from qkd_nutshell.rng import stream
from qkd_nutshell.sidechannel import (BiasModel, DetectorModel, agreement_probability, apply_bias,
                                      bias_curve, double_detection, inject_sidechannel,
                                      mutual_information, pump, quench)

GRID = np.linspace(0, 40, 401)


def test_quench_decreasing_pump_increasing():
    for state in (0, 1):
        q = [apply_bias(quench(), state, t) for t in GRID]
        p = [apply_bias(pump(), state, t) for t in GRID]
        assert all(a >= b for a, b in zip(q, q[1:]))
        assert all(a <= b for a, b in zip(p, p[1:]))


def test_bias_thresholds():
    assert max(apply_bias(quench(), s, 3.0) for s in (0, 1)) < 0.01
    assert min(apply_bias(pump(), s, 10.0) for s in (0, 1)) > 0.99
    assert apply_bias(quench(), 0, 0.0) == pytest.approx(0.999)


def test_bias_curve_rows():
    rows = bias_curve(pump(), [0.0, 1.0])
    assert rows[0] == (0.0, 0.999, pytest.approx(0.001))


def test_detector_p_dark():
    det = DetectorModel()
    assert det.p_dark(0, 0.0) == 1.0
    assert det.p_dark(1, 1100.0) < 0.01
    assert det.p_dark(0, 1100.0) == pytest.approx(1 - det.spam_floor)
    with pytest.raises(ValueError):
        det.p_dark(0, -1.0)


def test_agreement_monotone_in_exposure():
    det = DetectorModel()
    vals = [agreement_probability(det, 1100.0, t) for t in np.linspace(0, 1100, 221)]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))
    assert vals[0] == pytest.approx(0.5, abs=0.01)
    assert vals[-1] > 0.99


def test_double_detection_zero_exposure():
    rng = stream(1)
    assert all(double_detection(DetectorModel(), 1, 1100.0, 0.0, rng)[1] == 1 for _ in range(50))


def test_inject_detector_leaks_key():
    recs = sift(run_bb84(2000, master_seed=2))
    aug = inject_sidechannel(recs, DetectorModel(), {"e_exposure_us": 1000.0}, master_seed=2)
    assert mutual_information([r.x_B for r in aug], [r.e_leak for r in aug]) > 0.9
    none = inject_sidechannel(recs, DetectorModel(), {"e_exposure_us": 0.0}, master_seed=2)
    assert mutual_information([r.x_B for r in none], [r.e_leak for r in none]) == pytest.approx(0.0)


def test_inject_bias_raises_qber():
    recs = sift(run_bb84(2000, master_seed=3))
    aug = inject_sidechannel(recs, pump(), {"duration_us": 20.0}, master_seed=3)
    qber = np.mean([r.x_A != r.x_B for r in aug])
    assert 0.4 < qber < 0.6


def test_inject_rejects_bad_params():
    recs = sift(run_bb84(20, master_seed=1))
    with pytest.raises(ValueError):
        inject_sidechannel(recs, pump(), {"t": 1.0})
    with pytest.raises(TypeError):
        inject_sidechannel([(0, 1)], pump(), {"duration_us": 1.0})


def test_mutual_information_values():
    a = [0, 1] * 50
    assert mutual_information(a, a) == pytest.approx(1.0)
    assert mutual_information(a, [0, 0, 1, 1] * 25) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        mutual_information([0], [0, 1])


def test_model_validation():
    with pytest.raises(ValueError):
        BiasModel("heat", 1.0)
    with pytest.raises(ValueError):
        quench(-1.0)
    with pytest.raises(ValueError):
        DetectorModel(threshold=0)
