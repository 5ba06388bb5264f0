import math

import pytest

from qkd_nutshell.noise import BitFlip, DeterministicPauli, Depolarizing1, PauliChannel
from qkd_nutshell.qec_experiments import (analytic_422_bitflip, bitflip_crossover, build_422_circuit,
                                          histogram_similarity, loglog_slope, physical_flip_reference,
                                          run_422, run_steane_monitor, scaling_sweep, steane_exact_flip)


def test_analytic_bitflip_values():
    a = analytic_422_bitflip(0.1)
    assert a["acceptance"] == pytest.approx(0.7048, abs=1e-12)
    assert a["flip_pre"] == pytest.approx(0.18, abs=1e-12)
    assert a["flip_post"] == pytest.approx(4 * 0.01 * 0.81 / 0.7048, abs=1e-12)
    assert analytic_422_bitflip(0.0) == {"acceptance": 1.0, "flip_pre": 0.0, "flip_post": 0.0}
    with pytest.raises(ValueError):
        analytic_422_bitflip(1.5)


@pytest.mark.parametrize("p", [0.05, 0.1, 0.2])
def test_exact_422_matches_analytic(p):
    a = analytic_422_bitflip(p)
    st = run_422(BitFlip(p), 2, exact=True)
    assert st.acceptance_rate == pytest.approx(a["acceptance"], abs=1e-12)
    assert st.flip_rate_LQ1 == pytest.approx(a["flip_post"], abs=1e-12)
    assert st.flip_rate_LQ2 == pytest.approx(a["flip_post"], abs=1e-12)
    pre = run_422(BitFlip(p), 0, exact=True)
    assert pre.acceptance_rate == 1.0
    assert pre.flip_rate_LQ1 == pytest.approx(a["flip_pre"], abs=1e-12)


def test_gx_does_not_see_bitflips():
    assert run_422(BitFlip(0.1), 1, exact=True).acceptance_rate == pytest.approx(1.0)
    assert run_422(Depolarizing1(0.1), 1, exact=True).acceptance_rate < 1.0


def test_422_noiseless_and_deterministic():
    st = run_422(None, 3, shots=1000)
    assert st.acceptance_rate == 1.0 and st.flip_rate_LQ1 == 0.0
    # X on every data qubit is the stabilizer XXXX: invisible and harmless
    st = run_422(DeterministicPauli("X"), 2, shots=1000)
    assert st.acceptance_rate == 1.0 and st.flip_rate_LQ1 == st.flip_rate_LQ2 == 0.0


def test_422_circuit_layout():
    c = build_422_circuit(BitFlip(0.1), 3, p_d=0.01)
    assert c.n_qubits == 7 and c.n_bits == 7


def test_422_monte_carlo_matches_exact():
    st = run_422(BitFlip(0.1), 2, shots=200000, master_seed=3)
    a = analytic_422_bitflip(0.1)
    assert abs(st.acceptance_rate - a["acceptance"]) < 4 * st.stderr_acceptance
    assert abs(st.flip_rate_LQ1 - a["flip_post"]) < 4 * st.stderr_flip


def test_channel_only_slope_and_crossover():
    lams = [0.01, 0.0215, 0.0464, 0.1]
    pts = scaling_sweep(lams)
    assert loglog_slope(lams, [pt.p_L for pt in pts]) == pytest.approx(2.0, abs=0.05)
    assert pts[-1].physical_ref == pytest.approx(physical_flip_reference(0.01))
    x = bitflip_crossover()
    gap = analytic_422_bitflip(x)["flip_post"] - physical_flip_reference(x)
    assert abs(gap) < 1e-8
    with pytest.raises(ValueError):
        loglog_slope([1, 2], [1, 2])


def test_steane_exact_hot_qubit_acceptance():
    acc, flip = steane_exact_flip([BitFlip(0.3)] + [None] * 6)
    assert acc == pytest.approx(0.7) and flip == pytest.approx(0.0, abs=1e-12)


def test_steane_uniform_depolarizing_low_p():
    _, flip = steane_exact_flip(Depolarizing1(0.01))
    assert 0 < flip < 1e-4


def test_steane_monitor_histogram_accounting():
    res = run_steane_monitor(PauliChannel(0.1, 0.01, 0.01), 2, shots=5000, master_seed=1)
    h = res.histogram
    assert h.total == h.shots == 5000
    assert h.trivial_per_round[-1] == h.accepted == res.accepted_per_rounds[-1]
    assert len(res.flip_rates) == 3
    assert all(s[3:] == "000" for s in h.top(3))
    assert histogram_similarity(h, h) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        run_steane_monitor(None, 7, shots=10)


def test_single_round_captures_channel_noise():
    res = run_steane_monitor(BitFlip(0.05), 3, shots=20000, master_seed=2)
    assert set(r for (_, r) in res.histogram.by_round) == {1}
    assert math.isclose(res.flip_rates[1], res.flip_rates[3])
