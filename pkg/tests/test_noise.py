import math

import numpy as np
import pytest

from qkd_nutshell.circuit import Circuit, CircuitError, PauliString
from qkd_nutshell.codes import code_422, stabilizer_measurement_block
from qkd_nutshell.noise import (BitFlip, Dephasing, DeterministicPauli, Depolarizing1, Depolarizing2,
                                HeraldedErase, PauliChannel, Sequential, TwirledAmplitudeDamping,
                                attach_circuit_noise, channel_from_config, channel_to_config,
                                compose_channel, pauli_branches, sample_error, sample_errors,
                                scale_channel, twirl_amplitude_damping)
from qkd_nutshell.rng import stream

N = 10 ** 6


def _within(freq, p, n=N, k=5):
    return abs(freq - p) <= k * math.sqrt(p * (1 - p) / n) + 1e-12


def _labels(x, z):
    return np.array(["IXZY"[a + 2 * b] for a, b in zip(x[0], z[0])])


def test_depolarizing1_marginals():
    x, z, _ = sample_errors(Depolarizing1(0.3), stream(1), N)
    lab = _labels(x, z)
    for c in "XYZ":
        assert abs((lab == c).mean() - 0.1) < 0.001


def test_bitflip_and_pauli_channel_marginals():
    x, z, _ = sample_errors(BitFlip(0.1), stream(2), N)
    assert _within(x.mean(), 0.1) and not z.any()
    x, z, _ = sample_errors(PauliChannel(0.1, 0.01, 0.02), stream(3), N)
    lab = _labels(x, z)
    for c, p in zip("XYZ", (0.1, 0.01, 0.02)):
        assert _within((lab == c).mean(), p)


def test_depolarizing2_uniform_over_15():
    x, z, _ = sample_errors(Depolarizing2(0.3), stream(4), N)
    code = x[0] + 2 * z[0] + 4 * x[1] + 8 * z[1]
    counts = np.bincount(code, minlength=16) / N
    assert _within(counts[0], 0.7)
    for k in range(1, 16):
        assert _within(counts[k], 0.02)


def test_heralded_erase():
    x, z, h = sample_errors(HeraldedErase(0.2), stream(5), N)
    assert _within(h.mean(), 0.2)
    assert not (x | z)[~h].any()
    lab = _labels(x, z)[h[0]]
    for c in "IXYZ":
        assert _within((lab == c).mean(), 0.25, n=int(h.sum()))
    x, z, h = sample_errors(HeraldedErase(0.0), stream(6), 1000)
    assert not h.any() and not x.any() and not z.any()


def test_deterministic_and_arity():
    p, h = sample_error(DeterministicPauli("X"), [0], stream(7))
    assert p == PauliString.from_label("X") and h == ()
    with pytest.raises(ValueError):
        sample_error(Depolarizing2(0.1), [0], stream(8))
    with pytest.raises(ValueError):
        sample_error(BitFlip(0.1), [0, 1], stream(8))


def test_twirl_values():
    assert twirl_amplitude_damping(0.0).p_x == 0.0
    one = twirl_amplitude_damping(1.0)
    assert (one.p_x, one.p_y, one.p_z, one.p_identity) == pytest.approx((0.25, 0.25, 0.25, 0.25))
    t = twirl_amplitude_damping(0.2)
    assert (t.p_x, t.p_y, t.p_z) == pytest.approx((0.05, 0.05, 0.0027864045), abs=1e-10)
    assert t.p_identity == pytest.approx(0.8972135955, abs=1e-10)
    for g in np.linspace(0, 1, 101):
        c = twirl_amplitude_damping(g)
        assert min(c.p_x, c.p_y, c.p_z) >= 0
        assert abs(c.p_x + c.p_y + c.p_z + c.p_identity - 1) < 1e-12
    with pytest.raises(ValueError):
        twirl_amplitude_damping(1.5)


def test_probability_validation():
    with pytest.raises(ValueError):
        BitFlip(1.2)
    with pytest.raises(ValueError):
        PauliChannel(0.5, 0.4, 0.2)


def test_compose_channel():
    comp = compose_channel(TwirledAmplitudeDamping(0.2), Dephasing(0.2), HeraldedErase(0.2))
    assert isinstance(comp, Sequential) and comp.n_heralds == 1
    assert compose_channel(BitFlip(0.1)) == BitFlip(0.1)
    x, z, _ = sample_errors(compose_channel(DeterministicPauli("X"), DeterministicPauli("X")), stream(9), 10)
    assert not x.any() and not z.any()
    assert sum(p for p, _, _ in pauli_branches(comp)) == pytest.approx(1.0)


def test_attach_circuit_noise_block_count():
    c = Circuit(5, 1)
    stabilizer_measurement_block(c, code_422().stabilizers[0], 4, bit=0)
    noisy = attach_circuit_noise(c, 0.01)
    assert sum(len(ins.noise) for ins in noisy) == 8
    kinds = {type(t.channel).__name__ for ins in noisy for t in ins.noise}
    assert kinds == {"Depolarizing1", "Depolarizing2"}
    with pytest.raises(CircuitError):
        attach_circuit_noise(noisy, 0.01)


def test_attach_zero_noise_is_harmless():
    c = Circuit(1).prep(0).x(0).measure(0)
    noisy = attach_circuit_noise(c, 0.0)
    x, _, _ = sample_errors(noisy.instructions[1].noise[0].channel, stream(1), 1000)
    assert not x.any()


def test_config_roundtrip_and_scaling():
    specs = [BitFlip(0.1), PauliChannel(0.1, 0.01, 0.01), compose_channel(TwirledAmplitudeDamping(0.2),
                                                                          Dephasing(0.2))]
    for s in specs:
        assert channel_from_config(channel_to_config(s)) == s
    assert scale_channel(BitFlip(0.1), 0.5) == BitFlip(0.05)
    with pytest.raises(ValueError):
        channel_from_config({"type": "bitflip", "q": 0.1})
