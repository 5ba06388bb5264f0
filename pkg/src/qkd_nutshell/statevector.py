"""Dense state-vector engine for small circuits, including non-Clifford rotations.

Amplitude ``i`` belongs to the basis state whose qubit ``q`` is bit ``q`` of
``i`` (qubit 0 least significant).  Mixed states only ever exist as Monte
Carlo mixtures: every noise tag is sampled per shot.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace

import numpy as np

from . import circuit as cir
from .circuit import Circuit, CircuitError, NoiseTag
from .noise import DeterministicPauli, is_deterministic, pauli_branches, sample_error

_NORM_TOL = 1e-8
_BRANCH_EPS = 1e-15

_SQ2 = 1 / math.sqrt(2)
_MATS = {
    cir.H: np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], complex),
    cir.X: np.array([[0, 1], [1, 0]], complex),
    cir.Y: np.array([[0, -1j], [1j, 0]], complex),
    cir.Z: np.array([[1, 0], [0, -1]], complex),
    cir.S: np.array([[1, 0], [0, 1j]], complex),
    cir.SDG: np.array([[1, 0], [0, -1j]], complex),
}


def ry_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -s], [s, c]], complex)


class NormDriftError(RuntimeError):
    pass


@dataclass
class ShotRecord:
    bits: np.ndarray
    heralds: np.ndarray


class QuantumState:
    def __init__(self, n: int):
        self.n = n
        self.amplitudes = np.zeros(2 ** n, complex)
        self.amplitudes[0] = 1.0

    def _view(self, q):
        return self.amplitudes.reshape(2 ** (self.n - 1 - q), 2, 2 ** q)

    def apply_1q(self, mat: np.ndarray, q: int) -> None:
        v = self._view(q)
        a0, a1 = v[:, 0, :].copy(), v[:, 1, :].copy()
        v[:, 0, :] = mat[0, 0] * a0 + mat[0, 1] * a1
        v[:, 1, :] = mat[1, 0] * a0 + mat[1, 1] * a1

    def apply_pauli(self, label: str, qubits) -> None:
        for c, q in zip(label, qubits):
            if c != "I":
                self.apply_1q(_MATS[c], q)

    def apply_cnot(self, c: int, t: int) -> None:
        idx = np.arange(2 ** self.n)
        sel = idx[((idx >> c) & 1) == 1]
        sel = sel[((sel >> t) & 1) == 0]
        a = self.amplitudes
        a[sel], a[sel | (1 << t)] = a[sel | (1 << t)].copy(), a[sel].copy()

    def apply_cz(self, p: int, q: int) -> None:
        idx = np.arange(2 ** self.n)
        self.amplitudes[(((idx >> p) & (idx >> q)) & 1) == 1] *= -1

    def prob_one(self, q: int) -> float:
        v = self._view(q)
        return float(np.sum(np.abs(v[:, 1, :]) ** 2))

    def project(self, q: int, bit: int, prob: float) -> None:
        v = self._view(q)
        v[:, 1 - bit, :] = 0
        self.amplitudes /= math.sqrt(prob)

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> QuantumState:
        out = QuantumState.__new__(QuantumState)
        out.n = self.n
        out.amplitudes = self.amplitudes.copy()
        return out


def _apply_unitary(state: QuantumState, ins: cir.Instruction) -> None:
    k, t = ins.kind, ins.targets
    if k == cir.CNOT:
        state.apply_cnot(*t)
    elif k == cir.CZ:
        state.apply_cz(*t)
    elif k == cir.RY:
        state.apply_1q(ry_matrix(ins.angle), t[0])
    else:
        state.apply_1q(_MATS[k], t[0])


def _measure(state: QuantumState, q: int, rng) -> int:
    p1 = state.prob_one(q)
    total = state.norm()
    if abs(total - 1) > _NORM_TOL:
        raise NormDriftError(f"state norm drifted to {total}")
    bit = int(rng.random() < p1)
    prob = p1 if bit else 1 - p1
    if prob < _BRANCH_EPS:
        bit = 1 - bit
        prob = 1 - prob
    state.project(q, bit, prob)
    return bit


def _apply_tags(state, tags, rng, heralds, before):
    for tag in tags:
        if tag.before != before:
            continue
        err, h = sample_error(tag.channel, tag.qubits, rng)
        state.apply_pauli(err.label(), tag.qubits)
        heralds.extend(h)


def run_shot(circuit: Circuit, rng: np.random.Generator, *, noisy: bool = True) -> ShotRecord:
    """Execute one shot; measurement outcomes follow the Born rule."""
    state = QuantumState(circuit.n_qubits)
    bits = np.zeros(circuit.n_bits, dtype=np.uint8)
    heralds: list[bool] = []
    for ins in circuit.instructions:
        if noisy and ins.noise:
            _apply_tags(state, ins.noise, rng, heralds, before=True)
        if ins.kind == cir.MEASUREZ:
            bits[ins.result_bit] = _measure(state, ins.targets[0], rng)
        elif ins.kind in (cir.PREPZ, cir.RESET):
            if _measure(state, ins.targets[0], rng):
                state.apply_1q(_MATS[cir.X], ins.targets[0])
        else:
            _apply_unitary(state, ins)
        if noisy and ins.noise:
            _apply_tags(state, ins.noise, rng, heralds, before=False)
    norm = state.norm()
    if abs(norm - 1) > _NORM_TOL:
        raise NormDriftError(f"state norm drifted to {norm}")
    return ShotRecord(bits, np.array(heralds, dtype=bool))


def final_state(circuit: Circuit) -> QuantumState:
    """State after a measurement-free, noiseless circuit."""
    state = QuantumState(circuit.n_qubits)
    for ins in circuit.instructions:
        if ins.kind == cir.MEASUREZ:
            raise CircuitError("final_state needs a measurement-free circuit")
        if ins.kind in (cir.PREPZ, cir.RESET):
            p1 = state.prob_one(ins.targets[0])
            if p1 > _BRANCH_EPS:
                raise CircuitError("final_state cannot reset an excited qubit")
            continue
        _apply_unitary(state, ins)
    return state


def _bitstring(bits) -> str:
    return "".join(str(int(b)) for b in bits)


def exact_distribution(circuit: Circuit) -> dict[str, float]:
    """Born-rule distribution over measured bits (bit 0 leftmost).

    Deterministic noise tags are applied; probabilistic ones are an error.
    """
    for ins in circuit.instructions:
        for tag in ins.noise:
            if not is_deterministic(tag.channel):
                raise CircuitError(f"probabilistic noise tag {tag.channel!r} in exact_distribution")
    branches = [(QuantumState(circuit.n_qubits), 1.0, np.zeros(circuit.n_bits, np.uint8))]
    for ins in circuit.instructions:
        for st, _, _ in branches:
            for tag in ins.noise:
                if tag.before:
                    st.apply_pauli(tag.channel.pauli, tag.qubits)
        if ins.kind in (cir.MEASUREZ, cir.PREPZ, cir.RESET):
            q = ins.targets[0]
            nxt = []
            for st, p, bits in branches:
                p1 = st.prob_one(q)
                for bit, pb in ((0, 1 - p1), (1, p1)):
                    if pb <= 1e-14:
                        continue
                    s2 = st.copy()
                    s2.project(q, bit, pb)
                    b2 = bits.copy()
                    if ins.kind == cir.MEASUREZ:
                        b2[ins.result_bit] = bit
                    elif bit:
                        s2.apply_1q(_MATS[cir.X], q)
                    nxt.append((s2, p * pb, b2))
            branches = nxt
        else:
            for st, _, _ in branches:
                _apply_unitary(st, ins)
        for st, _, _ in branches:
            for tag in ins.noise:
                if not tag.before:
                    st.apply_pauli(tag.channel.pauli, tag.qubits)
    dist: dict[str, float] = {}
    for _, p, bits in branches:
        key = _bitstring(bits)
        dist[key] = dist.get(key, 0.0) + p
    return dist


def noisy_distribution(circuit: Circuit, max_branches: int = 1 << 14) -> dict[str, float]:
    """Exact outcome distribution of a Pauli-noisy circuit by summing over noise branches."""
    locations = [(i, j) for i, ins in enumerate(circuit.instructions) for j in range(len(ins.noise))]
    options = []
    for i, j in locations:
        tag = circuit.instructions[i].noise[j]
        merged: dict[str, float] = {}
        for p, label, _ in pauli_branches(tag.channel):
            if p > 0:
                merged[label] = merged.get(label, 0.0) + p
        options.append(list(merged.items()))
    if math.prod(len(o) for o in options) > max_branches:
        raise ValueError("too many noise branches for exact enumeration")
    dist: dict[str, float] = {}
    for combo in itertools.product(*options):
        weight = math.prod(p for _, p in combo)
        instructions = list(circuit.instructions)
        by_ins: dict[int, list] = {}
        for (i, j), (label, _) in zip(locations, combo):
            tag = circuit.instructions[i].noise[j]
            by_ins.setdefault(i, []).append(NoiseTag(DeterministicPauli(label), tag.qubits, tag.before))
        for i, tags in by_ins.items():
            instructions[i] = replace(instructions[i], noise=tuple(tags))
        branch = Circuit(circuit.n_qubits, circuit.n_bits, instructions)
        for key, p in exact_distribution(branch).items():
            dist[key] = dist.get(key, 0.0) + weight * p
    return dist
