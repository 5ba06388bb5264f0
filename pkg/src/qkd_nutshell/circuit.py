"""Circuit representation shared by the state-vector and Pauli-frame engines.

Qubit 0 is the least significant bit of every basis-state index and of every
packed bit-string produced by the engines.

Noise is not an instruction.  It rides on instructions as :class:`NoiseTag`
entries so that one circuit object can be executed with or without noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Sequence

import numpy as np

PREPZ = "PrepZ"
MEASUREZ = "MeasureZ"
RESET = "Reset"
X = "X"
Y = "Y"
Z = "Z"
H = "H"
S = "S"
SDG = "Sdg"
RY = "Ry"
CNOT = "CNOT"
CZ = "CZ"

SINGLE_QUBIT_GATES = frozenset({X, Y, Z, H, S, SDG, RY})
TWO_QUBIT_GATES = frozenset({CNOT, CZ})
NON_UNITARY = frozenset({PREPZ, MEASUREZ, RESET})
KINDS = SINGLE_QUBIT_GATES | TWO_QUBIT_GATES | NON_UNITARY

_CLIFFORD_TOL = 1e-12
_CLIFFORD_ANGLES = (0.0, math.pi / 2, -math.pi / 2, math.pi, -math.pi)


class CircuitError(ValueError):
    """Raised when an instruction would violate a circuit invariant."""


@dataclass(frozen=True)
class NoiseTag:
    """A noise location attached to an instruction.

    Attributes:
        channel: a channel spec from :mod:`qkd_nutshell.noise`.
        qubits: the qubits the channel acts on.
        before: apply before the host instruction instead of after it.
        label: free-form origin marker (``"channel"`` or ``"circuit"``).
    """

    channel: Any
    qubits: tuple[int, ...]
    before: bool = False
    label: str = "channel"


@dataclass(frozen=True)
class Instruction:
    kind: str
    targets: tuple[int, ...]
    angle: float | None = None
    result_bit: int | None = None
    noise: tuple[NoiseTag, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise CircuitError(f"unknown instruction kind {self.kind!r}")
        arity = 2 if self.kind in TWO_QUBIT_GATES else 1
        if len(self.targets) != arity:
            raise CircuitError(f"{self.kind} takes {arity} target(s), got {self.targets}")
        if arity == 2 and self.targets[0] == self.targets[1]:
            raise CircuitError(f"{self.kind} targets must be distinct")
        if any(int(t) != t or t < 0 for t in self.targets):
            raise CircuitError(f"invalid qubit index in {self.targets}")
        if self.kind == RY:
            if self.angle is None or not math.isfinite(self.angle):
                raise CircuitError("Ry needs a finite angle")
        elif self.angle is not None:
            raise CircuitError(f"{self.kind} takes no angle")
        if self.result_bit is not None and self.kind != MEASUREZ:
            raise CircuitError("only MeasureZ carries a result bit")
        if self.kind == MEASUREZ and self.result_bit is None:
            raise CircuitError("MeasureZ needs a result bit")

    @property
    def is_unitary(self) -> bool:
        return self.kind not in NON_UNITARY

    @property
    def is_clifford(self) -> bool:
        if self.kind != RY:
            return True
        return _clifford_quarter_turns(self.angle) is not None

    def inverse(self) -> Instruction:
        """Return the inverse gate (noise tags are dropped)."""
        if not self.is_unitary:
            raise CircuitError(f"{self.kind} has no inverse")
        if self.kind == S:
            return Instruction(SDG, self.targets)
        if self.kind == SDG:
            return Instruction(S, self.targets)
        if self.kind == RY:
            return Instruction(RY, self.targets, angle=-self.angle)
        return Instruction(self.kind, self.targets)

    def text(self) -> str:
        if self.kind == MEASUREZ:
            return f"MZ {self.targets[0]} -> {self.result_bit}"
        if self.kind == RY:
            return f"RY {self.targets[0]} {self.angle:.4f}"
        name = {PREPZ: "PREPZ", RESET: "RESET", SDG: "SDG"}.get(self.kind, self.kind)
        return " ".join([name, *map(str, self.targets)])


def _clifford_quarter_turns(angle: float) -> int | None:
    for k, a in zip((0, 1, -1, 2, -2), _CLIFFORD_ANGLES):
        if abs(angle - a) <= _CLIFFORD_TOL:
            return k % 4
    return None


@dataclass
class Circuit:
    """Ordered instruction list over ``n_qubits`` qubits and ``n_bits`` classical bits.

    The builder methods (``h``, ``cnot``, ``measure`` ...) append and return
    ``self`` so fragments can be chained.  Engines never mutate a circuit.
    """

    n_qubits: int
    n_bits: int = 0
    instructions: list[Instruction] = field(default_factory=list)

    def __post_init__(self):
        instructions, self.instructions = list(self.instructions), []
        self._assigned: set[int] = set()
        for ins in instructions:
            self.append(ins)

    def __len__(self):
        return len(self.instructions)

    def __iter__(self):
        return iter(self.instructions)

    def append(self, instruction: Instruction) -> Circuit:
        for q in instruction.targets:
            if q >= self.n_qubits:
                raise CircuitError(f"qubit {q} out of range for {self.n_qubits}-qubit circuit")
        for tag in instruction.noise:
            for q in tag.qubits:
                if q >= self.n_qubits:
                    raise CircuitError(f"noise tag qubit {q} out of range")
        if instruction.result_bit is not None:
            b = instruction.result_bit
            if b >= self.n_bits:
                raise CircuitError(f"classical bit {b} out of range for {self.n_bits} bits")
            if b in self._assigned:
                raise CircuitError(f"classical bit {b} assigned twice")
            self._assigned.add(b)
        self.instructions.append(instruction)
        return self

    def extend(self, instructions: Iterable[Instruction]) -> Circuit:
        for ins in instructions:
            self.append(ins)
        return self

    def copy(self) -> Circuit:
        return Circuit(self.n_qubits, self.n_bits, list(self.instructions))

    # builder shorthands
    def gate(self, kind: str, *targets: int, angle: float | None = None) -> Circuit:
        return self.append(Instruction(kind, tuple(targets), angle=angle))

    def prep(self, *qubits: int) -> Circuit:
        for q in qubits:
            self.gate(PREPZ, q)
        return self

    def reset(self, q: int) -> Circuit:
        return self.gate(RESET, q)

    def x(self, q: int) -> Circuit:
        return self.gate(X, q)

    def z(self, q: int) -> Circuit:
        return self.gate(Z, q)

    def h(self, q: int) -> Circuit:
        return self.gate(H, q)

    def s(self, q: int) -> Circuit:
        return self.gate(S, q)

    def sdg(self, q: int) -> Circuit:
        return self.gate(SDG, q)

    def ry(self, q: int, angle: float) -> Circuit:
        return self.gate(RY, q, angle=float(angle))

    def cnot(self, control: int, target: int) -> Circuit:
        return self.gate(CNOT, control, target)

    def cz(self, a: int, b: int) -> Circuit:
        return self.gate(CZ, a, b)

    def measure(self, q: int, bit: int | None = None) -> Circuit:
        if bit is None:
            bit = self.n_bits
            self.n_bits += 1
        return self.append(Instruction(MEASUREZ, (q,), result_bit=bit))

    def add_noise(self, channel: Any, qubits: Sequence[int], label: str = "channel") -> Circuit:
        """Attach a noise location right after the latest instruction touching ``qubits``.

        Noise on a set of qubits commutes with every later-or-earlier
        instruction that does not touch them, so hosting it on the most recent
        instruction acting on any of those qubits fixes its position exactly.
        """
        qubits = tuple(qubits)
        for idx in range(len(self.instructions) - 1, -1, -1):
            if set(self.instructions[idx].targets) & set(qubits):
                ins = self.instructions[idx]
                tag = NoiseTag(channel, qubits, before=False, label=label)
                self.instructions[idx] = replace(ins, noise=ins.noise + (tag,))
                return self
        raise CircuitError(f"no instruction touches {qubits}; prepare them first")

    def inverse(self) -> Circuit:
        """Unitary inverse (noise tags dropped)."""
        inv = Circuit(self.n_qubits, self.n_bits)
        for ins in reversed(self.instructions):
            inv.append(ins.inverse())
        return inv

    def compose(self, other: Circuit, qubit_map: Sequence[int] | None = None) -> Circuit:
        """Append ``other``'s instructions, relabelling its qubits through ``qubit_map``.

        Measurements in ``other`` get fresh classical bits in this circuit.
        """
        qmap = list(range(other.n_qubits)) if qubit_map is None else list(qubit_map)
        bit_map: dict[int, int] = {}
        for ins in other.instructions:
            targets = tuple(qmap[q] for q in ins.targets)
            noise = tuple(replace(t, qubits=tuple(qmap[q] for q in t.qubits)) for t in ins.noise)
            rb = None
            if ins.result_bit is not None:
                rb = bit_map.setdefault(ins.result_bit, self.n_bits)
                self.n_bits = max(self.n_bits, rb + 1)
            self.append(replace(ins, targets=targets, result_bit=rb, noise=noise))
        return self

    @property
    def measurements(self) -> list[Instruction]:
        return [ins for ins in self.instructions if ins.kind == MEASUREZ]

    @property
    def has_noise(self) -> bool:
        return any(ins.noise for ins in self.instructions)

    def without_noise(self) -> Circuit:
        return Circuit(self.n_qubits, self.n_bits,
                       [replace(ins, noise=()) for ins in self.instructions])

    def to_text(self) -> str:
        lines = []
        for ins in self.instructions:
            lines += [f"NOISE {t.channel!r} {' '.join(map(str, t.qubits))}" for t in ins.noise if t.before]
            lines.append(ins.text())
            lines += [f"NOISE {t.channel!r} {' '.join(map(str, t.qubits))}" for t in ins.noise if not t.before]
        return "\n".join(lines) + "\n"


def is_clifford(circuit: Circuit) -> bool:
    return all(ins.is_clifford for ins in circuit.instructions)


class PauliString:
    """Phase-free n-qubit Pauli operator stored as X and Z bit vectors."""

    __slots__ = ("x", "z")

    def __init__(self, x, z):
        self.x = np.asarray(x, dtype=bool).copy()
        self.z = np.asarray(z, dtype=bool).copy()
        if self.x.shape != self.z.shape or self.x.ndim != 1:
            raise ValueError("x and z must be 1-d with identical length")

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls(np.zeros(n, bool), np.zeros(n, bool))

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        """``"XIZY"`` -> X on qubit 0, Z on qubit 2, Y on qubit 3."""
        x = [c in "XY" for c in label]
        z = [c in "ZY" for c in label]
        if any(c not in "IXYZ" for c in label):
            raise ValueError(f"bad Pauli label {label!r}")
        return cls(x, z)

    @classmethod
    def from_sparse(cls, n: int, ops: dict[int, str] | str, qubits: Iterable[int] = ()) -> PauliString:
        """Build from ``{qubit: "X"}`` or from a single letter applied to ``qubits``."""
        p = cls.identity(n)
        items = ops.items() if isinstance(ops, dict) else ((q, ops) for q in qubits)
        for q, c in items:
            p.x[q] ^= c in "XY"
            p.z[q] ^= c in "ZY"
        return p

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    @property
    def support(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.x | self.z)]

    def commutes(self, other: PauliString) -> bool:
        return not (np.count_nonzero(self.x & other.z) + np.count_nonzero(self.z & other.x)) % 2

    def __mul__(self, other: PauliString) -> PauliString:
        return PauliString(self.x ^ other.x, self.z ^ other.z)

    def __eq__(self, other):
        if not isinstance(other, PauliString):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.z, other.z)

    def __hash__(self):
        return hash((self.x.tobytes(), self.z.tobytes()))

    def copy(self) -> PauliString:
        return PauliString(self.x, self.z)

    def label(self) -> str:
        return "".join("IXZY"[int(a) + 2 * int(b)] for a, b in zip(self.x, self.z))

    def __repr__(self):
        return f"PauliString({self.label()!r})"


def conjugate_pauli(instruction: Instruction, pauli: PauliString) -> PauliString:
    """Return U P U^dagger up to phase for a Clifford instruction U."""
    out = pauli.copy()
    _conjugate_inplace(instruction, out.x, out.z)
    return out


def _conjugate_inplace(ins: Instruction, x: np.ndarray, z: np.ndarray) -> None:
    """Phase-free conjugation of bit rows ``x``/``z`` (any trailing shape) in place."""
    kind = ins.kind
    if kind in NON_UNITARY:
        raise CircuitError(f"{kind} is not a unitary instruction")
    if kind in (X, Y, Z):
        return
    q = ins.targets[0]
    if kind == RY:
        turns = _clifford_quarter_turns(ins.angle)
        if turns is None:
            raise CircuitError(f"Ry({ins.angle}) is not Clifford")
        if turns % 2 == 0:
            return
        kind = H
    if kind == H:
        x[q], z[q] = z[q].copy(), x[q].copy()
    elif kind in (S, SDG):
        z[q] ^= x[q]
    elif kind == CNOT:
        c, t = ins.targets
        x[t] ^= x[c]
        z[c] ^= z[t]
    elif kind == CZ:
        a, b = ins.targets
        z[a] ^= x[b]
        z[b] ^= x[a]


def conjugate_through(circuit: Circuit, pauli: PauliString) -> PauliString:
    """Propagate a Pauli forward through every unitary instruction of ``circuit``."""
    out = pauli.copy()
    for ins in circuit.instructions:
        _conjugate_inplace(ins, out.x, out.z)
    return out
