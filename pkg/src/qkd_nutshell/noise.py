"""Noise channels, their samplers and circuit-level noise attachment.

Every channel here is (or twirls into) a stochastic Pauli channel, so one
sampler serves both engines: :func:`sample_errors` draws a batch of Pauli
errors as X/Z bit rows, and :func:`sample_error` is the one-shot view used by
the state-vector engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any, Mapping, Sequence

import numpy as np

from . import circuit as cir
from .circuit import Circuit, CircuitError, NoiseTag, PauliString

_PROB_TOL = 1e-12


def _check_prob(name: str, p: float) -> None:
    if not (-_PROB_TOL <= p <= 1 + _PROB_TOL) or math.isnan(p):
        raise ValueError(f"{name}={p} is not a probability")


class ChannelSpec:
    """Base class of the channel tagged union."""

    arity = 1

    @property
    def n_heralds(self) -> int:
        return 0


@dataclass(frozen=True)
class PauliChannel(ChannelSpec):
    p_x: float
    p_y: float
    p_z: float

    def __post_init__(self):
        for name in ("p_x", "p_y", "p_z"):
            _check_prob(name, getattr(self, name))
        if self.p_x + self.p_y + self.p_z > 1 + _PROB_TOL:
            raise ValueError("p_x + p_y + p_z exceeds 1")

    @property
    def p_identity(self) -> float:
        return 1.0 - self.p_x - self.p_y - self.p_z

    def pauli_channel(self) -> PauliChannel:
        return self


@dataclass(frozen=True)
class BitFlip(ChannelSpec):
    p: float

    def __post_init__(self):
        _check_prob("p", self.p)

    def pauli_channel(self) -> PauliChannel:
        return PauliChannel(self.p, 0.0, 0.0)


@dataclass(frozen=True)
class Depolarizing1(ChannelSpec):
    p: float

    def __post_init__(self):
        _check_prob("p", self.p)

    def pauli_channel(self) -> PauliChannel:
        return PauliChannel(self.p / 3, self.p / 3, self.p / 3)


@dataclass(frozen=True)
class Depolarizing2(ChannelSpec):
    """Each of the 15 non-identity two-qubit Paulis with probability p/15."""

    p: float
    arity = 2

    def __post_init__(self):
        _check_prob("p", self.p)


@dataclass(frozen=True)
class TwirledAmplitudeDamping(ChannelSpec):
    gamma: float

    def __post_init__(self):
        _check_prob("gamma", self.gamma)

    def pauli_channel(self) -> PauliChannel:
        return twirl_amplitude_damping(self.gamma)


@dataclass(frozen=True)
class Dephasing(ChannelSpec):
    p: float

    def __post_init__(self):
        _check_prob("p", self.p)

    def pauli_channel(self) -> PauliChannel:
        return PauliChannel(0.0, 0.0, self.p)


@dataclass(frozen=True)
class HeraldedErase(ChannelSpec):
    """With probability p: raise a herald and apply a uniform draw from {I, X, Y, Z}."""

    p: float

    def __post_init__(self):
        _check_prob("p", self.p)

    @property
    def n_heralds(self) -> int:
        return 1


@dataclass(frozen=True)
class DeterministicPauli(ChannelSpec):
    """Always applies ``pauli`` (a label such as ``"X"`` or ``"XZ"`` over the support)."""

    pauli: str

    def __post_init__(self):
        if not self.pauli or any(c not in "IXYZ" for c in self.pauli):
            raise ValueError(f"bad Pauli label {self.pauli!r}")

    @property
    def arity(self) -> int:
        return len(self.pauli)


@dataclass(frozen=True)
class PerQubit(ChannelSpec):
    """Independent single-qubit channels, one per support qubit."""

    channels: tuple[ChannelSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        if any(c.arity != 1 for c in self.channels):
            raise ValueError("PerQubit takes single-qubit channels only")

    @property
    def arity(self) -> int:
        return len(self.channels)

    @property
    def n_heralds(self) -> int:
        return sum(c.n_heralds for c in self.channels)


@dataclass(frozen=True)
class Sequential(ChannelSpec):
    """Channels applied one after another on the same support."""

    channels: tuple[ChannelSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        if len({c.arity for c in self.channels}) != 1:
            raise ValueError("sequential channels must share their arity")

    @property
    def arity(self) -> int:
        return self.channels[0].arity

    @property
    def n_heralds(self) -> int:
        return sum(c.n_heralds for c in self.channels)


def twirl_amplitude_damping(gamma: float) -> PauliChannel:
    """Pauli twirl of the amplitude-damping channel with decay probability ``gamma``."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma={gamma} outside [0, 1]")
    root = math.sqrt(1.0 - gamma)
    p_z = max(0.0, (2.0 - 2.0 * root - gamma) / 4.0)
    return PauliChannel(gamma / 4.0, gamma / 4.0, p_z)


def compose_channel(*specs: ChannelSpec) -> ChannelSpec:
    """Sequential composition; a single spec is returned unchanged."""
    if not specs:
        raise ValueError("nothing to compose")
    if any(s.arity != 1 for s in specs):
        raise ValueError("compose_channel takes single-qubit channels")
    if len(specs) == 1:
        return specs[0]
    return Sequential(tuple(specs))


def sample_errors(spec: ChannelSpec, rng: np.random.Generator, size: int):
    """Draw ``size`` independent errors from ``spec``.

    Returns:
        ``(x, z, heralds)`` boolean arrays of shapes ``(arity, size)``,
        ``(arity, size)`` and ``(n_heralds, size)``.
    """
    k = spec.arity
    if isinstance(spec, DeterministicPauli):
        p = PauliString.from_label(spec.pauli)
        x = np.repeat(p.x[:, None], size, axis=1)
        z = np.repeat(p.z[:, None], size, axis=1)
        return x, z, np.zeros((0, size), bool)
    if isinstance(spec, Depolarizing2):
        u = rng.random(size)
        which = rng.integers(1, 16, size=size)
        which = np.where(u < spec.p, which, 0)
        x = np.stack([(which & 1) > 0, (which & 4) > 0])
        z = np.stack([(which & 2) > 0, (which & 8) > 0])
        return x, z, np.zeros((0, size), bool)
    if isinstance(spec, HeraldedErase):
        herald = rng.random(size) < spec.p
        which = rng.integers(0, 4, size=size)
        x = (herald & ((which & 1) > 0))[None, :]
        z = (herald & ((which & 2) > 0))[None, :]
        return x, z, herald[None, :]
    if isinstance(spec, PerQubit):
        parts = [sample_errors(c, rng, size) for c in spec.channels]
        return (np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]),
                np.concatenate([p[2] for p in parts]))
    if isinstance(spec, Sequential):
        x = np.zeros((k, size), bool)
        z = np.zeros((k, size), bool)
        heralds = []
        for c in spec.channels:
            cx, cz, ch = sample_errors(c, rng, size)
            x ^= cx
            z ^= cz
            heralds.append(ch)
        return x, z, np.concatenate(heralds)
    if hasattr(spec, "pauli_channel"):
        pc = spec.pauli_channel()
        u = rng.random(size)
        x = u < pc.p_x + pc.p_y
        z = (u >= pc.p_x) & (u < pc.p_x + pc.p_y + pc.p_z)
        return x[None, :], z[None, :], np.zeros((0, size), bool)
    raise TypeError(f"cannot sample {spec!r}")


def sample_error(spec: ChannelSpec, support_qubits: Sequence[int], rng: np.random.Generator):
    """One draw of ``spec`` on ``support_qubits``: ``(PauliString over the support, heralds)``."""
    if len(support_qubits) != spec.arity:
        raise ValueError(f"{type(spec).__name__} acts on {spec.arity} qubit(s), "
                         f"got support {tuple(support_qubits)}")
    x, z, h = sample_errors(spec, rng, 1)
    return PauliString(x[:, 0], z[:, 0]), tuple(bool(v) for v in h[:, 0])


def pauli_branches(spec: ChannelSpec) -> list[tuple[float, str, tuple[bool, ...]]]:
    """Exhaustive ``(probability, pauli label, heralds)`` list for ``spec``.

    Used by exact oracles that sum over noise realisations.
    """
    if isinstance(spec, DeterministicPauli):
        return [(1.0, spec.pauli, ())]
    if isinstance(spec, Depolarizing2):
        out = [(1.0 - spec.p, "II", ())]
        for k in range(1, 16):
            a = "IXZY"[(k & 1) + ((k >> 1) & 1) * 2]
            b = "IXZY"[((k >> 2) & 1) + ((k >> 3) & 1) * 2]
            out.append((spec.p / 15, a + b, ()))
        return out
    if isinstance(spec, HeraldedErase):
        return [(1.0 - spec.p, "I", (False,))] + [(spec.p / 4, c, (True,)) for c in "IXYZ"]
    if isinstance(spec, (PerQubit, Sequential)):
        combos = [(1.0, "" if isinstance(spec, PerQubit) else "I" * spec.arity, ())]
        for c in spec.channels:
            nxt = []
            for p0, l0, h0 in combos:
                for p1, l1, h1 in pauli_branches(c):
                    if isinstance(spec, PerQubit):
                        label = l0 + l1
                    else:
                        prod = PauliString.from_label(l0) * PauliString.from_label(l1)
                        label = prod.label()
                    nxt.append((p0 * p1, label, h0 + h1))
            combos = nxt
        return combos
    pc = spec.pauli_channel()
    return [(pc.p_identity, "I", ()), (pc.p_x, "X", ()), (pc.p_y, "Y", ()), (pc.p_z, "Z", ())]


def attach_circuit_noise(circuit: Circuit, p_d: float, *, prep: bool = True,
                         measure: bool = True) -> Circuit:
    """Return a copy of ``circuit`` with depolarizing noise on its operations.

    Single-qubit gates (and preparations when ``prep``) are followed by
    ``Depolarizing1(p_d)``; two-qubit gates by ``Depolarizing2(p_d)``;
    measurements are preceded by ``Depolarizing1(p_d)`` when ``measure``.
    Resets and idle qubits stay noiseless.
    """
    _check_prob("p_d", p_d)
    if any(t.label == "circuit" for ins in circuit for t in ins.noise):
        raise CircuitError("circuit-level noise is already attached")
    out = Circuit(circuit.n_qubits, circuit.n_bits)
    for ins in circuit:
        tags = list(ins.noise)
        if ins.kind in cir.TWO_QUBIT_GATES:
            tags.append(NoiseTag(Depolarizing2(p_d), ins.targets, label="circuit"))
        elif ins.kind in cir.SINGLE_QUBIT_GATES or (prep and ins.kind == cir.PREPZ):
            tags.append(NoiseTag(Depolarizing1(p_d), ins.targets, label="circuit"))
        elif measure and ins.kind == cir.MEASUREZ:
            tags.insert(0, NoiseTag(Depolarizing1(p_d), ins.targets, before=True, label="circuit"))
        out.append(replace(ins, noise=tuple(tags)))
    return out


def is_deterministic(spec: ChannelSpec) -> bool:
    if isinstance(spec, DeterministicPauli):
        return True
    if isinstance(spec, (PerQubit, Sequential)):
        return all(is_deterministic(c) for c in spec.channels)
    return False


_CONFIG_TYPES = {
    "bitflip": (BitFlip, ("p",)),
    "depolarizing": (Depolarizing1, ("p",)),
    "depolarizing2": (Depolarizing2, ("p",)),
    "pauli": (PauliChannel, ("p_x", "p_y", "p_z")),
    "twirled_ad": (TwirledAmplitudeDamping, ("gamma",)),
    "dephasing": (Dephasing, ("p",)),
    "erase": (HeraldedErase, ("p",)),
    "deterministic": (DeterministicPauli, ("pauli",)),
}


def channel_from_config(cfg: Mapping[str, Any]) -> ChannelSpec:
    """Parse ``{"type": "bitflip", "p": 0.1}``-style channel descriptions."""
    cfg = dict(cfg)
    kind = cfg.pop("type", None)
    if kind in ("per_qubit", "sequence"):
        subs = cfg.pop("channels", None)
        if not isinstance(subs, list) or not subs:
            raise ValueError(f"channel type {kind!r} needs a non-empty 'channels' list")
        if cfg:
            raise ValueError(f"unknown channel keys {sorted(cfg)}")
        parsed = tuple(channel_from_config(c) for c in subs)
        return PerQubit(parsed) if kind == "per_qubit" else compose_channel(*parsed)
    if kind not in _CONFIG_TYPES:
        raise ValueError(f"unknown channel type {kind!r}")
    cls, keys = _CONFIG_TYPES[kind]
    unknown = set(cfg) - set(keys)
    missing = set(keys) - set(cfg)
    if unknown:
        raise ValueError(f"unknown channel keys {sorted(unknown)}")
    if missing:
        raise ValueError(f"channel {kind!r} missing {sorted(missing)}")
    return cls(**{k: cfg[k] for k in keys})


def channel_to_config(spec: ChannelSpec) -> dict[str, Any]:
    if isinstance(spec, PerQubit):
        return {"type": "per_qubit", "channels": [channel_to_config(c) for c in spec.channels]}
    if isinstance(spec, Sequential):
        return {"type": "sequence", "channels": [channel_to_config(c) for c in spec.channels]}
    for name, (cls, keys) in _CONFIG_TYPES.items():
        if type(spec) is cls:
            return {"type": name, **{k: getattr(spec, k) for k in keys}}
    raise TypeError(f"no config form for {spec!r}")


def scale_channel(spec: ChannelSpec, factor: float) -> ChannelSpec:
    """Multiply every error probability of ``spec`` by ``factor``."""
    if isinstance(spec, PauliChannel):
        return PauliChannel(spec.p_x * factor, spec.p_y * factor, spec.p_z * factor)
    if isinstance(spec, TwirledAmplitudeDamping):
        return TwirledAmplitudeDamping(spec.gamma * factor)
    if isinstance(spec, (BitFlip, Depolarizing1, Depolarizing2, Dephasing, HeraldedErase)):
        return type(spec)(spec.p * factor)
    if isinstance(spec, (PerQubit, Sequential)):
        return type(spec)(tuple(scale_channel(c, factor) for c in spec.channels))
    raise TypeError(f"cannot scale {spec!r}")
