"""BB84 and BBM92 round engines with sifting, correlation and QBER estimates.

Each round's randomness comes from ``stream(master_seed, round)``: first the
protocol choices, then the quantum outcomes.  Noise-free or purely Pauli
noisy rounds are drawn from the exact outcome distribution of the round
circuit (cached per configuration); rounds with erasure channels run
through the trajectory simulator.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from .attacks import ClonerSpec
from .circuit import Circuit
from .noise import ChannelSpec, attach_circuit_noise
from .rng import stream
from .statevector import noisy_distribution, run_shot

ABORT_QBER = 0.145
_MAX_BRANCHES = 1 << 12


class Basis(str, Enum):
    Z = "Z"
    X = "X"


@dataclass(frozen=True)
class RoundRecord:
    round: int
    x_A: int
    b_A: Basis
    b_B: Basis
    x_B: int
    x_E: int | None = None
    b_E: Basis | None = None
    herald: bool = False
    e_leak: int | None = None


@dataclass(frozen=True)
class CorrelationEstimate:
    value: float
    n_sifted: int
    std_err: float


def _basis(bit) -> Basis:
    return Basis.X if bit else Basis.Z


class _RoundSampler:
    """Outcome sampler for one circuit, exact where the noise allows it."""

    def __init__(self, circuit: Circuit):
        self.circuit = circuit
        self.table = None
        heralds = any(t.channel.n_heralds for ins in circuit for t in ins.noise)
        if not heralds:
            try:
                dist = noisy_distribution(circuit, _MAX_BRANCHES)
            except ValueError:
                dist = None
            if dist is not None:
                keys = sorted(dist)
                cdf = np.cumsum([dist[k] for k in keys])
                self.table = (keys, cdf / cdf[-1])

    def __call__(self, rng) -> tuple[list[int], bool]:
        if self.table is not None:
            keys, cdf = self.table
            key = keys[min(int(np.searchsorted(cdf, rng.random(), side="right")), len(keys) - 1)]
            return [int(ch) for ch in key], False
        rec = run_shot(self.circuit, rng)
        return [int(b) for b in rec.bits], bool(rec.heralds.any())


def _finish(c: Circuit, p_d: float | None) -> Circuit:
    return attach_circuit_noise(c, p_d) if p_d else c


def bb84_round_circuit(x_a: int, b_a: Basis, b_b: Basis, attack: ClonerSpec | None = None,
                       channel: ChannelSpec | None = None, p_d: float | None = None) -> Circuit:
    """Qubit 0 travels A to B, qubit 1 is Eve's blank; bit 0 is B's result, bit 1 Eve's."""
    n = 2 if attack else 1
    c = Circuit(n)
    c.prep(*range(n))
    if x_a:
        c.x(0)
    if b_a == Basis.X:
        c.h(0)
    if channel is not None:
        c.add_noise(channel, [0])
    if attack:
        c.compose(attack.fragment())
    if b_b == Basis.X:
        c.h(0)
    c.measure(0)
    if attack:
        if b_b == Basis.X:
            c.h(1)
        c.measure(1)
    return _finish(c, p_d)


def bbm92_round_circuit(b_a: Basis, b_b: Basis, attack: ClonerSpec | None = None,
                        channel: ChannelSpec | None = None, p_d: float | None = None) -> Circuit:
    """Qubit 0 stays with A, qubit 1 goes to B, qubit 2 is Eve's blank.

    Bits: A, B, then Eve's (only measured when the bases match).
    """
    n = 3 if attack else 2
    c = Circuit(n)
    c.prep(*range(n))
    c.h(0).cnot(0, 1)
    if channel is not None:
        c.add_noise(channel, [1])
    if attack:
        c.compose(attack.fragment(), [1, 2])
    if b_a == Basis.X:
        c.h(0)
    c.measure(0)
    if b_b == Basis.X:
        c.h(1)
    c.measure(1)
    if attack and b_a == b_b:
        if b_b == Basis.X:
            c.h(2)
        c.measure(2)
    return _finish(c, p_d)


def run_bb84(n_rounds: int, attack: ClonerSpec | None = None, channel_noise: ChannelSpec | None = None,
             p_d: float | None = None, master_seed: int = 0) -> list[RoundRecord]:
    """Simulate ``n_rounds`` BB84 rounds; Eve measures in Bob's basis."""
    if n_rounds < 1:
        raise ValueError("n_rounds must be >= 1")
    cache: dict = {}
    out = []
    for r in range(n_rounds):
        rng = stream(master_seed, r)
        x_a, a, b = (int(v) for v in rng.integers(0, 2, size=3))
        b_a, b_b = _basis(a), _basis(b)
        key = (x_a, b_a, b_b)
        if key not in cache:
            cache[key] = _RoundSampler(bb84_round_circuit(x_a, b_a, b_b, attack, channel_noise, p_d))
        bits, herald = cache[key](rng)
        out.append(RoundRecord(r, x_a, b_a, b_b, bits[0],
                               bits[1] if attack else None, b_b if attack else None, herald))
    return out


def run_bbm92(n_rounds: int, attack: ClonerSpec | None = None, channel_noise: ChannelSpec | None = None,
              p_d: float | None = None, master_seed: int = 0) -> list[RoundRecord]:
    """Simulate ``n_rounds`` entanglement-based rounds; ``x_A`` is A's measured bit."""
    if n_rounds < 1:
        raise ValueError("n_rounds must be >= 1")
    cache: dict = {}
    out = []
    for r in range(n_rounds):
        rng = stream(master_seed, r)
        a, b = (int(v) for v in rng.integers(0, 2, size=2))
        b_a, b_b = _basis(a), _basis(b)
        key = (b_a, b_b)
        if key not in cache:
            cache[key] = _RoundSampler(bbm92_round_circuit(b_a, b_b, attack, channel_noise, p_d))
        bits, herald = cache[key](rng)
        eve = attack is not None and b_a == b_b
        out.append(RoundRecord(r, bits[0], b_a, b_b, bits[1],
                               bits[2] if eve else None, b_b if eve else None, herald))
    return out


def sift(records: Iterable[RoundRecord]) -> list[RoundRecord]:
    return [rec for rec in records if rec.b_A == rec.b_B]


_PAIRS = {"AB": ("x_A", "x_B"), "AE": ("x_A", "x_E"), "BE": ("x_B", "x_E")}


def correlation(records: Sequence[RoundRecord], pair: str = "AB",
                basis_filter: Basis | str | None = None) -> CorrelationEstimate:
    """Mean of (2u - 1)(2v - 1) over the selected sifted records."""
    if pair not in _PAIRS:
        raise ValueError(f"pair must be one of {sorted(_PAIRS)}")
    u, v = _PAIRS[pair]
    sel = [rec for rec in records
           if (basis_filter is None or rec.b_B == Basis(basis_filter))
           and getattr(rec, u) is not None and getattr(rec, v) is not None]
    if not sel:
        raise ValueError("no records selected")
    prod = np.array([(2 * getattr(r, u) - 1) * (2 * getattr(r, v) - 1) for r in sel], float)
    value = float(prod.mean())
    n = len(sel)
    return CorrelationEstimate(value, n, math.sqrt(max(1 - value ** 2, 0.0) / n))


def qber_abort_check(records: Sequence[RoundRecord], threshold: float = ABORT_QBER) -> dict:
    if not records:
        raise ValueError("no records")
    qber = sum(r.x_A != r.x_B for r in records) / len(records)
    return {"qber": qber, "abort": qber > threshold}


CSV_HEADER = ("round", "x_A", "b_A", "b_B", "x_B", "b_E", "x_E", "herald")


def records_to_csv(records: Iterable[RoundRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([r.round, r.x_A, r.b_A.value, r.b_B.value, r.x_B,
                    "" if r.b_E is None else r.b_E.value, "" if r.x_E is None else r.x_E, int(r.herald)])
    return buf.getvalue()
