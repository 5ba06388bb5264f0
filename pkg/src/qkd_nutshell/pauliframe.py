"""Pauli-frame sampler for Clifford circuits with Pauli and erasure noise.

The noiseless circuit is executed once on a stabilizer tableau to obtain the
ideal outcome of every measurement.  Each shot then only tracks the Pauli
error frame: noise locations XOR sampled Paulis into it, gates conjugate it,
and a Z measurement reports ``ideal bit XOR (frame has X or Y on the qubit)``.

Frames are bit-packed, 64 shots per ``uint64`` word, and shots are processed
in fixed blocks of ``BLOCK`` shots.  Block ``b``'s noise location ``j`` draws
from ``stream(master_seed, b, j)``, so output does not depend on how blocks
are spread over workers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from . import circuit as cir
from .circuit import Circuit, CircuitError
from .noise import sample_errors
from .rng import stream
from .statevector import ShotRecord
from .tableau import reference_run

BLOCK = 1 << 16


class NondeterministicMeasurementError(CircuitError):
    """A measurement of the noiseless circuit has a random outcome."""


@dataclass(frozen=True)
class IdealTrace:
    """Ideal outcome of each measurement, in program order."""

    bits: tuple[int, ...]
    result_bits: tuple[int, ...]


def precompute_ideal(circuit: Circuit) -> IdealTrace:
    if not cir.is_clifford(circuit):
        raise CircuitError("Pauli-frame sampling needs a Clifford circuit")
    ref = reference_run(circuit.without_noise())
    for k, (_, det) in enumerate(ref):
        if not det:
            raise NondeterministicMeasurementError(
                f"measurement #{k} is random in the noiseless circuit")
    return IdealTrace(tuple(b for b, _ in ref), tuple(m.result_bit for m in circuit.measurements))


@dataclass
class FrameSamples:
    """Packed sampler output.

    ``bits`` has one row per classical bit and ``heralds`` one row per
    erasure location; bit ``s % 64`` of word ``s // 64`` belongs to shot ``s``.
    """

    bits: np.ndarray
    heralds: np.ndarray
    shots: int

    def unpack_bits(self) -> np.ndarray:
        """``(shots, n_bits)`` uint8 array."""
        return _unpack(self.bits, self.shots).T.astype(np.uint8)

    def unpack_heralds(self) -> np.ndarray:
        return _unpack(self.heralds, self.shots).T

    def records(self) -> Iterator[ShotRecord]:
        bits = self.unpack_bits()
        heralds = self.unpack_heralds()
        for s in range(self.shots):
            yield ShotRecord(bits[s], heralds[s])


def _pack(rows: np.ndarray) -> np.ndarray:
    """bool ``(k, n)`` with ``n % 64 == 0`` -> uint64 ``(k, n // 64)``."""
    return np.ascontiguousarray(np.packbits(rows, axis=-1, bitorder="little")).view(np.uint64)


def _unpack(words: np.ndarray, shots: int) -> np.ndarray:
    if words.shape[0] == 0:
        return np.zeros((0, shots), bool)
    raw = np.ascontiguousarray(words).view(np.uint8)
    return np.unpackbits(raw, axis=-1, bitorder="little")[:, :shots].astype(bool)


def _program(circuit: Circuit):
    """Flatten into ('noise', loc, tag) / ('ins', ins) steps; count heralds."""
    steps = []
    loc = 0
    n_heralds = 0
    for ins in circuit.instructions:
        for tag in ins.noise:
            if tag.before:
                steps.append(("noise", loc, tag, n_heralds))
                loc += 1
                n_heralds += tag.channel.n_heralds
        steps.append(("ins", ins))
        for tag in ins.noise:
            if not tag.before:
                steps.append(("noise", loc, tag, n_heralds))
                loc += 1
                n_heralds += tag.channel.n_heralds
    return steps, loc, n_heralds


NoiseProvider = Callable[[int, object, int], tuple]


def _propagate(circuit: Circuit, ideal: IdealTrace, width: int, provider: NoiseProvider):
    """Run ``width`` (multiple of 64) frames; returns packed (bits, heralds)."""
    steps, _, n_heralds = _program(circuit)
    words = width // 64
    fx = np.zeros((circuit.n_qubits, words), np.uint64)
    fz = np.zeros((circuit.n_qubits, words), np.uint64)
    bits = np.zeros((circuit.n_bits, words), np.uint64)
    heralds = np.zeros((n_heralds, words), np.uint64)
    ones = np.full(words, np.iinfo(np.uint64).max, np.uint64)
    meas = 0
    for step in steps:
        if step[0] == "noise":
            _, loc, tag, h0 = step
            ex, ez, eh = provider(loc, tag.channel, width)
            q = list(tag.qubits)
            fx[q] ^= _pack(ex)
            fz[q] ^= _pack(ez)
            if eh.shape[0]:
                heralds[h0:h0 + eh.shape[0]] |= _pack(eh)
            continue
        ins = step[1]
        k = ins.kind
        if k == cir.MEASUREZ:
            q = ins.targets[0]
            out = fx[q].copy()
            if ideal.bits[meas]:
                out ^= ones
            bits[ins.result_bit] = out
            meas += 1
        elif k in (cir.PREPZ, cir.RESET):
            q = ins.targets[0]
            fx[q] = 0
            fz[q] = 0
        else:
            cir._conjugate_inplace(ins, fx, fz)
    return bits, heralds


def _sample_block(args):
    circuit, ideal, master_seed, block, width = args

    def provider(loc, spec, size):
        return sample_errors(spec, stream(master_seed, block, loc), size)

    return _propagate(circuit, ideal, width, provider)


def _block_widths(shots: int):
    out = []
    start = 0
    while start < shots:
        n = min(BLOCK, shots - start)
        out.append(((n + 63) // 64) * 64)
        start += n
    return out


def sample_packed(circuit: Circuit, ideal: IdealTrace, shots: int, master_seed: int,
                  workers: int = 1) -> FrameSamples:
    """Sample ``shots`` noisy executions; result is independent of ``workers``."""
    if shots < 1:
        raise ValueError("shots must be positive")
    jobs = [(circuit, ideal, master_seed, b, w) for b, w in enumerate(_block_widths(shots))]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_sample_block, jobs))
    else:
        parts = [_sample_block(j) for j in jobs]
    bits = np.concatenate([p[0] for p in parts], axis=1)
    heralds = np.concatenate([p[1] for p in parts], axis=1)
    return FrameSamples(bits, heralds, shots)


def sample_batch(circuit: Circuit, ideal: IdealTrace, shots: int, master_seed: int,
                 workers: int = 1) -> Iterator[ShotRecord]:
    """Per-shot view of :func:`sample_packed`."""
    return sample_packed(circuit, ideal, shots, master_seed, workers).records()


def noise_locations(circuit: Circuit) -> list:
    """``(location index, NoiseTag)`` in the order the sampler visits them."""
    steps, _, _ = _program(circuit)
    return [(s[1], s[2]) for s in steps if s[0] == "noise"]


def propagate_errors(circuit: Circuit, ideal: IdealTrace, errors: dict[int, tuple]) -> FrameSamples:
    """Deterministic frame propagation with explicitly given errors.

    Args:
        errors: ``{location: (x, z)}`` with bool arrays of shape
            ``(arity, n)``; all entries share the same ``n``.  Locations not
            listed stay error-free.  Heralds are not produced.
    """
    n = next(iter(errors.values()))[0].shape[1] if errors else 1
    width = ((n + 63) // 64) * 64

    def provider(loc, spec, size):
        k = spec.arity
        if loc not in errors:
            return np.zeros((k, size), bool), np.zeros((k, size), bool), np.zeros((0, size), bool)
        ex, ez = errors[loc]
        pad = size - ex.shape[1]
        ex = np.pad(np.asarray(ex, bool), ((0, 0), (0, pad)))
        ez = np.pad(np.asarray(ez, bool), ((0, 0), (0, pad)))
        return ex, ez, np.zeros((0, size), bool)

    bits, heralds = _propagate(circuit, ideal, width, provider)
    return FrameSamples(bits, heralds[:0], n)


@dataclass
class EnumeratedOutcomes:
    """Every noise realisation of a circuit with its probability.

    Row ``i`` of ``bits``/``heralds`` is the outcome of realisation ``i``,
    which occurs with probability ``weights[i]``.
    """

    bits: np.ndarray
    heralds: np.ndarray
    weights: np.ndarray


def enumerate_outcomes(circuit: Circuit, ideal: IdealTrace,
                       max_branches: int = 1 << 18) -> EnumeratedOutcomes:
    """Exact outcome enumeration over all nonzero Pauli branches of every noise location."""
    from itertools import product

    from .noise import pauli_branches

    locs = noise_locations(circuit)
    options = [[b for b in pauli_branches(tag.channel) if b[0] > 0] for _, tag in locs]
    total = int(np.prod([len(o) for o in options])) if options else 1
    if total > max_branches:
        raise ValueError(f"{total} noise branches exceed max_branches={max_branches}")
    combos = list(product(*[range(len(o)) for o in options]))
    weights = np.ones(len(combos))
    errors = {}
    herald_rows = []
    for j, ((loc, tag), opts) in enumerate(zip(locs, options)):
        idx = np.array([c[j] for c in combos], dtype=int)
        labels = [opts[i][1] for i in range(len(opts))]
        px = np.array([[ch in "XY" for ch in lab] for lab in labels], bool)
        pz = np.array([[ch in "ZY" for ch in lab] for lab in labels], bool)
        errors[loc] = (px[idx].T, pz[idx].T)
        probs = np.array([o[0] for o in opts])
        weights *= probs[idx]
        if tag.channel.n_heralds:
            h = np.array([opts[i][2] for i in range(len(opts))], bool)
            herald_rows.append(h[idx].T)
    n = len(combos)
    if not errors:
        errors = {-1: (np.zeros((1, n), bool), np.zeros((1, n), bool))}
    res = propagate_errors(circuit, ideal, errors)
    heralds = np.concatenate(herald_rows).T if herald_rows else np.zeros((n, 0), bool)
    return EnumeratedOutcomes(res.unpack_bits(), heralds, weights)
