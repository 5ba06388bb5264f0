"""Desk-scale simulation of BB84/BBM92 cloning attacks, detection side channels,
and post-selected error detection with the [[4,2,2]] and Steane codes.

Modules:
    circuit: shared circuit IR, Clifford classification, Pauli conjugation.
    statevector: dense simulator for small circuits, exact outcome distributions.
    pauliframe: bit-packed Pauli-frame sampler for Clifford circuits.
    noise: channel specs, samplers and circuit-level noise attachment.
    protocols: BB84/BBM92 rounds, sifting, correlations, QBER abort.
    attacks: cloner circuits, closed-form oracles, QCL optimizer.
    codes: stabilizer codes, encoders, syndrome blocks, Steane lookup table.
    qec_experiments: [[4,2,2]] and Steane experiment drivers.
    sidechannel: detector and bias models applied to round records.
"""

__version__ = "0.1.0"

from .circuit import Circuit, CircuitError, Instruction, NoiseTag, PauliString, conjugate_pauli, is_clifford

__all__ = [
    "Circuit",
    "CircuitError",
    "Instruction",
    "NoiseTag",
    "PauliString",
    "conjugate_pauli",
    "is_clifford",
    "__version__",
]
