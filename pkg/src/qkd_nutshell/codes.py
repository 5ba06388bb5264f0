"""The [[4,2,2]] and [[7,1,3]] stabilizer codes: operators, encoders and syndrome blocks."""

from __future__ import annotations

from dataclasses import dataclass

from . import circuit as cir
from .circuit import Circuit, PauliString

# Z-syndrome (S1 S2 S3, most significant first) -> qubit that needs an X
# correction; the same table maps X-syndromes to Z corrections.
STEANE_LUT = {
    "000": None,
    "001": 3,
    "010": 0,
    "011": 6,
    "100": 1,
    "101": 5,
    "110": 2,
    "111": 4,
}

STEANE_SUPPORTS = ((1, 2, 4, 5), (0, 2, 4, 6), (3, 4, 5, 6))


@dataclass(frozen=True)
class StabilizerCode:
    name: str
    n: int
    k: int
    d: int
    stabilizers: tuple[PauliString, ...]
    logical_x: tuple[PauliString, ...]
    logical_z: tuple[PauliString, ...]

    @property
    def t(self) -> int:
        return (self.d - 1) // 2

    def syndrome(self, error: PauliString) -> tuple[int, ...]:
        """Bit ``i`` is 1 iff ``error`` anticommutes with stabilizer ``i``."""
        return tuple(int(not g.commutes(error)) for g in self.stabilizers)

    def in_stabilizer_group(self, pauli: PauliString) -> bool:
        """Phase-free membership test by Gaussian elimination over GF(2)."""
        return _in_span(pauli, self.stabilizers)

    def is_logical_identity(self, pauli: PauliString) -> bool:
        return self.in_stabilizer_group(pauli)

    def check(self) -> None:
        """Raise ``ValueError`` if the operator set violates a code invariant."""
        gens = self.stabilizers
        if len(gens) != self.n - self.k or _rank(gens) != len(gens):
            raise ValueError("stabilizers must be n-k independent operators")
        for a in gens:
            for b in gens:
                if not a.commutes(b):
                    raise ValueError("stabilizers do not commute")
        for lx, lz in zip(self.logical_x, self.logical_z):
            if lx.commutes(lz):
                raise ValueError("paired logicals must anticommute")
        for i, lx in enumerate(self.logical_x):
            for j, lz in enumerate(self.logical_z):
                if i != j and not lx.commutes(lz):
                    raise ValueError("cross logicals must commute")
        for op in self.logical_x + self.logical_z:
            if any(not op.commutes(g) for g in gens):
                raise ValueError("logicals must commute with the stabilizers")


def _rows(paulis):
    return [list(p.x.astype(int)) + list(p.z.astype(int)) for p in paulis]


def _reduce(rows):
    basis = []
    for r in rows:
        r = list(r)
        for b, piv in basis:
            if r[piv]:
                r = [u ^ v for u, v in zip(r, b)]
        if any(r):
            basis.append((r, r.index(1)))
    return basis


def _rank(paulis) -> int:
    return len(_reduce(_rows(paulis)))


def _in_span(pauli, paulis) -> bool:
    return _rank(list(paulis) + [pauli]) == _rank(paulis)


def code_422() -> StabilizerCode:
    P = PauliString.from_label
    return StabilizerCode(
        "422", 4, 2, 2,
        stabilizers=(P("XXXX"), P("ZZZZ")),
        logical_x=(P("XXII"), P("IXIX")),
        logical_z=(P("ZIZI"), P("IIZZ")),
    )


def code_steane() -> StabilizerCode:
    def on(kind, support):
        return PauliString.from_sparse(7, kind, support)

    z_gens = tuple(on("Z", s) for s in STEANE_SUPPORTS)
    x_gens = tuple(on("X", s) for s in STEANE_SUPPORTS)
    return StabilizerCode(
        "steane", 7, 1, 3,
        stabilizers=z_gens + x_gens,
        logical_x=(on("X", (0, 1, 2)),),
        logical_z=(on("Z", (0, 3, 6)),),
    )


def get_code(name: str) -> StabilizerCode:
    if name == "422":
        return code_422()
    if name == "steane":
        return code_steane()
    raise ValueError(f"unknown code {name!r}")


def encoder_circuit(code: StabilizerCode) -> Circuit:
    """Unitary encoder on qubits ``0..n-1``; inputs are qubits 0..k-1 (E4) or 0 (E7)."""
    c = Circuit(code.n)
    if code.name == "422":
        c.cnot(1, 3).cnot(0, 1).h(2).cnot(2, 0).cnot(2, 1).cnot(2, 3)
        return c
    if code.name == "steane":
        c.cnot(0, 1).cnot(0, 2)
        # one pivot per X generator, fanned out over the rest of its support
        for pivot, support in zip((5, 6, 3), STEANE_SUPPORTS):
            c.h(pivot)
            for q in support:
                if q != pivot:
                    c.cnot(pivot, q)
        return c
    raise ValueError(f"no encoder for {code.name!r}")


def stabilizer_type(stabilizer: PauliString) -> str:
    if not stabilizer.z.any() and stabilizer.x.any():
        return "X"
    if not stabilizer.x.any() and stabilizer.z.any():
        return "Z"
    raise ValueError("only pure X-type or Z-type stabilizers are supported")


def stabilizer_measurement_block(circuit: Circuit, stabilizer: PauliString, ancilla: int,
                                 bit: int | None = None) -> Circuit:
    """Append a single-ancilla measurement of ``stabilizer`` to ``circuit``.

    The ancilla is prepared in ``|+>``, controls X (CNOT) or Z (CZ) onto each
    support qubit, is rotated back and measured, then reset.  Ideal outcome on
    a code state is 0.
    """
    kind = stabilizer_type(stabilizer)
    circuit.prep(ancilla).h(ancilla)
    for q in stabilizer.support:
        if kind == "X":
            circuit.cnot(ancilla, q)
        else:
            circuit.cz(ancilla, q)
    circuit.h(ancilla).measure(ancilla, bit).reset(ancilla)
    return circuit


def lut_decode(syndrome) -> int | None:
    """Table lookup for one Steane syndrome triple; ``None`` means no correction."""
    key = "".join(str(int(b)) for b in syndrome)
    if key not in STEANE_LUT:
        raise ValueError(f"expected a 3-bit syndrome, got {syndrome!r}")
    return STEANE_LUT[key]


def steane_correction(syndrome6) -> PauliString:
    """Correction for a full (Z-triple | X-triple) syndrome."""
    bits = "".join(str(int(b)) for b in syndrome6)
    corr = PauliString.identity(7)
    qx = lut_decode(bits[:3])
    qz = lut_decode(bits[3:])
    if qx is not None:
        corr = corr * PauliString.from_sparse(7, "X", (qx,))
    if qz is not None:
        corr = corr * PauliString.from_sparse(7, "Z", (qz,))
    return corr


def syndrome_string(bits) -> str:
    return "".join(str(int(b)) for b in bits)
