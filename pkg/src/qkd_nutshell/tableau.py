"""Aaronson-Gottesman stabilizer tableau with signs.

Only used to run the noiseless reference execution of a Clifford circuit and
to decide whether each measurement is deterministic.
"""

from __future__ import annotations

import numpy as np

from . import circuit as cir
from .circuit import Circuit, CircuitError


class Tableau:
    """Destabilizer rows ``0..n-1``, stabilizer rows ``n..2n-1``; starts in ``|0...0>``."""

    def __init__(self, n: int):
        self.n = n
        self.x = np.zeros((2 * n, n), dtype=bool)
        self.z = np.zeros((2 * n, n), dtype=bool)
        self.r = np.zeros(2 * n, dtype=bool)
        self.x[np.arange(n), np.arange(n)] = True
        self.z[n + np.arange(n), np.arange(n)] = True

    # gates ---------------------------------------------------------------
    def h(self, q):
        self.r ^= self.x[:, q] & self.z[:, q]
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()

    def s(self, q):
        self.r ^= self.x[:, q] & self.z[:, q]
        self.z[:, q] ^= self.x[:, q]

    def sdg(self, q):
        self.s(q)
        self.s(q)
        self.s(q)

    def x_gate(self, q):
        self.r ^= self.z[:, q]

    def z_gate(self, q):
        self.r ^= self.x[:, q]

    def y_gate(self, q):
        self.r ^= self.x[:, q] ^ self.z[:, q]

    def cnot(self, c, t):
        self.r ^= self.x[:, c] & self.z[:, t] & ~(self.x[:, t] ^ self.z[:, c])
        self.x[:, t] ^= self.x[:, c]
        self.z[:, c] ^= self.z[:, t]

    def cz(self, a, b):
        self.h(b)
        self.cnot(a, b)
        self.h(b)

    def ry_quarter(self, q, turns):
        # Ry(pi/2) = X.H up to phase; Ry(pi) = Y up to phase
        turns %= 4
        if turns == 1:
            self.h(q)
            self.x_gate(q)
        elif turns == 2:
            self.y_gate(q)
        elif turns == 3:
            self.x_gate(q)
            self.h(q)

    # measurement -----------------------------------------------------------
    def _rowsum(self, h, i):
        x1, z1, x2, z2 = self.x[i], self.z[i], self.x[h], self.z[h]
        g = np.zeros(self.n, dtype=np.int64)
        g = np.where(x1 & z1, z2.astype(int) - x2.astype(int), g)
        g = np.where(x1 & ~z1, z2.astype(int) * (2 * x2.astype(int) - 1), g)
        g = np.where(~x1 & z1, x2.astype(int) * (1 - 2 * z2.astype(int)), g)
        total = 2 * int(self.r[h]) + 2 * int(self.r[i]) + int(g.sum())
        self.r[h] = (total % 4) == 2
        self.x[h] ^= x1
        self.z[h] ^= z1

    def measure(self, q, forced: int = 0) -> tuple[int, bool]:
        """Measure Z on ``q``; returns ``(outcome, deterministic)``.

        Random outcomes collapse to ``forced``.
        """
        n = self.n
        hits = np.flatnonzero(self.x[n:, q])
        if hits.size:
            p = n + int(hits[0])
            for i in range(2 * n):
                if i != p and self.x[i, q]:
                    self._rowsum(i, p)
            self.x[p - n], self.z[p - n], self.r[p - n] = self.x[p].copy(), self.z[p].copy(), self.r[p]
            self.x[p] = False
            self.z[p] = False
            self.z[p, q] = True
            self.r[p] = bool(forced)
            return forced, False
        # deterministic: accumulate into a scratch row
        sx = np.zeros(n, bool)
        sz = np.zeros(n, bool)
        sr = False
        self.x = np.vstack([self.x, sx])
        self.z = np.vstack([self.z, sz])
        self.r = np.append(self.r, sr)
        scratch = 2 * n
        for i in np.flatnonzero(self.x[:n, q]):
            self._rowsum(scratch, int(i) + n)
        out = int(self.r[scratch])
        self.x, self.z, self.r = self.x[:-1], self.z[:-1], self.r[:-1]
        return out, True

    def reset(self, q):
        out, _ = self.measure(q)
        if out:
            self.x_gate(q)

    def apply(self, ins: cir.Instruction) -> None:
        k, t = ins.kind, ins.targets
        if k == cir.H:
            self.h(t[0])
        elif k == cir.S:
            self.s(t[0])
        elif k == cir.SDG:
            self.sdg(t[0])
        elif k == cir.X:
            self.x_gate(t[0])
        elif k == cir.Y:
            self.y_gate(t[0])
        elif k == cir.Z:
            self.z_gate(t[0])
        elif k == cir.CNOT:
            self.cnot(*t)
        elif k == cir.CZ:
            self.cz(*t)
        elif k == cir.RY:
            turns = cir._clifford_quarter_turns(ins.angle)
            if turns is None:
                raise CircuitError(f"Ry({ins.angle}) is not Clifford")
            self.ry_quarter(t[0], turns)
        elif k in (cir.PREPZ, cir.RESET):
            self.reset(t[0])
        else:
            raise CircuitError(f"tableau cannot apply {k}")


def reference_run(circuit: Circuit) -> list[tuple[int, bool]]:
    """Noiseless execution; ``(ideal bit, deterministic?)`` per MeasureZ in program order."""
    tab = Tableau(circuit.n_qubits)
    out = []
    for ins in circuit:
        if ins.kind == cir.MEASUREZ:
            out.append(tab.measure(ins.targets[0]))
        else:
            tab.apply(ins)
    return out
