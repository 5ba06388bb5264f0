"""Cloning attacks on BB84 states and the QCL attack-angle optimizer.

Both cloners are built from the two-qubit rotation

    U(a, b) = exp(-i (a X_d Y_e - b Y_d X_e) / 2)

acting on the intercepted data qubit ``d`` and Eve's blank qubit ``e``,
framed by the Clifford rotation R = H S H (maps Z to -Y, keeps X) so that
the cloner's covariant great circle is the x-z circle holding the BB84
states.  ``a = b = theta / 2`` is the phase-covariant cloner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .circuit import Circuit
from .rng import stream
from .statevector import exact_distribution


@dataclass(frozen=True)
class ClonerSpec:
    """``kind`` is ``"pccm"`` (uses ``theta``) or ``"imbalanced"`` (``psi``, ``phi``)."""

    kind: str
    theta: float = 0.0
    psi: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if self.kind == "pccm":
            if not 0.0 <= self.theta <= math.pi + 1e-12:
                raise ValueError(f"theta={self.theta} outside [0, pi]")
        elif self.kind == "imbalanced":
            if not 0.0 <= self.psi <= math.pi / 2 + 1e-12:
                raise ValueError(f"psi={self.psi} outside [0, pi/2]")
            if not math.isfinite(self.phi):
                raise ValueError("phi must be finite")
        else:
            raise ValueError(f"unknown cloner {self.kind!r}")

    def fragment(self) -> Circuit:
        if self.kind == "pccm":
            return pccm_fragment(self.theta)
        return imbalanced_fragment(self.psi, self.phi)

    @classmethod
    def from_config(cls, cfg: dict) -> ClonerSpec:
        cfg = dict(cfg)
        kind = cfg.pop("type", None)
        if kind == "pccm":
            keys = {"theta"}
        elif kind == "imbalanced":
            keys = {"psi", "phi", "p"}
        else:
            raise ValueError(f"unknown attack type {kind!r}")
        unknown = set(cfg) - keys
        if unknown:
            raise ValueError(f"unknown attack keys {sorted(unknown)}")
        if kind == "pccm":
            return cls("pccm", theta=float(cfg["theta"]))
        psi = float(cfg["psi"])
        phi = float(cfg["phi"]) if "phi" in cfg else optimal_phi(psi, float(cfg.get("p", 0.0)))
        return cls("imbalanced", psi=psi, phi=phi)

    def to_config(self) -> dict:
        if self.kind == "pccm":
            return {"type": "pccm", "theta": self.theta}
        return {"type": "imbalanced", "psi": self.psi, "phi": self.phi}


def _frame(c: Circuit, q: int, inverse: bool = False) -> None:
    c.h(q)
    c.sdg(q) if inverse else c.s(q)
    c.h(q)


def _rotation(c: Circuit, a: float, b: float) -> None:
    """Append U(a, b) on qubits 0 (data) and 1 (blank)."""
    # exp(-i a X0 Y1 / 2)
    c.h(0).cnot(0, 1).ry(1, a).cnot(0, 1).h(0)
    # exp(+i b Y0 X1 / 2)
    c.h(1).cnot(1, 0).ry(0, -b).cnot(1, 0).h(1)


def _cloner(a: float, b: float) -> Circuit:
    c = Circuit(2)
    _frame(c, 0)
    _rotation(c, a, b)
    _frame(c, 0, inverse=True)
    _frame(c, 1, inverse=True)
    return c


def pccm_fragment(theta: float) -> Circuit:
    """Phase-covariant cloner on (data = 0, blank = 1); the blank starts in |0>."""
    if not 0.0 <= theta <= math.pi + 1e-12:
        raise ValueError(f"theta={theta} outside [0, pi]")
    return _cloner(theta / 2, theta / 2)


def imbalanced_fragment(psi: float, phi: float) -> Circuit:
    """Two-angle cloner; equals ``pccm_fragment(2 psi)`` when ``phi = psi - pi/2``."""
    if not 0.0 <= psi <= math.pi / 2 + 1e-12:
        raise ValueError(f"psi={psi} outside [0, pi/2]")
    return _cloner(phi + math.pi / 2, psi)


def optimal_phi(psi: float, p: float) -> float:
    """Tuning angle -arctan((1 - 2p)^2 cot psi); the psi -> 0 limit is -pi/2."""
    if not 0.0 <= p <= 0.5:
        raise ValueError("p must lie in [0, 0.5]")
    if psi == 0.0:
        return -math.pi / 2
    if not 0.0 < psi <= math.pi / 2 + 1e-12:
        raise ValueError("psi must lie in (0, pi/2]")
    return -math.atan((1 - 2 * p) ** 2 / math.tan(psi))


def expected_pccm_correlations(theta: float) -> tuple[float, float]:
    return math.cos(theta / 2), math.sin(theta / 2)


def pccm_fidelities(theta: float) -> tuple[float, float]:
    return (1 + math.cos(theta / 2)) / 2, (1 + math.sin(theta / 2)) / 2


# exact oracle ------------------------------------------------------------


def attack_circuit(fragment: Circuit, x_a: int, basis: str, error: str | None = None) -> Circuit:
    """Prepare A's BB84 state, optionally inject a Pauli, clone, and measure B and E in ``basis``."""
    c = Circuit(2)
    c.prep(0, 1)
    if x_a:
        c.x(0)
    if basis == "X":
        c.h(0)
    if error in ("X", "Y", "Z"):
        c.gate(error, 0)
    c.compose(fragment)
    if basis == "X":
        c.h(0).h(1)
    c.measure(0).measure(1)
    return c


def oracle_correlations(fragment: Circuit, basis: str, error: str | None = None) -> tuple[float, float]:
    """Exact (C_AB, C_AE) averaged over A's two bits in ``basis``."""
    c_ab = c_ae = 0.0
    for x_a in (0, 1):
        dist = exact_distribution(attack_circuit(fragment, x_a, basis, error))
        sa = 1 - 2 * x_a
        for key, p in dist.items():
            c_ab += 0.5 * p * sa * (1 - 2 * int(key[0]))
            c_ae += 0.5 * p * sa * (1 - 2 * int(key[1]))
    return c_ab, c_ae


def oracle_fidelities(fragment: Circuit) -> tuple[float, float]:
    """Exact (F_AB, F_AE) averaged over the four BB84 inputs."""
    cz = oracle_correlations(fragment, "Z")
    cx = oracle_correlations(fragment, "X")
    return (1 + (cz[0] + cx[0]) / 2) / 2, (1 + (cz[1] + cx[1]) / 2) / 2


# QCL ---------------------------------------------------------------------


@dataclass
class QclConfig:
    alpha: float = 10.0
    f: float = 0.85
    shots_per_eval: int = 500
    max_iterations: int = 30
    theta0: float = math.pi / 2
    seed: int = 0

    def __post_init__(self):
        if not 0.5 <= self.f <= 1.0:
            raise ValueError("f must lie in [0.5, 1]")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.shots_per_eval < 1 or self.max_iterations < 1:
            raise ValueError("shots_per_eval and max_iterations must be positive")


@dataclass
class QclResult:
    theta: float
    loss: float
    trace: list = field(default_factory=list)

    def to_csv_rows(self):
        return [(i, t, l, fab, fae) for i, (t, l, fab, fae) in enumerate(self.trace)]


def qcl_loss(f_ab: float, f_ae: float, alpha: float, f: float) -> float:
    return alpha * (f_ab - f) ** 2 - f_ae


class ShotEvaluator:
    """Shot-based (F_AB, F_AE) for the PCCM at a given angle.

    Each of the four (bit, basis) configurations is sampled ``shots`` times
    from its exact outcome distribution; call ``k`` uses streams keyed on
    ``(seed, k, configuration)``.
    """

    def __init__(self, shots: int = 500, seed: int = 0):
        self.shots = shots
        self.seed = seed
        self.calls = 0

    def __call__(self, theta: float) -> tuple[float, float]:
        frag = pccm_fragment(float(np.clip(theta, 0.0, math.pi)))
        agree_b = agree_e = 0
        for cfg, (x_a, basis) in enumerate(((0, "Z"), (1, "Z"), (0, "X"), (1, "X"))):
            dist = exact_distribution(attack_circuit(frag, x_a, basis))
            keys = sorted(dist)
            probs = np.array([dist[k] for k in keys])
            counts = stream(self.seed, self.calls, cfg).multinomial(self.shots, probs / probs.sum())
            for k, n in zip(keys, counts):
                agree_b += n * (int(k[0]) == x_a)
                agree_e += n * (int(k[1]) == x_a)
        self.calls += 1
        total = 4 * self.shots
        return agree_b / total, agree_e / total


def qcl_optimize(config: QclConfig, evaluator: Callable[[float], tuple[float, float]] | None = None) -> QclResult:
    """Minimise alpha (F_AB - f)^2 - F_AE over theta in [0, pi] with COBYLA.

    Every evaluator call counts against ``max_iterations``; the returned
    angle is the optimizer's final iterate.
    """
    if evaluator is None:
        evaluator = ShotEvaluator(config.shots_per_eval, config.seed)
    trace = []

    def objective(v):
        theta = float(np.clip(v[0], 0.0, math.pi))
        f_ab, f_ae = evaluator(theta)
        loss = qcl_loss(f_ab, f_ae, config.alpha, config.f)
        trace.append((theta, loss, f_ab, f_ae))
        return loss

    res = minimize(objective, [config.theta0], method="COBYLA", bounds=[(0.0, math.pi)],
                   options={"maxiter": config.max_iterations, "rhobeg": 0.5, "tol": 1e-3})
    theta = float(np.clip(res.x[0], 0.0, math.pi))
    return QclResult(theta, float(res.fun), trace)


def exact_loss_minimizer(alpha: float, f: float, grid: int = 200001) -> float:
    """Dense-grid minimiser of the closed-form loss, used as a reference."""
    th = np.linspace(0.0, math.pi, grid)
    loss = alpha * ((1 + np.cos(th / 2)) / 2 - f) ** 2 - (1 + np.sin(th / 2)) / 2
    return float(th[np.argmin(loss)])
