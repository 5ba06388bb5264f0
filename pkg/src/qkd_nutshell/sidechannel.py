"""Record-level stochastic models of detection side channels.

A "dark" readout is bit 0 and a "bright" readout is bit 1.  Photon counts
are Poisson; a readout is dark when fewer than ``threshold`` photons arrive
and is then flipped with probability ``spam_floor``.  A zero-length
exposure collects no photons and always reads dark.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.stats import poisson

from .protocols import RoundRecord
from .rng import stream


@dataclass(frozen=True)
class DetectorModel:
    bright_rate: float = 0.05   # photons per microsecond
    dark_rate: float = 0.0
    threshold: int = 2
    spam_floor: float = 0.001

    def __post_init__(self):
        if self.bright_rate < 0 or self.dark_rate < 0:
            raise ValueError("rates must be non-negative")
        if self.threshold < 1:
            raise ValueError("threshold must be >= 1")
        if not 0 <= self.spam_floor <= 1:
            raise ValueError("spam_floor must lie in [0, 1]")

    def p_dark(self, state: int, exposure_us: float) -> float:
        """Probability that an ion in ``state`` (0 dark, 1 bright) reads dark."""
        if exposure_us < 0:
            raise ValueError("exposure must be non-negative")
        if exposure_us == 0:
            return 1.0
        rate = self.bright_rate if state else self.dark_rate
        below = float(poisson.cdf(self.threshold - 1, rate * exposure_us))
        return below * (1 - self.spam_floor) + (1 - below) * self.spam_floor


@dataclass(frozen=True)
class BiasModel:
    """``kind`` is ``"quench"`` or ``"pump"`` with time constant ``tau`` in microseconds."""

    kind: str
    tau: float
    p_dark0: tuple[float, float] = (0.999, 0.001)

    def __post_init__(self):
        if self.kind not in ("quench", "pump"):
            raise ValueError(f"unknown bias model {self.kind!r}")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if any(not 0 <= p <= 1 for p in self.p_dark0):
            raise ValueError("baseline probabilities must lie in [0, 1]")


def quench(tau: float = 0.6, **kw) -> BiasModel:
    return BiasModel("quench", tau, **kw)


def pump(tau: float = 2.0, **kw) -> BiasModel:
    return BiasModel("pump", tau, **kw)


def apply_bias(model: BiasModel, input_state: int, duration_us: float) -> float:
    """Dark probability after a biasing pulse of ``duration_us``."""
    if duration_us < 0:
        raise ValueError("duration must be non-negative")
    p0 = model.p_dark0[int(input_state)]
    decay = math.exp(-duration_us / model.tau)
    if model.kind == "quench":
        return p0 * decay
    return 1 - (1 - p0) * decay


def double_detection(detector: DetectorModel, true_state: int, b_exposure_us: float = 1100.0,
                     e_exposure_us: float = 0.0, rng: np.random.Generator | None = None) -> tuple[int, int]:
    """Bob's and Eve's dark flags from two readouts of the same projected ion."""
    if rng is None:
        rng = np.random.default_rng()
    out = []
    for t in (b_exposure_us, e_exposure_us):
        if t < 0:
            raise ValueError("exposure must be non-negative")
        if t == 0:
            out.append(1)
            continue
        rate = detector.bright_rate if true_state else detector.dark_rate
        dark = rng.poisson(rate * t) < detector.threshold
        if rng.random() < detector.spam_floor:
            dark = not dark
        out.append(int(dark))
    return out[0], out[1]


def agreement_probability(detector: DetectorModel, b_exposure_us: float, e_exposure_us: float) -> float:
    """P(Eve's dark flag equals Bob's), averaged over the two ion states."""
    total = 0.0
    for state in (0, 1):
        pb = detector.p_dark(state, b_exposure_us)
        pe = detector.p_dark(state, e_exposure_us)
        total += 0.5 * (pb * pe + (1 - pb) * (1 - pe))
    return total


def inject_sidechannel(records: Sequence[RoundRecord], model, params: dict,
                       master_seed: int = 0) -> list[RoundRecord]:
    """Apply a detection model to Bob's readout of each round.

    For a :class:`DetectorModel` Bob's bit becomes his detector readout and
    ``e_leak`` holds Eve's second readout (``params``: ``e_exposure_us``,
    optional ``b_exposure_us``).  For a :class:`BiasModel` Bob's bit is
    redrawn from the biased dark probability (``params``: ``duration_us``).
    """
    out = []
    for rec in records:
        if not isinstance(rec, RoundRecord):
            raise TypeError("records must come from run_bb84 or run_bbm92")
        rng = stream(master_seed, rec.round)
        if isinstance(model, DetectorModel):
            unknown = set(params) - {"e_exposure_us", "b_exposure_us"}
            if unknown or "e_exposure_us" not in params:
                raise ValueError("detector model needs e_exposure_us (and optionally b_exposure_us)")
            b_dark, e_dark = double_detection(model, rec.x_B, params.get("b_exposure_us", 1100.0),
                                              params["e_exposure_us"], rng)
            out.append(replace(rec, x_B=1 - b_dark, e_leak=1 - e_dark))
        elif isinstance(model, BiasModel):
            if set(params) != {"duration_us"}:
                raise ValueError("bias model needs exactly duration_us")
            p_dark = apply_bias(model, rec.x_B, params["duration_us"])
            out.append(replace(rec, x_B=int(rng.random() >= p_dark)))
        else:
            raise TypeError(f"unsupported side-channel model {model!r}")
    return out


def mutual_information(a: Sequence[int], b: Sequence[int]) -> float:
    """Plug-in estimate of I(a; b) in bits for two binary sequences."""
    a = np.asarray(a, int)
    b = np.asarray(b, int)
    if a.shape != b.shape or a.size == 0:
        raise ValueError("need two non-empty sequences of equal length")
    joint = np.zeros((2, 2))
    np.add.at(joint, (a, b), 1)
    joint /= joint.sum()
    pa = joint.sum(axis=1, keepdims=True)
    pb = joint.sum(axis=0, keepdims=True)
    mask = joint > 0
    return float((joint[mask] * np.log2(joint[mask] / (pa @ pb)[mask])).sum())


def bias_curve(model: BiasModel, durations_us: Sequence[float]) -> list[tuple[float, float, float]]:
    """Rows ``(duration_us, p_dark_input0, p_dark_input1)``."""
    return [(float(t), apply_bias(model, 0, t), apply_bias(model, 1, t)) for t in durations_us]
