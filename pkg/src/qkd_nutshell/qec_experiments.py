"""Drivers for the [[4,2,2]] post-selection and Steane syndrome-monitor experiments."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import pauliframe as pf
from .circuit import Circuit
from .codes import code_422, code_steane, encoder_circuit, stabilizer_measurement_block
from .noise import BitFlip, ChannelSpec, Depolarizing1, attach_circuit_noise


@dataclass
class RoundStats:
    m: int
    acceptance_rate: float
    flip_rate_LQ1: float
    flip_rate_LQ2: float
    shots: int
    accepted_shots: float
    stderr_acceptance: float = 0.0
    stderr_flip: float = 0.0


@dataclass
class ScalingPoint:
    lam: float
    p_L: float
    acceptance: float
    physical_ref: float
    p: float
    p_d: float


@dataclass
class SyndromeHistogram:
    """First nontrivial syndrome per discarded shot.

    ``counts`` aggregates over rounds; ``by_round`` keeps ``(syndrome,
    round)`` pairs (rounds numbered from 1).  ``trivial_per_round[r]`` is the
    number of shots still alive after round ``r + 1``.
    """

    counts: Counter
    by_round: Counter
    trivial_per_round: list[int]
    erasure: int
    accepted: int
    rounds_max: int
    shots: int

    @property
    def total(self) -> int:
        return sum(self.counts.values()) + self.erasure + self.accepted

    def top(self, k: int) -> list[str]:
        """The ``k`` most frequent syndromes (ties broken by syndrome string)."""
        ranked = sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return [s for s, _ in ranked[:k]]


@dataclass
class SteaneMonitorResult:
    histogram: SyndromeHistogram
    flip_rates: list[float] = field(default_factory=list)
    accepted_per_rounds: list[int] = field(default_factory=list)


def _binom_se(p: float, n: float) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / n) if n > 0 else float("nan")


# [[4,2,2]] ---------------------------------------------------------------


def build_422_circuit(channel: ChannelSpec | None, m: int, p_d: float | None = None) -> Circuit:
    """E4, channel on each data qubit, ``m`` alternating g_X/g_Z checks, E4 inverse.

    Classical bits ``0..m-1`` hold the ancilla results and ``m..m+3`` the data
    qubits after decoding.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    code = code_422()
    enc = encoder_circuit(code)
    c = Circuit(4 + m, m + 4)
    c.prep(0, 1, 2, 3)
    c.compose(enc)
    if channel is not None:
        for q in range(4):
            c.add_noise(channel, [q])
    g_x, g_z = code.stabilizers
    for i in range(m):
        stabilizer_measurement_block(c, g_x if i % 2 == 0 else g_z, 4 + i, bit=i)
    c.compose(enc.inverse())
    for q in range(4):
        c.measure(q, m + q)
    if p_d:
        c = attach_circuit_noise(c, p_d)
    return c


def _stats_422(m, bits, weights, shots):
    acc = ~bits[:, :m].any(axis=1) if m else np.ones(len(bits), bool)
    w_acc = weights[acc].sum()
    total = weights.sum()
    f1 = (weights[acc] * bits[acc, m]).sum() / w_acc if w_acc else float("nan")
    f2 = (weights[acc] * bits[acc, m + 1]).sum() / w_acc if w_acc else float("nan")
    a = w_acc / total
    n_acc = a * shots
    return RoundStats(m, float(a), float(f1), float(f2), shots, float(n_acc),
                      _binom_se(a, shots), _binom_se(f1, n_acc))


def run_422(channel: ChannelSpec | None, m: int, p_d: float | None = None, shots: int = 10 ** 6,
            master_seed: int = 0, workers: int = 1, exact: bool = False) -> RoundStats:
    """Acceptance and post-selected flip rates of the two logical qubits.

    With ``exact=True`` every noise branch is enumerated instead of sampled
    (only feasible for a handful of noise locations); ``shots`` then only
    sets the nominal sample size used for the reported standard errors.
    """
    c = build_422_circuit(channel, m, p_d)
    ideal = pf.precompute_ideal(c)
    if exact:
        e = pf.enumerate_outcomes(c, ideal)
        return _stats_422(m, e.bits.astype(bool), e.weights, shots)
    bits = pf.sample_packed(c, ideal, shots, master_seed, workers).unpack_bits().astype(bool)
    return _stats_422(m, bits, np.ones(shots), shots)


def analytic_422_bitflip(p: float) -> dict[str, float]:
    """Closed-form acceptance and flip rates for the bitflip channel (m >= 2)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    q = 1.0 - p
    acceptance = 1 - 4 * p * q ** 3 - 4 * p ** 3 * q
    flip_pre = 2 * p * q ** 3 + 4 * p ** 2 * q ** 2 + 2 * p ** 3 * q
    flip_post = 4 * p ** 2 * q ** 2 / acceptance if acceptance > 0 else float("nan")
    return {"acceptance": acceptance, "flip_pre": flip_pre, "flip_post": flip_post}


def physical_flip_reference(p: float, channel: str = "bitflip") -> float:
    if channel == "bitflip":
        return p * (1 - p) + p ** 2
    if channel == "depolarizing":
        a = 2 * p / 3
        return a * (1 - a) + a ** 2
    raise ValueError(f"unknown reference channel {channel!r}")


def scaling_sweep(lambdas: Sequence[float], p: float = 0.1, p_d: float = 0.01,
                  circuit_noise: bool = False, shots: int = 10 ** 6, channel: str = "bitflip",
                  master_seed: int = 0, workers: int = 1, exact: bool | None = None) -> list[ScalingPoint]:
    """Run the m = 2 [[4,2,2]] experiment with noise strengths scaled by each lambda.

    ``p_L`` is the post-selected flip rate averaged over the two logical
    qubits.  Channel-only sweeps are enumerated exactly by default.
    """
    if exact is None:
        exact = not circuit_noise
    out = []
    for lam in lambdas:
        if lam <= 0 or lam * p > 1 or lam * p_d > 1:
            raise ValueError(f"invalid scale factor {lam}")
        pp = lam * p
        spec = BitFlip(pp) if channel == "bitflip" else Depolarizing1(pp)
        st = run_422(spec, 2, lam * p_d if circuit_noise else None, shots, master_seed, workers, exact)
        out.append(ScalingPoint(lam, 0.5 * (st.flip_rate_LQ1 + st.flip_rate_LQ2), st.acceptance_rate,
                                physical_flip_reference(pp, channel), pp,
                                lam * p_d if circuit_noise else 0.0))
    return out


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Unweighted least-squares slope of log10(y) against log10(x)."""
    if len(xs) < 4:
        raise ValueError("slope fits need at least four points")
    return float(np.polyfit(np.log10(xs), np.log10(ys), 1)[0])


def bitflip_crossover(lo: float = 0.05, hi: float = 0.45, tol: float = 1e-10) -> float:
    """Bitflip strength where the post-selected logical flip rate equals the physical one."""
    def gap(p):
        return analytic_422_bitflip(p)["flip_post"] - physical_flip_reference(p)

    if gap(lo) * gap(hi) > 0:
        raise ValueError("crossover not bracketed")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gap(lo) * gap(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# Steane ------------------------------------------------------------------


def _per_qubit(channel, n):
    if channel is None:
        return [None] * n
    if isinstance(channel, (list, tuple)):
        if len(channel) != n:
            raise ValueError(f"need {n} per-qubit channels")
        return list(channel)
    return [channel] * n


def build_steane_circuit(channel, rounds: int, p_d: float | None = None,
                         z_first: bool = True) -> Circuit:
    """E7, channel on each data qubit, ``rounds`` full syndrome rounds, E7 inverse.

    Bit ``6 r + i`` is stabilizer ``i`` of round ``r`` in syndrome order
    (S1Z S2Z S3Z S1X S2X S3X); the seven data bits follow.  ``channel`` is one
    spec for all qubits or a list of seven.
    """
    code = code_steane()
    enc = encoder_circuit(code)
    c = Circuit(7 + 6 * rounds, 6 * rounds + 7)
    c.prep(*range(7))
    c.compose(enc)
    for q, ch in enumerate(_per_qubit(channel, 7)):
        if ch is not None:
            c.add_noise(ch, [q])
    order = range(6) if z_first else (3, 4, 5, 0, 1, 2)
    for r in range(rounds):
        for i in order:
            stabilizer_measurement_block(c, code.stabilizers[i], 7 + 6 * r + i, bit=6 * r + i)
    c.compose(enc.inverse())
    for q in range(7):
        c.measure(q, 6 * rounds + q)
    if p_d:
        c = attach_circuit_noise(c, p_d)
    return c


def _steane_samples(channel, rounds, p_d, shots, seed, workers):
    c = build_steane_circuit(channel, rounds, p_d)
    res = pf.sample_packed(c, pf.precompute_ideal(c), shots, seed, workers)
    return res.unpack_bits().astype(bool), res.unpack_heralds().any(axis=1)


def _histogram(bits, heralded, rounds, shots) -> SyndromeHistogram:
    counts: Counter = Counter()
    by_round: Counter = Counter()
    alive = ~heralded
    trivial = []
    for r in range(rounds):
        syn = bits[:, 6 * r:6 * r + 6]
        hit = alive & syn.any(axis=1)
        if hit.any():
            keys = np.packbits(syn[hit], axis=1, bitorder="big")[:, 0] >> 2
            for k, n in zip(*np.unique(keys, return_counts=True)):
                s = format(int(k), "06b")
                counts[s] += int(n)
                by_round[(s, r + 1)] += int(n)
        alive &= ~hit
        trivial.append(int(alive.sum()))
    return SyndromeHistogram(counts, by_round, trivial, int(heralded.sum()), int(alive.sum()),
                             rounds, shots)


def run_steane_monitor(channel, rounds_max: int, p_d: float | None = None, shots: int = 10 ** 6,
                       master_seed: int = 0, workers: int = 1,
                       flip_rates: bool = True) -> SteaneMonitorResult:
    """Syndrome histogram plus post-selected flip rate for 0..rounds_max rounds.

    Every round count uses its own circuit and the same seed, so the channel
    noise realisations are shared between them.  Heralded shots are discarded
    into the erasure bin for every round count.
    """
    if not 1 <= rounds_max <= 6:
        raise ValueError("rounds_max must be in 1..6")
    bits, heralded = _steane_samples(channel, rounds_max, p_d, shots, master_seed, workers)
    hist = _histogram(bits, heralded, rounds_max, shots)
    result = SteaneMonitorResult(hist)
    if not flip_rates:
        return result
    for r in range(rounds_max + 1):
        if r == rounds_max:
            b, h = bits, heralded
        else:
            b, h = _steane_samples(channel, r, p_d, shots, master_seed, workers)
        acc = ~h & ~b[:, :6 * r].any(axis=1)
        n = int(acc.sum())
        result.accepted_per_rounds.append(n)
        result.flip_rates.append(float(b[acc, 6 * r].mean()) if n else float("nan"))
    return result


def steane_exact_flip(channel, rounds: int = 1) -> tuple[float, float]:
    """Exact ``(acceptance, post-selected flip rate)`` for channel-only noise."""
    c = build_steane_circuit(channel, rounds)
    e = pf.enumerate_outcomes(c, pf.precompute_ideal(c))
    acc = ~e.bits[:, :6 * rounds].astype(bool).any(axis=1) & ~e.heralds.any(axis=1)
    w = e.weights
    a = w[acc].sum()
    return float(a / w.sum()), float((w[acc] * e.bits[acc, 6 * rounds]).sum() / a)


def histogram_similarity(h1: SyndromeHistogram, h2: SyndromeHistogram) -> float:
    """1 - total variation distance between the normalised syndrome distributions."""
    n1, n2 = sum(h1.counts.values()), sum(h2.counts.values())
    if n1 == 0 or n2 == 0:
        raise ValueError("empty histogram")
    keys = set(h1.counts) | set(h2.counts)
    tv = 0.5 * sum(abs(h1.counts.get(k, 0) / n1 - h2.counts.get(k, 0) / n2) for k in keys)
    return 1.0 - tv
