"""Photon-pair emission streams.

An atomic-cascade source emits pairs at random times. Each pair carries a
hidden polarization angle lambda shared by both signals, and the second
cascade photon (side B) leaves after an exponentially distributed lifetime
delay. Two arrival processes are supported: a plain Poisson process and a
renewal process with a hard minimum separation between emissions, which
mimics sources whose emissions cannot overlap.

All times are in nanoseconds unless a field says otherwise.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

NS_PER_SECOND = 1.0e9

PROCESSES = ("poisson", "min_separation")
HIDDEN_VARIABLE_MODES = ("uniform", "fixed")


@dataclass(frozen=True)
class PairEmission:
    """One source event: a photon pair leaving the source at time t0."""

    t0: float  # emission time, ns
    lam: float  # hidden polarization angle, rad, in [0, pi)
    b_delay: float = 0.0  # cascade-lifetime delay of the B signal, ns
    a_intensity0: float = 1.0  # initial wave-model intensity, A side
    b_intensity0: float = 1.0  # initial wave-model intensity, B side


@dataclass(frozen=True)
class EmissionStream:
    """Column-wise batch of pair emissions, sorted by emission time."""

    t0: np.ndarray
    lam: np.ndarray
    b_delay: np.ndarray
    a_intensity0: np.ndarray
    b_intensity0: np.ndarray

    def __post_init__(self) -> None:
        n = self.t0.size
        for name in ("lam", "b_delay", "a_intensity0", "b_intensity0"):
            if getattr(self, name).size != n:
                raise ValueError(f"column {name!r} has size {getattr(self, name).size}, expected {n}")

    @property
    def size(self) -> int:
        return int(self.t0.size)

    def __len__(self) -> int:
        return self.size

    def pair(self, i: int) -> PairEmission:
        return PairEmission(
            t0=float(self.t0[i]),
            lam=float(self.lam[i]),
            b_delay=float(self.b_delay[i]),
            a_intensity0=float(self.a_intensity0[i]),
            b_intensity0=float(self.b_intensity0[i]),
        )

    def __iter__(self) -> Iterator[PairEmission]:
        for i in range(self.size):
            yield self.pair(i)


def _empty_stream() -> EmissionStream:
    z = np.zeros(0, dtype=float)
    return EmissionStream(t0=z, lam=z.copy(), b_delay=z.copy(),
                          a_intensity0=z.copy(), b_intensity0=z.copy())


@dataclass(frozen=True)
class EmissionConfig:
    """Source parameters.

    mean_rate is in emissions per second and duration in seconds; min_gap
    and cascade_lifetime_tau are in nanoseconds like every other time in
    the simulation.
    """

    mean_rate: float = 1.0e5
    duration: float = 0.1
    process: str = "poisson"
    min_gap: float = 0.0  # hard core between emissions, min_separation only
    cascade_lifetime_tau: float = 5.0  # mean of the exponential B delay
    hidden_variable: str = "uniform"
    fixed_angle: float = 0.0  # rad, used when hidden_variable == "fixed"

    def __post_init__(self) -> None:
        if self.process not in PROCESSES:
            raise ValueError(f"unknown process {self.process!r}, expected one of {PROCESSES}")
        if self.hidden_variable not in HIDDEN_VARIABLE_MODES:
            raise ValueError(
                f"unknown hidden_variable {self.hidden_variable!r}, expected one of {HIDDEN_VARIABLE_MODES}"
            )
        if not (self.mean_rate > 0.0 and math.isfinite(self.mean_rate)):
            raise ValueError(f"mean_rate must be positive and finite, got {self.mean_rate}")
        if not (self.duration >= 0.0 and math.isfinite(self.duration)):
            raise ValueError(f"duration must be >= 0 and finite, got {self.duration}")
        if not (self.min_gap >= 0.0 and math.isfinite(self.min_gap)):
            raise ValueError(f"min_gap must be >= 0 and finite, got {self.min_gap}")
        if not (self.cascade_lifetime_tau >= 0.0 and math.isfinite(self.cascade_lifetime_tau)):
            raise ValueError(f"cascade_lifetime_tau must be >= 0, got {self.cascade_lifetime_tau}")
        if not math.isfinite(self.fixed_angle):
            raise ValueError(f"fixed_angle must be finite, got {self.fixed_angle}")
        if self.process == "min_separation":
            # mean gap is 1/rate; a hard core at or above it leaves no room
            # for the exponential part and no stationary process exists
            if self.mean_rate * self.min_gap / NS_PER_SECOND >= 1.0:
                raise ValueError(
                    "min_separation needs mean_rate * min_gap < 1 second of budget: "
                    f"rate {self.mean_rate}/s with min_gap {self.min_gap} ns has none"
                )

    @property
    def mean_gap_ns(self) -> float:
        return NS_PER_SECOND / self.mean_rate


def _renewal_arrivals(rng: np.random.Generator, duration_ns: float,
                      hard_gap: float, exp_scale: float) -> np.ndarray:
    """Arrival times on (0, duration_ns) with gaps hard_gap + Exp(exp_scale)."""
    if duration_ns <= 0.0:
        return np.zeros(0, dtype=float)
    mean_gap = hard_gap + exp_scale
    expected = duration_ns / mean_gap
    chunk = max(int(expected + 10.0 * math.sqrt(expected + 1.0)) + 16, 16)
    blocks: list[np.ndarray] = []
    t_end = 0.0
    while t_end < duration_ns:
        gaps = rng.exponential(exp_scale, chunk)
        if hard_gap > 0.0:
            gaps += hard_gap
        block = t_end + np.cumsum(gaps)
        t_end = float(block[-1])
        blocks.append(block)
    times = np.concatenate(blocks) if len(blocks) > 1 else blocks[0]
    return times[times < duration_ns]


def generate_emissions(config: EmissionConfig, seed=None, wave_mode: bool = False) -> EmissionStream:
    """Draw a full emission stream for one run.

    seed is anything numpy's default_rng accepts (int, SeedSequence,
    Generator). With wave_mode the two wave envelopes leave together, so
    b_delay is identically zero; the particle-model cascade delay is drawn
    from Exp(cascade_lifetime_tau) otherwise.
    """
    rng = np.random.default_rng(seed)
    duration_ns = config.duration * NS_PER_SECOND
    if config.process == "poisson":
        hard_gap, exp_scale = 0.0, config.mean_gap_ns
    else:
        hard_gap = config.min_gap
        exp_scale = config.mean_gap_ns - config.min_gap
    t0 = _renewal_arrivals(rng, duration_ns, hard_gap, exp_scale)
    n = t0.size
    if n == 0:
        return _empty_stream()
    if config.hidden_variable == "uniform":
        lam = rng.uniform(0.0, np.pi, n)
    else:
        lam = np.full(n, config.fixed_angle % math.pi)
    if wave_mode or config.cascade_lifetime_tau == 0.0:
        b_delay = np.zeros(n, dtype=float)
    else:
        b_delay = rng.exponential(config.cascade_lifetime_tau, n)
    ones = np.ones(n, dtype=float)
    return EmissionStream(t0=t0, lam=lam, b_delay=b_delay,
                          a_intensity0=ones, b_intensity0=ones.copy())


def dump_emissions(stream: EmissionStream, path) -> None:
    """Write a stream as CSV with header t0_ns,lambda_rad,b_delay_ns."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t0_ns", "lambda_rad", "b_delay_ns"])
        for i in range(stream.size):
            writer.writerow([repr(float(stream.t0[i])),
                             repr(float(stream.lam[i])),
                             repr(float(stream.b_delay[i]))])
