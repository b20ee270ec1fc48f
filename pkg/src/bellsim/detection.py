"""Detector-side transforms: polariser transmission, click generation, dead time.

Two click models are supported. The particle model draws a Malus-law
transmission decision and an efficiency decision, then stamps the click at
the (possibly delayed) emission time plus Gaussian jitter. The wave model
treats each signal as an exponentially decaying intensity envelope and
samples the click time from the induced detection hazard, so attenuating
the envelope both lowers the click probability and pushes the click later.

Scalar single-emission operations are provided for clarity and testing;
simulate_side is the vectorized path used for full runs. Both use the same
distributions but draw from the RNG in different orders, so per-click
agreement between the two paths is not guaranteed for a shared seed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from bellsim.source import EmissionStream, PairEmission

MODELS = ("particle", "wave")
EFFICIENCY_FNS = ("constant", "cosine_modulated")
SIDES = ("A", "B")


@dataclass(frozen=True)
class PolariserSetting:
    """A polariser slot on one arm: either absent or set to an angle.

    angle None means no polariser in the beam. insertion_delay (ns) is the
    extra propagation delay the inserted element adds; it applies only when
    the polariser is present.
    """

    angle: float | None = None
    insertion_delay: float = 0.0

    def __post_init__(self) -> None:
        if self.angle is not None:
            if not math.isfinite(self.angle):
                raise ValueError(f"polariser angle must be finite, got {self.angle}")
            object.__setattr__(self, "angle", self.angle % math.pi)
        if not (math.isfinite(self.insertion_delay) and self.insertion_delay >= 0.0):
            raise ValueError(f"insertion_delay must be >= 0, got {self.insertion_delay}")

    @property
    def present(self) -> bool:
        return self.angle is not None

    @property
    def effective_delay(self) -> float:
        return self.insertion_delay if self.present else 0.0


ABSENT = PolariserSetting()


def polariser(angle: float, insertion_delay: float = 0.0) -> PolariserSetting:
    return PolariserSetting(angle=angle, insertion_delay=insertion_delay)


@dataclass(frozen=True)
class DetectorConfig:
    """Per-side detector and model parameters. Times in ns."""

    model: str = "particle"
    eta0: float = 1.0  # base detection efficiency
    efficiency_fn: str = "constant"
    modulation_depth: float = 0.0  # used by cosine_modulated
    enhancement_factor: float = 1.0  # efficiency multiplier with polariser present
    jitter_sigma: float = 1.0
    dead_time: float = 16.0
    wave_decay_tau: float = 5.0  # intensity decay constant, wave model
    wave_gain: float = 1.0  # hazard per unit intensity per ns, wave model
    allow_multiple_detections: bool = False

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}, expected one of {MODELS}")
        if self.efficiency_fn not in EFFICIENCY_FNS:
            raise ValueError(
                f"unknown efficiency_fn {self.efficiency_fn!r}, expected one of {EFFICIENCY_FNS}"
            )
        if not 0.0 <= self.eta0 <= 1.0:
            raise ValueError(f"eta0 must be in [0, 1], got {self.eta0}")
        if self.enhancement_factor < 1.0:
            raise ValueError(f"enhancement_factor must be >= 1, got {self.enhancement_factor}")
        if self.eta0 * self.enhancement_factor > 1.0:
            raise ValueError(
                "eta0 * enhancement_factor must stay <= 1: "
                f"{self.eta0} * {self.enhancement_factor} exceeds it"
            )
        if not 0.0 <= self.modulation_depth <= 1.0:
            raise ValueError(f"modulation_depth must be in [0, 1], got {self.modulation_depth}")
        if self.jitter_sigma < 0.0:
            raise ValueError(f"jitter_sigma must be >= 0, got {self.jitter_sigma}")
        if self.dead_time < 0.0:
            raise ValueError(f"dead_time must be >= 0, got {self.dead_time}")
        if self.model == "wave":
            if not self.wave_decay_tau > 0.0:
                raise ValueError(f"wave_decay_tau must be > 0 in wave mode, got {self.wave_decay_tau}")
            if self.wave_gain < 0.0:
                raise ValueError(f"wave_gain must be >= 0, got {self.wave_gain}")


@dataclass(frozen=True)
class DetectionEvent:
    t: float  # detection time, ns
    side: str  # "A" or "B"


@dataclass(frozen=True)
class ClickStream:
    """Time-sorted clicks of one side, tagged with the emission they came from."""

    times: np.ndarray
    emission_index: np.ndarray
    side: str

    @property
    def size(self) -> int:
        return int(self.times.size)

    def __len__(self) -> int:
        return self.size


def transmit_particle(lam: float, setting: PolariserSetting, u: float) -> bool:
    """Malus-law pass decision for one signal against one polariser slot."""
    if not 0.0 <= u < 1.0:
        raise ValueError(f"u must be in [0, 1), got {u}")
    if not setting.present:
        return True
    return u < math.cos(lam - setting.angle) ** 2


def detection_efficiency(lam: float, setting: PolariserSetting, config: DetectorConfig) -> float:
    """Efficiency for a transmitted signal: eta0 times the configured variation."""
    eta = config.eta0
    if setting.present:
        if config.efficiency_fn == "cosine_modulated":
            eta *= 1.0 - config.modulation_depth * math.sin(lam - setting.angle) ** 2
        eta *= config.enhancement_factor
    return eta


def _base_time(emission: PairEmission, side: str, setting: PolariserSetting) -> float:
    t = emission.t0 + setting.effective_delay
    if side == "B":
        t += emission.b_delay
    return t


def detect_particle(emission: PairEmission, side: str, setting: PolariserSetting,
                    config: DetectorConfig, rng: np.random.Generator) -> DetectionEvent | None:
    """Particle-model click for one emission, or None if the signal is lost."""
    if config.model != "particle":
        raise ValueError(f"detect_particle needs a particle-model config, got {config.model!r}")
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    if not transmit_particle(emission.lam, setting, rng.random()):
        return None
    if rng.random() >= detection_efficiency(emission.lam, setting, config):
        return None
    t = _base_time(emission, side, setting) + rng.normal(0.0, config.jitter_sigma)
    return DetectionEvent(t=t, side=side)


def detect_wave(emission: PairEmission, side: str, setting: PolariserSetting,
                config: DetectorConfig, rng: np.random.Generator) -> list[DetectionEvent]:
    """Wave-model clicks for one emission.

    The envelope I(t) = I0 * exp(-t/tau) drives a hazard wave_gain * I(t),
    so the total expected hazard is gain * I0 * tau and the click time comes
    from inverting the cumulative hazard. With allow_multiple_detections the
    sampling restarts dead_time after each click on what is left of the
    envelope; otherwise only the first click is returned.
    """
    if config.model != "wave":
        raise ValueError(f"detect_wave needs a wave-model config, got {config.model!r}")
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    tau = config.wave_decay_tau
    i0 = emission.a_intensity0 if side == "A" else emission.b_intensity0
    if setting.present:
        i0 *= math.cos(emission.lam - setting.angle) ** 2
    total = config.wave_gain * i0 * tau  # cumulative hazard of the whole envelope
    events: list[DetectionEvent] = []
    base = emission.t0 + setting.effective_delay
    survival = 1.0  # exp(-t/tau) at the current resume point
    while True:
        eps = rng.exponential()
        if eps >= total * survival:
            break
        survival -= eps / total
        offset = -tau * math.log(survival)
        t = base + offset + rng.normal(0.0, config.jitter_sigma)
        events.append(DetectionEvent(t=t, side=side))
        if not config.allow_multiple_detections:
            break
        survival = math.exp(-(offset + config.dead_time) / tau)
    return events


def _dead_time_keep_mask(times: np.ndarray, dead_time: float) -> np.ndarray:
    """Greedy keep-mask over a sorted array.

    Any click whose raw gap to its predecessor is >= dead_time is always
    kept (the greedy anchor before it can only be earlier), so the python
    scan only has to walk the conflict runs.
    """
    n = times.size
    keep = np.ones(n, dtype=bool)
    if n <= 1 or dead_time <= 0.0:
        return keep
    gaps = np.diff(times)
    conflict = gaps < dead_time
    if not conflict.any():
        return keep
    run_starts = np.flatnonzero(np.concatenate(([True], ~conflict)))
    bounds = np.append(run_starts, n)
    t_list = times.tolist()
    for k in range(run_starts.size):
        lo, hi = int(bounds[k]), int(bounds[k + 1])
        if hi - lo <= 1:
            continue
        last = t_list[lo]
        for i in range(lo + 1, hi):
            if t_list[i] - last >= dead_time:
                last = t_list[i]
            else:
                keep[i] = False
    return keep


def apply_dead_time(times, dead_time: float) -> np.ndarray:
    """Filter a sorted click-time array so surviving gaps are >= dead_time."""
    t = np.asarray(times, dtype=float)
    if dead_time < 0.0:
        raise ValueError(f"dead_time must be >= 0, got {dead_time}")
    if t.size > 1 and np.any(np.diff(t) < 0.0):
        raise ValueError("click times must be sorted before dead-time filtering")
    return t[_dead_time_keep_mask(t, dead_time)]


def _particle_candidates(stream: EmissionStream, side: str, setting: PolariserSetting,
                         config: DetectorConfig, rng: np.random.Generator):
    n = stream.size
    lam = stream.lam
    if setting.present:
        rel = lam - setting.angle
        transmitted = rng.random(n) < np.cos(rel) ** 2
        eta = np.full(n, config.eta0)
        if config.efficiency_fn == "cosine_modulated":
            eta = eta * (1.0 - config.modulation_depth * np.sin(rel) ** 2)
        eta *= config.enhancement_factor
    else:
        transmitted = np.ones(n, dtype=bool)
        eta = np.full(n, config.eta0)
    detected = transmitted & (rng.random(n) < eta)
    base = stream.t0 + setting.effective_delay
    if side == "B":
        base = base + stream.b_delay
    jitter = rng.normal(0.0, config.jitter_sigma, n)
    times = base[detected] + jitter[detected]
    ids = np.flatnonzero(detected).astype(np.int64)
    return times, ids


def _wave_candidates(stream: EmissionStream, side: str, setting: PolariserSetting,
                     config: DetectorConfig, rng: np.random.Generator):
    n = stream.size
    i0 = stream.a_intensity0 if side == "A" else stream.b_intensity0
    tau = config.wave_decay_tau
    if setting.present:
        i0 = i0 * np.cos(stream.lam - setting.angle) ** 2
    total = config.wave_gain * i0 * tau
    base = stream.t0 + setting.effective_delay

    eps = rng.exponential(1.0, n)
    hit = eps < total  # total == 0 can never satisfy this, eps > 0
    survival = 1.0 - eps[hit] / total[hit]
    offsets = -tau * np.log(survival)
    idx = np.flatnonzero(hit).astype(np.int64)
    times = base[idx] + offsets + rng.normal(0.0, config.jitter_sigma, idx.size)
    all_times = [times]
    all_ids = [idx]

    if config.allow_multiple_detections:
        while idx.size:
            resume = offsets + config.dead_time
            survival = np.exp(-resume / tau)
            budget = total[idx] * survival
            eps = rng.exponential(1.0, idx.size)
            again = eps < budget
            idx = idx[again]
            if idx.size == 0:
                break
            survival = survival[again] - eps[again] / total[idx]
            offsets = -tau * np.log(survival)
            times = base[idx] + offsets + rng.normal(0.0, config.jitter_sigma, idx.size)
            all_times.append(times)
            all_ids.append(idx)

    return np.concatenate(all_times), np.concatenate(all_ids)


def simulate_side(stream: EmissionStream, side: str, setting: PolariserSetting,
                  config: DetectorConfig, rng: np.random.Generator) -> ClickStream:
    """Run one side's full detection chain over an emission stream.

    Candidates are generated per emission under the configured model, merged
    into time order, then thinned by the detector dead time.
    """
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    if config.model == "particle":
        times, ids = _particle_candidates(stream, side, setting, config, rng)
    else:
        times, ids = _wave_candidates(stream, side, setting, config, rng)
    order = np.argsort(times, kind="stable")
    times = times[order]
    ids = ids[order]
    keep = _dead_time_keep_mask(times, config.dead_time)
    return ClickStream(times=times[keep], emission_index=ids[keep], side=side)


def dump_clicks(path, *streams: ClickStream) -> None:
    """Write one or more click streams as a merged CSV with header t_ns,side."""
    rows: list[tuple[float, str]] = []
    for s in streams:
        rows.extend((float(t), s.side) for t in s.times)
    rows.sort(key=lambda r: r[0])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_ns", "side"])
        for t, side in rows:
            writer.writerow([repr(t), side])
