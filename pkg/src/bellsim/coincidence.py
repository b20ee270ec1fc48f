"""Coincidence counting, time-difference spectra, and accidental estimation.

The counting convention follows hardware coincidence circuits: the B stream
is shifted by the channel delay, and a pair is accepted when the shifted
difference falls inside [window_lo, window_hi]. Counts use one-use greedy
matching in time order, the way a circuit consumes pulses; spectra histogram
every pairing in range, the way a time-to-amplitude converter records them.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass

import numpy as np

NS_PER_SECOND = 1.0e9


@dataclass(frozen=True)
class WindowConfig:
    """Coincidence-window parameters, all in ns.

    channel_delay is added to every B click before differencing, so a pair
    is accepted when tB + channel_delay - tA lies in [window_lo, window_hi].
    accidental_offset is the extra delay used for the shifted-window
    accidental estimate; it must dwarf the window span so the offset window
    sees none of the true-coincidence peak.
    """

    channel_delay: float = 0.0
    window_lo: float = -3.0
    window_hi: float = 17.0
    bin_width: float = 1.0
    accidental_offset: float = 100.0

    def __post_init__(self) -> None:
        for name in ("channel_delay", "window_lo", "window_hi", "bin_width", "accidental_offset"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)}")
        if not self.window_lo < self.window_hi:
            raise ValueError(
                f"window_lo must be < window_hi, got [{self.window_lo}, {self.window_hi}]"
            )
        if not self.bin_width > 0.0:
            raise ValueError(f"bin_width must be > 0, got {self.bin_width}")
        if self.accidental_offset < 2.0 * self.span:
            raise ValueError(
                f"accidental_offset {self.accidental_offset} ns is too close to the "
                f"window span {self.span} ns; it must be at least twice the span"
            )

    @property
    def span(self) -> float:
        return self.window_hi - self.window_lo


@dataclass(frozen=True)
class CoincidenceSpectrum:
    """Histogram of B-minus-A time differences (after the channel delay)."""

    bin_edges: np.ndarray
    counts: np.ndarray
    total_pairs_considered: int

    def __post_init__(self) -> None:
        if self.bin_edges.size != self.counts.size + 1:
            raise ValueError("bin_edges must have exactly one more entry than counts")
        if np.any(self.counts < 0):
            raise ValueError("spectrum counts must be nonnegative")

    @property
    def bin_width(self) -> float:
        return float(self.bin_edges[1] - self.bin_edges[0])

    def window_integral(self, lo: float, hi: float) -> int:
        """Sum counts over [lo, hi]; the bounds must sit on bin edges."""
        i0 = int(np.argmin(np.abs(self.bin_edges - lo)))
        i1 = int(np.argmin(np.abs(self.bin_edges - hi)))
        tol = 1e-9 * max(1.0, abs(lo), abs(hi))
        if abs(self.bin_edges[i0] - lo) > tol or abs(self.bin_edges[i1] - hi) > tol:
            raise ValueError(f"[{lo}, {hi}] does not align with the spectrum bin edges")
        return int(self.counts[i0:i1].sum())

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["bin_start_ns", "count"])
            for start, c in zip(self.bin_edges[:-1], self.counts):
                writer.writerow([repr(float(start)), int(c)])

    def to_dict(self) -> dict:
        return {
            "bin_edges_ns": [float(e) for e in self.bin_edges],
            "counts": [int(c) for c in self.counts],
            "total_pairs_considered": int(self.total_pairs_considered),
        }


def _as_sorted_array(times, name: str) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if t.size > 1 and np.any(np.diff(t) < 0.0):
        raise ValueError(f"{name} must be time-sorted")
    return t


def _greedy_match_count(a: list[float], b: list[float], lo: float, hi: float) -> int:
    """Two-pointer sweep; each click pairs at most once, earliest first."""
    i = j = 0
    na, nb = len(a), len(b)
    matched = 0
    while i < na and j < nb:
        d = b[j] - a[i]
        if d < lo:
            j += 1
        elif d > hi:
            i += 1
        else:
            matched += 1
            i += 1
            j += 1
    return matched


def count_coincidences(times_a, times_b, w: WindowConfig) -> int:
    """One-use coincidence count between two sorted click-time arrays."""
    a = _as_sorted_array(times_a, "times_a")
    b = _as_sorted_array(times_b, "times_b")
    return _greedy_match_count(a.tolist(), (b + w.channel_delay).tolist(),
                               w.window_lo, w.window_hi)


def _pair_ranges(a: np.ndarray, b_shifted: np.ndarray, lo: float, hi: float):
    """For each A click, the index range of B clicks with difference in [lo, hi]."""
    j0 = np.searchsorted(b_shifted, a + lo, side="left")
    j1 = np.searchsorted(b_shifted, a + hi, side="right")
    return j0, j1


def count_all_pairs(times_a, times_b, w: WindowConfig) -> int:
    """Every (A, B) pairing with difference inside the window, reuse allowed."""
    a = _as_sorted_array(times_a, "times_a")
    b = _as_sorted_array(times_b, "times_b") + w.channel_delay
    j0, j1 = _pair_ranges(a, b, w.window_lo, w.window_hi)
    return int((j1 - j0).sum())


def _expand_pairs(j0: np.ndarray, j1: np.ndarray):
    """Expand per-A index ranges into flat (a_index, b_index) arrays."""
    counts = j1 - j0
    total = int(counts.sum())
    ia = np.repeat(np.arange(j0.size), counts)
    if total == 0:
        return ia, np.zeros(0, dtype=np.int64)
    offsets = np.concatenate(([0], np.cumsum(counts)[:-1]))
    ib = np.arange(total) - np.repeat(offsets, counts) + np.repeat(j0, counts)
    return ia, ib.astype(np.int64)


def build_spectrum(times_a, times_b, w: WindowConfig,
                   spectrum_range: tuple[float, float] | None = None) -> CoincidenceSpectrum:
    """Histogram all pairings whose difference lies in spectrum_range.

    The range must contain the coincidence window and be an exact number of
    bin widths; when omitted it extends from well before the window to well
    after it so the accidental floor on both sides is visible.
    """
    a = _as_sorted_array(times_a, "times_a")
    b = _as_sorted_array(times_b, "times_b") + w.channel_delay
    if spectrum_range is None:
        lo = math.floor(w.window_lo - 5.0 * w.span - 10.0)
        hi = math.ceil(w.window_hi + 5.0 * w.span + 10.0)
        n_bins = math.ceil((hi - lo) / w.bin_width)
    else:
        lo, hi = float(spectrum_range[0]), float(spectrum_range[1])
        if not lo < hi:
            raise ValueError(f"spectrum range must have lo < hi, got [{lo}, {hi}]")
        if lo > w.window_lo or hi < w.window_hi:
            raise ValueError(
                f"spectrum range [{lo}, {hi}] must contain the window "
                f"[{w.window_lo}, {w.window_hi}]"
            )
        n_bins_f = (hi - lo) / w.bin_width
        n_bins = round(n_bins_f)
        if n_bins < 1 or abs(n_bins_f - n_bins) > 1e-9 * max(1.0, n_bins_f):
            raise ValueError(
                f"bin_width {w.bin_width} ns does not evenly divide the range [{lo}, {hi}]"
            )
    edges = lo + w.bin_width * np.arange(n_bins + 1)
    j0, j1 = _pair_ranges(a, b, float(edges[0]), float(edges[-1]))
    ia, ib = _expand_pairs(j0, j1)
    deltas = b[ib] - a[ia]
    counts, _ = np.histogram(deltas, bins=edges)
    return CoincidenceSpectrum(bin_edges=edges, counts=counts.astype(np.int64),
                               total_pairs_considered=int(deltas.size))


def estimate_accidentals_delayed(times_a, times_b, w: WindowConfig) -> int:
    """Accidental estimate from the same window shifted by accidental_offset."""
    shifted = dataclasses.replace(w, channel_delay=w.channel_delay + w.accidental_offset)
    return count_coincidences(times_a, times_b, shifted)


def estimate_accidentals_product(n_a: int, n_b: int, w: WindowConfig, duration: float) -> float:
    """Accidental estimate nA * nB * span / duration for independent streams."""
    if duration <= 0.0:
        raise ValueError(f"duration must be > 0 seconds, got {duration}")
    if n_a < 0 or n_b < 0:
        raise ValueError(f"singles counts must be >= 0, got {n_a} and {n_b}")
    return n_a * n_b * w.span / (duration * NS_PER_SECOND)


def classify_pairs_by_origin(times_a, ids_a, times_b, ids_b, w: WindowConfig) -> tuple[int, int]:
    """Split in-window pairings into same-emission and different-emission.

    This needs the emission tags, so it is a simulation-only ground truth
    that no real counting experiment can access. Pairings are all-pairs in
    the window; same-emission + different-emission equals count_all_pairs.
    """
    a = _as_sorted_array(times_a, "times_a")
    b = _as_sorted_array(times_b, "times_b") + w.channel_delay
    ja = np.asarray(ids_a)
    jb = np.asarray(ids_b)
    if ja.size != a.size or jb.size != b.size:
        raise ValueError("emission id arrays must match the click arrays in length")
    j0, j1 = _pair_ranges(a, b, w.window_lo, w.window_hi)
    ia, ib = _expand_pairs(j0, j1)
    if ia.size == 0:
        return 0, 0
    same = int((ja[ia] == jb[ib]).sum())
    return same, int(ia.size - same)
