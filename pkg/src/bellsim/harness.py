"""End-to-end scenario orchestration, sweeps, and counts-file reanalysis.

A scenario runs the four standard polariser configurations of a
single-channel experiment for equal durations each:

    x: both polarisers in, B at the first test angle from A
    y: both polarisers in, B at the second test angle
    z: A polariser in, B polariser removed
    Z: both polarisers removed

Each configuration produces raw coincidence counts, both accidental
estimates (delayed window and singles product), a time-difference spectrum,
and a simulation-only tally of how many in-window pairings really came from
one emission. Statistics are then computed raw, corrected with either
estimate, and on the ground-truth pairs.

Seed policy: every (configuration, repeat) cell derives its RNG from
SeedSequence([seed, configuration_index, repeat_index]) and spawns three
independent child streams (emission, detector A, detector B). Cells are
therefore independent and reproducible one by one; sweep point i runs with
base seed (seed + i).
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from bellsim.bellstats import (
    BellReport,
    RunCounts,
    compute_bell_statistics,
    subtract_accidentals,
)
from bellsim.coincidence import (
    CoincidenceSpectrum,
    WindowConfig,
    build_spectrum,
    classify_pairs_by_origin,
    count_coincidences,
    estimate_accidentals_delayed,
    estimate_accidentals_product,
)
from bellsim.detection import (
    ABSENT,
    ClickStream,
    DetectorConfig,
    PolariserSetting,
    simulate_side,
)
from bellsim.source import EmissionConfig, generate_emissions

CONFIG_KEYS = ("x", "y", "z", "Z")


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to simulate and analyze one four-configuration run.

    The A analyzer sits at analyzer_a for every configuration that uses it;
    the B analyzer sits at analyzer_a + relative_angle_x (or _y). Insertion
    delays apply whenever the corresponding polariser is present.
    """

    emission: EmissionConfig = EmissionConfig()
    detector_a: DetectorConfig = DetectorConfig()
    detector_b: DetectorConfig = DetectorConfig()
    window: WindowConfig = WindowConfig()
    analyzer_a: float = 0.0
    relative_angle_x: float = math.pi / 8.0
    relative_angle_y: float = 3.0 * math.pi / 8.0
    insertion_delay_a: float = 0.0
    insertion_delay_b: float = 0.0
    seed: int = 0
    repeats: int = 1
    spectrum_range: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        for name in ("analyzer_a", "relative_angle_x", "relative_angle_y"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)}")
        for name in ("insertion_delay_a", "insertion_delay_b"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not (isinstance(self.seed, int) and self.seed >= 0):
            raise ValueError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if not (isinstance(self.repeats, int) and self.repeats >= 1):
            raise ValueError(f"repeats must be an integer >= 1, got {self.repeats!r}")
        if self.detector_a.model != self.detector_b.model:
            raise ValueError(
                f"both detectors must use the same model, got "
                f"{self.detector_a.model!r} and {self.detector_b.model!r}"
            )
        if self.spectrum_range is not None:
            lo, hi = self.spectrum_range
            if not lo < hi:
                raise ValueError(f"spectrum_range must have lo < hi, got {self.spectrum_range}")

    @property
    def wave_mode(self) -> bool:
        return self.detector_a.model == "wave"

    def polariser_settings(self, key: str) -> tuple[PolariserSetting, PolariserSetting]:
        """The (A, B) polariser slots for one configuration key."""
        pol_a = PolariserSetting(angle=self.analyzer_a, insertion_delay=self.insertion_delay_a)
        if key == "x":
            return pol_a, PolariserSetting(angle=self.analyzer_a + self.relative_angle_x,
                                           insertion_delay=self.insertion_delay_b)
        if key == "y":
            return pol_a, PolariserSetting(angle=self.analyzer_a + self.relative_angle_y,
                                           insertion_delay=self.insertion_delay_b)
        if key == "z":
            return pol_a, ABSENT
        if key == "Z":
            return ABSENT, ABSENT
        raise ValueError(f"unknown configuration key {key!r}, expected one of {CONFIG_KEYS}")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        if d["spectrum_range"] is not None:
            d["spectrum_range"] = list(d["spectrum_range"])
        return d


@dataclass(frozen=True)
class ConfigurationResult:
    """Aggregated outcome of all repeats of one polariser configuration."""

    key: str
    angle_a: float | None  # None when the polariser is out
    angle_b: float | None
    raw_count: int
    acc_delayed: int
    acc_product: float
    singles_a: int
    singles_b: int
    true_pairs: int  # in-window pairings from one emission (simulation-only)
    accidental_pairs: int  # in-window pairings from different emissions
    window_inclusion_fraction: float | None  # share of paired emissions inside the window
    spectrum: CoincidenceSpectrum

    def to_dict(self) -> dict:
        return {
            "key": self.key,
            "angle_a": self.angle_a,
            "angle_b": self.angle_b,
            "raw_count": self.raw_count,
            "acc_delayed": self.acc_delayed,
            "acc_product": self.acc_product,
            "singles_a": self.singles_a,
            "singles_b": self.singles_b,
            "window_inclusion_fraction": self.window_inclusion_fraction,
            "spectrum": self.spectrum.to_dict(),
        }


@dataclass(frozen=True)
class ScenarioReport:
    """Full output of run_scenario; to_dict() is the JSON report shape."""

    scenario: ScenarioConfig
    configurations: dict[str, ConfigurationResult]
    counts_raw: RunCounts
    counts_delayed: RunCounts
    counts_product: RunCounts
    counts_truth: RunCounts
    report_raw: BellReport
    report_corrected_delayed: BellReport
    report_corrected_product: BellReport
    report_truth: BellReport
    no_data: bool

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.to_dict(),
            "configurations": {k: c.to_dict() for k, c in self.configurations.items()},
            "counts": {
                "raw": self.counts_raw.to_dict(),
                "with_delayed_accidentals": self.counts_delayed.to_dict(),
                "with_product_accidentals": self.counts_product.to_dict(),
            },
            "reports": {
                "raw": self.report_raw.to_dict(),
                "corrected_delayed": self.report_corrected_delayed.to_dict(),
                "corrected_product": self.report_corrected_product.to_dict(),
            },
            "simulation_only": {
                "note": "emission-tag ground truth; not observable in a real experiment",
                "true_counts": self.counts_truth.to_dict(),
                "report_truth": self.report_truth.to_dict(),
                "per_configuration": {
                    k: {"true_pairs": c.true_pairs, "accidental_pairs": c.accidental_pairs}
                    for k, c in self.configurations.items()
                },
            },
            "no_data": self.no_data,
        }

    def counts_csv_rows(self) -> list[list]:
        rows = [["config", "raw", "accidental_delayed", "accidental_product"]]
        for k in CONFIG_KEYS:
            c = self.configurations[k]
            rows.append([k, c.raw_count, c.acc_delayed, repr(float(c.acc_product))])
        return rows


def derive_rngs(seed: int, config_index: int, repeat_index: int):
    """The documented seed policy: one SeedSequence per cell, three children."""
    root = np.random.SeedSequence([seed, config_index, repeat_index])
    em, det_a, det_b = root.spawn(3)
    return (np.random.default_rng(em), np.random.default_rng(det_a),
            np.random.default_rng(det_b))


def _window_inclusion(clicks_a: ClickStream, clicks_b: ClickStream,
                      w: WindowConfig) -> tuple[int, int]:
    """Count emissions whose first A and B clicks land inside the window.

    Returns (inside, total matched emissions); a diagnostic for how much of
    the true-coincidence peak the window captures.
    """
    ua, ia = np.unique(clicks_a.emission_index, return_index=True)
    ub, ib = np.unique(clicks_b.emission_index, return_index=True)
    common, ca, cb = np.intersect1d(ua, ub, return_indices=True)
    if common.size == 0:
        return 0, 0
    delta = (clicks_b.times[ib[cb]] + w.channel_delay) - clicks_a.times[ia[ca]]
    inside = int(((delta >= w.window_lo) & (delta <= w.window_hi)).sum())
    return inside, int(common.size)


def _angle_of(setting: PolariserSetting) -> float | None:
    return float(setting.angle) if setting.present else None


def _run_configuration(s: ScenarioConfig, config_index: int, key: str) -> ConfigurationResult:
    set_a, set_b = s.polariser_settings(key)
    raw = delayed = singles_a = singles_b = 0
    true_pairs = acc_pairs = incl_in = incl_tot = 0
    product = 0.0
    spec_edges: np.ndarray | None = None
    spec_counts: np.ndarray | None = None
    spec_total = 0
    for r in range(s.repeats):
        rng_em, rng_a, rng_b = derive_rngs(s.seed, config_index, r)
        stream = generate_emissions(s.emission, rng_em, wave_mode=s.wave_mode)
        clicks_a = simulate_side(stream, "A", set_a, s.detector_a, rng_a)
        clicks_b = simulate_side(stream, "B", set_b, s.detector_b, rng_b)
        raw += count_coincidences(clicks_a.times, clicks_b.times, s.window)
        delayed += estimate_accidentals_delayed(clicks_a.times, clicks_b.times, s.window)
        if s.emission.duration > 0.0:
            product += estimate_accidentals_product(clicks_a.size, clicks_b.size,
                                                    s.window, s.emission.duration)
        spectrum = build_spectrum(clicks_a.times, clicks_b.times, s.window, s.spectrum_range)
        if spec_counts is None:
            spec_edges, spec_counts = spectrum.bin_edges, spectrum.counts.copy()
        else:
            spec_counts += spectrum.counts
        spec_total += spectrum.total_pairs_considered
        tp, ap = classify_pairs_by_origin(clicks_a.times, clicks_a.emission_index,
                                          clicks_b.times, clicks_b.emission_index, s.window)
        true_pairs += tp
        acc_pairs += ap
        got, tot = _window_inclusion(clicks_a, clicks_b, s.window)
        incl_in += got
        incl_tot += tot
        singles_a += clicks_a.size
        singles_b += clicks_b.size
    assert spec_edges is not None and spec_counts is not None
    return ConfigurationResult(
        key=key,
        angle_a=_angle_of(set_a),
        angle_b=_angle_of(set_b),
        raw_count=raw,
        acc_delayed=delayed,
        acc_product=product,
        singles_a=singles_a,
        singles_b=singles_b,
        true_pairs=true_pairs,
        accidental_pairs=acc_pairs,
        window_inclusion_fraction=(incl_in / incl_tot) if incl_tot else None,
        spectrum=CoincidenceSpectrum(bin_edges=spec_edges, counts=spec_counts,
                                     total_pairs_considered=spec_total),
    )


def run_scenario(s: ScenarioConfig) -> ScenarioReport:
    """Simulate all four configurations and compute every report variant."""
    results = {key: _run_configuration(s, ci, key) for ci, key in enumerate(CONFIG_KEYS)}
    duration_total = s.emission.duration * s.repeats
    rx, ry, rz, rZ = (results[k] for k in CONFIG_KEYS)

    counts_raw = RunCounts(x=rx.raw_count, y=ry.raw_count, z=rz.raw_count, Z=rZ.raw_count,
                           duration=duration_total)
    counts_delayed = dataclasses.replace(
        counts_raw, acc_x=rx.acc_delayed, acc_y=ry.acc_delayed,
        acc_z=rz.acc_delayed, acc_Z=rZ.acc_delayed)
    counts_product = dataclasses.replace(
        counts_raw, acc_x=rx.acc_product, acc_y=ry.acc_product,
        acc_z=rz.acc_product, acc_Z=rZ.acc_product)
    counts_truth = RunCounts(x=rx.true_pairs, y=ry.true_pairs, z=rz.true_pairs,
                             Z=rZ.true_pairs, duration=duration_total)

    report_raw = compute_bell_statistics(counts_raw, variant="raw")
    report_corr_delayed = compute_bell_statistics(subtract_accidentals(counts_delayed),
                                                  variant="corrected")
    report_corr_product = compute_bell_statistics(subtract_accidentals(counts_product),
                                                  variant="corrected")
    report_truth = compute_bell_statistics(counts_truth, variant="truth")

    return ScenarioReport(
        scenario=s,
        configurations=results,
        counts_raw=counts_raw,
        counts_delayed=counts_delayed,
        counts_product=counts_product,
        counts_truth=counts_truth,
        report_raw=report_raw,
        report_corrected_delayed=report_corr_delayed,
        report_corrected_product=report_corr_product,
        report_truth=report_truth,
        no_data=report_raw.no_data,
    )


def coincidence_curve(s: ScenarioConfig, relative_angles: Sequence[float]) -> list[tuple[float, int]]:
    """Raw coincidence counts vs relative analyzer angle, both polarisers in.

    Each angle gets its own cell seeds, continuing the configuration-index
    namespace after the four standard configurations (index 4 + i), so the
    curve is reproducible and independent of the standard runs.
    """
    curve: list[tuple[float, int]] = []
    for i, rel in enumerate(relative_angles):
        set_a = PolariserSetting(angle=s.analyzer_a, insertion_delay=s.insertion_delay_a)
        set_b = PolariserSetting(angle=s.analyzer_a + rel, insertion_delay=s.insertion_delay_b)
        total = 0
        for r in range(s.repeats):
            rng_em, rng_a, rng_b = derive_rngs(s.seed, 4 + i, r)
            stream = generate_emissions(s.emission, rng_em, wave_mode=s.wave_mode)
            clicks_a = simulate_side(stream, "A", set_a, s.detector_a, rng_a)
            clicks_b = simulate_side(stream, "B", set_b, s.detector_b, rng_b)
            total += count_coincidences(clicks_a.times, clicks_b.times, s.window)
        curve.append((float(rel), total))
    return curve


SWEEP_PARAMETERS = ("window_width", "mean_rate", "accidental_offset", "min_gap", "wave_gain")


@dataclass(frozen=True)
class SweepSpec:
    """One-parameter sweep around a fixed scenario."""

    parameter: str
    values: tuple[float, ...]
    fixed: ScenarioConfig

    def __post_init__(self) -> None:
        if self.parameter not in SWEEP_PARAMETERS:
            raise ValueError(
                f"unknown sweep parameter {self.parameter!r}, expected one of {SWEEP_PARAMETERS}"
            )
        if len(self.values) < 1:
            raise ValueError("sweep needs at least one value")
        for v in self.values:
            if not math.isfinite(v):
                raise ValueError(f"sweep values must be finite, got {v}")


def apply_sweep_value(s: ScenarioConfig, parameter: str, value: float) -> ScenarioConfig:
    """Return the scenario with one swept parameter replaced."""
    if parameter == "window_width":
        w = dataclasses.replace(s.window, window_hi=s.window.window_lo + value)
        return dataclasses.replace(s, window=w)
    if parameter == "mean_rate":
        return dataclasses.replace(s, emission=dataclasses.replace(s.emission, mean_rate=value))
    if parameter == "accidental_offset":
        w = dataclasses.replace(s.window, accidental_offset=value)
        return dataclasses.replace(s, window=w)
    if parameter == "min_gap":
        process = "min_separation" if value > 0.0 else s.emission.process
        return dataclasses.replace(
            s, emission=dataclasses.replace(s.emission, min_gap=value, process=process))
    if parameter == "wave_gain":
        return dataclasses.replace(
            s,
            detector_a=dataclasses.replace(s.detector_a, wave_gain=value),
            detector_b=dataclasses.replace(s.detector_b, wave_gain=value),
        )
    raise ValueError(f"unknown sweep parameter {parameter!r}, expected one of {SWEEP_PARAMETERS}")


@dataclass(frozen=True)
class SweepRow:
    value: float
    report: ScenarioReport


_SWEEP_COLUMNS = (
    "value", "x", "y", "z", "Z",
    "acc_x_product", "acc_y_product", "acc_z_product", "acc_Z_product",
    "s_std_raw", "s_chsh_raw", "s_freedman_raw",
    "s_std_corrected", "s_chsh_corrected", "s_freedman_corrected",
    "visibility_raw", "true_pairs", "accidental_pairs", "accidental_true_ratio",
)


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    rows: tuple[SweepRow, ...]

    def _row_values(self, row: SweepRow) -> list:
        rep = row.report
        cfg = rep.configurations
        true_total = sum(cfg[k].true_pairs for k in CONFIG_KEYS)
        acc_total = sum(cfg[k].accidental_pairs for k in CONFIG_KEYS)
        raw, corr = rep.report_raw, rep.report_corrected_product
        return [
            row.value,
            cfg["x"].raw_count, cfg["y"].raw_count, cfg["z"].raw_count, cfg["Z"].raw_count,
            cfg["x"].acc_product, cfg["y"].acc_product, cfg["z"].acc_product, cfg["Z"].acc_product,
            raw.s_std.value, raw.s_chsh.value, raw.s_freedman.value,
            corr.s_std.value, corr.s_chsh.value, corr.s_freedman.value,
            raw.visibility, true_total, acc_total,
            (acc_total / true_total) if true_total else None,
        ]

    def to_csv(self, path_or_buffer) -> None:
        def _write(fh) -> None:
            writer = csv.writer(fh)
            writer.writerow(_SWEEP_COLUMNS)
            for row in self.rows:
                writer.writerow(["" if v is None else v for v in self._row_values(row)])

        if hasattr(path_or_buffer, "write"):
            _write(path_or_buffer)
        else:
            with open(path_or_buffer, "w", newline="") as fh:
                _write(fh)

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "parameter": self.parameter,
            "rows": [{"value": r.value, "report": r.report.to_dict()} for r in self.rows],
        }


def run_sweep(spec: SweepSpec) -> SweepResult:
    """run_scenario once per value with seed = base seed + value index."""
    rows: list[SweepRow] = []
    for i, value in enumerate(spec.values):
        base = dataclasses.replace(spec.fixed, seed=spec.fixed.seed + i)
        try:
            scenario = apply_sweep_value(base, spec.parameter, value)
            rows.append(SweepRow(value=value, report=run_scenario(scenario)))
        except Exception as exc:
            raise RuntimeError(
                f"sweep aborted at {spec.parameter} = {value}: {exc}"
            ) from exc
    return SweepResult(parameter=spec.parameter, rows=tuple(rows))


def _merge_section(current, overrides: dict, section: str):
    if not isinstance(overrides, dict):
        raise ValueError(f"scenario section {section!r} must be a mapping")
    names = {f.name for f in dataclasses.fields(current)}
    unknown = set(overrides) - names
    if unknown:
        raise ValueError(f"unknown field(s) in {section}: {', '.join(sorted(unknown))}")
    try:
        return dataclasses.replace(current, **overrides)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"invalid {section} config: {exc}") from None


_SCENARIO_SECTIONS = ("emission", "detector_a", "detector_b", "window")
_SCENARIO_SCALARS = ("analyzer_a", "relative_angle_x", "relative_angle_y",
                     "insertion_delay_a", "insertion_delay_b", "seed", "repeats",
                     "spectrum_range")


def scenario_from_dict(data: dict, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Build a scenario from a JSON-shaped dict of overrides on a base."""
    if not isinstance(data, dict):
        raise ValueError(f"scenario must be a mapping, got {type(data).__name__}")
    base = base if base is not None else ScenarioConfig()
    data = dict(data)
    sections = {
        "emission": _merge_section(base.emission, data.pop("emission", {}), "emission"),
        "detector_a": _merge_section(base.detector_a, data.pop("detector_a", {}), "detector_a"),
        "detector_b": _merge_section(base.detector_b, data.pop("detector_b", {}), "detector_b"),
        "window": _merge_section(base.window, data.pop("window", {}), "window"),
    }
    unknown = set(data) - set(_SCENARIO_SCALARS)
    if unknown:
        raise ValueError(f"unknown scenario field(s): {', '.join(sorted(unknown))}")
    if "spectrum_range" in data and data["spectrum_range"] is not None:
        rng = data["spectrum_range"]
        if not (isinstance(rng, (list, tuple)) and len(rng) == 2):
            raise ValueError(f"spectrum_range must be a two-element list, got {rng!r}")
        data["spectrum_range"] = (float(rng[0]), float(rng[1]))
    try:
        return dataclasses.replace(base, **sections, **data)
    except TypeError as exc:
        raise ValueError(f"invalid scenario config: {exc}") from None


def parse_counts_file(path) -> RunCounts:
    """Read a RunCounts table from a JSON or CSV file.

    JSON: one object whose keys are RunCounts field names. CSV: a header of
    field names and exactly one data row; empty cells mean absent. Errors
    carry the file name plus the line or field at fault.
    """
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    name = str(path)
    stripped = text.lstrip()
    is_json = name.endswith(".json") or (not name.endswith(".csv") and stripped.startswith("{"))
    if is_json:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{name}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ValueError(f"{name}: expected a JSON object of counts fields")
        try:
            return RunCounts.from_dict(data)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"{name}: {exc}") from None
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise ValueError(f"{name}: empty file")
    rows = list(reader)
    if len(rows) != 1:
        raise ValueError(f"{name}: expected exactly one data row, found {len(rows)}")
    parsed: dict = {}
    for field, cell in rows[0].items():
        if field is None or (cell is not None and field == ""):
            raise ValueError(f"{name}: line 2 has more cells than the header")
        if cell is None or cell.strip() == "":
            continue
        try:
            parsed[field] = float(cell)
        except ValueError:
            raise ValueError(
                f"{name}: line 2, field {field!r}: could not parse {cell!r} as a number"
            ) from None
    try:
        return RunCounts.from_dict(parsed)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{name}: {exc}") from None


@dataclass(frozen=True)
class ReanalysisResult:
    counts: RunCounts
    raw: BellReport
    corrected: BellReport | None  # None when the file carries no accidentals

    def to_dict(self) -> dict:
        return {
            "counts": self.counts.to_dict(),
            "reports": {
                "raw": self.raw.to_dict(),
                **({"corrected": self.corrected.to_dict()} if self.corrected else {}),
            },
        }


def reanalyze_counts(path) -> ReanalysisResult:
    """Recompute raw (and, if accidentals are present, corrected) statistics."""
    counts = parse_counts_file(path)
    raw = compute_bell_statistics(counts, variant="raw")
    corrected = None
    if counts.has_accidentals:
        corrected = compute_bell_statistics(subtract_accidentals(counts), variant="corrected")
    return ReanalysisResult(counts=counts, raw=raw, corrected=corrected)
