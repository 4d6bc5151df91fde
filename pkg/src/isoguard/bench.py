"""Emulation of the isolator test bench and its stepwise illumination procedure.

Setup: the high-power laser (HPL) passes a 95:5 beam splitter; 95 % is
launched backward into the sample and the 5 % arm feeds OPM1. OPM2 reads
what leaks through the sample backward. A 10.5 mW probe diode measures
forward insertion loss on OPM3 behind a 99:1 splitter (20 dB extra).

Procedure: start at 0.16 W, hold each level for the base exposure, hold
longer while the isolation is still moving by more than the 1 dB
measurement accuracy, step the power up, stop on destruction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .components import (
    MEASUREMENT_ACCURACY_DB,
    DegradationRecord,
    ThermalResponse,
    insertion_loss_at_power,
    isolation_at_power,
    surface_temperature,
    temperature_at_power,
)
from .errors import NonPositiveReading
from .fixtures import ingest_fixture  # noqa: F401  (part of this module's surface)
from .units import fmt


@dataclass(frozen=True)
class ProcedureConfig:
    """Power stepping and hold rules.

    ``step=None`` snaps the steps to the powers in the fixture (so table
    values come out exactly); gaps wider than ``step_max`` are filled in.
    A number gives a fixed grid from ``start_power``.
    """

    start_power: float = 0.16
    step_min: float = 0.1
    step_max: float = 0.5
    base_exposure: float = 60.0
    extended_exposure: float = 900.0
    stop_on_destruction: bool = True
    stop_power: float | None = None
    step: float | None = None
    stability_tol_db: float = MEASUREMENT_ACCURACY_DB

    def __post_init__(self) -> None:
        if not self.start_power > 0:
            raise ValueError("start_power must be positive")
        if not 0 < self.step_min <= self.step_max:
            raise ValueError("need 0 < step_min <= step_max")
        if not (self.base_exposure > 0 and self.extended_exposure > 0):
            raise ValueError("exposures must be positive")
        if self.step is not None and not self.step > 0:
            raise ValueError("step must be positive")
        if self.stop_power is not None and not self.stop_power > 0:
            raise ValueError("stop_power must be positive")


@dataclass(frozen=True)
class SetupModel:
    hpl_tap_ratio: float = 0.05
    launch_ratio: float = 0.95
    probe_tap_attenuation: float = 20.0
    probe_power: float = 0.0105
    port2_split: float = 0.5

    def __post_init__(self) -> None:
        for name in ("hpl_tap_ratio", "launch_ratio", "port2_split"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must be in (0, 1)")
        if not math.isclose(self.hpl_tap_ratio + self.launch_ratio, 1.0, abs_tol=1e-12):
            raise ValueError("hpl_tap_ratio and launch_ratio must sum to 1")
        if self.probe_power <= 0 or self.probe_tap_attenuation < 0:
            raise ValueError("probe_power must be positive and probe_tap_attenuation >= 0")


class Readings(NamedTuple):
    opm1: float
    opm2: float
    opm3: float


def simulate_meters(setup: SetupModel, hpl_power: float, isolation: float,
                    insertion_loss: float) -> Readings:
    """Meter readings (W) for ``hpl_power`` launched into the sample."""
    if hpl_power < 0:
        raise ValueError("hpl_power must be >= 0 W")
    opm1 = hpl_power * setup.hpl_tap_ratio / setup.launch_ratio
    opm2 = hpl_power * 10.0 ** (-isolation / 10.0)
    opm3 = setup.probe_power * 10.0 ** (-(insertion_loss + setup.probe_tap_attenuation) / 10.0)
    return Readings(opm1, opm2, opm3)


def estimate_from_readings(setup: SetupModel, readings: Readings | Sequence[float]) -> tuple[float, float]:
    """Invert :func:`simulate_meters`: (isolation dB, insertion loss dB)."""
    opm1, opm2, opm3 = readings
    for name, v in (("opm1", opm1), ("opm2", opm2), ("opm3", opm3)):
        if not v > 0:
            raise NonPositiveReading(f"{name} reading must be > 0 W, got {v!r}")
    launched = opm1 * setup.launch_ratio / setup.hpl_tap_ratio
    isolation = 10.0 * math.log10(launched / opm2)
    insertion_loss = 10.0 * math.log10(setup.probe_power / opm3) - setup.probe_tap_attenuation
    return isolation, insertion_loss


def replay_readings(setup: SetupModel, sample: DegradationRecord, power: float) -> Readings:
    """Readings the bench would show for a fixture sample at ``power``."""
    il = insertion_loss_at_power(sample, power)
    return simulate_meters(setup, power, isolation_at_power(sample, power), il if il is not None else 0.0)


class BenchEntry(NamedTuple):
    step: int
    power_w: float
    exposure_s: float
    isolation_db: float | None
    insertion_loss_db: float | None
    temp_c: float | None
    destroyed: bool


@dataclass(frozen=True)
class BenchSummary:
    sample: str
    initial_isolation_db: float
    initial_insertion_loss_db: float | None
    min_isolation_db: float
    min_power_w: float
    min_exposure_s: float
    max_decrease_db: float
    damage: tuple[float, float] | None
    permanent_decrease_db: float | None = None
    spec_min_isolation_db: float | None = None

    def minimum_text(self) -> str:
        return f"{self.min_isolation_db:.1f} @ {self.min_power_w:g} W, {self.min_exposure_s:g} s"

    def damage_text(self) -> str:
        if self.damage is None:
            return "was not tested"
        return f"{self.damage[0]:g} W, {self.damage[1]:g} s"

    def table_row(self) -> str:
        """One row in the layout of an isolator results table."""
        il = "" if self.initial_insertion_loss_db is None else f"{self.initial_insertion_loss_db:.2f}"
        smin = "" if self.spec_min_isolation_db is None else f"{self.spec_min_isolation_db:g}"
        return " | ".join([
            self.sample, smin, il, f"{self.initial_isolation_db:.1f}",
            self.minimum_text(), f"{self.max_decrease_db:.1f}", self.damage_text(),
        ])


@dataclass(frozen=True)
class BenchLog:
    entries: tuple[BenchEntry, ...]
    summary: BenchSummary

    def to_csv(self) -> str:
        lines = ["step,power_w,exposure_s,isolation_db,insertion_loss_db,temp_c,destroyed"]
        for e in self.entries:
            lines.append(",".join([
                str(e.step), fmt(e.power_w), fmt(e.exposure_s), fmt(e.isolation_db),
                fmt(e.insertion_loss_db), fmt(e.temp_c), "true" if e.destroyed else "false",
            ]))
        s = self.summary
        lines += [
            "#summary",
            f"#sample,{s.sample}",
            f"#minimum_isolation,{s.minimum_text()}",
            f"#maximum_decrease_db,{s.max_decrease_db:.1f}",
            f"#irreversible_damage,{s.damage_text()}",
        ]
        if s.permanent_decrease_db is not None:
            lines.append(f"#permanent_decrease_db,{s.permanent_decrease_db:g}")
        lines.append(f"#table_row,{s.table_row()}")
        return "\n".join(lines) + "\n"


def summarize(sample: DegradationRecord, entries: Sequence[BenchEntry]) -> BenchSummary:
    """Table-style summary recomputed from a list of bench entries."""
    observed = [e for e in entries if e.isolation_db is not None and not e.destroyed]
    if not observed:
        raise ValueError("no isolation observations in bench entries")
    # first occurrence wins on ties, matching the step order
    low = min(observed, key=lambda e: e.isolation_db)
    initial = entries[0]
    broken = next((e for e in entries if e.destroyed), None)
    max_power = max(e.power_w for e in entries)
    pd = sample.permanent_decrease
    permanent = pd.decrease_db if (pd is not None and broken is None and max_power >= pd.power_w) else None
    return BenchSummary(
        sample=sample.model_id,
        initial_isolation_db=initial.isolation_db,
        initial_insertion_loss_db=initial.insertion_loss_db,
        min_isolation_db=low.isolation_db,
        min_power_w=low.power_w,
        min_exposure_s=low.exposure_s,
        max_decrease_db=initial.isolation_db - low.isolation_db,
        damage=(broken.power_w, broken.exposure_s) if broken else None,
        permanent_decrease_db=permanent,
        spec_min_isolation_db=sample.spec.spec_min_isolation,
    )


def _schedule(sample: DegradationRecord, cfg: ProcedureConfig) -> list[float]:
    top = sample.powers[-1]
    if sample.breakdown is not None:
        top = max(top, sample.breakdown.power_w)
    if cfg.stop_power is not None:
        top = min(top, cfg.stop_power)
    if cfg.step is not None:
        n = int(math.floor((top - cfg.start_power) / cfg.step + 1e-9))
        return [round(cfg.start_power + i * cfg.step, 9) for i in range(n + 1)]
    anchors = [p for p in sample.powers if p >= cfg.start_power - 1e-12 and p <= top + 1e-12]
    if not anchors or not math.isclose(anchors[0], cfg.start_power, abs_tol=1e-12):
        anchors.insert(0, cfg.start_power)
    if sample.breakdown is not None and sample.breakdown.power_w > anchors[-1] and sample.breakdown.power_w <= top:
        anchors.append(sample.breakdown.power_w)
    out = [anchors[0]]
    for p in anchors[1:]:
        gap = p - out[-1]
        if gap > cfg.step_max + 1e-12:
            k = math.ceil(gap / cfg.step_max - 1e-12)
            base = out[-1]
            out.extend(round(base + gap * i / k, 9) for i in range(1, k))
        out.append(p)
    return out


def run_procedure(sample: DegradationRecord, config: ProcedureConfig | None = None,
                  thermal: ThermalResponse | None = None) -> BenchLog:
    """Step the backward laser power over ``sample`` and log what the bench sees.

    Exposure per level is the fixture's pinned hold if one exists, else
    the base exposure, extended to ``extended_exposure`` when isolation
    moved by more than ``stability_tol_db`` since the previous level. At
    the breakdown power the observation (if the fixture has one) is
    logged first, then the destruction at the breakdown exposure.
    """
    cfg = config or ProcedureConfig()
    base_exposure = sample.base_exposure_s or cfg.base_exposure
    bd = sample.breakdown

    def temp(p: float) -> float | None:
        return surface_temperature(thermal, p) if thermal is not None else temperature_at_power(sample, p)

    first = sample.points[0]
    entries = [BenchEntry(0, 0.0, 0.0, first.isolation_db, first.insertion_loss_db, temp(0.0), False)]
    prev_iso = first.isolation_db
    destroyed = False
    for p in _schedule(sample, cfg):
        step = len(entries)
        if destroyed:
            entries.append(BenchEntry(step, p, base_exposure, None, sample.destroyed_insertion_loss_db,
                                      temp(p), True))
            continue
        at_breakdown = bd is not None and math.isclose(p, bd.power_w, abs_tol=1e-9)
        if bd is not None and p > bd.power_w and not at_breakdown:
            destroyed = True
            entries.append(BenchEntry(step, p, base_exposure, None, sample.destroyed_insertion_loss_db,
                                      temp(p), True))
        else:
            iso = isolation_at_power(sample, p)
            hold = sample.hold_at(p)
            if hold is None:
                hold = base_exposure if abs(iso - prev_iso) <= cfg.stability_tol_db else cfg.extended_exposure
            observed_here = not at_breakdown or any(math.isclose(p, q, abs_tol=1e-9) for q in sample.powers)
            if at_breakdown and hold >= bd.exposure_s:
                observed_here = False
            if observed_here:
                entries.append(BenchEntry(step, p, hold, iso, insertion_loss_at_power(sample, p), temp(p), False))
                prev_iso = iso
            if at_breakdown:
                destroyed = True
                entries.append(BenchEntry(len(entries), p, bd.exposure_s, None,
                                          sample.destroyed_insertion_loss_db, temp(p), True))
        if destroyed and cfg.stop_on_destruction:
            break
    entries_t = tuple(entries)
    return BenchLog(entries_t, summarize(sample, entries_t))
