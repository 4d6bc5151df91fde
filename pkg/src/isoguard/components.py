"""Empirical isolator/circulator models built from measured degradation data.

A :class:`DegradationRecord` holds, per applied backward power, the lowest
isolation and highest insertion loss seen at that power, plus the hottest
surface temperature when it was measured. Queries interpolate linearly
between measured powers and clamp outside them. Breakdown is a step event:
past it the component is destroyed and only its destroyed insertion loss
is meaningful.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

from .errors import ComponentDestroyed, UndefinedPath
from .magneto_optics import FaradayStage, stage_point
from .units import db_to_ratio

# "larger than 80 dB" after destruction; 100 dB stands in for the unmeasured value
DESTROYED_INSERTION_LOSS_DB = 100.0
DESTROYED_THRESHOLD_DB = 80.0
MEASUREMENT_ACCURACY_DB = 1.0
AMBIENT_C = 25.0

ISOLATION_PATHS = ((2, 1), (3, 2), (3, 1))
INSERTION_PATHS = {(1, 2): (2, 1), (2, 3): (3, 2)}


@dataclass(frozen=True)
class ComponentSpec:
    model_id: str
    kind: str = "isolator"
    spec_min_isolation: float = 0.0
    max_operating_power: float = math.inf
    temp_range: tuple[float, float] | None = None
    initial_insertion_loss: float | None = None
    initial_isolation: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("isolator", "circulator"):
            raise ValueError(f"kind must be 'isolator' or 'circulator', got {self.kind!r}")
        if not self.max_operating_power > 0:
            raise ValueError("max_operating_power must be positive")
        for name in ("spec_min_isolation", "initial_isolation"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0 dB")
        if self.initial_insertion_loss is not None and self.initial_insertion_loss < 0:
            raise ValueError("initial_insertion_loss must be >= 0 dB")

    @property
    def conforms(self) -> bool:
        """Initial isolation meets the datasheet minimum."""
        return self.initial_isolation >= self.spec_min_isolation


class DegradationPoint(NamedTuple):
    power_w: float
    isolation_db: float
    insertion_loss_db: float | None
    temp_c: float | None


class Breakdown(NamedTuple):
    power_w: float
    exposure_s: float
    insertion_loss_db: float | None = None


class PermanentDecrease(NamedTuple):
    power_w: float
    decrease_db: float


class RecoveryAnchor(NamedTuple):
    """Two ends of a post-exposure recovery trace at one port pair."""

    hot_temp_c: float
    hot_isolation_db: float
    cool_temp_c: float
    cool_isolation_db: float
    elapsed_s: float


@dataclass(frozen=True)
class DegradationRecord:
    """Measured response of one sample (one port pair for circulators).

    ``holds`` pins the exposure time used at specific powers and
    ``base_exposure_s`` overrides the procedure's default hold; both come
    from the fixture and only matter to the bench emulator.
    """

    spec: ComponentSpec
    points: tuple[DegradationPoint, ...]
    breakdown: Breakdown | None = None
    permanent_decrease: PermanentDecrease | None = None
    holds: tuple[tuple[float, float], ...] = ()
    base_exposure_s: float | None = None
    recovery: RecoveryAnchor | None = None
    _powers: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.points:
            raise ValueError("record needs at least the initial 0 W point")
        if self.points[0].power_w != 0.0:
            raise ValueError("first point must be at 0 W")
        powers = tuple(p.power_w for p in self.points)
        for a, b in zip(powers, powers[1:]):
            if not b > a:
                raise ValueError(f"powers must be strictly increasing ({a} then {b})")
        for p in self.points:
            if p.isolation_db < 0 or (p.insertion_loss_db is not None and p.insertion_loss_db < 0):
                raise ValueError(f"negative dB value at {p.power_w} W")
        first = self.points[0]
        if first.isolation_db != self.spec.initial_isolation:
            raise ValueError("0 W isolation differs from spec.initial_isolation")
        if (self.spec.initial_insertion_loss is not None
                and first.insertion_loss_db != self.spec.initial_insertion_loss):
            raise ValueError("0 W insertion loss differs from spec.initial_insertion_loss")
        if self.breakdown is not None:
            if self.breakdown.power_w <= 0 or self.breakdown.exposure_s < 0:
                raise ValueError("breakdown needs positive power and non-negative exposure")
            il = self.destroyed_insertion_loss_db
            if self.spec.kind == "isolator" and not (il is not None and il > DESTROYED_THRESHOLD_DB):
                raise ValueError(f"destroyed isolator needs insertion loss > {DESTROYED_THRESHOLD_DB} dB")
        object.__setattr__(self, "_powers", powers)

    @property
    def model_id(self) -> str:
        return self.spec.model_id

    @property
    def powers(self) -> tuple[float, ...]:
        return self._powers

    @property
    def initial_isolation(self) -> float:
        return self.points[0].isolation_db

    @property
    def destroyed_insertion_loss_db(self) -> float | None:
        """Forward loss once broken; ``None`` if it was never measured."""
        if self.breakdown is None:
            return None
        if self.breakdown.insertion_loss_db is not None:
            return self.breakdown.insertion_loss_db
        return DESTROYED_INSERTION_LOSS_DB if self.spec.kind == "isolator" else None

    @property
    def has_temperature(self) -> bool:
        return any(p.temp_c is not None for p in self.points)

    def hold_at(self, power: float) -> float | None:
        for p, t in self.holds:
            if math.isclose(p, power, rel_tol=0.0, abs_tol=1e-9):
                return t
        return None


def _interp(xs: Sequence[float], ys: Sequence[float], x: float) -> float:
    if x <= xs[0]:
        return ys[0]
    if x >= xs[-1]:
        return ys[-1]
    i = bisect_right(xs, x) - 1
    x0, x1 = xs[i], xs[i + 1]
    if x == x0:
        return ys[i]
    w = (x - x0) / (x1 - x0)
    return ys[i] + w * (ys[i + 1] - ys[i])


def _check_power(power: float) -> None:
    if not power >= 0:
        raise ValueError(f"power must be >= 0 W, got {power!r}")


def is_destroyed(record: DegradationRecord, power: float, exposure: float) -> bool:
    """True iff (power, exposure) reaches the recorded breakdown.

    A power strictly above the breakdown power destroys regardless of
    exposure; at the breakdown power the exposure must reach the
    recorded time.
    """
    _check_power(power)
    if exposure < 0:
        raise ValueError(f"exposure must be >= 0 s, got {exposure!r}")
    bd = record.breakdown
    if bd is None:
        return False
    return power > bd.power_w or (power >= bd.power_w and exposure >= bd.exposure_s)


def _guard(record: DegradationRecord, power: float, exposure: float) -> None:
    if is_destroyed(record, power, exposure):
        bd = record.breakdown
        raise ComponentDestroyed(
            f"{record.model_id} is destroyed at {power} W, {exposure} s "
            f"(breakdown {bd.power_w} W, {bd.exposure_s} s)"
        )


def isolation_at_power(record: DegradationRecord, power: float, exposure: float = 0.0) -> float:
    """Minimum isolation (dB) expected at ``power`` watts."""
    _check_power(power)
    _guard(record, power, exposure)
    value = _interp(record.powers, [p.isolation_db for p in record.points], power)
    return max(value, 0.0)


def insertion_loss_at_power(record: DegradationRecord, power: float, exposure: float = 0.0) -> float | None:
    """Forward loss at ``power``; the destroyed loss once broken."""
    _check_power(power)
    if is_destroyed(record, power, exposure):
        return record.destroyed_insertion_loss_db
    known = [(p.power_w, p.insertion_loss_db) for p in record.points if p.insertion_loss_db is not None]
    if not known:
        return None
    xs, ys = zip(*known)
    return max(_interp(xs, ys, power), 0.0)


def temperature_at_power(record: DegradationRecord, power: float) -> float | None:
    _check_power(power)
    known = [(p.power_w, p.temp_c) for p in record.points if p.temp_c is not None]
    if not known:
        return None
    xs, ys = zip(*known)
    return _interp(xs, ys, power)


def minimum_isolation(record: DegradationRecord) -> DegradationPoint:
    """Measured point with the lowest isolation (first one on ties)."""
    return min(record.points, key=lambda p: p.isolation_db)


def isolation_after_exposure(record: DegradationRecord, max_power_seen: float) -> float:
    """Cold (0 W) isolation after the sample has been driven to ``max_power_seen``."""
    pd = record.permanent_decrease
    if pd is not None and max_power_seen >= pd.power_w:
        return max(record.initial_isolation - pd.decrease_db, 0.0)
    return record.initial_isolation


def chain_isolation(stages: Sequence[float]) -> float:
    """Total attenuation of cascaded stages, dB."""
    for s in stages:
        if not math.isfinite(s):
            raise ValueError(f"chain values must be finite, got {s!r}")
    return math.fsum(stages)


def transmit(chain: Sequence[float], p_in: float) -> float:
    """Power (W) left after ``p_in`` passes through every stage in ``chain``."""
    if p_in < 0:
        raise ValueError(f"p_in must be >= 0 W, got {p_in!r}")
    return p_in * db_to_ratio(chain_isolation(chain))


def forward_transmit(record: DegradationRecord, p_in: float, power: float, exposure: float = 0.0) -> float:
    """Forward signal power through a sample that has seen ``power`` backward."""
    il = insertion_loss_at_power(record, power, exposure)
    if il is None:
        raise ValueError(f"{record.model_id}: insertion loss not known")
    return transmit([il], p_in)


@dataclass(frozen=True)
class CirculatorMatrix:
    """Isolation records of one three-port circulator keyed by (from, to)."""

    model_id: str
    paths: Mapping[tuple[int, int], DegradationRecord]

    def __post_init__(self) -> None:
        for pair in self.paths:
            if pair not in ISOLATION_PATHS:
                raise ValueError(f"{self.model_id}: {pair[0]}->{pair[1]} is not an isolation path")
        rec31 = self.paths.get((3, 1))
        if rec31 is not None:
            vals = [p.isolation_db for p in rec31.points]
            if max(vals) - min(vals) > MEASUREMENT_ACCURACY_DB:
                raise ValueError(f"{self.model_id}: 3->1 isolation must stay constant across power")
        bds = {r.breakdown[:2] for r in self.paths.values() if r.breakdown is not None}
        if len(bds) > 1:
            raise ValueError(f"{self.model_id}: port pairs disagree on breakdown {sorted(bds)}")

    @property
    def breakdown(self) -> tuple[float, float] | None:
        for r in self.paths.values():
            if r.breakdown is not None:
                return (r.breakdown.power_w, r.breakdown.exposure_s)
        return None

    def record(self, src: int, dst: int) -> DegradationRecord:
        if (src, dst) not in ISOLATION_PATHS:
            raise UndefinedPath(f"{self.model_id}: {src}->{dst} is not an isolation path")
        try:
            return self.paths[(src, dst)]
        except KeyError:
            raise UndefinedPath(f"{self.model_id}: isolation {src}->{dst} was not tested") from None

    def is_destroyed(self, power: float, exposure: float) -> bool:
        return any(is_destroyed(r, power, exposure) for r in self.paths.values())


def circulator_isolation(matrix: CirculatorMatrix, src: int, dst: int, power: float,
                         exposure: float = 0.0) -> float:
    """Isolation from port ``src`` to ``dst`` while ``power`` W is injected.

    2->1 and 3->2 follow their degradation curves; 3->1 has no optical
    coupling and is reported as its 0 W value.
    """
    rec = matrix.record(src, dst)
    _check_power(power)
    if matrix.is_destroyed(power, exposure):
        raise ComponentDestroyed(f"{matrix.model_id} is destroyed at {power} W, {exposure} s")
    if (src, dst) == (3, 1):
        return rec.initial_isolation
    return isolation_at_power(rec, power, exposure)


def circulator_insertion_loss(matrix: CirculatorMatrix, src: int, dst: int, power: float,
                              exposure: float = 0.0) -> float | None:
    """Forward loss on 1->2 or 2->3, read from the reverse isolation record."""
    if (src, dst) not in INSERTION_PATHS:
        raise UndefinedPath(f"{matrix.model_id}: {src}->{dst} is not an insertion path")
    rec = matrix.record(*INSERTION_PATHS[(src, dst)])
    return insertion_loss_at_power(rec, power, exposure)


@dataclass(frozen=True)
class ThermalResponse:
    """Steady surface temperature versus power, and cooling time constant."""

    ambient: float
    heating: tuple[tuple[float, float], ...]
    tau: float | None = None

    def __post_init__(self) -> None:
        if not self.heating or self.heating[0][0] != 0.0:
            raise ValueError("heating curve must start at 0 W")
        if self.heating[0][1] != self.ambient:
            raise ValueError("heating curve must give the ambient temperature at 0 W")
        for (p0, t0), (p1, t1) in zip(self.heating, self.heating[1:]):
            if not p1 > p0:
                raise ValueError("heating curve powers must increase")
            if t1 < t0:
                raise ValueError(f"heating curve must be nondecreasing ({t0} then {t1} degC)")
        if self.tau is not None and not self.tau > 0:
            raise ValueError("tau must be positive")

    @classmethod
    def from_record(cls, record: DegradationRecord, tau: float | None = None) -> ThermalResponse:
        """Heating curve from the record's temperature column.

        If ``tau`` is not given and the record carries recovery anchors,
        tau is fitted to them.
        """
        curve = [(p.power_w, p.temp_c) for p in record.points if p.temp_c is not None]
        if not curve:
            raise ValueError(f"{record.model_id} has no temperature data")
        if curve[0][0] != 0.0:
            curve.insert(0, (0.0, AMBIENT_C))
        ambient = curve[0][1]
        if tau is None and record.recovery is not None:
            r = record.recovery
            tau = fit_relaxation_tau(r.hot_temp_c, r.cool_temp_c, r.elapsed_s, ambient)
        return cls(ambient=ambient, heating=tuple(curve), tau=tau)


def surface_temperature(thermal: ThermalResponse, power: float) -> float:
    """Steady surface temperature (degC) at ``power`` W."""
    _check_power(power)
    xs, ys = zip(*thermal.heating)
    return _interp(xs, ys, power)


def cool_down(thermal: ThermalResponse, t0: float, elapsed: float) -> float:
    """Temperature ``elapsed`` seconds after switch-off from ``t0``."""
    if elapsed < 0:
        raise ValueError("elapsed must be >= 0 s")
    if thermal.tau is None:
        raise ValueError("thermal response has no relaxation time constant")
    if math.isinf(elapsed):
        return thermal.ambient
    return thermal.ambient + (t0 - thermal.ambient) * math.exp(-elapsed / thermal.tau)


def fit_relaxation_tau(t_start: float, t_end: float, elapsed: float, ambient: float = AMBIENT_C) -> float:
    """Time constant of an exponential decay through two temperatures."""
    if not (t_start > t_end > ambient) or elapsed <= 0:
        raise ValueError("need t_start > t_end > ambient and elapsed > 0")
    return elapsed / math.log((t_start - ambient) / (t_end - ambient))


def isolation_at_temperature(anchor: RecoveryAnchor, temp_c: float,
                             stage: FaradayStage | None = None) -> float:
    """Isolation associated with a surface temperature during recovery.

    Linear between the anchor's hot and cool ends (clamped to them); with
    a Faraday ``stage`` attached, the Malus model is used instead.
    """
    if stage is not None:
        return stage_point(stage, temp_c).isolation_db
    xs = (anchor.cool_temp_c, anchor.hot_temp_c)
    ys = (anchor.cool_isolation_db, anchor.hot_isolation_db)
    return _interp(xs, ys, temp_c)


def recovered_isolation(thermal: ThermalResponse, anchor: RecoveryAnchor, elapsed: float,
                        stage: FaradayStage | None = None) -> float:
    """Isolation ``elapsed`` seconds after switch-off from the anchor's hot end."""
    temp = cool_down(thermal, anchor.hot_temp_c, elapsed)
    return isolation_at_temperature(anchor, temp, stage)
