"""Light-injection attack budgets for a QKD source with a sacrificial isolator.

The sacrificial component is the first thing injected light meets. Its
residual isolation (the lowest it falls to under attack) caps the power
reaching the rest of the source, but it is never credited towards the
isolation the source needs: budgets start from the component behind it.

Threshold comparisons favour the attacker: seeding succeeds when the
cavity power is at or above the threshold, and the downstream optics are
safe only when the transmitted power is strictly below the damage
threshold.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

from .components import (
    DESTROYED_INSERTION_LOSS_DB,
    DegradationRecord,
    chain_isolation,
    is_destroyed,
    isolation_at_power,
    minimum_isolation,
    transmit,
)
from .units import fmt, parse_power

SEEDING_THRESHOLD_W = 1e-7
DAMAGE_THRESHOLD_W = 0.190
LASER_BUILTIN_ISOLATION_DB = 30.0

VERDICTS = ("safe", "denial_of_service", "compromised", "attack_fails", "attack_succeeds")


@dataclass(frozen=True)
class SourceArchitecture:
    """Attenuation chain from the channel back to the laser cavity.

    ``downstream_isolation`` lists what sits between the sacrificial
    component and the laser (attenuator, further isolators), in dB.
    """

    sacrificial: DegradationRecord
    downstream_isolation: tuple[float, ...] = ()
    laser_builtin_isolation: float = LASER_BUILTIN_ISOLATION_DB
    seeding_threshold: float = SEEDING_THRESHOLD_W
    damage_threshold_downstream: float = DAMAGE_THRESHOLD_W
    fiber_loss_slope: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "downstream_isolation", tuple(float(x) for x in self.downstream_isolation))
        for x in (*self.downstream_isolation, self.laser_builtin_isolation):
            if not (math.isfinite(x) and x >= 0):
                raise ValueError(f"isolation values must be finite and >= 0 dB, got {x!r}")
        if not (self.seeding_threshold > 0 and self.damage_threshold_downstream > 0):
            raise ValueError("thresholds must be positive")
        if self.fiber_loss_slope is not None and not self.fiber_loss_slope > 0:
            raise ValueError("fiber_loss_slope must be positive")

    @property
    def protected_chain(self) -> tuple[float, ...]:
        """Isolation credited to the source: everything but the sacrificial part."""
        return (*self.downstream_isolation, self.laser_builtin_isolation)


@dataclass(frozen=True)
class AttackReport:
    kind: str
    injected_power_w: float
    residual_isolation_db: float | None
    power_after_sacrificial_w: float
    power_at_target_w: float
    threshold_w: float
    verdict: str
    required_extra_isolation_db: float
    margin_db: float
    destroyed: bool = False
    exposure_s: float | None = None
    attenuator_bound_db: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps({k: _jsonable(v) for k, v in self.to_dict().items()}, indent=2) + "\n"


REPORT_FIELDS = tuple(f for f in AttackReport.__dataclass_fields__)


def _jsonable(v: object) -> object:
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else "-inf" if v < 0 else "nan"
    return v


def reports_to_csv(reports: Sequence[AttackReport]) -> str:
    lines = [",".join(REPORT_FIELDS)]
    for r in reports:
        cells = []
        for name in REPORT_FIELDS:
            v = getattr(r, name)
            cells.append(v if isinstance(v, str) else fmt(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def residual_isolation(record: DegradationRecord, power: float | None = None) -> float:
    """Worst-case isolation of the sacrificial part, or its value at ``power``."""
    if power is None:
        return minimum_isolation(record).isolation_db
    return isolation_at_power(record, power)


def _db_ratio(num: float, den: float) -> float:
    if num <= 0:
        return -math.inf
    return 10.0 * math.log10(num / den)


def laser_seeding_budget(arch: SourceArchitecture, p_inject: float, mode: str = "worst") -> AttackReport:
    """Power reaching the laser cavity and the isolation needed to stop seeding.

    ``mode="worst"`` uses the lowest isolation on the sacrificial curve;
    ``mode="point"`` uses the curve value at ``p_inject``. Destruction of
    the sacrificial part is not considered here (see
    :func:`laser_damage_guard`).
    """
    if not p_inject > 0:
        raise ValueError("p_inject must be positive")
    if mode not in ("worst", "point"):
        raise ValueError(f"mode must be 'worst' or 'point', got {mode!r}")
    residual = residual_isolation(arch.sacrificial, None if mode == "worst" else p_inject)
    after = transmit([residual], p_inject)
    at_cavity = transmit(arch.protected_chain, after)
    required = _db_ratio(after, arch.seeding_threshold)
    verdict = "attack_succeeds" if at_cavity >= arch.seeding_threshold else "attack_fails"
    return AttackReport(
        kind="laser_seeding",
        injected_power_w=p_inject,
        residual_isolation_db=residual,
        power_after_sacrificial_w=after,
        power_at_target_w=at_cavity,
        threshold_w=arch.seeding_threshold,
        verdict=verdict,
        required_extra_isolation_db=required,
        margin_db=chain_isolation(arch.protected_chain) - required,
        attenuator_bound_db=required - arch.laser_builtin_isolation,
    )


def laser_damage_guard(arch: SourceArchitecture, p_inject: float, exposure: float = 0.0) -> AttackReport:
    """Classify a high-power injection as safe, compromised or denial of service."""
    if p_inject < 0:
        raise ValueError("p_inject must be >= 0")
    rec = arch.sacrificial
    destroyed = is_destroyed(rec, p_inject, exposure)
    if destroyed:
        il = rec.destroyed_insertion_loss_db
        residual = il if il is not None else DESTROYED_INSERTION_LOSS_DB
        verdict = "denial_of_service"
    else:
        residual = isolation_at_power(rec, p_inject, exposure)
    after = transmit([residual], p_inject)
    threshold = arch.damage_threshold_downstream
    if not destroyed:
        verdict = "safe" if after < threshold else "compromised"
    required = max(_db_ratio(after, threshold), 0.0)
    return AttackReport(
        kind="laser_damage",
        injected_power_w=p_inject,
        residual_isolation_db=residual,
        power_after_sacrificial_w=after,
        power_at_target_w=after,
        threshold_w=threshold,
        verdict=verdict,
        required_extra_isolation_db=required,
        margin_db=-_db_ratio(after, threshold),
        destroyed=destroyed,
        exposure_s=exposure,
    )


def recompute_verdict(report: AttackReport) -> str:
    """Re-derive a verdict from a report's numeric fields alone."""
    if report.kind == "laser_seeding":
        return "attack_succeeds" if report.power_at_target_w >= report.threshold_w else "attack_fails"
    if report.destroyed:
        return "denial_of_service"
    return "safe" if report.power_at_target_w < report.threshold_w else "compromised"


class TrojanBudget(NamedTuple):
    multiplier: float
    orders: float


def trojan_horse_budget(delta_isolation: float) -> TrojanBudget:
    """Growth of back-reflected photon number when isolation drops by ``delta_isolation`` dB.

    Single pass, linear in injected power: the multiplier is
    10**(delta/10), i.e. delta/10 orders of magnitude.
    """
    if delta_isolation < 0:
        raise ValueError("delta_isolation must be >= 0 dB")
    return TrojanBudget(10.0 ** (delta_isolation / 10.0), delta_isolation / 10.0)


def distance_penalty(delta_isolation: float, slope: float) -> float:
    """Reach lost (km) if ``delta_isolation`` dB must be made up by fiber at ``slope`` dB/km."""
    if not slope > 0:
        raise ValueError("slope must be positive")
    return delta_isolation / slope


@dataclass
class ArchitectureFile:
    """Parsed architecture file, before the fixture is loaded."""

    sacrificial_fixture: str
    downstream_isolation: tuple[float, ...] = ()
    laser_builtin_isolation: float = LASER_BUILTIN_ISOLATION_DB
    seeding_threshold: float = SEEDING_THRESHOLD_W
    damage_threshold_downstream: float = DAMAGE_THRESHOLD_W
    fiber_loss_slope: float | None = None


_ARCH_KEYS = {
    "sacrificial_fixture",
    "downstream_isolation_db",
    "laser_builtin_isolation_db",
    "seeding_threshold_w",
    "damage_threshold_downstream_w",
    "fiber_loss_slope_db_per_km",
}


def parse_architecture(text: str, source: str = "<architecture>") -> ArchitectureFile:
    """Parse ``key = value`` architecture text (powers accept mW/uW/nW suffixes)."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _ARCH_KEYS:
            raise ValueError(f"{source}:{lineno}: unknown key {key!r}")
        values[key] = value
    if "sacrificial_fixture" not in values:
        raise ValueError(f"{source}: sacrificial_fixture is required")
    try:
        downstream = tuple(float(x) for x in values.get("downstream_isolation_db", "").split(",") if x.strip())
        return ArchitectureFile(
            sacrificial_fixture=values["sacrificial_fixture"],
            downstream_isolation=downstream,
            laser_builtin_isolation=float(values.get("laser_builtin_isolation_db", LASER_BUILTIN_ISOLATION_DB)),
            seeding_threshold=parse_power(values.get("seeding_threshold_w", str(SEEDING_THRESHOLD_W))),
            damage_threshold_downstream=parse_power(
                values.get("damage_threshold_downstream_w", str(DAMAGE_THRESHOLD_W))),
            fiber_loss_slope=(float(values["fiber_loss_slope_db_per_km"])
                              if "fiber_loss_slope_db_per_km" in values else None),
        )
    except ValueError as exc:
        raise ValueError(f"{source}: {exc}") from None


def load_architecture(path: str | Path) -> SourceArchitecture:
    """Read an architecture file and the sacrificial fixture it points to.

    Relative fixture paths resolve against the architecture file's
    directory first, then the fixture search path.
    """
    from .fixtures import find_fixture, parse_fixture

    path = Path(path)
    parsed = parse_architecture(path.read_text(encoding="utf-8"), source=str(path))
    fixture_path = find_fixture(parsed.sacrificial_fixture, base=path.parent)
    record = parse_fixture(fixture_path.read_text(encoding="utf-8"), source=str(fixture_path))
    return SourceArchitecture(
        sacrificial=record,
        downstream_isolation=parsed.downstream_isolation,
        laser_builtin_isolation=parsed.laser_builtin_isolation,
        seeding_threshold=parsed.seeding_threshold,
        damage_threshold_downstream=parsed.damage_threshold_downstream,
        fiber_loss_slope=parsed.fiber_loss_slope,
    )
