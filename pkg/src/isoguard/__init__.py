"""Fiber isolators and circulators under high-power backward illumination.

Temperature-dependent Faraday rotation, fixture-driven degradation
records, a test-bench emulator, and attack budgets for a QKD source
protected by a sacrificial isolation component.
"""

__version__ = "0.1.0"

from .attacks import (  # noqa: E402
    AttackReport,
    SourceArchitecture,
    TrojanBudget,
    distance_penalty,
    laser_damage_guard,
    laser_seeding_budget,
    load_architecture,
    recompute_verdict,
    trojan_horse_budget,
)
from .bench import (  # noqa: E402
    BenchLog,
    ProcedureConfig,
    Readings,
    SetupModel,
    estimate_from_readings,
    run_procedure,
    simulate_meters,
)
from .components import (  # noqa: E402
    CirculatorMatrix,
    ComponentSpec,
    DegradationRecord,
    ThermalResponse,
    chain_isolation,
    circulator_isolation,
    cool_down,
    insertion_loss_at_power,
    is_destroyed,
    isolation_at_power,
    recovered_isolation,
    transmit,
)
from .errors import (  # noqa: E402
    CalibrationDiverged,
    ComponentDestroyed,
    IsoguardError,
    MalformedFixture,
    MissingInitialRow,
    NonMonotonePower,
    NonPositiveReading,
    TemperatureOutOfRange,
    UndefinedPath,
)
from .fixtures import ingest_fixture, load_circulator  # noqa: E402
from .magneto_optics import (  # noqa: E402
    CalibrationResult,
    FaradayStage,
    MaterialParams,
    calibrate_material,
    isolation_curve,
    malus_insertion_loss,
    malus_isolation,
    rotation_angle,
    verdet_constant,
)
from .materials import default_material, load_material  # noqa: E402

__all__ = [name for name in dir() if not name.startswith("_")]
