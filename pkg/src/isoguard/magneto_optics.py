"""Temperature-dependent Faraday rotation and Malus-law isolation.

The Verdet constant of a rare-earth garnet is modelled as a paramagnetic
term plus a gyromagnetic term sharing one pole at the Curie temperature,
plus a temperature-independent offset::

    V(T) = -A * lambda0**2 / (T - T_w) + B / (T - T_w) + C

Magnetic field and crystal length are held fixed, so the rotation angle
scales with V(T)/V(T_ref) from a reference angle ``theta_ref``. Isolation
and insertion loss follow from Malus's law on the analyzer at angle
``beta``.

Angles are degrees at the API boundary and radians internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import least_squares

from .errors import CalibrationDiverged, TemperatureOutOfRange

ZERO_CELSIUS_K = 273.15
DEFAULT_CAP_DB = 120.0
DEFAULT_T_VALID_C = (-20.0, 175.0)


@dataclass(frozen=True)
class MaterialParams:
    """Verdet-model coefficients for one magneto-optic garnet.

    Parameters
    ----------
    name:
        Material label (``TGG``, ``YIG``, ``BiYIG`` or anything custom).
    a_coef:
        Paramagnetic strength A, rad K T^-1 m^-1 m^-2.
    b_coef:
        Gyromagnetic strength B, rad K T^-1 m^-1. Not the magnetic field.
    c_coef:
        Temperature-independent offset C, rad T^-1 m^-1.
    lambda0:
        Wavelength of the dominant electronic transition, m.
    t_curie:
        Pole of the model (Curie temperature T_w), K. Must lie outside
        the validity range so the model is finite wherever it is used.
    t_valid_min_c, t_valid_max_c:
        Temperature range (degC) where the parameters are trusted.
    """

    name: str
    a_coef: float
    b_coef: float
    c_coef: float
    lambda0: float
    t_curie: float
    t_valid_min_c: float = DEFAULT_T_VALID_C[0]
    t_valid_max_c: float = DEFAULT_T_VALID_C[1]

    def __post_init__(self) -> None:
        if not self.lambda0 > 0:
            raise ValueError(f"lambda0 must be positive, got {self.lambda0!r}")
        if not self.t_valid_min_c < self.t_valid_max_c:
            raise ValueError("validity range must satisfy t_valid_min_c < t_valid_max_c")
        lo = self.t_valid_min_c + ZERO_CELSIUS_K
        hi = self.t_valid_max_c + ZERO_CELSIUS_K
        if lo <= self.t_curie <= hi:
            raise ValueError(
                f"t_curie={self.t_curie} K lies inside the validity range "
                f"[{lo}, {hi}] K of {self.name}"
            )
        for name in ("a_coef", "b_coef", "c_coef", "t_curie"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def pole_above_range(self) -> bool:
        return self.t_curie > self.t_valid_max_c + ZERO_CELSIUS_K

    def contains(self, temperature_c: float, slack: float = 1e-9) -> bool:
        return self.t_valid_min_c - slack <= temperature_c <= self.t_valid_max_c + slack


@dataclass(frozen=True)
class FaradayStage:
    """Single-stage isolator: input polarizer, rotator, analyzer at ``beta``.

    ``theta_ref`` is the rotation at ``t_ref`` and absorbs the fixed
    field-times-length product.
    """

    material: MaterialParams
    theta_ref: float
    t_ref: float = 25.0
    beta: float = 45.0
    cap_db: float = DEFAULT_CAP_DB

    def __post_init__(self) -> None:
        if not 0.0 < self.theta_ref < 90.0:
            raise ValueError(f"theta_ref must be in (0, 90) degrees, got {self.theta_ref!r}")
        if not 0.0 <= self.beta <= 90.0:
            raise ValueError(f"beta must be in [0, 90] degrees, got {self.beta!r}")
        if not self.cap_db > 0:
            raise ValueError("cap_db must be positive")
        _check_range(self.material, self.t_ref)


class IsolationPoint(NamedTuple):
    temperature_c: float
    isolation_db: float
    insertion_loss_db: float
    capped: bool


def _check_range(material: MaterialParams, temperature_c: float) -> None:
    if not material.contains(temperature_c):
        raise TemperatureOutOfRange(
            f"{temperature_c} degC is outside the validity range "
            f"[{material.t_valid_min_c}, {material.t_valid_max_c}] degC of {material.name}"
        )


def verdet_constant(material: MaterialParams, temperature: float) -> float:
    """Verdet constant (rad T^-1 m^-1) at ``temperature`` in kelvin."""
    _check_range(material, temperature - ZERO_CELSIUS_K)
    m = material
    dt = temperature - m.t_curie
    return -m.a_coef * m.lambda0**2 / dt + m.b_coef / dt + m.c_coef


def rotation_angle(stage: FaradayStage, temperature: float) -> float:
    """Faraday rotation in degrees at ``temperature`` (degC)."""
    if temperature == stage.t_ref:
        return stage.theta_ref
    v_ref = verdet_constant(stage.material, stage.t_ref + ZERO_CELSIUS_K)
    if v_ref == 0.0:
        raise ValueError(f"{stage.material.name}: Verdet constant vanishes at t_ref")
    v = verdet_constant(stage.material, temperature + ZERO_CELSIUS_K)
    return stage.theta_ref * (v / v_ref)


def _malus_db(angle_deg: float, cap_db: float) -> float:
    c2 = math.cos(math.radians(angle_deg)) ** 2
    # cos^2 at or below 10^(-cap/10) means the cap is reached (includes exact zero)
    if c2 <= 10.0 ** (-cap_db / 10.0):
        return cap_db
    return -10.0 * math.log10(c2)


def malus_isolation(beta: float, theta: float, cap_db: float = DEFAULT_CAP_DB) -> float:
    """Backward isolation -10 log10 cos^2(beta + theta), capped at ``cap_db``."""
    return _malus_db(beta + theta, cap_db)


def malus_insertion_loss(beta: float, theta: float, cap_db: float = DEFAULT_CAP_DB) -> float:
    """Forward insertion loss -10 log10 cos^2(beta - theta)."""
    return _malus_db(beta - theta, cap_db)


def stage_point(stage: FaradayStage, temperature: float) -> IsolationPoint:
    theta = rotation_angle(stage, temperature)
    iso = malus_isolation(stage.beta, theta, stage.cap_db)
    il = malus_insertion_loss(stage.beta, theta, stage.cap_db)
    return IsolationPoint(temperature, iso, il, iso >= stage.cap_db)


def temperature_grid(t_min: float, t_max: float, step: float) -> list[float]:
    """Inclusive grid ``t_min + i*step``; shared points agree across step sizes."""
    if not step > 0:
        raise ValueError("step must be positive")
    if t_max < t_min:
        raise ValueError("t_max must not be below t_min")
    n = int(math.floor((t_max - t_min) / step + 1e-9))
    return [round(t_min + i * step, 9) for i in range(n + 1)]


def isolation_curve(
    stage: FaradayStage, t_min: float, t_max: float, step: float
) -> list[IsolationPoint]:
    """Isolation and insertion loss sampled over ``[t_min, t_max]`` degC."""
    _check_range(stage.material, t_min)
    _check_range(stage.material, t_max)
    return [stage_point(stage, t) for t in temperature_grid(t_min, t_max, step)]


def curve_to_csv(points: Sequence[IsolationPoint]) -> str:
    from .units import fmt

    lines = ["temperature_c,isolation_db,insertion_loss_db,capped"]
    for p in points:
        lines.append(
            f"{fmt(p.temperature_c)},{fmt(p.isolation_db)},{fmt(p.insertion_loss_db)},"
            f"{'true' if p.capped else 'false'}"
        )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CalibrationResult:
    material: MaterialParams
    rms_error_db: float
    max_error_db: float
    tolerance_db: float
    anchor_errors_db: tuple[float, ...] = field(default=())

    @property
    def poor(self) -> bool:
        """True when some anchor misses by more than the declared tolerance."""
        return self.max_error_db > self.tolerance_db


def _anchor_errors(stage: FaradayStage, anchors: Sequence[tuple[float, float]]) -> np.ndarray:
    return np.array(
        [malus_isolation(stage.beta, rotation_angle(stage, t), stage.cap_db) - target
         for t, target in anchors]
    )


def calibrate_material(
    anchors: Sequence[tuple[float, float]],
    stage: FaradayStage,
    initial: MaterialParams,
    tolerance_db: float = 2.0,
) -> CalibrationResult:
    """Fit ``b_coef`` and ``t_curie`` so the stage hits the isolation anchors.

    A and B only enter through ``B - A*lambda0**2`` and the overall scale
    cancels in V(T)/V(t_ref), so ``a_coef``, ``lambda0`` and ``c_coef``
    are kept from ``initial`` and only ``b_coef`` and ``t_curie`` move.
    The pole stays on the same side of the validity range as in
    ``initial``.

    Parameters
    ----------
    anchors:
        ``(temperature_c, isolation_db)`` pairs, at least three.
    stage:
        Template stage; its material is replaced during the fit.
    initial:
        Starting parameters, which also carry the validity range.
    tolerance_db:
        Largest anchor miss accepted before the result is flagged poor.

    Raises
    ------
    CalibrationDiverged
        If the fitted residual is not below that of ``initial``.
    """
    if len(anchors) < 3:
        raise ValueError("calibration needs at least three anchors")
    for t, _ in anchors:
        _check_range(initial, t)

    lo_k = initial.t_valid_min_c + ZERO_CELSIUS_K
    hi_k = initial.t_valid_max_c + ZERO_CELSIUS_K
    if initial.pole_above_range:
        tw_bounds = (hi_k + 0.5, hi_k + 5000.0)
    else:
        tw_bounds = (lo_k - 5000.0, lo_k - 0.5)

    def build(x: np.ndarray) -> MaterialParams:
        return replace(initial, b_coef=float(x[0]), t_curie=float(x[1]))

    def residuals(x: np.ndarray) -> np.ndarray:
        try:
            trial = replace(stage, material=build(x))
            return _anchor_errors(trial, anchors)
        except (ValueError, ZeroDivisionError):
            return np.full(len(anchors), 1e3)

    x0 = np.array([initial.b_coef, initial.t_curie])
    x0[1] = min(max(x0[1], tw_bounds[0]), tw_bounds[1])
    r0 = residuals(x0)
    cost0 = float(r0 @ r0)

    fit = least_squares(
        residuals,
        x0,
        bounds=([-np.inf, tw_bounds[0]], [np.inf, tw_bounds[1]]),
        x_scale="jac",
        xtol=1e-14,
        ftol=1e-14,
        gtol=1e-14,
        max_nfev=5000,
    )
    r = residuals(fit.x)
    cost = float(r @ r)
    stalled = cost >= cost0 and math.sqrt(cost0 / len(anchors)) > tolerance_db
    if not math.isfinite(cost) or cost > cost0 or stalled:
        raise CalibrationDiverged(
            f"calibration of {initial.name} did not improve on the initial guess "
            f"(sum sq {cost0:.4g} -> {cost:.4g} dB^2)"
        )
    best = build(fit.x) if cost < cost0 else build(x0)
    r = r if cost < cost0 else r0
    return CalibrationResult(
        material=best,
        rms_error_db=float(math.sqrt(float(r @ r) / len(r))),
        max_error_db=float(np.max(np.abs(r))),
        tolerance_db=tolerance_db,
        anchor_errors_db=tuple(float(e) for e in r),
    )


def max_rotation_deviation(stage: FaradayStage, t_min: float, t_max: float, step: float = 1.0) -> float:
    """Largest |theta(T) - theta_ref| in degrees over a temperature grid."""
    return max(abs(rotation_angle(stage, t) - stage.theta_ref)
               for t in temperature_grid(t_min, t_max, step))

