"""Decibel helpers and power-string parsing."""

from __future__ import annotations

import math
import re

_POWER_RE = re.compile(
    r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(W|mW|uW|µW|μW|nW|pW)?\s*$"
)

_POWER_SCALE = {
    None: 1.0,
    "W": 1.0,
    "mW": 1e-3,
    "uW": 1e-6,
    "µW": 1e-6,  # micro sign
    "μW": 1e-6,  # greek mu
    "nW": 1e-9,
    "pW": 1e-12,
}


def db_to_ratio(db: float) -> float:
    """Linear power ratio corresponding to an attenuation of ``db``."""
    return 10.0 ** (-db / 10.0)


def ratio_to_db(ratio: float) -> float:
    """Attenuation in dB for a linear power ratio in (0, 1]."""
    if ratio <= 0.0:
        raise ValueError(f"ratio must be positive, got {ratio!r}")
    return -10.0 * math.log10(ratio)


def watts_to_dbm(power_w: float) -> float:
    return 10.0 * math.log10(power_w * 1e3)


def dbm_to_watts(power_dbm: float) -> float:
    return 10.0 ** (power_dbm / 10.0) * 1e-3


def parse_power(text: str | float) -> float:
    """Parse ``"10"``, ``"190mW"``, ``"100 nW"`` ... into watts.

    Bare numbers are watts. Raises ``ValueError`` on anything else.
    """
    if isinstance(text, (int, float)):
        return float(text)
    m = _POWER_RE.match(text)
    if m is None:
        raise ValueError(f"cannot parse power {text!r} (expected e.g. 10, 190mW, 100nW)")
    return float(m.group(1)) * _POWER_SCALE[m.group(2)]


def fmt(x: float | None) -> str:
    """Stable text form for floats in data files (no locale, no timestamps)."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    return format(float(x), ".10g")
