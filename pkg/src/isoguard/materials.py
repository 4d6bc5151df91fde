"""Material parameter files and the default garnet sets.

Parameter files are flat ``key = value`` text::

    name = YIG
    a_coef = 1e+16
    ...

The shipped defaults (TGG, YIG, BiYIG) are not literature values. They
are produced by :func:`calibrate_defaults`, which fits each garnet to a
small set of isolation anchors for a 44.43 deg single-stage isolator.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

from .magneto_optics import CalibrationResult, FaradayStage, MaterialParams, calibrate_material

MATERIAL_KEYS = (
    ("name", "name"),
    ("a_coef", "a_coef"),
    ("b_coef", "b_coef"),
    ("c_coef", "c_coef"),
    ("lambda0_m", "lambda0"),
    ("t_curie_k", "t_curie"),
    ("t_valid_min_c", "t_valid_min_c"),
    ("t_valid_max_c", "t_valid_max_c"),
)

DEFAULT_THETA_REF = 44.43

# (temperature degC, isolation dB) targets per garnet.
DEFAULT_ANCHORS: dict[str, list[tuple[float, float]]] = {
    # 40 dB at room temperature, ~10 dB lower at 70 degC, ~15 dB at 175 degC
    "YIG": [(25.0, 40.0), (70.0, 30.0), (175.0, 15.0)],
    # pure Curie law, theta ~ 1/T, for a 44.43 deg rotator
    "TGG": [(25.0, 40.04509880924503), (70.0, 19.061707911765183), (175.0, 11.494264934929834)],
    # temperature-compensated: never below 40 dB up to 180 degC
    "BiYIG": [(-20.0, 40.04), (25.0, 40.04), (180.0, 41.0)],
}

INITIAL_GUESS: dict[str, MaterialParams] = {
    "YIG": MaterialParams("YIG", a_coef=1.0e16, b_coef=14000.0, c_coef=400.0,
                          lambda0=4.5e-7, t_curie=559.0),
    "TGG": MaterialParams("TGG", a_coef=8.0e16, b_coef=0.0, c_coef=0.0,
                          lambda0=2.58e-7, t_curie=10.0),
    "BiYIG": MaterialParams("BiYIG", a_coef=1.0e16, b_coef=2500.0, c_coef=400.0,
                            lambda0=4.5e-7, t_curie=470.0, t_valid_max_c=180.0),
}


def parse_material(text: str, source: str = "<material>") -> MaterialParams:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    known = dict(MATERIAL_KEYS)
    unknown = set(values) - set(known)
    if unknown:
        raise ValueError(f"{source}: unknown keys {sorted(unknown)}")
    missing = [k for k in known if k not in values and k not in ("t_valid_min_c", "t_valid_max_c")]
    if missing:
        raise ValueError(f"{source}: missing keys {missing}")
    kwargs: dict[str, object] = {}
    for key, attr in MATERIAL_KEYS:
        if key not in values:
            continue
        if attr == "name":
            kwargs[attr] = values[key]
        else:
            try:
                kwargs[attr] = float(values[key])
            except ValueError:
                raise ValueError(f"{source}: {key} is not a number: {values[key]!r}") from None
    try:
        return MaterialParams(**kwargs)  # type: ignore[arg-type]
    except ValueError as exc:
        raise ValueError(f"{source}: {exc}") from None


def format_material(material: MaterialParams, header: str | None = None) -> str:
    lines = []
    if header:
        lines.extend(f"# {h}" for h in header.splitlines())
    for key, attr in MATERIAL_KEYS:
        value = getattr(material, attr)
        lines.append(f"{key} = {value if attr == 'name' else repr(float(value))}")
    return "\n".join(lines) + "\n"


def load_material(path: str | Path) -> MaterialParams:
    path = Path(path)
    return parse_material(path.read_text(encoding="utf-8"), source=str(path))


def default_material(name: str) -> MaterialParams:
    """Shipped parameter set by case-insensitive name (tgg, yig, biyig)."""
    key = name.strip().lower().replace(":", "").replace("-", "")
    if key not in {"tgg", "yig", "biyig"}:
        raise KeyError(f"no default material {name!r}; choose tgg, yig or biyig")
    text = resources.files("isoguard").joinpath(f"data/materials/{key}.txt").read_text(encoding="utf-8")
    return parse_material(text, source=f"{key}.txt")


def calibrate_defaults() -> dict[str, CalibrationResult]:
    """Re-run the calibrations that produced the shipped parameter files."""
    out = {}
    for name, anchors in DEFAULT_ANCHORS.items():
        initial = INITIAL_GUESS[name]
        stage = FaradayStage(initial, DEFAULT_THETA_REF)
        out[name] = calibrate_material(anchors, stage, initial)
    return out


def write_defaults(directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, result in calibrate_defaults().items():
        anchors = ", ".join(f"({t:g} C, {a:.4g} dB)" for t, a in DEFAULT_ANCHORS[name])
        header = (f"{name}: calibrated to isolation anchors {anchors}\n"
                  f"theta_ref = {DEFAULT_THETA_REF} deg at 25 C, beta = 45 deg; "
                  f"max anchor error {result.max_error_db:.3g} dB")
        (directory / f"{name.lower()}.txt").write_text(format_material(result.material, header),
                                                        encoding="utf-8")


__all__ = [
    "DEFAULT_ANCHORS",
    "DEFAULT_THETA_REF",
    "calibrate_defaults",
    "default_material",
    "format_material",
    "load_material",
    "parse_material",
    "write_defaults",
]
