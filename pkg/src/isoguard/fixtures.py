"""Reading degradation fixtures (one CSV per sample or port pair).

Layout::

    # free-text comment
    #model,ISO PM 2
    #kind,isolator
    #hold,3.37,820
    power_w,isolation_db,insertion_loss_db,temp_c
    0,37.0,0.50,25
    ...
    #breakdown,3.8,90

Lines starting with ``#`` followed directly by a key are metadata; ``# ``
(hash, space) starts a comment. Empty ``insertion_loss_db``/``temp_c``
cells mean "not measured". Circulators use one file per port pair named
``<model>_<i>to<j>.csv``.
"""

from __future__ import annotations

import os
import re
from importlib import resources
from pathlib import Path

from .components import (
    Breakdown,
    CirculatorMatrix,
    ComponentSpec,
    DegradationPoint,
    DegradationRecord,
    PermanentDecrease,
    RecoveryAnchor,
)
from .errors import MalformedFixture, MissingInitialRow, NonMonotonePower

HEADER = ("power_w", "isolation_db", "insertion_loss_db", "temp_c")
FIXTURE_PATH_ENV = "ISOGUARD_FIXTURE_PATH"

_META_ARITY = {
    "model": (1, 1),
    "kind": (1, 1),
    "spec_min_isolation_db": (1, 1),
    "max_operating_power_w": (1, 1),
    "temp_range_c": (2, 2),
    "base_exposure_s": (1, 1),
    "hold": (2, 2),
    "permanent_decrease": (2, 2),
    "recovery": (5, 5),
    "breakdown": (2, 3),
}
_PAIR_RE = re.compile(r"^(?P<model>.+)_(?P<i>[123])to(?P<j>[123])$")


def _num(text: str, what: str, lineno: int, source: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise MalformedFixture(f"{what} is not a number: {text!r}", lineno, source) from None


def parse_fixture(text: str, source: str = "<fixture>") -> DegradationRecord:
    """Validate fixture text and build a :class:`DegradationRecord`."""
    meta: dict[str, list[list[str]]] = {}
    rows: list[tuple[int, DegradationPoint]] = []
    header_seen = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("# ") or line == "#":
            continue
        if line.startswith("#"):
            key, *vals = [c.strip() for c in line[1:].split(",")]
            if key not in _META_ARITY:
                raise MalformedFixture(f"unknown metadata key {key!r}", lineno, source)
            lo, hi = _META_ARITY[key]
            if not lo <= len(vals) <= hi:
                raise MalformedFixture(f"#{key} takes {lo}-{hi} values, got {len(vals)}", lineno, source)
            if key == "breakdown" and not header_seen:
                raise MalformedFixture("#breakdown must follow the data rows", lineno, source)
            meta.setdefault(key, []).append([*vals, str(lineno)])
            continue
        cells = [c.strip() for c in line.split(",")]
        if not header_seen:
            if tuple(cells) != HEADER:
                raise MalformedFixture(f"bad header {line!r}, expected {','.join(HEADER)}", lineno, source)
            header_seen = True
            continue
        if len(cells) != len(HEADER):
            raise MalformedFixture(f"expected {len(HEADER)} fields, got {len(cells)}", lineno, source)
        power = _num(cells[0], "power_w", lineno, source)
        if not cells[1]:
            raise MalformedFixture("isolation_db is required", lineno, source)
        iso = _num(cells[1], "isolation_db", lineno, source)
        il = _num(cells[2], "insertion_loss_db", lineno, source) if cells[2] else None
        temp = _num(cells[3], "temp_c", lineno, source) if cells[3] else None
        if power < 0 or iso < 0 or (il is not None and il < 0):
            raise MalformedFixture("powers and dB values must be >= 0", lineno, source)
        if rows:
            prev = rows[-1][1].power_w
            if not power > prev:
                raise NonMonotonePower(f"power {power} W does not increase past {prev} W", lineno, source)
        elif power != 0.0:
            raise MissingInitialRow(f"first data row must be at 0 W, got {power} W", lineno, source)
        rows.append((lineno, DegradationPoint(power, iso, il, temp)))

    if not header_seen:
        raise MalformedFixture("empty fixture (no header)", None, source)
    if not rows:
        raise MissingInitialRow("no data rows; the 0 W initial row is required", None, source)

    def one(key: str) -> list[str] | None:
        entries = meta.get(key)
        if not entries:
            return None
        if len(entries) > 1:
            raise MalformedFixture(f"#{key} given more than once", int(entries[1][-1]), source)
        return entries[0]

    def nums(entry: list[str], key: str) -> list[float]:
        lineno = int(entry[-1])
        return [_num(v, key, lineno, source) for v in entry[:-1]]

    first = rows[0][1]
    model = one("model")
    kind = one("kind")
    smin = one("spec_min_isolation_db")
    pmax = one("max_operating_power_w")
    trange = one("temp_range_c")
    default_model = Path(source).stem if source != "<fixture>" else "sample"
    try:
        spec = ComponentSpec(
            model_id=model[0] if model else default_model,
            kind=kind[0] if kind else "isolator",
            spec_min_isolation=nums(smin, "spec_min_isolation_db")[0] if smin else 0.0,
            max_operating_power=nums(pmax, "max_operating_power_w")[0] if pmax else float("inf"),
            temp_range=tuple(nums(trange, "temp_range_c")) if trange else None,  # type: ignore[arg-type]
            initial_insertion_loss=first.insertion_loss_db,
            initial_isolation=first.isolation_db,
        )
    except ValueError as exc:
        raise MalformedFixture(str(exc), None, source) from None

    bd_entry = one("breakdown")
    breakdown = None
    if bd_entry:
        vals = nums(bd_entry, "breakdown")
        breakdown = Breakdown(vals[0], vals[1], vals[2] if len(vals) > 2 else None)
    pd_entry = one("permanent_decrease")
    permanent = PermanentDecrease(*nums(pd_entry, "permanent_decrease")) if pd_entry else None
    rec_entry = one("recovery")
    recovery = RecoveryAnchor(*nums(rec_entry, "recovery")) if rec_entry else None
    base = one("base_exposure_s")
    holds = tuple((v[0], v[1]) for v in (nums(e, "hold") for e in meta.get("hold", [])))

    try:
        return DegradationRecord(
            spec=spec,
            points=tuple(p for _, p in rows),
            breakdown=breakdown,
            permanent_decrease=permanent,
            holds=holds,
            base_exposure_s=nums(base, "base_exposure_s")[0] if base else None,
            recovery=recovery,
        )
    except ValueError as exc:
        raise MalformedFixture(str(exc), None, source) from None


def shipped_fixture_dir() -> Path:
    return Path(str(resources.files("isoguard").joinpath("data/fixtures")))


def search_path() -> list[Path]:
    """Directories searched for fixture names: $ISOGUARD_FIXTURE_PATH, then shipped data."""
    dirs = [Path(p) for p in os.environ.get(FIXTURE_PATH_ENV, "").split(os.pathsep) if p]
    dirs.append(shipped_fixture_dir())
    return dirs


def find_fixture(name: str | Path, base: Path | None = None) -> Path:
    """Resolve a fixture path: as given, relative to ``base``, then on the search path."""
    p = Path(name)
    candidates = [p]
    if base is not None and not p.is_absolute():
        candidates.append(base / p)
    if not p.is_absolute():
        candidates.extend(d / p for d in search_path())
        if p.suffix != ".csv":
            candidates.extend(d / f"{p}.csv" for d in search_path())
    for c in candidates:
        if c.is_file():
            return c
    raise FileNotFoundError(f"fixture {str(name)!r} not found (searched {', '.join(map(str, candidates))})")


def ingest_fixture(source: str | Path) -> DegradationRecord:
    """Parse a fixture from a path, a fixture name, or raw CSV text."""
    if isinstance(source, str) and (not source.strip() or "\n" in source or "," in source):
        return parse_fixture(source)
    path = find_fixture(source)
    return parse_fixture(path.read_text(encoding="utf-8"), source=str(path))


def _slug(model: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", model.lower()).strip("_")


def load_circulator(model: str, directory: str | Path | None = None) -> CirculatorMatrix:
    """Collect ``<slug>_<i>to<j>.csv`` files into a :class:`CirculatorMatrix`.

    ``model`` may be a display name ("CIR PM 3") or slug ("cir_pm_3").
    """
    slug = _slug(model)
    dirs = [Path(directory)] if directory is not None else search_path()
    for d in dirs:
        files = sorted(d.glob(f"{slug}_[123]to[123].csv"))
        if not files:
            continue
        paths = {}
        for f in files:
            m = _PAIR_RE.match(f.stem)
            assert m is not None
            rec = parse_fixture(f.read_text(encoding="utf-8"), source=str(f))
            if rec.spec.kind != "circulator":
                raise MalformedFixture("port-pair file must declare #kind,circulator", None, str(f))
            paths[(int(m["i"]), int(m["j"]))] = rec
        names = {r.model_id for r in paths.values()}
        display = names.pop() if len(names) == 1 else model
        return CirculatorMatrix(model_id=display, paths=paths)
    raise FileNotFoundError(f"no port-pair fixtures for circulator {model!r}")


ISOLATOR_FIXTURES = ("iso_pm_1", "iso_pm_2", "iso_3_1", "iso_3_2", "iso_4")
CIRCULATOR_MODELS = ("cir_1", "cir_2", "cir_pm_3")
