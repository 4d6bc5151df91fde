"""Acceptance gate: one test per criterion, each reporting PASS/FAIL by name.

Run alone with ``pytest tests/test_acceptance.py -v``; the terminal
summary lists every criterion's outcome.
"""

import math
import random

import numpy as np

from isoguard.attacks import SourceArchitecture, laser_damage_guard, laser_seeding_budget, recompute_verdict
from isoguard.attacks import trojan_horse_budget
from isoguard.bench import SetupModel, estimate_from_readings, run_procedure, simulate_meters
from isoguard.components import (
    Breakdown,
    ComponentSpec,
    DegradationPoint,
    DegradationRecord,
    ThermalResponse,
    chain_isolation,
    circulator_isolation,
    cool_down,
    recovered_isolation,
)
from isoguard.fixtures import ingest_fixture, load_circulator
from isoguard.magneto_optics import (
    FaradayStage,
    isolation_curve,
    malus_insertion_loss,
    malus_isolation,
    max_rotation_deviation,
    stage_point,
)
from isoguard.materials import default_material

# Measured isolator results: minimum isolation, maximum decrease, irreversible damage.
ISOLATOR_RESULTS = {
    "iso_pm_1": ("21.8 @ 6.7 W, 360 s", "31.9", "6.7 W, 900 s"),
    "iso_pm_2": ("17.2 @ 3.37 W, 820 s", "19.8", "was not tested"),
    "iso_3_1": ("37.1 @ 3.3 W, 260 s", "21.0", "was not tested"),
    "iso_3_2": ("27.6 @ 3.4 W, 800 s", "34.5", "3.8 W, 90 s"),
    "iso_4": ("42.4 @ 2.2 W, 200 s", "15.2", "was not tested"),
}

# (model, src, dst, power W, isolation dB)
CIRCULATOR_MINIMA = [
    ("cir_1", 2, 1, 3.6, 34.7),
    ("cir_1", 3, 2, 3.6, 32.2),
    ("cir_2", 2, 1, 4.6, 38.3),
    ("cir_2", 3, 2, 4.6, 32.3),
    ("cir_pm_3", 3, 2, 0.7, 6.4),
]


def test_malus_anchor(criterion):
    a = malus_isolation(45.0, 44.43)
    b = malus_isolation(45.0, 45.57)
    criterion("malus anchor 40.0 dB +/- 0.1", abs(a - 40.0) <= 0.1 and abs(b - 40.0) <= 0.1,
              f"{a:.4f} dB, {b:.4f} dB")


def test_seeding_budget(criterion):
    r = laser_seeding_budget(SourceArchitecture(ingest_fixture("iso_pm_2")), 10.0)
    ok = (abs(r.power_after_sacrificial_w - 0.1905) <= 0.01 * 0.1905
          and abs(r.required_extra_isolation_db - 62.8) <= 0.2
          and abs(r.attenuator_bound_db - 32.8) <= 0.2)
    criterion("seeding budget 190.5 mW / 62.8 dB / 32.8 dB", ok,
              f"{r.power_after_sacrificial_w * 1e3:.2f} mW, {r.required_extra_isolation_db:.3f} dB, "
              f"{r.attenuator_bound_db:.3f} dB")


def test_trojan_multiplier(criterion):
    oracle = float(np.power(10.0, 3.45))
    got = trojan_horse_budget(34.5).multiplier
    zero = trojan_horse_budget(0.0).multiplier
    criterion("trojan multiplier x10^3.45, x1 at 0 dB",
              abs(got - oracle) <= 1e-9 * oracle and zero == 1.0, f"{got:.6f}, {zero!r}")


def test_isolator_results_reproduction(criterion):
    mismatches = []
    for name, (minimum, decrease, damage) in ISOLATOR_RESULTS.items():
        s = run_procedure(ingest_fixture(name)).summary
        got = (s.minimum_text(), f"{s.max_decrease_db:.1f}", s.damage_text())
        if got != (minimum, decrease, damage):
            mismatches.append(f"{name}: {got}")
    criterion("isolator results table reproduction (5 isolators)", not mismatches, "; ".join(mismatches))


def test_circulator_minima_reproduction(criterion):
    bad = []
    for model, i, j, p, want in CIRCULATOR_MINIMA:
        got = circulator_isolation(load_circulator(model), i, j, p)
        if got != want:
            bad.append(f"{model} {i}->{j}: {got}")
    for model in ("cir_1", "cir_2"):
        m = load_circulator(model)
        base = circulator_isolation(m, 3, 1, 0.0)
        for p in m.record(3, 1).powers:
            if not m.is_destroyed(p, 0.0) and circulator_isolation(m, 3, 1, p) != base:
                bad.append(f"{model} 3->1 varies at {p} W")
    criterion("circulator minima reproduction and constant 3->1", not bad, "; ".join(bad))


def test_material_calibration(criterion):
    yig = FaradayStage(default_material("yig"), 44.43)
    errs = [abs(stage_point(yig, t).isolation_db - a) for t, a in ((25, 40), (70, 30), (175, 15))]
    biyig_min = min(p.isolation_db for p in isolation_curve(FaradayStage(default_material("biyig"), 44.43),
                                                            -20, 180, 0.5))
    dev = {n: max_rotation_deviation(FaradayStage(default_material(n), 44.43), 25, 175)
           for n in ("tgg", "yig", "biyig")}
    ok = max(errs) <= 2.0 and biyig_min > 40.0 and dev["tgg"] > dev["yig"] > dev["biyig"]
    criterion("YIG within 2 dB, BiYIG > 40 dB, TGG > YIG > BiYIG deviation", ok,
              f"YIG max err {max(errs):.3f} dB, BiYIG min {biyig_min:.3f} dB, "
              f"dev {dev['tgg']:.2f}/{dev['yig']:.2f}/{dev['biyig']:.3f} deg")


def test_recovery(criterion):
    rec = load_circulator("cir_1").record(2, 1)
    th = ThermalResponse.from_record(rec)
    temp = cool_down(th, 272.0, 400.0)
    iso = recovered_isolation(th, rec.recovery, 400.0)
    ok = iso >= 55.0 and temp <= 45.0 and abs(th.tau - 156.0) <= 0.1 * 156.0
    criterion("CIR 1 recovery >= 55 dB, <= 45 C at 400 s, tau ~ 156 s", ok,
              f"{iso:.3f} dB, {temp:.3f} C, tau {th.tau:.2f} s")


def _random_arch(rng):
    powers = sorted({0.0, *(round(rng.uniform(0.1, 8), 3) for _ in range(rng.randint(1, 6)))})
    pts = [DegradationPoint(p, rng.uniform(0, 60), 0.5, None) for p in powers]
    spec = ComponentSpec("r", "isolator", 20.0, initial_insertion_loss=0.5, initial_isolation=pts[0].isolation_db)
    bd = Breakdown(rng.uniform(0.5, 10), rng.uniform(0, 1000), 100.0) if rng.random() < 0.5 else None
    return SourceArchitecture(DegradationRecord(spec, tuple(pts), breakdown=bd),
                              downstream_isolation=tuple(rng.uniform(0, 40) for _ in range(rng.randint(0, 3))),
                              damage_threshold_downstream=rng.uniform(0.01, 1.0))


def test_property_suites(criterion):
    rng = random.Random(1)
    failures = []

    for _ in range(10_000):
        chain = [rng.uniform(0, 60) for _ in range(rng.randint(0, 10))]
        prod = math.prod(10 ** (-a / 10) for a in chain)
        if abs(10 ** (-chain_isolation(chain) / 10) - prod) > 1e-9 * prod:
            failures.append(f"chain {chain}")
            break

    setup = SetupModel()
    for _ in range(10_000):
        p, iso, il = rng.uniform(1e-4, 20), rng.uniform(0, 90), rng.uniform(0, 30)
        g_iso, g_il = estimate_from_readings(setup, simulate_meters(setup, p, iso, il))
        if abs(g_iso - iso) > 1e-12 * max(iso, 1.0) or abs(g_il - il) > 1e-12 * max(il, 1.0):
            failures.append(f"meters {p}, {iso}, {il}")
            break

    for _ in range(10_000):
        theta = rng.uniform(0, 90)
        if abs(theta - 45) < 1e-4:
            continue
        s = 10 ** (-malus_isolation(45, theta) / 10) + 10 ** (-malus_insertion_loss(45, theta) / 10)
        if abs(s - 1) > 1e-12:
            failures.append(f"pythagorean {theta}")
            break

    for _ in range(1000):
        arch = _random_arch(rng)
        r = laser_damage_guard(arch, rng.uniform(0, 12), rng.uniform(0, 1200))
        if recompute_verdict(r) != r.verdict:
            failures.append(f"verdict {r}")
            break

    criterion("property suites (chain, meters, Malus identity, verdicts)", not failures, "; ".join(failures))
