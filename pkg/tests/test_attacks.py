import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from isoguard.attacks import (
    AttackReport,
    SourceArchitecture,
    distance_penalty,
    laser_damage_guard,
    laser_seeding_budget,
    load_architecture,
    parse_architecture,
    recompute_verdict,
    reports_to_csv,
    trojan_horse_budget,
)
from isoguard.components import Breakdown, ComponentSpec, DegradationPoint, DegradationRecord
from isoguard.fixtures import ingest_fixture


def make_record(curve, breakdown=None, model="synthetic"):
    """Isolator record from (power, isolation) pairs starting at 0 W."""
    spec = ComponentSpec(model, "isolator", 20.0, initial_insertion_loss=0.5, initial_isolation=curve[0][1])
    pts = tuple(DegradationPoint(p, iso, 0.5, None) for p, iso in curve)
    return DegradationRecord(spec, pts, breakdown=breakdown)


def propagate(p_in, stages_db):
    # brute force: multiply linear transmissions one stage at a time
    p = p_in
    for a in stages_db:
        p *= 10 ** (-a / 10)
    return p


@pytest.fixture(scope="module")
def pm2():
    return ingest_fixture("iso_pm_2")


def test_seeding_budget_paper_numbers(pm2):
    r = laser_seeding_budget(SourceArchitecture(pm2, laser_builtin_isolation=0.0), 10.0)
    assert r.power_after_sacrificial_w == pytest.approx(0.1905, abs=5e-5)
    assert r.required_extra_isolation_db == pytest.approx(62.8, abs=0.01)
    r30 = laser_seeding_budget(SourceArchitecture(pm2), 10.0)
    assert r30.attenuator_bound_db == pytest.approx(32.8, abs=0.01)


def test_seeding_with_attenuator(pm2):
    r = laser_seeding_budget(SourceArchitecture(pm2, downstream_isolation=(20.0,)), 10.0)
    assert r.power_at_target_w == pytest.approx(1.905e-6, rel=1e-3)
    assert r.verdict == "attack_succeeds"
    r = laser_seeding_budget(SourceArchitecture(pm2, downstream_isolation=(33.0,)), 10.0)
    assert r.verdict == "attack_fails"


def test_seeding_point_mode_uses_curve_value(pm2):
    r = laser_seeding_budget(SourceArchitecture(pm2), 1.0, mode="point")
    assert r.residual_isolation_db == 29.1
    with pytest.raises(ValueError):
        laser_seeding_budget(SourceArchitecture(pm2), 1.0, mode="bogus")


@pytest.mark.parametrize("delta,mult,orders", [(0.0, 1.0, 0.0), (15.2, 33.1, 1.52), (34.5, 2818, 3.45)])
def test_trojan_examples(delta, mult, orders):
    b = trojan_horse_budget(delta)
    assert b.multiplier == pytest.approx(mult, rel=2e-3)
    assert b.orders == pytest.approx(orders, abs=1e-12)


def test_trojan_zero_is_exactly_one():
    assert trojan_horse_budget(0.0).multiplier == 1.0


def test_distance_examples():
    assert distance_penalty(0.0, 0.2) == 0.0
    assert distance_penalty(15.2, 0.76) == pytest.approx(20.0, rel=1e-12)
    assert distance_penalty(34.5, 0.345) == pytest.approx(100.0, rel=1e-12)
    with pytest.raises(ValueError):
        distance_penalty(1.0, 0.0)


def test_damage_guard_boundary_is_compromised(pm2):
    r = laser_damage_guard(SourceArchitecture(pm2), 10.0)
    assert r.power_at_target_w == pytest.approx(0.1905, abs=5e-5)
    assert r.verdict == "compromised"


def test_damage_guard_destruction():
    r = laser_damage_guard(SourceArchitecture(ingest_fixture("iso_3_2")), 3.8, exposure=90)
    assert r.verdict == "denial_of_service"
    assert r.destroyed
    assert r.residual_isolation_db > 80


def test_damage_guard_low_floor():
    rec = make_record([(0.0, 27.0), (0.7, 6.4)])
    r = laser_damage_guard(SourceArchitecture(rec), 10.0)
    assert r.power_at_target_w == pytest.approx(10 * 10 ** -0.64, rel=1e-12)
    assert r.power_at_target_w == pytest.approx(2.29, abs=5e-3)
    assert r.verdict == "compromised"


def test_damage_guard_safe_below_threshold(pm2):
    r = laser_damage_guard(SourceArchitecture(pm2), 1.0)
    assert r.verdict == "safe"
    assert r.margin_db > 0


def random_architecture(rng):
    n = rng.randint(1, 6)
    powers = sorted({0.0, *(round(rng.uniform(0.1, 8), 3) for _ in range(n))})
    curve = [(p, rng.uniform(0, 60)) for p in powers]
    bd = Breakdown(rng.uniform(0.5, 10), rng.uniform(0, 1000), rng.uniform(81, 120)) if rng.random() < 0.5 else None
    downstream = tuple(rng.uniform(0, 40) for _ in range(rng.randint(0, 3)))
    return SourceArchitecture(
        make_record(curve, bd),
        downstream_isolation=downstream,
        laser_builtin_isolation=rng.uniform(0, 40),
        seeding_threshold=10 ** rng.uniform(-9, -5),
        damage_threshold_downstream=rng.uniform(0.01, 1.0),
    )


def test_verdicts_recomputable_and_match_propagation():
    rng = random.Random(2024)
    for _ in range(1000):
        arch = random_architecture(rng)
        p = rng.uniform(0.0, 12.0)
        exposure = rng.uniform(0, 1200)
        d = laser_damage_guard(arch, p, exposure)
        assert recompute_verdict(d) == d.verdict
        assert d.power_at_target_w == pytest.approx(propagate(p, [d.residual_isolation_db]), rel=1e-9)
        if p > 0:
            s = laser_seeding_budget(arch, p)
            assert recompute_verdict(s) == s.verdict
            brute = propagate(p, [s.residual_isolation_db, *arch.protected_chain])
            assert s.power_at_target_w == pytest.approx(brute, rel=1e-9)


@given(st.lists(st.floats(0, 40), max_size=4), st.integers(0, 3), st.floats(0, 30), st.floats(0.01, 20))
def test_more_downstream_isolation_never_helps_attacker(chain, idx, extra, power):
    rec = make_record([(0.0, 37.0), (3.0, 17.2)])
    chain = chain or [0.0]
    idx = idx % len(chain)
    before = laser_seeding_budget(SourceArchitecture(rec, downstream_isolation=tuple(chain)), power)
    raised = list(chain)
    raised[idx] += extra
    after = laser_seeding_budget(SourceArchitecture(rec, downstream_isolation=tuple(raised)), power)
    if before.verdict == "attack_fails":
        assert after.verdict == "attack_fails"


@given(st.floats(17.3, 90.0))
def test_sacrificial_initial_isolation_not_credited(initial):
    rec = make_record([(0.0, initial), (3.37, 17.2)])
    r = laser_seeding_budget(SourceArchitecture(rec), 10.0)
    ref = laser_seeding_budget(SourceArchitecture(make_record([(0.0, 37.0), (3.37, 17.2)])), 10.0)
    assert r.required_extra_isolation_db == ref.required_extra_isolation_db
    assert r.attenuator_bound_db == ref.attenuator_bound_db


def test_report_serialization(pm2):
    r = laser_seeding_budget(SourceArchitecture(pm2), 10.0)
    text = reports_to_csv([r])
    assert text.splitlines()[0].startswith("kind,injected_power_w")
    assert '"verdict": "attack_succeeds"' in r.to_json()
    assert isinstance(r, AttackReport)


def test_architecture_file(tmp_path):
    (tmp_path / "arch.txt").write_text(
        "# source\nsacrificial_fixture = iso_pm_2\ndownstream_isolation_db = 20, 5\n"
        "seeding_threshold_w = 100nW\n", encoding="utf-8")
    arch = load_architecture(tmp_path / "arch.txt")
    assert arch.downstream_isolation == (20.0, 5.0)
    assert math.isclose(arch.seeding_threshold, 1e-7)
    assert arch.sacrificial.model_id == "ISO PM 2"
    with pytest.raises(ValueError):
        parse_architecture("sacrificial_fixture = x\nwhat = 1\n")
    with pytest.raises(ValueError):
        parse_architecture("downstream_isolation_db = 1\n")
