# tests/test_campaigns.py
import json
from dataclasses import replace

import pytest

from matchlab import campaigns
from matchlab.campaigns import (
    HuntFinding, hunt_counterexample, instance_rng, make_campaign_config, make_target,
    reproduce_failure, run_campaign, sample_seed,
)
from matchlab.certificates import certificate_verify
from matchlab.errors import BudgetExceededError, ConfigError, PreconditionError


# ---------------------------------------------------------
# Utility helpers
# ---------------------------------------------------------
def run(settings, target, mode="random", **values):
    config = make_campaign_config(target=target, mode=mode, **values)
    return run_campaign(config, settings)


def assert_clean(report):
    assert report.ok, report.failures
    assert report.to_dict()["failures"] == []


# ---------------------------------------------------------
# Config
# ---------------------------------------------------------
def test_config_defaults():
    config = make_campaign_config(target="thm31")
    assert config.mode == "random"
    assert config.trials == 1000
    assert config.seed == 0
    assert config.jobs == 1


@pytest.mark.parametrize("values", [
    {"target": "thm99"},
    {"target": "thm31", "mode": "sometimes"},
    {"target": "thm31", "trials": 0},
    {"target": "thm31", "seed": -1},
    {"target": "thm31", "jobs": 0},
    {"target": "thm31", "colour": "red"},
])
def test_config_errors(values):
    with pytest.raises(ConfigError):
        make_campaign_config(**values)


def test_unknown_bounds(settings):
    with pytest.raises(ConfigError):
        make_target("thm31", {"max_size": 3}, settings)


def test_small_pairs_need_room_below_smallest_subgroup(settings):
    with pytest.raises(ConfigError):
        make_target("cor36", {"groups": [[4]]}, settings)


def test_exhaustive_budget(settings):
    tight = replace(settings, exhaustive_instance_budget=10)
    with pytest.raises(BudgetExceededError):
        run(tight, "thm31", mode="exhaustive", bounds={"max_order": 4})


def test_instance_seeding_is_positional():
    assert instance_rng(3, 7).integers(1 << 30) == instance_rng(3, 7).integers(1 << 30)
    assert sample_seed(3, 7) == sample_seed(3, 7)
    assert sample_seed(3, 7) != sample_seed(3, 8)


# ---------------------------------------------------------
# Group campaigns
# ---------------------------------------------------------
def test_local_implies_matched_on_all_small_groups(settings, tmp_path):
    report = run(settings, "thm31", mode="exhaustive", bounds={"max_order": 4}, out=str(tmp_path))
    assert_clean(report)
    body = report.to_dict()
    # Z/2: 2, Z/3: 9, Z/4: 34, Z/2 x Z/2: 34
    assert body["instances"] == 79
    assert len(body["summary"]) == 4
    assert body["summary"][0]["instance_class"] == "Z/2"
    assert {"matched", "locally_matched", "matched_not_local"} <= set(body["summary"][0])
    assert json.loads((tmp_path / "report.json").read_text(encoding="utf-8")) == body
    assert (tmp_path / "summary.csv").exists()
    assert "wall_time_seconds" in json.loads((tmp_path / "timing.json").read_text(encoding="utf-8"))


def test_report_is_byte_identical_across_runs(settings, tmp_path):
    run(settings, "thm31", trials=40, seed=9, bounds={"max_order": 6}, out=str(tmp_path))
    first = (tmp_path / "report.json").read_bytes()
    run(settings, "thm31", trials=40, seed=9, bounds={"max_order": 6}, out=str(tmp_path))
    assert (tmp_path / "report.json").read_bytes() == first


def test_parallel_run_matches_serial(settings):
    serial = run(settings, "kneser", trials=60, seed=4, bounds={"max_cyclic": 8, "products": [[2, 4]]})
    parallel = run(settings, "kneser", trials=60, seed=4, jobs=2,
                   bounds={"max_cyclic": 8, "products": [[2, 4]]})
    strip = lambda body: {k: v for k, v in body.items() if k != "config"}
    assert strip(serial.to_dict()) == strip(parallel.to_dict())
    assert serial.outcomes["status"].tolist() == parallel.outcomes["status"].tolist()


def test_matching_property_counterexamples_are_findings(settings, tmp_path):
    bounds = {"primes": [2, 3, 5], "composites": [4, 6], "extra_groups": [[2, 2]]}
    report = run(settings, "thm35", trials=20, bounds=bounds, out=str(tmp_path))
    assert_clean(report)
    body = report.to_dict()
    assert body["instances"] == 23
    assert body["findings"] == 3
    assert len(body["finding_certificates"]) == 3
    assert len(report.certificate_paths) == 6
    for path in report.certificate_paths:
        assert certificate_verify(path)


def test_generator_targets_exhaustive(settings):
    assert_clean(run(settings, "thm41", mode="exhaustive", bounds={"max_order": 7}))


def test_small_pairs_random(settings):
    report = run(settings, "cor36", trials=30, bounds={"groups": [[9], [3, 9]]})
    assert_clean(report)
    assert report.to_dict()["instances"] == 30


def test_kneser_random_with_chart(settings, tmp_path):
    report = run(settings, "kneser", trials=80, seed=42, bounds={"max_cyclic": 12, "products": [[2, 6]]},
                 out=str(tmp_path), html=True)
    assert_clean(report)
    assert report.to_dict()["kpis"]["success_rate"] == 100.0
    assert (tmp_path / "summary.html").exists()
    assert "success rate 100.00%" in (tmp_path / "summary.html").read_text(encoding="utf-8")


# ---------------------------------------------------------
# Skipped instances
# ---------------------------------------------------------
def test_generator_that_gives_up_skips_the_draw(settings, monkeypatch):
    def give_up(self, index, rng):
        raise PreconditionError("no primitive subspace in 1000 draws")

    monkeypatch.setattr(campaigns.PrimitiveTargets, "random_instance", give_up)
    report = run(settings, "thm42", trials=4, bounds={"fields": [[2, 4]]})
    body = report.to_dict()
    assert report.ok
    assert body["instances"] == 4
    assert body["kpis"]["skipped"] == 4
    assert set(report.outcomes["instance_class"]) == {campaigns.UNDRAWN_CLASS}


def test_check_over_budget_skips_the_instance(settings, monkeypatch):
    def over_budget(self, instance, seed):
        raise BudgetExceededError("ordered bases over budget")

    monkeypatch.setattr(campaigns.GeneratorTargets, "check", over_budget)
    report = run(settings, "thm41", mode="exhaustive", bounds={"max_order": 5})
    kpis = report.to_dict()["kpis"]
    assert report.ok
    assert kpis["instances"] > 0
    assert kpis["skipped"] == kpis["instances"]
    assert kpis["failures"] == 0


# ---------------------------------------------------------
# Linear campaigns
# ---------------------------------------------------------
def test_criterion_against_oracle_random(settings):
    report = run(settings, "thm24", trials=10, bounds={"fields": [[2, 3], [3, 2]], "max_dim": 2})
    assert_clean(report)
    assert report.to_dict()["instances"] == 20


def test_primitive_targets_random(settings):
    assert_clean(run(settings, "thm42", trials=10, bounds={"fields": [[2, 4]]}))


def test_linear_local_implies_matched_random(settings):
    assert_clean(run(settings, "thm51", trials=6, bounds={"fields": [[2, 4]], "basis_trials": 50}))


def test_strong_matchings_random(settings):
    report = run(settings, "remark56", trials=6, bounds={"fields": [[2, 4]], "basis_trials": 50})
    assert_clean(report)
    assert report.outcomes["strong"].sum() == 6


def test_linear_kneser_exhaustive(settings):
    report = run(settings, "linear_kneser", mode="exhaustive", bounds={"fields": [[2, 3]]})
    assert_clean(report)
    # 7 lines, 7 planes and the whole of F_8
    assert report.to_dict()["instances"] == 15 ** 2


def test_composite_degree_counterexample_is_a_finding(settings, tmp_path):
    report = run(settings, "thm25", trials=5, bounds={"fields": [[2, 4], [2, 3]]}, out=str(tmp_path))
    assert_clean(report)
    body = report.to_dict()
    assert body["instances"] == 6
    assert body["findings"] == 1
    for path in report.certificate_paths:
        assert certificate_verify(path)


# ---------------------------------------------------------
# Certificates
# ---------------------------------------------------------
def test_tamper_random(settings):
    report = run(settings, "tamper", trials=18, seed=1)
    assert_clean(report)
    assert report.to_dict()["instances"] == 18


@pytest.mark.slow
def test_tamper_exhaustive(settings):
    assert_clean(run(settings, "tamper", mode="exhaustive"))


def test_reproduce_failure():
    ok, message = reproduce_failure("thm35", {"group": {"torsion": [4]}, "A": [1], "B": [1]})
    assert ok
    assert "is matched" in message
    ok, message = reproduce_failure("thm31", {"group": {"torsion": [8]}, "A": [0, 2, 6], "B": [1, 3, 4]})
    assert not ok


# ---------------------------------------------------------
# Counterexample hunt
# ---------------------------------------------------------
def test_hunt_group_z4(settings):
    findings = hunt_counterexample("group", {"groups": [[4]]}, settings)
    assert isinstance(findings[0], HuntFinding)
    assert findings[0].source == "construction"
    assert len(findings) > 1
    assert all(not f.locally_matched for f in findings)


def test_hunt_prime_order_finds_nothing(settings):
    assert hunt_counterexample("group", {"groups": [[5]]}, settings) == []


def test_hunt_linear(settings):
    findings = hunt_counterexample("linear", {"fields": [[2, 4]], "max_dim": 1}, settings)
    assert findings[0].source == "construction"
    assert hunt_counterexample("linear", {"fields": [[2, 3]], "max_dim": 2}, settings) == []


def test_hunt_bounds(settings):
    with pytest.raises(ConfigError):
        hunt_counterexample("ring", {}, settings)
    with pytest.raises(ConfigError):
        hunt_counterexample("group", {"max_dim": 2}, settings)
    with pytest.raises(BudgetExceededError):
        hunt_counterexample("group", {"groups": [[12]]}, replace(settings, exhaustive_instance_budget=100))
