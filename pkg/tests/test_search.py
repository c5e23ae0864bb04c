from __future__ import annotations

import json

import pytest

from pmfix.errors import ConfigError
from pmfix.search import CampaignConfig, TrialSpec, build_trial, run_campaign, run_trial


def test_constant_argmin_passes():
    out = run_trial(TrialSpec(seed=7, n=4, n_min=4, map_sampler="constant_argmin", gauge="linear:0.4"))
    assert out.status == "pass"
    assert all(out.hypotheses.values())
    assert out.fix == 1


def test_single_point_passes():
    assert run_trial(TrialSpec(seed=3, n=1)).status == "pass"


def test_trial_is_deterministic():
    spec = TrialSpec(seed=11)
    a, b = build_trial(spec), build_trial(spec)
    assert a.space.dtable.tobytes() == b.space.dtable.tobytes()
    assert a.T.table == b.T.table and a.gauge_spec == b.gauge_spec
    assert run_trial(spec).to_dict() == run_trial(spec).to_dict()


def test_ablated_matthews_on_broken_table():
    spec = TrialSpec(seed=0, table=((2.0, 1.0), (1.0, 0.0)), map=(1, 1), gauge="linear:0.5", ablation="Matthews")
    out = run_trial(spec)
    assert out.status != "hypotheses_failed"
    assert out.hypotheses["matthews"] is False
    assert out.ablated_failed


def test_broken_table_without_ablation_is_filtered():
    spec = TrialSpec(seed=0, table=((2.0, 1.0), (1.0, 0.0)), map=(1, 1), gauge="linear:0.5")
    out = run_trial(spec)
    assert out.status == "hypotheses_failed" and "matthews" in out.failed


def test_ablating_contractivity_exposes_violations():
    rep = run_campaign(TrialSpec(seed=100, ablation="contractive"), 150)
    assert rep.violations
    assert rep.exit_code == 1
    assert all(v.ablated_failed for v in rep.violations)


def test_count_one_reproduces_trial():
    base = TrialSpec(seed=42)
    rep = run_campaign(base, 1)
    out = run_trial(base)
    assert rep.outcomes[out.status] == 1


def test_parallel_matches_serial():
    base = TrialSpec(seed=5)
    assert run_campaign(base, 40).to_dict() == run_campaign(base, 40, parallelism=2).to_dict()


def test_b_passes_are_c_passes():
    for seed in range(80):
        b = run_trial(TrialSpec(seed=seed, g="b"))
        c = run_trial(TrialSpec(seed=seed, g="c"))
        if b.status != "hypotheses_failed":
            assert c.status != "hypotheses_failed"


def test_biased_sampler_pass_rate():
    rep = run_campaign(TrialSpec(seed=0), 200)
    assert rep.passing / rep.trials > 0.2


def test_replay_file(tmp_path):
    rep = run_campaign(TrialSpec(seed=100, ablation="contractive"), 60, replay_dir=tmp_path)
    assert rep.replay_files
    payload = json.loads((tmp_path / rep.replay_files[0].split("/")[-1]).read_text())
    replay = run_trial(TrialSpec.from_dict(payload["spec"]))
    assert replay.status == "violation"
    assert replay.witness == payload["witness"]


@pytest.mark.parametrize(
    "data",
    [
        {"count": 5},
        {"seed": -1, "count": 5},
        {"seed": 0, "count": 0},
        {"seed": 0, "count": 5, "bogus": 1},
        {"seed": 0, "count": 5, "g": "x"},
        {"seed": 0, "count": 5, "ablation": "nonsense"},
        {"seed": 0, "count": 5, "n": 0},
        {"seed": 0, "count": 5, "gauge": "linear:abc"},
        [1, 2],
    ],
)
def test_config_errors(data):
    with pytest.raises(ConfigError):
        CampaignConfig.from_dict(data)


def test_spec_round_trip():
    spec = TrialSpec(seed=9, n=5, ablation="semi-coercive", enforce=("matthews", "contractive"))
    assert TrialSpec.from_dict(json.loads(json.dumps(spec.to_dict()))) == spec
    assert spec.ablation == "psi_semi_coercive"
