"""Scenario-file loading and error reporting."""

import json

import pytest

from platoonsim import ScenarioError, load_scenario, scenario_from_dict


def _doc(**patches):
    doc = {
        "platoon": {
            "n": 8,
            "tau_d": 1.5,
            "h": 0.6,
            "r": 10.0,
            "L": 4.7,
            "k_p": 0.2,
            "k_d": 1.2,
            "T": 0.1,
            "v0_init": 30.0,
            "a0_init": 0.0,
            "p_lead_init": 200.0,
        },
        "braking": {"t_brake": 5.0, "gamma": 1.2, "eta": 0.1},
        "loss": {"kind": "consecutive", "ell": 7},
        "sim": {"t_end": 25.0, "rule": "theorem2", "alpha": 1.0, "n_bar": 100000},
    }
    doc.update(patches)
    return doc


def test_shipped_default_scenario():
    cfg = load_scenario("scenarios/default.json")
    assert cfg.params.n == 8
    assert cfg.params.tau_d == 1.5
    assert cfg.params.h == 0.6
    assert cfg.params.k_p == 0.2 and cfg.params.k_d == 1.2
    assert cfg.params.lengths.tolist() == [4.7] * 8
    assert cfg.brake.t_brake == 5.0 and cfg.brake.gamma == 1.2 and cfg.brake.eta == 0.1
    assert cfg.loss.kind == "consecutive" and cfg.loss.ell == 7
    assert cfg.rule.kind == "theorem2" and cfg.rule.alpha == 1.0 and cfg.rule.n_bar == 100000
    assert cfg.t_end == 25.0


def test_round_trip_equals_dict_form():
    assert scenario_from_dict(_doc()) == load_scenario("scenarios/default.json")


def test_sim_defaults():
    doc = _doc(sim={"t_end": 2.0})
    cfg = scenario_from_dict(doc)
    assert cfg.rule.kind == "theorem2"
    assert cfg.rule.alpha == 1.0
    assert cfg.rule.n_bar == 100000


def test_per_follower_lengths_list():
    doc = _doc()
    doc["platoon"]["n"] = 3
    doc["platoon"]["L"] = [4.0, 5.0, 6.0]
    cfg = scenario_from_dict(doc)
    assert cfg.params.lengths.tolist() == [4.0, 5.0, 6.0]


def _field_of(excinfo):
    return excinfo.value.field


def test_missing_section():
    doc = _doc()
    del doc["braking"]
    with pytest.raises(ScenarioError) as ei:
        scenario_from_dict(doc)
    assert _field_of(ei) == "braking"


def test_unknown_section_and_fields():
    with pytest.raises(ScenarioError) as ei:
        scenario_from_dict(_doc(weather={"rain": True}))
    assert _field_of(ei) == "weather"

    doc = _doc()
    doc["platoon"]["nn"] = 8
    with pytest.raises(ScenarioError) as ei:
        scenario_from_dict(doc)
    assert _field_of(ei) == "platoon.nn"

    doc = _doc()
    doc["sim"]["dt"] = 0.1
    with pytest.raises(ScenarioError) as ei:
        scenario_from_dict(doc)
    assert _field_of(ei) == "sim.dt"


def test_bad_values_carry_section_path():
    doc = _doc()
    doc["platoon"]["tau_d"] = -1.0
    with pytest.raises(ScenarioError) as ei:
        scenario_from_dict(doc)
    assert _field_of(ei) == "platoon"

    doc = _doc()
    doc["loss"] = {"kind": "bernoulli", "p": 1.7, "seed": 1}
    with pytest.raises(ScenarioError) as ei:
        scenario_from_dict(doc)
    assert _field_of(ei) == "loss"

    doc = _doc()
    doc["sim"]["t_end"] = 25.03
    with pytest.raises(ScenarioError) as ei:
        scenario_from_dict(doc)
    assert _field_of(ei) == "sim.t_end"

    doc = _doc()
    doc["sim"]["rule"] = "theorem9"
    with pytest.raises(ScenarioError) as ei:
        scenario_from_dict(doc)
    assert _field_of(ei) == "sim"


def test_missing_required_fields():
    doc = _doc()
    del doc["platoon"]["n"]
    with pytest.raises(ScenarioError) as ei:
        scenario_from_dict(doc)
    assert _field_of(ei) == "platoon"

    doc = _doc()
    del doc["sim"]["t_end"]
    with pytest.raises(ScenarioError) as ei:
        scenario_from_dict(doc)
    assert _field_of(ei) == "sim.t_end"


def test_non_object_root_and_sections():
    with pytest.raises(ScenarioError) as ei:
        scenario_from_dict([1, 2, 3])
    assert _field_of(ei) == "<root>"
    with pytest.raises(ScenarioError) as ei:
        scenario_from_dict(_doc(loss="lossy"))
    assert _field_of(ei) == "loss"


def test_file_errors(tmp_path):
    with pytest.raises(ScenarioError) as ei:
        load_scenario(tmp_path / "missing.json")
    assert _field_of(ei) == "<file>"

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ScenarioError) as ei:
        load_scenario(bad)
    assert _field_of(ei) == "<file>"


def test_written_scenario_loads(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps(_doc()))
    assert load_scenario(path) == scenario_from_dict(_doc())
