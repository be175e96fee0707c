"""Scenario file parsing: strict structure, permissive values, round-trips."""

import copy

import numpy as np
import pytest
import yaml

from swarmsim.errors import ScenarioFormatError
from swarmsim.model import validate_scenario
from swarmsim.scenario_io import (
    apply_overrides,
    dump_scenario,
    golden_scenario_path,
    load_golden,
    load_scenario,
    parse_scenario,
    scenario_digest,
    scenario_to_mapping,
)

GOLDEN_DIGEST = "8640848f16999538"


@pytest.fixture
def golden_map(golden):
    return scenario_to_mapping(golden)


def reparse(m):
    return parse_scenario(copy.deepcopy(m))


# -- the bundled benchmark -------------------------------------------------

def test_golden_file_loads(golden):
    assert golden_scenario_path().is_file()
    assert golden.n_agents == 4
    assert len(golden.obstacles) == 2
    assert len(golden.formation.edges) == 4
    assert golden.numerics.v_tol == 0.1
    assert validate_scenario(golden).ok
    assert scenario_digest(golden) == GOLDEN_DIGEST


def test_golden_round_trip(golden, tmp_path):
    path = tmp_path / "copy.yaml"
    dump_scenario(golden, path)
    again = load_scenario(path)
    assert scenario_digest(again) == GOLDEN_DIGEST
    assert again.numerics == golden.numerics
    assert again.theta_bar == golden.theta_bar
    X0, V0 = golden.initial_state_arrays()
    X1, V1 = again.initial_state_arrays()
    assert np.array_equal(X0, X1)
    assert np.array_equal(V0, V1)


def test_mapping_round_trip_is_stable(golden, golden_map):
    assert scenario_digest(reparse(golden_map)) == scenario_digest(golden)


# -- overrides -------------------------------------------------------------

def test_overrides_replace_numerics(golden):
    sc = apply_overrides(golden, dt=0.01, t_end=1.0, integrator="semi-implicit-euler")
    assert sc.numerics.dt == 0.01
    assert sc.numerics.t_end == 1.0
    assert sc.numerics.integrator == "semi-implicit-euler"
    # untouched fields carried over, original untouched
    assert sc.numerics.kappa == golden.numerics.kappa
    assert golden.numerics.dt == 0.001
    assert scenario_digest(sc) != scenario_digest(golden)


def test_gain_override_hits_every_agent(golden):
    sc = apply_overrides(golden, gain=2.0)
    assert all(a.gain == 2.0 for a in sc.agents)
    assert all(a.gain == 5.0 for a in golden.agents)
    assert np.array_equal(sc.gains, np.full(4, 2.0))


def test_no_override_is_identity_content(golden):
    assert scenario_digest(apply_overrides(golden)) == scenario_digest(golden)


# -- defaults --------------------------------------------------------------

def test_optional_agent_fields_default():
    sc = parse_scenario({
        "workspace": {"radius": 10.0},
        "agents": [
            {"id": 1, "radius": 0.25, "sensing": 5.0, "position": [0, 0, 1]},
            {"id": 2, "radius": 0.25, "sensing": 5.0, "position": [2, 0, 1]},
        ],
        "formation": [{"between": [1, 2], "position_offset": [-2, 0, 0]}],
    })
    a = sc.agents[0]
    assert a.mass == 1.0 and a.gain == 5.0
    # missing inertia falls back to the solid-sphere value
    assert np.allclose(a.body_inertia, 0.4 * 1.0 * 0.25**2)
    assert np.allclose(sc.inertias[0], 0.4 * 1.0 * 0.25**2)
    X, V = sc.initial_state_arrays()
    assert np.array_equal(X[0, 3:], np.zeros(3))
    assert np.array_equal(V, np.zeros((2, 6)))
    assert np.array_equal(sc.formation.edges[0].q_des, np.zeros(3))
    assert sc.numerics.dt == 0.001  # whole numerics block omitted


# -- strict structure ------------------------------------------------------

def test_top_level_must_be_mapping():
    with pytest.raises(ScenarioFormatError, match="expected a mapping"):
        parse_scenario([1, 2, 3])


def test_unknown_top_key_rejected(golden_map):
    m = copy.deepcopy(golden_map)
    m["extra_setting"] = 1
    with pytest.raises(ScenarioFormatError, match=r"unknown keys \['extra_setting'\]"):
        parse_scenario(m)


def test_unknown_agent_key_rejected(golden_map):
    m = copy.deepcopy(golden_map)
    m["agents"][0]["color"] = "red"
    with pytest.raises(ScenarioFormatError, match=r"agents\[0\]: unknown keys"):
        parse_scenario(m)


def test_agents_must_be_nonempty_list(golden_map):
    m = copy.deepcopy(golden_map)
    m["agents"] = {}
    with pytest.raises(ScenarioFormatError, match="non-empty list"):
        parse_scenario(m)
    m["agents"] = []
    with pytest.raises(ScenarioFormatError, match="non-empty list"):
        parse_scenario(m)


def test_missing_required_key(golden_map):
    m = copy.deepcopy(golden_map)
    del m["agents"][1]["radius"]
    with pytest.raises(ScenarioFormatError, match="missing required key 'radius'"):
        parse_scenario(m)


def test_bool_is_not_a_number(golden_map):
    m = copy.deepcopy(golden_map)
    m["numerics"]["dt"] = True
    with pytest.raises(ScenarioFormatError, match="numerics.dt: expected a number"):
        parse_scenario(m)


def test_string_is_not_a_number(golden_map):
    m = copy.deepcopy(golden_map)
    m["workspace"]["radius"] = "10"
    with pytest.raises(ScenarioFormatError, match="expected a number, got '10'"):
        parse_scenario(m)


def test_vector_length_checked(golden_map):
    m = copy.deepcopy(golden_map)
    m["agents"][0]["position"] = [1.0, 2.0]
    with pytest.raises(ScenarioFormatError, match="3-element list"):
        parse_scenario(m)


def test_vector_entries_checked(golden_map):
    m = copy.deepcopy(golden_map)
    m["obstacles"][0]["center"] = [0.0, "x", 0.0]
    with pytest.raises(ScenarioFormatError, match=r"center\[1\]: expected a number"):
        parse_scenario(m)


def test_formation_pair_shape(golden_map):
    m = copy.deepcopy(golden_map)
    m["formation"][0]["between"] = [1, 2, 3]
    with pytest.raises(ScenarioFormatError, match=r"expected \[id_i, id_j\]"):
        parse_scenario(m)


def test_log_every_must_be_integer(golden_map):
    m = copy.deepcopy(golden_map)
    m["numerics"]["log_every"] = 2.5
    with pytest.raises(ScenarioFormatError, match="expected an integer"):
        parse_scenario(m)


def test_gravity_off_must_be_bool(golden_map):
    m = copy.deepcopy(golden_map)
    m["numerics"]["gravity_off"] = "no"
    with pytest.raises(ScenarioFormatError, match="expected true/false"):
        parse_scenario(m)


def test_integrator_must_be_string(golden_map):
    m = copy.deepcopy(golden_map)
    m["numerics"]["integrator"] = 4
    with pytest.raises(ScenarioFormatError, match="expected a string"):
        parse_scenario(m)


def test_duplicate_id_wrapped_as_format_error(golden_map):
    m = copy.deepcopy(golden_map)
    m["agents"][1]["id"] = m["agents"][0]["id"]
    with pytest.raises(ScenarioFormatError, match="duplicate"):
        parse_scenario(m)


# -- value problems are validation's job -----------------------------------

def test_out_of_range_value_parses_then_fails_validation(golden_map):
    m = copy.deepcopy(golden_map)
    m["theta_bar"] = 1.6
    sc = parse_scenario(m)  # no raise
    report = validate_scenario(sc)
    assert not report.ok
    assert any(v.code == "pitch-limit-range" for v in report.violations)


# -- file level ------------------------------------------------------------

def test_load_scenario_from_text(tmp_path):
    path = tmp_path / "mini.yaml"
    path.write_text(yaml.safe_dump({
        "workspace": {"radius": 8.0},
        "agents": [
            {"id": 7, "radius": 0.2, "sensing": 4.0, "position": [-1, 0, 0]},
            {"id": 9, "radius": 0.2, "sensing": 4.0, "position": [1, 0, 0]},
        ],
        "formation": [{"between": [7, 9], "position_offset": [-2, 0, 0]}],
    }))
    sc = load_scenario(path)
    assert tuple(sc.ids) == (7, 9)
    assert sc.workspace.radius == 8.0


def test_load_scenario_missing_file(tmp_path):
    with pytest.raises(ScenarioFormatError, match="cannot read"):
        load_scenario(tmp_path / "absent.yaml")


def test_load_scenario_broken_yaml(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("workspace: [unclosed\n")
    with pytest.raises(ScenarioFormatError, match="not valid YAML"):
        load_scenario(path)


def test_load_scenario_yaml_scalar(tmp_path):
    path = tmp_path / "scalar.yaml"
    path.write_text("42\n")
    with pytest.raises(ScenarioFormatError, match="expected a mapping"):
        load_scenario(path)
