import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

import fewphoton as fp
from fewphoton.config import load_table
from fewphoton.errors import ConfigError, DefectiveHamiltonian

EXPLICIT = """
label = "lossy chain"
units = "GHz"

[system]
builder = "explicit"

[[system.modes]]
kind = "two-level"
frequency = 5.0

[[system.modes]]
kind = "boson"
frequency = 6.0
kerr = 1.5
loss = 0.3

[[system.hops]]
from = 0
to = 1
strength = 0.7

[[system.ports]]
label = "L"
couplings = [{mode = 0, gamma = 0.81}]

[[system.ports]]
label = "R"
couplings = [{mode = 1, gamma = 0.25}, {mode = 0, gamma = 0.04}]
"""


def test_explicit_toml_file(tmp_path):
    path = tmp_path / "chain.toml"
    path.write_text(EXPLICIT)
    cfg = fp.load_config(path)
    assert cfg.label == "lossy chain"
    assert cfg.units == "GHz"
    spec = cfg.system
    assert [m.kind for m in spec.modes] == [fp.TWO_LEVEL, fp.BOSON]
    assert spec.modes[1].kerr == 1.5
    assert spec.modes[1].loss == 0.3
    assert spec.hops == (fp.Hop(0, 1, 0.7),)
    # couplings are rates in the file, amplitudes in the spec
    assert spec.port("L").terms == ((0, 0.9),)
    assert spec.port("R").terms == ((1, 0.5), (0, 0.2))
    # the raw table rides along for reproducibility
    assert cfg.source["label"] == "lossy chain"
    assert cfg.source["system"]["ports"][0]["couplings"][0]["gamma"] == 0.81


def test_json_and_toml_agree(tmp_path):
    toml_path = tmp_path / "chain.toml"
    toml_path.write_text(EXPLICIT)
    table = load_table(toml_path)
    json_path = tmp_path / "chain.json"
    json_path.write_text(json.dumps(table))
    assert fp.load_config(json_path).system == fp.load_config(toml_path).system


def test_load_table_rejections(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_table(tmp_path / "absent.toml")
    yaml = tmp_path / "c.yaml"
    yaml.write_text("system: {}")
    with pytest.raises(ConfigError, match="unsupported format"):
        load_table(yaml)
    bad_toml = tmp_path / "c.toml"
    bad_toml.write_text("[system\n")
    with pytest.raises(ConfigError):
        load_table(bad_toml)
    bad_json = tmp_path / "c.json"
    bad_json.write_text("{not json")
    with pytest.raises(ConfigError):
        load_table(bad_json)
    array_json = tmp_path / "arr.json"
    array_json.write_text("[1, 2]")
    with pytest.raises(ConfigError, match="top level"):
        load_table(array_json)


def test_builders_match_direct_calls():
    two = fp.parse_config(
        {
            "system": {
                "builder": "two_level",
                "params": {"omega": 5.0, "gamma_left": 0.5, "gamma_right": 0.3},
            }
        }
    )
    assert two.system == fp.build_two_level(5.0, 0.5, 0.3)
    assert two.label == "two_level"
    assert two.units == "arbitrary"

    pair = fp.parse_config(
        {
            "system": {
                "builder": "collocated",
                "params": {
                    "omega_c": 12.0,
                    "omega_d": 2.0,
                    "gamma_c": 0.25,
                    "gamma_d": 0.05,
                },
            }
        }
    )
    params = fp.CollocatedParams(12.0, 2.0, 0.25, 0.05)
    assert pair.system == fp.build_collocated(params)

    dimer = fp.parse_config(
        {
            "system": {
                "builder": "bose_hubbard",
                "params": {
                    "n_sites": 2,
                    "omega0": 100.0,
                    "u": 4.0,
                    "j": 1.0,
                    "gamma_first": 1.0,
                    "gamma_last": 1.0,
                },
            }
        }
    )
    assert dimer.system == fp.build_bose_hubbard(2, 100.0, 4.0, 1.0, 1.0, 1.0)


def test_builder_parity_with_explicit_table():
    explicit = fp.parse_config(
        {
            "system": {
                "modes": [{"kind": "two-level", "frequency": 5.0}],
                "ports": [
                    {"label": "L", "couplings": [{"mode": 0, "gamma": 0.5}]},
                    {"label": "R", "couplings": [{"mode": 0, "gamma": 0.3}]},
                ],
            }
        }
    )
    assert explicit.system == fp.build_two_level(5.0, 0.5, 0.3)
    assert explicit.label == "explicit"


def test_structural_errors():
    bad = [
        ({}, "missing \\[system\\]"),
        ({"system": {"typo": 1}}, "unknown \\[system\\] keys"),
        ({"system": {"builder": "nope"}}, "unknown builder"),
        (
            {"system": {"builder": "two_level", "modes": []}},
            "conflicts with builder",
        ),
        (
            {"system": {"params": {"omega": 1.0}}},
            "only applies to named builders",
        ),
        (
            {"system": {"builder": "two_level", "params": {"omega": 1.0}}},
            "bad parameters",
        ),
        ({"system": {"builder": "two_level", "params": []}}, "must be a table"),
        ({"system": {"modes": []}}, "non-empty list"),
        (
            {"system": {"modes": [{"kind": "qutrit", "frequency": 1.0}]}},
            "'kind' must be one of",
        ),
        ({"system": {"modes": [{"kind": "boson"}]}}, "missing 'frequency'"),
        (
            {
                "system": {
                    "modes": [{"kind": "boson", "frequency": 1.0, "q": 2}]
                }
            },
            "unknown keys",
        ),
    ]
    for table, pattern in bad:
        with pytest.raises(ConfigError, match=pattern):
            fp.parse_config(table)


def _one_mode(**system_extra):
    table = {
        "system": {
            "modes": [{"kind": "two-level", "frequency": 5.0}],
            "ports": [{"label": "L", "couplings": [{"mode": 0, "gamma": 1.0}]}],
        }
    }
    table["system"].update(system_extra)
    return table


def test_hop_and_port_errors():
    with pytest.raises(ConfigError, match="'hops' must be a list"):
        fp.parse_config(_one_mode(hops={"from": 0}))
    with pytest.raises(ConfigError, match="missing 'strength'"):
        fp.parse_config(_one_mode(hops=[{"from": 0, "to": 1}]))
    with pytest.raises(ConfigError, match="mode indices"):
        fp.parse_config(_one_mode(hops=[{"from": True, "to": 1, "strength": 1.0}]))
    # Hop's own "distinct sites" rule surfaces as a config error
    with pytest.raises(ConfigError, match="hop 0"):
        fp.parse_config(_one_mode(hops=[{"from": 0, "to": 0, "strength": 1.0}]))

    table = _one_mode()
    table["system"]["ports"] = [{"label": "", "couplings": [{"mode": 0, "gamma": 1.0}]}]
    with pytest.raises(ConfigError, match="non-empty string"):
        fp.parse_config(table)
    table["system"]["ports"] = [{"label": "L", "couplings": []}]
    with pytest.raises(ConfigError, match="non-empty list"):
        fp.parse_config(table)
    table["system"]["ports"] = [{"label": "L", "couplings": [{"mode": 0}]}]
    with pytest.raises(ConfigError, match="'gamma' must be a number"):
        fp.parse_config(table)
    table["system"]["ports"] = [
        {"label": "L", "couplings": [{"mode": 0, "gamma": -0.1}]}
    ]
    with pytest.raises(ConfigError, match="nonnegative"):
        fp.parse_config(table)
    table["system"]["ports"] = [
        {"label": "L", "couplings": [{"mode": 0, "gamma": 1.0, "phase": 0.0}]}
    ]
    with pytest.raises(ConfigError, match="unknown keys"):
        fp.parse_config(table)
    # out-of-range mode index is a SystemSpec rule, rewrapped
    table["system"]["ports"] = [{"label": "L", "couplings": [{"mode": 3, "gamma": 1.0}]}]
    with pytest.raises(ConfigError):
        fp.parse_config(table)


def test_booleans_are_not_numbers():
    table = _one_mode()
    table["system"]["modes"][0]["frequency"] = True
    with pytest.raises(ConfigError, match="must be a number"):
        fp.parse_config(table)
    table = _one_mode()
    table["system"]["ports"][0]["couplings"][0]["mode"] = False
    with pytest.raises(ConfigError, match="mode index"):
        fp.parse_config(table)


def test_metadata_must_be_strings():
    with pytest.raises(ConfigError, match="'label' must be a string"):
        fp.parse_config({**_one_mode(), "label": 7})
    with pytest.raises(ConfigError, match="'units' must be a string"):
        fp.parse_config({**_one_mode(), "units": ["Hz"]})


def test_critical_builder_failure_is_not_a_config_error():
    # parameters on the non-diagonalizable manifold: a numerical condition,
    # reported as such rather than as a malformed file
    table = {
        "system": {
            "builder": "collocated",
            "params": {
                "omega_c": 10.0,
                "omega_d": 0.125,
                "gamma_c": 0.25,
                "gamma_d": 0.0,
            },
        }
    }
    with pytest.raises(DefectiveHamiltonian):
        fp.parse_config(table)


@given(
    omega=st.floats(min_value=-50.0, max_value=50.0),
    gamma=st.floats(min_value=0.0, max_value=10.0),
    kerr=st.floats(min_value=-5.0, max_value=5.0),
)
def test_json_text_round_trip(omega, gamma, kerr):
    table = {
        "system": {
            "modes": [{"kind": "boson", "frequency": omega, "kerr": kerr}],
            "ports": [{"label": "w", "couplings": [{"mode": 0, "gamma": gamma}]}],
        }
    }
    direct = fp.parse_config(table)
    rehydrated = fp.parse_config(json.loads(json.dumps(table)))
    assert rehydrated.system == direct.system
    assert direct.system.port("w").terms[0][1] == gamma**0.5
