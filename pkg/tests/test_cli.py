import json
import os

import pytest
from click.testing import CliRunner

from nctorus.cli import ConfigError, main, parse_config, run, SUITES

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "src", "nctorus", "fixtures")


def fixture_path(name):
    return os.path.abspath(os.path.join(FIXTURES, name))


MINIMAL = """
{
  "torus": {"g": 1, "lattice": [["1"], ["i"]], "poisson": [["0"]]},
  "checks": ["torus"]
}
"""


def test_parse_minimal_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.torus.order == 4
    assert cfg.window == 1
    assert cfg.checks == ["torus"]


def test_parse_rejects_floats():
    bad = MINIMAL.replace('"poisson": [["0"]]', '"poisson": [[0.5]]')
    with pytest.raises(ConfigError):
        parse_config(bad)


def test_parse_rejects_bad_suite_and_schema():
    with pytest.raises(ConfigError):
        parse_config('{"torus": {"g": 1, "lattice": [["1"], ["i"]], "poisson": [["0"]]}, "checks": ["nope"]}')
    with pytest.raises(ConfigError):
        parse_config("{}")
    with pytest.raises(ConfigError):
        parse_config("not json")


def test_parse_e1xe2_fixture():
    with open(fixture_path("e1xe2.json")) as fh:
        cfg = parse_config(fh.read())
    assert [b.name for b in cfg.bundles] == ["H_L", "H_M", "H_LM"]
    assert cfg.torus.g == 2


def test_run_empty_suites():
    cfg = parse_config(MINIMAL)
    cfg.checks = []
    report = run(cfg)
    assert report["results"] == []
    assert report["all_pass"]


def test_cli_run_exit_codes(tmp_path):
    runner = CliRunner()
    out = tmp_path / "report.json"
    res = runner.invoke(
        main,
        ["run", fixture_path("g1.json"), "--suite", "torus", "--suite", "fm", "--out", str(out)],
    )
    assert res.exit_code == 0, res.output
    payload = json.loads(out.read_text())
    assert payload["all_pass"]
    assert {r["name"] for r in payload["results"]} >= {"torus:validate"}

    res = runner.invoke(main, ["run", str(tmp_path / "missing.json")])
    assert res.exit_code == 2

    bad = tmp_path / "bad.json"
    bad.write_text('{"torus": {"g": 1, "lattice": [["1"], ["2"]], "poisson": [["0"]]}}')
    res = runner.invoke(main, ["run", str(bad)])
    assert res.exit_code == 2


def test_cli_quantizable_expectation_failure(tmp_path):
    cfgtext = json.loads(open(fixture_path("e1xe2.json")).read())
    cfgtext["bundles"] = [dict(cfgtext["bundles"][2], quantizable=True)]
    cfgtext["checks"] = ["quantizable"]
    p = tmp_path / "wrong.json"
    p.write_text(json.dumps(cfgtext))
    runner = CliRunner()
    res = runner.invoke(main, ["run", str(p)])
    assert res.exit_code == 1


def test_cli_star_and_dual_lattice():
    runner = CliRunner()
    slots = json.dumps(
        {
            "slots": [
                {
                    "name": "v",
                    "dim": 2,
                    "vars": ["q", "p"],
                    "poisson": [["0", "1"], ["-1", "0"]],
                }
            ],
            "order": 4,
        }
    )
    res = runner.invoke(main, ["star", "E[pi*(q)]", "E[pi*(p)]", "--slots", slots])
    assert res.exit_code == 0, res.output
    assert "E[pi*(q + p)]" in res.output
    assert "oracle" in res.output and "OK" in res.output

    res = runner.invoke(main, ["dual-lattice", fixture_path("g1.json")])
    assert res.exit_code == 0
    assert "xi^(1)" in res.output


def test_nct_window_env(monkeypatch):
    monkeypatch.setenv("NCT_WINDOW", "2")
    cfg = parse_config(MINIMAL)
    assert cfg.window == 2
