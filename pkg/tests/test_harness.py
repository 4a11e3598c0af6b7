from __future__ import annotations

import csv
import json
import subprocess
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import pytest

from analoglab.harness import (
    ConfigInvalid,
    ExperimentConfig,
    IncompleteSweep,
    RunReport,
    UnknownExperiment,
    list_experiments,
    load_config,
    run,
    verify_claim,
    write_report,
)
from analoglab.harness.cli import main
from analoglab.harness.experiments import get_experiment
from analoglab.harness.report import render_csv, render_json

NAMES = ["blip-differentiator", "richardson-K", "spectra-T", "spectra-S", "growth-trial"]
CONFIGS_DIR = Path(__file__).resolve().parent.parent / "configs"

# small configs that keep every experiment under a couple of seconds
SMALL = {
    "blip-differentiator": 'J = 4\nschedule = [[1, 0], [3, 2]]\nprecision_sweep = [[1.0, 0.125], [1.0, 0.0625], [1.0, 0.0078125], [1.0, 0.001953125]]\n',
    "richardson-K": "J = 3\nschedule = [[1, 3], [2, 1]]\nupper_limits = [1.0, 2.0, 4.0]\n",
    "spectra-T": "J = 4\nschedule = [[1, 7], [3, 9]]\n",
    "spectra-S": "J = 5\nschedule = [[0, 3], [2, 0], [4, 5]]\n",
    "growth-trial": "J = 6\nbudget = 10\nmax_steps = 200\n",
}


def write_config(tmp_path: Path, name: str, body: str) -> Path:
    path = tmp_path / f"{name}.toml"
    path.write_text(f'experiment = "{name}"\noutput_dir = "{(tmp_path / "out").as_posix()}"\n{body}')
    return path


@pytest.fixture(scope="module")
def schema():
    return json.loads(resources.files("analoglab.harness").joinpath("report_schema.json").read_text())


def test_registry():
    names = [n for n, _ in list_experiments()]
    assert names == NAMES
    assert all(desc for _, desc in list_experiments())
    with pytest.raises(UnknownExperiment):
        get_experiment("nope")


def test_list_flag(capsys):
    assert main(["--list"]) == 0
    out = capsys.readouterr().out
    assert all(name in out for name in NAMES)


def test_module_entry_point():
    done = subprocess.run([sys.executable, "-m", "analoglab", "--list"], capture_output=True, text=True, check=True)
    assert "growth-trial" in done.stdout


@pytest.mark.parametrize("name", NAMES)
def test_cli_reruns_are_byte_identical(tmp_path, name, schema):
    cfg = write_config(tmp_path, name, SMALL[name])
    outs = []
    out = tmp_path / "run"
    for _ in range(2):
        # same output dir both times: the config echo records it
        assert main(["--config", str(cfg), "--out", str(out)]) == 0
        outs.append({p.name: p.read_bytes() for p in out.iterdir()})
    assert outs[0] == outs[1]
    assert sorted(outs[0]) == [f"{name}.csv", f"{name}.json"]
    doc = json.loads(outs[0][f"{name}.json"])
    jsonschema.validate(doc, schema)
    rows = list(csv.DictReader(outs[0][f"{name}.csv"].decode().splitlines()))
    assert len(rows) == doc["cells"]
    assert list(rows[0]) == doc["columns"]


@pytest.mark.parametrize("name", NAMES)
def test_config_echo_round_trips(tmp_path, name):
    report = run(load_config(write_config(tmp_path, name, SMALL[name])))
    echo = json.loads(render_json(report))["config"]
    assert ExperimentConfig.from_dict(echo) == report.config


def test_cells_and_correctness_agree_with_ground_truth(tmp_path):
    report = run(load_config(write_config(tmp_path, "spectra-T", SMALL["spectra-T"])))
    assert len(report.records) == report.config.J * len(report.config.precision_sweep)
    members = {1: 7, 3: 9}
    for r in report.records:
        assert r["in_A"] == (r["j"] in members)
        assert r["nu_j"] == members.get(r["j"])
        assert r["correct"] == (r["answer"] == r["in_A"])


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('experiment = "spectra-T"\nJ = 0\n')
    assert main(["--config", str(bad)]) == 2
    bad.write_text('experiment = "spectra-T"\ncolour = "red"\n')
    assert main(["--config", str(bad)]) == 2
    bad.write_text("experiment = [unclosed\n")
    assert main(["--config", str(bad)]) == 2
    assert main([]) == 2
    assert main(["--experiment", "nope"]) == 4
    blocker = tmp_path / "file"
    blocker.write_text("")
    cfg = write_config(tmp_path, "spectra-S", SMALL["spectra-S"])
    assert main(["--config", str(cfg), "--out", str(blocker / "sub")]) == 3
    assert main(["--config", str(tmp_path / "missing.toml")]) == 3
    capsys.readouterr()


def test_config_validation():
    with pytest.raises(ConfigInvalid):
        ExperimentConfig("blip-differentiator", schedule=((1, 2),), machine="m.rm")
    with pytest.raises(ConfigInvalid):
        ExperimentConfig("blip-differentiator", precision_sweep=((0.1, 1.0),))
    with pytest.raises(ConfigInvalid):
        ExperimentConfig("richardson-K", upper_limits=(0.5,))
    with pytest.raises(ConfigInvalid):
        ExperimentConfig("growth-trial", budget=0)
    with pytest.raises(ConfigInvalid):
        ExperimentConfig.from_dict({"J": 3})
    cfg = ExperimentConfig("spectra-S", seed=3)
    assert cfg.with_overrides(seed=None, budget=4) == ExperimentConfig("spectra-S", seed=3, budget=4)


def test_relative_schedule_file_resolves_next_to_config(tmp_path):
    (tmp_path / "sched.txt").write_text("1 7\n3 9\n")
    cfg = write_config(tmp_path, "spectra-T", 'J = 4\nschedule_file = "sched.txt"\n')
    inline = run(load_config(write_config(tmp_path, "spectra-T", SMALL["spectra-T"])))
    from_file = run(load_config(cfg))
    assert from_file.records == inline.records


def test_machine_source(tmp_path):
    machine = resources.files("analoglab").joinpath("data/parity.rm")
    cfg = ExperimentConfig("spectra-S", J=4, machine=str(machine), budget=12)
    report = run(cfg)
    assert report.summary["claim"]["holds"] in (True, False)
    assert {r["j"] for r in report.records} == set(range(4))


@pytest.mark.parametrize("name", NAMES)
def test_degenerate_single_question(name):
    report = run(ExperimentConfig(name, J=1, schedule=(), upper_limits=(1.0, 2.0), max_steps=50))
    if name == "growth-trial":
        return
    assert report.summary["beta_J"] == 0
    for r in report.records:
        assert not r["in_A"]
        answer = r["answer"] if "answer" in r else r["detected"]
        assert answer is False
    assert report.summary["claim"]["holds"]


def test_blip_report_on_a_two_member_schedule():
    sweep = tuple((1.0, 2.0**-p) for p in range(2, 8))
    report = run(ExperimentConfig("blip-differentiator", J=4, schedule=((1, 0), (3, 2)), precision_sweep=sweep))
    assert len(report.records) == 4 * 6
    rows = {r["j"]: r for r in report.summary["claim"]["per_j"]}
    for j, nu in ((1, 0), (3, 2)):
        assert rows[j]["flips"]
        assert abs(rows[j]["log2_threshold"] - (nu + j)) <= 2
    assert rows[0]["always_correct"]


def test_claim_holds_on_the_bundled_configs():
    for name in ("blip", "spectra-T", "spectra-S"):
        report = run(load_config(CONFIGS_DIR / f"{name}.toml"))
        verdict = verify_claim(report)
        assert verdict.holds, name
        for row in verdict.rows:
            if row.in_A:
                assert abs(row.log2_threshold - row.expected_log2) <= 2


def test_verify_claim_rejects_partial_reports():
    report = run(ExperimentConfig("spectra-T", J=3, schedule=((1, 7),)))
    missing_j = RunReport(report.config, report.columns, [r for r in report.records if r["j"] != 1], {})
    with pytest.raises(IncompleteSweep):
        verify_claim(missing_j)
    ragged = RunReport(report.config, report.columns, report.records[1:], {})
    with pytest.raises(IncompleteSweep):
        verify_claim(ragged)
    growth = run(ExperimentConfig("growth-trial", J=2, budget=4, max_steps=20))
    with pytest.raises(IncompleteSweep):
        verify_claim(growth)


def test_wall_time_stays_out_of_files(tmp_path):
    report = run(ExperimentConfig("spectra-S", J=2, schedule=((1, 0),)))
    assert "wall" not in render_json(report) and "wall" not in render_csv(report)
    csv_path, json_path = write_report(report, tmp_path)
    assert csv_path.read_text().splitlines()[0].split(",") == list(report.columns)
    assert json.loads(json_path.read_text())["schema_version"] == 1
