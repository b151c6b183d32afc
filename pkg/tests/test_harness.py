import csv
import io
import json

import pytest

from blockmit import export, harness
from blockmit.errors import ValidationError
from blockmit.harness import ExperimentConfig, ExperimentReport

SMALL = dict(n_qubits=3, shots=500, repeats=3, p1=1e-3, p2=1e-2, base_seed=5)


@pytest.fixture(scope="module")
def small_report():
    return harness.run_experiment(ExperimentConfig(**SMALL))


@pytest.mark.parametrize("field, value", [
    ("n_qubits", 1), ("n_qubits", 13), ("target", "10"), ("target", "1a1"),
    ("shots", 0), ("repeats", 0), ("p1", -0.1), ("p2", 1.5), ("base_seed", -1),
    ("lambda_grid", [1, 2]), ("lambda_grid", [1, 1]), ("k_grid", [0, 1]),
    ("zne_method", "cubic"), ("c_policy", "guess"), ("methods", ["magic"]),
])
def test_config_validation_names_field(field, value):
    data = dict(SMALL, **{field: value})
    with pytest.raises(ValidationError) as err:
        ExperimentConfig(**data)
    assert err.value.field == field
    assert field in str(err.value)


def test_config_unknown_key():
    with pytest.raises(ValidationError) as err:
        ExperimentConfig.from_dict({"qubitz": 3})
    assert err.value.field == "config"


def test_config_defaults():
    cfg = ExperimentConfig()
    assert (cfg.n_qubits, cfg.shots, cfg.repeats, cfg.p1, cfg.p2) == (6, 4000, 10, 1e-4, 1e-3)
    assert cfg.target == "111111" and cfg.r == 6 and cfg.k_grid == [1, 2, 3]
    assert cfg.lambda_grid == [1, 3, 5]


def test_config_roundtrip():
    cfg = ExperimentConfig(**SMALL)
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_report_structure(small_report):
    rep = small_report
    assert len(rep.runs) == 3
    for rec in rep.runs:
        assert [p["lambda"] for p in rec["zne"]["points"]] == [1, 3, 5]
        assert [p["depth"] for p in rec["blockfit"]["points"]] == [2, 4]
        assert 0.0 <= rec["zne"]["p_zne"] <= 1.0
        assert 0.0 <= rec["blockfit"]["p_mit"] <= 1.0
        # lambda = 1 is the unfolded circuit, but sampled on its own stream
        assert rec["zne"]["points"][0]["expectation"] == pytest.approx(rec["p_raw"], abs=0.1)
    for key in ("p_raw", "p_zne", "p_mit"):
        agg = rep.aggregates[key]
        assert agg["min"] <= agg["mean"] <= agg["max"]
    assert rep.theoretical == pytest.approx(0.9453, abs=1e-4)


def test_report_deterministic(small_report):
    again = harness.run_experiment(ExperimentConfig(**SMALL))
    assert export.to_json(again) == export.to_json(small_report)


def test_report_seed_changes_result(small_report):
    other = harness.run_experiment(ExperimentConfig(**dict(SMALL, base_seed=6)))
    assert other.runs[0]["p_raw"] != small_report.runs[0]["p_raw"] or \
        other.runs[1]["p_raw"] != small_report.runs[1]["p_raw"]


def test_noiseless_experiment():
    rep = harness.run_experiment(ExperimentConfig(n_qubits=4, p1=0.0, p2=0.0, shots=4000,
                                                  repeats=2))
    theory = rep.theoretical
    for key in ("p_raw", "p_zne", "p_mit"):
        assert rep.aggregates[key]["mean"] == pytest.approx(theory, abs=0.03)


def test_single_method():
    rep = harness.run_experiment(ExperimentConfig(**dict(SMALL, methods=["zne"])))
    assert "p_zne" in rep.aggregates and "p_mit" not in rep.aggregates
    assert all("blockfit" not in r for r in rep.runs)


def test_json_roundtrip(small_report, tmp_path):
    (path,) = export.export(small_report, "json", tmp_path)
    loaded = ExperimentReport.from_dict(json.loads(path.read_text()))
    assert export.to_json(loaded) == export.to_json(small_report)
    assert set(json.loads(path.read_text())) >= {"config", "runs", "aggregates", "references"}


def test_csv_schema(small_report, tmp_path):
    (path,) = export.export(small_report, "csv", tmp_path)
    rows = list(csv.DictReader(io.StringIO(path.read_text(encoding="utf-8"))))
    assert list(rows[0]) == list(export.CSV_COLUMNS)
    assert len(rows) == len(small_report.runs) * 3
    keys = {(r["run_id"], r["method"]) for r in rows}
    assert len(keys) == len(rows)
    for row in rows:
        float(row["estimate"])


def test_plotdata_four_bars(tmp_path):
    rep = harness.run_experiment(ExperimentConfig(n_qubits=6, shots=200, repeats=2))
    paths = export.export(rep, "svg-plotdata", tmp_path)
    data = json.loads(paths[0].read_text())
    assert [b["name"] for b in data["groups"][0]["bars"]] == list(export.BAR_NAMES)
    assert len(data["groups"][0]["bars"]) == 4
    assert paths[1].read_text().startswith("<svg")


def test_export_unwritable(small_report, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        export.export(small_report, "json", blocker / "sub")


def test_sweep_order_and_parallel():
    base = ExperimentConfig(**SMALL)
    forward = harness.run_sweep(base, [0.01, 0.02])
    backward = harness.run_sweep(base, [0.02, 0.01])
    parallel = harness.run_sweep(base, [0.01, 0.02], parallel=2)
    assert [r.config["p1"] for r in forward] == pytest.approx([0.001, 0.002])
    assert forward[0].runs == backward[1].runs
    assert [r.to_dict() for r in forward] == [r.to_dict() for r in parallel]


def test_reproduce_table2_passes():
    rep = harness.reproduce("2")
    assert rep.passed
    names = {c["name"]: c for c in rep.checks}
    status = {c["status"] for c in rep.checks}
    assert status <= {"pass", "flagged", "info"}
    assert any("f" in n and c["status"] == "pass" for n, c in names.items())


def test_reproduce_arithmetic_only():
    for table in ("1", "3"):
        rep = harness.reproduce(table, simulate=False)
        assert rep.passed and not rep.experiments


def test_reproduce_unknown_table():
    with pytest.raises(ValidationError):
        harness.reproduce("4")


def test_references_loaded():
    refs = harness.load_references()
    assert {"table1", "table2", "table3", "roots"} <= set(refs)
