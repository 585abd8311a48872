import json

import pytest

from hawkesaug.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main


@pytest.fixture
def reports(tmp_path):
    path = tmp_path / "sim.csv"
    assert main(["simulate", "--model", "hawkes_full", "--n-events", "15", "--n-series", "3",
                 "--excerpt", "--burn-in", "50", "--seed", "2", "-o", str(path)]) == EXIT_OK
    return path


def test_simulate_to_stdout(capsys):
    assert main(["simulate", "--model", "poisson", "--lambda-p", "2", "--n-events", "4"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "subject_id,timestamp,pain_level" and len(lines) == 5


def test_fit_select_augment(reports, tmp_path, capsys):
    base = [str(reports), "--numeric-unit", "days"]
    assert main(["fit", *base, "--model", "hawkes_full"]) == EXIT_OK
    fits = json.loads(capsys.readouterr().out)
    assert len(fits) == 3 and fits[0]["k"] == 3
    assert main(["select", *base, "--criterion", "aicc"]) == EXIT_OK
    sel = json.loads(capsys.readouterr().out)
    assert {r["verdict"] for r in sel} <= {"hawkes", "poisson", "inconclusive"}
    out = tmp_path / "aug.json"
    assert main(["augment", *base, "--anchor", "S1", "--p-c", "0", "-o", str(out)]) == EXIT_OK
    aug = json.loads(out.read_text())
    assert aug[0]["anchor"] == "S1" and len(aug[0]["members"]) == 3


def test_similarity_and_ingest(reports, tmp_path, capsys):
    assert main(["similarity", str(reports), "--numeric-unit", "days"]) == EXIT_OK
    rows = capsys.readouterr().out.strip().splitlines()
    assert rows[0] == "id,S0,S1,S2" and len(rows) == 4
    out = tmp_path / "norm.json"
    assert main(["ingest", str(reports), "--numeric-unit", "days", "-o", str(out)]) == EXIT_OK
    assert set(json.loads(out.read_text())) == {"S0", "S1", "S2"}


def test_experiment_with_config(tmp_path, capsys):
    cfg = tmp_path / "spec.json"
    cfg.write_text(json.dumps({"name": "ridge", "overrides": {"n_alpha": 20, "n_delta": 20}, "seed": 1}))
    out = tmp_path / "run"
    assert main(["experiment", "ridge", "--config", str(cfg), "--output", str(out)]) == EXIT_OK
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["spec"]["seed"] == 1 and (out / "grid.csv").exists()


def test_exit_codes(tmp_path, capsys):
    assert main(["fit", str(tmp_path / "missing.csv")]) == EXIT_DATA
    bad = tmp_path / "bad.csv"
    bad.write_text("subject_id,timestamp,pain_level\na,notatime,1\n")
    assert main(["fit", str(bad)]) == EXIT_DATA
    with pytest.raises(SystemExit) as exc:
        main(["fit"])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        main(["experiment", "nonsense"])
    assert exc.value.code == EXIT_USAGE
    assert main(["experiment", "ridge", "--set", "bogus=1"]) == EXIT_USAGE
    assert main(["simulate", "--alpha", "9", "--delta", "1", "--n-events", "3"]) == EXIT_USAGE
