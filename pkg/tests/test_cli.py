import json
import shutil

import pytest

from descent_kit import __version__
from descent_kit.cli import main
from descent_kit.corpus import data_dir


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_version(capsys):
    code, out, _ = _run(capsys, "--version")
    assert code == 0
    assert out.strip() == f"descent-kit {__version__}"


def test_unknown_command(capsys):
    code, _, err = _run(capsys, "frobnicate")
    assert code == 2
    assert "invalid choice" in err


def test_non_positive_precision(capsys):
    code, _, err = _run(capsys, "branches", "--fixture", "artin_schreier", "--prec", "0")
    assert code == 2
    assert "--prec must be positive" in err


def test_unknown_fixture(capsys):
    code, _, err = _run(capsys, "branches", "--fixture", "nonexistent")
    assert code == 2
    assert "unknown fixture" in err


def test_verify_catalog(capsys):
    code, out, _ = _run(capsys, "verify-catalog")
    assert code == 0
    rows = json.loads(out)
    assert rows and all(r["verdict"] == "pass" for r in rows)
    assert {r["fixture"] for r in rows} == {"belyi_catalog"}


def test_artin_schreier_branches(capsys):
    code, out, _ = _run(capsys, "branches", "--fixture", "artin_schreier", "--p", "2", "--levels", "4")
    assert code == 0
    (row,) = json.loads(out)
    assert row["verdict"] == "pass"
    assert len(row["certificates"]["branch_set"]["branches"]) == 2


def test_corpus_list(capsys):
    code, out, _ = _run(capsys, "corpus", "--list")
    assert code == 0
    ids = [line.split()[0] for line in out.splitlines() if not line.startswith(" ")]
    assert ids == sorted(ids)
    assert "klein" in ids and "quadratic" in ids


def test_out_file_and_text_format(capsys, tmp_path):
    target = tmp_path / "report.txt"
    code, out, _ = _run(capsys, "corpus", "--fixture", "quadratic", "--format", "text", "--out", str(target))
    assert code == 0 and out == ""
    lines = target.read_text().splitlines()
    assert lines[-1] == "3/3 passed"


def test_cocycle_filter(capsys):
    code, out, _ = _run(capsys, "cocycle", "--fixture", "quadratic")
    assert code == 0
    assert [r["operation"] for r in json.loads(out)] == ["cocycle", "search"]


def test_counterexamples(capsys):
    code, out, _ = _run(capsys, "counterexamples", "--which", "first")
    assert code == 0
    assert all(r["verdict"] == "pass" for r in json.loads(out))
    # the second fixture carries the contraction check that does not vanish as recorded
    code, out, _ = _run(capsys, "counterexamples", "--which", "second")
    assert code == 1
    failing = [r["operation"] for r in json.loads(out) if r["verdict"] != "pass"]
    assert failing == ["contraction_image"]


def test_corpus_override_and_invalid_fixture(capsys, tmp_path, monkeypatch):
    shutil.copy(data_dir() / "quadratic.json", tmp_path / "quadratic.json")
    monkeypatch.setenv("DESCENT_KIT_CORPUS", str(tmp_path))
    code, out, _ = _run(capsys, "corpus", "--list")
    assert code == 0 and out.split()[0] == "quadratic"
    (tmp_path / "broken.json").write_text("{")
    code, _, err = _run(capsys, "corpus")
    assert code == 2
    assert "invalid fixture" in err


@pytest.mark.parametrize("jobs", ["0", "-1"])
def test_bad_jobs(capsys, jobs):
    code, _, _ = _run(capsys, "corpus", "--jobs", jobs)
    assert code == 2
