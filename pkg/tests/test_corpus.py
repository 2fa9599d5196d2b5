import copy
import json
import shutil

import pytest

from descent_kit import corpus as C
from descent_kit.errors import SchemaError


@pytest.fixture(scope="module")
def quadratic_raw():
    return json.loads((C.data_dir() / "quadratic.json").read_text())


def _expect_pointer(data, pointer):
    with pytest.raises(SchemaError) as exc:
        C.parse_fixture(data)
    assert exc.value.pointer == pointer
    return exc.value


def test_shipped_fixture_parses(quadratic_raw):
    fx = C.parse_fixture(copy.deepcopy(quadratic_raw))
    assert fx.id == "quadratic" and fx.kind == "cocycle"
    assert fx.checks == ["cocycle", "search", "coboundary"]


def test_malformed_polynomial_points_into_payload(quadratic_raw):
    data = copy.deepcopy(quadratic_raw)
    data["payload"]["form"] = "x^2 + + y^"
    _expect_pointer(data, "/payload/form")


def test_malformed_matrix_entry(quadratic_raw):
    data = copy.deepcopy(quadratic_raw)
    data["payload"]["maps"]["tau"][0][1] = "1 +"
    err = _expect_pointer(data, "/payload/maps/tau")
    assert err.pointer.startswith("/payload")


def test_unknown_kind(quadratic_raw):
    data = copy.deepcopy(quadratic_raw)
    data["kind"] = "surface"
    _expect_pointer(data, "/kind")


def test_kind_must_match_handler(quadratic_raw):
    data = copy.deepcopy(quadratic_raw)
    data["kind"] = "curve"
    _expect_pointer(data, "/kind")


def test_unknown_check(quadratic_raw):
    data = copy.deepcopy(quadratic_raw)
    data["checks"] = ["cocycle", "levitate"]
    _expect_pointer(data, "/checks/1")


@pytest.mark.parametrize("locus", ["no section here", "§99.9 Nowhere", "§2.1 A title that does not match"])
def test_bad_locus(quadratic_raw, locus):
    data = copy.deepcopy(quadratic_raw)
    data["locus"] = locus
    _expect_pointer(data, "/locus")


def test_unknown_handler(quadratic_raw):
    data = copy.deepcopy(quadratic_raw)
    data["id"] = "not_a_fixture"
    _expect_pointer(data, "/id")


def test_bad_tower(quadratic_raw):
    # reducible minimal polynomials are caught lazily, but a constant one is refused at once
    data = copy.deepcopy(quadratic_raw)
    data["towers"]["Q(i)"]["generators"][0]["minpoly"] = "3"
    _expect_pointer(data, "/towers/Q(i)")


def test_missing_required_field(quadratic_raw):
    data = copy.deepcopy(quadratic_raw)
    del data["checks"]
    with pytest.raises(SchemaError):
        C.parse_fixture(data)


def test_load_fixture_bad_json(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text('{"id": "quadratic",')
    with pytest.raises(SchemaError, match="invalid JSON"):
        C.load_fixture(p)
    with pytest.raises(SchemaError, match="cannot read"):
        C.load_fixture(tmp_path / "absent.json")


def _small_corpus(tmp_path, names=("quadratic", "trivial_sqrt")):
    for n in names:
        shutil.copy(C.data_dir() / f"{n}.json", tmp_path / f"{n}.json")
    return tmp_path


def test_duplicate_ids(tmp_path):
    d = _small_corpus(tmp_path, ("quadratic",))
    shutil.copy(d / "quadratic.json", d / "quadratic_copy.json")
    with pytest.raises(SchemaError, match="duplicate fixture id"):
        C.load_corpus(d)


def test_missing_directory(tmp_path):
    with pytest.raises(SchemaError):
        C.fixture_paths(tmp_path / "nope")


def test_corpus_dir_env_override(tmp_path, monkeypatch):
    d = _small_corpus(tmp_path)
    monkeypatch.setenv(C.ENV_VAR, str(d))
    assert C.corpus_dir() == d
    assert [f.id for f in C.load_corpus()] == ["quadratic", "trivial_sqrt"]
    monkeypatch.delenv(C.ENV_VAR)
    assert C.corpus_dir() == C.data_dir()


def test_empty_report():
    assert C.emit_report([], "text") == "no checks run"
    assert C.emit_report([], "json") == "[]"
    assert C.exit_code([]) == 0
    with pytest.raises(ValueError):
        C.emit_report([], "xml")


def test_exit_code_and_verdicts():
    ok = C.Report("a", "x", "pass", {}, 0.0)
    bad = C.Report("a", "y", "fail", {}, 0.0)
    assert C.exit_code([ok]) == 0
    assert C.exit_code([ok, bad]) == 1
    with pytest.raises(ValueError):
        C.Report("a", "z", "maybe", {}, 0.0)


def _strip_timing(text):
    rows = json.loads(text)
    for r in rows:
        r.pop("timing")
    return rows


def test_report_is_deterministic(tmp_path):
    fixtures = C.load_corpus(_small_corpus(tmp_path))
    a = C.emit_report(C.run_fixtures(fixtures))
    b = C.emit_report(C.run_fixtures(fixtures))
    assert _strip_timing(a) == _strip_timing(b)
    rows = _strip_timing(a)
    assert [(r["fixture"], r["operation"]) for r in rows] == [
        (f.id, name) for f in fixtures for name in f.checks
    ]
    assert all(r["verdict"] == "pass" for r in rows)


def test_parallel_matches_serial(tmp_path):
    fixtures = C.load_corpus(_small_corpus(tmp_path))
    serial = C.emit_report(C.run_fixtures(fixtures))
    parallel = C.emit_report(C.run_fixtures(fixtures, jobs=2))
    assert _strip_timing(serial) == _strip_timing(parallel)


def test_text_report_summary(tmp_path):
    fixtures = C.load_corpus(_small_corpus(tmp_path, ("quadratic",)))
    text = C.emit_report(C.run_fixtures(fixtures), "text")
    assert text.splitlines()[-1] == "3/3 passed"
    assert text.startswith("PASS  quadratic:cocycle")


def test_jsonable_sorts_keys():
    from fractions import Fraction

    assert C.jsonable({"b": Fraction(1, 2), "a": (1, True)}) == {"a": [1, True], "b": "1/2"}
    assert list(C.jsonable({"b": 1, "a": 2})) == ["a", "b"]
