"""Fixture corpus: schema validation, resolution, and verification reports."""

from __future__ import annotations

import json
import os
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import jsonschema

from . import __version__
from .errors import DescentKitError, MalformedSpec, SchemaError
from .fields import FieldTower, make_tower
from .groups import DEFAULT_ENUM_CAP

KINDS = ("field", "curve", "cocycle", "triple", "counterexample")
VERDICTS = ("pass", "fail", "error")
ENV_VAR = "DESCENT_KIT_CORPUS"

# failures of a mathematical check, as opposed to bad input or a crash
_NEGATIVE = (
    "IdentityFails",
    "PowerStructureFails",
    "SubstitutionNonzero",
    "NoMatch",
    "AmbiguousMatch",
    "NotAnIsomorphism",
    "NoSolutionOverField",
    "ScalarLiftFailure",
    "MarkingNotFixed",
    "NotGaloisStable",
    "MapConstantOnCurve",
    "PointNotOnCurve",
    "CheckFailed",
)


class CheckFailed(DescentKitError):
    """A check ran to completion and its certificate does not match the expectation."""


def data_dir() -> Path:
    return Path(str(resources.files("descent_kit") / "data"))


def corpus_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    return Path(env) if env else data_dir()


@lru_cache(maxsize=None)
def _schema() -> dict:
    return json.loads((data_dir() / "fixture.schema.json").read_text())


@lru_cache(maxsize=None)
def section_table() -> dict[str, str]:
    return json.loads((data_dir() / "sections.json").read_text())["sections"]


_LOCUS = re.compile(r"^§([0-9A-Z]+(?:\.[0-9]+)*)\s+(.*)$")


def check_locus(locus: str) -> str:
    """The section number of a locus string; raises SchemaError if it is not in the table."""
    m = _LOCUS.match(locus)
    if not m:
        raise SchemaError("locus must start with a section number", "/locus")
    sec, rest = m.groups()
    table = section_table()
    if sec not in table:
        raise SchemaError(f"unknown section {sec}", "/locus")
    if not rest.startswith(table[sec]):
        raise SchemaError(f"section {sec} is titled {table[sec]!r}", "/locus")
    return sec


def _pointer(parts: Iterable[Any]) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in parts)


# ---------------------------------------------------------------------------
# fixtures


@dataclass
class Fixture:
    id: str
    locus: str
    kind: str
    payload: dict
    expected: dict
    checks: list[str]
    towers: dict[str, FieldTower] = field(default_factory=dict)
    handler: str = ""
    resolved: dict = field(default_factory=dict)
    path: Path | None = None
    raw: dict = field(default_factory=dict, repr=False)

    def tower(self, name: str) -> FieldTower:
        return self.towers[name]


class Resolver:
    """Reads payload entries, turning parse failures into SchemaError with a pointer."""

    def __init__(self, fx: Fixture) -> None:
        self.fx = fx

    def get(self, *path: Any) -> Any:
        cur: Any = self.fx.payload
        for k, p in enumerate(path):
            try:
                cur = cur[p]
            except (KeyError, IndexError, TypeError):
                raise SchemaError(f"missing entry {p!r}", _pointer(("payload",) + path[: k + 1])) from None
        return cur

    def has(self, *path: Any) -> bool:
        try:
            self.get(*path)
        except SchemaError:
            return False
        return True

    def wrap(self, path: Sequence[Any], build: Callable[[], Any]) -> Any:
        try:
            return build()
        except SchemaError:
            raise
        except (DescentKitError, ValueError, SyntaxError, TypeError, KeyError, ZeroDivisionError, IndexError) as e:
            raise SchemaError(f"{type(e).__name__}: {e}", _pointer(("payload",) + tuple(path))) from None

    def tower(self, *path: Any) -> FieldTower:
        name = self.get(*path)
        if name not in self.fx.towers:
            raise SchemaError(f"unknown tower {name!r}", _pointer(("payload",) + path))
        return self.fx.towers[name]

    def elem(self, t: FieldTower, *path: Any):
        v = self.get(*path)
        return self.wrap(path, lambda: t.parse(v) if isinstance(v, str) else t(v))

    def poly(self, t: FieldTower, variables: Sequence[str], *path: Any, extra: dict | None = None):
        from .polys import MPoly

        v = self.get(*path)
        return self.wrap(path, lambda: MPoly.parse(_text(v), t, tuple(variables), extra))

    def automorphism(self, t: FieldTower, *path: Any):
        from .fields import FieldAutomorphism

        v = self.get(*path)
        return self.wrap(path, lambda: FieldAutomorphism(t, {g: t.parse(s) for g, s in v.items()}))

    def automorphisms(self, t: FieldTower, *path: Any) -> dict:
        return {g: self.automorphism(t, *path, g) for g in self.get(*path)}

    def group(self, *path: Any):
        from .groups import PresentedGroup

        v = self.get(*path)
        return self.wrap(
            path, lambda: PresentedGroup.from_strings(v["generators"], v["relations"], v.get("order"), v.get("label", ""))
        )

    def matrix(self, t: FieldTower, *path: Any):
        from .matrices import ProjLinearMap

        v = self.get(*path)
        return self.wrap(path, lambda: ProjLinearMap.from_entries(t, [[t.parse(_text(c)) for c in row] for row in v]))

    def affine(self, t: FieldTower, variables: Sequence[str], *path: Any):
        from .branches import AffineRationalMap

        v = self.get(*path)
        return self.wrap(path, lambda: AffineRationalMap.parse(t, tuple(variables), dict(v)))

    def series(self, t: FieldTower, *path: Any, var: str = "x"):
        from .series import FracSeries

        v = self.get(*path)

        def build():
            coeffs = {}
            for num, den, c in v:
                coeffs[Fraction(num, den)] = t.parse(_text(c)).raw
            return FracSeries(t, coeffs, None, var)

        return self.wrap(path, build)


def _text(v: Any) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, Fraction)) and not isinstance(v, bool):
        return str(v)
    raise MalformedSpec(f"expected a polynomial string, got {type(v).__name__}")


def _validate(data: Any) -> None:
    validator = jsonschema.Draft202012Validator(_schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        e = errors[0]
        raise SchemaError(e.message, _pointer(e.absolute_path))


def parse_fixture(data: Any, path: Path | None = None) -> Fixture:
    from .handlers import HANDLERS

    _validate(data)
    check_locus(data["locus"])
    towers = {}
    for name, spec in data["towers"].items():
        try:
            towers[name] = make_tower(spec, name)
        except (DescentKitError, ValueError, SyntaxError) as e:
            raise SchemaError(f"{type(e).__name__}: {e}", _pointer(("towers", name))) from None
    hname = data.get("handler", data["id"])
    handler = HANDLERS.get(hname)
    if handler is None:
        raise SchemaError(f"no handler for fixture {hname!r}", "/handler" if "handler" in data else "/id")
    if handler.kind != data["kind"]:
        raise SchemaError(f"handler {hname!r} expects kind {handler.kind!r}", "/kind")
    for k, name in enumerate(data["checks"]):
        if not handler.knows(name):
            raise SchemaError(f"unknown check {name!r}", f"/checks/{k}")
    fx = Fixture(
        id=data["id"],
        locus=data["locus"],
        kind=data["kind"],
        payload=data["payload"],
        expected=data["expected"],
        checks=list(data["checks"]),
        towers=towers,
        handler=hname,
        path=path,
        raw=data,
    )
    fx.resolved = handler.resolve(Resolver(fx))
    return fx


def load_fixture(path: str | os.PathLike) -> Fixture:
    """Read, validate and resolve one fixture file."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise SchemaError(f"cannot read {p}: {e.strerror}", "") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}", "") from None
    return parse_fixture(data, p)


def fixture_paths(directory: str | os.PathLike | None = None) -> list[Path]:
    d = Path(directory) if directory is not None else corpus_dir()
    if not d.is_dir():
        raise SchemaError(f"corpus directory {d} does not exist", "")
    out = []
    for p in sorted(d.glob("*.json")):
        if p.name in ("fixture.schema.json", "sections.json"):
            continue
        out.append(p)
    return out


def load_corpus(directory: str | os.PathLike | None = None) -> list[Fixture]:
    fixtures = [load_fixture(p) for p in fixture_paths(directory)]
    seen: dict[str, Path | None] = {}
    for fx in fixtures:
        if fx.id in seen:
            raise SchemaError(f"duplicate fixture id {fx.id!r} ({seen[fx.id]} and {fx.path})", "/id")
        seen[fx.id] = fx.path
    return sorted(fixtures, key=lambda f: f.id)


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class Options:
    prec: int | None = None
    levels: int | None = None
    enum_cap: int = DEFAULT_ENUM_CAP
    recompute: bool = False


@dataclass
class Report:
    fixture: str
    operation: str
    verdict: str
    certificates: Any
    timing: float
    locus: str = ""
    message: str = ""
    version: str = __version__

    def __post_init__(self) -> None:
        if self.verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}")

    def as_dict(self) -> dict:
        return {
            "fixture": self.fixture,
            "operation": self.operation,
            "verdict": self.verdict,
            "locus": self.locus,
            "message": self.message,
            "certificates": jsonable(self.certificates),
            "timing": round(self.timing, 3),
            "version": self.version,
        }


def jsonable(obj: Any) -> Any:
    """Plain JSON values with dict keys sorted, so serialized reports are canonical."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(obj[k]) for k in sorted(obj, key=str)}
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    return str(obj)


def exit_code(reports: Sequence[Report]) -> int:
    return 0 if all(r.verdict == "pass" for r in reports) else 1


def emit_report(reports: Sequence[Report], fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps([r.as_dict() for r in reports], indent=2, ensure_ascii=False)
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    if not reports:
        return "no checks run"
    lines = []
    for r in reports:
        line = f"{r.verdict.upper():5} {r.fixture}:{r.operation} [{r.locus}] ({r.timing:.2f}s)"
        if r.message:
            line += f" {r.message}"
        lines.append(line)
    passed = sum(r.verdict == "pass" for r in reports)
    lines.append(f"{passed}/{len(reports)} passed")
    return "\n".join(lines)


def run_check(fx: Fixture, name: str, opts: Options | None = None) -> Report:
    from .handlers import HANDLERS

    opts = opts or Options()
    handler = HANDLERS[fx.handler]
    start = time.perf_counter()
    try:
        cert = handler.run(fx, name, opts)
        verdict = "pass" if cert.get("passed", True) else "fail"
        message = "" if verdict == "pass" else cert.get("reason", "certificate does not match")
    except DescentKitError as e:
        cert = {"error": type(e).__name__}
        if type(e).__name__ in _NEGATIVE:
            verdict = "fail"
        else:
            verdict = "error"
        message = f"{type(e).__name__}: {e}"
    except Exception as e:  # a bug or resource problem, never a verdict on the mathematics
        cert = {"error": type(e).__name__}
        verdict, message = "error", f"{type(e).__name__}: {e}"
    elapsed = time.perf_counter() - start
    locus = cert.get("locus") if isinstance(cert.get("locus"), str) else fx.locus
    return Report(fx.id, name, verdict, cert, elapsed, locus, message)


def _run_path_check(args: tuple[str, str, Options]) -> Report:
    path, name, opts = args
    return run_check(load_fixture(path), name, opts)


def run_fixtures(
    fixtures: Sequence[Fixture],
    opts: Options | None = None,
    *,
    only: Callable[[Fixture, str], bool] | None = None,
    jobs: int = 1,
) -> list[Report]:
    """One report per (fixture, declared check), ordered by fixture id then declaration order."""
    opts = opts or Options()
    todo = [(fx, name) for fx in sorted(fixtures, key=lambda f: f.id) for name in fx.checks if only is None or only(fx, name)]
    if jobs > 1 and all(fx.path is not None for fx, _ in todo):
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_run_path_check, [(str(fx.path), name, opts) for fx, name in todo]))
    return [run_check(fx, name, opts) for fx, name in todo]
