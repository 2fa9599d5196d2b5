"""descent-kit command line."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .corpus import (
    Fixture,
    Options,
    Report,
    emit_report,
    exit_code,
    fixture_paths,
    load_corpus,
    load_fixture,
    run_fixtures,
)
from .errors import DescentKitError, SchemaError
from .groups import DEFAULT_ENUM_CAP

EXIT_USAGE = 2

_COCYCLE_WORDS = ("cocycle", "relations", "search")
_DESCEND_WORDS = ("coboundary", "descend", "branch_descent")


class UsageError(Exception):
    pass


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--corpus", help="fixture directory (default: $DESCENT_KIT_CORPUS or the shipped corpus)")
    p.add_argument("--prec", type=int, help="series precision in terms (default: per fixture)")
    p.add_argument("--levels", type=int, help="levels of the wild iteration (default: per fixture)")
    p.add_argument("--enum-cap", type=int, default=DEFAULT_ENUM_CAP, help="group enumeration cap")
    p.add_argument("--recompute", action="store_true", help="recompute cached branch data")
    p.add_argument("--jobs", type=int, default=1, help="run independent checks in this many processes")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="descent-kit", description="Exact checks for Weil descent of marked curves.")
    ap.add_argument("--version", action="version", version=f"descent-kit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-catalog", help="verify the genus-0 Galois Belyi catalog")
    _add_common(p)

    p = sub.add_parser("branches", help="compute the branch set of a fixture")
    _add_common(p)
    p.add_argument("--fixture", required=True)
    p.add_argument("--p", type=int, help="prime, for the Artin-Schreier fixture")
    p.add_argument("--case", help="case name, for fixtures with several curves")

    p = sub.add_parser("cocycle", help="cocycle relation checks and searches")
    _add_common(p)
    p.add_argument("--fixture", action="append", help="restrict to these fixture ids")

    p = sub.add_parser("descend", help="coboundaries and explicit descents")
    _add_common(p)
    p.add_argument("--fixture", action="append", help="restrict to these fixture ids")

    p = sub.add_parser("counterexamples", help="the two counterexample curves")
    _add_common(p)
    p.add_argument("--which", choices=("first", "second", "both"), default="both")

    p = sub.add_parser("corpus", help="run every declared check of every fixture")
    _add_common(p)
    p.add_argument("--fixture", action="append", help="restrict to these fixture ids")
    p.add_argument("--list", action="store_true", help="list fixtures and checks without running them")
    return ap


def _options(args: argparse.Namespace) -> Options:
    for name in ("prec", "levels", "enum_cap", "jobs"):
        v = getattr(args, name, None)
        if v is not None and v < 1:
            raise UsageError(f"--{name.replace('_', '-')} must be positive")
    return Options(prec=args.prec, levels=args.levels, enum_cap=args.enum_cap, recompute=args.recompute)


def _corpus(args: argparse.Namespace) -> list[Fixture]:
    fixtures = load_corpus(args.corpus)
    wanted = getattr(args, "fixture", None)
    if wanted:
        wanted = [wanted] if isinstance(wanted, str) else wanted
        known = {f.id for f in fixtures}
        missing = [w for w in wanted if w not in known]
        if missing:
            raise UsageError(f"unknown fixture(s): {', '.join(missing)}")
        fixtures = [f for f in fixtures if f.id in wanted]
    return fixtures


def _by_id(args: argparse.Namespace, ident: str) -> Fixture:
    for p in fixture_paths(args.corpus):
        fx = load_fixture(p)
        if fx.id == ident:
            return fx
    raise UsageError(f"unknown fixture {ident!r}")


def _word_filter(words: Sequence[str]) -> Callable[[Fixture, str], bool]:
    return lambda fx, name: any(w in name for w in words)


def _cmd_catalog(args, opts) -> list[Report]:
    fixtures = [f for f in load_corpus(args.corpus) if f.kind == "triple"]
    return run_fixtures(fixtures, opts, jobs=args.jobs)


def _cmd_cocycle(args, opts) -> list[Report]:
    return run_fixtures(_corpus(args), opts, only=_word_filter(_COCYCLE_WORDS), jobs=args.jobs)


def _cmd_descend(args, opts) -> list[Report]:
    return run_fixtures(_corpus(args), opts, only=_word_filter(_DESCEND_WORDS), jobs=args.jobs)


def _cmd_counterexamples(args, opts) -> list[Report]:
    which = ["first", "second"] if args.which == "both" else [args.which]
    ids = {f"counterexample_{w}" for w in which}
    fixtures = [f for f in load_corpus(args.corpus) if f.id in ids]
    if len(fixtures) != len(ids):
        raise UsageError("counterexample fixtures missing from the corpus")
    return run_fixtures(fixtures, opts, jobs=args.jobs)


def _cmd_corpus(args, opts) -> list[Report]:
    return run_fixtures(_corpus(args), opts, jobs=args.jobs)


def _cmd_branches(args, opts) -> list[Report]:
    from .handlers import branch_sets

    fx = _by_id(args, args.fixture)
    start = time.perf_counter()
    try:
        sets = branch_sets(fx, opts, p=args.p, case=args.case)
    except KeyError as e:
        raise UsageError(str(e.args[0])) from None
    except DescentKitError as e:
        return [Report(fx.id, "branches", "error", {"error": type(e).__name__}, time.perf_counter() - start, fx.locus, str(e))]
    reports = []
    elapsed = time.perf_counter() - start
    for name, B in sets.items():
        cert = {"branch_set": B.to_json(), "complete": B.complete, "separated": B.separated()}
        verdict = "pass" if B.complete and B.separated() else "fail"
        op = f"branches:{name}" if name else "branches"
        reports.append(Report(fx.id, op, verdict, cert, elapsed / max(len(sets), 1), fx.locus))
    return reports


def _list(args) -> str:
    lines = []
    for fx in _corpus(args):
        lines.append(f"{fx.id} [{fx.kind}] {fx.locus}")
        lines.extend(f"  {c}" for c in fx.checks)
    return "\n".join(lines)


COMMANDS = {
    "verify-catalog": _cmd_catalog,
    "branches": _cmd_branches,
    "cocycle": _cmd_cocycle,
    "descend": _cmd_descend,
    "counterexamples": _cmd_counterexamples,
    "corpus": _cmd_corpus,
}


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE
    try:
        opts = _options(args)
        if args.command == "corpus" and args.list:
            _write(_list(args), args.out)
            return 0
        reports = COMMANDS[args.command](args, opts)
        _write(emit_report(reports, args.format), args.out)
    except UsageError as e:
        print(f"descent-kit: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SchemaError as e:
        print(f"descent-kit: invalid fixture: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"descent-kit: {e}", file=sys.stderr)
        return EXIT_USAGE
    return exit_code(reports)


if __name__ == "__main__":
    sys.exit(main())
