"""Command-line driver.

Exit codes: 0 everything checked out, 1 a mathematical check failed (or a
map broke its ratio gate), 2 usage or input-format error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import coverage as cov
from . import counterexamples as cx
from .contraction import NotAContraction, PiecewiseAffineMap, banach_iterate, lipschitz
from .numerics import FinSet, RInterval, format_rational, parse_rational, random_rational
from .witness import (
    IN,
    HistoryFormatError,
    construct,
    gdelta_cover_report,
    cover_length,
    load_history,
    member_fsigma,
    member_gdelta,
    recheck_verdict,
    save_history,
    verify_history,
    verify_stage,
)

OK, FAILED, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _show(value):
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, (list, tuple)):
        return [_show(v) for v in value]
    if isinstance(value, dict):
        return {k: _show(v) for k, v in value.items()}
    return value


@dataclass
class RunReport:
    command: str
    inputs: dict
    assertions: list = field(default_factory=list)  # (name, lhs, rhs, ok)
    data: dict = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all(ok for *_, ok in self.assertions)

    def check(self, name, lhs, rhs, ok) -> bool:
        self.assertions.append((name, lhs, rhs, bool(ok)))
        return bool(ok)

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "inputs": _show(self.inputs),
            "pass": self.passed,
            "assertions": [
                {"name": n, "lhs": _show(l), "rhs": _show(r), "ok": ok}
                for n, l, r, ok in self.assertions
            ],
            "data": _show(self.data),
            "elapsed_seconds": round(self.elapsed, 3),
        }

    def render(self) -> str:
        lines = [f"{self.command}: {'PASS' if self.passed else 'FAIL'} ({self.elapsed:.2f}s)"]
        for key, value in self.data.items():
            lines.append(f"  {key}: {json.dumps(_show(value))}")
        failing = [a for a in self.assertions if not a[3]]
        shown = failing if failing else self.assertions[:40]
        for name, lhs, rhs, ok in shown:
            lines.append(f"  [{'ok' if ok else 'FAIL'}] {name}: {_show(lhs)} vs {_show(rhs)}")
        hidden = len(self.assertions) - len(shown)
        if hidden > 0:
            lines.append(f"  ... {hidden} more assertions ({len(failing)} failing)")
        return "\n".join(lines)


def _rational_arg(text: str) -> Fraction:
    try:
        if "/" not in text:
            return Fraction(int(text))
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def _load_map(path) -> PiecewiseAffineMap:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return PiecewiseAffineMap.from_json(data)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read map {path}: {exc}") from exc


def _load_history(path):
    try:
        return load_history(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except HistoryFormatError as exc:
        raise UsageError(f"malformed history {path}: {exc}") from exc


# -- commands ---------------------------------------------------------------------

def cmd_construct(args, report: RunReport) -> int:
    try:
        hulls, certs = construct(args.stages, args.size_cap)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    try:
        save_history(args.out, hulls, certs)
    except OSError as exc:
        raise UsageError(f"cannot write {args.out}: {exc}") from exc
    report.data.update({
        "stages": len(certs),
        "inserted": sum(c.inserted for c in certs),
        "skeleton_size": len(hulls[-1].skeleton),
        "radius": hulls[-1].radius,
        "out": str(args.out),
    })
    report.check("stages run", len(certs), args.stages, 1 <= len(certs) <= args.stages)
    return OK


def cmd_verify(args, report: RunReport) -> int:
    raw = _load_history(args.history)
    fails = verify_history(raw.entries, raw.certs)
    report.data.update({"stages": len(raw.certs), "failures": len(fails)})
    for f in fails:
        report.check(f"stage {f.stage}: {f.check}", f.detail, "", False)
    report.check("all certificate checks", len(fails), 0, not fails)
    return OK if not fails else FAILED


def _stage_geometry(raw, stage: int, report: RunReport):
    """Geometry of a verified Inserted stage, or None (with a failed check) if it does not verify."""
    if not 0 <= stage < len(raw.certs):
        raise UsageError(f"stage {stage} outside history with {len(raw.certs)} stages")
    cert = raw.certs[stage]
    (old_pts, old_rad), (new_pts, new_rad) = raw.entries[stage], raw.entries[stage + 1]
    try:
        fails = verify_stage(stage, old_pts, old_rad, new_pts, new_rad, cert)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        fails = [exc]
    if fails:
        report.check(f"stage {stage} certificate verifies", str(fails[0]), "", False)
        return None
    if cert.case != "Inserted":
        raise UsageError(f"stage {stage} is {cert.case}; coverage needs an Inserted stage")
    sub = type(raw)(raw.entries[stage:stage + 2], [cert])
    _, (typed,) = sub.to_construction()
    return cov.StageGeometry.build(typed, FinSet(old_pts, presorted=True))


def cmd_coverage(args, report: RunReport) -> int:
    if args.map is None and args.trials < 1:
        raise UsageError("--trials must be at least 1")
    raw = _load_history(args.history)
    geom = _stage_geometry(raw, args.stage, report)
    if geom is None:
        return FAILED
    if args.map is not None:
        maps = [("file", _load_map(args.map))]
    else:
        families = cov.FAMILIES if args.family == "all" else (args.family,)
        maps = cov.trial_maps(geom, args.seed, args.trials, families)
    reports = []
    for family, f in maps:
        try:
            rep = cov.coverage_report(args.stage, f, geom)
        except cov.RatioViolation as exc:
            report.check("lipschitz(f) <= r", exc.ratio, exc.bound, False)
            report.data["offending_map"] = f.to_json()
            return FAILED
        rep["family"] = family
        reports.append(rep)
        report.check(f"{family}: min(m_Y, m_Z) < k", min(rep["m_Y"], rep["m_Z"]), geom.k, rep["pass"])
    report.data.update({
        "stage": args.stage, "k": geom.k, "n": geom.cert.n, "r": geom.cert.r, "trials": len(reports),
        "max_m_Y": max(r["m_Y"] for r in reports), "max_m_Z": max(r["m_Z"] for r in reports),
    })
    if args.reports:
        report.data["reports"] = reports
    return OK if report.passed else FAILED


def _demo_history(args):
    if args.history is not None:
        raw = _load_history(args.history)
        fails = verify_history(raw.entries, raw.certs)
        if fails:
            raise UsageError(f"history does not verify: {fails[0]}")
        return raw.to_construction()[0]
    hulls, _ = construct(args.stages, args.size_cap)
    return hulls


def _demo_fsigma(args, report: RunReport) -> int:
    hulls = _demo_history(args)
    rng = random.Random(args.seed)
    points = [args.point] if args.point is not None else [
        random_rational(rng, Fraction(0), Fraction(1), args.max_den) for _ in range(args.points)]
    counts = {"In": 0, "Out": 0, "Unknown": 0}
    bad_witness, non_monotone = [], []
    depth = len(hulls) - 1
    for x in points:
        seen_in = False
        for m in range(depth + 1):
            v = member_fsigma(x, hulls, m)
            if v.kind != "Unknown" and not recheck_verdict(x, v, hulls, "fsigma"):
                bad_witness.append((x, m))
            if seen_in and v.kind != IN:
                non_monotone.append((x, m))
            seen_in = seen_in or v.kind == IN
        counts[v.kind] += 1
    report.data.update({"points": len(points), "depth": depth, "verdicts": counts})
    if args.point is not None:
        report.data["verdict"] = member_fsigma(args.point, hulls, depth).to_json()
    report.check("witnesses re-check", len(bad_witness), 0, not bad_witness)
    report.check("verdicts monotone in depth", len(non_monotone), 0, not non_monotone)
    return OK if report.passed else FAILED


def _demo_gdelta(args, report: RunReport) -> int:
    hulls = _demo_history(args)
    depth = len(hulls) - 1
    rng = random.Random(args.seed)
    points = [args.point] if args.point is not None else [
        random_rational(rng, Fraction(0), Fraction(1), args.max_den) for _ in range(args.points)]
    bad = []
    for x in points:
        v = member_gdelta(x, hulls, depth)
        if v.kind != "Out" or not recheck_verdict(x, v, hulls, "gdelta"):
            bad.append(x)
    if args.point is not None:
        report.data["verdict"] = member_gdelta(args.point, hulls, depth).to_json()
        window = RInterval(max(Fraction(0), args.point - Fraction(1, 64)), min(Fraction(1), args.point + Fraction(1, 64)))
        pieces = gdelta_cover_report(window, hulls, depth, 50)
        report.data["cover_window"] = window.to_json()
        report.data["cover_length_first_50_translates"] = cover_length(pieces)
    report.data.update({"points": len(points), "depth": depth})
    report.check("rationals are Out with re-checked translate", len(bad), 0, not bad)
    return OK if report.passed else FAILED


def cmd_demo(args, report: RunReport) -> int:
    if args.instance == "fsigma":
        return _demo_fsigma(args, report)
    if args.instance == "gdelta":
        return _demo_gdelta(args, report)
    sizes = {"segment": 10**4, "accumulation": 10**3, "wave": 10**4}
    count = args.pairs if args.pairs is not None else sizes[args.instance]
    vr = cx.DEMOS[args.instance](count, args.seed)
    report.data.update(vr.to_json())
    report.check("violations", len(vr.violations), 0, vr.passed)
    if args.instance == "wave":
        target = Fraction(99, 100)
        report.check("max distance ratio >= 99/100", vr.max_ratio, target, vr.max_ratio >= target)
    return OK if report.passed else FAILED


def cmd_iterate(args, report: RunReport) -> int:
    if args.tol <= 0:
        raise UsageError("--tol must be positive")
    f = _load_map(args.map)
    try:
        cert = banach_iterate(f, args.x0, args.tol)
    except NotAContraction:
        report.check("lipschitz(f) < 1", lipschitz(f), Fraction(1), False)
        return FAILED
    report.data["certificate"] = cert.to_json()
    report.check("a-posteriori bound <= tol", cert.bound, args.tol, cert.bound <= args.tol)
    return OK


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    # accepted before or after the subcommand; SUPPRESS keeps the subparser
    # from resetting a flag given before it
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="print the report as JSON")

    parser = argparse.ArgumentParser(prog="bfpp", description=__doc__.splitlines()[0])
    parser.add_argument("--json", action="store_true", help="print the report as JSON")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", parents=[common], help="run the diagonal construction")
    p.add_argument("--stages", type=_positive_int, required=True)
    p.add_argument("--size-cap", type=_positive_int, default=10**5,
                   help="stop once the skeleton has more points than this")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", parents=[common], help="re-check every certificate of a history")
    p.add_argument("history", type=Path)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("coverage", parents=[common], help="certify non-coverage at one stage")
    p.add_argument("--history", type=Path, required=True)
    p.add_argument("--stage", type=int, required=True)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--map", type=Path, help="JSON piecewise-affine map")
    src.add_argument("--family", choices=("all",) + cov.FAMILIES, default="all")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reports", action="store_true", help="include per-map reports")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("demo", parents=[common], help="run a counterexample or membership batch")
    p.add_argument("instance", choices=("segment", "accumulation", "wave", "fsigma", "gdelta"))
    p.add_argument("--pairs", type=_positive_int, help="sample size for the map demos")
    p.add_argument("--points", type=_positive_int, default=1000, help="sample size for the set demos")
    p.add_argument("--point", type=_rational_arg, help="a single point for the set demos")
    p.add_argument("--max-den", type=_positive_int, default=10**4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--history", type=Path, help="history for the set demos (default: build one)")
    p.add_argument("--stages", type=_positive_int, default=8)
    p.add_argument("--size-cap", type=_positive_int, default=10**4)
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("iterate", parents=[common], help="certified Banach iteration")
    p.add_argument("--map", type=Path, required=True)
    p.add_argument("--x0", type=_rational_arg, default=Fraction(0))
    p.add_argument("--tol", type=_rational_arg, required=True)
    p.set_defaults(func=cmd_iterate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    if getattr(args, "point", None) is not None and not 0 <= args.point <= 1:
        print("bfpp: --point must lie in [0, 1]", file=sys.stderr)
        return USAGE
    inputs = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()
              if k not in ("func", "json")}
    report = RunReport(args.command, inputs)
    start = time.perf_counter()
    try:
        code = args.func(args, report)
    except UsageError as exc:
        print(f"bfpp {args.command}: {exc}", file=sys.stderr)
        return USAGE
    except cov.CoverageFault as exc:
        report.check("counting argument", str(exc), "", False)
        code = FAILED
    report.elapsed = time.perf_counter() - start
    if args.json:
        print(json.dumps(report.to_json(), indent=2))
    else:
        print(report.render())
    if code == OK and not report.passed:
        code = FAILED
    return code


if __name__ == "__main__":
    sys.exit(main())
