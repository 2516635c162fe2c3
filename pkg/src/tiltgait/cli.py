"""Command-line entry point: ``tiltgait <subcommand> [--key value ...]``.

Any config key (see ``tiltgait.config.CONFIG_KEYS``) may be passed as
``--key value`` or ``--key=value`` after the subcommand; it overrides the
value from ``--config``. Data go to ``--out`` (``-`` for stdout); status
lines go to stdout, or to stderr when data occupy stdout.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from tiltgait import acceptance
from tiltgait.config import ConfigError, Settings, build_settings, load_config
from tiltgait.explorer import Direction, ExplorationDirection, explore_direction, survey_region
from tiltgait.invertibility import (
    INTEREST_REGION,
    GaitRestriction,
    Restriction,
    TriangleRegion,
    determinant_surface,
    region_clear_of_curves,
    zero_curves,
)
from tiltgait.simulator import ENGINES, Verdict, run

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _overrides(extras: Sequence[str]) -> dict[str, str]:
    out, i = {}, 0
    while i < len(extras):
        token = extras[i]
        if not token.startswith("--") or len(token) == 2:
            raise UsageError(f"unexpected argument {token!r}")
        if "=" in token:
            key, value = token[2:].split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extras):
                raise UsageError(f"{token} needs a value")
            key, value = token[2:], extras[i + 1]
            i += 2
        out[key] = value
    return out


def _triangle(text: str) -> TriangleRegion:
    try:
        v = [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"--triangle: cannot parse {text!r}") from exc
    if len(v) != 6:
        raise UsageError("--triangle needs six numbers: x1,y1,x2,y2,x3,y3")
    try:
        return TriangleRegion((v[0], v[1]), (v[2], v[3]), (v[4], v[5]))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


@contextlib.contextmanager
def _sink(out: str):
    if out == "-":
        yield sys.stdout
    else:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            yield fh


def _status(args, message: str) -> None:
    print(message, file=sys.stderr if getattr(args, "out", None) == "-" else sys.stdout)


def _restriction(args) -> GaitRestriction:
    return GaitRestriction(Restriction(args.restriction), args.alpha1)


def _fmt(v: float) -> str:
    return repr(float(v))


# -- subcommands ----------------------------------------------------------------


def cmd_simulate(args, settings: Settings) -> int:
    cfg = settings.sim
    telemetry, verdict = run(cfg, engine=args.engine)
    alpha = dict(zip(("alpha1", "alpha2", "alpha3", "alpha4"), cfg.gait.alpha))
    if args.out != "-":
        telemetry.write_csv(args.out.format(**alpha))
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(telemetry.columns)
        writer.writerows([[_fmt(v) for v in row] for row in telemetry.data])
    _status(args, f"verdict: {verdict.verdict.value} ({verdict.reason.value})")
    _status(args, json.dumps({"gait": list(cfg.gait.alpha), **verdict.as_dict()}))
    if args.expect == "stable" and verdict.verdict is not Verdict.STABLE:
        return EXIT_FAIL
    return EXIT_OK


def cmd_surface(args, settings: Settings) -> int:
    surface = determinant_surface(_restriction(args), settings.window, settings.grid_n, settings.sim.params)
    with _sink(args.out) as fh:
        writer = csv.writer(fh)
        writer.writerow(("alpha2", "alpha4", "det"))
        for i, a2 in enumerate(surface.axis):
            for j, a4 in enumerate(surface.axis):
                writer.writerow((_fmt(a2), _fmt(a4), _fmt(surface.values[i, j])))
    return EXIT_OK


def cmd_curves(args, settings: Settings) -> int:
    curves = zero_curves(_restriction(args), settings.window, settings.grid_n, settings.sim.params)
    region = _triangle(args.triangle) if args.triangle else INTEREST_REGION
    with _sink(args.out) as fh:
        writer = csv.writer(fh)
        writer.writerow(("curve_id", "alpha2", "alpha4"))
        for k, line in enumerate(curves.polylines):
            for a2, a4 in line:
                writer.writerow((k, _fmt(a2), _fmt(a4)))
    clear = region_clear_of_curves(region, curves)
    _status(args, f"curves: {len(curves)}; region_clear: {clear}")
    return EXIT_OK


def _write_ndjson(out: str, records) -> None:
    with _sink(out) as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def cmd_explore(args, settings: Settings) -> int:
    kinds = list(Direction) if args.direction == "all" else [Direction(args.direction)]
    records = []
    for kind in kinds:
        result = explore_direction(
            _restriction(args),
            ExplorationDirection(kind, settings.explore_step),
            settings.sim,
            workers=settings.workers,
        )
        records.extend(result.records())
        _status(args, f"{kind.value}: alpha2M = {result.alpha2M:g}, critical gait {result.critical_gait}")
    _write_ndjson(args.out, records)
    return EXIT_OK


def cmd_survey(args, settings: Settings) -> int:
    report = survey_region(_restriction(args), None, settings.sim, workers=settings.workers, pitch=settings.survey_pitch)
    _write_ndjson(args.out, report.records())
    _status(args, f"samples: {len(report.samples)}; non-Stable: {len(report.unstable)}; hull: {report.hull_vertices()}")
    return EXIT_OK


def cmd_check(args, settings: Settings) -> int:
    try:
        numbers = [int(n) for n in args.only.split(",")] if args.only else None
    except ValueError as exc:
        raise UsageError(f"--only: {exc}") from exc
    if numbers and any(n not in acceptance.CRITERIA for n in numbers):
        raise UsageError(f"--only: criteria are {sorted(acceptance.CRITERIA)}")
    results = acceptance.run_all(numbers, workers=settings.workers)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return EXIT_OK if passed == len(results) else EXIT_FAIL


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("--config", metavar="PATH", help="key = value config file")

    with_restriction = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    with_restriction.add_argument("--restriction", choices=[r.value for r in Restriction], default="equal")
    with_restriction.add_argument("--alpha1", type=float, default=0.0)

    parser = argparse.ArgumentParser(
        prog="tiltgait",
        allow_abbrev=False,
        description="Fixed-gait tiltrotor simulation and invertibility analysis.",
        epilog="Config keys may be given after the subcommand as --key value or --key=value.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", allow_abbrev=False, parents=[common], help="fly one gait; telemetry CSV + verdict")
    p.add_argument("--out", default="flight_{alpha1}_{alpha2}_{alpha3}_{alpha4}.csv",
                   help="CSV path; {alpha1}..{alpha4} are substituted; '-' for stdout")  # fmt: skip
    p.add_argument("--expect", choices=["stable"], help="exit 1 unless the verdict matches")
    p.add_argument("--engine", choices=ENGINES, default="compiled")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("surface", allow_abbrev=False, parents=[common, with_restriction], help="determinant grid CSV")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("curves", allow_abbrev=False, parents=[common, with_restriction], help="zero-curve polyline CSV")
    p.add_argument("--out", default="-")
    p.add_argument("--triangle", metavar="x1,y1,x2,y2,x3,y3", help="region to test for clearance")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("explore", allow_abbrev=False, parents=[common, with_restriction], help="critical-gait march NDJSON")
    p.add_argument("--direction", choices=["all"] + [d.value for d in Direction], default="all")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("survey", allow_abbrev=False, parents=[common, with_restriction], help="admissible-region NDJSON")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_survey)

    p = sub.add_parser("check", allow_abbrev=False, parents=[common], help="run the acceptance criteria")
    p.add_argument("--only", metavar="N[,N...]", help="comma-separated criterion numbers")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args, extras = parser.parse_known_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        mapping = load_config(args.config) if args.config else {}
        mapping.update(_overrides(extras))
        settings = build_settings(mapping)
        return args.func(args, settings)
    except (UsageError, ConfigError, ValueError, KeyError) as exc:
        print(f"tiltgait {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
