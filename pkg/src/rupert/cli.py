"""Command-line interface: ``rupert {search,verify,render,report,catalog}``.

Exit statuses: 0 success, 1 usage or I/O error, 2 verification failure,
3 numeric degeneracy.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import mpmath

from . import catalog
from .mu import UnboundedPassageError
from .projection import DegenerateSilhouetteError
from .render import RenderSpec, render_svg, write_report
from .search import SearchConfig, read_records, run_search, write_records
from .solver import SolverConfig
from .verify import CertificationError, PrecisionContext, floor_decimal, recheck, verify_theorem2

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_DEGENERATE = 0, 1, 2, 3

# stored mu may exceed the recomputed value by rounding only
STALE_RTOL = 1e-12


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _shape_resolver(mesh):
    if mesh is not None:
        P = catalog.load_mesh(mesh)
        return lambda name: P
    return catalog.builtin


def cmd_search(args) -> int:
    P = catalog.resolve(args.shape, args.mesh)
    solver = SolverConfig()
    if args.delta0 is not None:
        solver = replace(solver, delta0=args.delta0)
    if args.delta_min is not None:
        solver = replace(solver, delta_min=args.delta_min)
    trials = args.trials if args.trials is not None or args.seconds is not None else 100
    cfg = SearchConfig(seed=args.seed, trials=trials, seconds=args.seconds, solver=solver, workers=args.workers)
    out = Path(args.out) if args.out else None
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text("")
    best = run_search(P, cfg, out)
    if best is None:
        print(f"{P.name}: no trial produced a finite passage", file=sys.stderr)
        return EXIT_DEGENERATE
    print(
        f"{P.name}\tmu >= {floor_decimal(best.mu_double)}\tcertificate_norm {best.certificate_norm:.3e}"
        f"\ttrials {best.trials}\tbest_trial {best.trial}"
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    ctx = PrecisionContext(args.digits)
    status = EXIT_OK
    if args.theorem2:
        try:
            res = verify_theorem2(ctx)
        except CertificationError as exc:
            print(f"theorem2\tFAIL\t{exc}")
            return EXIT_VERIFY
        with mpmath.workdps(ctx.digits):
            print(f"theorem2\tPASS\tmu = {mpmath.nstr(res.mu, 30)}\tmargin {mpmath.nstr(res.margin, 5)}")
    if args.records is None:
        if not args.theorem2:
            raise UsageError("verify needs a record file or --theorem2")
        return status
    resolve = _shape_resolver(args.mesh)
    records = read_records(args.records)
    for rec in records:
        P = resolve(rec.shape)
        res = recheck(P, rec.x, ctx)
        rec.mu_certified = res.mu_12
        stale = res.mu < mpmath.mpf(rec.mu_double) * (1 - STALE_RTOL)
        verdict = "FAIL (stale: stored mu exceeds recomputed mu)" if stale else "PASS"
        print(f"{rec.shape}\t{verdict}\tmu >= {res.mu_12}\tstored {rec.mu_double!r}")
        if stale:
            status = EXIT_VERIFY
    write_records(args.records, records)
    return status


def _best_record(path):
    records = read_records(path)
    if not records:
        raise UsageError(f"{path}: no records")
    return max(records, key=lambda r: r.mu_double)


def cmd_render(args) -> int:
    rec = _best_record(args.records)
    P = _shape_resolver(args.mesh)(rec.shape)
    spec = RenderSpec(size=args.size)
    Path(args.out).write_text(render_svg(P, rec.x, spec, scale=args.scale))
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_report(args) -> int:
    records = read_records(args.records)
    if not records:
        raise UsageError(f"{args.records}: no records")
    if args.best_only:
        best = {}
        for r in records:
            if r.shape not in best or r.mu_double > best[r.shape].mu_double:
                best[r.shape] = r
        records = list(best.values())
    for path in write_report(records, args.out, _shape_resolver(args.mesh)):
        print(f"wrote {path}")
    return EXIT_OK


def cmd_catalog(args) -> int:
    names = catalog.available()
    if args.json:
        print(json.dumps(names))
        return EXIT_OK
    for name in names:
        P = catalog.builtin(name)
        print(f"{name}\t{len(P)}\t{','.join(sorted(P.tags))}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rupert", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("search", help="random-restart search for the best passage")
    p.add_argument("shape", nargs="?", help="catalog name (see `rupert catalog`)")
    p.add_argument("--mesh", help="OFF or JSON file instead of a catalog shape")
    p.add_argument("--seed", type=int, default=0)
    budget = p.add_mutually_exclusive_group()
    budget.add_argument("--trials", type=int)
    budget.add_argument("--seconds", type=float)
    p.add_argument("--delta0", type=float)
    p.add_argument("--delta-min", type=float)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="improvement log (JSON lines)")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("verify", help="recertify records at high precision")
    p.add_argument("records", nargs="?")
    p.add_argument("--digits", type=int, default=50)
    p.add_argument("--mesh")
    p.add_argument("--theorem2", action="store_true", help="check the explicit tetrahedron passage")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("render", help="SVG of the best passage in a record file")
    p.add_argument("records")
    p.add_argument("--out", required=True)
    p.add_argument("--scale", type=float, default=1.0, help="extra factor on the hole size")
    p.add_argument("--size", type=int, default=480)
    p.add_argument("--mesh")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("report", help="PNG figures and a CSV summary for record files")
    p.add_argument("records")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--best-only", action="store_true")
    p.add_argument("--mesh")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("catalog", help="list built-in shapes")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_catalog)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "search" and (args.shape is None) == (args.mesh is None):
        parser.error("search needs exactly one of SHAPE or --mesh")
    try:
        return args.func(args)
    except (catalog.CatalogError, UsageError, ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        if isinstance(exc, catalog.DegenerateGeometryError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_DEGENERATE
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DegenerateSilhouetteError, UnboundedPassageError, CertificationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
