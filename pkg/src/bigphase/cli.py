"""Command-line front end.

Builds or ingests invariant data, runs the verification suites, drives
the genus-2 reconstruction, and exports round-trippable tables. Reports
are deterministic for a fixed configuration: check ordering is canonical
and parallel execution only changes timing, never content.

Exit codes: 0 all checks pass, 1 at least one check fails, 2 a solver
precondition fails, 3 the input or configuration is unusable.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from .fields import (
    Context,
    VectorField,
    bar,
    big_T,
    field_first_bad,
    qprod,
    string_field,
    tau_minus,
)
from .model import (
    ModelError,
    TableError,
    build_point_genfun,
    export_gw_table,
    frac_to_str,
    ingest_gw_table,
    point_model,
    validate_model,
)
from .series import (
    CapacityError,
    VarWindow,
    first_bad_monomial,
    mono_str,
    trusted_terms,
)
from .solver import reconstruct_F2
from .trr import CATALOG_IDS, CheckResult, run_catalog
from .virasoro import constraint_residual

EXIT_OK = 0
EXIT_CHECK = 1
EXIT_SOLVER = 2
EXIT_CONFIG = 3

SUITE_NAMES = ("model", "structural", "virasoro", "catalog")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# data sources
# ---------------------------------------------------------------------------

def _load(args, with_F2: bool = True):
    """(model, genfun) from the built-in construction or a table file."""
    if args.gw_table:
        try:
            model, genfun, warnings = ingest_gw_table(args.gw_table)
        except (TableError, OSError) as exc:
            raise ConfigError(f"cannot ingest {args.gw_table}: {exc}")
        return model, genfun, warnings
    if args.model != "point":
        raise ConfigError(f"unknown builtin model {args.model!r}; "
                          "use --gw-table for anything but the point")
    window = VarWindow(args.max_level, 1)
    try:
        genfun = build_point_genfun(window, args.degree,
                                    shift_t00=Fraction(args.shift),
                                    with_F2=with_F2)
    except ModelError as exc:
        raise ConfigError(str(exc))
    return point_model(), genfun, []


def _parse_shift(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"cannot parse shift {text!r} as a rational")


# ---------------------------------------------------------------------------
# the verification checks
# ---------------------------------------------------------------------------

def _offense(residual) -> str | None:
    if isinstance(residual, VectorField):
        hit = field_first_bad(residual)
        if hit is None:
            return None
        v, mono, coeff = hit
        return (f"component d[{v[0]},{v[1]}] at {mono_str(mono)}: "
                f"{frac_to_str(coeff)}")
    hit = first_bad_monomial(residual)
    if hit is None:
        return None
    mono, coeff = hit
    return f"{mono_str(mono)}: {frac_to_str(coeff)}"


def _residual_check(check_id: str, thunk) -> CheckResult:
    try:
        offense = _offense(thunk())
    except CapacityError as exc:
        return CheckResult(check_id, "skip", str(exc))
    if offense is None:
        return CheckResult(check_id, "pass")
    return CheckResult(check_id, "fail", offense)


def _structural_checks(ctx: Context) -> list[tuple[str, object]]:
    """Exact structural invariants of the operator layer."""
    g1 = ctx.gamma(1)
    t1 = VectorField.basis(ctx.window, (1, 1))
    t2 = VectorField.basis(ctx.window, (2, 1))
    s = string_field(ctx)
    return [
        ("structural:qprod-commutative",
         lambda: qprod(ctx, g1, t1) - qprod(ctx, t1, g1)),
        ("structural:qprod-associative",
         lambda: qprod(ctx, qprod(ctx, g1, t1), t2)
         - qprod(ctx, g1, qprod(ctx, t1, t2))),
        ("structural:string-product",
         lambda: qprod(ctx, s, t2) - bar(ctx, t2)),
        ("structural:decomposition",
         lambda: t2 - big_T(ctx, tau_minus(t2)) - bar(ctx, t2)),
        ("structural:primary-projection-idempotent",
         lambda: bar(ctx, bar(ctx, t2)) - bar(ctx, t2)),
    ]


def _virasoro_checks(ctx: Context) -> list[tuple[str, object]]:
    out = []
    for g in (1, 2):
        for n in (-1, 0, 1, 2):
            out.append((f"virasoro g={g} n={n}",
                        lambda g=g, n=n: constraint_residual(ctx, g, n)))
    return out


def _run_checks(ctx: Context, model, suites, jobs: int) -> list[CheckResult]:
    wanted_suites = set()
    wanted_ids = []
    if suites:
        for name in suites:
            if name in SUITE_NAMES:
                wanted_suites.add(name)
            elif name in CATALOG_IDS:
                wanted_ids.append(name)
            else:
                raise ConfigError(f"unknown suite or check id {name!r}")
    else:
        wanted_suites = set(SUITE_NAMES)

    results: list[CheckResult] = []
    if "model" in wanted_suites:
        problems = validate_model(model)
        if problems:
            results.append(CheckResult("model:validation", "fail",
                                       "; ".join(problems)))
        else:
            results.append(CheckResult("model:validation", "pass"))

    pending: list[tuple[str, object]] = []
    if "structural" in wanted_suites:
        pending.extend(_structural_checks(ctx))
    if "virasoro" in wanted_suites:
        if ctx.genfun.has(2):
            pending.extend(_virasoro_checks(ctx))
        else:
            for g in (1, 2):
                for n in (-1, 0, 1, 2):
                    if g == 2:
                        results.append(CheckResult(
                            f"virasoro g={g} n={n}", "skip",
                            "genus-2 data not available"))
                    else:
                        pending.append(
                            (f"virasoro g={g} n={n}",
                             lambda g=g, n=n: constraint_residual(ctx, g, n)))

    if jobs > 1 and pending:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [(cid, pool.submit(thunk)) for cid, thunk in pending]
            for cid, fut in futures:
                results.append(_residual_check(cid, fut.result))
    else:
        for cid, thunk in pending:
            results.append(_residual_check(cid, thunk))

    try:
        if "catalog" in wanted_suites:
            results.extend(run_catalog(ctx))
        elif wanted_ids:
            results.extend(run_catalog(ctx, wanted_ids))
    except CapacityError as exc:
        raise ConfigError(f"window too small for the catalog: {exc}")
    return results


# ---------------------------------------------------------------------------
# report plumbing
# ---------------------------------------------------------------------------

def _series_payload(series) -> dict[str, str]:
    return {mono_str(m): frac_to_str(c)
            for m, c in sorted(trusted_terms(series).items(),
                               key=lambda kv: mono_str(kv[0]))}


def _checks_payload(results: list[CheckResult]) -> list[dict]:
    return [{"id": r.id, "status": r.status,
             **({"detail": r.detail} if r.detail else {})}
            for r in results]


def _summary(results: list[CheckResult]) -> dict[str, int]:
    return {status: sum(1 for r in results if r.status == status)
            for status in ("pass", "fail", "skip")}


def _emit(doc: dict, out_path: str | None) -> None:
    text = json.dumps(doc, indent=1, sort_keys=False) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_payload(args) -> dict:
    return {
        "model": args.model,
        "gw_table": args.gw_table,
        "degree": args.degree,
        "max_level": args.max_level,
        "shift": frac_to_str(Fraction(args.shift)),
    }


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    model, genfun, warnings = _load(args)
    ctx = Context(model, genfun)
    results = _run_checks(ctx, model, args.suite, args.jobs)
    doc = {
        "format": "bigphase-report",
        "command": "verify",
        "config": _config_payload(args),
        "warnings": warnings,
        "checks": _checks_payload(results),
        "summary": _summary(results),
    }
    _emit(doc, args.out)
    return EXIT_CHECK if any(r.status == "fail" for r in results) else EXIT_OK


def cmd_solve_f2(args) -> int:
    model, genfun, warnings = _load(args, with_F2=False)
    ctx = Context(model, genfun)
    try:
        report = reconstruct_F2(ctx)
    except ModelError as exc:
        _emit({
            "format": "bigphase-report",
            "command": "solve-f2",
            "config": _config_payload(args),
            "error": {"kind": "solver-precondition", "message": str(exc)},
        }, args.out)
        return EXIT_SOLVER
    rel = report.euler_relation
    doc = {
        "format": "bigphase-report",
        "command": "solve-f2",
        "config": _config_payload(args),
        "warnings": warnings,
        "euler_relation": {
            "n": rel.n,
            "f": [_series_payload(fi) for fi in rel.f],
        },
        "F2": _series_payload(report.F2_reconstructed),
        "checks": _checks_payload(report.diagnostics),
        "summary": _summary(report.diagnostics),
    }
    failed = any(r.status == "fail" for r in report.diagnostics)
    if args.compare:
        try:
            _, ref_genfun, _ = ingest_gw_table(args.compare)
        except (TableError, OSError) as exc:
            raise ConfigError(f"cannot ingest {args.compare}: {exc}")
        if not ref_genfun.has(2):
            raise ConfigError(f"{args.compare} carries no genus-2 records")
        if ref_genfun.base_point != genfun.base_point:
            raise ConfigError("comparison table uses a different base point")
        delta = report.F2_reconstructed - ref_genfun.get(2)
        diff = {mono_str(m): frac_to_str(c)
                for m, c in sorted(trusted_terms(delta).items(),
                                   key=lambda kv: mono_str(kv[0])) if c}
        doc["diff"] = diff
        failed = failed or bool(diff)
    _emit(doc, args.out)
    return EXIT_CHECK if failed else EXIT_OK


def cmd_export(args) -> int:
    if not args.out:
        raise ConfigError("export needs --out")
    model, genfun, warnings = _load(args)
    if args.gw_table:
        built = min(genfun.get(g).valid_order
                    for g in (0, 1, 2) if genfun.has(g))
        if args.degree > built:
            raise ConfigError(
                f"--degree {args.degree} exceeds the table's built "
                f"order {built}")
    export_gw_table(args.out, model, genfun)
    # round-trip the file we just wrote so the report can vouch for it
    _, back, _ = ingest_gw_table(args.out)
    roundtrip: list[CheckResult] = []
    for g in (0, 1, 2):
        if not genfun.has(g):
            continue
        roundtrip.append(_residual_check(
            f"roundtrip F{g}", lambda g=g: genfun.get(g) - back.get(g)))
    doc = {
        "format": "bigphase-report",
        "command": "export",
        "config": _config_payload(args),
        "warnings": warnings,
        "table": args.out,
        "degrees": {str(g): genfun.get(g).valid_order
                    for g in (0, 1, 2) if genfun.has(g)},
        "checks": _checks_payload(roundtrip),
        "summary": _summary(roundtrip),
    }
    _emit(doc, args.out + ".report.json")
    lines = [f"table written to {args.out}"]
    for r in roundtrip:
        lines.append(f"{r.id}: {r.status}"
                     + (f" ({r.detail})" if r.detail else ""))
    with open(args.out + ".report.txt", "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return (EXIT_CHECK if any(r.status == "fail" for r in roundtrip)
            else EXIT_OK)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", default="point",
                   help="builtin model name (default: point)")
    p.add_argument("--gw-table", default=None,
                   help="ingest invariants from a table file instead")
    p.add_argument("--degree", type=int, default=4,
                   help="genus-2 truncation order (default: 4)")
    p.add_argument("--max-level", type=int, default=6,
                   help="highest descendant level kept (default: 6)")
    p.add_argument("--shift", default="0",
                   help="base-point displacement of t at level 0 "
                        "(rational, default: 0)")
    p.add_argument("--out", default=None,
                   help="write the report here instead of stdout")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel check evaluation (report unchanged)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bigphase",
        description="verification suites and the genus-2 reconstruction")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the identity suites")
    _add_common(p)
    p.add_argument("--suite", action="append", default=None,
                   help="restrict to a suite (model, structural, virasoro, "
                        "catalog) or a single catalog id; repeatable")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("solve-f2",
                       help="reconstruct F2 from genus-0/1 data")
    _add_common(p)
    p.add_argument("--compare", default=None,
                   help="table with reference genus-2 records to diff")
    p.set_defaults(fn=cmd_solve_f2)

    p = sub.add_parser("export", help="write a round-trippable table")
    _add_common(p)
    p.set_defaults(fn=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.shift = _parse_shift(str(args.shift))
        if args.degree < 0 or args.max_level < 1:
            raise ConfigError("degree must be >= 0 and max-level >= 1")
        if args.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
