"""Command-line front end: ``verify``, ``tabulate`` and ``oracle``.

Exit status: 0 pass, 1 fail, 2 usage error, 3 numeric or resource error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .arith import beta, divisors
from .correspondence import (
    DEFAULT_TOLERANCE,
    verify_area_identity,
    verify_counting_identities,
    verify_theorem1,
    verify_theorem2,
)
from .embeddings import (
    CocompactUnits,
    HeckeCongruence,
    embedding_count_trace,
    exceptional_representatives,
    parse_group,
    primitive_counts,
)
from .errors import (
    BudgetTooSmallError,
    DomainError,
    ExceptionalTraceError,
    NumericError,
    ResourceError,
    SpectralCorrError,
)
from .oracles import (
    class_number_fixture,
    class_number_record,
    embedding_count_fixture,
    embedding_count_record,
    transform_fixture,
    valid_discriminants,
    write_fixture,
)
from .selberg_transform import parse_test_function
from .serialize import csv_text, dumps, fmt_float
from .trace_geometry import DEFAULT_ELLIPTIC_ORDERS, FactorMode, TruncationBudget, area

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
FIXTURES_ENV = "SPECTRALCORR_FIXTURES_DIR"


class UsageError(Exception):
    pass


def _default_fixtures_dir() -> Path:
    env = os.environ.get(FIXTURES_ENV)
    return Path(env) if env else Path("fixtures")


def load_config(path: str) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment. Keys use flag names."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    if not getattr(args, "config", None):
        return
    actions = {a.dest: a for a in parser._actions}
    for key, value in load_config(args.config).items():
        if not hasattr(args, key):
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, key) is not None:
            continue
        action = actions.get(key)
        if isinstance(action, argparse._StoreConstAction):
            flag = value.lower()
            if flag not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(f"config key {key!r} expects true or false")
            setattr(args, key, flag in ("true", "1", "yes"))
            continue
        conv = (action.type if action else None) or str
        try:
            setattr(args, key, conv(value))
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"config key {key!r}: {exc}") from None


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).parent.mkdir(parents=True, exist_ok=True)
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _pair(text: str) -> tuple[int, int]:
    parts = [int(x) for x in str(text).strip("()").split(",")]
    if len(parts) != 2 or min(parts) < 2:
        raise argparse.ArgumentTypeError("expected two integers >= 2, e.g. 2,3")
    return parts[0], parts[1]


def _budget(args) -> TruncationBudget:
    tol = args.tol if args.tol is not None else DEFAULT_TOLERANCE
    kw = {}
    if args.tmax is not None:
        kw["t_max"] = args.tmax
    if args.kmax is not None:
        kw["k_max"] = args.kmax
    if args.nmax is not None:
        kw["n_max"] = args.nmax
    if args.quad_tol is not None:
        kw["quad_tol"] = args.quad_tol
    return TruncationBudget.for_tolerance(tol, **kw)


def _verdict_csv(verdict) -> str:
    rows = []
    for item in verdict.breakdown:
        rep = item.get("report")
        if rep is None:
            rows.append((item.get("m", ""), item.get("beta", ""), "", "", "", ""))
            continue
        rows.append(
            (
                item.get("m", "cocompact"),
                item.get("beta", 1),
                rep["grand_total"],
                rep["imag_total"],
                rep["tail_estimate"],
                rep["quad_error"],
            )
        )
    head = csv_text(["m", "beta", "grand_total", "imag_total", "tail_estimate", "quad_error"], rows)
    summary = csv_text(
        ["name", "lhs", "rhs", "abs_diff", "error_budget", "pass"],
        [(verdict.name, verdict.lhs, verdict.rhs, verdict.abs_diff, verdict.error_budget, verdict.passed)],
    )
    return summary + head


# -- verify -------------------------------------------------------------------------------


def cmd_verify(args) -> int:
    if args.disc is None:
        raise UsageError("--disc is required")
    try:
        group = CocompactUnits(args.disc)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    theorem = str(args.theorem)
    fmt = args.format or "json"
    if theorem == "area":
        verdicts = [verify_area_identity(group.d)]
    elif theorem == "counts":
        verdicts = verify_counting_identities(group.d, args.tmax or 30, narrow=bool(args.narrow))
    else:
        try:
            f = parse_test_function(args.testfn or "gaussian:a=1")
        except (DomainError, ValueError) as exc:
            raise UsageError(str(exc)) from None
        budget = _budget(args)
        tol = args.tol if args.tol is not None else DEFAULT_TOLERANCE
        jobs = args.jobs or 1
        if theorem == "1":
            orders = args.elliptic_orders or DEFAULT_ELLIPTIC_ORDERS
            verdicts = [verify_theorem1(group.d, f, budget, tol, orders, narrow=bool(args.narrow), jobs=jobs)]
        elif theorem == "2":
            if args.prime is None:
                raise UsageError("--prime is required for theorem 2")
            if group.d % args.prime == 0:
                raise UsageError(f"p={args.prime} must not divide d={group.d}")
            try:
                mode = FactorMode.parse(args.factor_mode or FactorMode.STANDARD_LOG_EPS)
            except DomainError as exc:
                raise UsageError(str(exc)) from None
            verdicts = [
                verify_theorem2(
                    group.d, args.prime, f, budget, tol, mode,
                    projective_centralizer=bool(args.projective_centralizer), narrow=bool(args.narrow), jobs=jobs,
                )
            ]
        else:
            raise UsageError(f"unknown theorem {theorem!r}")
    if fmt == "csv":
        text = "".join(_verdict_csv(v) for v in verdicts) if theorem in ("1", "2") else csv_text(
            ["name", "lhs", "rhs", "abs_diff", "pass"],
            [(v.name, str(v.lhs), str(v.rhs), str(v.abs_diff), v.passed) for v in verdicts],
        )
    else:
        text = dumps([v.to_dict() for v in verdicts] if len(verdicts) > 1 else verdicts[0].to_dict())
    _emit(text, args.output)
    for v in verdicts:
        status = "PASS" if v.passed else "FAIL"
        diff = v.abs_diff if isinstance(v.abs_diff, float) else float(v.abs_diff)
        print(f"{status} {v.name} abs_diff={fmt_float(diff)} budget={fmt_float(v.error_budget)}", file=sys.stderr)
    return EXIT_PASS if all(v.passed for v in verdicts) else EXIT_FAIL


# -- tabulate -----------------------------------------------------------------------------


def _range(args, default):
    if args.range is None:
        return default
    lo, hi = args.range
    return lo, hi


def cmd_tabulate(args) -> int:
    what = args.what
    fmt = args.format or "csv"
    if what == "counts":
        group = parse_group(args.group or "G0:1")
        lo, hi = _range(args, (0, 20))
        n = args.norm or 1
        prim = primitive_counts(group, hi) if n == 1 and hi >= 3 else None
        header = ["t", "n", "group", "E", "E_primitive"]
        rows = []
        for t in range(max(lo, 0), hi + 1):
            try:
                e = embedding_count_trace(t, n, group, narrow=bool(args.narrow))
            except ExceptionalTraceError:
                continue
            ep = prim[t] if prim is not None and t >= 3 else (e if n == 1 and t in (0, 1) else "")
            rows.append((t, n, str(group), e, ep))
    elif what == "classnumbers":
        lo, hi = _range(args, (-100, 100))
        header = ["disc", "h_wide", "h_narrow", "agree"]
        rows = []
        for D in valid_discriminants(lo, hi):
            rec = class_number_record(D)
            rows.append((D, rec["h_wide"], rec["h_narrow"], rec["agree"]))
    elif what == "areas":
        if args.disc is None:
            raise UsageError("--disc is required")
        try:
            g = CocompactUnits(args.disc)
        except DomainError as exc:
            raise UsageError(str(exc)) from None
        header = ["group", "beta", "coeff", "value"]
        a = area(g)
        rows = [(str(g), 1, str(a.coeff), a.value)]
        for m in divisors(g.d):
            am = area(HeckeCongruence(m))
            rows.append((str(HeckeCongruence(m)), beta(g.d // m), str(am.coeff), am.value))
    elif what == "reps":
        if args.prime is None:
            raise UsageError("--prime is required")
        m = args.level or 1
        try:
            reps = exceptional_representatives(args.prime, m)
        except DomainError as exc:
            raise UsageError(str(exc)) from None
        header = ["a", "b", "c", "d", "trace", "det"]
        rows = [(g.a, g.b, g.c, g.d, g.trace, g.det) for g in reps]
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(what)
    if fmt == "json":
        text = dumps([dict(zip(header, r)) for r in rows])
    else:
        text = csv_text(header, rows)
    _emit(text, args.output)
    return EXIT_PASS


# -- oracle -------------------------------------------------------------------------------


def cmd_oracle(args) -> int:
    fixtures = Path(args.fixtures_dir) if args.fixtures_dir else _default_fixtures_dir()
    if args.kind == "forms":
        lo, hi = args.disc_range if args.disc_range else (-500, 500)
        data = class_number_fixture(lo, hi)
        target = args.output or fixtures / "class_numbers.json"
    elif args.kind == "conjugacy":
        bound = args.bound or 40
        if args.trace is not None:
            data = embedding_count_record(args.trace, args.level or 1, bound)
            if args.output is None:
                sys.stdout.write(dumps(data))
                return EXIT_PASS
            target = args.output
        else:
            data = embedding_count_fixture(bound=bound)
            target = args.output or fixtures / "embedding_counts.json"
    else:
        f = parse_test_function(args.testfn or "gaussian:a=1")
        data = transform_fixture(f.a)
        target = args.output or fixtures / "transform.json"
    try:
        write_fixture(target, data)
    except OSError as exc:
        print(f"error: cannot write {target}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(f"wrote {target}", file=sys.stderr)
    return EXIT_PASS


# -- parser --------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spectralcorr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags override it")
    common.add_argument("--output", "-o", help="write here instead of stdout")
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--jobs", type=int, help="worker threads for per-level evaluation")

    v = sub.add_parser("verify", parents=[common], help="check an identity")
    v.add_argument("--theorem", choices=["1", "2", "area", "counts"], default=None)
    v.add_argument("--disc", type=int)
    v.add_argument("--prime", type=int)
    v.add_argument("--testfn", help="gaussian:a=<float>")
    v.add_argument("--tmax", type=int)
    v.add_argument("--kmax", type=int)
    v.add_argument("--nmax", type=int)
    v.add_argument("--quad-tol", dest="quad_tol", type=float)
    v.add_argument("--tol", type=float)
    v.add_argument("--factor-mode", dest="factor_mode", choices=[m.value for m in FactorMode])
    v.add_argument("--narrow", action="store_const", const=True, default=None)
    v.add_argument("--elliptic-orders", dest="elliptic_orders", type=_pair, help="m_0,m_1 (default 2,3)")
    v.add_argument("--projective-centralizer", dest="projective_centralizer", action="store_const", const=True, default=None)
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("tabulate", parents=[common], help="dump counts, class numbers, areas or representatives")
    t.add_argument("what", choices=["counts", "classnumbers", "areas", "reps"])
    t.add_argument("--range", nargs=2, type=int, metavar=("LO", "HI"))
    t.add_argument("--group", help="O1:<d> or G0:<m>")
    t.add_argument("--norm", type=int)
    t.add_argument("--disc", type=int)
    t.add_argument("--prime", type=int)
    t.add_argument("--level", type=int)
    t.add_argument("--narrow", action="store_const", const=True, default=None)
    t.set_defaults(func=cmd_tabulate)

    o = sub.add_parser("oracle", parents=[common], help="run brute-force oracles and write fixtures")
    o.add_argument("kind", choices=["forms", "conjugacy", "transform"])
    o.add_argument("--disc-range", dest="disc_range", nargs=2, type=int, metavar=("LO", "HI"))
    o.add_argument("--trace", type=int)
    o.add_argument("--level", type=int)
    o.add_argument("--bound", type=int)
    o.add_argument("--testfn")
    o.add_argument("--fixtures-dir", dest="fixtures_dir")
    o.set_defaults(func=cmd_oracle)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    try:
        _apply_config(args, sub)
        if args.command == "verify" and args.theorem is None:
            args.theorem = "1"
        return args.func(args)
    except UsageError as exc:
        sub.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericError, ResourceError, BudgetTooSmallError, ArithmeticError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DomainError as exc:
        sub.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SpectralCorrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
