"""Command line: enumerate, solve, verify and expand.

Exit codes: 0 success, 1 verification mismatch, 2 usage error,
3 computational error (reported with its typed name).
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile

from .documents import Bundle, parse_rational, plain, serialize, series_document
from .errors import DegenerateRegime, MalformedDocument, WalkKernelError
from .models import build_model, model_spec
from .series import use_working_order
from .walks import boundary_series, enumerate_walks

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_COMPUTE = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _rational(text):
    try:
        q = parse_rational(text, "weight")
    except MalformedDocument as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if q == 0:
        raise argparse.ArgumentTypeError("weights must be nonzero")
    return q


def parse_selector(text):
    """full, point:i,j, line_y:i, line_x:i or diag:j."""
    kind, _, rest = text.partition(":")
    try:
        args = tuple(int(v) for v in rest.split(",")) if rest else ()
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad selector {text!r}") from None
    arity = {"full": 0, "point": 2, "line_y": 1, "line_x": 1, "diag": 1}
    if kind not in arity or len(args) != arity[kind]:
        raise argparse.ArgumentTypeError(f"bad selector {text!r}; expected one of full, point:i,j, line_y:i, line_x:i, diag:j")
    return (kind, *args)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = _Parser(prog="walkkernel", description="Kernel-method solver for weighted Kreweras-type quarter-plane walks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("enumerate", "solve", "verify", "expand"):
        s = sub.add_parser(name)
        s.add_argument("--model", required=True, choices=("kreweras", "reverse-kreweras"))
        for w in "abc":
            s.add_argument(f"--{w}", type=_rational, default=_rational("1"))
        s.add_argument("--order", type=int, default=20)
        s.add_argument("--working-order", type=int, default=None, help="default 2 * order")
        s.add_argument("--format", choices=("json", "csv"), default="json")
        s.add_argument("--out", default=None)
        if name in ("enumerate", "solve"):
            s.add_argument("--select", type=parse_selector, default=None)
        if name == "expand":
            s.add_argument("--what", required=True, choices=("delta-roots", "factorization", "kernel-roots", "determinants"))
    return p


def write_atomic(path, data: bytes):
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".walkkernel-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, value, out):
    if args.format == "csv" and not hasattr(value, "terms"):
        raise UsageError("csv output holds a single series; use --select or --format json")
    data = serialize(value, args.format)
    if args.out:
        write_atomic(args.out, data)
    else:
        out.write(data.decode())


def _selection_name(sel):
    kind, *args = sel
    return kind if not args else f"{kind}({','.join(map(str, args))})"


def _cmd_enumerate(args, spec, out):
    sel = args.select or ("full",)
    table = enumerate_walks(spec, args.order)
    doc = series_document(boundary_series(table, sel), spec.name, _selection_name(sel), spec.weights)
    _emit(args, doc, out)
    return EXIT_OK


def _cmd_solve(args, spec, out):
    from .pipeline import solve_model

    sol = solve_model(spec, order=args.order, working=args.working)
    if args.select:
        doc = series_document(sol.series(args.select), spec.name, _selection_name(args.select), spec.weights)
        _emit(args, doc, out)
        return EXIT_OK
    w = spec.weights
    docs = [series_document(v, spec.name, str(u), w) for u, v in sorted(sol.scalars.items(), key=lambda kv: (kv[0].j, kv[0].i))]
    docs += [
        series_document(sol.qx0, spec.name, "Q(x,0)", w),
        series_document(sol.q0y, spec.name, "Q(0,y)", w),
        series_document(sol.qd0, spec.name, "Q^d_0", w),
        series_document(sol.full, spec.name, "Q(x,y)", w),
    ]
    _emit(args, Bundle("solution", tuple(docs), {"order": sol.order, "diagnostics": _diagnostics(sol.diagnostics)}), out)
    return EXIT_OK


def _diagnostics(d):
    keep = ("strata", "shift", "roots", "equation_set", "determinant", "pre_injection_determinant", "injected_from", "working_order")
    return {k: d[k] for k in keep if k in d}


def _cmd_verify(args, spec, out, err):
    from .reporting import verify

    if args.format != "json":
        raise UsageError("verify reports are JSON only")
    report = verify(spec, spec.weights, args.order, args.working)
    _emit(args, Bundle("report", (), report.info()), out)
    err.write(report.summary() + "\n")
    return EXIT_OK if report.passed else EXIT_MISMATCH


def _cmd_expand(args, spec, out):
    from . import pipeline

    model = build_model(spec)
    N = args.order
    w = spec.weights
    docs = []
    info = {"what": args.what, "order": N}
    with use_working_order(args.working or 2 * N):
        if args.what == "delta-roots":
            fact = pipeline.canonical_factorization(model)
            for n, r in enumerate(fact.roots, start=1):
                docs.append(series_document(r.value.truncate(N), spec.name, f"X_{n}", w))
            info["finite"] = [f"X_{n}" for n, r in enumerate(fact.roots, start=1) if r.finite]
        elif args.what == "factorization":
            fact = pipeline.canonical_factorization(model)
            for name in ("delta", "delta0", "delta_plus", "delta_minus", "inv_sqrt_plus", "sqrt_zero_minus"):
                docs.append(series_document(getattr(fact, name).truncate(N), spec.name, name, w))
        elif args.what == "kernel-roots":
            skipped = []
            for fam in pipeline.root_families(model):
                try:
                    found = pipeline.family_roots(model, fam)
                except DegenerateRegime as exc:
                    skipped.append(str(exc))
                    continue
                for r in found:
                    docs.append(series_document(r.root.value.truncate(N), spec.name, f"x_{r.label}", w))
            info["degenerate"] = skipped
    if args.what == "determinants":
        sol = pipeline.solve_model(spec, order=N, working=args.working)
        d = sol.diagnostics
        info.update({k: d[k] for k in ("equation_set", "determinant", "tried") if k in d})
        for k in ("pre_injection_determinant", "determinant_table"):
            if k in d:
                info[k] = d[k]
    bundle = Bundle("expansion", tuple(docs), plain(info))
    if args.format == "csv":
        if len(docs) != 1:
            raise UsageError("csv output holds a single series; use --format json")
        _emit(args, docs[0], out)
    else:
        _emit(args, bundle, out)
    return EXIT_OK


def run_cli(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.order < 0:
            raise UsageError("--order must be nonnegative")
        args.working = args.working_order or 2 * args.order
        spec = model_spec(args.model, args.a, args.b, args.c)
        if args.command == "enumerate":
            return _cmd_enumerate(args, spec, out)
        if args.command == "solve":
            return _cmd_solve(args, spec, out)
        if args.command == "verify":
            return _cmd_verify(args, spec, out, err)
        return _cmd_expand(args, spec, out)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except WalkKernelError as exc:
        err.write(f"error: {exc.module}.{type(exc).__name__}: {exc}\n")
        return EXIT_COMPUTE


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
