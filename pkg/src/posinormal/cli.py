"""Command-line front end.

Exit codes: 0 success / all checks pass, 1 property failure, 2 input error,
3 internal-consistency error.
"""

from __future__ import annotations

import argparse
import inspect
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import classify, matop, qtop, rangelab, report, suites
from .errors import InputError, InternalConsistencyError
from .expr import parse_expression, parse_identity
from .numkernel import DEFAULT_TOL, ToleranceConfig

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 3

CONSTRUCTORS = {
    # name: (argument names, builder(args list, seed))
    "identity": (("n",), lambda a, s: matop.identity(int(a[0]))),
    "jordan": (("n", "[eigenvalue]"),
               lambda a, s: matop.jordan_block(int(a[0]), complex(a[1]) if len(a) > 1 else 0.0)),
    "ep": (("n", "r"), lambda a, s: matop.random_ep(int(a[0]), int(a[1]), s)),
    "dense": (("n",), lambda a, s: matop.random_dense(int(a[0]), s)),
    "shift": (("n",), lambda a, s: matop.truncated_shift(int(a[0]))),
    "toeplitz": (("n",), lambda a, s: matop.toeplitz_truncation(matop.PHI_EXAMPLE2, int(a[0]))),
    "example1": (("n",), lambda a, s: matop.block_example(1.0 / np.arange(1, int(a[0]) + 1))),
    "diag-inv-k": (("n",), lambda a, s: matop.diagonal(1.0 / np.arange(1, int(a[0]) + 1),
                                                      f"diag-inv-k({a[0]})")),
}
TRUNCATIONS = {"shift", "toeplitz"}
QTOP_ACTIONS = ("self-commutator", "hyponormal", "verify", "probe", "show")


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--tol", type=float, help="set all three relative tolerances at once")
    g.add_argument("--tol-rank", type=float, help="rank cutoff relative to sigma_max")
    g.add_argument("--tol-psd", type=float, help="PSD negativity threshold")
    g.add_argument("--tol-res", type=float, help="residual threshold")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", type=Path, help="write output here instead of stdout")
    g.add_argument("--format", choices=("json", "csv"), default="json")
    g.add_argument("--no-timestamp", action="store_true", help="omit timestamps and timings")
    return p


def _input_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--file", type=Path, help="MatrixFile JSON")
    src.add_argument("--construct", nargs="+", metavar="KIND",
                     help=f"constructor and arguments; kinds: {', '.join(CONSTRUCTORS)}")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _ArgumentParser(prog="posinormal", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p = sub.add_parser("analyze", parents=[common], help="run every checker on one matrix")
    _input_args(p)
    p.add_argument("--emit-matrix", type=Path, help="also write the analyzed matrix as a MatrixFile")

    p = sub.add_parser("powers", parents=[common], help="posinormal/EP flags of A^k")
    _input_args(p)
    p.add_argument("--kmax", type=int, default=5)

    p = sub.add_parser("family", parents=[common], help="sigma curves over a truncation family")
    p.add_argument("kind", help=f"one of {', '.join(matop.FAMILY_KINDS)}")
    p.add_argument("--sizes", default="4..256",
                   help="'a..b' (doubling from a up to b) or a comma list")
    p.add_argument("--kmax", type=int, default=1)
    p.add_argument("--csv", type=Path, help="also write the CSV curves to this path")

    p = sub.add_parser("qtop", parents=[common], help="exact shift-operator algebra")
    p.add_argument("args", nargs=2, metavar="EXPR|ACTION",
                   help=f"an expression and an action ({', '.join(QTOP_ACTIONS)}), either order")
    p.add_argument("--c", type=float, default=1.0, help="probe bound")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--max-support", type=int, default=512)

    p = sub.add_parser("suite", parents=[common], help="run a verification suite")
    p.add_argument("name", choices=(*suites.SUITES, "all"))
    p.add_argument("--instances", type=int, help="instance count for corpus suites")
    return parser


def _tolerance(args) -> ToleranceConfig:
    tol = DEFAULT_TOL
    if args.tol is not None:
        tol = ToleranceConfig(args.tol, args.tol, args.tol)
    changes = {k: v for k, v in (("rank_rtol", args.tol_rank), ("psd_rtol", args.tol_psd),
                                 ("residual_rtol", args.tol_res)) if v is not None}
    return replace(tol, **changes) if changes else tol


def parse_sizes(text: str) -> list[int]:
    try:
        if ".." in text:
            a, b = (int(x) for x in text.split(".."))
            if a < 1 or b < a:
                raise ValueError
            sizes = []
            while a <= b:
                sizes.append(a)
                a *= 2
            return sizes
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"bad --sizes value {text!r}") from None


def _load(args):
    if args.file is not None:
        return report.read_matrix_file(args.file), {"file": str(args.file)}, False
    kind, *rest = args.construct
    if kind not in CONSTRUCTORS:
        raise InputError(f"unknown constructor {kind!r}; expected one of {', '.join(CONSTRUCTORS)}")
    names, build = CONSTRUCTORS[kind]
    required = sum(1 for n in names if not n.startswith("["))
    if not required <= len(rest) <= len(names):
        raise InputError(f"constructor {kind} takes arguments {' '.join(names)}")
    try:
        M = build(rest, args.seed)
    except ValueError as exc:
        raise InputError(f"bad constructor arguments for {kind}: {exc}") from exc
    return M, {"constructor": kind, "args": rest, "seed": args.seed}, kind in TRUNCATIONS


def _emit(args, text: str):
    if args.out is not None:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _property_payload(rep: classify.PropertyReport) -> dict:
    payload = report.jsonable(rep)
    if rep.certificate is not None:
        payload["certificate"]["witness"] = report.matrix_to_record(rep.certificate.witness)
        payload["certificate"]["interrupter"] = report.matrix_to_record(rep.certificate.interrupter)
    return payload


def cmd_analyze(args, tol):
    M, prov, truncation = _load(args)
    prov["label"] = M.label
    rep = classify.analyze(M.entries, tol, truncation=truncation)
    if args.emit_matrix is not None:
        report.write_matrix_file(args.emit_matrix, M)
    summary = {k: getattr(rep, k) for k in ("normal", "hyponormal", "posinormal", "coposinormal", "ep")}
    if rep.certificate is not None:
        summary["lambda_min"] = rep.certificate.lambda_min
    return report.run_report("analyze", tol, prov, _property_payload(rep), summary,
                             not args.no_timestamp), EXIT_OK


def cmd_powers(args, tol):
    if args.kmax < 1:
        raise InputError("--kmax must be >= 1")
    M, prov, _ = _load(args)
    prov["label"] = M.label
    A = M.entries
    rows = []
    for k in range(1, args.kmax + 1):
        Ak = np.linalg.matrix_power(A, k)
        pos, pdef = classify.is_posinormal(Ak, tol)
        copos, cdef = classify.is_coposinormal(Ak, tol)
        dims = classify.kernel_power_equal(Ak, tol)[1]
        rows.append({"k": k, "posinormal": pos, "posinormal_defect": pdef,
                     "coposinormal": copos, "coposinormal_defect": cdef,
                     "ep": pos and copos, "kernel_dim": dims[0]})
    input_ep = rows[0]["ep"]
    closed = all(r["ep"] for r in rows)
    summary = {"input_ep": input_ep, "all_powers_ep": closed,
               "passed": closed if input_ep else True}
    code = EXIT_FAIL if input_ep and not closed else EXIT_OK
    return report.run_report("powers", tol, prov, rows, summary, not args.no_timestamp), code


def cmd_family(args, tol):
    fam = matop.family_of(args.kind)
    sizes = parse_sizes(args.sizes)
    diag = rangelab.power_range_report(fam, args.kmax, sizes, tol)
    csv_text = report.curves_to_csv(diag.values())
    if args.csv is not None:
        args.csv.write_text(csv_text, encoding="utf-8")
    if args.format == "csv":
        return csv_text, EXIT_OK
    prov = {"family": fam.label, "description": fam.description, "sizes": sizes, "seed": args.seed}
    results = {str(k): d for k, d in diag.items()}
    summary = {"classifications": {str(k): d.classification for k, d in diag.items()}}
    return report.run_report("family", tol, prov, results, summary, not args.no_timestamp), EXIT_OK


def _qt_payload(X):
    return qtop.to_jsonable(X)


def cmd_qtop(args, tol):
    a, b = args.args
    if a in QTOP_ACTIONS:
        action, text = a, b
    elif b in QTOP_ACTIONS:
        action, text = b, a
    else:
        raise InputError(f"no action given; expected one of {', '.join(QTOP_ACTIONS)}")
    prov = {"expression": text, "action": action, "seed": args.seed}
    code = EXIT_OK
    if action == "verify":
        left, right = parse_identity(text)
        sym, corr = qtop.qt_residuals(left, right)
        equal, residual = qtop.qt_verify_equal(left, right, tol)
        results = {"lhs": _qt_payload(left), "rhs": _qt_payload(right),
                   "symbol_residual": sym, "correction_residual": corr}
        summary = {"equal": equal, "residual": residual}
        code = EXIT_OK if equal else EXIT_FAIL
    else:
        X = parse_expression(text)
        results = {"operator": _qt_payload(X)}
        if action == "show":
            summary = {"window": X.window, "bandwidth": X.bandwidth}
        elif action == "self-commutator":
            C = qtop.self_commutator(X)
            results["self_commutator"] = C
            summary = {"window": C.shape[0],
                       "eigenvalues": np.linalg.eigvalsh(C).tolist() if C.size else []}
        elif action == "hyponormal":
            C = qtop.self_commutator(X)
            flag, lam = qtop.qt_is_hyponormal(X, tol)
            results["self_commutator"] = C
            summary = {"hyponormal": flag, "min_eigenvalue": lam}
        else:
            probe = qtop.qt_bounded_below_probe(X, args.c, args.trials, args.max_support, args.seed)
            summary = {"falsified": probe.falsified, "worst_ratio": probe.worst_ratio,
                       "c": args.c, "trials": probe.trials, "max_support": args.max_support}
            if probe.falsified:
                results["witness"] = probe.witness
                code = EXIT_FAIL
    return report.run_report("qtop", tol, prov, results, summary, not args.no_timestamp), code


def cmd_suite(args, tol):
    names = list(suites.SUITES) if args.name == "all" else [args.name]
    outcomes = []
    for name in names:
        fn = suites.SUITES[name]
        kwargs = {"tol": tol}
        params = inspect.signature(fn).parameters
        if "seed" in params:
            kwargs["seed"] = args.seed
        if "instances" in params and args.instances is not None:
            kwargs["instances"] = args.instances
        res = fn(**kwargs)
        print(res.table())
        outcomes.append(res)
    results = []
    for res in outcomes:
        entry = {"suite": res.name, "passed": res.passed, "checks": res.checks}
        if not args.no_timestamp:
            entry["elapsed_seconds"] = res.elapsed
            entry["budget_seconds"] = res.budget
        results.append(entry)
    passed = all(r.passed for r in outcomes)
    summary = {"passed": passed, "suites": {r.name: r.passed for r in outcomes}}
    prov = {"suite": args.name, "seed": args.seed, "instances": args.instances}
    return (report.run_report("suite", tol, prov, results, summary, not args.no_timestamp),
            EXIT_OK if passed else EXIT_FAIL)


COMMANDS = {
    "analyze": cmd_analyze,
    "powers": cmd_powers,
    "family": cmd_family,
    "qtop": cmd_qtop,
    "suite": cmd_suite,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = _tolerance(args)
        if args.format == "csv" and args.command != "family":
            raise InputError("--format csv is only available for the family command")
        out, code = COMMANDS[args.command](args, tol)
    except InternalConsistencyError as exc:
        print(f"internal consistency error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.command != "suite" or args.out is not None:
        _emit(args, out if isinstance(out, str) else report.dumps(out))
    return code


if __name__ == "__main__":
    sys.exit(main())
