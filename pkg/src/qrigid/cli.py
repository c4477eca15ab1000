"""Command-line entry point.

Exit codes: 0 success / certified, 1 inconclusive or failed checks,
2 invalid input.
"""

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import linalg as la
from . import opsys, rigidity, superop
from .errors import ExactBackendUnsupported, QRigidError
from .linalg import Backend, TolerancePolicy, TraceMode
from .scalar import GaussianRational

DEFAULT_SEED = 20250531
SOFT_CAP_N = 64
TRACE_MODES = {"normalized": TraceMode.NORMALIZED, "plain": TraceMode.PLAIN, "delta": TraceMode.DELTA_FORM}


class UsageError(Exception):
    pass


def parse_range(text):
    """``"3"``, ``"3..8"`` (inclusive) or ``"2,4,6"``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise UsageError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise UsageError(f"no values in {text!r}")
    return out


def _tol(args):
    kw = {}
    if args.tol_rank is not None:
        kw["rank_rel_tol"] = args.tol_rank
    if args.cert_margin is not None:
        kw["cert_margin"] = args.cert_margin
    return TolerancePolicy(**kw)


def _emit(args, text):
    if not text.endswith("\n"):
        text += "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def exact_from_decimal(tup):
    """EXACT copy of a FLOAT tuple, reading each entry as its shortest decimal.

    Residual traces are projected out exactly; the spanned operator system is
    unchanged by this.
    """
    mats = []
    for x in tup.matrices:
        e = la.exact_array([[GaussianRational(Fraction(repr(float(z.real))), Fraction(repr(float(z.imag)))) for z in row]
                            for row in x])
        herm = la.adjoint(e)
        e = np.vectorize(lambda a, b: (a + b) / 2, otypes=[object])(e, herm)
        t = la.trace(e) / x.shape[0]
        for i in range(x.shape[0]):
            e[i, i] = e[i, i] - t
        mats.append(e)
    return opsys.OperatorTuple(tuple(mats))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _certify_input(args):
    chosen = [x is not None for x in (args.fixture, args.input, args.sample)]
    if sum(chosen) != 1:
        raise UsageError("give exactly one of --fixture, --input, --sample")
    backend = Backend(args.backend)
    if args.fixture:
        tup = opsys.load_fixture(args.fixture)
    elif args.input:
        tup = opsys.tuple_from_json(_load_json(args.input))
    else:
        n, d = args.sample
        if not 1 <= n <= SOFT_CAP_N or not 1 <= d <= n * n - 1:
            raise UsageError(f"--sample needs 1 <= n <= {SOFT_CAP_N} and 1 <= d <= n^2 - 1")
        return opsys.sample_tuple(n, d, opsys.RngSpec(args.seed, 0), opsys.Shape.GENERIC, backend)
    if backend == Backend.EXACT and tup.backend == Backend.FLOAT:
        tup = exact_from_decimal(tup)
    return tup


def cmd_certify(args):
    tup = _certify_input(args)
    cert = rigidity.certify_tuple(tup, TRACE_MODES[args.trace_mode], _tol(args))
    if args.format == "pretty":
        lines = [f"n={cert.n} d={cert.d} backend={cert.backend.value} basis={cert.basis}",
                 f"rank {cert.rank} / {cert.n * cert.n}"]
        if cert.determinant is not None:
            lines.append(f"determinant nonzero: {bool(cert.determinant)}")
        if cert.margin is not None:
            lines.append(f"sigma_min/sigma_max = {cert.margin:.3e}")
        if cert.closure_dimension is not None:
            lines.append(f"closure dimension {cert.closure_dimension}")
        lines.append(cert.verdict.value)
        _emit(args, "\n".join(lines))
    else:
        _emit(args, opsys.dumps(cert.to_json()))
    return 0 if cert.certified else 1


def cmd_sweep(args):
    ns = parse_range(args.n)
    if any(not 1 <= n <= SOFT_CAP_N for n in ns):
        raise UsageError(f"n must lie in 1..{SOFT_CAP_N}")
    ds = parse_range(args.d) if args.d else None
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    try:
        report = rigidity.sweep(ns, ds, args.trials, args.seed, TRACE_MODES[args.trace_mode], _tol(args),
                                Backend(args.backend))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "csv":
        _emit(args, report.to_csv(args.timings))
    elif args.format == "pretty":
        lines = [f"{'n':>3} {'d':>4} {'cert':>6} {'min margin':>11}"]
        for c in report.cells:
            margin = "-" if c.min_margin is None else f"{c.min_margin:.2e}"
            lines.append(f"{c.n:>3} {c.d:>4} {c.certified:>3}/{c.trials:<2} {margin:>11}")
        lines.append(f"certified {report.total_certified}/{report.total_trials}"
                     f" ({100 * report.certified_fraction:.1f}%), all cells: {report.all_cells_certified}")
        _emit(args, "\n".join(lines))
    else:
        _emit(args, opsys.dumps(report.to_json(args.timings)))
    return 0 if report.all_cells_certified else 1


def _axiom_target(args):
    backend = Backend(args.backend)
    if args.input:
        obj = _load_json(args.input)
        if "rep" in obj:
            return superop.superop_from_json(obj)
        tup = opsys.tuple_from_json(obj)
        if tup.backend == Backend.EXACT:
            raise ExactBackendUnsupported("building an adjacency from a tuple needs the FLOAT backend")
        return superop.adjacency_from_system(opsys.adjoin_unit(tup, tol=_tol(args)), _tol(args))
    if args.n is None or not 1 <= args.n <= SOFT_CAP_N:
        raise UsageError("--system needs --n in range")
    if args.system in ("trivial", "full") and backend == Backend.EXACT:
        # exact constructors; orthonormalizing would need square roots
        build = superop.identity_superop if args.system == "trivial" else superop.complete_graph_superop
        return build(args.n, backend)
    if args.system == "trivial":
        return superop.adjacency_from_system(opsys.trivial_system(args.n), _tol(args))
    if args.system == "full":
        return superop.adjacency_from_system(opsys.full_system(args.n), _tol(args))
    if backend == Backend.EXACT:
        raise ExactBackendUnsupported("--system random builds an adjacency by orthonormalization; use --backend float")
    if args.d is None:
        raise UsageError("--system random needs --d")
    tup = opsys.sample_tuple(args.n, int(args.d), opsys.RngSpec(args.seed, 0))
    return superop.adjacency_from_system(opsys.adjoin_unit(tup), _tol(args))


def cmd_check_axioms(args):
    report = superop.check_quantum_graph(_axiom_target(args), _tol(args))
    if args.format == "pretty":
        lines = [f"{name:<20} {'pass' if getattr(report, name) else 'FAIL'}  residual {report.residuals[name]}"
                 for name in ("schur_idempotent", "reflexive", "self_adjoint", "completely_positive")]
        _emit(args, "\n".join(lines))
    else:
        _emit(args, opsys.dumps(report.to_json()))
    return 0 if report.all_pass else 1


def cmd_choi(args):
    obj = _load_json(args.input)
    if args.direction == "to-choi":
        if "rep" in obj:
            phi = superop.superop_from_json(obj)
        else:
            phi = superop.superop_from_kraus(superop.kraus_from_json(obj))
        _emit(args, opsys.dumps(superop.choi_to_json(superop.choi(phi))))
    else:
        phi = superop.superop_from_choi(superop.choi_from_json(obj))
        _emit(args, opsys.dumps(superop.superop_to_json(phi)))
    return 0


def cmd_fixture(args):
    _emit(args, opsys.fixture_text(args.name))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--backend", choices=[b.value for b in Backend], default="float")
    common.add_argument("--trace-mode", choices=sorted(TRACE_MODES), default="normalized")
    common.add_argument("--tol-rank", type=float, default=None, help="relative singular-value threshold")
    common.add_argument("--cert-margin", type=float, default=None, help="minimum sigma_min/sigma_max to certify")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--output", help="write to this file instead of stdout")
    common.add_argument("--format", choices=["json", "csv", "pretty"], default="json")

    parser = argparse.ArgumentParser(prog="qrigid", description="Quantum-graph rigidity certificates on M_n")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", parents=[common], help="certify one tuple")
    p.add_argument("--fixture", help="bundled fixture name, e.g. paper-n7-d4")
    p.add_argument("--input", help="tuple JSON file")
    p.add_argument("--sample", nargs=2, type=int, metavar=("N", "D"), help="random traceless Hermitian d-tuple")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("sweep", parents=[common], help="Monte Carlo certification over an (n, d) grid")
    p.add_argument("--n", default="3..8", help="n values: 5, 3..8 or 3,5")
    p.add_argument("--d", default=None, help="d values (default 2..n^2-3 per n)")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--timings", action="store_true", help="include wall-clock seconds (breaks byte-stability)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check-axioms", parents=[common], help="check the quantum-graph axioms")
    p.add_argument("--system", choices=["trivial", "full", "random"], default="trivial")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--input", help="superoperator JSON or tuple JSON")
    p.set_defaults(func=cmd_check_axioms)

    p = sub.add_parser("choi", parents=[common], help="convert between Kraus/superoperator and Choi JSON")
    p.add_argument("--input", required=True)
    p.add_argument("--direction", choices=["to-choi", "from-choi"], default="to-choi")
    p.set_defaults(func=cmd_choi)

    p = sub.add_parser("fixture", parents=[common], help="print a bundled fixture")
    p.add_argument("--name", default="paper-n7-d4", choices=sorted(opsys.FIXTURES))
    p.set_defaults(func=cmd_fixture)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (QRigidError, UsageError, ValueError, KeyError, OSError) as exc:
        print(f"qrigid {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
