"""Command line entry point: ``spectralball <verify|decompose|flow|sample|eval>``.

Exit codes: 0 success, 1 verification or internal failure, 2 parse error,
3 precondition violation.  Every positional input may be given inline or as
a path to a file holding the same text.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import sweeps
from .decompose import (
    DEFAULT_DEGREE_CAP,
    CertificateError,
    ConstraintViolation,
    DegreeCapExceeded,
    InternalResidual,
    check_constraints,
    decompose,
    field_hash,
    parse_certificate,
)
from .fields import parse_field
from .flows import StepOverflow, convergence_study
from .geometry import (
    SingularResolvent,
    ball_sample,
    fiber_sample,
    format_complex,
    in_ball,
    parse_complex,
    parse_word,
    spectrum,
    word_apply,
)
from .identities import verify_conjugation_suite, verify_generator_suite
from .parsing import ParseError

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_PRECONDITION = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def read_input(arg: str) -> str:
    """File contents if ``arg`` names an existing file, else ``arg`` itself."""
    if os.path.isfile(arg):
        return Path(arg).read_text()
    return arg


def _lines(text: str) -> str:
    # inline words and certificates may separate lines with ';'
    return text.replace(";", "\n") if "\n" not in text.strip() else text


def parse_matrix(text: str) -> np.ndarray:
    """``a11 a12; a21 a22`` with complex literals (``,`` also separates)."""
    rows = [r for r in text.replace("\n", ";").split(";") if r.strip()]
    entries = [[parse_complex(e) for e in r.replace(",", " ").split()] for r in rows]
    if len(entries) != 2 or any(len(r) != 2 for r in entries):
        raise ParseError("a matrix needs two rows of two entries")
    return np.array(entries, dtype=complex)


def format_matrix(M) -> str:
    M = np.asarray(M)
    return "; ".join(" ".join(format_complex(M[i, j]) for j in range(2)) for i in range(2))


def _emit(args, text: str):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# -- subcommands ---------------------------------------------------------------

def run_verify(args) -> int:
    gen = verify_generator_suite(args.max_degree)
    conj = verify_conjugation_suite()
    numeric = sweeps.run_all(args.seed, args.tol, quick=args.quick)
    ok = gen.ok and conj.ok and all(r.passed for r in numeric)
    if args.format == "machine":
        payload = {
            "ok": ok,
            "displays": [
                {"name": r.name, "status": r.status, "documented": r.documented, "acceptable": r.acceptable}
                for r in gen.results + conj.results
            ],
            "sweeps": [r.machine() for r in numeric],
        }
        _emit(args, json.dumps(payload, sort_keys=True) + "\n")
    else:
        parts = [gen.to_text(), conj.to_text(), "== numeric sweeps =="]
        parts.extend(r.to_text() for r in numeric)
        parts.append(f"overall: {'PASS' if ok else 'FAIL'}")
        _emit(args, "\n".join(parts) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def run_decompose(args) -> int:
    try:
        X = parse_field(read_input(args.field))
    except ParseError as exc:
        raise CliError(EXIT_PARSE, f"parse error: {exc}")
    report = check_constraints(X)
    if not report.passed:
        raise CliError(EXIT_PRECONDITION, f"constraint violation: {report.describe()}")
    try:
        cert = decompose(X, args.degree_cap)
    except ConstraintViolation as exc:  # pragma: no cover - checked above
        raise CliError(EXIT_PRECONDITION, f"constraint violation: {exc}")
    except DegreeCapExceeded as exc:
        raise CliError(EXIT_PRECONDITION, f"degree cap exceeded: {exc}")
    except InternalResidual as exc:
        raise CliError(EXIT_FAIL, f"internal residual: {exc}")
    if cert.reconstruct() != X or cert.input_hash != field_hash(X):
        raise CliError(EXIT_FAIL, "reconstruction differs from the input")
    if args.format == "machine":
        payload = {
            "input": cert.input_hash,
            "max_degree": cert.max_degree,
            "terms": [t.to_text() for t in cert.terms],
        }
        _emit(args, json.dumps(payload, sort_keys=True) + "\n")
    else:
        _emit(args, cert.to_text())
    return EXIT_OK


def run_flow(args) -> int:
    try:
        cert = parse_certificate(_lines(read_input(args.certificate)))
    except ParseError as exc:
        raise CliError(EXIT_PARSE, f"parse error: {exc}")
    except CertificateError as exc:
        raise CliError(EXIT_FAIL, f"certificate rejected: {exc}")
    if any(n < 1 for n in args.N):
        raise CliError(EXIT_PRECONDITION, "step counts must be positive")
    probes = ball_sample(args.probes, args.seed)
    try:
        report = convergence_study(cert, args.t, args.N, probes, seed=args.seed)
    except StepOverflow as exc:
        raise CliError(EXIT_PRECONDITION, f"step overflow: {exc}")
    if args.format == "machine":
        _emit(args, json.dumps(report.machine(), sort_keys=True) + "\n")
    else:
        _emit(args, report.to_text())
    drift_ok = all(r.drift <= args.tol for r in report.rows)
    return EXIT_OK if drift_ok else EXIT_FAIL


def run_sample(args) -> int:
    try:
        l1, l2 = parse_complex(args.l1), parse_complex(args.l2)
    except ParseError as exc:
        raise CliError(EXIT_PARSE, f"parse error: {exc}")
    if args.count < 0:
        raise CliError(EXIT_PRECONDITION, "count must be non-negative")
    try:
        mats = fiber_sample(l1, l2, args.count, args.seed)
    except ValueError as exc:
        raise CliError(EXIT_PRECONDITION, str(exc))
    if args.format == "machine":
        payload = [[[[z.real, z.imag] for z in row] for row in M] for M in mats]
        _emit(args, json.dumps(payload) + "\n")
    else:
        _emit(args, "".join(format_matrix(M) + "\n" for M in mats))
    return EXIT_OK


def run_eval(args) -> int:
    try:
        word = parse_word(_lines(read_input(args.word)))
        M = parse_matrix(read_input(args.matrix))
    except ParseError as exc:
        raise CliError(EXIT_PARSE, f"parse error: {exc}")
    if not in_ball(M):
        raise CliError(EXIT_PRECONDITION, "matrix is not in the spectral ball")
    try:
        out, peak = word_apply(word, M, track=True)
    except SingularResolvent as exc:  # pragma: no cover - impossible inside the ball
        raise CliError(EXIT_PRECONDITION, str(exc))
    if args.format == "machine":
        payload = {
            "matrix": [[[z.real, z.imag] for z in row] for row in out],
            "spectrum": [[z.real, z.imag] for z in spectrum(out)],
            "max_entry": peak,
        }
        _emit(args, json.dumps(payload, sort_keys=True) + "\n")
    else:
        _emit(args, format_matrix(out) + "\n")
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every random choice (default 0)")
    common.add_argument("--tol", type=float, default=1e-10, help="numeric tolerance (default 1e-10)")
    common.add_argument("--degree-cap", type=int, default=DEFAULT_DEGREE_CAP,
                        help=f"maximum intermediate degree during decomposition (default {DEFAULT_DEGREE_CAP})")
    common.add_argument("--out", help="write the result here instead of stdout")
    common.add_argument("--format", choices=("text", "machine"), default="text")

    p = argparse.ArgumentParser(prog="spectralball", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="identity suite, conjugation regressions, numeric sweeps")
    v.add_argument("--max-degree", type=int, default=4, help="payload monomial degree bound (default 4)")
    v.add_argument("--quick", action="store_true", help="100 instead of 1000 samples in the large sweeps")
    v.set_defaults(run=run_verify)

    d = sub.add_parser("decompose", parents=[common], help="certificate for an orthogonal field")
    d.add_argument("field", help="field text 'd11: ...; d12: ...' or a file")
    d.set_defaults(run=run_decompose)

    f = sub.add_parser("flow", parents=[common], help="convergence study of trotter words")
    f.add_argument("certificate", help="CERT v1 text or a file")
    f.add_argument("--t", type=float, default=0.5, help="flow time (default 0.5)")
    f.add_argument("--N", type=int, nargs="+", default=[16, 64, 256, 1024], help="step counts")
    f.add_argument("--probes", type=int, default=20, help="number of probe matrices (default 20)")
    f.set_defaults(run=run_flow)

    s = sub.add_parser("sample", parents=[common], help="matrices with a prescribed spectrum")
    s.add_argument("l1", help="first eigenvalue, complex literal re+im i")
    s.add_argument("l2", help="second eigenvalue")
    s.add_argument("--count", type=int, default=5)
    s.set_defaults(run=run_sample)

    e = sub.add_parser("eval", parents=[common], help="apply a composition word to a matrix")
    e.add_argument("word", help="word text (lines or ';'-separated) or a file")
    e.add_argument("matrix", help="'a11 a12; a21 a22' or a file")
    e.set_defaults(run=run_eval)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.run(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
