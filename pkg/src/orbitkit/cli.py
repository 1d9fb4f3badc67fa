"""Command-line interface.

Exit codes: 0 success or verification pass, 1 verification failure,
2 usage, parse or domain error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from .errors import DomainError, OrbitkitError
from .hciz import hciz_det, hciz_via_induction, hciz_weyl_sum
from .linalg import as_spectrum
from .matrixio import load_matrix, matrix_to_dict
from .partition import partition_p1
from .randlie import RandomSource, haar_unitary_batch, sample_orbit_uniform_batch
from .samplers import (
    sample_bingham_rank1_batch, sample_minor_eigs_batch, sample_simplex_exponential_batch,
)
from .schur_horn import horn_construct, min_eigenvalue
from . import verify as _verify

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
SEED_ENV = "ORBITKIT_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _reals(text: str) -> np.ndarray:
    try:
        vals = [float(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}") from None
    arr = np.array(vals)
    if not np.all(np.isfinite(arr)):
        raise argparse.ArgumentTypeError(f"non-finite value in {text!r}")
    return arr


def _seed(text: str) -> int:
    try:
        value = int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be a decimal integer, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return _seed(raw)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"{SEED_ENV}: {exc}") from None


def _fmt(x: float) -> str:
    return repr(float(x))


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required for this command")


# --- subcommands ----------------------------------------------------------

def cmd_min_eig(args, out) -> int:
    A = load_matrix(args.matrix)
    value, vec = min_eigenvalue(A)
    if args.output == "json":
        out.write(json.dumps({"value": value, "witness_re": vec.real.tolist(),
                              "witness_im": vec.imag.tolist()}) + "\n")
    else:
        out.write(_fmt(value) + "\n")
        out.write(" ".join(f"{_fmt(z.real)}{z.imag:+.17g}j" for z in vec) + "\n")
    return EXIT_OK


def cmd_partition(args, out) -> int:
    out.write(_fmt(partition_p1(args.lam)) + "\n")
    return EXIT_OK


def cmd_hciz(args, out) -> int:
    if args.method == "det":
        value = hciz_det(args.y, args.lam)
    elif args.method == "weyl":
        value = hciz_weyl_sum(args.y, args.lam)
    else:
        value = hciz_via_induction(args.y, args.lam, args.quad_points)
    out.write(_fmt(value) + "\n")
    return EXIT_OK


def cmd_horn(args, out) -> int:
    U = horn_construct(args.v, args.lam)
    out.write(json.dumps(matrix_to_dict(U)) + "\n")
    return EXIT_OK


def _complex_columns(prefix: str, shape):
    names = []
    for idx in np.ndindex(*shape):
        tag = "_".join(str(i) for i in idx)
        names += [f"{prefix}{tag}_re", f"{prefix}{tag}_im"]
    return names


def _sample_rows(args, rng):
    """Returns ``(header, rows, json_payload)`` for the requested kind."""
    kind, count = args.kind, args.count
    if kind in ("haar", "orbit"):
        if kind == "haar":
            _require(args, "n")
            mats = haar_unitary_batch(args.n, count, rng)
        else:
            _require(args, "lam")
            mats = sample_orbit_uniform_batch(args.lam, count, rng)
        n = mats.shape[1]
        flat = mats.reshape(count, -1)
        rows = np.empty((count, 2 * flat.shape[1]))
        rows[:, 0::2], rows[:, 1::2] = flat.real, flat.imag
        payload = [matrix_to_dict(M) for M in mats]
        return _complex_columns("u" if kind == "haar" else "x", (n, n)), rows, payload
    if kind == "minors":
        _require(args, "lam")
        pts = sample_minor_eigs_batch(args.lam, count, rng)
        return [f"a{i}" for i in range(pts.shape[1])], pts, pts.tolist()
    if kind == "simplex":
        _require(args, "lam")
        pts = sample_simplex_exponential_batch(args.lam, count, rng, args.method).points
        return [f"x{i}" for i in range(pts.shape[1])], pts, pts.tolist()
    _require(args, "matrix")
    v = sample_bingham_rank1_batch(load_matrix(args.matrix), count, rng, args.method)
    rows = np.empty((count, 2 * v.shape[1]))
    rows[:, 0::2], rows[:, 1::2] = v.real, v.imag
    payload = [{"re": r.real.tolist(), "im": r.imag.tolist()} for r in v]
    return _complex_columns("v", (v.shape[1],)), rows, payload


def cmd_sample(args, out) -> int:
    if args.kind != "haar" and args.n is not None:
        raise UsageError("--n only applies to 'sample haar'")
    if args.kind not in ("simplex", "bingham") and args.method != "inverse_cdf":
        raise UsageError("--method only applies to 'simplex' and 'bingham'")
    rng = RandomSource(args.seed if args.seed is not None else _default_seed())
    header, rows, payload = _sample_rows(args, rng)
    if args.format == "json":
        text = json.dumps({"kind": args.kind, "samples": payload}) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    rng = RandomSource(args.seed if args.seed is not None else _default_seed())
    target, trials, threads = args.target, args.trials, args.threads
    if target == "partition":
        _require(args, "lam")
        reports = [_verify.verify_partition(args.lam, trials, rng, threads)]
        body = reports[0].to_dict()
    elif target == "hciz":
        _require(args, "y", "lam")
        reports = [_verify.verify_hciz(args.y, args.lam, trials, rng, threads)]
        body = reports[0].to_dict()
    elif target == "baryshnikov":
        _require(args, "lam")
        reports = [_verify.verify_baryshnikov(args.lam, trials, rng, threads)]
        body = reports[0].to_dict()
    elif target == "bombieri":
        _require(args, "n")
        pairs = _verify.verify_bombieri(args.n, trials, rng, args.max_degree, threads)
        reports = [r for _, r in pairs]
        body = [dict(alpha=list(a), **r.to_dict()) for a, r in pairs]
    else:
        _require(args, "matrix")
        reports = _verify.verify_bingham(load_matrix(args.matrix), trials, rng, threads)
        body = [dict(coordinate=i, **r.to_dict()) for i, r in enumerate(reports)]
    out.write(json.dumps(body, indent=2) + "\n")
    return EXIT_OK if _verify.all_passed(reports) else EXIT_FAIL


# --- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="orbitkit", description="Integration, sampling and optimisation "
                "over unitary adjoint orbits.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("min-eig", help="smallest eigenvalue and its eigenvector")
    s.add_argument("matrix", help="JSON matrix file")
    s.add_argument("--output", choices=("json", "text"), default="text")
    s.set_defaults(func=cmd_min_eig)

    s = sub.add_parser("partition", help="rank-one orbit partition function")
    s.add_argument("--lambda", dest="lam", type=_reals, required=True)
    s.set_defaults(func=cmd_partition)

    s = sub.add_parser("hciz", help="HCIZ orbit integral")
    s.add_argument("--y", type=_reals, required=True)
    s.add_argument("--lambda", dest="lam", type=_reals, required=True)
    s.add_argument("--method", choices=("det", "weyl", "induction"), default="det")
    s.add_argument("--quad-points", type=_positive, default=200)
    s.set_defaults(func=cmd_hciz)

    s = sub.add_parser("horn", help="unitary U with diag(U diag(lambda) U*) = v")
    s.add_argument("--v", type=_reals, required=True)
    s.add_argument("--lambda", dest="lam", type=_reals, required=True)
    s.set_defaults(func=cmd_horn)

    s = sub.add_parser("sample", help="draw samples as CSV or JSON")
    s.add_argument("kind", choices=("haar", "orbit", "minors", "simplex", "bingham"))
    s.add_argument("--count", type=_positive, default=1)
    s.add_argument("--seed", type=_seed)
    s.add_argument("--n", type=_positive)
    s.add_argument("--lambda", dest="lam", type=_reals)
    s.add_argument("--matrix")
    s.add_argument("--method", choices=("inverse_cdf", "rejection"), default="inverse_cdf")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("verify", help="closed form against Monte Carlo")
    s.add_argument("target", choices=("hciz", "partition", "bombieri", "baryshnikov", "bingham"))
    s.add_argument("--y", type=_reals)
    s.add_argument("--lambda", dest="lam", type=_reals)
    s.add_argument("--n", type=_positive)
    s.add_argument("--matrix")
    s.add_argument("--trials", type=_positive, default=100_000)
    s.add_argument("--seed", type=_seed)
    s.add_argument("--threads", type=_positive, default=1)
    s.add_argument("--max-degree", type=int, default=3)
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except UsageError as exc:
        print(f"orbitkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, OrbitkitError) as exc:
        print(f"orbitkit: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
