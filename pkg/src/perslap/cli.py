"""Command-line front end.

Subcommands: ``build`` (construct or re-import complexes), ``spectra`` (one
persistent spectrum), ``family`` (spectrum/summary grids), ``bench`` (matrix
vs eigensolver timings).  Exit codes: 0 success, 1 usage, 2 bad input data,
3 numerical failure with no fallback.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np
import scipy.linalg

from . import builders
from .complexes import FilteredComplex
from .family import default_jobs, evaluate_family, grid_pairs
from .laplacians import persistent_laplacian
from .spectra import STATS, EigOptions, Spectrum, ZeroPolicy, compute_spectrum
from .sheaves import check_composition, is_sheaf_doc, sheaf_from_dict, \
    sheaf_to_dict, weighted_complex

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the contract reserves 2 for
    # bad input data, so route usage problems through our own exception
    def error(self, message):
        raise UsageError(message)


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--solver", choices=("full", "extremal"), default="full")
    p.add_argument("--k", type=int, default=10, help="eigenvalue count for --solver extremal")
    p.add_argument("--which", choices=("smallest", "largest"), default="smallest")
    p.add_argument("--tol", type=float, default=1e-6, help="iterative solver tolerance")
    p.add_argument("--subspace", type=int, default=None,
                   help="Lanczos subspace dimension (default max(2k+1, 6k))")
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--zero-abs-tol", type=float, default=1e-8,
                   help="absolute part of the zero-eigenvalue threshold")
    p.add_argument("--zero-rel-tol", type=float, default=1e-10,
                   help="relative part of the zero-eigenvalue threshold")
    p.add_argument("--precision", choices=("f32", "f64"), default="f64")
    p.add_argument("--force", action="store_true",
                   help="proceed on composition-inconsistent sheaf input (with a warning)")


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output file (default stdout)")


def build_parser() -> _Parser:
    parser = _Parser(prog="perslap",
                     description="Persistent Laplacian spectra of filtered complexes.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    b = sub.add_parser("build", help="construct a complex and write it as JSON")
    b.add_argument("--builder", required=True,
                   choices=("rips", "dflag", "dowker-sink", "dowker-source",
                            "dowker-pair", "import"))
    b.add_argument("--source", required=True, help="input data file")
    b.add_argument("--out", required=True, help="output JSON path")
    b.add_argument("--max-dim", type=int, default=2)
    b.add_argument("--threshold", type=float, default=np.inf)
    b.add_argument("--source-format", choices=("points", "distances"), default="points",
                   help="rips input kind")
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("spectra", help="spectrum of one persistent Laplacian")
    s.add_argument("complex", help="complex or sheaf JSON file")
    s.add_argument("--dim", type=int, required=True)
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--b", type=float, default=None, help="defaults to a")
    _add_solver_flags(s)
    _add_output_flags(s)
    s.set_defaults(func=cmd_spectra)

    f = sub.add_parser("family", help="grid of spectra or summary values")
    f.add_argument("complex", help="complex or sheaf JSON file")
    f.add_argument("--dim", type=int, required=True)
    f.add_argument("--mode", required=True,
                   choices=("fixed-delta", "consecutive", "diagonal", "all-pairs"))
    f.add_argument("--grid", default=None, help="comma-separated filtration values")
    f.add_argument("--delta", type=float, default=None, help="offset for --mode fixed-delta")
    f.add_argument("--stat", choices=STATS, default=None,
                   help="summary statistic; omit for raw spectra")
    f.add_argument("--flip", action="store_true",
                   help="top-dimension spectra via the smaller Gram product")
    f.add_argument("--reduce-harmonic", metavar="FILE", default=None,
                   help="kernel-basis JSON; spectra of the reduced matrices")
    f.add_argument("--prescreen-max-betti", type=int, default=None,
                   help="skip cells whose rank-oracle Betti number exceeds this")
    f.add_argument("--jobs", type=int, default=None,
                   help="worker threads (default $PERSLAP_JOBS or all cores)")
    _add_solver_flags(f)
    _add_output_flags(f)
    f.set_defaults(func=cmd_family)

    t = sub.add_parser("bench", help="per-cell matrix and eigensolver timings")
    t.add_argument("complex", help="complex or sheaf JSON file")
    t.add_argument("--dim", type=int, required=True)
    t.add_argument("--mode", required=True,
                   choices=("fixed-delta", "consecutive", "diagonal", "all-pairs"))
    t.add_argument("--grid", default=None)
    t.add_argument("--delta", type=float, default=None)
    _add_solver_flags(t)
    t.add_argument("--out", default=None)
    t.set_defaults(func=cmd_bench)
    return parser


# -- shared plumbing -------------------------------------------------------


def _dtype(args):
    return np.float32 if args.precision == "f32" else np.float64


def _eig_options(args) -> EigOptions | None:
    if args.solver == "full":
        return None
    mode = "k_smallest" if args.which == "smallest" else "k_largest"
    return EigOptions(mode=mode, k=args.k, tol=args.tol,
                      subspace_dim=args.subspace, max_iter=args.max_iter)


def _policy(args) -> ZeroPolicy:
    return ZeroPolicy(abs_tol=args.zero_abs_tol, rel_tol=args.zero_rel_tol)


def _load_complex(path: str, force: bool = False) -> FilteredComplex:
    with open(path) as fh:
        doc = json.load(fh)
    if is_sheaf_doc(doc):
        sheaf = sheaf_from_dict(doc)
        report = check_composition(sheaf)
        if not report.ok and not force:
            raise ValueError(
                f"{path}: restriction scalars are not composition-consistent "
                f"(rerun with --force to proceed):\n{report}")
        if not report.ok:
            print(f"warning: {path}: proceeding on an inconsistent sheaf "
                  f"({len(report.violations)} mismatched paths)", file=sys.stderr)
        return weighted_complex(sheaf)
    fc = FilteredComplex.from_dict(doc)
    report = fc.validate()
    if not report.ok:
        raise ValueError(f"{path}: invalid complex:\n{report}")
    return fc


def _open_out(path):
    return open(path, "w") if path else sys.stdout


def _emit(args, text_writer, doc_builder) -> None:
    fh = _open_out(args.out)
    try:
        if getattr(args, "format", "csv") == "json":
            json.dump(doc_builder(), fh, indent=1)
            fh.write("\n")
        else:
            text_writer(fh)
    finally:
        if fh is not sys.stdout:
            fh.close()


def _parse_grid(text: str | None) -> np.ndarray | None:
    if text is None:
        return None
    try:
        return np.array([float(t) for t in text.split(",") if t.strip() != ""])
    except ValueError:
        raise UsageError(f"--grid must be comma-separated numbers, got {text!r}") from None


def _load_bases(path: str) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    entries = doc["bases"] if isinstance(doc, dict) else doc
    out = {}
    for e in entries:
        vectors = np.asarray(e["vectors"], dtype=np.float64)
        if vectors.ndim != 2:
            raise ValueError(f"{path}: basis vectors for ({e['a']}, {e['b']}) must be 2-D")
        out[(float(e["a"]), float(e["b"]))] = vectors.T  # one kernel vector per row
    return out


# -- subcommands -----------------------------------------------------------


def _print_counts(fc: FilteredComplex, label: str = "") -> None:
    prefix = f"{label}: " if label else ""
    for n, c in enumerate(fc.cell_counts()):
        print(f"{prefix}dim {n}: {c} cells")


def cmd_build(args) -> int:
    if args.max_dim < 0:
        raise UsageError("--max-dim must be >= 0")
    if args.builder == "import":
        with open(args.source) as fh:
            doc = json.load(fh)
        if is_sheaf_doc(doc):
            sheaf = sheaf_from_dict(doc)
            with open(args.out, "w") as fh:
                json.dump(sheaf_to_dict(sheaf), fh, indent=1)
                fh.write("\n")
            _print_counts(sheaf.base)
            return EXIT_OK
        fc = FilteredComplex.from_dict(doc)
        report = fc.validate()
        if not report.ok:
            raise ValueError(f"{args.source}: invalid complex:\n{report}")
    elif args.builder == "rips":
        if args.source_format == "distances":
            D = builders.load_distance_matrix(args.source)
        else:
            from .validation import point_cloud_distances
            D = point_cloud_distances(builders.load_point_cloud(args.source))
        fc = builders.rips(D, args.max_dim, args.threshold)
    elif args.builder == "dflag":
        fc = builders.directed_flag(builders.load_digraph(args.source), args.max_dim)
    elif args.builder in ("dowker-sink", "dowker-source"):
        W = builders.load_weights(args.source)
        make = builders.dowker_sink if args.builder == "dowker-sink" else builders.dowker_source
        fc = make(W, args.max_dim, args.threshold)
    else:  # dowker-pair
        R = builders.load_relation(args.source)
        rows_fc, cols_fc = builders.dowker_pair(R, args.max_dim)
        stem = args.out[:-5] if args.out.endswith(".json") else args.out
        rows_fc.to_json(stem + ".rows.json")
        cols_fc.to_json(stem + ".cols.json")
        _print_counts(rows_fc, "rows")
        _print_counts(cols_fc, "cols")
        return EXIT_OK
    fc.to_json(args.out)
    _print_counts(fc)
    return EXIT_OK


def _write_spectrum_csv(fh, dim: int, a: float, b: float, s: Spectrum) -> None:
    fh.write("dim,a,b,index,eigenvalue\n")
    for idx, lam in enumerate(s.values):
        fh.write(f"{dim},{a!r},{b!r},{idx},{float(lam)!r}\n")


def cmd_spectra(args) -> int:
    b = args.a if args.b is None else args.b
    if b < args.a:
        raise UsageError(f"--b must be >= --a, got a={args.a}, b={b}")
    if args.dim < 0:
        raise UsageError("--dim must be >= 0")
    fc = _load_complex(args.complex, force=args.force)
    if args.dim > fc.max_dim:
        raise ValueError(
            f"{args.complex}: dimension {args.dim} exceeds top dimension {fc.max_dim}")
    L = persistent_laplacian(fc, args.dim, args.a, b, dtype=_dtype(args))
    s = compute_spectrum(L, _eig_options(args), _policy(args))
    doc = {"dim": args.dim, "a": args.a, "b": b,
           "eigenvalues": [float(x) for x in s.values],
           "size": s.size, "solver_mode": s.mode, "fallback": s.fallback}
    _emit(args, lambda fh: _write_spectrum_csv(fh, args.dim, args.a, b, s), lambda: doc)
    return EXIT_OK


def _family_mode(args) -> str:
    return args.mode.replace("-", "_")


def _check_family_usage(args) -> None:
    mode = _family_mode(args)
    if mode == "fixed_delta" and (args.delta is None or args.delta <= 0):
        raise UsageError("--mode fixed-delta requires --delta > 0")
    if mode != "fixed_delta" and args.delta is not None:
        raise UsageError("--delta only applies to --mode fixed-delta")
    if mode in ("fixed_delta", "all_pairs") and args.grid is None:
        raise UsageError(f"--mode {args.mode} requires --grid")
    if mode == "consecutive" and args.grid is not None:
        raise UsageError("--mode consecutive derives its grid from the complex")
    if args.dim < 0:
        raise UsageError("--dim must be >= 0")


def cmd_family(args) -> int:
    _check_family_usage(args)
    if args.flip and args.reduce_harmonic:
        raise UsageError("--flip and --reduce-harmonic are mutually exclusive")
    fc = _load_complex(args.complex, force=args.force)
    if args.dim > fc.max_dim:
        raise ValueError(
            f"{args.complex}: dimension {args.dim} exceeds top dimension {fc.max_dim}")
    bases = _load_bases(args.reduce_harmonic) if args.reduce_harmonic else None
    grid = evaluate_family(
        fc, args.dim, _family_mode(args), _parse_grid(args.grid), args.delta,
        args.stat, eig=_eig_options(args), policy=_policy(args),
        jobs=args.jobs if args.jobs is not None else default_jobs(),
        flip=args.flip, kernel_bases=bases, dtype=_dtype(args),
        prescreen_max_betti=args.prescreen_max_betti)
    _emit(args, grid.write_csv, grid.to_dict)
    return EXIT_OK


def cmd_bench(args) -> int:
    _check_family_usage(args)
    fc = _load_complex(args.complex, force=args.force)
    if args.dim > fc.max_dim:
        raise ValueError(
            f"{args.complex}: dimension {args.dim} exceeds top dimension {fc.max_dim}")
    values, pairs = grid_pairs(fc, _family_mode(args), _parse_grid(args.grid), args.delta)
    eig, policy, dtype = _eig_options(args), _policy(args), _dtype(args)
    fh = _open_out(args.out)
    try:
        fh.write("dim,a,b,matrix_seconds,eig_seconds\n")
        for _, _, a, b in pairs:
            t0 = time.perf_counter()
            L = persistent_laplacian(fc, args.dim, a, b, dtype=dtype)
            t1 = time.perf_counter()
            compute_spectrum(L, eig, policy)
            t2 = time.perf_counter()
            fh.write(f"{args.dim},{a!r},{b!r},{t1 - t0:.6f},{t2 - t1:.6f}\n")
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
