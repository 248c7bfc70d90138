"""Command-line entry point: ``hypernb {sample,spectrum,cluster,sweep,estimate}``.

Per-size parameters use the grammar ``--c 2=5,3=5``; sizes not listed have
``c_k = 0``. Exit codes: 0 success, 1 usage error, 2 bad input data,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import datetime
import logging
import sys
from pathlib import Path

import numpy as np

from .clustering import bphsc, metrics_row, nbhsc
from .eigen import ConvergenceError, leading_eigenpairs, spectrum_to_csv
from .experiments import ALGORITHMS, SweepSpec, boundary_curves, boundary_to_csv, run_sweep, sweep_to_csv
from .hsbm import (
    BlockmodelParams,
    estimate_parameters,
    sample_hypergraph,
    sample_labels,
    theory_report,
    theory_report_to_csv,
)
from .hypergraph import (
    HypergraphFormatError,
    clique_projection,
    load_hypergraph,
    load_labels,
    save_hypergraph,
    save_labels,
)
from .operators import build_B, build_Bprime, build_Jprime

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_sized(text: str, cast=float) -> dict:
    """``"2=5,3=0.5"`` -> ``{2: 5.0, 3: 0.5}``."""
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, sep, val = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected k=value, got {item!r}")
        try:
            out[int(key)] = cast(val)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad entry {item!r}") from None
    return out


def parse_counts(text: str) -> list[int]:
    """``4``, ``2,3,5`` or the inclusive range ``2:12``."""
    try:
        if ":" in text:
            lo, hi = (int(v) for v in text.split(":"))
            counts = list(range(lo, hi + 1))
        else:
            counts = [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad group counts {text!r}") from None
    if not counts or min(counts) < 1:
        raise argparse.ArgumentTypeError(f"bad group counts {text!r}")
    return counts


def parse_axes(text: str) -> dict:
    """``"2=0:1:11,3=0:1:11"`` -> ``{2: (0.0, 1.0, 11), ...}``."""

    def one(v):
        lo, hi, steps = v.split(":")
        return float(lo), float(hi), int(steps)

    return parse_sized(text, one)


def _header(args) -> str:
    if args.reproducible:
        return ""
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    return f"# generated {stamp}\n"


def _emit(args, text: str, path=None):
    text = _header(args) + text
    target = path or args.out
    if target:
        Path(target).write_text(text)
    else:
        sys.stdout.write(text)


def _labels_for(args, n, q):
    if args.exact_sizes:
        counts = np.floor(np.asarray(q) * n).astype(int)
        counts[: n - counts.sum()] += 1
        return np.repeat(np.arange(len(q)), counts)
    return sample_labels(n, q, len(q), args.seed)


def cmd_sample(args):
    if not args.c:
        raise UsageError("--c is required")
    params = BlockmodelParams(n=args.n, ell=args.groups, c=args.c, p=args.p or {}, seed=args.seed)
    z = _labels_for(args, args.n, params.q)
    H = sample_hypergraph(params, z, fixed_count=args.fixed_count)
    prefix = args.out or "sample"
    save_hypergraph(H, f"{prefix}.edges")
    save_labels(z, f"{prefix}.labels")
    if args.groups == 2:
        sys.stdout.write(_header(args) + theory_report_to_csv(theory_report(params)))
    else:
        sys.stdout.write(f"# wrote {prefix}.edges ({H.m} edges) and {prefix}.labels\n")


def _load(args):
    H = load_hypergraph(args.hypergraph, n=args.nodes)
    return H.deduplicated() if args.dedup else H


def cmd_spectrum(args):
    H = _load(args)
    if args.operator == "B":
        M = build_B(H)
    elif args.operator == "Bprime":
        M = build_Bprime(H)
    else:
        if not args.labels:
            raise UsageError("Jprime needs --labels to estimate the group matrices")
        z = load_labels(args.labels, H.n)
        ell = args.groups or int(z.max()) + 1
        M = build_Jprime(H, estimate_parameters(H, z, ell).G)
    if M.shape[0] < 2:
        raise ValueError("operator has dimension below 2")
    h = min(args.h, M.shape[0] - 1)
    S = leading_eigenpairs(M, h, tol=args.tol, seed=args.seed)
    _emit(args, spectrum_to_csv(S, bulk_line=True))


def cmd_cluster(args):
    H = _load(args)
    truth = None
    if args.truth:
        truth = load_labels(args.truth)
        if truth.shape[0] != H.n:
            raise HypergraphFormatError(f"truth file has {truth.shape[0]} labels for {H.n} nodes")
    if args.project:
        H = clique_projection(H)
    prefix = args.out or "cluster"
    rows = ["seed,ell,h,objective,variance_explained,ari"]
    # several group counts give one row each: the scree table for choosing ell
    for ell in args.groups:
        if args.algo == "nbhsc":
            res = nbhsc(H, ell, args.h, seed=args.seed, reference=truth)
        else:
            res = bphsc(H, ell, args.h, args.rounds, seed=args.seed, reference=truth)
        save_labels(res.labels, f"{prefix}.labels" if len(args.groups) == 1 else f"{prefix}_{ell}.labels")
        rows.append(metrics_row(args.seed, ell, args.h, res))
    sys.stdout.write(_header(args) + "\n".join(rows) + "\n")


def cmd_sweep(args):
    if not args.c:
        raise UsageError("--c is required")
    if not args.axis:
        raise UsageError("--axis is required")
    spec = SweepSpec(
        n=args.n, c=args.c, axes=args.axis, ell=args.groups, trials=args.trials,
        algo=args.algo, seed=args.seed, h=args.h, rounds=args.rounds, fixed_p=args.p or {},
    )
    rows = run_sweep(spec, workers=args.threads)
    prefix = args.out or "sweep"
    _emit(args, sweep_to_csv(spec, rows), f"{prefix}_heatmap.csv")
    axes = spec.axis_sizes
    if len(axes) == 2 and args.groups == 2:
        curves = boundary_curves(args.c, axes, spec.fixed_p)
        _emit(args, boundary_to_csv(curves, axes), f"{prefix}_boundary.csv")


def cmd_estimate(args):
    H = _load(args)
    z = load_labels(args.labels, H.n)
    ell = args.groups or int(z.max()) + 1
    if z.max() >= ell:
        raise HypergraphFormatError(f"label {z.max()} outside [0, {ell})")
    est = estimate_parameters(H, z, ell, pseudocount=args.pseudocount)
    lines = ["quantity,k,s,t,value"]
    lines += [f"q,,{s},,{v!r}" for s, v in enumerate(est.q.tolist())]
    for k in sorted(est.pair_degrees):
        for name, mat in (("m", est.pair_counts[k]), ("c", est.pair_degrees[k]), ("g", est.G.get(k))):
            for s in range(ell):
                for t in range(ell):
                    lines.append(f"{name},{k},{s},{t},{float(mat[s, t])!r}")
    lines.append("diagonal_c,k," + ",".join(f"s{s}" for s in range(ell)))
    for k in sorted(est.pair_degrees):
        lines.append(f"diagonal_c,{k}," + ",".join(repr(float(v)) for v in np.diag(est.pair_degrees[k])))
    _emit(args, "\n".join(lines) + "\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output file or prefix")
    common.add_argument("--reproducible", action="store_true", help="omit the timestamp header")
    common.add_argument("--threads", type=int, default=1, help="worker processes")
    common.add_argument("-v", "--verbose", action="store_true")
    files = argparse.ArgumentParser(add_help=False)
    files.add_argument("hypergraph", help="hyperedge list, 1-based node ids")
    files.add_argument("--nodes", type=int, help="node count (default: largest id)")
    files.add_argument("--dedup", action="store_true", help="collapse parallel edges")

    ap = _Parser(prog="hypernb", description="Sample, analyse and cluster hypergraphs with mixed edge sizes.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def sized(text):
        return parse_sized(text)

    s = sub.add_parser("sample", parents=[common], help="draw a blockmodel hypergraph")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--groups", type=int, default=2)
    s.add_argument("--c", type=sized, help="mean k-degrees, e.g. 2=5,3=5")
    s.add_argument("--p", type=sized, help="within-cluster fractions, e.g. 2=0.9,3=0.1")
    s.add_argument("--fixed-count", action="store_true", help="round(n c_k / k) edges instead of Poisson")
    s.add_argument("--exact-sizes", action="store_true", help="equal group sizes instead of random labels")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("spectrum", parents=[common, files], help="leading eigenvalues of an operator")
    s.add_argument("--operator", choices=("B", "Bprime", "Jprime"), default="Bprime")
    s.add_argument("--h", type=int, default=10)
    s.add_argument("--labels")
    s.add_argument("--groups", type=int)
    s.add_argument("--tol", type=float, default=1e-8)
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("cluster", parents=[common, files], help="cluster a hypergraph file")
    s.add_argument("--algo", choices=("nbhsc", "bphsc"), default="bphsc")
    s.add_argument("--groups", type=parse_counts, default=[2], help="group count, list 2,3,5 or range 2:12")
    s.add_argument("--h", type=int, default=30)
    s.add_argument("--rounds", type=int, default=10)
    s.add_argument("--truth")
    s.add_argument("--project", action="store_true", help="run on the clique projection instead")
    s.set_defaults(func=cmd_cluster)

    s = sub.add_parser("sweep", parents=[common], help="ARI phase diagram over p_k")
    s.add_argument("--n", type=int, default=200)
    s.add_argument("--groups", type=int, default=2)
    s.add_argument("--c", type=sized)
    s.add_argument("--axis", type=parse_axes, help="grid axes, e.g. 2=0:1:11,3=0:1:11")
    s.add_argument("--p", type=sized, help="fixed p_k for sizes without an axis")
    s.add_argument("--trials", type=int, default=20)
    s.add_argument("--algo", choices=ALGORITHMS, default="nbhsc")
    s.add_argument("--h", type=int, default=2)
    s.add_argument("--rounds", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("estimate", parents=[common, files], help="estimate group matrices from labels")
    s.add_argument("labels")
    s.add_argument("--groups", type=int)
    s.add_argument("--pseudocount", type=float, default=1.0)
    s.set_defaults(func=cmd_estimate)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:  # --help and usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.ERROR, format="%(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        ap.print_usage(sys.stderr)
        print(f"hypernb: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"hypernb: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (HypergraphFormatError, OSError, ValueError) as exc:
        print(f"hypernb: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
