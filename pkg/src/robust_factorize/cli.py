"""``robust-factorize`` command line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .bench import METHODS, BenchConfig, emit_table, run_experiment, write_trajectory, run_method
from .corruption import CorruptionSpec, corrupt
from .dataio import LAYOUTS, load_image_dir, save_report, write_pgm
from .engine import SolveConfig
from .exceptions import DataError, NumericError, ShapeError
from .tensor import load_matrix, save_matrix
from .weights import KINDS

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_list(choices):
    def parse(text):
        items = [t.strip() for t in text.split(",") if t.strip()]
        bad = [t for t in items if t not in choices]
        if bad or not items:
            raise argparse.ArgumentTypeError(f"expected a comma list from {','.join(choices)}")
        return tuple(items)
    return parse


def _add_noise_args(p):
    p.add_argument("--noise", choices=("block", "salt", "none"), default="none")
    p.add_argument("--block-size", type=int, default=10)
    p.add_argument("--salt-frac", type=float, default=0.10)
    p.add_argument("--intensity", type=float, default=1.0,
                   help="value written into corrupted pixels (data is scaled to [0, 1])")


def _add_dataset_args(p, required=True):
    p.add_argument("--dataset", type=Path, required=required, help="image directory")
    p.add_argument("--layout", choices=LAYOUTS, default="orl")


def _noise_spec(args, seed):
    try:
        return CorruptionSpec(kind=args.noise, block_size=args.block_size,
                              salt_fraction=args.salt_frac, intensity=args.intensity, seed=seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def build_parser():
    parser = _Parser(prog="robust-factorize", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    b = sub.add_parser("bench", help="repeated corrupted-factorization benchmark")
    _add_dataset_args(b)
    _add_noise_args(b)
    b.add_argument("--methods", type=_csv_list(METHODS), default=("weighted-nmf", "target-polish"))
    b.add_argument("--weights", type=_csv_list(KINDS), default=("none", "cim", "huber"))
    b.add_argument("--rank", type=int, default=None, help="defaults to the number of subjects")
    b.add_argument("--repeats", type=int, default=10)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--n-iter-max", type=int, default=200)
    b.add_argument("--tol", type=float, default=1e-6)
    b.add_argument("--init", choices=("random-uniform", "nndsvd"), default="random-uniform")
    b.add_argument("--out", type=Path, required=True)
    b.add_argument("--emit-trajectories", action="store_true")

    f = sub.add_parser("factorize", help="single solve; writes W, H and the trajectory")
    src = f.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", type=Path, help="matrix file (CSV or RFM1)")
    src.add_argument("--dataset", type=Path, help="image directory")
    f.add_argument("--layout", choices=LAYOUTS, default="orl")
    f.add_argument("--method", choices=METHODS, default="target-polish")
    f.add_argument("--weight", choices=KINDS, default="cim")
    f.add_argument("--rank", type=int, required=True)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--n-iter-max", type=int, default=200)
    f.add_argument("--tol", type=float, default=1e-6)
    f.add_argument("--init", choices=("random-uniform", "nndsvd"), default="random-uniform")
    f.add_argument("--format", choices=("rfm1", "csv"), default="rfm1")
    f.add_argument("--out", type=Path, required=True)

    c = sub.add_parser("corrupt", help="write corrupted copies of a dataset's images")
    _add_dataset_args(c)
    _add_noise_args(c)
    c.add_argument("--noise-seed", type=int, default=0)
    c.add_argument("--limit", type=int, default=None, help="only the first N images")
    c.add_argument("--out", type=Path, required=True)
    return parser


def cmd_bench(args):
    dataset = load_image_dir(args.dataset, args.layout)
    try:
        config = BenchConfig(methods=args.methods, weights=args.weights, repeats=args.repeats,
                             rank=args.rank, base_seed=args.seed, n_iter_max=args.n_iter_max,
                             tol=args.tol, init=args.init,
                             emit_trajectories=args.emit_trajectories)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    noise = _noise_spec(args, args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    reports = run_experiment(dataset, noise, config, out_dir=args.out)
    meta = {"name": dataset.name, "layout": args.layout, "path": str(args.dataset),
            "shape": list(dataset.x.shape), "image_shape": list(dataset.image_shape),
            "n_classes": dataset.n_classes}
    cfg = config.to_dict()
    cfg["noise"] = noise.to_dict()
    save_report(reports, args.out / "report.json", config=cfg, dataset=meta)
    emit_table(reports, args.out / "table.csv")
    for rep in reports:
        agg = rep.aggregate()
        print(f"{rep.noise['kind']:6s} {rep.weight:6s} {rep.method:14s} "
              f"rre={agg['rre']['mean']:.4f} acc={agg['acc']['mean']:.4f} "
              f"nmi={agg['nmi']['mean']:.4f} time={agg['time_sec']['mean']:.2f}s")


def cmd_factorize(args):
    if args.input is not None:
        x = load_matrix(args.input, nonneg=True)
    else:
        x = load_image_dir(args.dataset, args.layout).x
    try:
        config = SolveConfig(rank=args.rank, n_iter_max=args.n_iter_max, tol=args.tol,
                             seed=args.seed, init=args.init)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.rank > min(x.shape):
        raise UsageError(f"rank {args.rank} exceeds min(m, n) = {min(x.shape)}")
    fit, secs = run_method(args.method, args.weight, x, config)
    args.out.mkdir(parents=True, exist_ok=True)
    ext = ".csv" if args.format == "csv" else ".rfm1"
    save_matrix(fit.factors.w, args.out / f"W{ext}")
    save_matrix(fit.factors.h, args.out / f"H{ext}")
    write_trajectory(fit, args.out / "trajectory.csv")
    summary = {"method": args.method, "weight": args.weight, "rank": args.rank,
               "iterations": len(fit.objective), "time_sec": secs,
               "final_objective": fit.objective[-1]}
    (args.out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary))


def cmd_corrupt(args):
    dataset = load_image_dir(args.dataset, args.layout)
    x = dataset.x if args.limit is None else dataset.x[:, :args.limit]
    spec = _noise_spec(args, args.noise_seed)
    noisy = corrupt(x, dataset.image_shape, spec)
    args.out.mkdir(parents=True, exist_ok=True)
    for j in range(noisy.shape[1]):
        write_pgm(args.out / f"{dataset.label_names[dataset.labels[j]]}_{j:04d}.pgm",
                  noisy[:, j].reshape(dataset.image_shape))
    save_matrix(noisy, args.out / "corrupted.rfm1")
    print(f"wrote {noisy.shape[1]} corrupted images to {args.out}")


COMMANDS = {"bench": cmd_bench, "factorize": cmd_factorize, "corrupt": cmd_corrupt}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"robust-factorize: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ShapeError) as exc:
        print(f"robust-factorize: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericError, FloatingPointError) as exc:
        print(f"robust-factorize: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
