"""Command-line front end.

Subcommands:
  gen         write a seeded truncated-normal dataset file
  quantize    compress a dataset file into an artifact file
  dequantize  reconstruct a dataset file from an artifact
  eval        print error metrics between two dataset files
  bench       run a benchmark grid from a config file, emit CSVs

Exit codes: 0 success, 1 usage error, 2 I/O or file-format error,
3 benchmark where every grid cell was infeasible.
"""

from __future__ import annotations

import argparse
import sys

from . import bench as bench_mod
from .codec import ArtifactFormatError, load_artifact, save_artifact
from .matrix import (
    DatasetFormatError,
    TruncNormalSpec,
    generate_truncated_normal,
    load_matrix,
    save_matrix,
)
from .metrics import compute_errors
from .quantizer import dequantize, hera_quantize, make_pq_config, pq_quantize

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_INFEASIBLE = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits the process with status 2 on bad flags; we want a
    # catchable error and exit code 1 instead
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="heraq", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a truncated-normal dataset file")
    gen.add_argument("--rows", type=int, required=True)
    gen.add_argument("--cols", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--mean", type=float, default=0.5)
    gen.add_argument("--stddev", type=float, default=0.16)
    gen.add_argument("--lower", type=float, default=0.0)
    gen.add_argument("--upper", type=float, default=1.0)
    gen.add_argument("--out", required=True, help="dataset file to write")

    quant = sub.add_parser("quantize", help="compress a dataset into an artifact")
    quant.add_argument("--in", dest="input", required=True, help="dataset file")
    quant.add_argument("--out", required=True, help="artifact file to write")
    quant.add_argument("--method", choices=("pq", "hera"), default="pq")
    quant.add_argument("--levels", type=int, default=0, help="hierarchy depth (hera)")
    quant.add_argument("--subspaces", type=int, required=True)
    quant.add_argument("--ks", type=int, required=True, help="centroids per subspace")
    quant.add_argument("--seed", type=int, default=0)
    quant.add_argument("--max-iters", type=int, default=100)
    quant.add_argument("--rel-tol", type=float, default=1e-4)
    quant.add_argument("--restarts", type=int, default=4)

    deq = sub.add_parser("dequantize", help="reconstruct a dataset from an artifact")
    deq.add_argument("--in", dest="input", required=True, help="artifact file")
    deq.add_argument("--out", required=True, help="dataset file to write")

    ev = sub.add_parser("eval", help="error metrics between two dataset files")
    ev.add_argument("--original", required=True)
    ev.add_argument("--reconstructed", required=True)

    bn = sub.add_parser("bench", help="run a benchmark grid from a config file")
    bn.add_argument("--config", required=True)
    bn.add_argument("--out", default=None, help="results CSV (overrides config)")
    bn.add_argument("--threads", type=int, default=1)
    bn.add_argument(
        "--charge-fm",
        choices=("on", "off"),
        default=None,
        help="override orientation-map budget charging",
    )
    return parser


def _cmd_gen(args) -> int:
    spec = TruncNormalSpec(
        mean=args.mean,
        stddev=args.stddev,
        lower=args.lower,
        upper=args.upper,
        seed=args.seed,
    )
    matrix = generate_truncated_normal(spec, args.rows, args.cols)
    save_matrix(matrix, args.out)
    print(f"wrote {args.rows}x{args.cols} dataset to {args.out}")
    return EXIT_OK


def _cmd_quantize(args) -> int:
    if args.method == "pq" and args.levels != 0:
        raise _UsageError("method pq does not take --levels; use --method hera")
    if args.levels < 0:
        raise _UsageError(f"--levels must be >= 0, got {args.levels}")
    matrix = load_matrix(args.input)
    cfg = make_pq_config(
        num_subspaces=args.subspaces,
        centroids_per_subspace=args.ks,
        seed=args.seed,
        max_iters=args.max_iters,
        rel_tol=args.rel_tol,
        restarts=args.restarts,
    )
    if args.method == "pq":
        artifact = pq_quantize(matrix, cfg)
    else:
        artifact = hera_quantize(matrix, args.levels, cfg)
    info = save_artifact(artifact, args.out)
    print(
        f"wrote {args.method} artifact ({info.file_bytes} bytes, "
        f"K_s={info.ks}, levels={info.levels}) to {args.out}"
    )
    return EXIT_OK


def _cmd_dequantize(args) -> int:
    artifact = load_artifact(args.input)
    matrix = dequantize(artifact)
    save_matrix(matrix, args.out)
    print(f"wrote {matrix.shape[0]}x{matrix.shape[1]} dataset to {args.out}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    original = load_matrix(args.original)
    reconstructed = load_matrix(args.reconstructed)
    report = compute_errors(original, reconstructed)
    if report.mre is None:
        print("warning: original contains zeros, mre undefined", file=sys.stderr)
    print(f"mae={report.mae!r}")
    print(f"mre={'nan' if report.mre is None else repr(report.mre)}")
    print(f"mse={report.mse!r}")
    return EXIT_OK


def _summary_path(out_path: str) -> str:
    if out_path.endswith(".csv"):
        return out_path[: -len(".csv")] + ".summary.csv"
    return out_path + ".summary.csv"


def _cmd_bench(args) -> int:
    cfg = bench_mod.load_config(args.config)
    if args.charge_fm is not None:
        from dataclasses import replace

        cfg = replace(cfg, charge_fm_overhead=(args.charge_fm == "on"))
    out_path = args.out or cfg.output_path
    if out_path is None:
        raise _UsageError("no output path: pass --out or set output in the config")
    if args.threads < 1:
        raise _UsageError(f"--threads must be >= 1, got {args.threads}")
    rows = bench_mod.run_experiment(cfg, threads=args.threads)
    bench_mod.write_csv(bench_mod.rows_to_csv(rows), out_path)
    summary = bench_mod.summarize(rows)
    summary_path = _summary_path(out_path)
    bench_mod.write_csv(bench_mod.summary_to_csv(summary), summary_path)
    feasible = sum(1 for r in rows if r.feasible)
    print(f"wrote {len(rows)} rows to {out_path} (summary: {summary_path})")
    if feasible == 0:
        print("every grid cell was infeasible at this budget", file=sys.stderr)
        return EXIT_INFEASIBLE
    if feasible < len(rows):
        print(f"{len(rows) - feasible} infeasible rows", file=sys.stderr)
    return EXIT_OK


_COMMANDS = {
    "gen": _cmd_gen,
    "quantize": _cmd_quantize,
    "dequantize": _cmd_dequantize,
    "eval": _cmd_eval,
    "bench": _cmd_bench,
}


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArtifactFormatError, DatasetFormatError) as exc:
        # format errors subclass ValueError; report file problems as I/O
        code = (
            EXIT_IO
            if isinstance(exc, (ArtifactFormatError, DatasetFormatError))
            else EXIT_USAGE
        )
        print(f"error: {exc}", file=sys.stderr)
        return code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SystemExit as exc:  # argparse --help
        code = exc.code
        return code if isinstance(code, int) else EXIT_OK


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()
