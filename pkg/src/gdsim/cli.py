"""Command-line entry point: ``gdsim <subcommand> ...``.

Every output starts with ``#`` provenance lines (version, subcommand, the
configuration that affects results, seed). Thread count and output paths are
deliberately left out so identical runs produce identical bytes.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__, _accel, audit as audit_mod, baselines, bench as bench_mod
from . import evaluate, graph, ingest, oracle, parallel
from .diffusion import Variant, forward_row, operator_for, similarity_row
from .errors import DataError

_SEMANTIC_SKIP = {"out", "threads", "labels_out", "func", "command", "list_measures"}


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _fractions(text):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals or any(not 0 < v <= 1 for v in vals):
        raise argparse.ArgumentTypeError("fractions must lie in (0, 1]")
    return vals


def _header(args):
    cfg = " ".join(f"{k}={v}" for k, v in sorted(vars(args).items())
                   if k not in _SEMANTIC_SKIP and v is not None and v is not False)
    return [f"gdsim {__version__}", f"command={args.command} {cfg}".rstrip(),
            f"seed={getattr(args, 'seed', None)}"]


def _emit(args, lines):
    text = "".join(f"# {h}\n" for h in _header(args)) + "".join(f"{ln}\n" for ln in lines)
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# --------------------------------------------------------------------------
# input handling shared by several subcommands


def _add_input(p, labels=False):
    g = p.add_argument_group("input")
    g.add_argument("--matrix", help="sparse triplet file ('i s w' lines)")
    g.add_argument("--vectors", help="dense delimiter-separated vectors, one object per row")
    g.add_argument("--data", help="labeled table with a header row")
    g.add_argument("--schema", help="JSON schema mapping column name -> kind")
    g.add_argument("--infer", action="store_true", help="infer the schema from --data")
    g.add_argument("--label", help="label column name when inferring")
    g.add_argument("--delimiter", default=",")
    g.add_argument("--rescale", action="store_true",
                   help="shift negative continuous columns by their minimum")
    if labels:
        g.add_argument("--label-col", help="label column of --vectors")
        g.add_argument("--label-file", help="one label per line for --vectors/--matrix")
    p.add_argument("--storage", choices=("auto", "sparse", "dense"), default="auto")


def _load_table(args):
    if args.schema is None and not args.infer:
        raise DataError("--data needs --schema or --infer")
    return ingest.load_table(args.data, args.schema, infer=args.infer, label=args.label,
                             delimiter=args.delimiter)


def _load_input(args):
    """Return ``(dataset or None, FeatureMatrix, labels or None)``."""
    given = [x for x in ("matrix", "vectors", "data") if getattr(args, x)]
    if len(given) != 1:
        raise DataError("give exactly one of --matrix, --vectors, --data")
    label_file = getattr(args, "label_file", None)
    if args.matrix:
        w = graph.read_triplets(args.matrix)
        labels = ingest.load_labels(label_file) if label_file else None
        return None, w, labels
    if args.vectors:
        w, labels = ingest.load_vectors(args.vectors, delimiter=args.delimiter,
                                        label_col=getattr(args, "label_col", None),
                                        label_file=label_file)
        return None, w, labels
    ds = _load_table(args)
    return ds, ingest.encode(ds, rescale=args.rescale), list(ds.labels)


def _variant(args):
    return Variant(args.variant, args.k)


# --------------------------------------------------------------------------
# subcommands


def cmd_encode(args):
    ds = _load_table(args)
    w = ingest.encode(ds, rescale=args.rescale)
    target = args.out or "-"
    header = _header(args) + [f"features {' '.join(ingest.feature_names(ds))}"]
    if target == "-":
        sys.stdout.write("".join(f"# {h}\n" for h in header))
        sys.stdout.write(f"# shape {w.n} {w.m}\n")
        for i, s, v in w.entries():
            sys.stdout.write(f"{i} {s} {v!r}\n")
    else:
        graph.write_triplets(target, w, header)
    if args.labels_out:
        Path(args.labels_out).write_text("".join(f"{y}\n" for y in ds.labels), encoding="utf-8")
    return 0


def cmd_info(args):
    _, w, _ = _load_input(args)
    connected, comps = audit_mod.check_connectivity(w)
    op = operator_for(w, "forward", storage=args.storage)
    _emit(args, [
        f"n\t{w.n}", f"m\t{w.m}", f"nnz\t{w.nnz}", f"density\t{w.density:.6g}",
        f"p_min\t{w.p.min():.17g}", f"p_max\t{w.p.max():.17g}",
        f"p_ratio\t{graph.row_sum_ratio(w):.17g}",
        f"connected\t{connected}", f"components\t{len(comps)}",
        f"storage\t{'dense' if op.dense else 'sparse'}",
    ])
    return 0


def cmd_similar(args):
    _, w, _ = _load_input(args)
    v = _variant(args)
    op = operator_for(w, v.kind, storage=args.storage)
    scores = similarity_row(op, v, args.query)
    order = evaluate.rank_neighbors(scores)[: args.top]
    _emit(args, ["index\tscore"] + [f"{j}\t{scores[j]:.17g}" for j in order])
    return 0


def _gd_variant(name, args):
    key = name.strip().lower()
    if not key.startswith("gd") or (args.variant is None and args.k is None):
        return None
    order = args.k or (int(key[2:]) if key[2:] else 1)
    return Variant(args.variant or evaluate.DEFAULT_VARIANT_KIND, order)


def cmd_errcurve(args):
    ds, w, labels = _load_input(args)
    if labels is None:
        raise DataError("errcurve needs labels (--data, --label-col or --label-file)")
    data = ds if ds is not None else (w, labels)
    grid = evaluate.default_grid(args.grid)
    if args.summary:
        grid = np.unique(np.concatenate([grid, np.round(args.summary, 12)]))
    curves = []
    if args.sweep_orders:
        kind = args.variant or evaluate.DEFAULT_VARIANT_KIND
        curves = evaluate.sweep_orders(data, kind, args.sweep_orders, grid, storage=args.storage)
    else:
        for name in args.measure.split(","):
            curves.append(evaluate.error_curve(data, name, _gd_variant(name, args), grid,
                                               storage=args.storage))
    if args.optimal:
        curves.append(evaluate.optimal_curve(labels, grid))

    summary_lines = []
    for c in curves:
        if args.summary:
            vals = " ".join(f"{c.at(f):.4f}" for f in args.summary)
            summary_lines.append(f"{c.measure}\t{vals}")
    if args.out:
        out = Path(args.out)
        for c in curves:
            path = out if len(curves) == 1 else out.with_name(f"{out.stem}.{c.measure}{out.suffix}")
            evaluate.write_curve(path, c, _header(args), args.summary)
    else:
        for c in curves:
            lines = [f"measure={c.measure}", "f\tE", "0\t0"]
            lines += [f"{f:.6g}\t{e:.12g}" for f, e in zip(c.grid, c.values)]
            _emit(args, lines)
    if summary_lines:
        head = "measure\t" + "\t".join(f"E({f:g})" for f in args.summary)
        sys.stdout.write("\n".join([head] + summary_lines) + "\n")
    return 0


def cmd_audit(args):
    _, w, _ = _load_input(args)
    report = audit_mod.audit(w, _variant(args), cap=args.cap, sample=args.sample, seed=args.seed)
    _emit(args, report.format().rstrip("\n").split("\n"))
    return 0


def cmd_oracle(args):
    _, w, _ = _load_input(args)
    est = oracle.simulate(w, args.start, args.k, args.walks, args.seed)
    exact = forward_row(operator_for(w, "forward", storage=args.storage), args.start, args.k)
    z_all = np.abs(est.estimate - exact.scores) / np.where(
        exact.scores * (1 - exact.scores) > 0,
        np.sqrt(exact.scores * (1 - exact.scores) / est.num_walks), np.inf)
    lines = ["object\testimate\texact\tz"]
    for j in range(w.n):
        lines.append(f"{j}\t{est.estimate[j]:.17g}\t{exact.scores[j]:.17g}\t{z_all[j]:.6g}")
    lines.append(f"max_z={oracle.compare(est, exact):.6g}")
    _emit(args, lines)
    return 0


def cmd_bench(args):
    backends = [args.backend] if args.backend else None
    rows, exps = bench_mod.run(sizes=args.sizes, per_row=args.per_row, k=args.k,
                               queries=args.queries, repeats=args.repeats, seed=args.seed,
                               backends=backends)
    _emit(args, bench_mod.format_report(rows, exps).rstrip("\n").split("\n"))
    return 0


# --------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="gdsim", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version",
                        version=f"gdsim {__version__} ({_accel.backend_name()} kernels)")
    parser.add_argument("--threads", type=_positive_int, default=None,
                        help="worker threads (default: GDSIM_THREADS or CPU count)")
    parser.add_argument("--list-measures", action="store_true", help="print the measure registry")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("encode", help="one-hot encode a labeled table into a triplet file")
    _add_input(p)
    p.add_argument("--out", help="triplet output path (default stdout)")
    p.add_argument("--labels-out", help="write one label per line here")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("info", help="matrix statistics")
    _add_input(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_info)

    def add_variant(p, default="forward"):
        p.add_argument("--variant", choices=("forward", "reversed", "normalized"), default=default)
        p.add_argument("--k", type=_positive_int, default=1, help="diffusion order (rounds)")

    p = sub.add_parser("similar", help="top-T most similar objects to a query")
    _add_input(p)
    add_variant(p)
    p.add_argument("--query", type=int, required=True)
    p.add_argument("--top", type=_positive_int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_similar)

    p = sub.add_parser("errcurve", help="nearest-neighbour error curves")
    _add_input(p, labels=True)
    p.add_argument("--measure", default="gd", help="comma-separated measure names (see --list-measures)")
    p.add_argument("--variant", choices=("forward", "reversed", "normalized"), default=None,
                   help="diffusion kind for gd measures (default reversed)")
    p.add_argument("--k", type=_positive_int, default=None, help="diffusion order for gd")
    p.add_argument("--sweep-orders", type=_positive_int, default=None, metavar="KMAX",
                   help="one gd curve per order 1..KMAX")
    p.add_argument("--grid", type=_positive_int, default=100, help="grid resolution N (f = j/N)")
    p.add_argument("--summary", type=_fractions, default=None, help="e.g. 0.01,0.02,0.05")
    p.add_argument("--optimal", action="store_true", help="also emit the optimal curve")
    p.add_argument("--out", help="output path; one file per measure when several")
    p.set_defaults(func=cmd_errcurve)

    p = sub.add_parser("audit", help="metric-property audit of a diffusion distance")
    _add_input(p)
    add_variant(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sample", type=_positive_int, default=None,
                   help="sample this many triples instead of the exhaustive scan")
    p.add_argument("--cap", type=_positive_int, default=audit_mod.AUDIT_CAP)
    p.add_argument("--out")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("oracle", help="Monte-Carlo walk estimate vs exact forward row")
    _add_input(p)
    p.add_argument("--start", type=int, required=True)
    p.add_argument("--k", type=_positive_int, default=1)
    p.add_argument("--walks", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="per-query timing across doubling n")
    p.add_argument("--sizes", type=lambda t: [int(x) for x in t.split(",")],
                   default=list(bench_mod.DEFAULT_SIZES))
    p.add_argument("--per-row", type=_positive_int, default=8)
    p.add_argument("--k", type=_positive_int, default=2)
    p.add_argument("--queries", type=_positive_int, default=64)
    p.add_argument("--repeats", type=_positive_int, default=7)
    p.add_argument("--backend", choices=("numba", "numpy"), default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list_measures:
        for name, info in baselines.MEASURES.items():
            orient = "higher-is-similar" if info.higher_is_similar else "lower-is-similar"
            print(f"{name}\t{info.family}\t{orient}\t{info.summary}")
        print("gd\tdiffusion\thigher-is-similar\tgraph diffusion (--variant, --k; gdK = order K)")
        return 0
    if args.command is None:
        parser.error("a subcommand is required (or --list-measures)")
    parallel.set_threads(args.threads)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except (ValueError, IndexError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"gdsim: error: {msg}", file=sys.stderr)
        return 1
    finally:
        parallel.set_threads(None)


if __name__ == "__main__":
    sys.exit(main())
