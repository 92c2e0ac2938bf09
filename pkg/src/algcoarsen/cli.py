"""Command-line front end.

Exit status: 0 on success, 1 on usage errors, 2 on unreadable or invalid
input data.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import bench
from .algdist import DISTANCE_KINDS, NORMALIZE_MODES, RelaxParams, build_coupling_table, relax_test_vectors
from .coarsen import COUPLING_MODES, CoarsenParams, build_hierarchy
from .corpus import IRREGULAR, corpus_files, load_corpus_graph
from .graph import GraphError, WeightedGraph
from .io import FORMATS, format_bipartition, format_ordering, read_graph, serialize_graph, write_graph
from .solvers import multilevel_bisection, solve_ordering

log = logging.getLogger("algcoarsen")

EXIT_USAGE = 1
EXIT_DATA = 2
DEFAULT_BENCH_SEED = 42


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common() -> argparse.ArgumentParser:
    # SUPPRESS lets the flags appear before or after the subcommand
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master random seed")
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker processes for benchmarks")
    p.add_argument("--format", choices=FORMATS, default=argparse.SUPPRESS, help="input graph format (default: by extension)")
    p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
    return p


def _relax_flags(p: argparse.ArgumentParser, K=10, r=20) -> None:
    p.add_argument("--K", type=int, default=K, help="number of test vectors")
    p.add_argument("--r", type=int, default=r, help="relaxation sweeps")
    p.add_argument("--omega", type=float, default=0.5)
    p.add_argument("--kind", choices=DISTANCE_KINDS, default="max-norm")


def _coarsen_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=COUPLING_MODES, default="relaxation")
    p.add_argument("--caliber", type=int, default=1)
    p.add_argument("--levels", type=int, default=100, help="maximum number of coarsening steps")
    p.add_argument("--coarsest", type=int, default=8, help="stop once a level has at most this many nodes")
    _relax_flags(p)


def build_parser() -> Parser:
    common = _common()
    parser = Parser(prog="algcoarsen", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", parents=[common], help="convert between graph formats")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--to", choices=FORMATS, help="output format (default: by extension)")

    p = sub.add_parser("algdist", parents=[common], help="per-edge algebraic distances and couplings")
    p.add_argument("graph")
    _relax_flags(p, K=20, r=10)
    p.add_argument("--normalize", choices=NORMALIZE_MODES, default="zero-mean-unit-norm")
    p.add_argument("--vectors", action="store_true", help="emit the relaxed test vectors instead")
    p.add_argument("-o", "--output")

    p = sub.add_parser("coarsen", parents=[common], help="build and describe a coarsening hierarchy")
    p.add_argument("graph")
    _coarsen_flags(p)
    p.add_argument("--explain", action="store_true", help="per-level seed and rescue details")
    p.add_argument("--dump", metavar="DIR", help="write every level graph and interpolation matrix")

    p = sub.add_parser("solve", parents=[common], help="multilevel ordering or bisection")
    p.add_argument("problem", choices=sorted(bench.PROBLEMS))
    p.add_argument("graph")
    _coarsen_flags(p)
    p.add_argument("--alpha", type=float, default=0.03, help="bisection imbalance tolerance")
    p.add_argument("--post-sweeps", type=int, default=10)
    p.add_argument("--intermediate-sweeps", type=int, default=0)
    p.add_argument("-o", "--output", help="solution file (default: stdout)")

    p = sub.add_parser("bench", parents=[common], help="seeded experiments emitting CSV")
    bsub = p.add_subparsers(dest="experiment", required=True)
    for name in ("table1", "table2"):
        t = bsub.add_parser(name, parents=[common])
        t.add_argument("--runs", type=int, default=100)
        t.add_argument("--rows", type=int, default=33)
        t.add_argument("--cols", type=int, default=33)
        t.add_argument("--i-row", type=int, default=16)
        t.add_argument("--i-col", type=int, default=14)
        t.add_argument("--separation", type=int, default=5)
        t.add_argument("--kind", choices=DISTANCE_KINDS, default="max-norm")
        t.add_argument("--normalize", choices=NORMALIZE_MODES, default="none")
        t.add_argument("-o", "--output")
    t = bsub.add_parser("compare", parents=[common])
    t.add_argument("graphs", nargs="*", help="graph files (default: bundled irregular corpus)")
    t.add_argument("--corpus", choices=("irregular", "all"), default="irregular")
    t.add_argument("--problem", choices=sorted(bench.PROBLEMS), default="m2sp")
    t.add_argument("--caliber", type=int, nargs="+", default=[1])
    t.add_argument("--runs", type=int, default=100)
    t.add_argument("--baseline", choices=COUPLING_MODES, default="classical")
    t.add_argument("--candidate", choices=COUPLING_MODES, default="relaxation")
    t.add_argument("--K", type=int, default=10)
    t.add_argument("--r", type=int, default=20)
    t.add_argument("--alpha", type=float, default=0.03)
    t.add_argument("--post-sweeps", type=int, default=10)
    t.add_argument("--intermediate-sweeps", type=int, default=0)
    t.add_argument("-o", "--output")
    return parser


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(args) -> WeightedGraph:
    return read_graph(args.graph, getattr(args, "format", None))


def _params(args, seed: int) -> CoarsenParams:
    relax = RelaxParams(K=args.K, r=args.r, omega=args.omega, seed=seed)
    return CoarsenParams(
        caliber=args.caliber,
        coupling_mode=args.mode,
        relax=relax,
        distance_kind=args.kind,
        max_levels=args.levels,
        coarsest_size=args.coarsest,
    )


def cmd_convert(args) -> int:
    g = read_graph(args.input, getattr(args, "format", None))
    write_graph(g, args.output, args.to)
    return 0


def cmd_algdist(args) -> int:
    g = _load(args)
    p = RelaxParams(K=args.K, r=args.r, omega=args.omega, seed=args.seed, normalize=args.normalize)
    tv = relax_test_vectors(g, p)
    text = tv.to_csv() if args.vectors else build_coupling_table(g, tv, args.kind).to_csv()
    _emit(text, args.output)
    return 0


def cmd_coarsen(args) -> int:
    g = _load(args)
    h = build_hierarchy(g, _params(args, args.seed))
    out = []
    for k, lv in enumerate(h.levels):
        line = f"level {k}: n={lv.graph.n} edges={lv.graph.num_edges} volume={lv.graph.volumes.sum():.6g}"
        if args.explain and lv.interp is not None:
            line += f" seeds={lv.interp.seeds.size} rescued={len(lv.interp.rescued)}"
        out.append(line)
    out.append(f"stop: {h.stop_reason}")
    if args.explain:
        out.extend(h.events)
    sys.stdout.write("\n".join(out) + "\n")
    if args.dump:
        os.makedirs(args.dump, exist_ok=True)
        for k, lv in enumerate(h.levels):
            with open(os.path.join(args.dump, f"level{k}.txt"), "w", encoding="utf-8", newline="\n") as fh:
                fh.write(serialize_graph(lv.graph, "edge-list"))
            if lv.interp is None:
                continue
            P = lv.interp.P.tocoo()
            rows = ["fine,coarse,value"] + [f"{a},{b},{x:.17g}" for a, b, x in zip(P.row, P.col, P.data)]
            with open(os.path.join(args.dump, f"P{k}.csv"), "w", encoding="utf-8", newline="\n") as fh:
                fh.write("\n".join(rows) + "\n")
    return 0


def cmd_solve(args) -> int:
    g = _load(args)
    params = _params(args, args.seed)
    if args.problem == "bisect":
        part, before, after = multilevel_bisection(g, args.alpha, params)
        text = format_bipartition(part.side, after)
    else:
        res = solve_ordering(g, bench.PROBLEMS[args.problem], params, args.post_sweeps, args.intermediate_sweeps)
        before, after = res.cost_before_post, res.cost_after_post
        text = format_ordering(res.arrangement.order, after)
    summary = f"# before_post {before:.6g}\n# after_post {after:.6g}\n"
    if args.output:
        _emit(text, args.output)
        sys.stdout.write(summary)
    else:
        sys.stdout.write(text + summary)
    return 0


def _table_config(args) -> bench.Table1Config:
    return bench.Table1Config(
        mesh_rows=args.rows,
        mesh_cols=args.cols,
        row=args.i_row,
        col=args.i_col,
        separation=args.separation,
        runs=args.runs,
        seed=args.seed,
        kind=args.kind,
        normalize=args.normalize,
    )


def cmd_bench(args) -> int:
    if args.experiment in ("table1", "table2"):
        try:
            cfg = _table_config(args)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        if args.experiment == "table1":
            text = bench.table1_csv(bench.bench_table1(cfg, args.threads))
        else:
            text = bench.table2_csv(bench.bench_table2(cfg, args.threads))
        _emit(text, args.output)
        return 0

    if args.graphs:
        fmt = getattr(args, "format", None)
        graphs = {
            os.path.splitext(os.path.basename(path))[0]: (lambda path=path: read_graph(path, fmt))
            for path in args.graphs
        }
    else:
        names = IRREGULAR if args.corpus == "irregular" else tuple(corpus_files())
        graphs = {name: (lambda name=name: load_corpus_graph(name)) for name in names}
    cfg = bench.CompareConfig(
        problem=args.problem,
        calibers=tuple(args.caliber),
        runs=args.runs,
        seed=args.seed,
        baseline=args.baseline,
        candidate=args.candidate,
        K=args.K,
        r=args.r,
        alpha=args.alpha,
        post_sweeps=args.post_sweeps,
        intermediate_sweeps=args.intermediate_sweeps,
    )
    rows, failures = bench.bench_compare(graphs, cfg, args.threads)
    _emit(bench.compare_csv(rows), args.output)
    for name, msg in failures:
        sys.stderr.write(f"failed: {name}: {msg}\n")
    return EXIT_DATA if failures and not rows else 0


COMMANDS = {
    "convert": cmd_convert,
    "algdist": cmd_algdist,
    "coarsen": cmd_coarsen,
    "solve": cmd_solve,
    "bench": cmd_bench,
}


def _configure_logging(level: int) -> None:
    # own handler bound to the current stderr; replaced on every call
    for h in list(log.handlers):
        if getattr(h, "_cli", False):
            log.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    handler._cli = True
    log.addHandler(handler)
    log.setLevel(level)
    log.propagate = False


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    default_seed = DEFAULT_BENCH_SEED if args.command == "bench" else 0
    args.seed = getattr(args, "seed", default_seed)
    args.threads = max(1, getattr(args, "threads", 1))
    verbose = getattr(args, "verbose", False) or getattr(args, "explain", False)
    _configure_logging(logging.INFO if verbose else logging.WARNING)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"algcoarsen: error: {exc}\n")
        return EXIT_USAGE
    except (GraphError, OSError, ValueError) as exc:
        sys.stderr.write(f"algcoarsen: {exc}\n")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
