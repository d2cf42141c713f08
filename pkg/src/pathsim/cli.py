"""``pathsim`` command line: generate, build, bfs, cc, bench, verify.

Exit codes: 0 success, 1 other simulator error, 2 usage error,
3 context exhaustion, 4 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import algos, oracles
from .errors import ContextExhaustion, PathsimError
from .graph import load_graph
from .machine import resolve_config
from .memsys import SimMemory
from .queries import QueryEngine, csv_rows, format_csv, format_json, make_mix
from .rmat import RmatParams, canonicalize, generate_edges, read_edges, write_edges
from .timing import job_budget_per_node, standalone_time

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_EXHAUSTED, EXIT_VERIFY = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _machine(args):
    return resolve_config(args.machine, args.set or ())


def _load(args):
    cfg = _machine(args)
    mem = SimMemory(cfg)
    return cfg, mem, load_graph(args.graph, mem)


def _dump(prefix, name, arr):
    path = Path(f"{prefix}.{name}.bin")
    path.write_bytes(np.asarray(arr, dtype="<i8").tobytes())
    return path


def _summary(lines: dict) -> str:
    return "".join(f"{k} = {v}\n" for k, v in lines.items())


def cmd_generate(args, out):
    if not args.out:
        raise UsageError("generate needs --out")
    p = RmatParams(args.scale, args.edgefactor, args.a, args.b, args.c, args.d, args.seed, not args.no_scramble)
    edges = generate_edges(p)
    if args.canonical:
        edges = canonicalize(edges)
    write_edges(args.out, edges, p.nvertices, p, canonical=args.canonical)
    out.write(_summary({"vertices": p.nvertices, "edges": len(edges), "canonical": int(args.canonical),
                        "seed": p.seed, "out": args.out}))


def cmd_build(args, out):
    cfg, mem, g = _load(args)
    if args.out:
        edges, n = read_edges(args.graph)
        write_edges(args.out, canonicalize(edges), n, canonical=True)
    per_node = [int(mem.local_count(h).sum()) if len(g.indices) else 0 for h in g.edge_h]
    out.write(_summary({
        "vertices": g.nvertices,
        "undirected_edges": g.nedges // 2,
        "directed_edges": g.nedges,
        "nodes": cfg.nodes,
        "edge_words_per_node": " ".join(map(str, per_node)),
        "max_degree": int(g.degrees().max()),
        "isolated": int((g.degrees() == 0).sum()),
    }))


def _run_summary(cfg, args, result):
    b = job_budget_per_node(cfg, args.job_contexts or cfg.default_job_contexts())
    cycles = standalone_time(result.phases, b, cfg)
    t = result.counters.totals()
    return {"simulated_cycles": f"{cycles:.0f}", "simulated_s": f"{cycles / cfg.clock_hz:.9g}",
            "migrations": t["migrations"], "remote_ops": t["remote_ops"],
            "local_reads": t["local_reads"], "local_writes": t["local_writes"]}


def cmd_bfs(args, out):
    cfg, mem, g = _load(args)
    r = algos.bfs(g, args.source, mem)
    info = {"source": r.source, "levels_count": r.levels_count, "reached": int(r.reached().sum())}
    info.update(_run_summary(cfg, args, r))
    text = _summary(info)
    if args.out:
        _dump(args.out, "level", r.level)
        _dump(args.out, "parent", r.parent)
        Path(f"{args.out}.txt").write_text(text)
    out.write(text)


def cmd_cc(args, out):
    cfg, mem, g = _load(args)
    r = algos.connected_components(g, mem, max_iter=args.max_iter)
    info = {"components": r.ncomponents(), "iterations": r.iterations, "converged": int(r.converged)}
    info.update(_run_summary(cfg, args, r))
    text = _summary(info)
    if args.out:
        _dump(args.out, "labels", r.labels)
        Path(f"{args.out}.txt").write_text(text)
    out.write(text)
    return EXIT_OK if r.converged else EXIT_ERROR


def _parse_counts(text):
    try:
        counts = [int(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--queries expects integers, got {text!r}") from None
    if not counts or any(c < 1 for c in counts):
        raise UsageError("--queries must be >= 1")
    return counts


def cmd_bench(args, out):
    counts = _parse_counts(args.queries)
    if not 0.0 <= args.mix_bfs <= 1.0:
        raise UsageError("--mix-bfs must lie in [0, 1]")
    cfg, mem, g = _load(args)
    engine = QueryEngine(g, mem, job_contexts=args.job_contexts)
    candidates = np.flatnonzero(g.degrees() > 0)
    if len(candidates) == 0:
        candidates = np.arange(g.nvertices)
    modes = ["seq", "conc"] if args.mode == "both" else [args.mode]
    rows, reports = [], []
    for k in counts:
        jobs = make_mix(k, args.mix_bfs, args.seed, g.nvertices, candidates)
        done = {m: engine.run(jobs, m, wallclock=args.wallclock) for m in modes}
        reports.extend(done.values())
        rows.extend(csv_rows(done.get("seq"), done.get("conc")))
    header = f"pathsim bench seed={args.seed} nodes={cfg.nodes} graph={Path(args.graph).name} mix_bfs={args.mix_bfs}"
    text = format_csv(rows, header)
    if args.csv:
        Path(args.csv).write_text(text)
    else:
        out.write(text)
    if args.json:
        meta = {"seed": args.seed, "graph": str(args.graph), "queries": counts, "mode": args.mode,
                "mix_bfs": args.mix_bfs, "job_contexts": engine.job_contexts, "machine": cfg.to_dict()}
        Path(args.json).write_text(format_json(meta, reports))


def cmd_verify(args, out):
    cfg, mem, g = _load(args)
    edges, n = read_edges(args.graph)
    edges = canonicalize(edges)
    failures = []
    if args.labels:
        labels = np.frombuffer(Path(args.labels).read_bytes(), dtype="<i8")
        source = "file"
    else:
        r = algos.connected_components(g, mem)
        labels = r.labels
        source = "kernel"
        if not r.converged:
            failures.append("cc: did not converge")
    problems = oracles.check_cc_labels(edges, n, labels)
    out.write(f"cc[{source}] vs union-find: {'PASS' if not problems else 'FAIL'}\n")
    failures += [f"cc: {p}" for p in problems]
    if not args.labels:
        adj = oracles.adjacency_lists(edges, n)
        rng = np.random.default_rng(args.seed)
        pool = np.flatnonzero(g.degrees() > 0)
        pool = pool if len(pool) else np.arange(n)
        for s in rng.choice(pool, size=min(args.sources, len(pool)), replace=False):
            r = algos.bfs(g, int(s), mem)
            problems = oracles.check_bfs(adj, int(s), r.level, r.parent)
            out.write(f"bfs[{int(s)}] vs fifo: {'PASS' if not problems else 'FAIL'}\n")
            failures += [f"bfs {int(s)}: {p}" for p in problems]
    for f in failures:
        out.write(f"  {f}\n")
    out.write("verify: PASS\n" if not failures else "verify: FAIL\n")
    return EXIT_OK if not failures else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--machine", help="key = value machine file (falls back to $PATHSIM_MACHINE)")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one machine key")

    parser = argparse.ArgumentParser(prog="pathsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="write an R-MAT edge file")
    p.add_argument("--scale", type=int, required=True)
    p.add_argument("--edgefactor", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--a", type=float, default=0.57)
    p.add_argument("--b", type=float, default=0.19)
    p.add_argument("--c", type=float, default=0.19)
    p.add_argument("--d", type=float, default=0.05)
    p.add_argument("--no-scramble", action="store_true", help="keep raw R-MAT vertex ids")
    p.add_argument("--canonical", action="store_true", help="dedup and symmetrize before writing")
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("build", parents=[common], help="load a graph into simulated memory and describe it")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", help="also write the canonical edge file here")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("bfs", parents=[common], help="one breadth-first search")
    p.add_argument("--graph", required=True)
    p.add_argument("--source", type=int, required=True)
    p.add_argument("--job-contexts", type=int)
    p.add_argument("--out", help="prefix for .level.bin, .parent.bin and .txt")
    p.set_defaults(func=cmd_bfs)

    p = sub.add_parser("cc", parents=[common], help="connected components")
    p.add_argument("--graph", required=True)
    p.add_argument("--max-iter", type=int, default=algos.DEFAULT_MAX_ITER)
    p.add_argument("--job-contexts", type=int)
    p.add_argument("--out", help="prefix for .labels.bin and .txt")
    p.set_defaults(func=cmd_cc)

    p = sub.add_parser("bench", parents=[common], help="sequential vs concurrent query sets")
    p.add_argument("--graph", required=True)
    p.add_argument("--queries", required=True, help="job count, or a comma list for a sweep")
    p.add_argument("--mode", choices=["seq", "conc", "both"], default="both")
    p.add_argument("--mix-bfs", type=float, default=1.0, help="fraction of BFS jobs; the rest are CC")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--job-contexts", type=int)
    p.add_argument("--csv", help="write CSV here instead of stdout")
    p.add_argument("--json", help="per-job JSON report")
    p.add_argument("--wallclock", action="store_true", help="also record host elapsed time (JSON only)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", parents=[common], help="check kernels against reference oracles")
    p.add_argument("--graph", required=True)
    p.add_argument("--sources", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--labels", help="verify this dumped label array instead of running CC")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        code = args.func(args, out)
    except UsageError as exc:
        sys.stderr.write(f"pathsim {args.command}: {exc}\n")
        return EXIT_USAGE
    except ContextExhaustion as exc:
        sys.stderr.write(f"pathsim {args.command}: context exhaustion: {exc}\n")
        return EXIT_EXHAUSTED
    except (PathsimError, OSError) as exc:
        sys.stderr.write(f"pathsim {args.command}: {exc}\n")
        return EXIT_ERROR
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
