"""``b2`` command line: compile, scan, stats, bench and explain."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import artifact
from .assignment import ResolveSet, render_resolve_set
from .bench import format_table, run_bench
from .errors import (ArtifactError, Bouma2Error, EmptyPatternSet, MissingStats,
                     PatternFileError, PatternTooShort, ZeroPairStats)
from .matcher import match, memory_report
from .optimizer import DEFAULT_TIME_LIMIT
from .patterns import read_pattern_file, validate_patterns
from .pipeline import compile_patterns
from .stats import CostFunction, StatsMode, TraceStats, collect_stats
from .trie import graph_lines, render_trie

log = logging.getLogger("bouma2")

COST_KINDS = {
    "min": "unit",
    "rare-strings": "rare_in_strings",
    "rare-input": "rare_in_input",
}
STATS_MODES = {"even": StatsMode.EVEN_ALIGNED, "sliding": StatsMode.SLIDING}

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SHORT = 2
EXIT_SOLVER = 3


def _setup_logging() -> None:
    level = os.environ.get("B2_LOG", "").strip().lower()
    if level in ("debug", "info"):
        logging.basicConfig(stream=sys.stderr, level=getattr(logging, level.upper()),
                            format="%(levelname)s %(name)s: %(message)s")


def _fail(msg: str, code: int) -> int:
    print(f"b2: error: {msg}", file=sys.stderr)
    return code


def _read_bytes(path) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def _load_patterns(path):
    return validate_patterns(read_pattern_file(path))


# -- subcommands ---------------------------------------------------------------

def cmd_compile(args) -> int:
    try:
        ps = _load_patterns(args.patterns)
        stats = TraceStats.load(args.stats) if args.stats else None
        cf = CostFunction(COST_KINDS[args.cost], stats)
    except PatternTooShort as e:
        return _fail(str(e), EXIT_SHORT)
    except (OSError, ValueError, PatternFileError, EmptyPatternSet, MissingStats) as e:
        return _fail(str(e), EXIT_INPUT)
    try:
        cm = compile_patterns(ps, cf, solver=args.solver, time_limit=args.time_limit)
    except (MissingStats, ZeroPairStats) as e:
        return _fail(str(e), EXIT_INPUT)
    except Exception as e:  # solver or builder failure
        log.debug("compile failed", exc_info=True)
        return _fail(f"compilation failed: {e}", EXIT_SOLVER)
    try:
        artifact.save(cm, args.output)
    except OSError as e:
        return _fail(str(e), EXIT_INPUT)

    mem = memory_report(cm)
    print(f"patterns: {len(ps)} unique of {ps.input_count}")
    print(f"motifs: {cm.meta['selected_motifs']} ({len(cm.motifs)} with tries)")
    print(f"objective: {float(cm.meta['objective']):.6g}")
    print(f"solver: {cm.meta['solver']} status={cm.meta['status']}")
    for t in cm.tries:
        print(f"trie {t.motif.hex()} entries={len(t.entries)} nodes={t.node_count} "
              f"depth={t.max_depth} bound={t.depth_bound}")
    print(f"memory: dispatch={mem['dispatch_bytes']} tries={mem['trie_bytes']} "
          f"total={mem['total_bytes']} paths={mem['total_paths']}")
    print(f"wrote {args.output}")
    return EXIT_OK


def cmd_scan(args) -> int:
    try:
        cm = artifact.load(args.artifact)
        data = _read_bytes(args.input)
    except (OSError, ArtifactError) as e:
        return _fail(str(e), EXIT_INPUT)
    reports, counters = match(cm, data, threads=args.threads)
    out = sys.stdout
    for r in reports:
        word = cm.patterns.by_id(cm.patterns.canonical(r.pattern_id)).data
        if args.format == "json":
            out.write(json.dumps({"start": r.start, "len": r.end - r.start,
                                  "pattern_id": r.pattern_id, "pattern_hex": word.hex()}) + "\n")
        else:
            out.write(f"{r.start}\t{r.end - r.start}\t{r.pattern_id}\t{word.hex()}\n")
    if args.counters:
        out.write(json.dumps({"counters": counters.as_dict()}, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_stats(args) -> int:
    try:
        data = _read_bytes(args.input)
        stats = collect_stats(data, STATS_MODES[args.mode])
        stats.save(args.output)
    except OSError as e:
        return _fail(str(e), EXIT_INPUT)
    print(f"pairs: {stats.total_pairs} distinct: {len(stats.counts)} mode: {stats.mode.value}")
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        ps = _load_patterns(args.patterns)
        data = _read_bytes(args.input)
    except PatternTooShort as e:
        return _fail(str(e), EXIT_SHORT)
    except (OSError, PatternFileError, EmptyPatternSet) as e:
        return _fail(str(e), EXIT_INPUT)
    try:
        rows = run_bench(ps, data, baseline=args.baseline, repeat=args.repeat,
                         threads=args.threads, solver=args.solver, time_limit=args.time_limit)
    except ZeroPairStats as e:
        return _fail(str(e), EXIT_INPUT)
    except Bouma2Error as e:
        return _fail(str(e), EXIT_SOLVER)
    if args.json:
        for r in rows:
            print(json.dumps(r.as_dict(), sort_keys=True))
    else:
        print(format_table(rows))
    return EXIT_OK


def _resolve_set(trie) -> ResolveSet:
    return ResolveSet(trie.motif, tuple(trie.entries))


def cmd_explain(args) -> int:
    try:
        cm = artifact.load(args.artifact)
    except (OSError, ArtifactError) as e:
        return _fail(str(e), EXIT_INPUT)
    tries = cm.tries
    if args.trie:
        try:
            motif = bytes.fromhex(args.trie)
        except ValueError:
            return _fail(f"--trie expects 4 hex digits, got {args.trie!r}", EXIT_INPUT)
        t = cm.trie_for(motif) if len(motif) == 2 else None
        if t is None:
            return _fail(f"no trie for motif {args.trie}", EXIT_INPUT)
        tries = (t,)
    for k, t in enumerate(tries):
        if k:
            print()
        print(f"resolve-set {t.motif.hex()} ({len(t.entries)} entries)")
        print(render_resolve_set(_resolve_set(t), cm.patterns))
        print(render_trie(t))
    if args.graph:
        try:
            with open(args.graph, "w", encoding="utf-8") as fh:
                for t in tries:
                    fh.write(f"trie {t.motif.hex()}\n")
                    fh.writelines(line + "\n" for line in graph_lines(t))
        except OSError as e:
            return _fail(str(e), EXIT_INPUT)
    return EXIT_OK


# -- argument parsing ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="b2", description="Bouma2 multiple string matcher")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a pattern file into an artifact")
    p.add_argument("--patterns", required=True)
    p.add_argument("--cost", choices=sorted(COST_KINDS), default="min")
    p.add_argument("--stats")
    p.add_argument("--solver", choices=["exact", "greedy"], default="exact")
    p.add_argument("--time-limit", type=float, default=DEFAULT_TIME_LIMIT)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("scan", help="match an input file against an artifact")
    p.add_argument("--artifact", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--counters", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("stats", help="collect byte-pair statistics")
    p.add_argument("--input", required=True)
    p.add_argument("--mode", choices=sorted(STATS_MODES), default="even")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("bench", help="throughput of each cost variant against a baseline")
    p.add_argument("--patterns", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--baseline", choices=["naive", "ac"], default="ac")
    p.add_argument("--repeat", type=int, default=1)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--solver", choices=["exact", "greedy"], default="exact")
    p.add_argument("--time-limit", type=float, default=DEFAULT_TIME_LIMIT)
    p.add_argument("--json", action="store_true", help="one JSON object per row")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("explain", help="print resolve-sets and tries of an artifact")
    p.add_argument("--artifact", required=True)
    p.add_argument("--trie", metavar="MOTIFHEX")
    p.add_argument("--graph", metavar="FILE", help="write node/edge records here")
    p.set_defaults(func=cmd_explain)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
