"""Throughput benchmark harness and synthetic workload generators."""

from __future__ import annotations

import statistics
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from enum import Enum

from .matcher import CompiledMatcher, MatchCounters, match, memory_report
from .oracle import ACMatcher, naive_match
from .patterns import PatternSet
from .pipeline import compile_patterns
from .stats import CostFunction, CostKind, StatsMode, TraceStats, collect_stats

VARIANTS = {
    "min": CostKind.UNIT,
    "rare-strings": CostKind.RARE_IN_STRINGS,
    "rare-input": CostKind.RARE_IN_INPUT,
}


@dataclass
class BenchResult:
    name: str
    bytes_consumed: int
    elapsed: float
    matches: int
    memory_bytes: int
    packed_bytes: int = 0
    counters: MatchCounters | None = None
    motifs: int = 0
    estimated_probability: float | None = None
    baseline_throughput: float | None = None
    timings: list[float] = field(default_factory=list)

    @property
    def throughput(self) -> float:
        """Megabits per second."""
        if self.elapsed <= 0:
            return float("inf")
        return self.bytes_consumed * 8 / self.elapsed / 1e6

    @property
    def actual_probability(self) -> float | None:
        c = self.counters
        if c is None or c.fast_path_probes == 0:
            return None
        return c.harvest_count / c.fast_path_probes

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "bytes_consumed": self.bytes_consumed,
            "elapsed_s": self.elapsed,
            "throughput_mbps": self.throughput,
            "matches": self.matches,
            "memory_bytes": self.memory_bytes,
            "packed_bytes": self.packed_bytes,
            "motifs": self.motifs,
            "prob_est": self.estimated_probability,
            "prob_actual": self.actual_probability,
            "baseline_throughput_mbps": self.baseline_throughput,
            "counters": self.counters.as_dict() if self.counters else None,
        }


def deep_sizeof(*roots) -> int:
    """Bytes held by the objects reachable from ``roots``, each counted once.

    Follows dicts, sequences, sets, ``__dict__`` and ``__slots__``; numpy
    arrays count their buffer.  Enum members and classes are shared
    interpreter state and are skipped.
    """
    seen: set[int] = set()
    total = 0
    stack = list(roots)
    while stack:
        obj = stack.pop()
        if obj is None or id(obj) in seen or isinstance(obj, (type, Enum)):
            continue
        seen.add(id(obj))
        if isinstance(obj, np.ndarray):
            total += sys.getsizeof(obj) + (0 if obj.base is None and obj.flags.owndata else obj.nbytes)
            continue
        total += sys.getsizeof(obj)
        if isinstance(obj, dict):
            stack.extend(obj.keys())
            stack.extend(obj.values())
        elif isinstance(obj, (list, tuple, set, frozenset)):
            stack.extend(obj)
        elif isinstance(obj, (str, bytes, int, float)):
            pass
        else:
            if hasattr(obj, "__dict__"):
                stack.append(obj.__dict__)
            for cls in type(obj).__mro__:
                for name in getattr(cls, "__slots__", ()):
                    if hasattr(obj, name):
                        stack.append(getattr(obj, name))
    return total


def measured_memory(cm: CompiledMatcher) -> int:
    """In-process bytes of the dispatch table plus every trie node."""
    return deep_sizeof(cm.dispatch, [t.root for t in cm.tries])


def measured_ac_memory(ac: ACMatcher) -> int:
    """In-process bytes of the goto, failure and output tables."""
    return deep_sizeof(ac.goto, ac.fail, ac.out)


def estimated_probability(cm: CompiledMatcher, stats: TraceStats) -> float:
    """Sum of per-pair occurrence probabilities over the motifs in use."""
    return sum(stats.probability(t) for t in cm.motifs)


def _timed(fn, repeat: int):
    times = []
    result = None
    for _ in range(max(1, repeat)):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return result, times


def bench_matcher(name: str, cm: CompiledMatcher, data: bytes, repeat: int = 1,
                  threads: int = 1, stats: TraceStats | None = None) -> BenchResult:
    (reports, counters), times = _timed(lambda: match(cm, data, threads=threads), repeat)
    return BenchResult(
        name, len(data), statistics.median(times), len(reports),
        measured_memory(cm), memory_report(cm)["total_bytes"], counters, len(cm.motifs),
        estimated_probability(cm, stats) if stats is not None else None,
        timings=times,
    )


def bench_baseline(kind: str, ps: PatternSet, data: bytes, repeat: int = 1) -> BenchResult:
    if kind == "ac":
        ac = ACMatcher(ps)
        reports, times = _timed(lambda: ac.match(data), repeat)
        mem, packed = measured_ac_memory(ac), ac.memory_bytes()
    elif kind == "naive":
        reports, times = _timed(lambda: naive_match(ps, data), repeat)
        mem = packed = ps.sz
    else:
        raise ValueError(f"unknown baseline {kind!r}")
    return BenchResult(kind, len(data), statistics.median(times), len(reports), mem, packed,
                       timings=times)


def run_bench(ps: PatternSet, data: bytes, baseline: str = "ac", repeat: int = 1,
              threads: int = 1, solver: str = "exact", time_limit: float | None = 30.0,
              variants=tuple(VARIANTS)) -> list[BenchResult]:
    """Compile each cost variant, scan ``data`` with each, then the baseline.

    Statistics for the input-driven variant come from the first third of the
    data; every row reports its estimate from the same statistics.
    """
    stats = collect_stats(data[: len(data) // 3], StatsMode.EVEN_ALIGNED)
    rows = []
    base = bench_baseline(baseline, ps, data, repeat)
    for name in variants:
        kind = VARIANTS[name]
        cf = CostFunction(kind, stats if kind is CostKind.RARE_IN_INPUT else None)
        cm = compile_patterns(ps, cf, solver=solver, time_limit=time_limit)
        row = bench_matcher(f"b2-{name}", cm, data, repeat, threads, stats)
        row.baseline_throughput = base.throughput
        rows.append(row)
    rows.append(base)
    return rows


def format_table(rows: list[BenchResult]) -> str:
    head = f"{'variant':<16}{'Mbit/s':>12}{'memory':>12}{'packed':>10}{'motifs':>8}{'matches':>10}" \
           f"{'prob est':>11}{'prob act':>11}{'vs base':>9}"
    lines = [head, "-" * len(head)]
    for r in rows:
        est = "" if r.estimated_probability is None else f"{r.estimated_probability:.5f}"
        act = "" if r.actual_probability is None else f"{r.actual_probability:.5f}"
        ratio = "" if r.baseline_throughput is None else f"{r.throughput / r.baseline_throughput:.2f}x"
        motifs = str(r.motifs) if r.motifs else ""
        lines.append(f"{r.name:<16}{r.throughput:>12.2f}{r.memory_bytes:>12}{r.packed_bytes:>10}{motifs:>8}"
                     f"{r.matches:>10}{est:>11}{act:>11}{ratio:>9}")
    return "\n".join(lines)


# -- synthetic workloads -------------------------------------------------------

def byte_weights(rng: np.random.Generator, skew: float = 1.1) -> np.ndarray:
    """Zipf-like byte distribution over a random permutation of the bytes."""
    ranks = np.arange(1, 257, dtype=float)
    w = ranks ** -skew
    w = w[rng.permutation(256)]
    return w / w.sum()


def synthetic_patterns(count: int, seed: int = 0, min_len: int = 3, max_len: int = 32,
                       weights: np.ndarray | None = None) -> list[bytes]:
    rng = np.random.default_rng(seed)
    if weights is None:
        weights = byte_weights(rng)
    out: list[bytes] = []
    seen = set()
    while len(out) < count:
        n = int(rng.integers(min_len, max_len + 1))
        w = rng.choice(256, size=n, p=weights).astype(np.uint8).tobytes()
        if w not in seen:
            seen.add(w)
            out.append(w)
    return out


def synthetic_corpus(size: int, patterns: list[bytes], seed: int = 0,
                     plant_every: int = 4096, weights: np.ndarray | None = None) -> bytes:
    """Stationary byte stream with pattern copies planted at random offsets."""
    rng = np.random.default_rng(seed)
    if weights is None:
        weights = byte_weights(rng)
    buf = bytearray(rng.choice(256, size=size, p=weights).astype(np.uint8).tobytes())
    if patterns and plant_every:
        for _ in range(size // plant_every):
            w = patterns[int(rng.integers(len(patterns)))]
            pos = int(rng.integers(0, max(1, size - len(w))))
            buf[pos:pos + len(w)] = w
    return bytes(buf[:size])


def synthetic_workload(n_patterns: int, size: int, seed: int = 0,
                       skew: float = 0.7) -> tuple[list[bytes], bytes]:
    """Patterns and corpus drawn from one shared byte distribution.

    With the default skew an input-tuned plan sees motif hits on a few
    percent of probes; raise it to stress the slow path.
    """
    weights = byte_weights(np.random.default_rng(seed), skew)
    pats = synthetic_patterns(n_patterns, seed + 1, weights=weights)
    return pats, synthetic_corpus(size, pats, seed + 2, weights=weights)
