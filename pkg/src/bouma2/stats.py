"""2-gram occurrence statistics and motif cost functions."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np

from .errors import MissingStats, ZeroPairStats
from .patterns import PatternSet, code_trace, occ, trace_code, trace_offsets

STATS_VERSION = 1


class StatsMode(str, Enum):
    EVEN_ALIGNED = "even_aligned"
    SLIDING = "sliding"


def _pair_codes(data: bytes, mode: StatsMode) -> np.ndarray:
    a = np.frombuffer(data, dtype=np.uint8)
    if mode is StatsMode.EVEN_ALIGNED:
        m = len(a) & ~1
        return np.frombuffer(data[:m], dtype=">u2")
    if len(a) < 2:
        return np.empty(0, dtype=np.uint16)
    return (a[:-1].astype(np.uint16) << 8) | a[1:]


@dataclass(frozen=True)
class TraceStats:
    counts: dict[bytes, int]
    total_pairs: int
    mode: StatsMode = StatsMode.EVEN_ALIGNED

    def probability(self, t: bytes, smoothing: bool = False) -> float:
        if smoothing:
            return (self.counts.get(t, 0) + 1) / (self.total_pairs + 65536)
        if self.total_pairs == 0:
            raise ZeroPairStats()
        return self.counts.get(t, 0) / self.total_pairs

    def merge(self, other: TraceStats) -> TraceStats:
        if other.mode is not self.mode:
            raise ValueError("cannot merge statistics collected in different modes")
        counts = dict(self.counts)
        for t, c in other.counts.items():
            counts[t] = counts.get(t, 0) + c
        return TraceStats(counts, self.total_pairs + other.total_pairs, self.mode)

    def to_json(self) -> str:
        counts = {
            f"{trace_code(t):04x}": c for t, c in sorted(self.counts.items()) if c
        }
        doc = {
            "version": STATS_VERSION,
            "mode": self.mode.value,
            "total_pairs": self.total_pairs,
            "counts": counts,
        }
        return json.dumps(doc, indent=1, sort_keys=False)

    @classmethod
    def from_json(cls, text: str) -> TraceStats:
        doc = json.loads(text)
        if doc.get("version") != STATS_VERSION:
            raise ValueError(f"unsupported stats version {doc.get('version')!r}")
        counts = {}
        for key, c in doc["counts"].items():
            if len(key) != 4:
                raise ValueError(f"bad trace key {key!r}")
            counts[code_trace(int(key, 16))] = int(c)
        return cls(counts, int(doc["total_pairs"]), StatsMode(doc["mode"]))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def load(cls, path) -> TraceStats:
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def collect_stats(data: bytes, mode: StatsMode | str = StatsMode.EVEN_ALIGNED) -> TraceStats:
    mode = StatsMode(mode)
    codes = _pair_codes(bytes(data), mode)
    hist = np.bincount(codes, minlength=65536)
    nz = np.flatnonzero(hist)
    counts = {code_trace(int(c)): int(hist[c]) for c in nz}
    return TraceStats(counts, int(len(codes)), mode)


def count_word(data: bytes, word: bytes) -> int:
    """Overlapping occurrence count of ``word`` in ``data``."""
    n = 0
    i = data.find(word)
    while i >= 0:
        n += 1
        i = data.find(word, i + 1)
    return n


class CostKind(str, Enum):
    UNIT = "unit"
    RARE_IN_STRINGS = "rare_in_strings"
    RARE_IN_INPUT = "rare_in_input"
    CONDITIONAL_FP = "conditional_fp"


@dataclass(frozen=True)
class CostFunction:
    """Motif weight used by the motif-set optimiser.

    ``conditional_fp`` additionally needs ``word_counts`` (occurrences of each
    pattern in the sample) next to sliding-mode ``stats`` of the same sample;
    :meth:`conditional` builds both from one sample.
    """

    kind: CostKind = CostKind.UNIT
    stats: TraceStats | None = None
    smoothing: bool = False
    word_counts: Mapping[bytes, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", CostKind(self.kind))
        if self.kind in (CostKind.RARE_IN_INPUT, CostKind.CONDITIONAL_FP) and self.stats is None:
            raise MissingStats(self.kind.value)

    @classmethod
    def conditional(cls, sample: bytes, ps: PatternSet) -> CostFunction:
        stats = collect_stats(sample, StatsMode.SLIDING)
        words = {p.data: count_word(sample, p.data) for p in ps}
        return cls(CostKind.CONDITIONAL_FP, stats, word_counts=words)


def cost(cf: CostFunction, t: bytes, ps: PatternSet) -> float:
    kind = cf.kind
    if kind is CostKind.UNIT:
        return 1.0
    if kind is CostKind.RARE_IN_STRINGS:
        return float(sum(occ(p.data, t, l) for p in ps for l in range(len(p.data) - 1)))
    if cf.stats is None:
        raise MissingStats(kind.value)
    if kind is CostKind.RARE_IN_INPUT:
        return cf.stats.probability(t, cf.smoothing)
    # conditional_fp: -sum over words containing t of P(w | t)
    if cf.stats.total_pairs == 0:
        raise ZeroPairStats()
    t_count = cf.stats.counts.get(t, 0)
    total = 0.0
    for p in ps:
        if not trace_offsets(p.data, t):
            continue
        if t_count == 0:
            continue
        total += min(1.0, max(0.0, cf.word_counts.get(p.data, 0) / t_count))
    return -total


def cost_table(cf: CostFunction, ps: PatternSet, traces) -> dict[bytes, float]:
    """Cost of every trace in ``traces``; one pass over the patterns."""
    if cf.kind is CostKind.RARE_IN_STRINGS:
        counts: dict[bytes, int] = {}
        for p in ps:
            w = p.data
            for i in range(len(w) - 1):
                t = w[i:i + 2]
                counts[t] = counts.get(t, 0) + 1
        return {t: float(counts.get(t, 0)) for t in traces}
    if cf.kind is CostKind.CONDITIONAL_FP:
        if cf.stats.total_pairs == 0:
            raise ZeroPairStats()
        acc: dict[bytes, float] = {}
        for p in ps:
            w = p.data
            for t in {w[i:i + 2] for i in range(len(w) - 1)}:
                tc = cf.stats.counts.get(t, 0)
                if tc:
                    acc[t] = acc.get(t, 0.0) + min(1.0, cf.word_counts.get(w, 0) / tc)
        return {t: -acc.get(t, 0.0) for t in traces}
    return {t: cost(cf, t, ps) for t in traces}
