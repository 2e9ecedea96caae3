"""Compiled matcher: even-aligned fast path plus mangled-trie slow path."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .assignment import MotifMapping
from .errors import InconsistentPlan
from .patterns import PatternSet, trace_code
from .trie import MangledTrie, MTNode, NodeKind

NO_TRIE = -1

_STATE = NodeKind.STATE
_TRANSITIONAL = NodeKind.TRANSITIONAL


class MatchReport(NamedTuple):
    pattern_id: int
    start: int
    end: int


class HarvestEntry(NamedTuple):
    offset: int
    motif: bytes


@dataclass
class MatchCounters:
    fast_path_probes: int = 0
    harvest_count: int = 0
    slow_path_node_visits: int = 0
    fragment_bytes_compared: int = 0
    max_visits_per_harvest: int = 0
    duplicates_dropped: int = 0

    def add(self, other: MatchCounters) -> None:
        self.fast_path_probes += other.fast_path_probes
        self.harvest_count += other.harvest_count
        self.slow_path_node_visits += other.slow_path_node_visits
        self.fragment_bytes_compared += other.fragment_bytes_compared
        self.max_visits_per_harvest = max(self.max_visits_per_harvest, other.max_visits_per_harvest)
        self.duplicates_dropped += other.duplicates_dropped

    def as_dict(self) -> dict[str, int]:
        return dict(self.__dict__)


@dataclass
class CompiledMatcher:
    """Immutable match artifact.

    ``tries[k]`` resolves the motif whose 16-bit code maps to ``k`` in
    ``dispatch``; unused dispatch slots hold ``NO_TRIE``.
    """

    patterns: PatternSet
    motifs: tuple[bytes, ...]
    mappings: tuple[MotifMapping, ...]
    tries: tuple[MangledTrie, ...]
    dispatch: np.ndarray
    meta: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self._roots = [t.root for t in self.tries]
        lengths = {p.id: len(p.data) for p in self.patterns}
        self._length = lengths
        self._fanout = {p.id: self.patterns.fanout(p.id) for p in self.patterns}
        self.max_word_length = self.patterns.max_length

    def trie_for(self, motif: bytes) -> MangledTrie | None:
        k = int(self.dispatch[trace_code(motif)])
        return None if k == NO_TRIE else self.tries[k]

    @property
    def motif_set(self) -> frozenset[bytes]:
        return frozenset(self.motifs)


def compile(ps: PatternSet, motifs, mappings: Iterable[MotifMapping],
            tries, meta: dict[str, str] | None = None) -> CompiledMatcher:
    """Assemble the artifact; only motifs owning a trie enter the dispatch table."""
    if isinstance(tries, dict):
        tries = list(tries.values())
    tries = sorted(tries, key=lambda t: t.motif)
    by_motif = {t.motif: t for t in tries}
    mappings = tuple(sorted(mappings, key=lambda m: (m.pattern_id, m.parity)))
    motif_set = set(motifs)
    for m in mappings:
        trie = by_motif.get(m.motif)
        if trie is None:
            raise InconsistentPlan(f"mapping {m} references motif {m.motif!r} with no trie")
        if (m.pattern_id, m.anchor) not in trie.entries:
            raise InconsistentPlan(f"mapping {m} is missing from the trie of {m.motif!r}")
        if m.motif not in motif_set:
            raise InconsistentPlan(f"mapping {m} uses a motif outside the motif-set")
    dispatch = np.full(65536, NO_TRIE, dtype=np.int32)
    for k, t in enumerate(tries):
        dispatch[trace_code(t.motif)] = k
    return CompiledMatcher(ps, tuple(t.motif for t in tries), mappings, tuple(tries),
                           dispatch, dict(meta or {}))


def _harvest_offsets(cm: CompiledMatcher, data: bytes, start: int = 0,
                     stop: int | None = None) -> tuple[np.ndarray, np.ndarray, int]:
    """Hits among even ``i`` in ``[start, stop)`` with ``i + 1 < len(data)``.

    Returns (offsets, trie indices, number of pairs probed).
    """
    start += start & 1
    upper = len(data) - 1 if stop is None else min(stop, len(data) - 1)
    count = max(0, (upper - start + 1) // 2)
    if count == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int32), 0
    pairs = np.frombuffer(data, dtype=">u2", count=count, offset=start)
    slots = cm.dispatch[pairs]
    hit = np.flatnonzero(slots != NO_TRIE)
    return start + 2 * hit, slots[hit], count


def fast_path(cm: CompiledMatcher, data: bytes, start: int = 0,
              stop: int | None = None) -> list[HarvestEntry]:
    """Motif hits at even offsets ``i`` with ``i + 1 < n``, ascending."""
    offs, slots, _ = _harvest_offsets(cm, bytes(data), start, stop)
    return [HarvestEntry(int(i), cm.tries[int(k)].motif) for i, k in zip(offs, slots)]


def _resolve(root: MTNode, data: bytes, n: int, i: int, found: list, counters: MatchCounters | None) -> None:
    """Walk one trie for a hit at ``i``, appending (pattern_id, start) pairs."""
    visits = 0
    frag_bytes = 0
    node = root
    pivot = None
    while True:
        while node is not None:
            if node.pivot is not None:
                pivot = node.pivot
            kind = node.kind
            if kind is _STATE:
                visits += 1
                p = i + node.offset
                if 0 <= p < n:
                    node = node.edges.get(data[p], node.fallback)
                else:
                    node = node.fallback
            elif kind is _TRANSITIONAL:
                pid, anchor = node.entry
                found.append((pid, i - anchor))
                node = node.next
            else:
                visits += 1
                ok = True
                for o, run in node.fragments:
                    p = i + o
                    if p < 0 or p + len(run) > n:
                        ok = False
                        break
                    frag_bytes += len(run)
                    if data[p:p + len(run)] != run:
                        ok = False
                        break
                if ok:
                    pid, anchor = node.entry
                    found.append((pid, i - anchor))
                node = None
        if pivot is None:
            break
        node, pivot = pivot, None
    if counters is not None:
        counters.slow_path_node_visits += visits
        counters.fragment_bytes_compared += frag_bytes
        if visits > counters.max_visits_per_harvest:
            counters.max_visits_per_harvest = visits


def _reports(cm: CompiledMatcher, found, counters: MatchCounters | None) -> list[MatchReport]:
    unique = set(found)
    if counters is not None:
        counters.duplicates_dropped += len(found) - len(unique)
    out = []
    length = cm._length
    for pid, start in unique:
        end = start + length[pid]
        for dup in cm._fanout[pid]:
            out.append(MatchReport(dup, start, end))
    out.sort(key=lambda r: (r.start, r.pattern_id))
    return out


def slow_path(cm: CompiledMatcher, harvest: Iterable[HarvestEntry], data: bytes,
              counters: MatchCounters | None = None) -> list[MatchReport]:
    data = bytes(data)
    n = len(data)
    found: list = []
    for i, motif in harvest:
        k = int(cm.dispatch[trace_code(motif)])
        if k == NO_TRIE:
            continue
        _resolve(cm._roots[k], data, n, i, found, counters)
    return _reports(cm, found, counters)


def _scan_range(cm: CompiledMatcher, data: bytes, start: int, stop: int,
                counters: MatchCounters | None) -> list:
    offs, slots, probes = _harvest_offsets(cm, data, start, stop)
    if counters is not None:
        counters.fast_path_probes += probes
        counters.harvest_count += len(offs)
    found: list = []
    roots = cm._roots
    n = len(data)
    for i, k in zip(offs.tolist(), slots.tolist()):
        _resolve(roots[k], data, n, i, found, counters)
    return found


def match(cm: CompiledMatcher, data: bytes, counters: bool = True,
          threads: int = 1) -> tuple[list[MatchReport], MatchCounters]:
    """All occurrences of all patterns in ``data``.

    With ``threads > 1`` the input is cut at even boundaries and each range
    is harvested and resolved independently; slow-path probes may read past
    a range end within the same buffer.
    """
    data = bytes(data)
    total = MatchCounters()
    n = len(data)
    if threads <= 1 or n < 4096:
        found = _scan_range(cm, data, 0, n, total if counters else None)
        return _reports(cm, found, total if counters else None), total
    bounds = chunk_bounds(n, threads)
    parts = [MatchCounters() for _ in bounds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(
            lambda a: _scan_range(cm, data, a[0][0], a[0][1], a[1] if counters else None),
            zip(bounds, parts)))
    found = [x for r in results for x in r]
    for p in parts:
        total.add(p)
    return _reports(cm, found, total if counters else None), total


def chunk_bounds(n: int, chunks: int) -> list[tuple[int, int]]:
    """Split ``[0, n)`` into ``chunks`` ranges whose starts are even."""
    step = max(2, -(-n // chunks))
    step += step & 1
    return [(a, min(n, a + step)) for a in range(0, n, step)] or [(0, 0)]


# -- memory accounting -------------------------------------------------------

DISPATCH_SLOT_BYTES = 4
NODE_HEADER_BYTES = 25   # kind u8, offset i16, fallback/next/pivot u32, entry u32+u16, counts u16x2
EDGE_BYTES = 5           # byte u8, child u32
FRAGMENT_HEADER_BYTES = 4  # offset i16, length u16


def trie_bytes(trie: MangledTrie) -> dict[str, int]:
    nodes = trie.nodes()
    edges = sum(len(n.edges) for n in nodes)
    frag_headers = sum(len(n.fragments) for n in nodes)
    frag_payload = sum(len(r) for n in nodes for _, r in n.fragments)
    node_bytes = len(nodes) * NODE_HEADER_BYTES + edges * EDGE_BYTES
    fragment_bytes = frag_headers * FRAGMENT_HEADER_BYTES + frag_payload
    return {
        "nodes": len(nodes),
        "node_bytes": node_bytes,
        "fragment_bytes": fragment_bytes,
        "total": node_bytes + fragment_bytes,
        "paths": len(trie.entries),
        "max_depth": trie.max_depth,
    }


def memory_report(cm: CompiledMatcher) -> dict:
    """Byte breakdown of the match structures in their packed layout."""
    per_trie = {t.motif.hex(): trie_bytes(t) for t in cm.tries}
    trie_total = sum(v["total"] for v in per_trie.values())
    dispatch_bytes = 65536 * DISPATCH_SLOT_BYTES
    return {
        "dispatch_bytes": dispatch_bytes,
        "dispatch_occupied": int(np.count_nonzero(cm.dispatch != NO_TRIE)),
        "trie_bytes": trie_total,
        "trie_nodes": sum(v["nodes"] for v in per_trie.values()),
        "total_paths": sum(v["paths"] for v in per_trie.values()),
        "total_bytes": dispatch_bytes + trie_total,
        "per_trie": per_trie,
    }
