"""Mangled-trie construction.

A mangled-trie resolves one motif hit: every node decides which byte,
relative to the motif position, to examine next.  Symbols are keyed by
*entry* ``(pattern_id, anchor)`` rather than by pattern, because a pattern
can sit in the same resolve-set twice with anchors of opposite parity.

Node kinds:

* state        -- probes ``offset`` and follows the edge for the byte found
                  there, or ``fallback`` for any other byte / out of range.
* transitional -- the byte consumed on the way in completed ``entry``; report
                  it and continue with ``next`` if other words remain.
* terminal     -- one word left; verify its ``fragments`` and report.

Any node may carry a ``pivot``: a subtrie walked after the current path ends,
covering words whose fragments lie on the other side of the motif.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Iterator, NamedTuple

from .assignment import ResolveSet
from .patterns import PatternSet


class MTSymbol(NamedTuple):
    pattern_id: int
    anchor: int
    rel_offset: int
    byte: int

    @property
    def entry(self) -> tuple[int, int]:
        return (self.pattern_id, self.anchor)


Entry = tuple[int, int]
Symbols = frozenset  # frozenset[MTSymbol]


class NodeKind(str, Enum):
    STATE = "state"
    TRANSITIONAL = "transitional"
    TERMINAL = "terminal"


@dataclass(eq=False, slots=True)
class MTNode:
    kind: NodeKind
    offset: int = 0
    edges: dict[int, MTNode] = field(default_factory=dict)
    fallback: MTNode | None = None
    entry: Entry | None = None
    fragments: tuple[tuple[int, bytes], ...] = ()
    next: MTNode | None = None
    pivot: MTNode | None = None

    def successors(self) -> Iterator[MTNode]:
        for _, child in sorted(self.edges.items()):
            yield child
        if self.fallback is not None:
            yield self.fallback
        if self.next is not None:
            yield self.next

    @property
    def probes(self) -> int:
        """1 if visiting this node reads input bytes."""
        return 0 if self.kind is NodeKind.TRANSITIONAL else 1


@dataclass
class MangledTrie:
    motif: bytes
    root: MTNode
    entries: tuple[Entry, ...]
    max_word_length: int
    node_count: int = 0
    max_depth: int = 0

    def __post_init__(self) -> None:
        self.node_count = len(list(iter_nodes(self.root)))
        self.max_depth = trie_depth(self.root)

    @property
    def depth_bound(self) -> int:
        return 2 * (self.max_word_length - 2)

    def nodes(self) -> list[MTNode]:
        return list(iter_nodes(self.root))


def iter_nodes(root: MTNode) -> Iterator[MTNode]:
    """Each distinct node once, depth-first pre-order."""
    seen: set[int] = set()
    stack = [root]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        yield node
        kids = list(node.successors())
        if node.pivot is not None:
            kids.append(node.pivot)
        stack.extend(reversed(kids))


def trie_depth(root: MTNode) -> int:
    """Largest number of input-reading nodes on any walk, pivot path included."""
    memo: dict[int, int] = {}

    def depth(node: MTNode) -> int:
        d = memo.get(id(node))
        if d is None:
            d = node.probes + max((depth(c) for c in node.successors()), default=0)
            if node.pivot is not None:
                d += depth(node.pivot)
            memo[id(node)] = d
        return d

    return depth(root)


# -- symbol sets -------------------------------------------------------------

def symbol_set(rs: ResolveSet, ps: PatternSet) -> Symbols:
    """All (entry, relative offset, byte) triples except the motif itself."""
    out = set()
    for pid, anchor in rs.entries:
        w = ps.by_id(pid).data
        for i in range(-anchor, len(w) - anchor):
            if i in (0, 1):
                continue
            out.add(MTSymbol(pid, anchor, i, w[anchor + i]))
    return frozenset(out)


def owners(S: Iterable[MTSymbol]) -> set[Entry]:
    return {s.entry for s in S}


# The builder works on a map entry -> {rel_offset: byte}; the public helpers
# below accept either that map or a frozenset of MTSymbol.
SymMap = dict  # dict[Entry, dict[int, int]]


def _as_map(S) -> SymMap:
    if isinstance(S, dict):
        return S
    m: SymMap = {}
    for s in S:
        m.setdefault((s.pattern_id, s.anchor), {})[s.rel_offset] = s.byte
    return m


def _as_symbols(m: SymMap) -> Symbols:
    return frozenset(MTSymbol(e[0], e[1], o, b) for e, d in m.items() for o, b in d.items())


def _symbol_map(rs: ResolveSet, ps: PatternSet) -> SymMap:
    m: SymMap = {}
    for pid, anchor in rs.entries:
        w = ps.by_id(pid).data
        m[(pid, anchor)] = {i: w[anchor + i] for i in range(-anchor, len(w) - anchor)
                            if i not in (0, 1)}
    return m


def _purge(m: SymMap, off: int, consumed: int | None):
    W: set[Entry] = set()
    S2: SymMap = {}
    done = []
    for e, d in m.items():
        b = d.get(off)
        if b is None:
            W.add(e)
            S2[e] = d
        elif b == consumed:
            W.add(e)
            if len(d) == 1:
                done.append(e)
            else:
                S2[e] = {o: x for o, x in d.items() if o != off}
    return W, S2, tuple(sorted(done))


def purge_offset(S: Symbols, scoring_offset: int, consumed: int | None):
    """Consume ``consumed`` (``None`` = any other byte) at ``scoring_offset``.

    Returns ``(W, S', w_trans)``: surviving entries, their remaining symbols
    with the scoring offset removed, and the entries completed by this byte,
    sorted.  More than one entry can complete at once when a shorter word
    sits inside a longer one around the same motif position.
    """
    W, S2, done = _purge(_as_map(S), scoring_offset, consumed)
    return W, _as_symbols(S2), done


def _split_pivot(m: SymMap, off: int):
    pos = {e for e, d in m.items() if any(o >= 2 for o in d)}
    neg = {e for e, d in m.items() if any(o <= -1 for o in d)}
    if not pos or not neg or pos & neg:
        return None
    side = neg if off >= 2 else pos
    return ({e: d for e, d in m.items() if e not in side},
            {e: d for e, d in m.items() if e in side})


def find_pivot(S: Symbols, scoring_offset: int):
    """Split off the side opposite ``scoring_offset`` when no entry spans both.

    Returns ``(W_pivot, S_pivot)``; both empty unless the entries owning
    symbols at offsets >= 2 and those owning offsets <= -1 are disjoint and
    both non-empty.
    """
    split = _split_pivot(_as_map(S), scoring_offset)
    if split is None:
        return set(), frozenset()
    return set(split[1]), _as_symbols(split[1])


def _offset_profile(m: SymMap) -> dict[int, tuple[dict[int, int], int]]:
    by_off: dict[int, dict[int, int]] = {}
    for d in m.values():
        for o, b in d.items():
            groups = by_off.get(o)
            if groups is None:
                groups = by_off[o] = {}
            groups[b] = groups.get(b, 0) + 1
    live = len(m)
    return {o: (groups, live - sum(groups.values())) for o, groups in by_off.items()}


def _key_balanced(o, groups, eps):
    branches = [n + eps for n in groups.values()]
    if eps:
        branches.append(eps)
    return (max(branches), sum(branches), abs(o), o > 0)


def _key_classes(o, groups, eps):
    return (-(len(groups) + (1 if eps else 0)), abs(o), o > 0)


STRATEGIES = {"balanced": _key_balanced, "classes": _key_classes}


def calc_scoring_offset(S, strategy: str = "balanced") -> int:
    """Pick the offset to probe next.

    ``balanced`` minimises the largest branch (words agreeing with a byte plus
    words indifferent to the offset), then the total branch population, so
    words without a symbol at the offset are not copied into many branches.
    ``classes`` maximises the number of distinct outcomes.  Both tie-break on
    the smaller ``|offset|``, then negative before positive.
    """
    m = _as_map(S)
    if not m:
        raise ValueError("empty symbol set")
    keyf = STRATEGIES[strategy]
    profile = _offset_profile(m)
    return min(profile, key=lambda o: keyf(o, *profile[o]))


def _fragments(d: dict[int, int]) -> tuple[tuple[int, bytes], ...]:
    runs: list[list] = []
    for o in sorted(d):
        if runs and runs[-1][0] + len(runs[-1][1]) == o:
            runs[-1][1].append(d[o])
        else:
            runs.append([o, bytearray([d[o]])])
    return tuple((o, bytes(b)) for o, b in runs)


def fragments_of(S: Iterable[MTSymbol]) -> tuple[tuple[int, bytes], ...]:
    """Merge a word's symbols into maximal (start offset, byte run) pieces."""
    return _fragments({s.rel_offset: s.byte for s in S})


OffsetChooser = Callable[[SymMap], int]


def _build(m: SymMap, choose: OffsetChooser) -> MTNode | None:
    if not m:
        return None
    if len(m) == 1:
        ((entry, d),) = m.items()
        return MTNode(NodeKind.TERMINAL, entry=entry, fragments=_fragments(d))
    off = choose(m)
    node = MTNode(NodeKind.STATE, offset=off)
    alphabet = sorted({d[off] for d in m.values() if off in d})
    for consumed in [*alphabet, None]:
        _, S2, w_trans = _purge(m, off, consumed)
        split = _split_pivot(S2, off)
        if split is not None:
            child = _build(split[0], choose)
            child.pivot = _build(split[1], choose)
        else:
            child = _build(S2, choose)
        for entry in reversed(w_trans):
            child = MTNode(NodeKind.TRANSITIONAL, entry=entry, next=child)
        if child is None:
            continue
        if consumed is None:
            node.fallback = child
        else:
            node.edges[consumed] = child
    return node


def consolidate_nodes(trie: MangledTrie) -> MangledTrie:
    """Share structurally identical subtries; the result is a DAG."""
    canon: dict[tuple, MTNode] = {}
    done: dict[int, MTNode] = {}

    def visit(node: MTNode | None) -> MTNode | None:
        if node is None:
            return None
        got = done.get(id(node))
        if got is not None:
            return got
        edges = {b: visit(c) for b, c in sorted(node.edges.items())}
        fallback = visit(node.fallback)
        nxt = visit(node.next)
        pivot = visit(node.pivot)
        key = (
            node.kind, node.offset,
            tuple((b, id(c)) for b, c in edges.items()),
            id(fallback) if fallback else None,
            node.entry, node.fragments,
            id(nxt) if nxt else None,
            id(pivot) if pivot else None,
        )
        out = canon.get(key)
        if out is None:
            out = MTNode(node.kind, node.offset, edges, fallback, node.entry,
                         node.fragments, nxt, pivot)
            canon[key] = out
        done[id(node)] = out
        return out

    return MangledTrie(trie.motif, visit(trie.root), trie.entries, trie.max_word_length)


def build_mangled_trie(
    rs: ResolveSet,
    ps: PatternSet,
    choose: OffsetChooser | None = None,
    strategy: str = "balanced",
    consolidate: bool = True,
) -> MangledTrie:
    if not rs.entries:
        raise ValueError(f"empty resolve-set for motif {rs.motif!r}")
    if choose is None:
        choose = lambda S: calc_scoring_offset(S, strategy)  # noqa: E731
    root = _build(_symbol_map(rs, ps), choose)
    longest = max(len(ps.by_id(pid).data) for pid, _ in rs.entries)
    trie = MangledTrie(rs.motif, root, tuple(rs.entries), longest)
    check_single_pivot(trie.root)
    return consolidate_nodes(trie) if consolidate else trie


def forced_offsets(preference: Iterable[int]) -> OffsetChooser:
    """Chooser taking the first offset from ``preference`` present in S."""
    order = list(preference)

    def choose(S) -> int:
        m = _as_map(S)
        present = {o for d in m.values() for o in d}
        for o in order:
            if o in present:
                return o
        return calc_scoring_offset(m)

    return choose


def check_single_pivot(root: MTNode) -> None:
    """Assert no walk can meet two pivots."""
    memo: dict[int, bool] = {}

    def has_pivot(node: MTNode) -> bool:
        got = memo.get(id(node))
        if got is None:
            below = any(has_pivot(c) for c in node.successors())
            if node.pivot is not None:
                if below or has_pivot(node.pivot):
                    raise AssertionError("more than one pivot on a mangled-trie path")
            got = below or node.pivot is not None
            memo[id(node)] = got
        return got

    has_pivot(root)


def walk(trie: MangledTrie, read: Callable[[int], int | None]) -> list[Entry]:
    """Resolve one motif hit; ``read(rel)`` returns the byte there or None.

    Reference walk used by tests; the matcher inlines the same loop.
    """
    found: list[Entry] = []
    node: MTNode | None = trie.root
    pivot = None
    while True:
        while node is not None:
            if node.pivot is not None:
                pivot = node.pivot
            if node.kind is NodeKind.STATE:
                b = read(node.offset)
                node = node.edges.get(b, node.fallback) if b is not None else node.fallback
            elif node.kind is NodeKind.TRANSITIONAL:
                found.append(node.entry)
                node = node.next
            else:
                if all(_read_run(read, o, run) for o, run in node.fragments):
                    found.append(node.entry)
                node = None
        if pivot is None:
            return found
        node, pivot = pivot, None


def _read_run(read, start: int, run: bytes) -> bool:
    for k, b in enumerate(run):
        if read(start + k) != b:
            return False
    return True


def render_trie(trie: MangledTrie) -> str:
    """Indented text dump; shared nodes are printed once and referenced."""
    labels: dict[int, str] = {}
    lines = [f"motif {trie.motif.hex()} nodes={trie.node_count} depth={trie.max_depth}"]

    def describe(node: MTNode) -> str:
        if node.kind is NodeKind.STATE:
            return f"state @{node.offset:+d}"
        if node.kind is NodeKind.TRANSITIONAL:
            return f"transitional pattern={node.entry[0]} anchor={node.entry[1]}"
        frags = " ".join(f"{run.hex()}@{o:+d}" for o, run in node.fragments)
        return f"terminal pattern={node.entry[0]} anchor={node.entry[1]} [{frags}]"

    def emit(node: MTNode, label: str, indent: int) -> None:
        pad = "  " * indent
        if id(node) in labels:
            lines.append(f"{pad}{label} -> {labels[id(node)]} (shared)")
            return
        labels[id(node)] = f"n{len(labels)}"
        lines.append(f"{pad}{label} {labels[id(node)]}: {describe(node)}")
        for b, c in sorted(node.edges.items()):
            emit(c, f"[{b:02x}]", indent + 1)
        if node.fallback is not None:
            emit(node.fallback, "[*]", indent + 1)
        if node.next is not None:
            emit(node.next, "[next]", indent + 1)
        if node.pivot is not None:
            emit(node.pivot, "[pivot]", indent + 1)

    emit(trie.root, "root", 0)
    return "\n".join(lines)


def graph_lines(trie: MangledTrie) -> list[str]:
    """One ``node`` or ``edge`` record per line for external visualisation."""
    ids = {id(n): i for i, n in enumerate(iter_nodes(trie.root))}
    out = []
    for n in iter_nodes(trie.root):
        i = ids[id(n)]
        out.append(f"node {i} {n.kind.value} offset={n.offset} entry={n.entry} "
                   f"fragments={[(o, r.hex()) for o, r in n.fragments]}")
        for b, c in sorted(n.edges.items()):
            out.append(f"edge {i} {ids[id(c)]} byte={b:02x}")
        if n.fallback is not None:
            out.append(f"edge {i} {ids[id(n.fallback)]} fallback")
        if n.next is not None:
            out.append(f"edge {i} {ids[id(n.next)]} next")
        if n.pivot is not None:
            out.append(f"edge {i} {ids[id(n.pivot)]} pivot")
    return out
