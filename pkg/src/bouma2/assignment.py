"""Reduce a motif-set to exactly one even and one odd mapping per pattern."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

from .errors import InfeasibleMotifSet
from .patterns import PatternSet
from .stats import CostFunction, cost_table


class MotifMapping(NamedTuple):
    pattern_id: int
    parity: int
    motif: bytes
    anchor: int


@dataclass(frozen=True)
class ResolveSet:
    motif: bytes
    entries: tuple[tuple[int, int], ...]  # (pattern_id, anchor)

    def __len__(self) -> int:
        return len(self.entries)


# Ranking criteria, applied in order.  Each maps a candidate to a sort key.
#   cost     - motif cost under the active cost function
#   load     - current resolve-set size of the motif
#   center   - distance of the anchor from the middle of the word
#   leftmost - anchor position, smallest first
#   bytes    - motif bytes, then anchor (always appended as final tie-break)
DEFAULT_POLICY = ("cost", "load", "center", "bytes")
CRITERIA = frozenset({"cost", "load", "center", "leftmost", "bytes"})


def assign_mappings(
    ps: PatternSet,
    motifs,
    cf: CostFunction | None = None,
    policy: Sequence[str] = DEFAULT_POLICY,
    costs: Mapping[bytes, float] | None = None,
) -> tuple[list[MotifMapping], dict[bytes, ResolveSet]]:
    """Pick one (motif, anchor) per (pattern, parity).

    Patterns are processed in id order, even parity first; the ``load``
    criterion sees the resolve-set sizes accumulated so far.  Motifs that end
    up with no entries are absent from the returned resolve-sets.
    """
    unknown = set(policy) - CRITERIA
    if unknown:
        raise ValueError(f"unknown ranking criteria: {sorted(unknown)}")
    motifs = frozenset(motifs)
    if costs is None:
        costs = cost_table(cf, ps, sorted(motifs)) if cf is not None else {}
    load: dict[bytes, int] = {}
    entries: dict[bytes, list[tuple[int, int]]] = {}
    mappings: list[MotifMapping] = []
    for p in sorted(ps, key=lambda p: p.id):
        w = p.data
        mid = len(w) // 2
        for parity in (0, 1):
            cands = [(w[i:i + 2], i) for i in range(parity, len(w) - 1, 2)
                     if w[i:i + 2] in motifs]
            if not cands:
                raise InfeasibleMotifSet(p.id, parity)

            def rank(cand):
                t, a = cand
                key = []
                for crit in policy:
                    if crit == "cost":
                        key.append(costs.get(t, 0.0))
                    elif crit == "load":
                        key.append(load.get(t, 0))
                    elif crit == "center":
                        key.append(abs(a - mid))
                    elif crit == "leftmost":
                        key.append(a)
                    elif crit == "bytes":
                        key.append(t)
                key.extend((t, a))
                return tuple(key)

            t, a = min(cands, key=rank)
            mappings.append(MotifMapping(p.id, parity, t, a))
            load[t] = load.get(t, 0) + 1
            entries.setdefault(t, []).append((p.id, a))
    resolve = {t: ResolveSet(t, tuple(es)) for t, es in sorted(entries.items())}
    return mappings, resolve


def render_resolve_set(rs: ResolveSet, ps: PatternSet) -> str:
    """Words aligned on the motif with a caret line under it."""
    rows = [(ps.by_id(pid).data, a) for pid, a in rs.entries]
    left = max(a for _, a in rows)
    lines = [" " * (left - a) + printable(w) for w, a in rows]
    lines.append(" " * left + "^^")
    return "\n".join(lines)


def printable(data: bytes) -> str:
    return "".join(chr(b) if 0x20 <= b < 0x7F else "." for b in data)
