"""Reference matchers: brute-force search and textbook Aho-Corasick."""

from __future__ import annotations

from collections import deque

from .matcher import MatchReport
from .patterns import PatternSet


def naive_match(ps: PatternSet, data: bytes) -> list[MatchReport]:
    """Every start offset of every pattern, checked by direct comparison."""
    data = bytes(data)
    out = []
    for p in ps:
        w = p.data
        ids = ps.fanout(p.id)
        i = data.find(w)
        while i >= 0:
            for pid in ids:
                out.append(MatchReport(pid, i, i + len(w)))
            i = data.find(w, i + 1)
    out.sort(key=lambda r: (r.start, r.pattern_id))
    return out


def brute_force_match(ps: PatternSet, data: bytes) -> list[MatchReport]:
    """Slice comparison at every offset; quadratic, for small inputs only."""
    out = []
    for p in ps:
        w = p.data
        for i in range(len(data) - len(w) + 1):
            if data[i:i + len(w)] == w:
                out.extend(MatchReport(pid, i, i + len(w)) for pid in ps.fanout(p.id))
    out.sort(key=lambda r: (r.start, r.pattern_id))
    return out


class ACMatcher:
    """Aho-Corasick automaton with goto dicts and failure links."""

    def __init__(self, ps: PatternSet) -> None:
        self.patterns = ps
        self.goto: list[dict[int, int]] = [{}]
        self.fail: list[int] = [0]
        self.out: list[tuple[int, ...]] = [()]
        for p in ps:
            s = 0
            for b in p.data:
                nxt = self.goto[s].get(b)
                if nxt is None:
                    nxt = len(self.goto)
                    self.goto.append({})
                    self.fail.append(0)
                    self.out.append(())
                    self.goto[s][b] = nxt
                s = nxt
            self.out[s] += (p.id,)
        queue = deque(self.goto[0].values())
        while queue:
            s = queue.popleft()
            for b, t in self.goto[s].items():
                queue.append(t)
                f = self.fail[s]
                while f and b not in self.goto[f]:
                    f = self.fail[f]
                self.fail[t] = self.goto[f].get(b, 0) if s else 0
                self.out[t] += self.out[self.fail[t]]

    @property
    def node_count(self) -> int:
        return len(self.goto)

    def memory_bytes(self) -> int:
        """Packed-layout size: per node fail u32, edge count u16, output
        offset u32; per edge byte u8 + child u32; per output id u32."""
        edges = sum(len(g) for g in self.goto)
        outputs = sum(len(o) for o in self.out)
        return len(self.goto) * 10 + edges * 5 + outputs * 4

    def match(self, data: bytes) -> list[MatchReport]:
        goto, fail, out = self.goto, self.fail, self.out
        length = {p.id: len(p.data) for p in self.patterns}
        hits = []
        s = 0
        for i, b in enumerate(bytes(data)):
            g = goto[s]
            while b not in g and s:
                s = fail[s]
                g = goto[s]
            s = g.get(b, 0)
            if out[s]:
                for pid in out[s]:
                    hits.append((pid, i + 1 - length[pid]))
        reports = []
        for pid, start in hits:
            for dup in self.patterns.fanout(pid):
                reports.append(MatchReport(dup, start, start + length[pid]))
        reports.sort(key=lambda r: (r.start, r.pattern_id))
        return reports


def ac_match(ps: PatternSet, data: bytes) -> list[MatchReport]:
    return ACMatcher(ps).match(data)
