"""Motif-set selection as weighted set multi-cover.

Every pattern contributes two rows, one per parity; a trace column covers a
row when the trace occurs in the pattern at an offset of that parity.  Rows
and column coverage are kept as Python ints used as bitsets.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .errors import InfeasibleMotifSet
from .patterns import PatternSet
from .stats import CostFunction, cost_table

log = logging.getLogger(__name__)

DEFAULT_TIME_LIMIT = 30.0


class SolverStatus(str, Enum):
    OPTIMAL = "optimal"
    FEASIBLE_TIMEOUT = "feasible_timeout"
    GREEDY = "greedy"
    FALLBACK = "fallback"


@dataclass(frozen=True)
class CoverageMatrix:
    rows: tuple[tuple[int, int], ...]        # (pattern_id, parity)
    columns: tuple[bytes, ...]               # traces, ascending
    col_masks: tuple[int, ...]               # rows covered by each column
    row_cols: tuple[tuple[int, ...], ...]    # columns covering each row

    @property
    def full_mask(self) -> int:
        return (1 << len(self.rows)) - 1

    def covers(self, t: bytes, pattern_id: int, parity: int) -> bool:
        r = self.rows.index((pattern_id, parity))
        return bool(self.col_masks[self.columns.index(t)] >> r & 1)

    def nonzeros(self, pattern_id: int, parity: int) -> set[bytes]:
        r = self.rows.index((pattern_id, parity))
        return {self.columns[c] for c in self.row_cols[r]}

    def mask_of(self, motifs) -> int:
        index = {t: c for c, t in enumerate(self.columns)}
        m = 0
        for t in motifs:
            c = index.get(t)
            if c is not None:
                m |= self.col_masks[c]
        return m

    def is_feasible(self, motifs) -> bool:
        return self.mask_of(motifs) == self.full_mask


@dataclass(frozen=True)
class MotifSet:
    motifs: frozenset[bytes]
    objective: float
    solver_status: SolverStatus
    nodes: int = 0

    def __len__(self) -> int:
        return len(self.motifs)

    def sorted(self) -> list[bytes]:
        return sorted(self.motifs)


def build_coverage(ps: PatternSet) -> CoverageMatrix:
    rows = []
    cover: dict[bytes, int] = {}
    for p in ps:
        w = p.data
        for parity in (0, 1):
            r = len(rows)
            rows.append((p.id, parity))
            for i in range(parity, len(w) - 1, 2):
                t = w[i:i + 2]
                cover[t] = cover.get(t, 0) | (1 << r)
    columns = tuple(sorted(cover))
    col_masks = tuple(cover[t] for t in columns)
    row_cols: list[list[int]] = [[] for _ in rows]
    for c, m in enumerate(col_masks):
        while m:
            low = m & -m
            row_cols[low.bit_length() - 1].append(c)
            m ^= low
    return CoverageMatrix(tuple(rows), columns, col_masks, tuple(tuple(rc) for rc in row_cols))


def check_motif_set(ps: PatternSet, motifs) -> None:
    """Raise :class:`InfeasibleMotifSet` for the first uncovered (pattern, parity)."""
    motifs = set(motifs)
    for p in ps:
        w = p.data
        for parity in (0, 1):
            if not any(w[i:i + 2] in motifs for i in range(parity, len(w) - 1, 2)):
                raise InfeasibleMotifSet(p.id, parity)


def _costs(cm: CoverageMatrix, cf: CostFunction, ps: PatternSet | None,
           costs: dict[bytes, float] | None) -> list[float]:
    if costs is None:
        if cf.kind.value == "unit":
            return [1.0] * len(cm.columns)
        if ps is None:
            raise ValueError("a PatternSet is needed to evaluate this cost function")
        costs = cost_table(cf, ps, cm.columns)
    return [float(costs[t]) for t in cm.columns]


def _prune(cm: CoverageMatrix, chosen: list[int], cost: list[float]) -> list[int]:
    """Drop motifs not needed for feasibility, most expensive first."""
    chosen = sorted(set(chosen), key=lambda c: (-cost[c], cm.columns[c]))
    keep = list(chosen)
    full = cm.full_mask
    for c in chosen:
        rest = [k for k in keep if k != c]
        m = 0
        for k in rest:
            m |= cm.col_masks[k]
        if m == full:
            keep = rest
    return keep


def _result(cm, chosen, cost, status, nodes=0) -> MotifSet:
    chosen = sorted(set(chosen))
    return MotifSet(
        frozenset(cm.columns[c] for c in chosen),
        sum(cost[c] for c in chosen),
        status,
        nodes,
    )


def _greedy_cols(cm: CoverageMatrix, cost: list[float], start: list[int],
                 uncovered: int) -> list[int] | None:
    # Lazy greedy: with non-negative costs a column's ratio only grows as
    # rows get covered, so a stale heap key is a valid lower bound.
    chosen = list(start)
    heap = []
    for c, m in enumerate(cm.col_masks):
        new = (m & uncovered).bit_count()
        if new and c not in chosen:
            heap.append((cost[c] / new, cm.columns[c], c))
    heapq.heapify(heap)
    while uncovered:
        if not heap:
            return None
        ratio, key, c = heapq.heappop(heap)
        new = (cm.col_masks[c] & uncovered).bit_count()
        if not new:
            continue
        fresh = cost[c] / new
        if fresh > ratio and heap and (fresh, key) > heap[0][:2]:
            heapq.heappush(heap, (fresh, key, c))
            continue
        chosen.append(c)
        uncovered &= ~cm.col_masks[c]
    return chosen


def solve_greedy(cm: CoverageMatrix, cf: CostFunction | None = None, *,
                 ps: PatternSet | None = None,
                 costs: dict[bytes, float] | None = None) -> MotifSet:
    """Weighted set-cover greedy: repeatedly take min cost per newly covered row."""
    cost = _costs(cm, cf or CostFunction(), ps, costs)
    negative = [c for c, v in enumerate(cost) if v < 0]
    covered = 0
    for c in negative:
        covered |= cm.col_masks[c]
    chosen = _greedy_cols(cm, cost, negative, cm.full_mask & ~covered)
    if chosen is None:
        raise InfeasibleMotifSet(-1, -1)
    return _result(cm, _prune(cm, chosen, cost), cost, SolverStatus.GREEDY)


def _lower_bound(cm: CoverageMatrix, cost: list[float], uncovered: int,
                 excluded: frozenset[int]) -> float | None:
    """Admissible bound on the cost still needed to cover ``uncovered``.

    The larger of: the most expensive cheapest column over uncovered rows,
    and the fractional bound sum_r min_c cost(c) / |c & uncovered|.  Returns
    None when some row has no admissible column left.
    """
    worst = 0.0
    frac = 0.0
    m = uncovered
    while m:
        low = m & -m
        r = low.bit_length() - 1
        m ^= low
        best_abs = None
        best_frac = None
        for c in cm.row_cols[r]:
            if c in excluded:
                continue
            v = cost[c]
            if best_abs is None or v < best_abs:
                best_abs = v
            f = v / (cm.col_masks[c] & uncovered).bit_count()
            if best_frac is None or f < best_frac:
                best_frac = f
        if best_abs is None:
            return None
        worst = max(worst, best_abs)
        frac += best_frac
    return max(worst, frac)


def solve_exact(cm: CoverageMatrix, cf: CostFunction | None = None,
                time_limit: float | None = DEFAULT_TIME_LIMIT, *,
                ps: PatternSet | None = None,
                costs: dict[bytes, float] | None = None,
                on_incumbent: Callable[[float, int, float], None] | None = None) -> MotifSet:
    """Best-first branch-and-bound over binary trace variables.

    Negative-cost traces are fixed to 1 up front (they never hurt
    feasibility and always lower the objective).  Each node branches on one
    variable: the column with the highest newly-covered/cost ratio among
    those covering the uncovered row with the fewest admissible columns.
    The greedy solution seeds the incumbent, so a timeout always returns a
    feasible plan.
    """
    cost = _costs(cm, cf or CostFunction(), ps, costs)
    t0 = time.monotonic()
    deadline = None if time_limit is None else t0 + time_limit

    forced = [c for c, v in enumerate(cost) if v < 0]
    base_cost = sum(cost[c] for c in forced)
    base_cov = 0
    for c in forced:
        base_cov |= cm.col_masks[c]

    greedy = _greedy_cols(cm, cost, forced, cm.full_mask & ~base_cov)
    if greedy is None:
        raise InfeasibleMotifSet(-1, -1)
    best_cols = sorted(set(greedy))
    best_obj = sum(cost[c] for c in best_cols)
    eps = 1e-9

    counter = itertools.count()
    root_unc = cm.full_mask & ~base_cov
    lb = _lower_bound(cm, cost, root_unc, frozenset())
    heap = [(base_cost + lb, next(counter), tuple(forced), base_cost, root_unc, frozenset())]
    nodes = 0
    status = SolverStatus.OPTIMAL
    while heap:
        bound, _, inc, inc_cost, unc, excl = heapq.heappop(heap)
        if bound >= best_obj - eps:
            break  # best-first: nothing left can improve
        nodes += 1
        if deadline is not None and nodes % 64 == 0 and time.monotonic() > deadline:
            status = SolverStatus.FEASIBLE_TIMEOUT
            break
        # row with fewest admissible columns
        row = None
        row_n = None
        m = unc
        while m:
            low = m & -m
            r = low.bit_length() - 1
            m ^= low
            n = sum(1 for c in cm.row_cols[r] if c not in excl)
            if row_n is None or n < row_n:
                row, row_n = r, n
                if n <= 1:
                    break
        cands = [c for c in cm.row_cols[row] if c not in excl]
        col = max(
            cands,
            key=lambda c: (
                (cm.col_masks[c] & unc).bit_count() / cost[c] if cost[c] > 0 else float("inf"),
                tuple(-b for b in cm.columns[c]),
            ),
        )
        # include branch
        inc1 = inc + (col,)
        cost1 = inc_cost + cost[col]
        unc1 = unc & ~cm.col_masks[col]
        if unc1 == 0:
            if cost1 < best_obj - eps:
                best_obj, best_cols = cost1, sorted(inc1)
                if on_incumbent:
                    on_incumbent(best_obj, nodes, (time.monotonic() - t0) * 1000)
                log.debug("incumbent %.6g after %d nodes", best_obj, nodes)
        else:
            lb1 = _lower_bound(cm, cost, unc1, excl)
            if lb1 is not None and cost1 + lb1 < best_obj - eps:
                heapq.heappush(heap, (cost1 + lb1, next(counter), inc1, cost1, unc1, excl))
        # exclude branch
        excl0 = excl | {col}
        lb0 = _lower_bound(cm, cost, unc, excl0)
        if lb0 is not None and inc_cost + lb0 < best_obj - eps:
            heapq.heappush(heap, (inc_cost + lb0, next(counter), inc, inc_cost, unc, excl0))

    chosen = _prune(cm, best_cols, cost)
    return _result(cm, chosen, cost, status, nodes)


def fallback_motifs(ps: PatternSet) -> MotifSet:
    """First and second 2-byte window of every pattern; always feasible."""
    motifs = set()
    for p in ps:
        motifs.add(p.data[0:2])
        motifs.add(p.data[1:3])
    return MotifSet(frozenset(motifs), float(len(motifs)), SolverStatus.FALLBACK)


def objective(motifs, cf: CostFunction, ps: PatternSet) -> float:
    table = cost_table(cf, ps, sorted(motifs))
    return sum(table.values())


def select_motifs(ps: PatternSet, cf: CostFunction | None = None, solver: str = "exact",
                  time_limit: float | None = DEFAULT_TIME_LIMIT) -> MotifSet:
    cf = cf or CostFunction()
    if solver == "fallback":
        ms = fallback_motifs(ps)
        return MotifSet(ms.motifs, objective(ms.motifs, cf, ps), ms.solver_status)
    cm = build_coverage(ps)
    if solver == "greedy":
        return solve_greedy(cm, cf, ps=ps)
    if solver == "exact":
        return solve_exact(cm, cf, time_limit, ps=ps)
    raise ValueError(f"unknown solver {solver!r}")
