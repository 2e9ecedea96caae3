"""End-to-end compilation: patterns -> motif-set -> mappings -> tries -> matcher."""

from __future__ import annotations

import logging
from typing import Iterable, Sequence

from .assignment import DEFAULT_POLICY, assign_mappings
from .matcher import CompiledMatcher, compile
from .optimizer import DEFAULT_TIME_LIMIT, MotifSet, check_motif_set, select_motifs
from .patterns import PatternSet, validate_patterns
from .stats import CostFunction, cost_table
from .trie import build_mangled_trie

log = logging.getLogger(__name__)


def compile_patterns(
    patterns: PatternSet | Iterable[bytes],
    cf: CostFunction | None = None,
    solver: str = "exact",
    time_limit: float | None = DEFAULT_TIME_LIMIT,
    policy: Sequence[str] = DEFAULT_POLICY,
    strategy: str = "balanced",
    motif_set: MotifSet | None = None,
) -> CompiledMatcher:
    ps = patterns if isinstance(patterns, PatternSet) else validate_patterns(patterns)
    cf = cf or CostFunction()
    ms = motif_set or select_motifs(ps, cf, solver, time_limit)
    check_motif_set(ps, ms.motifs)
    costs = cost_table(cf, ps, sorted(ms.motifs))
    mappings, resolve = assign_mappings(ps, ms.motifs, policy=policy, costs=costs)
    tries = [build_mangled_trie(rs, ps, strategy=strategy) for rs in resolve.values()]
    log.info("compiled %d patterns: %d motifs selected, %d in use, objective %.6g (%s)",
             len(ps), len(ms), len(tries), ms.objective, ms.solver_status.value)
    meta = {
        "cost": cf.kind.value,
        "solver": solver,
        "status": ms.solver_status.value,
        "objective": repr(float(ms.objective)),
        "selected_motifs": str(len(ms)),
    }
    return compile(ps, ms.motifs, mappings, tries, meta)
