"""Bouma2: multiple exact string matching with motif hashing and mangled-tries."""

from .artifact import dumps, load, loads, save
from .errors import (ArtifactError, Bouma2Error, EmptyPatternSet, InconsistentPlan,
                     InfeasibleMotifSet, MissingStats, PatternFileError, PatternTooShort,
                     ZeroPairStats)
from .matcher import CompiledMatcher, MatchCounters, MatchReport, match, memory_report
from .optimizer import MotifSet, SolverStatus, select_motifs
from .oracle import ACMatcher, ac_match, naive_match
from .patterns import Pattern, PatternSet, extract_trace_set, validate_patterns
from .pipeline import compile_patterns
from .stats import CostFunction, CostKind, StatsMode, TraceStats, collect_stats

__version__ = "0.1.0"

__all__ = [
    "ACMatcher", "ArtifactError", "Bouma2Error", "CompiledMatcher", "CostFunction",
    "CostKind", "EmptyPatternSet", "InconsistentPlan", "InfeasibleMotifSet",
    "MatchCounters", "MatchReport", "MissingStats", "MotifSet", "Pattern",
    "PatternFileError", "PatternSet", "PatternTooShort", "SolverStatus", "StatsMode",
    "TraceStats", "ZeroPairStats", "ac_match", "collect_stats", "compile_patterns",
    "dumps", "extract_trace_set", "load", "loads", "match", "memory_report",
    "naive_match", "save", "select_motifs", "validate_patterns",
]
