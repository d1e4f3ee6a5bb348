"""Deductive database with incremental propagation over a counted store.

The engine keeps ground facts, rules and clause templates in a store that
counts how many times each axiom has been asserted.  New axioms arrive on
a queue with a signed delta; each tick pairs the arrival against resident
counterparts, multiplies the counts through rule guards, and enqueues the
consequences.  Removals are insertions with delta -1, so retracting an
input unwinds everything it implied.
"""

from .lang import (
    Decls,
    LangError,
    ParseError,
    UnboundConsequenceVariable,
    canonical_axiom,
    parse_axiom,
    parse_dgoal,
    parse_program,
    parse_term,
    print_axiom,
    print_dgoal,
    print_term,
)
from .oracle import naive_query, naive_run
from .query import UnindexedQuery, query, query_count
from .static_engine import BudgetExhausted, EngineError, SolveBudget, StaticDB, solve
from .storage import CorruptJournal, Journal, PartitionStore, QueueFull
from .tank import NotQuiescent, Tank, TickReport
from .terms import (
    Compound,
    Int,
    NonGroundSubject,
    Str,
    Var,
    canonical_decode,
    canonical_encode,
    term_from_json,
    term_to_json,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExhausted",
    "Compound",
    "CorruptJournal",
    "Decls",
    "EngineError",
    "Int",
    "Journal",
    "LangError",
    "NonGroundSubject",
    "NotQuiescent",
    "ParseError",
    "PartitionStore",
    "QueueFull",
    "SolveBudget",
    "StaticDB",
    "Str",
    "Tank",
    "TickReport",
    "UnboundConsequenceVariable",
    "UnindexedQuery",
    "Var",
    "canonical_axiom",
    "canonical_decode",
    "canonical_encode",
    "naive_query",
    "naive_run",
    "parse_axiom",
    "parse_dgoal",
    "parse_program",
    "parse_term",
    "print_axiom",
    "print_dgoal",
    "print_term",
    "query",
    "query_count",
    "solve",
    "term_from_json",
    "term_to_json",
]
