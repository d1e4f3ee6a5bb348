"""The tank: a multiset of axioms, a work queue, and the tick loop.

State is a triple (S, T, Q): static clauses S, the axiom store T mapping
axioms to integer multiplicities, and a FIFO queue Q of (axiom, delta)
entries.  insert and remove only enqueue (+1 / -1); all store changes
happen inside ticks, so acknowledging a mutation is cheap and the
expensive propagation happens later, entry by entry.

One tick pops (alpha, n), matches alpha against every resident
counterpart (beta, m) of the same name, and for each derived axiom gamma
appends (gamma, n * m); then it adds alpha to the store at delta n.
Derivation pairs one fact with one rule: the fact unifies with the rule's
trigger, the guard is solved against S, and each guard solution emits one
instantiated consequence.  Matching happens against the store as it was
before alpha lands, so alpha never pairs with itself, and because deltas
multiply, removals cascade exactly like the insertions they undo:
quiescent state depends only on the multiset of operations, not their
order.  Negative multiplicities are ordinary: a removal ticked before its
insertion leaves mult -1, later cancelled to zero and pruned.

Concrete axioms (ground first argument) pay a single partition access per
tick; generic ones scan the partitions holding their name.  Entries whose
guard evaluation blows the step budget move to a dead-letter list instead
of wedging the tank.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Optional

from .lang import (
    Axiom,
    DClause,
    Decls,
    Fact,
    Rule,
    StaticClause,
    axiom_name,
    canonical_axiom,
    map_axiom_vars,
    parse_program,
    print_axiom,
    rename_apart,
    subject_of,
)
from .static_engine import (
    DEFAULT_MAX_STEPS,
    EngineError,
    SolveBudget,
    StaticDB,
    solve,
)
from .storage import (
    DurableQueue,
    Journal,
    OP_PARTITION_WRITE,
    OP_POP_COMMIT,
    OP_PUSH,
    PartitionStore,
    QueueEntry,
    apply_delta,
    push_payload,
    replay,
    write_payload,
)
from .terms import EMPTY_SUBST, fresh_scope, unify

DEFAULT_TICK_BUDGET = 100_000

PRELUDE = """\
% fishtank prelude, version 1.  Loaded into every tank.
:- static member/2.
:- static append/3.

member(X, [X|_]).
member(X, [_|T]) :- member(X, T).

append([], L, L).
append([H|T], L, [H|R]) :- append(T, L, R).
"""


class NotQuiescent(Exception):
    def __init__(self, ticks: int):
        super().__init__("queue not drained after %d ticks" % ticks)
        self.ticks = ticks


@dataclass
class TickReport:
    entry: QueueEntry
    derived: int
    dead_lettered: bool


class Tank:
    def __init__(self, decls: Decls, static_db: StaticDB,
                 journal: Optional[Journal] = None,
                 max_queue: Optional[int] = None,
                 solve_budget: int = DEFAULT_MAX_STEPS,
                 tick_budget: int = DEFAULT_TICK_BUDGET):
        self.decls = decls
        self.static_db = static_db
        self.store = PartitionStore()
        self.journal = journal
        self.queue = DurableQueue(journal=journal, max_len=max_queue)
        self.solve_budget = solve_budget
        self.tick_budget = tick_budget
        self.tick_count = 0
        self.dead_letters: list[dict] = []
        self.restored = False
        self.lock = threading.RLock()

    # -- construction ---------------------------------------------------------

    @classmethod
    def create(cls, journal_path: Optional[str] = None,
               max_queue: Optional[int] = None,
               solve_budget: int = DEFAULT_MAX_STEPS,
               tick_budget: int = DEFAULT_TICK_BUDGET,
               fsync: bool = True) -> "Tank":
        items, decls = parse_program(PRELUDE)
        db = StaticDB.from_items(items)
        restored = None
        journal = None
        if journal_path is not None:
            import os
            if os.path.exists(journal_path) and os.path.getsize(journal_path) > 0:
                with open(journal_path, "rb") as f:
                    restored = replay(f.read())
            journal = Journal(journal_path, fsync=fsync)
        tank = cls(decls, db, journal=journal, max_queue=max_queue,
                   solve_budget=solve_budget, tick_budget=tick_budget)
        if restored is not None:
            counts, queue_entries = restored
            for axiom, mult in counts.items():
                tank._store_add(axiom, mult)
            tank.queue.extend_unlogged(queue_entries)
            tank.store.reset_io_counter()
            tank.restored = True
        return tank

    # -- program loading -------------------------------------------------------

    def load_program(self, text: str, axioms: bool = True) -> dict:
        """Parse, validate, then apply: declarations extend the registry,
        static clauses swap into S, axioms are enqueued.  A bad program
        leaves the tank untouched.

        Loading the same file twice doubles its axioms' multiplicities;
        after a journal restore pass axioms=False so the file only
        re-establishes declarations and static clauses (the journal
        already carries the dynamic state)."""
        with self.lock:
            items, new_decls = parse_program(text, base=self.decls)
            statics = [i for i in items if isinstance(i, StaticClause)]
            pushed = [i for i in items if isinstance(i, (Fact, Rule, DClause))]
            if not axioms:
                pushed = []
            self.decls = new_decls
            if statics:
                self.static_db = self.static_db.extended(statics)
            if pushed:
                self.queue.push([QueueEntry(canonical_axiom(a), 1) for a in pushed])
            return {
                "declarations": sum(1 for i in items if not isinstance(
                    i, (StaticClause, Fact, Rule, DClause))),
                "static_clauses": len(statics),
                "axioms": len(pushed),
            }

    # -- mutations ---------------------------------------------------------------

    def insert(self, axiom: Axiom) -> None:
        with self.lock:
            self.queue.push([QueueEntry(canonical_axiom(axiom), 1)])

    def remove(self, axiom: Axiom) -> None:
        with self.lock:
            self.queue.push([QueueEntry(canonical_axiom(axiom), -1)])

    # -- derivation ---------------------------------------------------------------

    def derive(self, alpha: Axiom, beta: Axiom,
               budget: Optional[SolveBudget] = None) -> list[Axiom]:
        """Modus ponens across one fact/rule pair: unify the fact with the
        trigger, solve the guard, emit one consequence per solution."""
        if isinstance(alpha, Fact) and isinstance(beta, Rule):
            fact, rule = alpha, beta
        elif isinstance(alpha, Rule) and isinstance(beta, Fact):
            fact, rule = beta, alpha
        else:
            return []
        if (fact.name != rule.trigger.name
                or len(fact.args) != len(rule.trigger.args)):
            return []
        rule = rename_apart(rule, fresh_scope())
        s = EMPTY_SUBST
        for fa, ta in zip(fact.args, rule.trigger.args):
            s = unify(fa, ta, s)
            if s is None:
                return []
        if budget is None:
            budget = SolveBudget(self.solve_budget)
        out = []
        for sol in solve(rule.guard, self.static_db, budget, s):
            gamma = map_axiom_vars(rule.consequence, sol.resolve)
            out.append(canonical_axiom(gamma))
        return out

    # -- the tick -------------------------------------------------------------------

    def tick(self) -> Optional[TickReport]:
        with self.lock:
            entry = self.queue.pop()
            if entry is None:
                return None
            self.tick_count += 1
            alpha, n = entry.axiom, entry.delta
            name = axiom_name(alpha)
            subject = subject_of(alpha)
            budget = SolveBudget(self.solve_budget)
            derived: list[QueueEntry] = []
            try:
                if subject is not None:
                    pairs_derivable = isinstance(alpha, (Fact, Rule))
                    # pair against the uncounted generic section first: if a
                    # guard blows the budget the tick aborts before any store
                    # mutation, keeping dead-lettered ticks free of effects
                    if pairs_derivable:
                        for beta, m in self.store.read_generic(name):
                            for gamma in self.derive(alpha, beta, budget):
                                derived.append(QueueEntry(gamma, n * m))

                    def mutate(part: dict) -> list[QueueEntry]:
                        outs: list[QueueEntry] = []
                        if pairs_derivable:
                            group = [(e[0], e[1]) for e in part.get(name, [])]
                            for beta, m in group:
                                for gamma in self.derive(alpha, beta, budget):
                                    outs.append(QueueEntry(gamma, n * m))
                        apply_delta(part.setdefault(name, []), alpha, n)
                        return outs

                    derived.extend(self.store.update_partition(subject, mutate))
                else:
                    if isinstance(alpha, (Fact, Rule)):
                        for key in self.store.scan_by_name(name):
                            part = self.store.read_partition(key)
                            for beta, m in part.get(name, []):
                                for gamma in self.derive(alpha, beta, budget):
                                    derived.append(QueueEntry(gamma, n * m))
                        for beta, m in self.store.read_generic(name):
                            for gamma in self.derive(alpha, beta, budget):
                                derived.append(QueueEntry(gamma, n * m))
                    self.store.update_generic(
                        name, lambda g: apply_delta(g, alpha, n))
            except EngineError as exc:
                self.dead_letters.append({
                    "axiom": print_axiom(alpha),
                    "delta": n,
                    "error": str(exc),
                })
                if self.journal is not None:
                    self.journal.append([(OP_POP_COMMIT, b"")])
                return TickReport(entry, 0, True)
            if self.journal is not None:
                records = [(OP_PUSH, push_payload(e.axiom, e.delta, tick_member=True))
                           for e in derived]
                records.append((OP_PARTITION_WRITE, write_payload(alpha, n)))
                records.append((OP_POP_COMMIT, b""))
                self.journal.append(records)
            if derived:
                self.queue.extend_unlogged(derived)
            return TickReport(entry, len(derived), False)

    def quiesce(self, max_ticks: Optional[int] = None) -> int:
        """Tick until the queue drains; returns the number of ticks run."""
        limit = self.tick_budget if max_ticks is None else max_ticks
        done = 0
        with self.lock:
            while len(self.queue) > 0:
                if done >= limit:
                    raise NotQuiescent(done)
                self.tick()
                done += 1
        return done

    # -- inspection ----------------------------------------------------------------

    def snapshot_counts(self) -> dict[Axiom, int]:
        with self.lock:
            out: dict[Axiom, int] = {}
            for axiom, mult in self.store.all_entries():
                out[axiom] = out.get(axiom, 0) + mult
            return out

    def queue_length(self) -> int:
        return len(self.queue)

    def close(self) -> None:
        if self.journal is not None:
            self.journal.close()

    def stats(self) -> dict:
        with self.lock:
            return {
                "queue_length": len(self.queue),
                "tick_count": self.tick_count,
                "io_counter": self.store.io_counter,
                "dead_letters": list(self.dead_letters),
                "store_entries": self.store.entry_count(),
                "static_clauses": self.static_db.clause_count(),
            }

    # -- internals ----------------------------------------------------------------

    def _store_add(self, axiom: Axiom, delta: int) -> None:
        subject = subject_of(axiom)
        name = axiom_name(axiom)
        if subject is not None:
            self.store.update_partition(
                subject, lambda part: apply_delta(part.setdefault(name, []), axiom, delta))
        else:
            self.store.update_generic(name, lambda g: apply_delta(g, axiom, delta))
