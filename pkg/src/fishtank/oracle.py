"""Reference semantics, kept deliberately naive.

This module re-states what a tick means with none of the machinery the
real engine rides on: the store is a flat association list scanned in
full for every counterpart search, the queue is a plain deque, and
queries walk every entry.  No partitions, no journal, no name index.
Differential tests drive both implementations over the same operation
logs and require identical quiescent states, so any indexing or
batching bug in the engine shows up as a disagreement here.

Shares terms, lang and the static solver (those define the language
itself), but none of tank, query or storage.
"""

from __future__ import annotations

from collections import deque
from typing import Optional

from .lang import (
    Axiom,
    DAnd,
    DAtom,
    DClause,
    DGoal,
    DNot,
    Fact,
    Rule,
    SGoal,
    canonical_axiom,
    dgoal_vars,
    map_axiom_vars,
    rename_apart,
    rename_dclause,
)
from .static_engine import SolveBudget, StaticDB, solve
from .terms import EMPTY_SUBST, Term, Var, fresh_scope, unify


class OracleNotQuiescent(Exception):
    pass


def _derive(alpha: Axiom, beta: Axiom, db: StaticDB,
            budget: SolveBudget) -> list[Axiom]:
    if isinstance(alpha, Fact) and isinstance(beta, Rule):
        fact, rule = alpha, beta
    elif isinstance(alpha, Rule) and isinstance(beta, Fact):
        fact, rule = beta, alpha
    else:
        return []
    if fact.name != rule.trigger.name or len(fact.args) != len(rule.trigger.args):
        return []
    rule = rename_apart(rule, fresh_scope())
    s = EMPTY_SUBST
    for fa, ta in zip(fact.args, rule.trigger.args):
        s = unify(fa, ta, s)
        if s is None:
            return []
    out = []
    for sol in solve(rule.guard, db, budget, s):
        out.append(canonical_axiom(map_axiom_vars(rule.consequence, sol.resolve)))
    return out


def naive_run(log, db: StaticDB, max_ticks: int = 100_000,
              solve_budget: int = 1_000_000) -> dict[Axiom, int]:
    """Run an operation log to quiescence and return the axiom multiset.

    log entries are ("insert" | "remove", Axiom) pairs.
    """
    store: list[list] = []  # [axiom, mult], scanned linearly
    q: deque = deque()
    for op, axiom in log:
        q.append((canonical_axiom(axiom), 1 if op == "insert" else -1))
    ticks = 0
    while q:
        if ticks >= max_ticks:
            raise OracleNotQuiescent("no quiescence after %d ticks" % ticks)
        alpha, n = q.popleft()
        ticks += 1
        budget = SolveBudget(solve_budget)
        # counterparts come from the store as it is before alpha lands
        for beta, m in [(e[0], e[1]) for e in store]:
            for gamma in _derive(alpha, beta, db, budget):
                q.append((gamma, n * m))
        for entry in store:
            if entry[0] == alpha:
                entry[1] += n
                if entry[1] == 0:
                    store.remove(entry)
                break
        else:
            store.append([alpha, n])
    return {axiom: mult for axiom, mult in store}


def naive_query(goal: DGoal, counts: dict[Axiom, int], db: StaticDB,
                solve_budget: int = 1_000_000) -> list[dict[str, Term]]:
    """Evaluate a dynamic goal against a store snapshot by full scan."""
    budget = SolveBudget(solve_budget)
    free = dgoal_vars(goal)
    return [s.restrict(free) for s in _eval(goal, counts, db, budget, EMPTY_SUBST)]


def _eval(goal, counts, db, budget, subst):
    if isinstance(goal, SGoal):
        yield from solve(goal.goal, db, budget, subst)
        return
    if isinstance(goal, DAnd):
        for s1 in _eval(goal.left, counts, db, budget, subst):
            yield from _eval(goal.right, counts, db, budget, s1)
        return
    if isinstance(goal, DNot):
        for _ in _eval(goal.goal, counts, db, budget, subst):
            return
        yield subst
        return
    if isinstance(goal, DAtom):
        arity = len(goal.args)
        for axiom, mult in counts.items():
            if mult <= 0:
                continue
            if isinstance(axiom, Fact) and axiom.name == goal.pred \
                    and len(axiom.args) == arity:
                scope = fresh_scope()
                renamed = rename_apart(axiom, scope)
                s1 = subst
                for garg, farg in zip(goal.args, renamed.args):
                    s1 = unify(garg, farg, s1)
                    if s1 is None:
                        break
                else:
                    yield s1
            elif isinstance(axiom, DClause) and axiom.head.pred == goal.pred \
                    and len(axiom.head.args) == arity:
                rc = rename_dclause(axiom, fresh_scope())
                s1 = subst
                for garg, harg in zip(goal.args, rc.head.args):
                    s1 = unify(garg, harg, s1)
                    if s1 is None:
                        break
                else:
                    yield from _eval(rc.body, counts, db, budget, s1)
        return
    raise TypeError("not a dynamic goal: %r" % (goal,))
