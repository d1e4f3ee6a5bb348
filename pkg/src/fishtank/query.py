"""Read-side evaluation of dynamic goals against a tank.

A DAtom resolves against store entries with positive multiplicity:
dynamic clauses by head, and facts directly (a fact behaves like a
clause with body true, which is what makes derived indexes such as
searchIndex queryable).  Conjunction evaluates left to right, negation
is negation as failure, and SGoal delegates to the static engine.

Indexing contract: when a predicate has any concrete entries, the first
argument of its DAtoms must be ground by evaluation time so the lookup
can hit exactly one partition (plus the generic side table).  A
non-ground first argument over such a predicate raises UnindexedQuery
rather than silently scanning the store.
"""

from __future__ import annotations

from typing import Iterator, Optional

from .lang import (
    DAnd,
    DAtom,
    DClause,
    DGoal,
    DNot,
    Fact,
    SGoal,
    _map_term,
    dgoal_vars,
    rename_dclause,
)
from .static_engine import BudgetExhausted, SolveBudget, solve
from .terms import (
    EMPTY_SUBST,
    Subst,
    Term,
    Var,
    canonical_encode,
    fresh_scope,
    is_ground,
    unify,
)


class UnindexedQuery(Exception):
    pass


def query(goal: DGoal, tank, limit: Optional[int] = None,
          budget: Optional[SolveBudget] = None) -> list[dict[str, Term]]:
    """Evaluate a dynamic goal; returns bindings for the goal's variables,
    at most limit of them, in deterministic store order."""
    if budget is None:
        budget = SolveBudget(tank.solve_budget)
    free = dgoal_vars(goal)
    results = []
    with tank.lock:
        # clause chains recurse one eval frame per hop; surface runaway
        # recursion as the same error a spent step budget produces
        try:
            for s in _eval(goal, tank, budget, EMPTY_SUBST):
                results.append(s.restrict(free))
                if limit is not None and len(results) >= limit:
                    break
        except RecursionError:
            raise BudgetExhausted("resolution depth exceeded") from None
    return results


def query_count(goal: DGoal, tank, limit: Optional[int] = None) -> int:
    return len(query(goal, tank, limit=limit))


def _eval(goal: DGoal, tank, budget: SolveBudget,
          subst: Subst) -> Iterator[Subst]:
    if isinstance(goal, SGoal):
        yield from solve(goal.goal, tank.static_db, budget, subst)
        return
    if isinstance(goal, DAnd):
        for s1 in _eval(goal.left, tank, budget, subst):
            yield from _eval(goal.right, tank, budget, s1)
        return
    if isinstance(goal, DNot):
        budget.step()
        for _ in _eval(goal.goal, tank, budget, subst):
            return
        yield subst
        return
    if isinstance(goal, DAtom):
        yield from _eval_datom(goal, tank, budget, subst)
        return
    raise TypeError("not a dynamic goal: %r" % (goal,))


def _eval_datom(goal: DAtom, tank, budget: SolveBudget,
                subst: Subst) -> Iterator[Subst]:
    store = tank.store
    first = subst.resolve(goal.args[0]) if goal.args else None
    if first is not None and is_ground(first):
        part = store.read_partition(canonical_encode(first))
        candidates = list(part.get(goal.pred, []))
        candidates.extend(store.read_generic(goal.pred))
    else:
        if store.has_concrete(goal.pred):
            raise UnindexedQuery(
                "first argument of %s must be ground: concrete entries exist"
                % goal.pred)
        candidates = store.read_generic(goal.pred)
    arity = len(goal.args)
    for axiom, mult in candidates:
        if mult <= 0:
            continue
        budget.step()
        if isinstance(axiom, Fact) and len(axiom.args) == arity:
            scope = fresh_scope()
            head_args = tuple(
                _map_term(a, lambda v: Var(v.name, scope)) for a in axiom.args)
            s1 = _unify_args(goal.args, head_args, subst)
            if s1 is not None:
                yield s1
        elif isinstance(axiom, DClause) and len(axiom.head.args) == arity:
            rc = rename_dclause(axiom, fresh_scope())
            s1 = _unify_args(goal.args, rc.head.args, subst)
            if s1 is not None:
                yield from _eval(rc.body, tank, budget, s1)
        # rules grouped under the same fact name never answer queries


def _unify_args(goal_args, head_args, subst: Subst) -> Optional[Subst]:
    s = subst
    for garg, harg in zip(goal_args, head_args):
        s = unify(garg, harg, s)
        if s is None:
            return None
    return s
