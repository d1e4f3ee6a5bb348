"""Resolution over static clauses, plus the charCodes and parse builtins.

solve() enumerates answers depth first in clause order, one substitution
per answer.  Negation is negation as failure: \\+ G succeeds when G has
no solution, binding nothing.  Every clause attempt burns one unit of a
step budget; pathological programs surface as BudgetExhausted instead of
a hang.

parse/3 interprets grammars stored as prod(Head, Body) static clauses.
Body forms:

    eps              consume nothing
    seq(B1, B2)      B1 then B2 on the remaining input
    t(Code)          consume exactly the code
    cond(V, G)       consume one code, bind V to it, then require G
    nt(Sym)          try each production of Sym, in clause order

Production lookup is ordinary static resolution of prod(Sym, Body), so a
production may carry a computing body, e.g.

    prod(str(W, Cs), eps) :- charCodes(W, Cs).

which converts collected character codes to a string while consuming no
input.  cond goals are reified terms: not/1, and/2 and true are goal
constructors, anything else is a predicate call.
"""

from __future__ import annotations

from typing import Iterator, Optional

from .lang import (
    And,
    Atom,
    Goal,
    Not,
    StaticClause,
    TRUE,
    TrueGoal,
    rename_clause,
)
from .terms import (
    Compound,
    EMPTY_SUBST,
    Int,
    NIL,
    Str,
    Subst,
    Term,
    Var,
    fresh_scope,
    iter_list,
    make_list,
    unify,
)

DEFAULT_MAX_STEPS = 1_000_000


class EngineError(Exception):
    pass


class BudgetExhausted(EngineError):
    pass


class BuiltinTypeError(EngineError):
    pass


class SolveBudget:
    __slots__ = ("remaining",)

    def __init__(self, max_steps: int = DEFAULT_MAX_STEPS):
        self.remaining = max_steps

    def step(self) -> None:
        self.remaining -= 1
        if self.remaining < 0:
            raise BudgetExhausted("solve budget exhausted")


class StaticDB:
    """Immutable bag of static clauses indexed by (name, arity).

    Mutation happens by swapping in an extended copy, so concurrent
    readers always see a consistent clause set.
    """

    def __init__(self, clause_map: Optional[dict] = None):
        self._clauses: dict[tuple[str, int], list[StaticClause]] = clause_map or {}

    @staticmethod
    def from_items(items) -> "StaticDB":
        db = StaticDB()
        return db.extended(c for c in items if isinstance(c, StaticClause))

    def clauses_for(self, key: tuple[str, int]) -> list[StaticClause]:
        return self._clauses.get(key, [])

    def extended(self, clauses) -> "StaticDB":
        cmap = {k: list(v) for k, v in self._clauses.items()}
        for c in clauses:
            cmap.setdefault((c.head.pred, len(c.head.args)), []).append(c)
        return StaticDB(cmap)

    def clause_count(self) -> int:
        return sum(len(v) for v in self._clauses.values())


def solve(goal: Goal, db: StaticDB, budget: SolveBudget,
          subst: Subst = EMPTY_SUBST) -> Iterator[Subst]:
    """Public entry point; converts an exhausted interpreter stack into
    the same error a spent step budget raises, so callers see one
    failure mode for runaway programs."""
    it = _solve(goal, db, budget, subst)
    while True:
        try:
            yield next(it)
        except StopIteration:
            return
        except RecursionError:
            raise BudgetExhausted("resolution depth exceeded") from None


def _solve(goal: Goal, db: StaticDB, budget: SolveBudget,
           subst: Subst = EMPTY_SUBST) -> Iterator[Subst]:
    if isinstance(goal, TrueGoal):
        yield subst
        return
    if isinstance(goal, And):
        for s1 in _solve(goal.left, db, budget, subst):
            yield from _solve(goal.right, db, budget, s1)
        return
    if isinstance(goal, Not):
        budget.step()
        for _ in _solve(goal.goal, db, budget, subst):
            return
        yield subst
        return
    if isinstance(goal, Atom):
        key = (goal.pred, len(goal.args))
        if key == ("charCodes", 2):
            yield from _charcodes(goal.args[0], goal.args[1], subst)
            return
        if key == ("parse", 3):
            yield from _parse_builtin(goal.args, db, budget, subst)
            return
        for clause in db.clauses_for(key):
            budget.step()
            rc = rename_clause(clause, fresh_scope())
            s1 = subst
            ok = True
            for garg, harg in zip(goal.args, rc.head.args):
                s1 = unify(garg, harg, s1)
                if s1 is None:
                    ok = False
                    break
            if ok:
                yield from _solve(rc.body, db, budget, s1)
        return
    raise TypeError("not a goal: %r" % (goal,))


# ---------------------------------------------------------------------------
# charCodes/2


def _charcodes(s_arg: Term, cs_arg: Term, subst: Subst) -> Iterator[Subst]:
    s_val = subst.resolve(s_arg)
    if isinstance(s_val, Str):
        codes = make_list([Int(ord(ch)) for ch in s_val.value])
        out = unify(cs_arg, codes, subst)
        if out is not None:
            yield out
        return
    if isinstance(s_val, Var):
        items, tail = iter_list(subst.resolve(cs_arg))
        if tail != NIL:
            raise BuiltinTypeError("charCodes: both sides unbound or list not closed")
        chars = []
        for item in items:
            if not isinstance(item, Int) or not (0 <= item.value <= 0x10FFFF):
                raise BuiltinTypeError("charCodes: code list must hold character codes")
            chars.append(chr(item.value))
        out = unify(s_arg, Str("".join(chars)), subst)
        if out is not None:
            yield out
        return
    raise BuiltinTypeError("charCodes: first argument must be a string or variable")


# ---------------------------------------------------------------------------
# parse/3


def term_to_goal(t: Term, subst: Subst) -> Goal:
    """Reify a term as a static goal: not/1, and/2, true are connectives,
    everything else is a predicate call."""
    t = subst.walk(t)
    if isinstance(t, Var):
        raise BuiltinTypeError("parse: unbound goal in cond")
    if not isinstance(t, Compound):
        raise BuiltinTypeError("parse: goal must be a compound term")
    if t.name == "not" and len(t.args) == 1:
        return Not(term_to_goal(t.args[0], subst))
    if t.name == "and" and len(t.args) == 2:
        return And(term_to_goal(t.args[0], subst), term_to_goal(t.args[1], subst))
    if t.name == "true" and not t.args:
        return TRUE
    return Atom(t.name, t.args)


def _parse_builtin(args, db: StaticDB, budget: SolveBudget,
                   subst: Subst) -> Iterator[Subst]:
    sym, input_arg, rest_arg = args
    items, tail = iter_list(subst.resolve(input_arg))
    if tail != NIL:
        raise BuiltinTypeError("parse: input must be a closed code list")
    codes = []
    for item in items:
        if not isinstance(item, Int):
            raise BuiltinTypeError("parse: input codes must be ground integers")
        codes.append(item)
    for s1, pos in _parse_sym(sym, codes, 0, db, budget, subst):
        out = unify(rest_arg, make_list(codes[pos:]), s1)
        if out is not None:
            yield out


def _parse_sym(sym: Term, codes: list, pos: int, db: StaticDB,
               budget: SolveBudget, subst: Subst):
    sym = subst.walk(sym)
    if isinstance(sym, Var):
        raise BuiltinTypeError("parse: unbound grammar symbol")
    if not isinstance(sym, Compound):
        raise BuiltinTypeError("parse: grammar symbol must be a compound term")
    name, arity = sym.name, len(sym.args)
    if name == "eps" and arity == 0:
        yield subst, pos
        return
    if name == "seq" and arity == 2:
        for s1, p1 in _parse_sym(sym.args[0], codes, pos, db, budget, subst):
            yield from _parse_sym(sym.args[1], codes, p1, db, budget, s1)
        return
    if name == "t" and arity == 1:
        if pos < len(codes):
            s1 = unify(sym.args[0], codes[pos], subst)
            if s1 is not None:
                yield s1, pos + 1
        return
    if name == "cond" and arity == 2:
        if pos < len(codes):
            s1 = unify(sym.args[0], codes[pos], subst)
            if s1 is not None:
                goal = term_to_goal(sym.args[1], s1)
                for s2 in _solve(goal, db, budget, s1):
                    yield s2, pos + 1
        return
    if name == "nt" and arity == 1:
        budget.step()
        body_var = Var("Body", fresh_scope())
        lookup = Atom("prod", (sym.args[0], body_var))
        for s1 in _solve(lookup, db, budget, subst):
            yield from _parse_sym(body_var, codes, pos, db, budget, s1)
        return
    raise BuiltinTypeError("parse: unknown grammar body %s/%d" % (name, arity))
