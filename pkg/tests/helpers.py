"""Shared test machinery: randomized instances and reference scanners.

The instance generator builds programs whose rules only derive from a
lower-numbered fact name to a strictly higher one, so every derivation
chain gets longer names and must stop: quiescence is guaranteed by
construction no matter how ops interleave or what sign the deltas have.
"""

from __future__ import annotations

import random

from fishtank import Tank, parse_axiom, print_axiom
from fishtank.lang import DClause, Fact, Rule
from fishtank.oracle import naive_run


def make_tank(program: str | None = None, **kw) -> Tank:
    tank = Tank.create(**kw)
    if program:
        tank.load_program(program)
        tank.quiesce()
    return tank


def snap(tank: Tank) -> dict[str, int]:
    return {print_axiom(a): m for a, m in tank.snapshot_counts().items()}


# ---------------------------------------------------------------------------
# randomized instances

ATOMS = ["a", "b", "c"]
INTS = ["1", "2", "3", "4"]


def gen_instance(rng: random.Random):
    """Return (decl_text, rule_texts, ops).

    ops is a list of ("insert" | "remove", axiom_text) over the declared
    fact names.  Rule consequences always name a strictly higher fact
    than their trigger, including inside emitted rules, which bounds
    every cascade.
    """
    n_names = rng.randint(3, 7)
    names = ["p%d" % i for i in range(n_names)]
    arities = {nm: rng.randint(1, 2) for nm in names}
    consts = rng.sample(ATOMS + INTS, rng.randint(2, 4))
    decl_text = "".join(":- fact %s/%d.\n" % (nm, arities[nm]) for nm in names)
    decl_text += ":- dynamic view/2.\n"

    rule_texts = []
    for _ in range(rng.randint(1, 6)):
        i = rng.randrange(0, n_names - 1)
        j = rng.randrange(i + 1, n_names)
        tvars: list[str] = []
        targs: list[str] = []
        for k in range(arities[names[i]]):
            if rng.random() < 0.7:
                v = "X%d" % k
                tvars.append(v)
                targs.append(v)
            else:
                targs.append(rng.choice(consts))
        guard = None
        gvars: list[str] = []
        roll = rng.random()
        if roll < 0.35:
            picks = rng.sample(consts, rng.randint(1, min(2, len(consts))))
            guard = "member(Z, [%s])" % ", ".join(picks)
            gvars.append("Z")
        elif roll < 0.45:
            guard = 'charCodes("ab", Cs)'
            gvars.append("Cs")
        pool = tvars + gvars + consts

        kind = rng.random()
        if kind < 0.15:
            # the emitted rule's consequence must clear the OUTER trigger
            # too: an inner rule ending at or below i can feed facts back
            # into this rule's trigger and cycle forever
            k2 = rng.randrange(0, n_names - 1)
            l2 = rng.randrange(max(i, k2) + 1, n_names)
            inner_tvars = ["Y%d" % q for q in range(arities[names[k2]])]
            inner_pool = inner_tvars + pool
            inner_args = ", ".join(rng.choice(inner_pool)
                                   for _ in range(arities[names[l2]]))
            cons = "(%s(%s) ~> %s(%s))" % (
                names[k2], ", ".join(inner_tvars), names[l2], inner_args)
        elif kind < 0.25:
            cons = "(view(%s, %s) :- true)" % (
                rng.choice(pool), rng.choice(pool))
        else:
            cons = "%s(%s)" % (
                names[j],
                ", ".join(rng.choice(pool) for _ in range(arities[names[j]])))
        head = "%s(%s)" % (names[i], ", ".join(targs))
        if guard:
            rule_texts.append("%s { %s } ~> %s." % (head, guard, cons))
        else:
            rule_texts.append("%s ~> %s." % (head, cons))

    ops: list[tuple[str, str]] = []
    inserted: list[str] = []
    for _ in range(rng.randint(3, 34)):
        if inserted and rng.random() < 0.35:
            ops.append(("remove", rng.choice(inserted)))
        else:
            nm = rng.choice(names)
            text = "%s(%s)" % (
                nm, ", ".join(rng.choice(consts) for _ in range(arities[nm])))
            op = "insert" if rng.random() < 0.8 else "remove"
            ops.append((op, text))
            if op == "insert":
                inserted.append(text)
    return decl_text, rule_texts, ops


def run_tank_instance(decl_text, rule_texts, ops, **kw) -> dict[str, int]:
    tank = Tank.create(**kw)
    tank.load_program(decl_text + "".join(t + "\n" for t in rule_texts))
    for op, text in ops:
        axiom = parse_axiom(text, tank.decls)
        (tank.insert if op == "insert" else tank.remove)(axiom)
    tank.quiesce()
    return snap(tank)


def run_oracle_instance(decl_text, rule_texts, ops) -> dict[str, int]:
    tank = Tank.create()
    tank.load_program(decl_text, axioms=True)
    log = [("insert", parse_axiom(t.rstrip("."), tank.decls))
           for t in rule_texts]
    log += [(op, parse_axiom(text, tank.decls)) for op, text in ops]
    counts = naive_run(log, tank.static_db)
    return {print_axiom(a): m for a, m in counts.items()}


def as_op_multiset(decl_text, rule_texts, ops):
    """Everything as ops, program rules included, for permutation runs."""
    return [("insert", t.rstrip(".")) for t in rule_texts] + list(ops)


def run_ops_only(decl_text, all_ops, rng=None, **kw) -> dict[str, int]:
    """Load declarations only, push each op, quiesce at the end (and at
    random points along the way when an rng is supplied)."""
    tank = Tank.create(**kw)
    tank.load_program(decl_text)
    for op, text in all_ops:
        axiom = parse_axiom(text, tank.decls)
        (tank.insert if op == "insert" else tank.remove)(axiom)
        if rng is not None and rng.random() < 0.15:
            tank.quiesce()
    tank.quiesce()
    return snap(tank)


# ---------------------------------------------------------------------------
# random program items for print/parse round-trips
#
# Shapes are limited to what the printer itself produces (canonical
# variable names, list sugar, parenthesized nested consequences), so a
# round-trip mismatch always indicts print/parse, not the generator.

RT_DECLS = (
    ":- fact f1/1.\n:- fact f2/2.\n:- fact f3/3.\n"
    ":- static s1/1.\n:- static s2/2.\n"
    ":- dynamic d1/1.\n:- dynamic d2/2.\n"
)

_STRS = ["", "a b", 'quo"te', "back\\slash", "line\nnext", "tab\tchar", "h\u00e9llo"]
_VARNAMES = ["X", "Y", "Z", "W", "Acc", "T0"]


def gen_term(rng: random.Random, vars_pool: list[str], depth: int = 0):
    r = rng.random()
    if depth >= 3:
        r = min(r, 0.69)
    if r < 0.18 and vars_pool:
        return rng.choice(vars_pool)
    if r < 0.35:
        return str(rng.randint(-2**63, 2**63 - 1) if rng.random() < 0.2
                   else rng.randint(-9, 9))
    if r < 0.5:
        s = rng.choice(_STRS)
        return '"%s"' % (s.replace("\\", "\\\\").replace('"', '\\"')
                          .replace("\n", "\\n").replace("\t", "\\t"))
    if r < 0.7:
        return rng.choice(["a", "b", "c"])
    if r < 0.85:
        n = rng.randint(0, 3)
        items = ", ".join(gen_term(rng, vars_pool, depth + 1) for _ in range(n))
        if n and rng.random() < 0.25 and vars_pool:
            return "[%s|%s]" % (items, rng.choice(vars_pool))
        return "[%s]" % items
    name = rng.choice(["g", "h", "k"])
    n = rng.randint(1, 3)
    return "%s(%s)" % (name, ", ".join(gen_term(rng, vars_pool, depth + 1)
                                       for _ in range(n)))


def _gen_fact_atom(rng, vars_pool):
    arity = rng.randint(1, 3)
    return "f%d(%s)" % (arity, ", ".join(gen_term(rng, vars_pool)
                                         for _ in range(arity)))


def _gen_static_atom(rng, vars_pool):
    arity = rng.randint(1, 2)
    return "s%d(%s)" % (arity, ", ".join(gen_term(rng, vars_pool)
                                         for _ in range(arity)))


def _gen_dyn_atom(rng, vars_pool):
    arity = rng.randint(1, 2)
    return "d%d(%s)" % (arity, ", ".join(gen_term(rng, vars_pool)
                                         for _ in range(arity)))


def _gen_sgoal(rng, vars_pool, depth=0):
    r = rng.random()
    if r < 0.1:
        return "true"
    if r < 0.55 or depth >= 2:
        return _gen_static_atom(rng, vars_pool)
    if r < 0.75:
        inner = _gen_sgoal(rng, vars_pool, depth + 1)
        if "," in inner and not inner.startswith("("):
            inner = "(%s)" % inner
        return "\\+ %s" % inner
    return "%s, %s" % (_gen_sgoal(rng, vars_pool, depth + 1),
                       _gen_sgoal(rng, vars_pool, depth + 1))


def _gen_dgoal(rng, vars_pool, depth=0):
    r = rng.random()
    if r < 0.1:
        return "true"
    if r < 0.6 or depth >= 2:
        return (_gen_dyn_atom if rng.random() < 0.6 else _gen_fact_atom)(
            rng, vars_pool)
    if r < 0.75:
        inner = _gen_dgoal(rng, vars_pool, depth + 1)
        if "," in inner and not inner.startswith("("):
            inner = "(%s)" % inner
        return "\\+ %s" % inner
    return "%s, %s" % (_gen_dgoal(rng, vars_pool, depth + 1),
                       _gen_dgoal(rng, vars_pool, depth + 1))


def gen_item(rng: random.Random) -> str:
    """One random program statement (declared by RT_DECLS), as text."""
    kind = rng.random()
    if kind < 0.2:
        return _gen_fact_atom(rng, rng.sample(_VARNAMES, 3)) + "."
    if kind < 0.4:  # static clause; body vars from the head plus fresh ones
        head_vars = rng.sample(_VARNAMES, 3)
        return "%s :- %s." % (_gen_static_atom(rng, head_vars),
                              _gen_sgoal(rng, head_vars + ["V9"]))
    if kind < 0.55:  # top-level dynamic clause: body vars come from the head
        head_vars = rng.sample(_VARNAMES, 2)
        head = _gen_dyn_atom(rng, head_vars)
        return "%s :- %s." % (head, _gen_dgoal(rng, _head_vars_of(head)))
    # rule, possibly guarded, possibly with a nested consequence
    tvars = rng.sample(_VARNAMES, rng.randint(1, 3))
    trigger = "f%d(%s)" % (len(tvars), ", ".join(tvars))
    guard = None
    bound = list(tvars)
    if rng.random() < 0.5:
        gvars = ["G"] if rng.random() < 0.6 else []
        guard = _gen_static_atom(rng, tvars + gvars)
        bound += [v for v in gvars if v in guard]
    r = rng.random()
    if r < 0.6:
        cons = "f%d(%s)" % (len(bound[:3]) or 1,
                            ", ".join(bound[:3] or [gen_term(rng, [])]))
    elif r < 0.8:
        ivars = ["I1", "I2"][: rng.randint(1, 2)]
        inner_cons = "f%d(%s)" % (
            min(2, len(ivars + bound)),
            ", ".join((ivars + bound)[: min(2, len(ivars + bound))]))
        cons = "(f%d(%s) ~> %s)" % (len(ivars), ", ".join(ivars), inner_cons)
    else:
        hvars = bound[:1] + ["H1"]
        head = "d2(%s, %s)" % (hvars[0], hvars[1])
        cons = "(%s :- %s)" % (head, _gen_dgoal(rng, hvars + bound))
    if guard:
        return "%s { %s } ~> %s." % (trigger, guard, cons)
    return "%s ~> %s." % (trigger, cons)


def _head_vars_of(head_text: str) -> list[str]:
    import re

    return sorted(set(re.findall(r"\b[A-Z][A-Za-z0-9_]*\b", head_text)))


# ---------------------------------------------------------------------------
# engine-side tokenizer: the shipped grammar interpreted by parse/3

_GRAMMAR_DB = None


def grammar_db():
    global _GRAMMAR_DB
    if _GRAMMAR_DB is None:
        from fishtank import parse_program
        from fishtank.lang import StaticClause
        from fishtank.static_engine import StaticDB
        from fishtank.tank import PRELUDE
        from fishtank.tweetlog import asset_text

        items, decls = parse_program(PRELUDE)
        gitems, _ = parse_program(asset_text("grammar.clg"), base=decls)
        _GRAMMAR_DB = StaticDB.from_items(
            [i for i in items + gitems if isinstance(i, StaticClause)])
    return _GRAMMAR_DB


def engine_tokenize(text: str):
    """Tokenize via the grammar; [(kind, payload)] or None when there is
    no complete parse.  Asserts the grammar stayed unambiguous."""
    from fishtank.lang import Atom
    from fishtank.static_engine import SolveBudget, solve
    from fishtank.terms import Compound, Int, Str, Var

    nil = Compound("[]", ())
    codes = nil
    for c in reversed(text):
        codes = Compound(".", (Int(ord(c)), codes))
    xs = Var("Xs", 999001)
    goal = Atom("parse", (
        Compound("nt", (Compound("tokens", (xs,)),)), codes, nil))
    sols = list(solve(goal, grammar_db(), SolveBudget(2_000_000)))
    assert len(sols) <= 1, "ambiguous tokenization of %r" % text
    if not sols:
        return None
    out = []
    term = sols[0].resolve(xs)
    while isinstance(term, Compound) and term.name == "." and len(term.args) == 2:
        tok, term = term.args
        assert isinstance(tok, Compound) and len(tok.args) == 1
        payload = tok.args[0]
        assert isinstance(payload, Str)
        out.append((tok.name, payload.value))
    assert term == nil, "improper token list: %r" % (term,)
    return out


# ---------------------------------------------------------------------------
# reference tweet scanner (independent of parse/3 and the grammar file)

_SPECIAL = {" ", "@", "#"}


def scan_tweet(text: str):
    """Maximal-munch tokenizer; returns [(kind, payload)] or None.

    word: longest run outside {space, @, #}; '@'/'#' plus a nonempty run
    makes userID/hashtag; runs of spaces separate tokens and may trail;
    leading space or a bare marker is a failure.
    """
    out = []
    i, n = 0, len(text)
    if n and text[0] == " ":
        return None
    while i < n:
        c = text[i]
        if c == " ":
            while i < n and text[i] == " ":
                i += 1
            continue
        if c in ("@", "#"):
            j = i + 1
            while j < n and text[j] not in _SPECIAL:
                j += 1
            if j == i + 1:
                return None
            out.append(("userID" if c == "@" else "hashtag", text[i + 1:j]))
            i = j
        else:
            j = i
            while j < n and text[j] not in _SPECIAL:
                j += 1
            out.append(("word", text[i:j]))
            i = j
    return out
