"""Surface syntax for .clg programs: parser, printer, and load-time checks.

A program is a sequence of statements, each ended by a period:

    :- fact tweeted/3.                          declarations
    :- static replaceText/4.
    :- dynamic timeline/3.

    follows(user("a"), user("b"), 5).           fact
    replaceText(text(T), T, T2, text(T2)).      static clause (body true)
    member(X, [X|_]).                           static clause
    timeline(U, T, E) :- true.                  dynamic clause

    f(X) { member(Y, [1, 2]) } ~> g(X, Y).      rule; guard in braces
    f(X) ~> (g(X) ~> (h(X) :- true)).           rules nest to the right

Every predicate or fact name must be declared before use, with one of the
three kinds (fact, static, dynamic).  The kinds share nothing: using a
name outside its declared kind is an error, and the same name cannot be
declared under two kinds.  Guards may mention static predicates only.
Comments run from % to end of line.  Strings know four escapes: \\" \\\\
\\n \\t.  Integers are 64-bit signed.

Variables in a rule consequence (or a clause body) must be bound somewhere:
by the trigger, by the guard, or by an enclosing binder when consequences
nest (a nested rule's trigger and a nested clause's head bind their own
variables).  Anything else would emit axioms with dangling variables, so
it is rejected at load time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .terms import (
    INT_MAX,
    INT_MIN,
    Compound,
    Int,
    NIL,
    CONS,
    Str,
    Term,
    Var,
    canonical_encode,
    cons,
    is_ground,
)

# ---------------------------------------------------------------------------
# abstract syntax


@dataclass(frozen=True)
class Declaration:
    kind: str  # "fact" | "static" | "dynamic"
    name: str
    arity: int


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class TrueGoal:
    pass


TRUE = TrueGoal()


@dataclass(frozen=True)
class And:
    left: "Goal"
    right: "Goal"


@dataclass(frozen=True)
class Not:
    goal: "Goal"


Goal = Union[Atom, And, Not, TrueGoal]


@dataclass(frozen=True)
class DAtom:
    pred: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class DAnd:
    left: "DGoal"
    right: "DGoal"


@dataclass(frozen=True)
class DNot:
    goal: "DGoal"


@dataclass(frozen=True)
class SGoal:
    goal: Goal


DGoal = Union[DAtom, DAnd, DNot, SGoal]


@dataclass(frozen=True)
class Fact:
    name: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class Rule:
    trigger: Fact
    guard: Goal
    consequence: "Axiom"


@dataclass(frozen=True)
class DClause:
    head: DAtom
    body: DGoal


Axiom = Union[Fact, Rule, DClause]


@dataclass(frozen=True)
class StaticClause:
    head: Atom
    body: Goal


Item = Union[Declaration, Fact, Rule, DClause, StaticClause]

KINDS = ("fact", "static", "dynamic")

# The parsing builtins are static predicates that exist in every program.
BUILTIN_PREDS = {("charCodes", 2), ("parse", 3)}
BUILTIN_NAMES = {name for name, _ in BUILTIN_PREDS}


# ---------------------------------------------------------------------------
# errors


class LangError(Exception):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__("%s (line %d, column %d)" % (message, line, col))
        self.message = message
        self.line = line
        self.col = col


class ParseError(LangError):
    pass


class UndeclaredSymbol(LangError):
    pass


class ArityMismatch(LangError):
    pass


class NonStaticGuard(LangError):
    pass


class UnboundConsequenceVariable(LangError):
    pass


class NamespaceClash(LangError):
    pass


# ---------------------------------------------------------------------------
# declaration registry


class Decls:
    """Tracks declared names.  One kind per name, (name, arity) pairs per kind."""

    def __init__(self):
        self.kind_by_name: dict[str, str] = {}
        self.arities: set[tuple[str, int]] = set()
        for name, arity in BUILTIN_PREDS:
            self.kind_by_name[name] = "static"
            self.arities.add((name, arity))

    def copy(self) -> "Decls":
        d = Decls.__new__(Decls)
        d.kind_by_name = dict(self.kind_by_name)
        d.arities = set(self.arities)
        return d

    def declare(self, kind: str, name: str, arity: int, line=0, col=0) -> None:
        if any(name == bn for bn, _ in BUILTIN_PREDS):
            raise NamespaceClash(
                "'%s' is a builtin and cannot be declared" % name, line, col)
        prev = self.kind_by_name.get(name)
        if prev is not None and prev != kind:
            raise NamespaceClash(
                "name '%s' already declared as %s" % (name, prev), line, col)
        # Exact re-declaration is a no-op so assets can be loaded twice
        # (the axioms then count twice, which is the caller's problem).
        self.kind_by_name[name] = kind
        self.arities.add((name, arity))

    def kind_of(self, name: str) -> Optional[str]:
        return self.kind_by_name.get(name)

    def check_arity(self, name: str, arity: int, line=0, col=0) -> None:
        if (name, arity) not in self.arities:
            raise ArityMismatch(
                "'%s' not declared with arity %d" % (name, arity), line, col)


# ---------------------------------------------------------------------------
# tokenizer

_PUNCT2 = ("~>", ":-")


@dataclass
class _Tok:
    kind: str  # ident var int str punct eof
    value: object
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def err(msg, l=None, c=None):
        raise ParseError(msg, l if l is not None else line, c if c is not None else col)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "var" if (ch == "_" or ch.isupper()) else "ident"
            toks.append(_Tok(kind, word, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            value = int(text[i:j])
            if not (INT_MIN <= value <= INT_MAX):
                err("integer out of 64-bit range", start_line, start_col)
            toks.append(_Tok("int", value, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch == '"':
            i += 1
            col += 1
            buf = []
            while True:
                if i >= n or text[i] == "\n":
                    err("unterminated string", start_line, start_col)
                c = text[i]
                if c == '"':
                    i += 1
                    col += 1
                    break
                if c == "\\":
                    if i + 1 >= n:
                        err("unterminated string", start_line, start_col)
                    esc = text[i + 1]
                    if esc == '"':
                        buf.append('"')
                    elif esc == "\\":
                        buf.append("\\")
                    elif esc == "n":
                        buf.append("\n")
                    elif esc == "t":
                        buf.append("\t")
                    else:
                        err("unknown escape \\%s" % esc)
                    i += 2
                    col += 2
                    continue
                buf.append(c)
                i += 1
                col += 1
            toks.append(_Tok("str", "".join(buf), start_line, start_col))
            continue
        two = text[i:i + 2]
        if two in _PUNCT2 or two == "\\+":
            toks.append(_Tok("punct", two, start_line, start_col))
            i += 2
            col += 2
            continue
        if ch in "()[]{},|./":
            toks.append(_Tok("punct", ch, start_line, start_col))
            i += 1
            col += 1
            continue
        err("unexpected character %r" % ch)
    toks.append(_Tok("eof", None, line, col))
    return toks


# ---------------------------------------------------------------------------
# raw parse trees (before declaration-driven classification)


@dataclass
class _RAtom:
    name: str
    args: tuple[Term, ...]
    line: int
    col: int


@dataclass
class _RTrue:
    line: int
    col: int


@dataclass
class _RAnd:
    left: object
    right: object


@dataclass
class _RNot:
    goal: object
    line: int
    col: int


@dataclass
class _RBare:
    head: _RAtom


@dataclass
class _RRule:
    head: _RAtom
    guard: object  # raw goal or None
    cons: object   # _RBare | _RRule | _RClause


@dataclass
class _RClause:
    head: _RAtom
    body: object


@dataclass
class _RDecl:
    kind: str
    name: str
    arity: int
    line: int
    col: int


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0
        self.anon = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def err(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.line, tok.col)

    def expect(self, value) -> _Tok:
        t = self.peek()
        if t.kind != "punct" or t.value != value:
            self.err("expected '%s'" % value)
        return self.next()

    def at_punct(self, value) -> bool:
        t = self.peek()
        return t.kind == "punct" and t.value == value

    # -- statements --------------------------------------------------------

    def program(self) -> list:
        items = []
        while self.peek().kind != "eof":
            items.append(self.statement())
        return items

    def statement(self):
        if self.at_punct(":-"):
            return self.directive()
        head = self.atomish()
        if self.at_punct("."):
            self.next()
            return _RBare(head)
        if self.at_punct("{") or self.at_punct("~>"):
            stmt = self.rule_tail(head)
            self.expect(".")
            return stmt
        if self.at_punct(":-"):
            self.next()
            body = self.goal()
            self.expect(".")
            return _RClause(head, body)
        self.err("expected '.', '{', '~>' or ':-' after statement head")

    def directive(self) -> _RDecl:
        t = self.expect(":-")
        kind_tok = self.peek()
        if kind_tok.kind != "ident" or kind_tok.value not in KINDS:
            self.err("expected one of fact/static/dynamic in declaration")
        self.next()
        name_tok = self.peek()
        if name_tok.kind != "ident":
            self.err("expected a name in declaration")
        self.next()
        self.expect("/")
        ar = self.peek()
        if ar.kind != "int" or ar.value < 0:
            self.err("expected an arity")
        self.next()
        self.expect(".")
        return _RDecl(kind_tok.value, name_tok.value, ar.value, t.line, t.col)

    def rule_tail(self, head: _RAtom) -> _RRule:
        guard = None
        if self.at_punct("{"):
            self.next()
            guard = self.goal()
            self.expect("}")
        self.expect("~>")
        cons = self.axiom_expr()
        return _RRule(head, guard, cons)

    def axiom_expr(self):
        if self.at_punct("("):
            self.next()
            inner = self.axiom_expr()
            self.expect(")")
            return inner
        head = self.atomish()
        if self.at_punct("{") or self.at_punct("~>"):
            return self.rule_tail(head)
        if self.at_punct(":-"):
            self.next()
            return _RClause(head, self.goal())
        return _RBare(head)

    # -- goals --------------------------------------------------------------

    def goal(self):
        left = self.goal_unary()
        if self.at_punct(","):
            self.next()
            return _RAnd(left, self.goal())
        return left

    def goal_unary(self):
        t = self.peek()
        if t.kind == "punct" and t.value == "\\+":
            self.next()
            return _RNot(self.goal_unary(), t.line, t.col)
        if t.kind == "punct" and t.value == "(":
            self.next()
            g = self.goal()
            self.expect(")")
            return g
        if t.kind == "ident" and t.value == "true":
            self.next()
            return _RTrue(t.line, t.col)
        return self.atomish()

    def atomish(self) -> _RAtom:
        t = self.peek()
        if t.kind != "ident":
            self.err("expected a name")
        self.next()
        args: tuple[Term, ...] = ()
        if self.at_punct("("):
            self.next()
            parts = [self.term()]
            while self.at_punct(","):
                self.next()
                parts.append(self.term())
            self.expect(")")
            args = tuple(parts)
        return _RAtom(t.value, args, t.line, t.col)

    # -- terms ---------------------------------------------------------------

    def term(self) -> Term:
        t = self.peek()
        if t.kind == "var":
            self.next()
            if t.value == "_":
                self.anon += 1
                return Var("_%d" % self.anon)
            return Var(t.value)
        if t.kind == "int":
            self.next()
            return Int(t.value)
        if t.kind == "str":
            self.next()
            return Str(t.value)
        if t.kind == "ident":
            a = self.atomish()
            return Compound(a.name, a.args)
        if t.kind == "punct" and t.value == "[":
            return self.list_term()
        self.err("expected a term")

    def list_term(self) -> Term:
        self.expect("[")
        if self.at_punct("]"):
            self.next()
            return NIL
        items = [self.term()]
        while self.at_punct(","):
            self.next()
            items.append(self.term())
        tail: Term = NIL
        if self.at_punct("|"):
            self.next()
            tail = self.term()
        self.expect("]")
        out = tail
        for item in reversed(items):
            out = cons(item, out)
        return out


# ---------------------------------------------------------------------------
# classification: raw trees + declarations -> typed items


def _to_static_goal(raw, decls: Decls) -> Goal:
    if isinstance(raw, _RTrue):
        return TRUE
    if isinstance(raw, _RAnd):
        return And(_to_static_goal(raw.left, decls), _to_static_goal(raw.right, decls))
    if isinstance(raw, _RNot):
        return Not(_to_static_goal(raw.goal, decls))
    kind = decls.kind_of(raw.name)
    if kind is None:
        raise UndeclaredSymbol("undeclared name '%s'" % raw.name, raw.line, raw.col)
    if kind != "static":
        raise NonStaticGuard(
            "'%s' is %s, guards may use static predicates only" % (raw.name, kind),
            raw.line, raw.col)
    decls.check_arity(raw.name, len(raw.args), raw.line, raw.col)
    return Atom(raw.name, raw.args)


def _to_dgoal(raw, decls: Decls) -> DGoal:
    if isinstance(raw, _RTrue):
        return SGoal(TRUE)
    if isinstance(raw, _RAnd):
        return DAnd(_to_dgoal(raw.left, decls), _to_dgoal(raw.right, decls))
    if isinstance(raw, _RNot):
        return DNot(_to_dgoal(raw.goal, decls))
    kind = decls.kind_of(raw.name)
    if kind is None:
        raise UndeclaredSymbol("undeclared name '%s'" % raw.name, raw.line, raw.col)
    decls.check_arity(raw.name, len(raw.args), raw.line, raw.col)
    if kind == "static":
        return SGoal(Atom(raw.name, raw.args))
    # Dynamic predicates resolve against clauses; fact names resolve against
    # the fact store directly (a fact behaves like a trivial clause).
    return DAtom(raw.name, raw.args)


def _head_fact(raw: _RAtom, decls: Decls) -> Fact:
    decls.check_arity(raw.name, len(raw.args), raw.line, raw.col)
    return Fact(raw.name, raw.args)


def _classify_axiom(raw, decls: Decls) -> Axiom:
    if isinstance(raw, _RBare):
        head = raw.head
        kind = decls.kind_of(head.name)
        if kind is None:
            raise UndeclaredSymbol("undeclared name '%s'" % head.name, head.line, head.col)
        if kind == "fact":
            return _head_fact(head, decls)
        if kind == "dynamic":
            decls.check_arity(head.name, len(head.args), head.line, head.col)
            return DClause(DAtom(head.name, head.args), SGoal(TRUE))
        raise NamespaceClash(
            "static predicate '%s' cannot appear as an emitted axiom" % head.name,
            head.line, head.col)
    if isinstance(raw, _RRule):
        head = raw.head
        kind = decls.kind_of(head.name)
        if kind is None:
            raise UndeclaredSymbol("undeclared name '%s'" % head.name, head.line, head.col)
        if kind != "fact":
            raise NamespaceClash(
                "rule trigger '%s' must be a fact name, not %s" % (head.name, kind),
                head.line, head.col)
        trigger = _head_fact(head, decls)
        guard = TRUE if raw.guard is None else _to_static_goal(raw.guard, decls)
        return Rule(trigger, guard, _classify_axiom(raw.cons, decls))
    if isinstance(raw, _RClause):
        head = raw.head
        kind = decls.kind_of(head.name)
        if kind is None:
            raise UndeclaredSymbol("undeclared name '%s'" % head.name, head.line, head.col)
        if kind != "dynamic":
            raise NamespaceClash(
                "clause head '%s' is %s, expected a dynamic predicate" % (head.name, kind),
                head.line, head.col)
        decls.check_arity(head.name, len(head.args), head.line, head.col)
        return DClause(DAtom(head.name, head.args), _to_dgoal(raw.body, decls))
    raise AssertionError("bad raw axiom %r" % (raw,))


def _classify_statement(raw, decls: Decls) -> Item:
    if isinstance(raw, _RDecl):
        decls.declare(raw.kind, raw.name, raw.arity, raw.line, raw.col)
        return Declaration(raw.kind, raw.name, raw.arity)
    if isinstance(raw, _RClause) or isinstance(raw, _RBare):
        head = raw.head
        kind = decls.kind_of(head.name)
        if kind == "static":
            if head.name in BUILTIN_NAMES:
                raise NamespaceClash(
                    "'%s' is a builtin and cannot be redefined" % head.name,
                    head.line, head.col)
            decls.check_arity(head.name, len(head.args), head.line, head.col)
            body = TRUE if isinstance(raw, _RBare) else _to_static_goal(raw.body, decls)
            return StaticClause(Atom(head.name, head.args), body)
    axiom = _classify_axiom(raw, decls)
    _check_bound(axiom, frozenset(), raw)
    return axiom


def _raw_pos(raw):
    head = getattr(raw, "head", None)
    if head is not None:
        return head.line, head.col
    return 0, 0


def goal_vars(g: Goal, acc=None) -> list:
    if acc is None:
        acc = []
    if isinstance(g, Atom):
        for a in g.args:
            _term_vars(a, acc)
    elif isinstance(g, And):
        goal_vars(g.left, acc)
        goal_vars(g.right, acc)
    elif isinstance(g, Not):
        goal_vars(g.goal, acc)
    return acc


def dgoal_vars(g: DGoal, acc=None) -> list:
    if acc is None:
        acc = []
    if isinstance(g, DAtom):
        for a in g.args:
            _term_vars(a, acc)
    elif isinstance(g, DAnd):
        dgoal_vars(g.left, acc)
        dgoal_vars(g.right, acc)
    elif isinstance(g, DNot):
        dgoal_vars(g.goal, acc)
    elif isinstance(g, SGoal):
        goal_vars(g.goal, acc)
    return acc


def _term_vars(t: Term, acc: list) -> None:
    if isinstance(t, Var):
        if t not in acc:
            acc.append(t)
    elif isinstance(t, Compound):
        for a in t.args:
            _term_vars(a, acc)


def _check_bound(axiom: Axiom, bound: frozenset, raw) -> None:
    line, col = _raw_pos(raw)
    if isinstance(axiom, Fact):
        return  # top-level facts may be generic; consequence facts are checked below
    if isinstance(axiom, Rule):
        binders = set(bound)
        for v in _term_vars_of_args(axiom.trigger.args):
            binders.add(v)
        for v in goal_vars(axiom.guard):
            binders.add(v)
        _check_cons(axiom.consequence, frozenset(binders), line, col)
        return
    if isinstance(axiom, DClause):
        binders = set(bound)
        for v in _term_vars_of_args(axiom.head.args):
            binders.add(v)
        _check_body(axiom.body, frozenset(binders), line, col)


def _term_vars_of_args(args) -> list:
    acc: list = []
    for a in args:
        _term_vars(a, acc)
    return acc


def _check_cons(axiom: Axiom, bound: frozenset, line: int, col: int) -> None:
    if isinstance(axiom, Fact):
        for v in _term_vars_of_args(axiom.args):
            if v not in bound:
                raise UnboundConsequenceVariable(
                    "variable %s in consequence is not bound by trigger or guard" % v.name,
                    line, col)
        return
    if isinstance(axiom, Rule):
        binders = set(bound)
        for v in _term_vars_of_args(axiom.trigger.args):
            binders.add(v)
        for v in goal_vars(axiom.guard):
            binders.add(v)
        _check_cons(axiom.consequence, frozenset(binders), line, col)
        return
    if isinstance(axiom, DClause):
        binders = set(bound)
        for v in _term_vars_of_args(axiom.head.args):
            binders.add(v)
        _check_body(axiom.body, frozenset(binders), line, col)


def _check_body(body: DGoal, bound: frozenset, line: int, col: int) -> None:
    for v in dgoal_vars(body):
        if v not in bound:
            raise UnboundConsequenceVariable(
                "variable %s in clause body is not bound by the head" % v.name,
                line, col)


# ---------------------------------------------------------------------------
# entry points


def parse_program(text: str, base: Optional[Decls] = None):
    """Parse and validate a whole program.

    Returns (items, decls) where decls extends base with the program's
    declarations.  base is not mutated; nothing is applied on error.
    """
    decls = base.copy() if base is not None else Decls()
    parser = _Parser(text)
    raws = parser.program()
    items = [_classify_statement(raw, decls) for raw in raws]
    return items, decls


def parse_axiom(text: str, decls: Decls) -> Axiom:
    parser = _Parser(text)
    raw = parser.statement() if text.rstrip().endswith(".") else None
    if raw is None:
        parser = _Parser(text + ".")
        raw = parser.statement()
    if parser.peek().kind != "eof":
        raise ParseError("trailing input after axiom", parser.peek().line, parser.peek().col)
    if isinstance(raw, _RDecl):
        raise ParseError("expected an axiom, found a declaration", raw.line, raw.col)
    item = _classify_statement(raw, decls.copy())
    if isinstance(item, StaticClause):
        head = raw.head
        raise NamespaceClash(
            "static clauses are program items, not axioms", head.line, head.col)
    return item


def parse_dgoal(text: str, decls: Decls) -> DGoal:
    parser = _Parser(text)
    raw = parser.goal()
    if parser.at_punct("."):
        parser.next()
    if parser.peek().kind != "eof":
        raise ParseError("trailing input after goal", parser.peek().line, parser.peek().col)
    return _to_dgoal(raw, decls)


def parse_term(text: str) -> Term:
    parser = _Parser(text)
    t = parser.term()
    if parser.peek().kind != "eof":
        raise ParseError("trailing input after term", parser.peek().line, parser.peek().col)
    return t


# ---------------------------------------------------------------------------
# printing (the parser and printer are exact inverses)


def print_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Int):
        return str(t.value)
    if isinstance(t, Str):
        return '"%s"' % _escape(t.value)
    if isinstance(t, Compound):
        if t == NIL or (t.name == CONS and len(t.args) == 2):
            return _print_list(t)
        if not t.args:
            return t.name
        return "%s(%s)" % (t.name, ", ".join(print_term(a) for a in t.args))
    raise TypeError("not a term: %r" % (t,))


def _print_list(t: Term) -> str:
    items = []
    while isinstance(t, Compound) and t.name == CONS and len(t.args) == 2:
        items.append(print_term(t.args[0]))
        t = t.args[1]
    if t == NIL:
        return "[%s]" % ", ".join(items)
    return "[%s|%s]" % (", ".join(items), print_term(t))


def _escape(s: str) -> str:
    return (s.replace("\\", "\\\\").replace('"', '\\"')
            .replace("\n", "\\n").replace("\t", "\\t"))


def _print_atomish(name: str, args) -> str:
    if not args:
        return name
    return "%s(%s)" % (name, ", ".join(print_term(a) for a in args))


def print_goal(g: Goal) -> str:
    if isinstance(g, TrueGoal):
        return "true"
    if isinstance(g, Atom):
        return _print_atomish(g.pred, g.args)
    if isinstance(g, And):
        left = print_goal(g.left)
        if isinstance(g.left, And):
            left = "(%s)" % left
        return "%s, %s" % (left, print_goal(g.right))
    if isinstance(g, Not):
        inner = print_goal(g.goal)
        if isinstance(g.goal, And):
            inner = "(%s)" % inner
        return "\\+ %s" % inner
    raise TypeError("not a goal: %r" % (g,))


def print_dgoal(g: DGoal) -> str:
    if isinstance(g, SGoal):
        return print_goal(g.goal)
    if isinstance(g, DAtom):
        return _print_atomish(g.pred, g.args)
    if isinstance(g, DAnd):
        left = print_dgoal(g.left)
        if isinstance(g.left, DAnd) or (isinstance(g.left, SGoal) and isinstance(g.left.goal, And)):
            left = "(%s)" % left
        return "%s, %s" % (left, print_dgoal(g.right))
    if isinstance(g, DNot):
        inner = print_dgoal(g.goal)
        if isinstance(g.goal, DAnd) or (isinstance(g.goal, SGoal) and isinstance(g.goal.goal, And)):
            inner = "(%s)" % inner
        return "\\+ %s" % inner
    raise TypeError("not a dynamic goal: %r" % (g,))


def print_axiom(a: Axiom) -> str:
    if isinstance(a, Fact):
        return _print_atomish(a.name, a.args)
    if isinstance(a, Rule):
        cons = print_axiom(a.consequence)
        if isinstance(a.consequence, (Rule, DClause)):
            cons = "(%s)" % cons
        trig = _print_atomish(a.trigger.name, a.trigger.args)
        if isinstance(a.guard, TrueGoal):
            return "%s ~> %s" % (trig, cons)
        return "%s { %s } ~> %s" % (trig, print_goal(a.guard), cons)
    if isinstance(a, DClause):
        return "%s :- %s" % (_print_atomish(a.head.pred, a.head.args), print_dgoal(a.body))
    raise TypeError("not an axiom: %r" % (a,))


def print_item(item: Item) -> str:
    if isinstance(item, Declaration):
        return ":- %s %s/%d." % (item.kind, item.name, item.arity)
    if isinstance(item, StaticClause):
        if isinstance(item.body, TrueGoal):
            return "%s." % _print_atomish(item.head.pred, item.head.args)
        return "%s :- %s." % (_print_atomish(item.head.pred, item.head.args),
                              print_goal(item.body))
    return "%s." % print_axiom(item)


def print_program(items) -> str:
    return "\n".join(print_item(item) for item in items) + "\n"


# ---------------------------------------------------------------------------
# structural helpers used by the engine


def axiom_name(a: Axiom) -> str:
    """The name an axiom is filed under: facts and rule triggers by fact
    name, clauses by head predicate."""
    if isinstance(a, Fact):
        return a.name
    if isinstance(a, Rule):
        return a.trigger.name
    if isinstance(a, DClause):
        return a.head.pred
    raise TypeError("not an axiom: %r" % (a,))


def subject_of(a: Axiom) -> Optional[bytes]:
    """Partition key: canonical encoding of the ground first argument of
    the fact / trigger / head.  None means the axiom is generic."""
    if isinstance(a, Fact):
        args = a.args
    elif isinstance(a, Rule):
        args = a.trigger.args
    elif isinstance(a, DClause):
        args = a.head.args
    else:
        raise TypeError("not an axiom: %r" % (a,))
    if args and is_ground(args[0]):
        return canonical_encode(args[0])
    return None


def _map_term(t: Term, f) -> Term:
    if isinstance(t, Var):
        return f(t)
    if isinstance(t, Compound) and t.args:
        return Compound(t.name, tuple(_map_term(a, f) for a in t.args))
    return t


def _map_goal(g: Goal, f) -> Goal:
    if isinstance(g, Atom):
        return Atom(g.pred, tuple(_map_term(a, f) for a in g.args))
    if isinstance(g, And):
        return And(_map_goal(g.left, f), _map_goal(g.right, f))
    if isinstance(g, Not):
        return Not(_map_goal(g.goal, f))
    return g


def _map_dgoal(g: DGoal, f) -> DGoal:
    if isinstance(g, DAtom):
        return DAtom(g.pred, tuple(_map_term(a, f) for a in g.args))
    if isinstance(g, DAnd):
        return DAnd(_map_dgoal(g.left, f), _map_dgoal(g.right, f))
    if isinstance(g, DNot):
        return DNot(_map_dgoal(g.goal, f))
    return SGoal(_map_goal(g.goal, f))


def map_axiom_vars(a: Axiom, f) -> Axiom:
    if isinstance(a, Fact):
        return Fact(a.name, tuple(_map_term(t, f) for t in a.args))
    if isinstance(a, Rule):
        trig = Fact(a.trigger.name, tuple(_map_term(t, f) for t in a.trigger.args))
        return Rule(trig, _map_goal(a.guard, f), map_axiom_vars(a.consequence, f))
    if isinstance(a, DClause):
        head = DAtom(a.head.pred, tuple(_map_term(t, f) for t in a.head.args))
        return DClause(head, _map_dgoal(a.body, f))
    raise TypeError("not an axiom: %r" % (a,))


def rename_apart(a: Axiom, scope: int) -> Axiom:
    """Stamp every variable with the given scope.  Callers must pick a
    scope not already present in the structure (canonical forms and parser
    output use scope 0, so any fresh_scope() value works)."""
    return map_axiom_vars(a, lambda v: Var(v.name, scope))


def rename_clause(c: StaticClause, scope: int) -> StaticClause:
    f = lambda v: Var(v.name, scope)
    return StaticClause(
        Atom(c.head.pred, tuple(_map_term(t, f) for t in c.head.args)),
        _map_goal(c.body, f))


def rename_dclause(c: DClause, scope: int) -> DClause:
    f = lambda v: Var(v.name, scope)
    return DClause(
        DAtom(c.head.pred, tuple(_map_term(t, f) for t in c.head.args)),
        _map_dgoal(c.body, f))


def axiom_vars(a: Axiom) -> list:
    """Variables in a fixed structural order (first occurrence wins)."""
    acc: list = []

    def walk_axiom(x):
        if isinstance(x, Fact):
            for t in x.args:
                _term_vars(t, acc)
        elif isinstance(x, Rule):
            for t in x.trigger.args:
                _term_vars(t, acc)
            goal_vars(x.guard, acc)
            walk_axiom(x.consequence)
        elif isinstance(x, DClause):
            for t in x.head.args:
                _term_vars(t, acc)
            dgoal_vars(x.body, acc)

    walk_axiom(a)
    return acc


def canonical_axiom(a: Axiom) -> Axiom:
    """Alpha-normalize: variables become V0, V1, ... in first-occurrence
    order at scope 0.  Store and queue identity is equality of canonical
    forms, so repeated derivations of one emitted rule pile onto a single
    multiset entry no matter what rename scopes they carried."""
    mapping = {}
    for v in axiom_vars(a):
        mapping[v] = Var("V%d" % len(mapping), 0)
    if not mapping:
        return a
    return map_axiom_vars(a, lambda v: mapping[v])
