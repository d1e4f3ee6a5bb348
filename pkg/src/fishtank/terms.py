"""First-order terms, substitutions, unification, and the canonical byte encoding.

Terms are immutable and hashable so they can key multisets and partition
maps directly.  Four constructors cover the whole language:

    Compound(name, args)   f(X, 1), user("a"), [] and list cells
    Int(value)             64-bit signed integers
    Str(value)             unicode strings
    Var(name, scope)       logic variables

The scope field keeps variables from distinct renamings apart without
string surgery: rename_apart stamps a fresh scope over a whole structure,
so two uses of the same clause never share variables even though the
printed names coincide.
"""

from __future__ import annotations

import itertools
import struct
import threading
from dataclasses import dataclass
from typing import Iterator, Optional, Union

INT_MIN = -(2 ** 63)
INT_MAX = 2 ** 63 - 1


@dataclass(frozen=True, eq=False)
class Compound:
    name: str
    args: tuple["Term", ...] = ()

    # hand-written so list-shaped terms of any length compare without
    # hitting the interpreter recursion limit
    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Compound):
            return NotImplemented
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if a is b:
                continue
            if isinstance(a, Compound):
                if (not isinstance(b, Compound) or a.name != b.name
                        or len(a.args) != len(b.args)):
                    return False
                stack.extend(zip(a.args, b.args))
            elif a != b:
                return False
        return True

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            # bounded walk: collisions stay rare, equality settles the rest
            h = hash((self.name, len(self.args)))
            stack = list(self.args)
            steps = 0
            while stack and steps < 24:
                t = stack.pop()
                steps += 1
                if isinstance(t, Compound):
                    h = hash((h, t.name, len(t.args)))
                    stack.extend(t.args)
                else:
                    h = hash((h, t))
            object.__setattr__(self, "_hash", h)
        return h


@dataclass(frozen=True)
class Int:
    value: int


@dataclass(frozen=True)
class Str:
    value: str


@dataclass(frozen=True)
class Var:
    name: str
    scope: int = 0


Term = Union[Compound, Int, Str, Var]

NIL = Compound("[]", ())
CONS = "."


class NonGroundSubject(Exception):
    """Raised when a variable reaches the canonical encoder."""


_scope_counter = itertools.count(1)
_scope_lock = threading.Lock()


def fresh_scope() -> int:
    with _scope_lock:
        return next(_scope_counter)


# ---------------------------------------------------------------------------
# lists

def cons(head: Term, tail: Term) -> Compound:
    return Compound(CONS, (head, tail))


def make_list(items, tail: Term = NIL) -> Term:
    out = tail
    for item in reversed(list(items)):
        out = cons(item, out)
    return out


def iter_list(term: Term):
    """Split a cons chain into (elements, tail).  tail is NIL for proper lists."""
    items = []
    while isinstance(term, Compound) and term.name == CONS and len(term.args) == 2:
        items.append(term.args[0])
        term = term.args[1]
    return items, term


# ---------------------------------------------------------------------------
# substitutions

class Subst:
    """Immutable variable binding map.  bind() returns an extended copy."""

    __slots__ = ("_m",)

    def __init__(self, m=None):
        self._m = m or {}

    def lookup(self, v: Var) -> Optional[Term]:
        return self._m.get(v)

    def bind(self, v: Var, t: Term) -> "Subst":
        m = dict(self._m)
        m[v] = t
        return Subst(m)

    def walk(self, t: Term) -> Term:
        # Follow variable chains to the representative term, no deep rewrite.
        while isinstance(t, Var):
            bound = self._m.get(t)
            if bound is None:
                return t
            t = bound
        return t

    def resolve(self, t: Term) -> Term:
        """Deep application; the result contains only unbound variables.
        Iterative so that list-shaped terms of any length survive."""
        t = self.walk(t)
        if not (isinstance(t, Compound) and t.args):
            return t
        done: list[Term] = []
        work: list[tuple[bool, Term]] = [(False, t)]
        while work:
            building, node = work.pop()
            if building:
                k = len(done) - len(node.args)
                args = tuple(done[k:])
                del done[k:]
                done.append(Compound(node.name, args))
                continue
            node = self.walk(node)
            if isinstance(node, Compound) and node.args:
                work.append((True, node))
                for a in reversed(node.args):
                    work.append((False, a))
            else:
                done.append(node)
        return done[0]

    def restrict(self, names) -> dict:
        """Bindings for the given Vars, fully resolved, keyed by variable name."""
        return {v.name: self.resolve(v) for v in names}

    def __len__(self):
        return len(self._m)


EMPTY_SUBST = Subst()


def apply(s: Subst, t: Term) -> Term:
    return s.resolve(t)


def _occurs(v: Var, t: Term, s: Subst) -> bool:
    stack = [t]
    while stack:
        t = s.walk(stack.pop())
        if isinstance(t, Var):
            if t == v:
                return True
        elif isinstance(t, Compound):
            stack.extend(t.args)
    return False


def unify(a: Term, b: Term, s: Subst = EMPTY_SUBST) -> Optional[Subst]:
    """Most general unifier extending s, or None.  Occurs check enabled."""
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = s.walk(x)
        y = s.walk(y)
        if x is y:
            continue
        if isinstance(x, Var):
            if isinstance(y, Var) and x == y:
                continue
            if _occurs(x, y, s):
                return None
            s = s.bind(x, y)
        elif isinstance(y, Var):
            if _occurs(y, x, s):
                return None
            s = s.bind(y, x)
        elif isinstance(x, Compound) and isinstance(y, Compound):
            if x.name != y.name or len(x.args) != len(y.args):
                return None
            stack.extend(zip(x.args, y.args))
        elif isinstance(x, Int) and isinstance(y, Int):
            if x.value != y.value:
                return None
        elif isinstance(x, Str) and isinstance(y, Str):
            if x.value != y.value:
                return None
        else:
            return None
    return s


def is_ground(t: Term) -> bool:
    stack = [t]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            return False
        if isinstance(t, Compound):
            stack.extend(t.args)
    return True


def term_vars(t: Term, acc=None) -> list:
    """Variables in first-occurrence order (depth first, left to right)."""
    if acc is None:
        acc = []
    seen = set(acc)
    stack = [t]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            if t not in seen:
                seen.add(t)
                acc.append(t)
        elif isinstance(t, Compound):
            stack.extend(reversed(t.args))
    return acc


# ---------------------------------------------------------------------------
# canonical encoding
#
# Stable across runs and platforms; partition keys and on-disk identities
# are byte equality over this encoding.
#
#   0x01  compound: u32 name length, name utf-8, u32 arity, args in order
#   0x02  integer:  8-byte two's-complement big-endian
#   0x03  string:   u32 length, utf-8 bytes
#
# Variables have no encoding: a non-ground subject is an error.

TAG_COMPOUND = 0x01
TAG_INT = 0x02
TAG_STR = 0x03

_u32 = struct.Struct(">I")
_i64 = struct.Struct(">q")


def canonical_encode(t: Term) -> bytes:
    out = bytearray()
    _encode_into(t, out)
    return bytes(out)


def _encode_into(t: Term, out: bytearray) -> None:
    # preorder layout, so an explicit stack serializes in one pass
    stack = [t]
    while stack:
        t = stack.pop()
        if isinstance(t, Compound):
            name = t.name.encode("utf-8")
            out.append(TAG_COMPOUND)
            out += _u32.pack(len(name))
            out += name
            out += _u32.pack(len(t.args))
            stack.extend(reversed(t.args))
        elif isinstance(t, Int):
            if not (INT_MIN <= t.value <= INT_MAX):
                raise ValueError("integer out of 64-bit range: %d" % t.value)
            out.append(TAG_INT)
            out += _i64.pack(t.value)
        elif isinstance(t, Str):
            data = t.value.encode("utf-8")
            out.append(TAG_STR)
            out += _u32.pack(len(data))
            out += data
        else:
            raise NonGroundSubject("cannot encode variable %s" % t.name)


def canonical_decode(data: bytes) -> Term:
    term, off = _decode_at(data, 0)
    if off != len(data):
        raise ValueError("trailing bytes after term")
    return term


def decode_prefix(data: bytes, off: int):
    """Decode one term starting at off, return (term, next offset)."""
    return _decode_at(data, off)


def _decode_at(data: bytes, off: int):
    # frames: [name, args still needed, args so far]
    frames: list[list] = []
    while True:
        if off >= len(data):
            raise ValueError("truncated term")
        tag = data[off]
        off += 1
        if tag == TAG_COMPOUND:
            (nlen,) = _u32.unpack_from(data, off)
            off += 4
            name = data[off:off + nlen].decode("utf-8")
            off += nlen
            (arity,) = _u32.unpack_from(data, off)
            off += 4
            if arity:
                frames.append([name, arity, []])
                continue
            val: Term = Compound(name, ())
        elif tag == TAG_INT:
            (v,) = _i64.unpack_from(data, off)
            val = Int(v)
            off += 8
        elif tag == TAG_STR:
            (slen,) = _u32.unpack_from(data, off)
            off += 4
            val = Str(data[off:off + slen].decode("utf-8"))
            off += slen
        else:
            raise ValueError("bad term tag 0x%02x" % tag)
        while True:
            if not frames:
                return val, off
            top = frames[-1]
            top[2].append(val)
            top[1] -= 1
            if top[1]:
                break
            frames.pop()
            val = Compound(top[0], tuple(top[2]))


# ---------------------------------------------------------------------------
# json wire form: {"c": name, "a": [...]}, {"n": int}, {"s": str}, {"v": name}

def term_to_json(t: Term):
    if isinstance(t, Compound):
        return {"c": t.name, "a": [term_to_json(a) for a in t.args]}
    if isinstance(t, Int):
        return {"n": t.value}
    if isinstance(t, Str):
        return {"s": t.value}
    return {"v": t.name}


def term_from_json(obj) -> Term:
    if not isinstance(obj, dict):
        raise ValueError("bad term json: %r" % (obj,))
    if "c" in obj:
        return Compound(obj["c"], tuple(term_from_json(a) for a in obj.get("a", [])))
    if "n" in obj:
        v = obj["n"]
        if not isinstance(v, int) or not (INT_MIN <= v <= INT_MAX):
            raise ValueError("bad integer in term json: %r" % (v,))
        return Int(v)
    if "s" in obj:
        return Str(obj["s"])
    if "v" in obj:
        return Var(obj["v"])
    raise ValueError("bad term json keys: %r" % (obj,))
