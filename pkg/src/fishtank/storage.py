"""Subject-partitioned axiom store, durable work queue, append-only journal.

The store has two sections.  Concrete axioms (ground first argument) live
in partitions keyed by the canonical encoding of that argument, grouped
inside each partition by name.  Generic axioms live in a per-name side
table.  A tick over a concrete axiom touches exactly one partition; a
generic axiom pays one access per partition holding its name.  io_counter
counts read_partition and update_partition calls and nothing else, so
tests can assert those access counts exactly.

Journal format (big-endian throughout):

    "FTJ1"                                      file header
    repeated records:  tag u8, payload length u32, payload

    0x10 push             flag u8 (0 api push, 1 tick member), axiom, delta i64
    0x11 pop-commit       empty; commits the pending tick group
    0x12 partition-write  axiom, delta i64; always part of a tick group

A tick journals its derived pushes and its store write as tick members,
then a pop-commit, all in one append.  Replay buffers tick members until
the pop-commit arrives and discards a trailing unfinished group: the
popped entry is then still at the queue front and re-running the tick
reproduces the lost work.  Replay after any record prefix therefore
quiesces to the same state as the uninterrupted run.

Axioms in record payloads use the canonical term tags (0x01 compound,
0x02 int, 0x03 str) extended with variable and structure tags, since
rules and clauses are not ground.  A truncated trailing record is
discarded; damage anywhere earlier raises CorruptJournal.
"""

from __future__ import annotations

import os
import struct
import threading
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

from .lang import (
    And,
    Atom,
    Axiom,
    DAnd,
    DAtom,
    DClause,
    DGoal,
    DNot,
    Fact,
    Goal,
    Not,
    Rule,
    SGoal,
    TRUE,
    TrueGoal,
)
from .terms import (
    Compound,
    Int,
    Str,
    Term,
    Var,
    decode_prefix,
    _encode_into,  # shared ground-term tags
)

MAGIC = b"FTJ1"

OP_PUSH = 0x10
OP_POP_COMMIT = 0x11
OP_PARTITION_WRITE = 0x12

_u32 = struct.Struct(">I")
_i64 = struct.Struct(">q")

TAG_VAR = 0x04
TAG_FACT = 0x05
TAG_RULE = 0x06
TAG_DCLAUSE = 0x07
TAG_ATOM = 0x08
TAG_AND = 0x09
TAG_NOT = 0x0A
TAG_TRUE = 0x0B
TAG_DATOM = 0x0C
TAG_DAND = 0x0D
TAG_DNOT = 0x0E
TAG_SGOAL = 0x0F


class StorageError(Exception):
    pass


class QueueFull(StorageError):
    pass


class CorruptJournal(StorageError):
    pass


@dataclass(frozen=True)
class QueueEntry:
    axiom: Axiom
    delta: int


# ---------------------------------------------------------------------------
# axiom codec


def _enc_term(t: Term, out: bytearray) -> None:
    # same preorder layout as the ground encoder plus a variable tag
    stack = [t]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            name = t.name.encode("utf-8")
            out.append(TAG_VAR)
            out += _u32.pack(len(name))
            out += name
            out += _u32.pack(t.scope)
        elif isinstance(t, Compound) and t.args:
            name = t.name.encode("utf-8")
            out.append(0x01)
            out += _u32.pack(len(name))
            out += name
            out += _u32.pack(len(t.args))
            stack.extend(reversed(t.args))
        else:
            _encode_into(t, out)


def _enc_named_args(name: str, args, out: bytearray) -> None:
    data = name.encode("utf-8")
    out += _u32.pack(len(data))
    out += data
    out += _u32.pack(len(args))
    for a in args:
        _enc_term(a, out)


def _enc_goal(g: Goal, out: bytearray) -> None:
    if isinstance(g, TrueGoal):
        out.append(TAG_TRUE)
    elif isinstance(g, Atom):
        out.append(TAG_ATOM)
        _enc_named_args(g.pred, g.args, out)
    elif isinstance(g, And):
        out.append(TAG_AND)
        _enc_goal(g.left, out)
        _enc_goal(g.right, out)
    elif isinstance(g, Not):
        out.append(TAG_NOT)
        _enc_goal(g.goal, out)
    else:
        raise StorageError("cannot encode goal %r" % (g,))


def _enc_dgoal(g: DGoal, out: bytearray) -> None:
    if isinstance(g, DAtom):
        out.append(TAG_DATOM)
        _enc_named_args(g.pred, g.args, out)
    elif isinstance(g, DAnd):
        out.append(TAG_DAND)
        _enc_dgoal(g.left, out)
        _enc_dgoal(g.right, out)
    elif isinstance(g, DNot):
        out.append(TAG_DNOT)
        _enc_dgoal(g.goal, out)
    elif isinstance(g, SGoal):
        out.append(TAG_SGOAL)
        _enc_goal(g.goal, out)
    else:
        raise StorageError("cannot encode dynamic goal %r" % (g,))


def encode_axiom(a: Axiom) -> bytes:
    out = bytearray()
    _enc_axiom(a, out)
    return bytes(out)


def _enc_axiom(a: Axiom, out: bytearray) -> None:
    if isinstance(a, Fact):
        out.append(TAG_FACT)
        _enc_named_args(a.name, a.args, out)
    elif isinstance(a, Rule):
        out.append(TAG_RULE)
        _enc_named_args(a.trigger.name, a.trigger.args, out)
        _enc_goal(a.guard, out)
        _enc_axiom(a.consequence, out)
    elif isinstance(a, DClause):
        out.append(TAG_DCLAUSE)
        _enc_named_args(a.head.pred, a.head.args, out)
        _enc_dgoal(a.body, out)
    else:
        raise StorageError("cannot encode axiom %r" % (a,))


def _dec_term(data: bytes, off: int):
    # mirrors _enc_term; compound arguments may contain variables, so the
    # ground decoder is only safe for integer and string leaves
    frames: list[list] = []
    while True:
        if off >= len(data):
            raise ValueError("truncated term")
        tag = data[off]
        if tag == TAG_VAR:
            off += 1
            (nlen,) = _u32.unpack_from(data, off)
            off += 4
            name = data[off:off + nlen].decode("utf-8")
            off += nlen
            (scope,) = _u32.unpack_from(data, off)
            off += 4
            val: Term = Var(name, scope)
        elif tag == 0x01:
            off += 1
            (nlen,) = _u32.unpack_from(data, off)
            off += 4
            name = data[off:off + nlen].decode("utf-8")
            off += nlen
            (arity,) = _u32.unpack_from(data, off)
            off += 4
            if arity:
                frames.append([name, arity, []])
                continue
            val = Compound(name, ())
        else:
            val, off = decode_prefix(data, off)
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


def _dec_named_args(data: bytes, off: int):
    (nlen,) = _u32.unpack_from(data, off)
    off += 4
    name = data[off:off + nlen].decode("utf-8")
    off += nlen
    (arity,) = _u32.unpack_from(data, off)
    off += 4
    args = []
    for _ in range(arity):
        a, off = _dec_term(data, off)
        args.append(a)
    return name, tuple(args), off


def _dec_goal(data: bytes, off: int):
    tag = data[off]
    off += 1
    if tag == TAG_TRUE:
        return TRUE, off
    if tag == TAG_ATOM:
        name, args, off = _dec_named_args(data, off)
        return Atom(name, args), off
    if tag == TAG_AND:
        left, off = _dec_goal(data, off)
        right, off = _dec_goal(data, off)
        return And(left, right), off
    if tag == TAG_NOT:
        inner, off = _dec_goal(data, off)
        return Not(inner), off
    raise ValueError("bad goal tag 0x%02x" % tag)


def _dec_dgoal(data: bytes, off: int):
    tag = data[off]
    off += 1
    if tag == TAG_DATOM:
        name, args, off = _dec_named_args(data, off)
        return DAtom(name, args), off
    if tag == TAG_DAND:
        left, off = _dec_dgoal(data, off)
        right, off = _dec_dgoal(data, off)
        return DAnd(left, right), off
    if tag == TAG_DNOT:
        inner, off = _dec_dgoal(data, off)
        return DNot(inner), off
    if tag == TAG_SGOAL:
        inner, off = _dec_goal(data, off)
        return SGoal(inner), off
    raise ValueError("bad dynamic goal tag 0x%02x" % tag)


def decode_axiom(data: bytes, off: int = 0):
    tag = data[off]
    off += 1
    if tag == TAG_FACT:
        name, args, off = _dec_named_args(data, off)
        return Fact(name, args), off
    if tag == TAG_RULE:
        name, args, off = _dec_named_args(data, off)
        guard, off = _dec_goal(data, off)
        cons, off = decode_axiom(data, off)
        return Rule(Fact(name, args), guard, cons), off
    if tag == TAG_DCLAUSE:
        name, args, off = _dec_named_args(data, off)
        body, off = _dec_dgoal(data, off)
        return DClause(DAtom(name, args), body), off
    raise ValueError("bad axiom tag 0x%02x" % tag)


# ---------------------------------------------------------------------------
# journal


def push_payload(axiom: Axiom, delta: int, tick_member: bool) -> bytes:
    return bytes([1 if tick_member else 0]) + encode_axiom(axiom) + _i64.pack(delta)


def write_payload(axiom: Axiom, delta: int) -> bytes:
    return encode_axiom(axiom) + _i64.pack(delta)


def frame_record(tag: int, payload: bytes) -> bytes:
    return bytes([tag]) + _u32.pack(len(payload)) + payload


class Journal:
    """Append-only record log.  One append() call is one atomic durability
    point: the bytes hit the file in a single write, fsynced by default."""

    def __init__(self, path: str, fsync: bool = True):
        self.path = path
        self.fsync = fsync
        exists = os.path.exists(path) and os.path.getsize(path) > 0
        self._f = open(path, "ab")
        if not exists:
            self._f.write(MAGIC)
            self._f.flush()
            if fsync:
                os.fsync(self._f.fileno())
        else:
            with open(path, "rb") as check:
                if check.read(4) != MAGIC:
                    self._f.close()
                    raise CorruptJournal("bad journal header in %s" % path)

    def append(self, records: list[tuple[int, bytes]]) -> None:
        blob = b"".join(frame_record(tag, payload) for tag, payload in records)
        self._f.write(blob)
        self._f.flush()
        if self.fsync:
            os.fsync(self._f.fileno())

    def close(self) -> None:
        self._f.close()


def iter_records(data: bytes):
    """Yield (tag, payload) for each complete record; a truncated trailing
    record is silently dropped."""
    off = 0
    n = len(data)
    while off < n:
        if off + 5 > n:
            return  # truncated header
        tag = data[off]
        (plen,) = _u32.unpack_from(data, off + 1)
        if off + 5 + plen > n:
            return  # truncated payload
        yield tag, data[off + 5:off + 5 + plen]
        off += 5 + plen


def replay(data: bytes):
    """Reconstruct (store counts, queue entries) from journal bytes.

    Returns (counts: dict[Axiom, int], queue: list[QueueEntry]).
    """
    if not data:
        return {}, []
    if len(data) < 4 or data[:4] != MAGIC:
        raise CorruptJournal("bad journal header")
    counts: dict[Axiom, int] = {}
    queue: list[QueueEntry] = []
    group: list[tuple] = []
    for tag, payload in iter_records(data[4:]):
        try:
            if tag == OP_PUSH:
                flag = payload[0]
                axiom, off = decode_axiom(payload, 1)
                (delta,) = _i64.unpack_from(payload, off)
                entry = QueueEntry(axiom, delta)
                if flag:
                    group.append(("push", entry))
                else:
                    queue.append(entry)
            elif tag == OP_PARTITION_WRITE:
                axiom, off = decode_axiom(payload, 0)
                (delta,) = _i64.unpack_from(payload, off)
                group.append(("write", axiom, delta))
            elif tag == OP_POP_COMMIT:
                if not queue:
                    raise CorruptJournal("pop-commit with empty queue")
                queue.pop(0)
                for op in group:
                    if op[0] == "push":
                        queue.append(op[1])
                    else:
                        _, axiom, delta = op
                        new = counts.get(axiom, 0) + delta
                        if new == 0:
                            counts.pop(axiom, None)
                        else:
                            counts[axiom] = new
                group = []
            else:
                raise CorruptJournal("unknown record tag 0x%02x" % tag)
        except CorruptJournal:
            raise
        except Exception as exc:
            raise CorruptJournal("malformed record: %s" % exc) from exc
    # a pending group belongs to a tick that never committed
    return counts, queue


# ---------------------------------------------------------------------------
# partition store


def apply_delta(group: list, axiom: Axiom, delta: int) -> int:
    """Add delta to axiom's multiplicity inside a name group, pruning
    entries that reach zero.  Returns the new multiplicity."""
    for i, entry in enumerate(group):
        if entry[0] == axiom:
            entry[1] += delta
            if entry[1] == 0:
                del group[i]
                return 0
            return entry[1]
    if delta != 0:
        group.append([axiom, delta])
    return delta


class PartitionStore:
    """Concrete partitions plus the generic side table.

    update_partition runs its mutator under the store lock, so a tick's
    read-match-write against one partition is atomic with respect to
    concurrent ticks and queries.  Partition order inside scan_by_name is
    first-write order, which keeps iteration deterministic.
    """

    def __init__(self):
        self._parts: dict[bytes, dict[str, list]] = {}
        self._name_index: dict[str, list[bytes]] = {}
        self._generic: dict[str, list] = {}
        self._lock = threading.RLock()
        self.io_counter = 0

    # -- concrete section (counted) ----------------------------------------

    def update_partition(self, key: bytes, fn: Callable[[dict], object]):
        with self._lock:
            self.io_counter += 1
            part = self._parts.setdefault(key, {})
            prev = set(part.keys())
            try:
                return fn(part)
            finally:
                # keep the name index honest even if the mutator raised
                for name in list(part.keys()):
                    if not part[name]:
                        del part[name]
                cur = set(part.keys())
                for name in cur - prev:
                    keys = self._name_index.setdefault(name, [])
                    if key not in keys:
                        keys.append(key)
                for name in prev - cur:
                    keys = self._name_index.get(name, [])
                    if key in keys:
                        keys.remove(key)
                    if not keys:
                        self._name_index.pop(name, None)
                if not part:
                    del self._parts[key]

    def read_partition(self, key: bytes) -> dict[str, list[tuple]]:
        with self._lock:
            self.io_counter += 1
            part = self._parts.get(key, {})
            return {name: [(a, m) for a, m in group] for name, group in part.items()}

    def scan_by_name(self, name: str) -> list[bytes]:
        with self._lock:
            return list(self._name_index.get(name, []))

    def has_concrete(self, name: str) -> bool:
        with self._lock:
            return bool(self._name_index.get(name))

    # -- generic section (not counted) --------------------------------------

    def read_generic(self, name: str) -> list[tuple]:
        with self._lock:
            return [(a, m) for a, m in self._generic.get(name, [])]

    def update_generic(self, name: str, fn: Callable[[list], object]):
        with self._lock:
            group = self._generic.setdefault(name, [])
            result = fn(group)
            if not group:
                del self._generic[name]
            return result

    # -- whole-store views ----------------------------------------------------

    def all_entries(self) -> list[tuple]:
        with self._lock:
            out = []
            for part in self._parts.values():
                for group in part.values():
                    for axiom, mult in group:
                        out.append((axiom, mult))
            for group in self._generic.values():
                for axiom, mult in group:
                    out.append((axiom, mult))
            return out

    def entry_count(self) -> int:
        return len(self.all_entries())

    def reset_io_counter(self) -> None:
        with self._lock:
            self.io_counter = 0


# ---------------------------------------------------------------------------
# durable queue


class DurableQueue:
    """FIFO of (axiom, delta) entries.  API pushes are journaled and
    fsynced before push() returns; tick-derived pushes are journaled by
    the tick's own commit batch and enter through extend_unlogged()."""

    def __init__(self, journal: Optional[Journal] = None,
                 max_len: Optional[int] = None):
        self._q: deque[QueueEntry] = deque()
        self._lock = threading.RLock()
        self.journal = journal
        self.max_len = max_len

    def push(self, entries: list[QueueEntry]) -> None:
        with self._lock:
            if self.max_len is not None and len(self._q) + len(entries) > self.max_len:
                raise QueueFull("work queue is full")
            if self.journal is not None:
                self.journal.append([
                    (OP_PUSH, push_payload(e.axiom, e.delta, tick_member=False))
                    for e in entries])
            self._q.extend(entries)

    def extend_unlogged(self, entries) -> None:
        with self._lock:
            self._q.extend(entries)

    def pop(self) -> Optional[QueueEntry]:
        with self._lock:
            if not self._q:
                return None
            return self._q.popleft()

    def requeue_front(self, entry: QueueEntry) -> None:
        with self._lock:
            self._q.appendleft(entry)

    def snapshot(self) -> list[QueueEntry]:
        with self._lock:
            return list(self._q)

    def __len__(self) -> int:
        with self._lock:
            return len(self._q)
