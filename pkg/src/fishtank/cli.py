"""Command line front end.

    fishtank repl  [--journal PATH] [--load FILE]...
    fishtank run   SCRIPT [--journal PATH]
    fishtank serve [--port N] [--assets DIR] [--journal PATH] [--load FILE]...

repl and run share one command language:

    load FILE          parse a program file and enqueue its axioms
    insert AXIOM.      push with delta +1
    remove AXIOM.      push with delta -1
    query GOAL.        evaluate against the current store
    quiesce            drain the queue
    stats              one line of counters
    dump               the store, one axiom per line with multiplicity
    exit               leave the repl

run executes a script of those commands and exits 0 on success, 1 on any
error, 2 if the final quiesce gave up before the queue drained.
"""

from __future__ import annotations

import argparse
import os
import shlex
import sys
from typing import Optional, TextIO

from .lang import LangError, parse_axiom, parse_dgoal, print_axiom, print_term
from .query import UnindexedQuery, query
from .static_engine import DEFAULT_MAX_STEPS, EngineError
from .storage import QueueFull
from .tank import DEFAULT_TICK_BUDGET, NotQuiescent, Tank


class CommandError(Exception):
    pass


def _build_tank(args: argparse.Namespace) -> Tank:
    tank = Tank.create(
        journal_path=getattr(args, "journal", None),
        solve_budget=getattr(args, "solve_budget", DEFAULT_MAX_STEPS),
        tick_budget=getattr(args, "tick_budget", DEFAULT_TICK_BUDGET),
    )
    # after a journal restore the files only re-supply schema and static
    # clauses; pushing their axioms again would double the multiplicities
    for path in getattr(args, "load", None) or []:
        _cmd_load(tank, path, sys.stdout, axioms=not tank.restored)
        tank.quiesce()
    return tank


def _cmd_load(tank: Tank, path: str, out: TextIO, axioms: bool = True) -> None:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise CommandError(f"cannot read {path}: {exc.strerror}")
    try:
        summary = tank.load_program(text, axioms=axioms)
    except LangError as exc:
        raise CommandError(f"{os.path.basename(path)}:{exc.line}:{exc.col}: {exc.message}")
    out.write("loaded {} ({} declarations, {} static clauses, {} axioms)\n".format(
        os.path.basename(path), summary["declarations"],
        summary["static_clauses"], summary["axioms"]))


def _cmd_axiom(tank: Tank, text: str, delta: int, out: TextIO) -> None:
    try:
        axiom = parse_axiom(text, tank.decls)
    except LangError as exc:
        raise CommandError(f"{exc.line}:{exc.col}: {exc.message}")
    try:
        if delta > 0:
            tank.insert(axiom)
        else:
            tank.remove(axiom)
    except QueueFull:
        raise CommandError("work queue is full")
    out.write("queued {} {}\n".format("+1" if delta > 0 else "-1", print_axiom(axiom)))


def _cmd_query(tank: Tank, text: str, out: TextIO) -> None:
    try:
        goal = parse_dgoal(text, tank.decls)
    except LangError as exc:
        raise CommandError(f"{exc.line}:{exc.col}: {exc.message}")
    try:
        results = query(goal, tank, limit=1000)
    except (UnindexedQuery, EngineError) as exc:
        raise CommandError(str(exc))
    for result in results:
        if result:
            bindings = ", ".join(f"{var} = {print_term(term)}"
                                 for var, term in result.items())
            out.write(bindings + "\n")
        else:
            out.write("true\n")
    out.write(f"{len(results)} result(s)\n")


def _cmd_stats(tank: Tank, out: TextIO) -> None:
    s = tank.stats()
    out.write("queue={queue_length} ticks={tick_count} io={io_counter} "
              "entries={store_entries} dead={dead}\n".format(
                  dead=len(s["dead_letters"]), **s))


def _cmd_dump(tank: Tank, out: TextIO) -> None:
    lines = sorted("{}\t{}\n".format(mult, print_axiom(axiom))
                   for axiom, mult in tank.store.all_entries())
    out.writelines(lines)
    out.write(f"{len(lines)} entr{'y' if len(lines) == 1 else 'ies'}\n")


def execute(tank: Tank, line: str, out: TextIO) -> bool:
    """Run one command line; returns False when the session should end."""
    line = line.strip()
    if not line or line.startswith("%"):
        return True
    if line in ("exit", "quit"):
        return False
    cmd, _, rest = line.partition(" ")
    rest = rest.strip()
    if cmd == "load":
        parts = shlex.split(rest)
        if len(parts) != 1:
            raise CommandError("usage: load FILE")
        _cmd_load(tank, parts[0], out)
    elif cmd == "insert":
        _cmd_axiom(tank, rest, +1, out)
    elif cmd == "remove":
        _cmd_axiom(tank, rest, -1, out)
    elif cmd == "query":
        _cmd_query(tank, rest, out)
    elif cmd == "quiesce":
        ticks = tank.quiesce()
        out.write(f"quiescent after {ticks} tick(s)\n")
    elif cmd == "stats":
        _cmd_stats(tank, out)
    elif cmd == "dump":
        _cmd_dump(tank, out)
    else:
        raise CommandError(f"unknown command: {cmd}")
    return True


def run_script(tank: Tank, lines, out: TextIO, err: TextIO) -> int:
    for lineno, line in enumerate(lines, 1):
        try:
            if not execute(tank, line, out):
                break
        except CommandError as exc:
            err.write(f"line {lineno}: {exc}\n")
            return 1
        except NotQuiescent as exc:
            err.write(f"line {lineno}: queue still busy after {exc.ticks} ticks\n")
            return 2
    if tank.queue_length() > 0:
        try:
            tank.quiesce()
        except NotQuiescent as exc:
            err.write(f"queue still busy after {exc.ticks} ticks\n")
            return 2
    return 0


def cmd_repl(args: argparse.Namespace) -> int:
    tank = _build_tank(args)
    out = sys.stdout
    out.write("fishtank repl; commands: load insert remove query quiesce stats dump exit\n")
    while True:
        out.write("> ")
        out.flush()
        line = sys.stdin.readline()
        if not line:
            break
        try:
            if not execute(tank, line, out):
                break
        except CommandError as exc:
            out.write(f"error: {exc}\n")
        except NotQuiescent as exc:
            out.write(f"error: queue still busy after {exc.ticks} ticks\n")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    try:
        tank = _build_tank(args)
    except (CommandError, LangError, NotQuiescent) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    try:
        with open(args.script, "r", encoding="utf-8") as f:
            lines = f.readlines()
    except OSError as exc:
        sys.stderr.write(f"cannot read {args.script}: {exc.strerror}\n")
        return 1
    return run_script(tank, lines, sys.stdout, sys.stderr)


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    try:
        tank = _build_tank(args)
        tank.quiesce()
    except (CommandError, LangError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except NotQuiescent as exc:
        sys.stderr.write(f"queue still busy after {exc.ticks} ticks\n")
        return 2
    port = args.port
    env_port = os.environ.get("FISHTANK_PORT")
    if env_port is not None:
        try:
            port = int(env_port)
        except ValueError:
            sys.stderr.write(f"bad FISHTANK_PORT: {env_port!r}\n")
            return 1
    sys.stdout.write(f"serving on http://127.0.0.1:{port}\n")
    sys.stdout.flush()
    try:
        serve(tank, port, args.assets)
    except KeyboardInterrupt:
        pass
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fishtank",
                                     description="deductive database engine")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--journal", default=None, help="journal file for durability")
        p.add_argument("--load", action="append", default=[], metavar="FILE",
                       help="program file to load at startup (repeatable)")
        p.add_argument("--tick-budget", type=int, default=DEFAULT_TICK_BUDGET,
                       help="max ticks per quiesce")
        p.add_argument("--solve-budget", type=int, default=DEFAULT_MAX_STEPS,
                       help="max resolution steps per guard or query")

    repl = sub.add_parser("repl", help="interactive session")
    common(repl)
    repl.set_defaults(fn=cmd_repl)

    run = sub.add_parser("run", help="execute a command script")
    run.add_argument("script")
    common(run)
    run.set_defaults(fn=cmd_run)

    serve_p = sub.add_parser("serve", help="http api and asset server")
    serve_p.add_argument("--port", type=int, default=8080)
    serve_p.add_argument("--assets", default=None, help="static asset directory")
    common(serve_p)
    serve_p.set_defaults(fn=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
