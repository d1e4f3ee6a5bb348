"""TweetLog: the microblogging app, defined entirely by .clg assets.

The application is three files loaded into a tank: schema.clg declares
the vocabulary and replaceText, grammar.clg holds the tokenizer
productions, rules.clg the five stream rules.  Fixtures pair operation
logs with hand-derived expected query results for end-to-end tests.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from ..lang import parse_axiom, parse_dgoal
from ..terms import Term, term_from_json

ASSET_FILES = ("schema.clg", "grammar.clg", "rules.clg")


def asset_text(name: str) -> str:
    return resources.files(__package__).joinpath(name).read_text(encoding="utf-8")


def combined_program() -> str:
    return "\n".join(asset_text(name) for name in ASSET_FILES)


def load_tweetlog(tank) -> dict:
    """Load schema, grammar and rules, then quiesce so the five rules are
    resident.  Validation happens before anything is applied, so a broken
    asset leaves the tank untouched."""
    summary = tank.load_program(combined_program())
    summary["ticks"] = tank.quiesce()
    return summary


@dataclass(frozen=True)
class FixtureQuery:
    goal: str
    results: tuple  # tuple of dict[str, Term]


@dataclass(frozen=True)
class Fixture:
    name: str
    ops: tuple          # (op, axiom text) pairs
    queries: tuple      # FixtureQuery


def load_fixture(name: str) -> Fixture:
    raw = json.loads(
        resources.files(__package__).joinpath("fixtures/%s.json" % name)
        .read_text(encoding="utf-8"))
    queries = tuple(
        FixtureQuery(
            q["goal"],
            tuple(
                {var: term_from_json(tj) for var, tj in result.items()}
                for result in q["results"]))
        for q in raw["queries"])
    ops = tuple((op["op"], op["axiom"]) for op in raw["ops"])
    return Fixture(raw["name"], ops, queries)


def fixture_basic() -> Fixture:
    return load_fixture("basic")


def fixture_retraction() -> Fixture:
    return load_fixture("retraction")


def apply_ops(tank, fixture: Fixture) -> None:
    for op, text in fixture.ops:
        axiom = parse_axiom(text, tank.decls)
        if op == "insert":
            tank.insert(axiom)
        elif op == "remove":
            tank.remove(axiom)
        else:
            raise ValueError("unknown fixture op %r" % op)


def run_fixture(tank, fixture: Fixture):
    """Apply the ops, quiesce, and evaluate each fixture query.

    Returns a list of (FixtureQuery, actual results) pairs.
    """
    from ..query import query as run_query

    apply_ops(tank, fixture)
    tank.quiesce()
    out = []
    for fq in fixture.queries:
        goal = parse_dgoal(fq.goal, tank.decls)
        out.append((fq, run_query(goal, tank)))
    return out
