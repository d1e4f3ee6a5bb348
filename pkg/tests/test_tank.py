import os

import pytest

import helpers
from fishtank import Tank, parse_axiom, print_axiom
from fishtank.storage import QueueEntry, QueueFull
from fishtank.tank import NotQuiescent

PROG = ":- fact f/1.\n:- fact g/1.\nf(X) ~> g(X).\n"


def snap(tank):
    return helpers.snap(tank)


def ins(tank, text):
    tank.insert(parse_axiom(text, tank.decls))


def rem(tank, text):
    tank.remove(parse_axiom(text, tank.decls))


class TestTick:
    def test_three_ticks_to_quiesce(self):
        t = Tank.create()
        t.load_program(PROG)
        ins(t, "f(1)")
        assert t.quiesce() == 3
        assert snap(t) == {"f(1)": 1, "g(1)": 1, "f(V0) ~> g(V0)": 1}

    def test_tick_on_empty_queue(self):
        t = Tank.create()
        assert t.tick() is None
        assert t.tick_count == 0

    def test_runaway_cascade_stopped_by_max_ticks(self):
        t = Tank.create()
        t.load_program(":- fact f/1.\nf(X) ~> f(suc(X)).\n")
        ins(t, "f(1)")
        with pytest.raises(NotQuiescent):
            t.quiesce(max_ticks=20)

    def test_rule_multiplicity_scales_derivation(self):
        t = Tank.create()
        t.load_program(PROG)
        for _ in range(3):
            t.insert(parse_axiom("f(X) ~> g(X)", t.decls))
        ins(t, "f(1)")
        t.quiesce()
        assert snap(t)["g(1)"] == 4  # load gave the rule mult 1 already

    def test_fact_delta_scales_derivation(self):
        t = Tank.create()
        t.load_program(PROG)
        t.quiesce()
        t.queue.push([QueueEntry(parse_axiom("f(2)", t.decls), 5)])
        t.quiesce()
        assert snap(t)["g(2)"] == 5

    def test_product_law_n_m_k(self):
        t = Tank.create()
        t.load_program(
            ":- fact f/1.\n:- fact g/1.\n"
            "f(X) { member(Z, [a, b]) } ~> g(X).\n")
        t.insert(parse_axiom("f(X) { member(Z, [a, b]) } ~> g(X)", t.decls))
        t.quiesce()  # rule mult m = 2
        t.queue.push([QueueEntry(parse_axiom("f(5)", t.decls), 3)])  # n = 3
        t.quiesce()
        # k = 2 guard solutions, same consequence: 3 * 2 * 2
        assert snap(t)["g(5)"] == 12

    def test_guard_solutions_fan_out_distinct(self):
        t = Tank.create()
        t.load_program(
            ":- fact f/1.\n:- fact g/1.\n"
            "f(X) { member(Z, [a, b, c]) } ~> g(Z).\n")
        ins(t, "f(9)")
        t.quiesce()
        s = snap(t)
        assert s["g(a)"] == 1 and s["g(b)"] == 1 and s["g(c)"] == 1

    def test_remove_to_negative(self):
        t = Tank.create()
        t.load_program(":- fact f/1.\n")
        rem(t, "f(1)")
        t.quiesce()
        assert snap(t) == {"f(1)": -1}

    def test_negative_cancels_on_insert(self):
        t = Tank.create()
        t.load_program(":- fact f/1.\n")
        rem(t, "f(1)")
        ins(t, "f(1)")
        t.quiesce()
        assert snap(t) == {}

    def test_removal_cascade(self):
        t = Tank.create()
        t.load_program(PROG)
        ins(t, "f(1)")
        t.quiesce()
        rem(t, "f(1)")
        t.quiesce()
        assert snap(t) == {"f(V0) ~> g(V0)": 1}

    def test_emitted_rule_cascade(self):
        t = Tank.create()
        t.load_program(
            ":- fact a/1.\n:- fact b/1.\n:- fact c/2.\n"
            "a(X) ~> (b(Y) ~> c(X, Y)).\n")
        ins(t, "a(1)")
        ins(t, "b(2)")
        t.quiesce()
        s = snap(t)
        assert s["c(1, 2)"] == 1
        assert s["b(V0) ~> c(1, V0)"] == 1
        rem(t, "a(1)")
        t.quiesce()
        assert snap(t) == {"a(V0) ~> (b(V1) ~> c(V0, V1))": 1, "b(2)": 1}

    def test_emitted_rules_accumulate_alpha_equal(self):
        t = Tank.create()
        t.load_program(
            ":- fact a/1.\n:- fact b/1.\n:- fact c/1.\n"
            "a(X) ~> (b(Y) ~> c(Y)).\n")
        ins(t, "a(1)")
        ins(t, "a(2)")
        t.quiesce()
        assert snap(t)["b(V0) ~> c(V0)"] == 2

    def test_nonground_fact_with_ground_subject_pairs(self):
        t = Tank.create()
        t.load_program(
            ":- fact f/2.\n:- fact g/1.\n"
            "f(1, Y) ~> g(Y).\n")
        ins(t, "f(1, X)")  # same partition as the rule: both subjects are 1
        t.quiesce()
        s = snap(t)
        assert s["g(V0)"] == 1
        assert s["f(1, V0)"] == 1

    def test_generic_fact_pairs_with_generic_rule(self):
        t = Tank.create()
        t.load_program(PROG)
        ins(t, "f(X)")
        t.quiesce()
        s = snap(t)
        assert s["f(V0)"] == 1
        assert s["g(V0)"] == 1

    def test_arity_respected_in_pairing(self):
        t = Tank.create()
        t.load_program(
            ":- fact f/1.\n:- fact f/2.\n:- fact g/1.\n"
            "f(X, Y) ~> g(X).\n")
        ins(t, "f(7)")
        t.quiesce()
        assert "g(7)" not in snap(t)


class TestOrderIndependence:
    def test_negative_permutations(self):
        ops = [("insert", "f(X) ~> g(X)"), ("remove", "f(1)"), ("insert", "f(1)")]
        import itertools

        snaps = set()
        for perm in itertools.permutations(ops):
            t = Tank.create()
            t.load_program(":- fact f/1.\n:- fact g/1.\n")
            for op, text in perm:
                (ins if op == "insert" else rem)(t, text)
            t.quiesce()
            snaps.add(tuple(sorted(snap(t).items())))
        assert len(snaps) == 1
        only = dict(next(iter(snaps)))
        assert only == {"f(V0) ~> g(V0)": 1}

    def test_interleaved_quiesce_equivalent(self):
        t1 = Tank.create()
        t1.load_program(PROG)
        ins(t1, "f(1)")
        t1.quiesce()
        ins(t1, "f(2)")
        t1.quiesce()

        t2 = Tank.create()
        t2.load_program(PROG)
        ins(t2, "f(1)")
        ins(t2, "f(2)")
        t2.quiesce()
        assert snap(t1) == snap(t2)


class TestIOCounts:
    def setup_tank(self):
        t = Tank.create()
        t.load_program(":- fact f/1.\n:- fact g/1.\n:- fact h/2.\n")
        for text in ["f(1)", "f(2)", "f(3)", "h(1, 1)"]:
            ins(t, text)
        t.quiesce()
        return t

    def test_concrete_fact_insert_is_one_access(self):
        t = self.setup_tank()
        t.store.reset_io_counter()
        ins(t, "f(4)")
        t.quiesce()
        assert t.store.io_counter == 1

    def test_concrete_insert_into_shared_partition(self):
        t = self.setup_tank()
        t.store.reset_io_counter()
        ins(t, "g(1)")  # lands in the partition already holding f(1), h(1,1)
        t.quiesce()
        assert t.store.io_counter == 1

    def test_generic_rule_insert_reads_each_partition_holding_name(self):
        t = self.setup_tank()
        t.store.reset_io_counter()
        t.insert(parse_axiom("f(X) ~> g(X)", t.decls))
        t.tick()  # the rule's own tick
        assert t.store.io_counter == 3  # partitions of f(1), f(2), f(3)

    def test_generic_rule_over_absent_name(self):
        t = self.setup_tank()
        t.store.reset_io_counter()
        t.insert(parse_axiom("g(X) { member(X, [1]) } ~> f(X)", t.decls))
        t.tick()
        assert t.store.io_counter == 0  # no partition holds a g entry

    def test_dead_letter_before_partition_open_is_free(self):
        # counterpart rule lives in the generic section, so the tick dies
        # before any partition access
        t = Tank.create(solve_budget=50)
        t.load_program(
            ":- fact f/1.\n:- fact g/1.\n:- static spin/1.\n"
            "spin(X) :- spin(X).\n"
            "f(X) { spin(X) } ~> g(X).\n")
        t.quiesce()
        t.store.reset_io_counter()
        ins(t, "f(1)")
        t.tick()
        assert len(t.dead_letters) == 1
        assert t.store.io_counter == 0

    def test_dead_letter_inside_partition_rolls_back(self):
        t = Tank.create(solve_budget=50)
        t.load_program(
            ":- fact f/1.\n:- fact g/1.\n:- static spin/1.\n"
            "spin(X) :- spin(X).\n"
            "f(1) { spin(1) } ~> g(1).\n")
        t.quiesce()
        before = snap(t)
        t.store.reset_io_counter()
        ins(t, "f(1)")
        t.tick()
        assert len(t.dead_letters) == 1
        assert t.store.io_counter == 1
        assert snap(t) == before


class TestDeadLetters:
    def build(self):
        t = Tank.create(solve_budget=50)
        t.load_program(
            ":- fact f/1.\n:- fact g/1.\n:- static spin/1.\n"
            "spin(X) :- spin(X).\n"
            "f(X) { spin(X) } ~> g(X).\n")
        t.quiesce()
        return t

    def test_entry_recorded_and_skipped(self):
        t = self.build()
        ins(t, "f(1)")
        t.quiesce()
        assert len(t.dead_letters) == 1
        entry = t.dead_letters[0]
        assert entry["axiom"] == "f(1)"
        assert entry["delta"] == 1
        assert "budget" in entry["error"] or "depth" in entry["error"]
        # no effects: the fact did not land, nothing was derived
        assert "f(1)" not in snap(t)

    def test_queue_continues_after_dead_letter(self):
        t = self.build()
        ins(t, "f(1)")
        ins(t, "g(7)")
        t.quiesce()
        assert snap(t)["g(7)"] == 1


class TestDurability:
    def test_replay_matches_live(self, tmp_path):
        jp = str(tmp_path / "t.ftj")
        t = Tank.create(journal_path=jp)
        t.load_program(PROG)
        ins(t, "f(1)")
        ins(t, "f(2)")
        t.quiesce()
        rem(t, "f(1)")
        t.quiesce()
        live = snap(t)
        t.close()

        r = Tank.create(journal_path=jp)
        r.load_program(PROG, axioms=False)
        r.quiesce()
        assert snap(r) == live
        r.close()

    def test_replay_of_push_without_ticks(self, tmp_path):
        jp = str(tmp_path / "t.ftj")
        t = Tank.create(journal_path=jp)
        t.load_program(":- fact f/1.\n")
        ins(t, "f(1)")  # durable, never ticked
        t.close()

        r = Tank.create(journal_path=jp)
        r.load_program(":- fact f/1.\n", axioms=False)
        assert r.queue_length() == 1
        r.quiesce()
        assert snap(r) == {"f(1)": 1}
        r.close()

    def test_restored_flag(self, tmp_path):
        jp = str(tmp_path / "t.ftj")
        t = Tank.create(journal_path=jp)
        assert not t.restored
        t.load_program(PROG)
        t.quiesce()
        t.close()
        r = Tank.create(journal_path=jp)
        assert r.restored
        r.close()

    def test_prefix_cuts_converge(self, tmp_path):
        jp = str(tmp_path / "t.ftj")
        t = Tank.create(journal_path=jp)
        t.load_program(PROG)
        for text in ["f(1)", "f(2)", "f(3)"]:
            ins(t, text)
        boundary = os.path.getsize(jp)
        t.quiesce()
        want = snap(t)
        t.close()
        data = open(jp, "rb").read()

        for cut in range(boundary, len(data) + 1, 7):
            jp2 = str(tmp_path / "cut.ftj")
            with open(jp2, "wb") as f:
                f.write(data[:cut])
            r = Tank.create(journal_path=jp2)
            r.load_program(PROG, axioms=False)
            r.quiesce()
            assert snap(r) == want, "cut at byte %d diverged" % cut
            r.close()
            os.unlink(jp2)


class TestLimits:
    def test_queue_full(self):
        t = Tank.create(max_queue=2)
        t.load_program(":- fact f/1.\n")
        ins(t, "f(1)")
        ins(t, "f(2)")
        with pytest.raises(QueueFull):
            ins(t, "f(3)")

    def test_not_quiescent_reports_ticks(self):
        t = Tank.create()
        t.load_program(PROG)
        ins(t, "f(1)")
        try:
            t.quiesce(max_ticks=1)
        except NotQuiescent as e:
            assert e.ticks == 1
        else:
            pytest.fail("expected NotQuiescent")

    def test_stats_shape(self):
        t = Tank.create()
        t.load_program(PROG)
        ins(t, "f(1)")
        t.quiesce()
        s = t.stats()
        assert s["queue_length"] == 0
        assert s["tick_count"] == 3
        assert s["store_entries"] == 3
        assert s["dead_letters"] == []
