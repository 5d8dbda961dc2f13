"""Lockstep verification, bound auditing, and explosion reports."""

import pytest

from fireball.calculus import gen_t, gen_u
from fireball.easy import run_easy, step_easy
from fireball.fast import run_fast
from fireball.machine import (
    AbsItem,
    Counters,
    DumpEntry,
    RunResult,
    State,
    compile_term,
    initial_state,
)
from fireball.naive import run_naive
from fireball.terms import Abs, App, Var, alpha_eq, free_vars, parse, print_term, size
from fireball import verify
from fireball.verify import (
    EXPLOSION_COLUMNS,
    audit_bounds,
    corpus_reports,
    explosion_report,
    lockstep,
    random_term,
)

from conftest import random_term as oracle_random_term

EXAMPLE = r"(\z.z (y z)) \x.x"


class TestLockstepPass:
    @pytest.mark.parametrize("machine,transitions", [
        ("easy", 10), ("fast", 9), ("naive", 13),
    ])
    def test_worked_example(self, machine, transitions):
        rep = lockstep(parse(EXAMPLE), machine)
        assert rep.ok
        assert rep.beta == 2
        assert rep.transitions == transitions
        assert rep.final_class == "inert"
        assert not rep.exhausted and not rep.budget_exceeded

    def test_variable_needs_no_transitions(self):
        rep = lockstep(parse("y"), "fast")
        assert rep.ok and rep.transitions == 0 and rep.beta == 0
        assert rep.final_class == "inert"

    def test_abstraction_final_class(self):
        rep = lockstep(parse(r"\x.x"), "easy")
        assert rep.ok and rep.final_class == "abstraction"

    def test_fuel_exhaustion_verifies_the_prefix(self):
        omega = parse(r"(\x.x x) \x.x x")
        rep = lockstep(omega, "easy", fuel=20)
        assert rep.exhausted and rep.final_class == "fuel_exhausted"
        assert rep.ok  # everything that ran was checked and passed
        assert rep.transitions == 20

    def test_fuel_must_be_positive(self):
        with pytest.raises(ValueError):
            lockstep(parse("y"), "easy", fuel=0)

    def test_decode_budget_degrades_to_counters(self):
        # the normal form of this family member is far larger than the budget
        rep = lockstep(gen_t(12), "easy", budget=300)
        assert rep.budget_exceeded
        assert rep.ok  # counter bounds still checked and clean
        assert rep.beta == 12
        assert rep.final_class == "inert"

    def test_naive_readback_abort_is_flagged(self):
        rep = lockstep(gen_t(10), "naive", budget=120)
        assert rep.budget_exceeded
        assert rep.final_class == "aborted"
        assert not rep.exhausted

    def test_summary_mentions_verdict(self):
        rep = lockstep(parse("y"), "easy")
        assert rep.summary().startswith("PASS easy")


class TestLockstepCatchesBugs:
    def test_swapped_application_is_a_decode_mismatch(self, monkeypatch):
        def swapped(state):
            if isinstance(state.code, App):
                entry = DumpEntry(state.code.right, state.stack)
                return ("c1", State((entry, state.dump), state.code.left,
                                    None, state.env), 1)
            return step_easy(state)

        monkeypatch.setitem(verify._STEPPERS, "easy", swapped)
        rep = lockstep(parse("a b"), "easy", check_invariants=False)
        assert not rep.ok
        assert any("overhead transition changed" in m
                   for m in rep.decode_mismatches)

    def test_dropped_binding_is_a_beta_mismatch(self, monkeypatch):
        def dropping(state):
            if isinstance(state.code, Abs) and state.stack is not None:
                _, rest = state.stack
                return ("m", State(state.dump, state.code.body, rest,
                                   state.env), 1)
            return step_easy(state)

        monkeypatch.setitem(verify._STEPPERS, "easy", dropping)
        rep = lockstep(parse(r"(\x.x) \z.z"), "easy", check_invariants=False)
        assert any("does not match the reference step" in m
                   for m in rep.decode_mismatches)

    def test_duplicate_binding_is_an_invariant_violation(self, monkeypatch):
        def doubling(state):
            if isinstance(state.code, Abs) and state.stack is not None:
                item, rest = state.stack
                env = state.env.bind(state.code.binder, item)
                env = env.bind(state.code.binder, item)
                return ("m", State(state.dump, state.code.body, rest, env), 1)
            return step_easy(state)

        monkeypatch.setitem(verify._STEPPERS, "easy", doubling)
        rep = lockstep(parse(r"(\x.x) \z.z"), "easy")
        assert not rep.ok
        assert any("fresh" in m for m in rep.invariant_violations)

    def test_premature_stop_is_reported(self, monkeypatch):
        monkeypatch.setitem(verify._STEPPERS, "easy", lambda state: None)
        rep = lockstep(parse(r"(\x.x) \z.z"), "easy", check_invariants=False)
        assert any("non-final" in m for m in rep.invariant_violations)


class TestAuditBounds:
    def test_clean_runs_have_no_violations(self):
        t = parse(EXAMPLE)
        for run in (run_easy, run_fast, run_naive):
            assert audit_bounds(run(t, trace=True)) == []

    def test_easy_substitutions_on_growing_family(self):
        r = run_easy(gen_u(10), trace=True)
        assert r.counters.subst == 10
        assert r.counters.subst <= (1 + r.counters.beta) * size(r.code0)
        assert audit_bounds(r) == []

    def test_fast_never_substitutes_here(self):
        r = run_fast(gen_u(10), trace=True)
        assert r.counters.subst == 0
        assert audit_bounds(r) == []

    def _fake(self, machine, counters, exhausted=False):
        t = parse(r"(\x.x) y")
        code0 = compile_term(t)
        return RunResult(machine, t, code0, initial_state(code0), counters,
                         exhausted, None, None)

    def test_synthetic_substitution_overrun_is_caught(self):
        c = Counters()
        for _ in range(100):
            c.record("s", 1)
        c.record("m", 1)
        violations = audit_bounds(self._fake("easy", c))
        assert any("substitution transitions" in v for v in violations)

    def test_synthetic_fast_subst_above_beta(self):
        c = Counters()
        c.record("b2", 1)
        c.record("s", 1)
        c.record("s", 1)
        violations = audit_bounds(self._fake("fast", c))
        assert any("exceed beta" in v for v in violations)

    def test_fast_exhausted_run_may_lead_by_one(self):
        c = Counters()
        c.record("b2", 1)
        c.record("s", 1)
        c.record("s", 1)
        assert audit_bounds(self._fake("fast", c, exhausted=True)) == []

    def test_kind_mix_is_checked(self):
        c = Counters()
        c.record("m", 1)
        violations = audit_bounds(self._fake("fast", c))
        assert any("plain binding" in v for v in violations)
        c = Counters()
        c.record("b1", 1)
        violations = audit_bounds(self._fake("easy", c))
        assert any("renaming beta" in v for v in violations)

    def test_inconsistent_totals_are_caught(self):
        c = Counters()
        c.per_kind["c1"] = 3  # recorded behind record()'s back
        fake = self._fake("naive", c)
        fake.counters.per_kind["zz"] = 1
        violations = audit_bounds(fake)
        assert any("unknown transition kinds" in v for v in violations)

    def test_traced_prefix_audit_runs_on_every_state(self):
        r = run_easy(gen_u(6), trace=True)
        assert len(r.states) == r.counters.transitions + 1
        assert audit_bounds(r) == []

    def test_doctored_trace_is_caught_per_state(self):
        r = run_easy(parse(EXAMPLE), trace=True)
        doctored = RunResult(r.machine, r.source, r.code0, r.state,
                             r.counters, r.exhausted, r.states,
                             ["s"] * len(r.kinds))
        violations = audit_bounds(doctored)
        assert any("free occurrences" in v or "substitution" in v
                   for v in violations)


class TestExplosionReport:
    def test_u_family_substitution_gap(self):
        rows = explosion_report("u", 8, machines=("easy", "fast"))
        assert len(rows) == 16
        for row in rows:
            assert row["beta"] == 1
            if row["machine"] == "easy":
                assert row["subst"] == row["n"]
            else:
                assert row["subst"] == 0
            assert isinstance(row["decoded_size_or_flag"], int)

    def test_t_family_naive_work_doubles(self):
        rows = explosion_report("t", 10, machines=("naive",))
        costs = [row["ram_cost"] for row in rows]
        for a, b in zip(costs[3:], costs[4:]):
            assert b >= 2 * a

    def test_s_family_fast_beta_matches_index(self):
        rows = explosion_report("s", 6, machines=("fast",))
        assert [row["beta"] for row in rows] == list(range(1, 7))

    def test_budget_exceeded_readback_leaves_flag(self):
        rows = explosion_report("t", 10, machines=("naive",), budget=120)
        flagged = [r for r in rows if r["decoded_size_or_flag"] == "budget_exceeded"]
        assert flagged
        assert flagged[-1]["beta"] is None  # aborted mid-run, counters unknown

    def test_decode_budget_exceeded_after_clean_run(self):
        rows = explosion_report("t", 10, machines=("easy",), budget=120)
        flagged = [r for r in rows if r["decoded_size_or_flag"] == "budget_exceeded"]
        assert flagged
        assert all(isinstance(r["beta"], int) for r in flagged)

    def test_fuel_exhaustion_flag(self):
        rows = explosion_report("t", 8, machines=("easy",), fuel=5)
        assert rows[-1]["decoded_size_or_flag"] == "fuel_exhausted"

    def test_rows_carry_all_columns(self):
        rows = explosion_report("u", 2)
        for row in rows:
            assert tuple(row) == EXPLOSION_COLUMNS

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            explosion_report("nope", 3)
        with pytest.raises(ValueError):
            explosion_report("t", 0)


class TestRandomCorpus:
    def test_generator_is_seeded_and_bounded(self):
        import random
        a = [random_term(random.Random(5), max_size=18) for _ in range(30)]
        b = [random_term(random.Random(5), max_size=18) for _ in range(30)]
        for x, y in zip(a, b):
            assert alpha_eq(x, y) or print_term(x) == print_term(y)
            assert size(x) <= 19

    def test_closed_terms_have_no_free_variables(self):
        import random
        rng = random.Random(11)
        for _ in range(50):
            t = random_term(rng, max_size=15, closed=True)
            assert free_vars(t) == set()

    def test_corpus_reports_all_pass(self):
        reports = corpus_reports(25, seed=3, max_size=18, fuel=500)
        assert len(reports) == 75
        assert all(r.ok for r in reports)

    def test_corpus_is_deterministic(self):
        a = corpus_reports(5, seed=9, max_size=12, fuel=300)
        b = corpus_reports(5, seed=9, max_size=12, fuel=300)
        assert [r.term for r in a] == [r.term for r in b]
        assert [r.transitions for r in a] == [r.transitions for r in b]

    def test_matches_independent_generator_on_oracle_corpus(self, rng):
        # both generators produce terms the whole pipeline agrees on
        for _ in range(20):
            t = oracle_random_term(rng, max_size=16)
            for machine in ("easy", "fast", "naive"):
                assert lockstep(t, machine, fuel=400).ok
