"""Verification of the machines against the reference evaluator.

lockstep drives a machine transition by transition and checks, through
decoding, that beta transitions advance the term by exactly one reference
step and that overhead transitions leave it unchanged; audit_bounds checks
the complexity bounds each machine is expected to satisfy; explosion_report
measures whole families to expose the size blowups the machines do or do
not avoid.
"""

from __future__ import annotations

import functools
import random
from dataclasses import dataclass, field

from .calculus import gen_s_applied, gen_t, gen_u, rtl_step
from .easy import run_easy, step_easy
from .fast import run_fast, step_fast
from .machine import (
    BETA_KINDS,
    DEFAULT_BUDGET,
    DEFAULT_FUEL,
    SUBST_KINDS,
    BudgetExceeded,
    Counters,
    InvariantChecker,
    InvariantViolation,
    RunResult,
    commutative_size,
    compile_term,
    decode_state,
    initial_state,
    is_final,
    state_free_size,
    state_size,
)
from .naive import run_naive, step_naive
from .terms import (
    Abs,
    App,
    Term,
    Var,
    alpha_eq,
    free_size,
    fresh_var,
    print_term,
    size,
)

_STEPPERS = {"easy": step_easy, "fast": step_fast, "naive": step_naive}

_ALL_KINDS = {"c1", "c2", "c3", "m", "b1", "b2", "s"}

_MAX_RECORDED = 8  # per violation list; one entry proves the failure


@dataclass
class LockstepReport:
    term: str
    machine: str
    transitions: int = 0
    beta: int = 0  # machine beta transitions; each one decode-matched unless flagged
    decode_mismatches: list = field(default_factory=list)
    invariant_violations: list = field(default_factory=list)
    bound_violations: list = field(default_factory=list)
    final_class: str = "not_verified"
    exhausted: bool = False
    budget_exceeded: bool = False  # decode checks degraded to counter-only

    @property
    def ok(self) -> bool:
        return not (
            self.decode_mismatches
            or self.invariant_violations
            or self.bound_violations
        )

    def summary(self) -> str:
        verdict = "PASS" if self.ok else "FAIL"
        notes = []
        if self.exhausted:
            notes.append("fuel exhausted")
        if self.budget_exceeded:
            notes.append("decode budget exceeded, counters only")
        for lst in (self.decode_mismatches, self.invariant_violations,
                    self.bound_violations):
            notes.extend(lst[:1])
        tail = f" ({'; '.join(notes)})" if notes else ""
        return (
            f"{verdict} {self.machine}: beta={self.beta} "
            f"transitions={self.transitions} {self.term}{tail}"
        )


def _prefix_violation(machine: str, counters: Counters, state,
                      size0: int) -> str | None:
    """The counter inequalities that must hold after every transition."""
    if machine == "naive":
        return None
    if counters.commutative + commutative_size(state) > (1 + counters.subst) * size0:
        return (
            f"commutative budget exceeded after {counters.transitions} transitions: "
            f"{counters.commutative} + state {commutative_size(state)} > "
            f"(1+{counters.subst})*{size0}"
        )
    if machine == "easy" and counters.subst > (1 + counters.beta) * size0:
        return (
            f"substitution budget exceeded after {counters.transitions} transitions: "
            f"{counters.subst} > (1+{counters.beta})*{size0}"
        )
    if machine == "fast" and counters.subst > counters.beta + 1:
        return (
            f"substitutions outpaced beta after {counters.transitions} transitions: "
            f"{counters.subst} > {counters.beta} + 1"
        )
    return None


def lockstep(t: Term, machine: str = "easy", fuel: int = DEFAULT_FUEL,
             budget: int = DEFAULT_BUDGET,
             check_invariants: bool = True) -> LockstepReport:
    """Run the machine on t, checking every transition against the reference
    strategy.  All failures become report entries; fuel exhaustion verifies
    the executed prefix and is flagged, not failed."""
    if fuel < 1:
        raise ValueError("fuel must be >= 1")
    stepper = _STEPPERS[machine]
    if machine == "naive":
        stepper = functools.partial(step_naive, budget=budget)
    code0 = compile_term(t)
    state = initial_state(code0)
    counters = Counters()
    size0 = size(code0)
    report = LockstepReport(term=print_term(t), machine=machine)

    checker: InvariantChecker | None = None
    if check_invariants:
        checker = InvariantChecker(machine, budget)
        checker.start(code0)

    def run_checker(kind=None):
        nonlocal checker
        if checker is None:
            return
        try:
            checker.check(state, counters, kind)
        except InvariantViolation as e:
            if len(report.invariant_violations) < _MAX_RECORDED:
                report.invariant_violations.append(str(e))
            checker = None  # later checks would only cascade
        except BudgetExceeded:
            report.budget_exceeded = True
            checker = None

    decode_ok = True
    current: Term | None = None
    try:
        current = decode_state(state, unfold=True, budget=budget)
    except BudgetExceeded:
        decode_ok = False
        report.budget_exceeded = True
    run_checker()

    final = False
    aborted = False
    while report.transitions < fuel:
        try:
            r = stepper(state)
        except BudgetExceeded:
            # the machine itself (naive readback) blew the node budget
            report.budget_exceeded = True
            aborted = True
            break
        if r is None:
            if not is_final(state, machine):
                report.invariant_violations.append(
                    "no transition applies to a non-final state"
                )
            final = True
            break
        kind, state, cost = r
        counters.record(kind, cost)
        report.transitions += 1
        if kind in BETA_KINDS:
            report.beta += 1
        if decode_ok:
            new_decode = None
            try:
                new_decode = decode_state(state, unfold=True, budget=budget)
            except BudgetExceeded:
                decode_ok = False
                report.budget_exceeded = True
            if new_decode is not None:
                if kind in BETA_KINDS:
                    expected = rtl_step(current)
                    if expected is None:
                        report.decode_mismatches.append(
                            f"transition {report.transitions} ({kind}): machine "
                            "fired a beta transition on a normal term"
                        )
                        decode_ok = False
                    elif not alpha_eq(new_decode, expected[0]):
                        report.decode_mismatches.append(
                            f"transition {report.transitions} ({kind}): decode "
                            "does not match the reference step"
                        )
                        decode_ok = False
                    else:
                        current = expected[0]
                else:
                    if not alpha_eq(new_decode, current):
                        report.decode_mismatches.append(
                            f"transition {report.transitions} ({kind}): overhead "
                            "transition changed the decoded term"
                        )
                        decode_ok = False
        run_checker(kind)
        violation = _prefix_violation(machine, counters, state, size0)
        if violation and len(report.bound_violations) < _MAX_RECORDED:
            report.bound_violations.append(violation)

    report.exhausted = not aborted and not final and not is_final(state, machine)
    if aborted:
        report.final_class = "aborted"
    elif report.exhausted:
        report.final_class = "fuel_exhausted"
    else:
        report.final_class = (
            "abstraction" if isinstance(state.code, Abs) else "inert"
        )
        if decode_ok and rtl_step(current) is not None:
            report.decode_mismatches.append(
                "machine finished but the decoded term still has a redex"
            )

    result = RunResult(machine, t, code0, state, counters,
                       report.exhausted, None, None)
    for violation in audit_bounds(result):
        if len(report.bound_violations) < _MAX_RECORDED:
            report.bound_violations.append(violation)
    return report


def audit_bounds(result: RunResult, t0: Term | None = None,
                 machine: str | None = None) -> list[str]:
    """Check the counter inequalities a finished (or exhausted) run must
    satisfy.  With a traced result, the per-transition forms are checked at
    every prefix.  Returns violation descriptions, empty when all hold."""
    machine = machine or result.machine
    code0 = result.code0 if t0 is None else compile_term(t0)
    c = result.counters
    size0 = size(code0)
    v: list[str] = []

    if c.transitions != c.beta + c.subst + c.commutative:
        v.append("transition kinds do not add up to the total")
    unknown = set(c.per_kind) - _ALL_KINDS
    if unknown:
        v.append(f"unknown transition kinds recorded: {sorted(unknown)}")
    if machine in ("easy", "naive") and any(k in c.per_kind for k in ("b1", "b2")):
        v.append(f"{machine} machine recorded renaming beta kinds")
    if machine == "fast" and "m" in c.per_kind:
        v.append("fast machine recorded a plain binding beta kind")

    if machine == "easy":
        if c.subst > (1 + c.beta) * size0:
            v.append(
                f"substitution transitions {c.subst} exceed "
                f"(1+beta)*|t0| = {(1 + c.beta) * size0}"
            )
        if c.commutative > (1 + c.subst) * size0:
            v.append(
                f"commutative transitions {c.commutative} exceed "
                f"(1+subst)*|t0| = {(1 + c.subst) * size0}"
            )
        bound = free_size(code0) + size0 * c.beta - c.subst
        if state_free_size(result.state) > bound:
            v.append(
                f"free occurrences {state_free_size(result.state)} exceed "
                f"their budget {bound} at the last state"
            )
    elif machine == "fast":
        allowed = c.beta + (1 if result.exhausted else 0)
        if c.subst > allowed:
            v.append(f"substitution transitions {c.subst} exceed beta ({allowed})")
        if c.commutative > (1 + c.subst) * size0:
            v.append(
                f"commutative transitions {c.commutative} exceed "
                f"(1+subst)*|t0| = {(1 + c.subst) * size0}"
            )

    if result.states is not None and machine in ("easy", "fast"):
        free0 = free_size(code0)
        prefix = Counters()
        for i, st in enumerate(result.states):
            if i > 0:
                prefix.record(result.kinds[i - 1], 0)
            violation = _prefix_violation(machine, prefix, st, size0)
            if violation:
                v.append(f"at state {i}: {violation}")
            if machine == "easy":
                bound = free0 + size0 * prefix.beta - prefix.subst
                if state_free_size(st) > bound:
                    v.append(
                        f"at state {i}: free occurrences "
                        f"{state_free_size(st)} exceed their budget {bound}"
                    )
            if len(v) >= 50:
                v.append("... further violations suppressed")
                return v
    return v


# ---------------------------------------------------------------------------
# explosion reports

BENCH_FAMILIES = {"t": gen_t, "u": gen_u, "s": gen_s_applied}

EXPLOSION_COLUMNS = (
    "family", "n", "machine", "size_t0", "beta", "subst", "commutative",
    "ram_cost", "state_size", "decoded_size_or_flag",
)


def _run(machine: str, t: Term, fuel: int, budget: int) -> RunResult:
    if machine == "easy":
        return run_easy(t, fuel=fuel)
    if machine == "fast":
        return run_fast(t, fuel=fuel)
    if machine == "naive":
        return run_naive(t, fuel=fuel, budget=budget)
    raise ValueError(f"unknown machine: {machine}")


def explosion_report(family: str, n_max: int,
                     machines=("easy", "fast"), fuel: int = DEFAULT_FUEL,
                     budget: int = DEFAULT_BUDGET) -> list[dict]:
    """Run each machine on family members n = 1..n_max and measure them.
    One row per (n, machine); cells that could not be computed within the
    budget hold None, with the flag column saying why."""
    if family not in BENCH_FAMILIES:
        raise ValueError(f"unknown family: {family!r} (one of {sorted(BENCH_FAMILIES)})")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    gen = BENCH_FAMILIES[family]
    rows = []
    for n in range(1, n_max + 1):
        t = gen(n)
        size_t0 = size(t)
        for machine in machines:
            row = {"family": family, "n": n, "machine": machine,
                   "size_t0": size_t0}
            try:
                result = _run(machine, t, fuel, budget)
            except BudgetExceeded:
                # the machine itself tried to build something over budget
                row.update(beta=None, subst=None, commutative=None,
                           ram_cost=None, state_size=None,
                           decoded_size_or_flag="budget_exceeded")
                rows.append(row)
                continue
            c = result.counters
            row.update(beta=c.beta, subst=c.subst, commutative=c.commutative,
                       ram_cost=c.ram_cost, state_size=state_size(result.state))
            if result.exhausted:
                row["decoded_size_or_flag"] = "fuel_exhausted"
            else:
                try:
                    decoded = decode_state(result.state, unfold=True,
                                           budget=budget)
                    row["decoded_size_or_flag"] = size(decoded)
                except BudgetExceeded:
                    row["decoded_size_or_flag"] = "budget_exceeded"
            rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# random corpus

def random_term(rng: random.Random, max_size: int = 30,
                free_names: tuple = ("a", "b", "c"),
                closed: bool = False) -> Term:
    """A random term with roughly at most max_size constructors.  Open terms
    draw free variables from free_names; closed terms only use binders in
    scope, introducing one when none is available."""
    free = [fresh_var(n) for n in free_names] if not closed else []

    def go(budget: int, scope: list) -> tuple[Term, int]:
        pool = scope + free
        if budget <= 1 and pool:
            return Var(pool[rng.randrange(len(pool))]), 1
        choice = rng.random()
        if choice < 0.3 and pool and budget >= 1:
            return Var(pool[rng.randrange(len(pool))]), 1
        if choice < 0.65 or budget < 3:
            x = fresh_var("xyzuvw"[rng.randrange(6)])
            body, used = go(budget - 1, scope + [x])
            return Abs(x, body), used + 1
        lsize = rng.randint(1, budget - 2)
        left, lu = go(lsize, scope)
        right, ru = go(budget - 1 - lu, scope)
        return App(left, right), lu + ru + 1

    return go(max_size, [])[0]


def corpus_reports(count: int, machines=("easy", "fast", "naive"),
                   seed: int = 0, max_size: int = 30,
                   fuel: int = DEFAULT_FUEL, budget: int = DEFAULT_BUDGET,
                   closed: bool = False) -> list[LockstepReport]:
    """Lockstep reports for a seeded random corpus, input order preserved."""
    rng = random.Random(seed)
    reports = []
    for _ in range(count):
        t = random_term(rng, max_size=max_size, closed=closed)
        for machine in machines:
            reports.append(lockstep(t, machine, fuel=fuel, budget=budget))
    return reports
