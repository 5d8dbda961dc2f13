"""The naive machine.

A control variant of the easy machine that substitutes whatever the
environment holds, inert terms included: whenever the code is a bound
variable, the binding is read back into fresh code and evaluation restarts
on it.  Correct, but materializing inert terms into the code loses the
machines' size guarantees; it exists to demonstrate the blowup the other
two avoid.
"""

from __future__ import annotations

from functools import partial

from .machine import (
    DEFAULT_BUDGET,
    DEFAULT_FUEL,
    AbsItem,
    DumpEntry,
    InvariantChecker,
    RunResult,
    State,
    VarItem,
    code_of_item,
    run_machine,
)
from .terms import Abs, App, Term, size


def step_naive(state: State, budget: int = DEFAULT_BUDGET) -> tuple[str, State, int] | None:
    code = state.code
    if isinstance(code, App):
        entry = DumpEntry(code.left, state.stack)
        return "c1", State((entry, state.dump), code.right, None, state.env), 1
    if isinstance(code, Abs):
        if state.stack is not None:
            item, rest = state.stack
            env = state.env.bind(code.binder, item)
            return "m", State(state.dump, code.body, rest, env), 1
        if state.dump is not None:
            entry, rest = state.dump
            stack = (AbsItem(code), entry.stack)
            return "c2", State(rest, entry.term, stack, state.env), 1
        return None
    # code is a variable
    item = state.env.lookup(code.v)
    if item is not None:
        # substitute no matter what the binding holds
        new_code = code_of_item(item, budget)
        return "s", State(state.dump, new_code, state.stack, state.env), size(new_code)
    if state.dump is not None:
        entry, rest = state.dump
        stack = (VarItem(code.v, state.stack), entry.stack)
        return "c3", State(rest, entry.term, stack, state.env), 1
    return None


def run_naive(t: Term, fuel: int = DEFAULT_FUEL, trace: bool = False,
              checker: InvariantChecker | None = None,
              budget: int = DEFAULT_BUDGET) -> RunResult:
    stepper = step_naive if budget == DEFAULT_BUDGET else partial(step_naive, budget=budget)
    return run_machine(stepper, "naive", t, fuel, trace, checker)
