"""The easy machine.

Arguments are evaluated right to left into items.  A variable bound to an
abstraction is replaced by a fresh copy as soon as it comes into evaluating
position, whether or not the copy is ever applied.  Inert terms are never
substituted: variables bound to them are shelved as items that reference the
environment.
"""

from __future__ import annotations

from .machine import (
    DEFAULT_FUEL,
    AbsItem,
    DumpEntry,
    InvariantChecker,
    RunResult,
    State,
    VarItem,
    run_machine,
)
from .terms import Abs, App, Term, fresh_rename, size


def step_easy(state: State) -> tuple[str, State, int] | None:
    code = state.code
    if isinstance(code, App):
        # shelve the left side, evaluate the argument first
        entry = DumpEntry(code.left, state.stack)
        return "c1", State((entry, state.dump), code.right, None, state.env), 1
    if isinstance(code, Abs):
        if state.stack is not None:
            # beta: bind the evaluated argument in the global environment
            item, rest = state.stack
            env = state.env.bind(code.binder, item)
            return "m", State(state.dump, code.body, rest, env), 1
        if state.dump is not None:
            # the code is evaluated: resume the innermost shelved left side
            entry, rest = state.dump
            stack = (AbsItem(code), entry.stack)
            return "c2", State(rest, entry.term, stack, state.env), 1
        return None
    # code is a variable
    item = state.env.lookup(code.v)
    if isinstance(item, AbsItem):
        # eager substitution: copy with fresh binders
        new_code = fresh_rename(item.term)
        return "s", State(state.dump, new_code, state.stack, state.env), size(new_code)
    if state.dump is not None:
        entry, rest = state.dump
        stack = (VarItem(code.v, state.stack), entry.stack)
        return "c3", State(rest, entry.term, stack, state.env), 1
    return None


def run_easy(t: Term, fuel: int = DEFAULT_FUEL, trace: bool = False,
             checker: InvariantChecker | None = None) -> RunResult:
    return run_machine(step_easy, "easy", t, fuel, trace, checker)
