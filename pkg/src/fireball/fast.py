"""The fast machine.

Like the easy machine, but substitution is on demand: a variable bound to an
abstraction is only replaced when arguments are waiting for it, so every
substitution enables a beta step.  When the argument of a beta redex is a
bare variable the machine renames instead of binding, keeping the
environment free of variable-to-variable entries.
"""

from __future__ import annotations

from .machine import (
    DEFAULT_FUEL,
    AbsItem,
    DumpEntry,
    Env,
    InvariantChecker,
    RunResult,
    Stack,
    State,
    VarItem,
    run_machine,
)
from .terms import Abs, App, Term, Var, VarId, fresh_rename, size


def no_substitution_needed(env: Env, x: VarId, stack: Stack) -> bool:
    """The variable in evaluating position can be shelved as an item: it is
    not bound to an abstraction, or nothing is waiting to be applied to it."""
    item = env.lookup(x)
    return item is None or isinstance(item, VarItem) or stack is None


def _replace_var(t: Term, x: VarId, y: VarId) -> Term:
    """t with every occurrence of x replaced by y; x is never a binder in t."""
    out: list[Term] = []
    ops: list[tuple] = [("v", t)]
    while ops:
        op = ops.pop()
        if op[0] == "v":
            u = op[1]
            if isinstance(u, Var):
                out.append(Var(y) if u.v == x else u)
            elif isinstance(u, Abs):
                assert u.binder != x
                ops.append(("abs", u.binder))
                ops.append(("v", u.body))
            else:
                ops.append(("app",))
                ops.append(("v", u.right))
                ops.append(("v", u.left))
        elif op[0] == "app":
            right = out.pop()
            left = out.pop()
            out.append(App(left, right))
        else:
            out.append(Abs(op[1], out.pop()))
    return out[0]


def step_fast(state: State) -> tuple[str, State, int] | None:
    code = state.code
    if isinstance(code, App):
        entry = DumpEntry(code.left, state.stack)
        return "c1", State((entry, state.dump), code.right, None, state.env), 1
    if isinstance(code, Abs):
        if state.stack is not None:
            item, rest = state.stack
            if isinstance(item, VarItem) and item.args is None:
                # beta on a bare variable: rename in place, no binding
                new_code = _replace_var(code.body, code.binder, item.head)
                return "b1", State(state.dump, new_code, rest, state.env), size(new_code)
            env = state.env.bind(code.binder, item)
            return "b2", State(state.dump, code.body, rest, env), 1
        if state.dump is not None:
            entry, rest = state.dump
            stack = (AbsItem(code), entry.stack)
            return "c2", State(rest, entry.term, stack, state.env), 1
        return None
    # code is a variable
    item = state.env.lookup(code.v)
    if isinstance(item, AbsItem) and state.stack is not None:
        # on-demand substitution: the copy is immediately applied
        new_code = fresh_rename(item.term)
        return "s", State(state.dump, new_code, state.stack, state.env), size(new_code)
    if state.dump is not None and no_substitution_needed(state.env, code.v, state.stack):
        entry, rest = state.dump
        stack = (VarItem(code.v, state.stack), entry.stack)
        return "c3", State(rest, entry.term, stack, state.env), 1
    return None


def run_fast(t: Term, fuel: int = DEFAULT_FUEL, trace: bool = False,
             checker: InvariantChecker | None = None) -> RunResult:
    return run_machine(step_fast, "fast", t, fuel, trace, checker)
