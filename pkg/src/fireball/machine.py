"""Shared infrastructure for the abstract machines.

A machine state is (dump, code, stack, env).  The code is the subterm under
evaluation; the stack holds the already-evaluated arguments of the current
application spine, as items; the dump remembers, innermost first, the
applications whose left side still awaits evaluation; the env is the global
list of bindings created by beta transitions.  Stacks, dumps, and environment
binding lists are immutable cons cells, so traced states share structure and
remain valid snapshots as a run proceeds.

This module provides the state types, decoding back to plain terms (with an
optional node budget, since decoded results can be exponentially larger than
the state), resource counters, the generic fuel-limited driver, trace
rendering, and a runtime checker for the structural invariants the machines
are expected to maintain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Union

from .terms import (
    Abs,
    App,
    FireballClass,
    Namer,
    Term,
    Var,
    VarId,
    classify,
    free_size,
    free_vars,
    fresh_var,
    is_well_named,
    print_term,
    size,
    skeleton_key,
    subterms,
)

DEFAULT_FUEL = 1_000_000
DEFAULT_BUDGET = 1 << 22


# ---------------------------------------------------------------------------
# states

@dataclass(frozen=True, slots=True, eq=False)
class AbsItem:
    """An evaluated abstraction."""

    term: Abs


@dataclass(frozen=True, slots=True, eq=False)
class VarItem:
    """An evaluated inert term: a variable applied to evaluated arguments,
    first argument at the head of args."""

    head: VarId
    args: "Stack"


Item = Union[AbsItem, VarItem]

# cons lists: None is empty, (head, tail) otherwise
Stack = Optional[tuple]
Dump = Optional[tuple]


def iter_cons(cell) -> Iterator:
    while cell is not None:
        yield cell[0]
        cell = cell[1]


def cons_len(cell) -> int:
    n = 0
    while cell is not None:
        n += 1
        cell = cell[1]
    return n


@dataclass(frozen=True, slots=True, eq=False)
class DumpEntry:
    """A postponed application: its left side and the stack that surrounded it."""

    term: Term
    stack: Stack


@dataclass(frozen=True, slots=True, eq=False)
class Env:
    """Global environment: newest binding first, plus a snapshot index for
    constant-time lookup.  The index is copied on bind so that environments
    captured in earlier states stay accurate."""

    bindings: Optional[tuple]
    index: dict

    def bind(self, x: VarId, item: Item) -> "Env":
        return Env(((x, item), self.bindings), {**self.index, x: item})

    def lookup(self, x: VarId) -> Item | None:
        return self.index.get(x)

    def __iter__(self):  # newest first
        return iter_cons(self.bindings)

    def __len__(self):
        return len(self.index)


EMPTY_ENV = Env(None, {})


@dataclass(frozen=True, slots=True, eq=False)
class State:
    dump: Dump
    code: Term
    stack: Stack
    env: Env


# ---------------------------------------------------------------------------
# counters

COMMUTATIVE_KINDS = ("c1", "c2", "c3")
BETA_KINDS = ("m", "b1", "b2")
SUBST_KINDS = ("s",)


@dataclass
class Counters:
    per_kind: dict = field(default_factory=dict)
    ram_cost: int = 0

    def record(self, kind: str, cost: int):
        self.per_kind[kind] = self.per_kind.get(kind, 0) + 1
        self.ram_cost += cost

    def _total(self, kinds) -> int:
        return sum(self.per_kind.get(k, 0) for k in kinds)

    @property
    def beta(self) -> int:
        return self._total(BETA_KINDS)

    @property
    def subst(self) -> int:
        return self._total(SUBST_KINDS)

    @property
    def commutative(self) -> int:
        return self._total(COMMUTATIVE_KINDS)

    @property
    def transitions(self) -> int:
        return sum(self.per_kind.values())


# ---------------------------------------------------------------------------
# decoding

class BudgetExceeded(Exception):
    """The term being rebuilt grew past the node budget."""

    def __init__(self, budget: int):
        super().__init__(f"decoded term exceeds {budget} nodes")
        self.budget = budget


def _expand(root, env_index: dict | None, rename: bool, budget: int) -> Term:
    """Build the plain term denoted by a virtual node.

    Virtual nodes: ("t", term), ("i", item), ("a", left, right).
    env_index maps variables to items to unfold; None decodes without
    unfolding.  rename allocates fresh binders throughout (readback for
    machines that substitute whole inert terms into code).
    """
    count = 0
    ren: dict[VarId, list[VarId]] = {}
    out: list[Term] = []
    ops: list[tuple] = [("v", root)]
    while ops:
        op = ops.pop()
        tag = op[0]
        if tag == "v":
            v = op[1]
            k = v[0]
            if k == "a":
                ops.append(("app",))
                ops.append(("v", v[2]))
                ops.append(("v", v[1]))
            elif k == "i":
                item = v[1]
                if isinstance(item, AbsItem):
                    ops.append(("v", ("t", item.term)))
                else:
                    node: tuple = ("t", Var(item.head))
                    for arg in iter_cons(item.args):
                        node = ("a", node, ("i", arg))
                    ops.append(("v", node))
            else:  # plain term
                term = v[1]
                if env_index is None and not rename:
                    count += size(term)
                    if count > budget:
                        raise BudgetExceeded(budget)
                    out.append(term)
                elif isinstance(term, Var):
                    frames = ren.get(term.v)
                    if frames:
                        count += 1
                        if count > budget:
                            raise BudgetExceeded(budget)
                        out.append(Var(frames[-1]))
                    elif env_index is not None and term.v in env_index:
                        # charge the unfolding so that a (buggy) cyclic
                        # environment trips the budget instead of looping
                        count += 1
                        if count > budget:
                            raise BudgetExceeded(budget)
                        ops.append(("v", ("i", env_index[term.v])))
                    else:
                        count += 1
                        if count > budget:
                            raise BudgetExceeded(budget)
                        out.append(term)
                elif isinstance(term, Abs):
                    if rename:
                        nb = fresh_var(term.binder.display)
                        ren.setdefault(term.binder, []).append(nb)
                        ops.append(("abs", nb, term.binder))
                    else:
                        ops.append(("abs", term.binder, None))
                    ops.append(("v", ("t", term.body)))
                else:
                    ops.append(("app",))
                    ops.append(("v", ("t", term.right)))
                    ops.append(("v", ("t", term.left)))
        elif tag == "app":
            right = out.pop()
            left = out.pop()
            count += 1
            if count > budget:
                raise BudgetExceeded(budget)
            out.append(App(left, right))
        else:  # "abs"
            body = out.pop()
            count += 1
            if count > budget:
                raise BudgetExceeded(budget)
            out.append(Abs(op[1], body))
            if op[2] is not None:
                ren[op[2]].pop()
    assert len(out) == 1
    return out[0]


def _env_index(env) -> dict | None:
    if env is None:
        return None
    return env.index if isinstance(env, Env) else env


def decode_item(item: Item, env: Env | dict | None = None,
                budget: int = DEFAULT_BUDGET) -> Term:
    """The term an item stands for; with env, environment bindings are
    unfolded into it."""
    return _expand(("i", item), _env_index(env), False, budget)


def unfold_term(t: Term, env: Env | dict | None,
                budget: int = DEFAULT_BUDGET) -> Term:
    """Replace every environment-bound variable by its binding's term,
    recursively (newest bindings can only mention older ones)."""
    index = _env_index(env)
    if not index:
        return t
    return _expand(("t", t), index, False, budget)


def code_of_item(item: Item, budget: int = DEFAULT_BUDGET) -> Term:
    """Readback of an item as fresh code: like decode_item, but binders are
    renamed so the result can be placed into a machine state."""
    return _expand(("i", item), None, True, budget)


def _state_virtual(state: State, hole: Term | None = None) -> tuple:
    node: tuple = ("t", state.code if hole is None else hole)
    for item in iter_cons(state.stack):
        node = ("a", node, ("i", item))
    for entry in iter_cons(state.dump):  # newest entry is the innermost wrap
        node = ("a", ("t", entry.term), node)
        for item in iter_cons(entry.stack):
            node = ("a", node, ("i", item))
    return node


def decode_state(state: State, unfold: bool = False,
                 budget: int = DEFAULT_BUDGET) -> Term:
    """The term the state represents: the code plugged back into the stack
    and dump contexts; with unfold, environment bindings are substituted in."""
    index = state.env.index if unfold else None
    return _expand(_state_virtual(state), index, False, budget)


# ---------------------------------------------------------------------------
# measures

def commutative_size(state: State) -> int:
    """Code size plus the sizes of the postponed left sides: the measure that
    strictly decreases on commutative transitions."""
    return size(state.code) + sum(size(e.term) for e in iter_cons(state.dump))


def _stack_free_size(stack: Stack) -> int:
    total = 0
    todo = [stack]
    while todo:
        for item in iter_cons(todo.pop()):
            if isinstance(item, VarItem):
                total += 1
                todo.append(item.args)
    return total


def state_free_size(state: State) -> int:
    """Free variable occurrences (not under abstractions) across dump, code,
    and stack.  The environment does not count."""
    total = free_size(state.code) + _stack_free_size(state.stack)
    for entry in iter_cons(state.dump):
        total += free_size(entry.term) + _stack_free_size(entry.stack)
    return total


def state_size(state: State) -> int:
    """Live footprint: distinct term nodes, items, and bindings reachable
    from the state.  Structure shared between components is counted once."""
    seen: set[int] = set()
    total = 0
    todo: list = [state.code]
    for item in iter_cons(state.stack):
        todo.append(item)
    for entry in iter_cons(state.dump):
        todo.append(entry.term)
        for item in iter_cons(entry.stack):
            todo.append(item)
    for _x, item in state.env:
        total += 1  # the binding cell
        todo.append(item)
    while todo:
        obj = todo.pop()
        if id(obj) in seen:
            continue
        seen.add(id(obj))
        total += 1
        if isinstance(obj, App):
            todo.append(obj.left)
            todo.append(obj.right)
        elif isinstance(obj, Abs):
            todo.append(obj.body)
        elif isinstance(obj, AbsItem):
            todo.append(obj.term)
        elif isinstance(obj, VarItem):
            for a in iter_cons(obj.args):
                todo.append(a)
    return total


# ---------------------------------------------------------------------------
# the driver

MACHINES = ("easy", "fast", "naive")


class MachineStuck(Exception):
    """A state with no applicable transition that is not a recognized final
    shape.  Reaching this is a machine bug, never a property of the input."""


def is_final(state: State, machine: str) -> bool:
    """Whether a transitionless state has one of the machine's legal final
    shapes (evaluated code with nothing pending)."""
    if state.dump is not None:
        return False
    if isinstance(state.code, Abs):
        return state.stack is None
    if not isinstance(state.code, Var):
        return False
    bound = state.env.lookup(state.code.v)
    if machine == "easy":
        return bound is None or isinstance(bound, VarItem)
    if machine == "fast":
        return state.stack is None or bound is None or isinstance(bound, VarItem)
    if machine == "naive":
        return bound is None
    raise ValueError(f"unknown machine: {machine}")


def compile_term(t: Term) -> Term:
    """Initial code: a copy with globally fresh, pairwise distinct binders."""
    from .terms import fresh_rename

    return fresh_rename(t)


def initial_state(code0: Term) -> State:
    return State(None, code0, None, EMPTY_ENV)


@dataclass
class RunResult:
    machine: str
    source: Term
    code0: Term
    state: State  # last state reached
    counters: Counters
    exhausted: bool  # fuel ran out with transitions still available
    states: list[State] | None  # every state, when tracing
    kinds: list[str] | None  # transition kinds in order, when tracing

    def decode(self, budget: int = DEFAULT_BUDGET) -> Term:
        return decode_state(self.state, unfold=True, budget=budget)


Stepper = Callable[[State], Optional[tuple[str, State, int]]]


def run_machine(stepper: Stepper, machine: str, t: Term,
                fuel: int = DEFAULT_FUEL, trace: bool = False,
                checker: "InvariantChecker | None" = None) -> RunResult:
    """Drive a stepper from the compiled term to a final state or until fuel
    runs out.  Steppers return (kind, next state, ram cost) or None."""
    if fuel < 0:
        raise ValueError("fuel must be >= 0")
    code0 = compile_term(t)
    state = initial_state(code0)
    counters = Counters()
    states = [state] if trace else None
    kinds = [] if trace else None
    if checker is not None:
        checker.start(code0)
        checker.check(state, counters)
    final = False
    steps = 0
    while steps < fuel:
        r = stepper(state)
        if r is None:
            if not is_final(state, machine):
                raise MachineStuck(
                    f"{machine} machine has no transition from a non-final state: "
                    + format_state(state)
                )
            final = True
            break
        kind, state, cost = r
        steps += 1
        counters.record(kind, cost)
        if trace:
            states.append(state)
            kinds.append(kind)
        if checker is not None:
            checker.check(state, counters, kind)
    exhausted = not final and not is_final(state, machine)
    return RunResult(machine, t, code0, state, counters, exhausted, states, kinds)


# ---------------------------------------------------------------------------
# rendering

def format_item(item: Item, namer: Namer) -> str:
    if isinstance(item, AbsItem):
        return f"<{print_term(item.term, namer)}, eps>"
    if item.args is None:
        return f"<{namer.name(item.head)}, eps>"
    inner = " : ".join(format_item(a, namer) for a in iter_cons(item.args))
    return f"<{namer.name(item.head)}, ({inner})>"


def format_stack(stack: Stack, namer: Namer) -> str:
    if stack is None:
        return "eps"
    return " : ".join(format_item(i, namer) for i in iter_cons(stack))


def format_dump(dump: Dump, namer: Namer) -> str:
    if dump is None:
        return "eps"
    entries = list(iter_cons(dump))[::-1]  # oldest first, newest rightmost
    return " : ".join(
        f"({print_term(e.term, namer)}, {format_stack(e.stack, namer)})"
        for e in entries
    )


def format_env(env: Env, namer: Namer) -> str:
    if env.bindings is None:
        return "eps"
    return " : ".join(
        f"[{namer.name(x)} <- {format_item(item, namer)}]" for x, item in env
    )


def format_state(state: State, namer: Namer | None = None) -> str:
    namer = namer or Namer()
    # naming order: dump, code, stack, env, matching the column order
    return " | ".join(
        (
            format_dump(state.dump, namer),
            print_term(state.code, namer),
            format_stack(state.stack, namer),
            format_env(state.env, namer),
        )
    )


def trace_rows(result: RunResult,
               namer: Namer | None = None) -> list[tuple[str, str, str, str, str]]:
    """One (dump, code, stack, env, transition) tuple per state, where the
    transition column names the step taken from that state."""
    if result.states is None:
        raise ValueError("run was not traced")
    namer = namer or Namer()
    rows = []
    for i, s in enumerate(result.states):
        if i < len(result.kinds):
            label = result.kinds[i]
        else:
            label = "(fuel)" if result.exhausted else "(final)"
        rows.append((format_dump(s.dump, namer), print_term(s.code, namer),
                     format_stack(s.stack, namer), format_env(s.env, namer),
                     label))
    return rows


def render_trace(result: RunResult, namer: Namer | None = None) -> list[str]:
    """trace_rows joined column-wise: dump | code | stack | env | transition."""
    return [" | ".join(row) for row in trace_rows(result, namer)]


# ---------------------------------------------------------------------------
# invariants

class InvariantViolation(AssertionError):
    """A machine state broke one of the maintained invariants."""


def iter_state_items(state: State, nested: bool = True) -> Iterator[Item]:
    """Every item in the stack, the dump's stacks, and the environment;
    with nested, arguments of inert items are included recursively."""
    todo: list = [state.stack]
    for entry in iter_cons(state.dump):
        todo.append(entry.stack)
    for _x, item in state.env:
        yield item
        if nested and isinstance(item, VarItem):
            todo.append(item.args)
    while todo:
        for item in iter_cons(todo.pop()):
            yield item
            if nested and isinstance(item, VarItem):
                todo.append(item.args)


def _iter_state_terms(state: State) -> Iterator[Term]:
    """Every maximal plain-term region of the state."""
    yield state.code
    for entry in iter_cons(state.dump):
        yield entry.term
    for item in iter_state_items(state):
        if isinstance(item, AbsItem):
            yield item.term


def _item_ids(item: Item, out: set):
    todo: list = [item]
    while todo:
        it = todo.pop()
        if isinstance(it, AbsItem):
            t_todo = [it.term]
            while t_todo:
                u = t_todo.pop()
                if isinstance(u, Var):
                    out.add(u.v)
                elif isinstance(u, Abs):
                    out.add(u.binder)
                    t_todo.append(u.body)
                else:
                    t_todo.append(u.left)
                    t_todo.append(u.right)
        else:
            out.add(it.head)
            for a in iter_cons(it.args):
                todo.append(a)


class InvariantChecker:
    """Validates machine invariants after every transition.

    The checks decode items and states, so the checker is for test-sized
    runs, not benchmarking.  Checked properties:

    - binding names are globally fresh: an environment entry's variable
      occurs neither in its own item nor in any older entry;
    - binders are pairwise distinct and never occur outside their body,
      across every term region of the state;
    - items decode to the advertised shape (inert terms for variable items,
      abstractions otherwise), both as stored and after unfolding -- for the
      fast machine a variable item whose head is bound to an abstraction
      must carry no arguments and unfolds to an abstraction;
    - the state around the code decodes to a right context: every postponed
      left side waits only on positions whose right siblings are fireballs;
    - every abstraction in the state matches a subterm of the initial code,
      shape-wise (skipped for the naive machine, whose code is not a
      subterm of the source once inert terms are substituted in);
    - for the easy machine, the free-occurrence budget: free variable
      occurrences outside abstractions never exceed
      free_size(code0) + size(code0) * beta - subst, with exact per-kind
      deltas (commutative 0, substitution -1).
    """

    def __init__(self, machine: str, budget: int = DEFAULT_BUDGET):
        if machine not in MACHINES:
            raise ValueError(f"unknown machine: {machine}")
        self.machine = machine
        self.budget = budget
        self.code0: Term | None = None
        self._skeletons: set[str] | None = None
        self._size0 = 0
        self._free0 = 0
        self._prev_free: int | None = None
        self.states_checked = 0

    def start(self, code0: Term):
        self.code0 = code0
        self._skeletons = {
            skeleton_key(u) for u in subterms(code0) if isinstance(u, Abs)
        }
        self._size0 = size(code0)
        self._free0 = free_size(code0)
        self._prev_free = None
        self.states_checked = 0

    def check(self, state: State, counters: Counters | None = None,
              kind: str | None = None):
        if self.code0 is None:
            raise RuntimeError("checker not started")
        self._check_names(state)
        self._check_items(state)
        self._check_context(state)
        if self.machine != "naive":
            self._check_subterm(state)
        if self.machine == "easy" and counters is not None:
            self._check_free_occurrences(state, counters, kind)
        self.states_checked += 1

    def _fail(self, what: str, state: State):
        raise InvariantViolation(
            f"{what} violated in {self.machine} machine state: {format_state(state)}"
        )

    def _check_names(self, state: State):
        # freshness of environment entries wrt themselves and older entries
        seen: set[VarId] = set()
        for x, item in reversed(list(state.env)):  # oldest first
            ids: set[VarId] = set()
            _item_ids(item, ids)
            if x in ids or x in seen:
                self._fail("binding freshness", state)
            seen |= ids
            seen.add(x)
        # binders distinct and confined to their own body, across the state
        from .terms import binders

        all_binders: list[VarId] = []
        regions = list(_iter_state_terms(state))
        for t in regions:
            if not is_well_named(t):
                self._fail("binder scoping", state)
            all_binders.extend(binders(t))
        if len(all_binders) != len(set(all_binders)):
            self._fail("binder distinctness", state)
        binder_set = set(all_binders)
        occurrences: set[VarId] = set()
        for t in regions:
            occurrences |= free_vars(t)
        for item in iter_state_items(state):
            if isinstance(item, VarItem):
                occurrences.add(item.head)
        if occurrences & binder_set:
            self._fail("binder escaping its abstraction", state)

    def _check_items(self, state: State):
        for item in iter_state_items(state):
            if isinstance(item, AbsItem):
                if not isinstance(item.term, Abs):
                    self._fail("abstraction item shape", state)
                unfolded = decode_item(item, state.env, self.budget)
                if classify(unfolded) is not FireballClass.ABSTRACTION:
                    self._fail("abstraction item decoding", state)
                continue
            raw = decode_item(item, None, self.budget)
            if classify(raw) is not FireballClass.INERT:
                self._fail("inert item decoding", state)
            bound = state.env.lookup(item.head)
            if self.machine == "fast" and isinstance(bound, AbsItem):
                if item.args is not None:
                    self._fail("applied variable item with abstraction head", state)
                unfolded = decode_item(item, state.env, self.budget)
                if classify(unfolded) is not FireballClass.ABSTRACTION:
                    self._fail("variable item unfolding (abstraction head)", state)
            else:
                unfolded = decode_item(item, state.env, self.budget)
                if classify(unfolded) is not FireballClass.INERT:
                    self._fail("variable item unfolding", state)

    def _check_context(self, state: State):
        # the unfolded surroundings of the code must form a right context:
        # descending to the hole, each left turn passes a fireball sibling
        marker = fresh_var("hole")
        ctx = _expand(
            _state_virtual(state, hole=Var(marker)),
            state.env.index, False, self.budget,
        )

        def contains(u: Term) -> bool:
            todo = [u]
            while todo:
                w = todo.pop()
                if isinstance(w, Var):
                    if w.v == marker:
                        return True
                elif isinstance(w, Abs):
                    todo.append(w.body)
                else:
                    todo.append(w.left)
                    todo.append(w.right)
            return False

        u = ctx
        while not (isinstance(u, Var) and u.v == marker):
            if not isinstance(u, App):
                self._fail("context decoding (hole misplaced)", state)
            if contains(u.right):
                u = u.right
            else:
                if classify(u.right) is FireballClass.NOT_FIREBALL:
                    self._fail("context decoding (non-fireball argument)", state)
                u = u.left

    def _check_subterm(self, state: State):
        for t in _iter_state_terms(state):
            for u in subterms(t):
                if isinstance(u, Abs) and skeleton_key(u) not in self._skeletons:
                    self._fail("abstraction outside the initial code", state)

    def _check_free_occurrences(self, state: State, counters: Counters,
                                kind: str | None):
        current = state_free_size(state)
        bound = self._free0 + self._size0 * counters.beta - counters.subst
        if current > bound:
            self._fail("free-occurrence budget", state)
        if kind is not None and self._prev_free is not None:
            delta = current - self._prev_free
            if kind in COMMUTATIVE_KINDS and delta != 0:
                self._fail(f"free-occurrence delta of {kind}", state)
            if kind in SUBST_KINDS and delta != -1:
                self._fail("free-occurrence delta of s", state)
            if kind in BETA_KINDS and delta > self._size0:
                self._fail(f"free-occurrence delta of {kind}", state)
        self._prev_free = current


def check_state_invariants(state: State, machine: str, code0: Term,
                           budget: int = DEFAULT_BUDGET):
    """One-shot structural check of a single state (no counter-dependent
    checks).  Raises InvariantViolation on failure."""
    checker = InvariantChecker(machine, budget)
    checker.start(code0)
    checker.check(state)
