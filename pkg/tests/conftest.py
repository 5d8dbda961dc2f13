"""Shared test helpers: independent oracles kept deliberately separate from
the library implementations they check, plus a seeded random term generator."""

import random

import pytest

from fireball.terms import Abs, App, Term, Var, VarId, fresh_var


# -- independent alpha-equivalence oracle (renaming-based, recursive) --------

def alpha_oracle(t: Term, u: Term) -> bool:
    def go(t, u, env):
        # env maps t-side binder ids to u-side binder ids
        if isinstance(t, Var) and isinstance(u, Var):
            return env.get(t.v, t.v) == u.v
        if isinstance(t, App) and isinstance(u, App):
            return go(t.left, u.left, env) and go(t.right, u.right, env)
        if isinstance(t, Abs) and isinstance(u, Abs):
            env2 = dict(env)
            env2[t.binder] = u.binder
            return go(t.body, u.body, env2)
        return False

    return go(t, u, {})


# -- independent free-variable oracle ----------------------------------------

def free_oracle(t: Term, bound=frozenset()) -> set:
    if isinstance(t, Var):
        return set() if t.v in bound else {t.v}
    if isinstance(t, App):
        return free_oracle(t.left, bound) | free_oracle(t.right, bound)
    return free_oracle(t.body, bound | {t.binder})


# -- independent size oracle ---------------------------------------------------

def size_oracle(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    if isinstance(t, Abs):
        return 1 + size_oracle(t.body)
    return 1 + size_oracle(t.left) + size_oracle(t.right)


# -- seeded random terms -------------------------------------------------------

def random_term(rng: random.Random, max_size: int, free_pool=None, closed: bool = False) -> Term:
    """A term of size <= max_size. closed=True uses only in-scope binders."""
    if free_pool is None:
        free_pool = [fresh_var(n) for n in ("a", "b", "c")]

    def gen(budget: int, scope: list) -> tuple[Term, int]:
        choices = []
        if scope or (not closed and free_pool):
            choices.append("var")
        if budget >= 2:
            choices.append("abs")
        if budget >= 3 and (scope or not closed or budget >= 5):
            choices.append("app")
        if not choices:
            choices = ["abs"]
        kind = rng.choice(choices)
        if kind == "var":
            pool = scope if closed else scope + free_pool
            return Var(rng.choice(pool)), 1
        if kind == "abs":
            b = fresh_var(rng.choice("xyzw"))
            body, n = gen(budget - 1, scope + [b])
            return Abs(b, body), n + 1
        l, nl = gen(budget - 2, scope)
        r, nr = gen(budget - 1 - nl, scope)
        return App(l, r), 1 + nl + nr

    t, _ = gen(max(max_size, 2), [])
    return t


@pytest.fixture
def rng():
    return random.Random(20260816)
