"""Reference small-step semantics for open call-by-value over fireballs.

The deterministic right-to-left strategy is the oracle the machines are
verified against: a beta step fires (λx.b)f only when the argument f is a
fireball (an abstraction or an inert term), the rightmost such redex first,
and evaluation never enters an abstraction body. all_one_steps enumerates
every weak beta-fireball reduct for small terms, for exhaustive-graph tests.

Also provides the generator families used by the explosion benchmarks.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .terms import (
    Abs,
    App,
    FireballClass,
    Term,
    Var,
    VarId,
    alpha_key,
    classify,
    fresh_var,
    size,
    subst_meta,
)


class StepKind(Enum):
    BETA_LAMBDA = "beta_lambda"
    BETA_INERT = "beta_inert"


@dataclass
class Derivation:
    start: Term
    steps: list[tuple[Term, StepKind]]
    exhausted: bool

    def __len__(self):
        return len(self.steps)

    @property
    def final(self) -> Term:
        return self.steps[-1][0] if self.steps else self.start

    def count(self, kind: StepKind) -> int:
        return sum(1 for _, k in self.steps if k is kind)


def _fire(lam: Abs, arg: Term) -> tuple[Term, StepKind]:
    kind = (
        StepKind.BETA_LAMBDA
        if classify(arg) is FireballClass.ABSTRACTION
        else StepKind.BETA_INERT
    )
    return subst_meta(lam.body, lam.binder, arg), kind


def rtl_step(t: Term) -> tuple[Term, StepKind] | None:
    """The unique rightmost-first reduct, or None iff t is a fireball."""
    if not isinstance(t, App):
        return None
    r = rtl_step(t.right)
    if r is not None:
        t2, kind = r
        return App(t.left, t2), kind
    # right subterm is normal, hence a fireball; only now enter the left
    l = rtl_step(t.left)
    if l is not None:
        t2, kind = l
        return App(t2, t.right), kind
    if isinstance(t.left, Abs):
        return _fire(t.left, t.right)
    return None  # inert head applied to a fireball: normal


def evaluate_rtl(t: Term, fuel: int = 1_000_000) -> Derivation:
    if fuel < 1:
        raise ValueError("fuel must be >= 1")
    steps: list[tuple[Term, StepKind]] = []
    cur = t
    for _ in range(fuel):
        nxt = rtl_step(cur)
        if nxt is None:
            return Derivation(t, steps, exhausted=False)
        cur = nxt[0]
        steps.append(nxt)
    return Derivation(t, steps, exhausted=True)


MAX_ENUM_SIZE = 12


def all_one_steps(t: Term, max_size: int = MAX_ENUM_SIZE) -> list[tuple[Term, StepKind]]:
    """Every weak reduct (closure of the beta rules under both sides of
    applications, never under a lambda), deduplicated up to alpha."""
    if size(t) > max_size:
        raise ValueError(f"term too large for exhaustive enumeration (> {max_size})")
    out: list[tuple[Term, StepKind]] = []
    seen: set[tuple[str, StepKind]] = set()

    def add(u: Term, kind: StepKind):
        key = (alpha_key(u), kind)
        if key not in seen:
            seen.add(key)
            out.append((u, kind))

    def go(t: Term, wrap):
        if not isinstance(t, App):
            return
        if isinstance(t.left, Abs) and classify(t.right) is not FireballClass.NOT_FIREBALL:
            u, kind = _fire(t.left, t.right)
            add(wrap(u), kind)
        go(t.right, lambda u: wrap(App(t.left, u)))
        go(t.left, lambda u: wrap(App(u, t.right)))

    go(t, lambda u: u)
    return out


def check_inert_substitution(t: Term, x: VarId, i: Term) -> bool:
    """Substituting an inert term neither creates nor erases reducts:
    the reducts of t{x<-i} are exactly the reducts of t, substituted."""
    if classify(i) is not FireballClass.INERT:
        raise ValueError("substituted term must be inert")
    t_sub = subst_meta(t, x, i)
    bound = max(size(t), size(t_sub))
    lhs = {alpha_key(subst_meta(u, x, i)) for u, _ in all_one_steps(t, bound)}
    rhs = {alpha_key(u) for u, _ in all_one_steps(t_sub, bound)}
    return lhs == rhs


# ---------------------------------------------------------------------------
# term families

_THE_Y = fresh_var("y")


def _dup() -> Term:
    x = fresh_var("x")
    return Abs(x, App(Var(x), Var(x)))


def gen_t(n: int) -> Term:
    """t_0 = y, t_{k+1} = (λx.x x) t_k — size linear in n, normal form gen_gamma(n)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    t: Term = Var(_THE_Y)
    for _ in range(n):
        t = App(_dup(), t)
    return t


def gen_gamma(n: int) -> Term:
    """γ_0 = y, γ_{k+1} = γ_k γ_k — size at least 2^n."""
    if n < 0:
        raise ValueError("n must be >= 0")
    g: Term = Var(_THE_Y)
    for _ in range(n):
        g = App(g, g)
    return g


def gen_u(n: int) -> Term:
    """u_n = r_n r_n with r_n = λx.(y x x ... x), n trailing x arguments."""
    if n < 1:
        raise ValueError("n must be >= 1")

    def r() -> Term:
        x = fresh_var("x")
        body: Term = Var(_THE_Y)
        for _ in range(n):
            body = App(body, Var(x))
        return Abs(x, body)

    return App(r(), r())


def gen_r(n: int) -> Term:
    """r_0 = λz.z, r_{k+1} = λy.(y r_k r_k) — size at least 2^n."""
    if n < 0:
        raise ValueError("n must be >= 0")
    z = fresh_var("z")
    r: Term = Abs(z, Var(z))
    for _ in range(n):
        y = fresh_var("y")
        r = Abs(y, App(App(Var(y), r), r))
    return r


def gen_s(n: int) -> Term:
    """s_1 = λx.λy.(y x x), s_{k+1} = λx.(s_k λy.(y x x))."""
    if n < 1:
        raise ValueError("n must be >= 1")

    def pad(x: VarId) -> Term:
        y = fresh_var("y")
        return Abs(y, App(App(Var(y), Var(x)), Var(x)))

    x = fresh_var("x")
    s: Term = Abs(x, pad(x))
    for _ in range(n - 1):
        x = fresh_var("x")
        s = Abs(x, App(s, pad(x)))
    return s


def gen_s_applied(n: int) -> Term:
    """s_n applied to the identity: normalizes in n abstraction-beta steps to gen_r(n)."""
    z = fresh_var("z")
    return App(gen_s(n), Abs(z, Var(z)))


FAMILIES = {
    "t": gen_t,
    "gamma": gen_gamma,
    "u": gen_u,
    "r": gen_r,
    "s": gen_s_applied,
}
