"""Lambda terms with globally unique variable identifiers.

Terms are immutable trees of Var/Abs/App nodes. A variable carries a VarId
whose integer id is unique within a session (one monotone counter feeds every
allocation); the display string is only a printing hint. Term objects compare
by identity — structural and alpha comparisons are explicit functions, which
keeps hashing O(1) on heavily shared trees.

Operations that must survive generated family terms at n ~ 1000 (depth ~ n)
use explicit work stacks instead of recursion.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum

_ids = itertools.count()


@dataclass(frozen=True, slots=True)
class VarId:
    """A variable identity. Equality and hashing use the id alone."""

    id: int
    display: str = field(compare=False)

    def __repr__(self):
        return f"{self.display}#{self.id}"


def fresh_var(display: str = "v") -> VarId:
    return VarId(next(_ids), display)


@dataclass(frozen=True, slots=True, eq=False)
class Var:
    v: VarId


@dataclass(frozen=True, slots=True, eq=False)
class Abs:
    binder: VarId
    body: "Term"


@dataclass(frozen=True, slots=True, eq=False)
class App:
    left: "Term"
    right: "Term"


Term = Var | Abs | App


class FireballClass(Enum):
    ABSTRACTION = "abstraction"
    INERT = "inert"
    NOT_FIREBALL = "not_fireball"


def is_fireball(t: Term) -> bool:
    return classify(t) is not FireballClass.NOT_FIREBALL


def classify(t: Term) -> FireballClass:
    """Abstraction, inert (a variable applied to zero or more fireballs), or neither."""
    if isinstance(t, Abs):
        return FireballClass.ABSTRACTION
    # peel the application spine iteratively; left spines can be long
    args = []
    while isinstance(t, App):
        args.append(t.right)
        t = t.left
    if not isinstance(t, Var):
        return FireballClass.NOT_FIREBALL
    for a in args:
        if classify(a) is FireballClass.NOT_FIREBALL:
            return FireballClass.NOT_FIREBALL
    return FireballClass.INERT


def size(t: Term) -> int:
    """Number of constructors: size(x)=1, size(λx.t)=1+size(t), size(tu)=1+size(t)+size(u)."""
    n = 0
    todo = [t]
    while todo:
        u = todo.pop()
        n += 1
        if isinstance(u, App):
            todo.append(u.left)
            todo.append(u.right)
        elif isinstance(u, Abs):
            todo.append(u.body)
    return n


def free_size(t: Term) -> int:
    """Variable occurrences not under any abstraction within t."""
    n = 0
    todo = [t]
    while todo:
        u = todo.pop()
        if isinstance(u, Var):
            n += 1
        elif isinstance(u, App):
            todo.append(u.left)
            todo.append(u.right)
        # Abs subtrees contribute 0
    return n


def free_vars(t: Term) -> set[VarId]:
    out: set[VarId] = set()
    bound: dict[VarId, int] = {}
    todo: list[tuple] = [("t", t)]
    while todo:
        tag, u = todo.pop()
        if tag == "x":  # leave scope of binder u
            bound[u] -= 1
            continue
        if isinstance(u, Var):
            if bound.get(u.v, 0) == 0:
                out.add(u.v)
        elif isinstance(u, App):
            todo.append(("t", u.left))
            todo.append(("t", u.right))
        else:
            bound[u.binder] = bound.get(u.binder, 0) + 1
            todo.append(("x", u.binder))
            todo.append(("t", u.body))
    return out


def binders(t: Term) -> list[VarId]:
    """All binder VarIds, with repeats."""
    out = []
    todo = [t]
    while todo:
        u = todo.pop()
        if isinstance(u, App):
            todo.append(u.left)
            todo.append(u.right)
        elif isinstance(u, Abs):
            out.append(u.binder)
            todo.append(u.body)
    return out


def is_well_named(t: Term) -> bool:
    """Binders pairwise distinct and each occurring only inside its own body."""
    bs = binders(t)
    if len(bs) != len(set(bs)):
        return False
    binder_set = set(bs)
    # every occurrence of a binder id must be inside that binder's scope
    todo: list[tuple] = [(t, frozenset())]
    while todo:
        u, scope = todo.pop()
        if isinstance(u, Var):
            if u.v in binder_set and u.v not in scope:
                return False
        elif isinstance(u, App):
            todo.append((u.left, scope))
            todo.append((u.right, scope))
        else:
            todo.append((u.body, scope | {u.binder}))
    return True


def subst_meta(t: Term, x: VarId, u: Term) -> Term:
    """Capture-avoiding t{x<-u}. Oracle-scale: recursive."""
    fv_u = free_vars(u)

    def go(t: Term) -> Term:
        if isinstance(t, Var):
            return u if t.v == x else t
        if isinstance(t, App):
            l, r = go(t.left), go(t.right)
            return t if l is t.left and r is t.right else App(l, r)
        if t.binder == x:
            return t
        if t.binder in fv_u and x in free_vars(t.body):
            b2 = fresh_var(t.binder.display)
            return Abs(b2, go(subst_meta(t.body, t.binder, Var(b2))))
        body = go(t.body)
        return t if body is t.body else Abs(t.binder, body)

    return go(t)


def fresh_rename(t: Term) -> Term:
    """An alpha-equivalent copy whose binders are all fresh; free variables unchanged.

    The input may shadow binders; the copy never does (well-named by construction).
    """
    # post-order rebuild with an explicit stack; ren maps binder -> current fresh id
    ren: dict[VarId, list[VarId]] = {}
    out: list[Term] = []
    todo: list[tuple] = [("t", t)]
    while todo:
        tag, u = todo.pop()
        if tag == "t":
            if isinstance(u, Var):
                stack = ren.get(u.v)
                out.append(Var(stack[-1]) if stack else u)
            elif isinstance(u, App):
                todo.append(("app", None))
                todo.append(("t", u.right))
                todo.append(("t", u.left))
            else:
                b2 = fresh_var(u.binder.display)
                ren.setdefault(u.binder, []).append(b2)
                todo.append(("abs", (u.binder, b2)))
                todo.append(("t", u.body))
        elif tag == "app":
            r = out.pop()
            l = out.pop()
            out.append(App(l, r))
        else:  # abs
            old, b2 = u
            ren[old].pop()
            out.append(Abs(b2, out.pop()))
    return out[0]


def alpha_key(t: Term) -> str:
    """Canonical string identical for alpha-equivalent terms (free vars by id)."""
    depth = 0
    bound: dict[VarId, list[int]] = {}
    parts: list[str] = []
    todo: list[tuple] = [("t", t)]
    while todo:
        tag, u = todo.pop()
        if tag == "t":
            if isinstance(u, Var):
                stack = bound.get(u.v)
                parts.append(f"b{depth - stack[-1]}" if stack else f"f{u.v.id}")
            elif isinstance(u, App):
                parts.append("A")
                todo.append(("t", u.right))
                todo.append(("t", u.left))
            else:
                parts.append("L")
                depth += 1
                bound.setdefault(u.binder, []).append(depth)
                todo.append(("pop", u.binder))
                todo.append(("t", u.body))
        else:
            bound[u].pop()
            depth -= 1
    return " ".join(parts)


def alpha_eq(t: Term, u: Term) -> bool:
    return alpha_key(t) == alpha_key(u)


def skeleton_key(t: Term) -> str:
    """Shape string with every variable occurrence and binder collapsed to one symbol."""
    parts: list[str] = []
    todo = [t]
    while todo:
        u = todo.pop()
        if isinstance(u, Var):
            parts.append("*")
        elif isinstance(u, App):
            parts.append("A")
            todo.append(u.right)
            todo.append(u.left)
        else:
            parts.append("L")
            todo.append(u.body)
    return "".join(parts)


def skeleton_equal(t: Term, u: Term) -> bool:
    return skeleton_key(t) == skeleton_key(u)


def subterms(t: Term):
    """Every subterm node, each once (by position)."""
    todo = [t]
    while todo:
        u = todo.pop()
        yield u
        if isinstance(u, App):
            todo.append(u.left)
            todo.append(u.right)
        elif isinstance(u, Abs):
            todo.append(u.body)


# ---------------------------------------------------------------------------
# parsing


class ParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | set("0123456789'")


def _tokenize(text: str):
    toks = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "\\λ()." :
            toks.append((c if c != "λ" else "\\", i))
            i += 1
        elif c in _IDENT_START:
            j = i + 1
            while j < n and text[j] in _IDENT_CONT:
                j += 1
            toks.append((text[i:j], i))
            i = j
        else:
            raise ParseError(f"unexpected character {c!r}", i)
    toks.append((None, n))
    return toks


def parse(text: str, closed: bool = False) -> Term:
    """Parse the grammar: term ::= abs | app; abs ::= ("\\"|"λ") ident "." term;
    app ::= atom+ with an optional trailing abs as final argument; atom ::= ident | "(" term ")".

    Free names of the same spelling share one VarId; distinct spellings get
    distinct ids; binders always get fresh ids. closed=True rejects free names.
    """
    toks = _tokenize(text)
    pos = 0
    free_ids: dict[str, VarId] = {}
    scope: dict[str, list[VarId]] = {}

    def peek():
        return toks[pos][0]

    def here():
        return toks[pos][1]

    def expect(tok: str):
        nonlocal pos
        if peek() != tok:
            raise ParseError(f"expected {tok!r}", here())
        pos += 1

    def is_ident(tok):
        return tok is not None and tok not in ("\\", "(", ")", ".")

    def var_for(name: str) -> Term:
        stack = scope.get(name)
        if stack:
            return Var(stack[-1])
        if closed:
            raise ParseError(f"unbound name {name!r}", here())
        if name not in free_ids:
            free_ids[name] = fresh_var(name)
        return Var(free_ids[name])

    def parse_abs() -> Term:
        nonlocal pos
        expect("\\")
        name = peek()
        if not is_ident(name):
            raise ParseError("expected identifier after lambda", here())
        pos += 1
        expect(".")
        b = fresh_var(name)
        scope.setdefault(name, []).append(b)
        body = parse_term()
        scope[name].pop()
        return Abs(b, body)

    def parse_atom() -> Term | None:
        nonlocal pos
        tok = peek()
        if tok == "(":
            pos += 1
            t = parse_term()
            expect(")")
            return t
        if is_ident(tok):
            t = var_for(tok)
            pos += 1
            return t
        return None

    def parse_term() -> Term:
        nonlocal pos
        if peek() == "\\":
            return parse_abs()
        t = parse_atom()
        if t is None:
            raise ParseError("expected a term", here())
        while True:
            if peek() == "\\":  # trailing abstraction swallows the rest
                return App(t, parse_abs())
            a = parse_atom()
            if a is None:
                return t
            t = App(t, a)

    t = parse_term()
    if peek() is not None:
        raise ParseError("trailing input", here())
    return t


# ---------------------------------------------------------------------------
# printing


class Namer:
    """Stable display names for VarIds, assigned in first-seen order.

    style="prime": later ids sharing a display get x', x'', ... (skipping any
    name already claimed). style="id": later ids get display_id suffixes.
    """

    def __init__(self, style: str = "prime"):
        self.style = style
        self.names: dict[VarId, str] = {}
        self.taken: set[str] = set()

    def name(self, v: VarId) -> str:
        got = self.names.get(v)
        if got is not None:
            return got
        if v.display not in self.taken:
            candidate = v.display
        elif self.style == "prime":
            candidate = v.display + "'"
            while candidate in self.taken:
                candidate += "'"
        else:
            candidate = f"{v.display}_{v.id}"
            while candidate in self.taken:
                candidate += "_"
        self.names[v] = candidate
        self.taken.add(candidate)
        return candidate


def print_term(t: Term, namer: Namer | None = None) -> str:
    """Minimal-parenthesis text that parse() round-trips alpha-equivalently."""
    namer = namer or Namer()
    # pieces built iteratively; jobs are ('t', term, ctx) or ('s', literal).
    # ctx: 'top' | 'appl' (left of application) | 'appr' (non-final right arg)
    # | 'tail' (final right arg: bare abstraction allowed)
    out: list[str] = []
    todo: list[tuple] = [("t", t, "top")]
    while todo:
        job = todo.pop()
        if job[0] == "s":
            out.append(job[1])
            continue
        _, u, ctx = job
        if isinstance(u, Var):
            out.append(namer.name(u.v))
        elif isinstance(u, Abs):
            wrap = ctx in ("appl", "appr")
            if wrap:
                out.append("(")
                todo.append(("s", ")"))
            out.append(f"\\{namer.name(u.binder)}.")
            todo.append(("t", u.body, "top"))
        else:
            wrap = ctx == "appr"
            if wrap:
                out.append("(")
                todo.append(("s", ")"))
            eff = "top" if wrap else ctx
            if isinstance(u.right, App):
                right_ctx = "appr"
            elif isinstance(u.right, Abs):
                # a bare trailing abstraction swallows the rest of the line,
                # so it is only safe where nothing of this term follows
                right_ctx = "tail" if eff in ("top", "tail") else "appr"
            else:
                right_ctx = "appr"
            todo.append(("t", u.right, right_ctx))
            todo.append(("s", " "))
            todo.append(("t", u.left, "appl"))
    return "".join(out)
