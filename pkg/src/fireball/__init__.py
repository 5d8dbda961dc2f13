"""Open call-by-value evaluation: terms, a reference right-to-left
evaluator, three abstract machines with cost counters, lockstep
verification, bound auditing, and size-explosion reports."""

from .calculus import (
    FAMILIES,
    Derivation,
    StepKind,
    all_one_steps,
    check_inert_substitution,
    evaluate_rtl,
    gen_gamma,
    gen_r,
    gen_s,
    gen_s_applied,
    gen_t,
    gen_u,
    rtl_step,
)
from .easy import run_easy, step_easy
from .fast import run_fast, step_fast
from .machine import (
    DEFAULT_BUDGET,
    DEFAULT_FUEL,
    MACHINES,
    AbsItem,
    BudgetExceeded,
    Counters,
    Env,
    InvariantChecker,
    InvariantViolation,
    MachineStuck,
    RunResult,
    State,
    VarItem,
    check_state_invariants,
    decode_item,
    decode_state,
    initial_state,
    is_final,
    render_trace,
    state_free_size,
    state_size,
    trace_rows,
    unfold_term,
)
from .naive import run_naive, step_naive
from .terms import (
    Abs,
    App,
    FireballClass,
    Namer,
    ParseError,
    Term,
    Var,
    alpha_eq,
    alpha_key,
    classify,
    free_size,
    free_vars,
    is_fireball,
    parse,
    print_term,
    size,
)
from .verify import (
    BENCH_FAMILIES,
    EXPLOSION_COLUMNS,
    LockstepReport,
    audit_bounds,
    corpus_reports,
    explosion_report,
    lockstep,
    random_term,
)

__version__ = "0.1.0"

__all__ = [
    "Abs", "AbsItem", "App", "BENCH_FAMILIES", "BudgetExceeded", "Counters",
    "DEFAULT_BUDGET", "DEFAULT_FUEL", "Derivation", "Env",
    "EXPLOSION_COLUMNS", "FAMILIES", "FireballClass", "InvariantChecker",
    "InvariantViolation", "LockstepReport", "MACHINES", "MachineStuck",
    "Namer", "ParseError", "RunResult", "State", "StepKind", "Term", "Var",
    "VarItem", "all_one_steps", "alpha_eq", "alpha_key", "audit_bounds",
    "check_inert_substitution", "check_state_invariants", "classify",
    "corpus_reports", "decode_item", "decode_state", "evaluate_rtl",
    "explosion_report", "free_size", "free_vars", "gen_gamma", "gen_r",
    "gen_s", "gen_s_applied", "gen_t", "gen_u", "initial_state",
    "is_fireball", "is_final", "lockstep", "parse", "print_term",
    "random_term", "render_trace", "rtl_step", "run_easy", "run_fast",
    "run_naive", "size", "state_free_size", "state_size", "step_easy",
    "step_fast", "step_naive", "trace_rows", "unfold_term",
]
