"""Command line interface.

Exit codes: 0 success, 1 term parse error, 2 verification failure,
3 fuel exhausted during `run`, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from .calculus import FAMILIES, evaluate_rtl
from .easy import run_easy
from .fast import run_fast
from .machine import (
    DEFAULT_BUDGET,
    DEFAULT_FUEL,
    MACHINES,
    BudgetExceeded,
    decode_state,
    state_size,
    trace_rows,
)
from .naive import run_naive
from .terms import Namer, ParseError, parse, print_term, size
from .verify import (
    BENCH_FAMILIES,
    EXPLOSION_COLUMNS,
    corpus_reports,
    explosion_report,
    lockstep,
)

EX_OK = 0
EX_PARSE = 1
EX_VERIFY = 2
EX_FUEL = 3
EX_USAGE = 64

STATS_SCHEMA = "fireball-stats-v1"
TRACE_SCHEMA = "fireball-trace-v1"
VERIFY_SCHEMA = "fireball-verify-v1"
BENCH_SCHEMA = "fireball-bench-v1"

STATS_COLUMNS = ("machine", "term", "size_t0", "beta", "subst", "commutative",
                 "per_kind", "ram_cost", "fuel_exhausted", "decoded_size",
                 "normal_form")


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems on exit code 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(sub, term_arg=True, machine_default="fast"):
    if term_arg:
        sub.add_argument("term", nargs="?", help="term text; omit when using -f")
        sub.add_argument("-f", "--file", metavar="FILE",
                         help="read the term from FILE, or stdin when '-'")
    sub.add_argument("--machine", default=machine_default, metavar="NAME",
                     help="easy|fast|naive|oracle|all, or a comma-separated "
                          f"subset (default: {machine_default})")
    sub.add_argument("--fuel", type=int, default=DEFAULT_FUEL, metavar="N",
                     help=f"transition limit (default {DEFAULT_FUEL})")
    sub.add_argument("--budget", type=int, default=DEFAULT_BUDGET, metavar="N",
                     help=f"node budget for decoding (default {DEFAULT_BUDGET})")
    sub.add_argument("--format", choices=("table", "json", "csv"),
                     default="table", help="output format (default table)")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fireball",
                description="Evaluate lambda terms with open call-by-value "
                            "abstract machines and check them against a "
                            "reference evaluator.")
    sub = p.add_subparsers(dest="cmd", required=True, metavar="COMMAND")

    run = sub.add_parser("run",
                         help="evaluate a term; print its normal form and stats")
    _add_common(run)

    trace = sub.add_parser("trace",
                           help="print the full transition table of one machine")
    _add_common(trace, machine_default="easy")
    trace.add_argument("--golden", action="store_true",
                       help="rename variables canonically so output is "
                            "reproducible across runs")

    compare = sub.add_parser("compare",
                             help="run every machine plus the reference "
                                  "evaluator side by side")
    _add_common(compare, machine_default="all")

    fam = sub.add_parser("family",
                         help="print the n-th member of a built-in term family")
    fam.add_argument("name", choices=sorted(FAMILIES))
    fam.add_argument("n", type=int)

    ver = sub.add_parser("verify",
                         help="lockstep-verify machines against the reference "
                              "evaluator; nonzero exit on failure")
    _add_common(ver, machine_default="all")
    ver.add_argument("--corpus", type=int, metavar="N",
                     help="verify N seeded random terms instead of one term")
    ver.add_argument("--max-size", type=int, default=30, metavar="N",
                     help="size cap for corpus terms (default 30)")
    ver.add_argument("--seed", type=int, default=0,
                     help="corpus seed (FIREBALL_SEED env overrides)")

    bench = sub.add_parser("bench",
                           help="measure a term family across sizes")
    bench.add_argument("family", choices=sorted(BENCH_FAMILIES))
    bench.add_argument("n_max", type=int)
    _add_common(bench, term_arg=False, machine_default="easy,fast")
    bench.add_argument("--out", metavar="FILE",
                       help="also write the report as CSV to FILE")
    bench.add_argument("--plot", metavar="FILE",
                       help="also render growth curves to FILE (png/svg/pdf)")
    return p


# ---------------------------------------------------------------------------
# helpers

def _pick_machines(value: str, oracle_ok: bool) -> list[str]:
    names = []
    for name in value.split(","):
        name = name.strip()
        if name == "all":
            names.extend(m for m in MACHINES if m not in names)
            continue
        allowed = MACHINES + (("oracle",) if oracle_ok else ())
        if name not in allowed:
            raise _CliError(EX_USAGE, f"unknown machine {name!r} "
                                      f"(one of {', '.join(allowed)} or all)")
        if name not in names:
            names.append(name)
    return names


class _CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _read_term(args):
    if args.file is not None:
        if args.term is not None:
            raise _CliError(EX_USAGE, "give a term or -f FILE, not both")
        text = sys.stdin.read() if args.file == "-" else _read_file(args.file)
    elif args.term == "-":
        text = sys.stdin.read()
    elif args.term is not None:
        text = args.term
    else:
        raise _CliError(EX_USAGE, "no term given (positional argument or -f FILE)")
    return parse(text)


def _read_file(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise _CliError(EX_USAGE, f"cannot read {path}: {e.strerror}") from e


def _emit_csv(rows: list[dict], columns) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(["" if row.get(c) is None else _cell(row.get(c))
                         for c in columns])
    return out.getvalue()


def _cell(value):
    if isinstance(value, dict):
        return " ".join(f"{k}:{v}" for k, v in sorted(value.items()))
    if isinstance(value, bool):
        return str(value).lower()
    return value


def _emit_table(rows: list[dict], columns) -> str:
    grid = [[str(c) for c in columns]]
    for row in rows:
        grid.append(["-" if row.get(c) is None else str(_cell(row.get(c)))
                     for c in columns])
    widths = [max(len(line[i]) for line in grid) for i in range(len(columns))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip()
             for line in grid]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


def _stats_record(result, budget: int) -> dict:
    """The stats object for one machine run, keys in a fixed order."""
    normal_form = None
    try:
        decoded = decode_state(result.state, unfold=True, budget=budget)
        decoded_size = size(decoded)
        if not result.exhausted:
            normal_form = print_term(decoded)
    except BudgetExceeded:
        decoded_size = "budget_exceeded"
    c = result.counters
    return {
        "schema": STATS_SCHEMA,
        "machine": result.machine,
        "term": print_term(result.source),
        "size_t0": size(result.code0),
        "beta": c.beta,
        "subst": c.subst,
        "commutative": c.commutative,
        "per_kind": dict(sorted(c.per_kind.items())),
        "ram_cost": c.ram_cost,
        "fuel_exhausted": result.exhausted,
        "decoded_size": decoded_size,
        "normal_form": normal_form,
    }


def _oracle_record(t, derivation) -> dict:
    final = derivation.final
    return {
        "schema": STATS_SCHEMA,
        "machine": "oracle",
        "term": print_term(t),
        "size_t0": size(t),
        "beta": len(derivation),
        "subst": None,
        "commutative": None,
        "per_kind": None,
        "ram_cost": None,
        "fuel_exhausted": derivation.exhausted,
        "decoded_size": size(final),
        "normal_form": None if derivation.exhausted else print_term(final),
    }


_RUNNERS = {"easy": run_easy, "fast": run_fast, "naive": run_naive}


def _run_one(machine: str, t, args) -> dict:
    if machine == "oracle":
        return _oracle_record(t, evaluate_rtl(t, fuel=args.fuel))
    if machine == "naive":
        result = run_naive(t, fuel=args.fuel, budget=args.budget)
    else:
        result = _RUNNERS[machine](t, fuel=args.fuel)
    return _stats_record(result, args.budget)


def _print_stats(records: list[dict], fmt: str):
    if fmt == "json":
        print(_json(records[0] if len(records) == 1 else records))
    elif fmt == "csv":
        print(_emit_csv(records, STATS_COLUMNS), end="")
    else:
        for i, rec in enumerate(records):
            if i:
                print()
            nf = rec["normal_form"]
            if nf is None:
                nf = ("(fuel exhausted)" if rec["fuel_exhausted"]
                      else "(decode budget exceeded)")
            print("machine:".ljust(16) + rec["machine"])
            print("normal form:".ljust(16) + nf)
            for key in ("size_t0", "beta", "subst", "commutative",
                        "ram_cost", "decoded_size", "fuel_exhausted"):
                value = rec[key]
                print(f"{key}:".ljust(16) + str("-" if value is None else _cell(value)))
            if rec["per_kind"] is not None:
                print("per_kind:".ljust(16) + str(_cell(rec["per_kind"])))


# ---------------------------------------------------------------------------
# subcommands

def cmd_run(args) -> int:
    t = _read_term(args)
    machines = _pick_machines(args.machine, oracle_ok=True)
    records = [_run_one(m, t, args) for m in machines]
    _print_stats(records, args.format)
    return EX_FUEL if any(r["fuel_exhausted"] for r in records) else EX_OK


def cmd_trace(args) -> int:
    t = _read_term(args)
    machines = _pick_machines(args.machine, oracle_ok=True)
    if len(machines) != 1:
        raise _CliError(EX_USAGE, "trace wants exactly one machine")
    machine = machines[0]
    if machine == "oracle":
        d = evaluate_rtl(t, fuel=args.fuel)
        namer = Namer() if args.golden else Namer("id")
        rows = [{"term": print_term(d.start, namer), "transition": ""}]
        for u, kind in d.steps:
            rows[-1]["transition"] = kind.value
            rows.append({"term": print_term(u, namer), "transition": ""})
        rows[-1]["transition"] = "(fuel)" if d.exhausted else "(normal)"
        columns = ("term", "transition")
        payload = {"schema": TRACE_SCHEMA, "machine": "oracle",
                   "fuel_exhausted": d.exhausted, "rows": rows}
    else:
        if machine == "naive":
            result = run_naive(t, fuel=args.fuel, trace=True, budget=args.budget)
        else:
            result = _RUNNERS[machine](t, fuel=args.fuel, trace=True)
        namer = Namer() if args.golden else Namer("id")
        columns = ("dump", "code", "stack", "env", "transition")
        rows = [dict(zip(columns, row)) for row in trace_rows(result, namer)]
        payload = {"schema": TRACE_SCHEMA, "machine": machine,
                   "fuel_exhausted": result.exhausted, "rows": rows}
    if args.format == "json":
        print(_json(payload))
    elif args.format == "csv":
        print(_emit_csv(rows, columns), end="")
    else:
        for row in rows:
            print(" | ".join(row[c] for c in columns).rstrip(" |"))
    return EX_OK


def cmd_compare(args) -> int:
    t = _read_term(args)
    machines = _pick_machines(args.machine, oracle_ok=True)
    if "oracle" not in machines:
        machines.append("oracle")
    records = [_run_one(m, t, args) for m in machines]
    if args.format == "json":
        print(_json(records))
    elif args.format == "csv":
        print(_emit_csv(records, STATS_COLUMNS), end="")
    else:
        columns = ("machine", "beta", "subst", "commutative", "ram_cost",
                   "decoded_size", "fuel_exhausted", "normal_form")
        print(_emit_table(records, columns))
    return EX_OK


def cmd_family(args) -> int:
    try:
        t = FAMILIES[args.name](args.n)
    except ValueError as e:
        raise _CliError(EX_USAGE, str(e)) from e
    print(print_term(t))
    return EX_OK


def cmd_verify(args) -> int:
    machines = _pick_machines(args.machine, oracle_ok=False)
    if args.corpus is not None:
        if args.corpus < 1:
            raise _CliError(EX_USAGE, "--corpus wants a positive count")
        seed = int(os.environ.get("FIREBALL_SEED", args.seed))
        reports = corpus_reports(args.corpus, machines=machines, seed=seed,
                                 max_size=args.max_size, fuel=args.fuel,
                                 budget=args.budget)
    else:
        t = _read_term(args)
        reports = [lockstep(t, m, fuel=args.fuel, budget=args.budget)
                   for m in machines]
    failed = [r for r in reports if not r.ok]
    if args.format == "json":
        print(_json({
            "schema": VERIFY_SCHEMA,
            "passed": len(reports) - len(failed),
            "failed": len(failed),
            "reports": [vars(r) for r in reports],
        }))
    elif args.format == "csv":
        columns = ("machine", "term", "ok", "transitions", "beta",
                   "final_class", "fuel_exhausted", "budget_exceeded",
                   "violations")
        rows = [{
            "machine": r.machine, "term": r.term, "ok": r.ok,
            "transitions": r.transitions, "beta": r.beta,
            "final_class": r.final_class, "fuel_exhausted": r.exhausted,
            "budget_exceeded": r.budget_exceeded,
            "violations": "; ".join(r.decode_mismatches
                                    + r.invariant_violations
                                    + r.bound_violations),
        } for r in reports]
        print(_emit_csv(rows, columns), end="")
    else:
        for r in reports:
            print(r.summary())
        print(f"{len(reports) - len(failed)} passed, {len(failed)} failed")
    return EX_VERIFY if failed else EX_OK


def cmd_bench(args) -> int:
    machines = _pick_machines(args.machine, oracle_ok=False)
    rows = explosion_report(args.family, args.n_max, machines=machines,
                            fuel=args.fuel, budget=args.budget)
    if args.format == "json":
        print(_json({"schema": BENCH_SCHEMA, "rows": rows}))
    elif args.format == "csv":
        print(_emit_csv(rows, EXPLOSION_COLUMNS), end="")
    else:
        print(_emit_table(rows, EXPLOSION_COLUMNS))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(_emit_csv(rows, EXPLOSION_COLUMNS))
        print(f"wrote {args.out}", file=sys.stderr)
    if args.plot:
        from .plots import render_explosion_figure

        render_explosion_figure(rows, args.plot)
        print(f"wrote {args.plot}", file=sys.stderr)
    return EX_OK


_DISPATCH = {
    "run": cmd_run,
    "trace": cmd_trace,
    "compare": cmd_compare,
    "family": cmd_family,
    "verify": cmd_verify,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 200_000))
    args = build_parser().parse_args(argv)
    try:
        return _DISPATCH[args.cmd](args)
    except ParseError as e:
        print(f"fireball: parse error: {e}", file=sys.stderr)
        return EX_PARSE
    except _CliError as e:
        print(f"fireball: error: {e}", file=sys.stderr)
        return e.code
    except BrokenPipeError:
        return EX_OK


if __name__ == "__main__":
    sys.exit(main())
