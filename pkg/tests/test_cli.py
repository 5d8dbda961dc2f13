"""Command line behaviour: formats, exit codes, file handling."""

import json
import os

import pytest

from fireball import verify
from fireball.cli import main
from fireball.easy import run_easy
from fireball.machine import render_trace
from fireball.terms import Namer, parse

EXAMPLE = r"(\z.z (y z)) \x.x"


@pytest.fixture
def cli(capsys, monkeypatch):
    """Run main() and capture (exit_code, stdout, stderr)."""

    def invoke(*argv, stdin=None):
        if stdin is not None:
            import io
            monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
        try:
            code = main(list(argv))
        except SystemExit as e:
            code = e.code
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return invoke


class TestRun:
    def test_normal_form_and_stats(self, cli):
        code, out, _ = cli("run", EXAMPLE, "--machine", "easy")
        assert code == 0
        assert "normal form:    y \\x.x" in out
        assert "beta:           2" in out
        assert "subst:          2" in out

    def test_default_machine_runs(self, cli):
        code, out, _ = cli("run", EXAMPLE)
        assert code == 0 and "machine:        fast" in out

    def test_variable_runs_in_zero_transitions(self, cli):
        code, out, _ = cli("run", "y", "--machine", "easy", "--format", "json")
        stats = json.loads(out)
        assert code == 0
        assert stats["beta"] == 0 and stats["normal_form"] == "y"
        assert stats["per_kind"] == {}

    def test_json_keys_are_stable(self, cli):
        _, out, _ = cli("run", "y", "--format", "json")
        assert list(json.loads(out)) == [
            "schema", "machine", "term", "size_t0", "beta", "subst",
            "commutative", "per_kind", "ram_cost", "fuel_exhausted",
            "decoded_size", "normal_form",
        ]
        assert json.loads(out)["schema"] == "fireball-stats-v1"

    def test_fuel_exhaustion_exits_3_with_stats(self, cli):
        code, out, _ = cli("run", r"(\x.x x) \x.x x", "--fuel", "10")
        assert code == 3
        assert "(fuel exhausted)" in out
        assert "ram_cost:" in out  # stats still printed

    def test_oracle_machine(self, cli):
        code, out, _ = cli("run", EXAMPLE, "--machine", "oracle",
                           "--format", "json")
        stats = json.loads(out)
        assert code == 0 and stats["beta"] == 2
        assert stats["subst"] is None

    def test_all_machines_csv(self, cli):
        code, out, _ = cli("run", EXAMPLE, "--machine", "all",
                           "--format", "csv")
        lines = out.strip().splitlines()
        assert code == 0 and len(lines) == 4  # header + three machines
        assert lines[0].startswith("machine,term,size_t0,beta")

    def test_decode_budget_exceeded_is_reported(self, cli, tmp_path):
        code, out, _ = cli("family", "t", "14")
        term_file = tmp_path / "t14.fb"
        term_file.write_text(out)
        code, out, _ = cli("run", "-f", str(term_file), "--machine", "easy",
                           "--budget", "500", "--format", "json")
        assert code == 0
        assert json.loads(out)["decoded_size"] == "budget_exceeded"
        assert json.loads(out)["normal_form"] is None


class TestInput:
    def test_stdin_dash(self, cli):
        code, out, _ = cli("run", "-", "--machine", "easy",
                           stdin=r"(\x.x) y")
        assert code == 0 and "normal form:    y" in out

    def test_file_flag(self, cli, tmp_path):
        f = tmp_path / "term.fb"
        f.write_text(r"(\x.x) y")
        code, out, _ = cli("run", "-f", str(f), "--machine", "easy")
        assert code == 0 and "normal form:    y" in out

    def test_missing_file_is_usage_error(self, cli, tmp_path):
        code, _, err = cli("run", "-f", str(tmp_path / "absent.fb"))
        assert code == 64 and "cannot read" in err

    def test_term_and_file_together_rejected(self, cli, tmp_path):
        f = tmp_path / "term.fb"
        f.write_text("y")
        code, _, err = cli("run", "y", "-f", str(f))
        assert code == 64

    def test_parse_error_exits_1(self, cli):
        code, _, err = cli("run", "(\\x")
        assert code == 1 and "parse error" in err

    def test_no_term_is_usage_error(self, cli):
        code, _, err = cli("run")
        assert code == 64

    def test_unknown_machine_is_usage_error(self, cli):
        code, _, err = cli("run", "y", "--machine", "turbo")
        assert code == 64 and "unknown machine" in err

    def test_unknown_flag_is_usage_error(self, cli):
        code, _, err = cli("run", "y", "--warp", "9")
        assert code == 64

    def test_unknown_subcommand_is_usage_error(self, cli):
        code, _, err = cli("frobnicate")
        assert code == 64


class TestTrace:
    def test_golden_easy_trace_is_byte_stable(self, cli):
        code, out, _ = cli("trace", EXAMPLE, "--machine", "easy", "--golden")
        assert code == 0
        expected = render_trace(run_easy(parse(EXAMPLE), trace=True), Namer())
        assert out.splitlines() == expected
        assert out.splitlines()[0] == r"eps | (\z.z (y z)) \x.x | eps | eps | c1"
        assert out.splitlines()[-1] == (
            r"eps | x'' | eps | [x'' <- <y, (<\x'.x', eps>)>]"
            r" : [z <- <\x.x, eps>] | (final)"
        )

    def test_golden_output_is_reproducible(self, cli):
        _, first, _ = cli("trace", EXAMPLE, "--machine", "fast", "--golden")
        _, second, _ = cli("trace", EXAMPLE, "--machine", "fast", "--golden")
        assert first == second

    def test_csv_has_columns(self, cli):
        code, out, _ = cli("trace", "y", "--machine", "fast",
                           "--format", "csv")
        lines = out.strip().splitlines()
        assert code == 0
        assert lines[0] == "dump,code,stack,env,transition"
        assert lines[1].endswith("(final)")

    def test_json_schema(self, cli):
        _, out, _ = cli("trace", EXAMPLE, "--machine", "naive",
                        "--format", "json")
        payload = json.loads(out)
        assert payload["schema"] == "fireball-trace-v1"
        assert payload["machine"] == "naive"
        assert len(payload["rows"]) == 14  # 13 transitions + final state
        assert payload["rows"][-1]["transition"] == "(final)"

    def test_oracle_trace_lists_reference_steps(self, cli):
        code, out, _ = cli("trace", EXAMPLE, "--machine", "oracle", "--golden")
        lines = out.strip().splitlines()
        assert code == 0
        assert lines[0].endswith("| beta_lambda")
        assert lines[1].endswith("| beta_inert")
        assert lines[2] == r"y \x.x | (normal)"

    def test_two_machines_rejected(self, cli):
        code, _, err = cli("trace", "y", "--machine", "easy,fast")
        assert code == 64


class TestCompare:
    def test_table_contains_every_machine_and_oracle(self, cli):
        code, out, _ = cli("compare", EXAMPLE)
        assert code == 0
        for name in ("easy", "fast", "naive", "oracle"):
            assert name in out

    def test_json_rows_agree_on_beta(self, cli):
        _, out, _ = cli("compare", EXAMPLE, "--format", "json")
        rows = json.loads(out)
        assert [r["machine"] for r in rows] == ["easy", "fast", "naive", "oracle"]
        assert {r["beta"] for r in rows} == {2}
        assert {r["decoded_size"] for r in rows} == {4}


class TestFamily:
    def test_prints_member(self, cli):
        code, out, _ = cli("family", "t", "2")
        assert code == 0
        assert out.strip() == r"(\x.x x) ((\x'.x' x') y)"

    def test_member_round_trips(self, cli):
        for name in ("t", "gamma", "u", "r", "s"):
            code, out, _ = cli("family", name, "3")
            assert code == 0
            parse(out)  # must be valid syntax

    def test_bad_index_is_usage_error(self, cli):
        code, _, err = cli("family", "u", "0")  # u-family starts at 1
        assert code == 64 and "must be >= 1" in err

    def test_unknown_family_rejected(self, cli):
        code, _, _ = cli("family", "zeta", "3")
        assert code == 64


class TestVerify:
    def test_single_term_passes(self, cli):
        code, out, _ = cli("verify", EXAMPLE)
        assert code == 0
        assert out.count("PASS") == 3 and "3 passed, 0 failed" in out

    def test_corpus_mode(self, cli):
        code, out, _ = cli("verify", "--corpus", "5", "--max-size", "14",
                           "--fuel", "300", "--machine", "easy,fast")
        assert code == 0 and "10 passed, 0 failed" in out

    def test_corpus_seed_env_override(self, cli, monkeypatch):
        args = ("verify", "--corpus", "3", "--max-size", "12",
                "--fuel", "200", "--format", "csv")
        _, baseline, _ = cli(*args, "--seed", "1")
        monkeypatch.setenv("FIREBALL_SEED", "1")
        _, overridden, _ = cli(*args, "--seed", "2")
        assert overridden == baseline

    def test_failure_exits_2(self, cli, monkeypatch):
        monkeypatch.setitem(verify._STEPPERS, "easy", lambda state: None)
        code, out, _ = cli("verify", EXAMPLE, "--machine", "easy")
        assert code == 2 and "FAIL" in out

    def test_json_report(self, cli):
        _, out, _ = cli("verify", "y", "--format", "json")
        payload = json.loads(out)
        assert payload["schema"] == "fireball-verify-v1"
        assert payload["failed"] == 0
        assert len(payload["reports"]) == 3

    def test_oracle_is_not_a_verifiable_machine(self, cli):
        code, _, err = cli("verify", "y", "--machine", "oracle")
        assert code == 64


class TestBench:
    def test_csv_rows_and_default_machines(self, cli):
        code, out, _ = cli("bench", "u", "4", "--format", "csv")
        lines = out.strip().splitlines()
        assert code == 0
        assert lines[0] == ("family,n,machine,size_t0,beta,subst,"
                            "commutative,ram_cost,state_size,"
                            "decoded_size_or_flag")
        assert len(lines) == 9  # header + 4 sizes x 2 machines
        fast_rows = [l for l in lines[1:] if ",fast," in l]
        assert all(l.split(",")[5] == "0" for l in fast_rows)  # subst column

    def test_out_and_plot_files(self, cli, tmp_path):
        out_csv = tmp_path / "report.csv"
        out_png = tmp_path / "report.png"
        code, _, err = cli("bench", "t", "6", "--machine", "naive",
                           "--out", str(out_csv), "--plot", str(out_png))
        assert code == 0
        assert out_csv.read_text().startswith("family,n,machine")
        assert out_png.stat().st_size > 1000
        assert "wrote" in err

    def test_table_format(self, cli):
        code, out, _ = cli("bench", "s", "3", "--machine", "fast")
        assert code == 0
        assert out.splitlines()[0].startswith("family")

    def test_unknown_family_rejected(self, cli):
        code, _, _ = cli("bench", "gamma", "3")
        assert code == 64  # gamma is printable but not runnable standalone

    def test_json_schema(self, cli):
        _, out, _ = cli("bench", "u", "2", "--format", "json")
        payload = json.loads(out)
        assert payload["schema"] == "fireball-bench-v1"
        assert len(payload["rows"]) == 4
