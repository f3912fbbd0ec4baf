"""Exit codes, report formats, and determinism of the command line."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from forge.cli import RunConfig, main
from forge.prop import parse_prop
from forge.sexpr import parse_formula

MACHINES = Path(__file__).resolve().parents[1] / "src" / "forge" / "machines"
PK = Path(__file__).resolve().parents[1] / "src" / "forge" / "pk"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# --- exit code contract ---

def test_oracle_test_reports_pass(capsys):
    code, out, _ = run(capsys, "oracle-test", "--tm", str(MACHINES / "scan1.tm"),
                       "--max-len", "6")
    assert code == 0
    assert "acc-equivalence: PASS" in out


def test_invalid_proof_is_domain_failure(tmp_path, capsys):
    bad = tmp_path / "bad.pk"
    bad.write_text("1: (seq () ((pv z 0))) axiom\n")
    code, out, _ = run(capsys, "check-proof", "--proof", str(bad))
    assert code == 1
    assert "proof: REJECTED" in out


def test_eval_unbound_variable_is_usage_error(tmp_path, capsys):
    f = tmp_path / "f.sexp"
    f.write_text("(= x (+ 1 1))\n")
    code, _, err = run(capsys, "eval", "--formula", str(f), "--num-bound", "8")
    assert code == 2
    assert "usage: forge eval" in err
    assert "unbound variable(s): x" in err


def test_usage_errors_print_the_offending_grammar(capsys):
    code, _, err = run(capsys, "compile-nepo", "--tm", str(MACHINES / "scan1.tm"),
                       "--m", "4", "--eps", "3/2", "--k", "2")
    assert code == 2
    assert "usage: forge compile-nepo" in err


def test_unknown_subcommand_and_missing_subcommand():
    assert main(["bogus"]) == 2
    assert main([]) == 2


def test_missing_required_flag_is_usage_error():
    assert main(["compile-acc"]) == 2


def test_unreadable_input_path_is_usage_error(capsys):
    code, _, err = run(capsys, "check-proof", "--proof", "/nonexistent.pk")
    assert code == 2
    assert "cannot read" in err


# --- eval bindings ---

def test_eval_binds_both_sorts(tmp_path, capsys):
    f = tmp_path / "f.sexp"
    f.write_text("(and (in i X) (= i 1))")
    code, out, _ = run(capsys, "eval", "--formula", str(f), "--num-bound", "4",
                       "--bind", "X=01", "--bind", "i=1")
    assert (code, out) == (0, "value: true\n")
    code, out, _ = run(capsys, "eval", "--formula", str(f), "--num-bound", "4",
                       "--bind", "X=10", "--bind", "i=1")
    assert (code, out) == (0, "value: false\n")


def test_eval_rejects_stray_and_malformed_bindings(tmp_path, capsys):
    f = tmp_path / "f.sexp"
    f.write_text("(= x x)")
    assert run(capsys, "eval", "--formula", str(f), "--num-bound", "2",
               "--bind", "x=1", "--bind", "y=2")[0] == 2
    assert run(capsys, "eval", "--formula", str(f), "--num-bound", "2",
               "--bind", "x")[0] == 2
    assert run(capsys, "eval", "--formula", str(f), "--num-bound", "2",
               "--bind", "x=ten")[0] == 2


def test_eval_string_quantifier_needs_width(tmp_path, capsys):
    f = tmp_path / "f.sexp"
    f.write_text("(exS W (+ 1 1) (in 0 W))")
    code, out, _ = run(capsys, "eval", "--formula", str(f), "--num-bound", "4",
                       "--str-width", "2")
    assert (code, out) == (0, "value: true\n")
    # without the width the slice cannot sweep the quantifier
    assert run(capsys, "eval", "--formula", str(f), "--num-bound", "4")[0] == 1


def test_eval_rejects_nonpositive_num_bound(tmp_path, capsys):
    f = tmp_path / "f.sexp"
    f.write_text("(= 1 1)")
    assert run(capsys, "eval", "--formula", str(f), "--num-bound", "0")[0] == 2


# --- compile subcommands ---

def test_compile_acc_prints_a_parseable_formula(capsys):
    code, out, _ = run(capsys, "compile-acc", "--tm", str(MACHINES / "parity.tm"),
                       "--poly", "2,1")
    assert code == 0
    parse_formula(out)


def test_compile_nepo_report_and_out_file(tmp_path, capsys):
    dest = tmp_path / "nepo.sexp"
    code, out, _ = run(capsys, "compile-nepo", "--tm", str(MACHINES / "scan1.tm"),
                       "--m", "4", "--eps", "1/3", "--k", "2", "--out", str(dest))
    assert code == 0
    assert f"wrote: {dest}" in out
    assert "nodes[acceptance]:" in out
    parse_formula(dest.read_text())


def test_compile_nepo_budget_failure_is_domain_error(capsys):
    # span 1 cannot cover the step budget without an explicit depth
    code, _, err = run(capsys, "compile-nepo", "--tm", str(MACHINES / "scan1.tm"),
                       "--m", "4", "--eps", "1/2", "--k", "2")
    assert code == 1
    assert "error" in err


def test_node_cap_blocks_large_output(monkeypatch, capsys):
    monkeypatch.setenv("FORGE_NODE_CAP", "100")
    code, _, err = run(capsys, "compile-acc", "--tm", str(MACHINES / "parity.tm"),
                       "--poly", "2,1")
    assert code == 1
    assert "FORGE_NODE_CAP" in err
    monkeypatch.setenv("FORGE_NODE_CAP", "10000000")
    assert run(capsys, "compile-acc", "--tm", str(MACHINES / "parity.tm"),
               "--poly", "2,1")[0] == 0
    monkeypatch.setenv("FORGE_NODE_CAP", "many")
    assert run(capsys, "compile-acc", "--tm", str(MACHINES / "parity.tm"),
               "--poly", "2,1")[0] == 2


# --- translate ---

def test_translate_reports_shape(tmp_path, capsys):
    f = tmp_path / "f.sexp"
    f.write_text("(alN i (len X) (or (in i X) (not (in i X))))")
    code, out, _ = run(capsys, "translate", "--formula", str(f), "--len", "X=3",
                       "--json")
    assert code == 0
    data = json.loads(out)
    assert set(data) == {"subcommand", "formula", "lengths", "values",
                         "nodes", "depth", "prop"}
    parse_prop(data["prop"])


def test_translate_missing_length_is_usage_error(tmp_path, capsys):
    f = tmp_path / "f.sexp"
    f.write_text("(in 0 X)")
    code, _, err = run(capsys, "translate", "--formula", str(f))
    assert code == 2
    assert "unbound variable(s): X" in err


def test_translate_refuses_string_quantifiers(tmp_path, capsys):
    f = tmp_path / "f.sexp"
    f.write_text("(exS W (+ 1 1) (in 0 W))")
    assert run(capsys, "translate", "--formula", str(f))[0] == 1


# --- mfv ---

def test_mfv_reports_value_and_table(capsys):
    code, out, _ = run(capsys, "mfv", "--tree", "1011", "--a", "4",
                       "--input", "1101")
    assert code == 0
    assert out.splitlines() == ["value: 1", "table: 11101101", "mfv-check: PASS"]


def test_mfv_bad_geometry_is_usage_error(capsys):
    assert run(capsys, "mfv", "--tree", "101", "--a", "4", "--input", "1101")[0] == 2
    assert run(capsys, "mfv", "--tree", "1012", "--a", "4", "--input", "1101")[0] == 2


# --- check-proof ---

def test_check_proof_accepts_corpus_and_depth_variants(capsys):
    proof = str(PK / "corpus01.pk")
    assert run(capsys, "check-proof", "--proof", proof)[0] == 0
    assert run(capsys, "check-proof", "--proof", proof, "--depth", "4")[0] == 0
    assert run(capsys, "check-proof", "--proof", proof, "--depth", "0")[0] == 1


def test_check_proof_json_schema(capsys):
    code, out, _ = run(capsys, "check-proof", "--proof", str(PK / "corpus02.pk"),
                       "--json")
    assert code == 0
    data = json.loads(out)
    assert set(data) == {"subcommand", "proof", "system", "lines", "accepted"}
    assert data["accepted"] is True


def test_check_proof_malformed_text_is_domain_failure(tmp_path, capsys):
    bad = tmp_path / "junk.pk"
    bad.write_text("this is not a proof\n")
    assert run(capsys, "check-proof", "--proof", str(bad))[0] == 1


# --- reflect ---

def test_reflect_sweep_honest_and_broken(capsys):
    base = ("reflect", "--system", "frege", "--t", "12", "--x", "1", "--sweep")
    code, out, _ = run(capsys, *base)
    assert (code, "reflection: HOLDS" in out) == (0, True)
    code, out, _ = run(capsys, *base, "--broken")
    assert (code, "reflection: FAILS" in out) == (1, True)


def test_reflect_emits_parseable_instance(capsys):
    code, out, _ = run(capsys, "reflect", "--system", "frege", "--t", "12",
                       "--x", "1")
    assert code == 0
    parse_formula(out)


def test_reflect_depth_frege_needs_d(capsys):
    assert run(capsys, "reflect", "--system", "depth-frege", "--t", "12",
               "--x", "1")[0] == 2
    assert run(capsys, "reflect", "--system", "depth-frege", "--d", "2",
               "--t", "12", "--x", "1", "--sweep")[0] == 0


# --- determinism and JSON stability ---

def test_stdout_is_deterministic(capsys):
    argv = ("oracle-test", "--tm", str(MACHINES / "zeros.tm"), "--max-len", "4",
            "--sample", "3", "--seed", "9", "--json")
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second
    data = json.loads(first[1])
    assert set(data) == {"subcommand", "machine", "poly", "max_len", "seed",
                         "sample", "inputs", "mismatches", "pass"}


def test_compile_acc_json_schema(capsys):
    code, out, _ = run(capsys, "compile-acc", "--tm", str(MACHINES / "zeros.tm"),
                       "--poly", "2,1", "--json")
    assert code == 0
    data = json.loads(out)
    assert set(data) == {"subcommand", "machine", "poly", "nodes", "class",
                         "formula"}
    assert data["class"] == "SigmaB(1)"


def test_module_entry_point_matches_function(tmp_path):
    f = tmp_path / "f.sexp"
    f.write_text("(= x (+ 1 1))\n")
    proc = subprocess.run(
        [sys.executable, "-m", "forge.cli", "eval", "--formula", str(f),
         "--num-bound", "8"],
        capture_output=True, text=True)
    assert proc.returncode == 2
    assert "usage: forge eval" in proc.stderr


# --- RunConfig invariants ---

def test_runconfig_validates_bounds():
    with pytest.raises(ValueError):
        RunConfig(subcommand="eval", num_bound=0)
    with pytest.raises(ValueError):
        RunConfig(subcommand="eval", str_width=-1)
    with pytest.raises(ValueError):
        RunConfig(subcommand="compile-nepo", eps=2)
    RunConfig(subcommand="eval", num_bound=4, str_width=0)
