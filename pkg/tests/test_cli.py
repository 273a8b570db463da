import io
import os
import subprocess
import sys
from pathlib import Path

import pytest

from ltskit import ccs
from ltskit.cli import (EXIT_BUDGET, EXIT_CEX, EXIT_INPUT, EXIT_OK, EXIT_REFUSED,
                        count_dot, load_triples, main)
from ltskit.lts import LabelKind

from oracles import bfs_oracle

HERE = Path(__file__).parent
GOLDEN = HERE / "golden"
SAMPLES = HERE.parent / "samples"
L1, L2 = str(SAMPLES / "l1.tsv"), str(SAMPLES / "l2.tsv")

PIPELINE = ["--ccs", "rec X. !a.!c.?b.X", "--async", "--ccs", "rec Y. ?a.?c.!b.Y",
            "--async", "--par", "--filter", "internal"]

GOLDEN_CASES = {
    "dot_out_a.dot": ["dot", "--ccs", "!a.0", "--max-depth", "unbounded"],
    "dot_nil.dot": ["dot", "--ccs", "0"],
    "dot_l2.dot": ["dot", "--triples", L2, "--root", "p1"],
    "dot_async_depth3.dot": ["dot", "--ccs", "rec X. !a.!c.?b.X", "--async",
                             "--max-depth", "3"],
    "compose_par.txt": ["compose", "--ccs", "!a.(?b.0+?c.0)", "--par",
                        "--ccs", "?a.!c.0", "--depth", "2"],
    "compose_nil.txt": ["compose", "--ccs", "0", "--depth", "5"],
    "compose_async.txt": ["compose", "--ccs", "!c.!d.0", "--async", "--depth", "3"],
    "compose_pipeline.txt": ["compose", *PIPELINE, "--depth", "20"],
    "compose_triples.txt": ["compose", "--triples", L1, "--root", "0", "--par",
                            "--triples", L2, "--root", "p1", "--depth", "2"],
}


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


@pytest.mark.parametrize("name", sorted(GOLDEN_CASES))
def test_golden_output(name):
    code, out, _ = run(GOLDEN_CASES[name])
    assert code == EXIT_OK
    assert out == (GOLDEN / name).read_text(encoding="utf-8")


@pytest.mark.parametrize("name", sorted(GOLDEN_CASES))
def test_output_is_deterministic(name):
    assert run(GOLDEN_CASES[name]) == run(GOLDEN_CASES[name])


def test_dot_counts_on_stderr_without_output_file():
    assert run(["dot", "--ccs", "!a.0"])[2] == "nodes=2 edges=1\n"
    assert run(["dot", "--ccs", "0"])[2] == "nodes=1 edges=0\n"


def test_dot_writes_file_and_reports_counts(tmp_path):
    target = tmp_path / "l2.dot"
    code, out, _ = run(["dot", "--triples", L2, "--root", "p1", "-o", str(target)])
    assert code == EXIT_OK
    assert out == "nodes=4 edges=4\n"
    assert target.read_text() == (GOLDEN / "dot_l2.dot").read_text()


def test_dot_counts_match_reparse_and_bfs():
    argv = ["dot", "--ccs", "rec X. (!a.X + ?b.0) | ?a.0", "--async", "--max-depth", "4"]
    code, out, err = run(argv)
    nodes = sum(1 for line in out.splitlines() if line.strip().endswith(";")
                and " -> " not in line)
    edges = sum(1 for line in out.splitlines() if " -> " in line)
    assert err == f"nodes={nodes} edges={edges}\n"
    assert count_dot(out) == (nodes, edges)
    states, bfs_edges = bfs_oracle(ccs.process("rec X. (!a.X + ?b.0) | ?a.0")
                                   .asynchronous(), 4)
    assert (nodes, edges) == (len(states), len(bfs_edges))


def test_compose_root_edges_of_parallel_composition():
    code, out, _ = run(["compose", "--ccs", "!a.(?b.0+?c.0)", "--par",
                        "--ccs", "?a.!c.0", "--depth", "1"])
    labels = sorted(line.split("--")[1] for line in out.splitlines()[1:])
    assert code == EXIT_OK and labels == ["!a", "?a", "tau"]


def test_postfix_and_infix_chains_agree():
    infix = run(["compose", "--ccs", "!a.0", "--par", "--ccs", "?a.0", "--depth", "3"])
    postfix = run(["compose", "--ccs", "!a.0", "--ccs", "?a.0", "--par", "--depth", "3"])
    assert infix == postfix


def test_check_io_relation():
    code, out, _ = run(["check", "--ccs", "!a.0", "--ccs", "?a.0", "--relation", "io"])
    assert (code, out) == (EXIT_OK, "relation io-compliance: 2 pairs\n")


def test_check_io_counterexample():
    code, out, _ = run(["check", "--ccs", "!a.!pay.0", "--ccs", "?a.0",
                        "--relation", "io"])
    assert code == EXIT_CEX
    assert out.splitlines()[0] == "counterexample: Left((!pay.0, 0))"
    assert out.splitlines()[2] == "path: (!a.!pay.0, ?a.0) ; (!pay.0, 0)"


def test_check_correct_composition():
    code, out, _ = run(["check", "--ccs", "!success.0", "--ccs", "0",
                        "--relation", "correct"])
    assert code == EXIT_OK
    code, _, _ = run(["check", "--ccs", "!done.0", "--ccs", "0",
                      "--relation", "correct", "--success", "done"])
    assert code == EXIT_OK
    code, _, _ = run(["check", "--ccs", "!done.0", "--ccs", "0", "--relation", "correct"])
    assert code == EXIT_CEX


def test_check_bisimulation():
    code, out, _ = run(["check", "--ccs", "!a.!b.0", "--ccs", "!a.0", "--relation", "bisim"])
    assert code == EXIT_CEX and "!b" in out
    code, _, _ = run(["check", "--ccs", "tau.!a.0", "--ccs", "!a.0",
                      "--relation", "bisim", "--weak"])
    assert code == EXIT_OK


def test_check_file_roundtrip(tmp_path):
    rel = tmp_path / "rel.tsv"
    code, _, _ = run(["check", "--ccs", "!a.?b.0", "--ccs", "?a.!b.0",
                      "--relation", "io", "-o", str(rel)])
    assert code == EXIT_OK
    argv = ["check", "--ccs", "!a.?b.0", "--ccs", "?a.!b.0", "--relation", "io",
            "--check-file", str(rel)]
    code, out, _ = run(argv)
    assert code == EXIT_OK and out.startswith("check passed")
    lines = rel.read_text().splitlines()
    rel.write_text("\n".join(lines[:-1]) + "\n")
    code, out, _ = run(argv)
    assert code == EXIT_CEX and out.startswith("check failed at")


def test_check_file_on_composite_states(tmp_path):
    rel = tmp_path / "rel.tsv"
    base = ["check", "--ccs", "!a.0", "--async", "--ccs", "?a.0", "--relation", "io"]
    assert run(base + ["-o", str(rel)])[0] == EXIT_OK
    assert run(base + ["--check-file", str(rel)])[0] == EXIT_OK
    rel.write_text("(nowhere,[])\t0\n")
    assert run(base + ["--check-file", str(rel)])[0] == EXIT_INPUT


# -- exit codes ------------------------------------------------------------------

def test_exit_input_errors(tmp_path):
    assert run(["dot", "--ccs", "!a."])[0] == EXIT_INPUT
    assert run(["dot", "--ccs", "!a.X"])[0] == EXIT_INPUT
    assert run(["dot", "--triples", str(tmp_path / "missing.tsv"), "--root", "s"])[0] \
        == EXIT_INPUT
    assert run(["dot", "--triples", L2])[0] == EXIT_INPUT
    assert run(["dot", "--ccs", "0", "--filter", "bogus"])[0] == EXIT_INPUT
    assert run(["compose", "--ccs", "0", "--depth", "unbounded"])[0] == EXIT_INPUT
    assert run(["check", "--ccs", "0", "--relation", "io"])[0] == EXIT_INPUT
    assert run(["frobnicate"])[0] == EXIT_INPUT


def test_exit_refused():
    code, _, err = run(["dot", "--ccs", "rec X. !a.X", "--async"])
    assert code == EXIT_REFUSED and err.startswith("refused")
    assert run(["dot", "--triples", L2, "--root", "p1", "--async"])[0] == EXIT_REFUSED


def test_exit_budget():
    code, _, err = run(["check", "--ccs", "rec X. !a.X", "--async", "--ccs",
                        "rec Y. ?a.Y", "--relation", "io", "--budget", "5"])
    assert code == EXIT_BUDGET and err.startswith("budget exhausted")


def test_exit_codes_from_a_real_process():
    env = dict(os.environ, PYTHONPATH=str(HERE.parent / "src"))
    res = subprocess.run([sys.executable, "-m", "ltskit", "check", "--ccs", "!a.!pay.0",
                          "--ccs", "?a.0", "--relation", "io"],
                         capture_output=True, text=True, env=env)
    assert res.returncode == EXIT_CEX
    assert "Left((!pay.0, 0))" in res.stdout


# -- triples files ------------------------------------------------------------------

def test_load_empty_file(tmp_path):
    l = load_triples(write(tmp_path, "e.tsv", ""))
    assert l.process("s").stuck


def test_load_samples():
    assert load_triples(L2).process("p1").transitions == {"!a"}
    assert load_triples(L1).process("0").transitions == {"?a"}


def test_load_kinds_and_tau_rows(tmp_path):
    path = write(tmp_path, "k.tsv", "# comment\n\ns\t!a\tt\tout\nt\tt\ts\ttau\nu\t?a\tu\tin\n")
    l = load_triples(path)
    assert l.classify("t") is LabelKind.INTERNAL
    assert l.classify("!a") is LabelKind.OUTPUT
    assert l.is_internal("t")
    assert l.process("t").weak_reducts() == {l.process("t"), l.process("s")}
    assert l.process("s").asynchronous().transitions == {"t"}
    pq = l.process("s").par(l.process("u"))
    assert "t" in pq.transitions


def test_load_dedups(tmp_path):
    l = load_triples(write(tmp_path, "d.tsv", "a\tx\tb\na\tx\tb\n"))
    assert len(l.process("a").moves()) == 1


@pytest.mark.parametrize("body", ["a\tx\n", "a\tx\tb\tweird\n", "a\t\tb\n",
                                  "a\tx\tb\tin\na\tx\tc\tout\n"])
def test_load_malformed_reports_line(tmp_path, body):
    path = write(tmp_path, "bad.tsv", "# header\n" + body)
    code, _, err = run(["dot", "--triples", path, "--root", "a"])
    assert code == EXIT_INPUT
    assert ":2:" in err or ":3:" in err
