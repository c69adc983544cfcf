#!/usr/bin/env python3
"""End-to-end checks of the command line tool. Usage: test_cli.py <path-to-stc>."""

import csv
import math
import os
import subprocess
import sys
import tempfile

CLI = sys.argv[1]
failures = []


def run(*args, expect=0):
    proc = subprocess.run([CLI, *args], capture_output=True, text=True)
    if expect is not None and proc.returncode != expect:
        raise AssertionError(
            f"{' '.join(args)!r} exited {proc.returncode}, expected {expect}\n"
            f"stdout: {proc.stdout}\nstderr: {proc.stderr}"
        )
    return proc


def check(name, fn):
    try:
        fn()
        print(f"[ok] {name}")
    except AssertionError as e:
        failures.append(name)
        print(f"[FAIL] {name}: {e}")


def read(path):
    with open(path, "rb") as f:
        return f.read()


def parse_graph(text):
    lines = text.strip().splitlines()
    num_states = int(lines[0].split()[1])
    arcs = [tuple(line.split()) for line in lines[3:]]
    return num_states, arcs


def make_tiny_data(tmp, seed=5, p_drop="0.0", extra=()):
    out = os.path.join(tmp, f"data_{seed}_{p_drop.replace(',', '_')}")
    run(
        "make-data", "--vocab", "8", "--num-samples", "200",
        "--dev-samples", "40", "--len-min", "2", "--len-max", "5",
        "--frames-min", "1", "--frames-max", "2", "--noise", "0.1",
        "--seed", str(seed), "--p-drop", p_drop, "--out", out, *extra,
    )
    return out


def test_make_data_deterministic():
    with tempfile.TemporaryDirectory() as tmp:
        a = os.path.join(tmp, "a")
        b = os.path.join(tmp, "b")
        args = ["make-data", "--vocab", "6", "--num-samples", "50",
                "--p-drop", "0.5", "--seed", "1", "--out"]
        run(*args, a)
        run(*args, b)
        for name in ("train.corpus", "dev.corpus", "retention.csv"):
            assert read(os.path.join(a, name)) == read(os.path.join(b, name)), \
                f"{name} differs between identical runs"


def test_make_data_all_dropped():
    with tempfile.TemporaryDirectory() as tmp:
        proc = run("make-data", "--p-drop", "1.0", "--out",
                   os.path.join(tmp, "x"), expect=3)
        assert "pruned" in proc.stderr


def test_make_data_split_histogram():
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, "split")
        run("make-data", "--vocab", "10", "--num-samples", "1500",
            "--len-min", "30", "--len-max", "50", "--frames-min", "1",
            "--frames-max", "1", "--noise", "0", "--seed", "2",
            "--strategy", "per-sample-split", "--p-drop", "0.1,0.4,0.7",
            "--out", out)
        with open(os.path.join(out, "retention.csv")) as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 20
        counts = [int(r["count"]) for r in rows]

        def window(frac):
            b = int(frac * 20)
            return counts[b - 1] + counts[b] + counts[b + 1]

        assert window(0.30) > window(0.45), "no mode near 30% retention"
        assert window(0.60) > window(0.45), "no mode near 60% retention"
        assert window(0.90) > window(0.75), "no mode near 90% retention"


def test_inspect_stc_graph():
    out = run("inspect-graph", "--label", "a b c", "--kind", "stc",
              "--lambda", "-0.5").stdout
    num_states, arcs = parse_graph(out)
    assert num_states == 4, f"expected 4 states, got {num_states}"
    assert len(arcs) == 11, f"expected 11 arcs, got {len(arcs)}"
    self_loops = [a for a in arcs if a[0] == a[1]]
    assert len(self_loops) == 8
    penalized = [a for a in arcs if a[4] == "-0.5"]
    assert len(penalized) == 4, "every star arc carries the penalty"


def test_inspect_stc_no_stars_at_minus_inf():
    out = run("inspect-graph", "--label", "a b c", "--kind", "stc",
              "--lambda", "-inf").stdout
    num_states, arcs = parse_graph(out)
    assert num_states == 4
    assert len(arcs) == 7, "only blank self-loops and token arcs remain"
    selfless = run("inspect-graph", "--label", "a b c",
                   "--kind", "selfless-ctc").stdout
    assert out == selfless


def test_inspect_ctc_repeated_token():
    out = run("inspect-graph", "--label", "a a", "--kind", "ctc").stdout
    num_states, arcs = parse_graph(out)
    assert num_states == 5
    for a in arcs:
        assert int(a[1]) - int(a[0]) <= 1, "repeated tokens must not skip the blank"


def test_inspect_dot():
    out = run("inspect-graph", "--label", "a b", "--kind", "stc",
              "--lambda", "-0.25", "--dot").stdout
    assert "digraph" in out
    assert "doublecircle" in out
    assert "penwidth = 2" in out
    assert "<s>" in out


def test_train_eval_roundtrip():
    with tempfile.TemporaryDirectory() as tmp:
        data = make_tiny_data(tmp)
        rundir = os.path.join(tmp, "run")
        run("train", "--train", os.path.join(data, "train.corpus"),
            "--dev", os.path.join(data, "dev.corpus"), "--loss", "ctc",
            "--epochs", "3", "--lr", "0.5", "--seed", "3", "--out", rundir)
        with open(os.path.join(rundir, "metrics.csv")) as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 3
        assert rows[0]["split"] == "dev"
        assert float(rows[2]["ter"]) < float(rows[0]["ter"]) + 0.5
        assert os.path.exists(os.path.join(rundir, "checkpoint.txt"))
        assert os.path.exists(os.path.join(rundir, "config.txt"))

        out = run("eval", "--data", os.path.join(data, "dev.corpus"),
                  "--checkpoint", os.path.join(rundir, "checkpoint.txt")).stdout
        ter_line = [l for l in out.splitlines() if l.startswith("ter,")]
        assert ter_line, f"no ter in eval output: {out}"
        ter = float(ter_line[0].split(",")[1])
        assert 0.0 <= ter <= 1.0


def test_train_lambda_schedule():
    with tempfile.TemporaryDirectory() as tmp:
        data = make_tiny_data(tmp, seed=6, p_drop="0.4")
        rundir = os.path.join(tmp, "run_stc")
        run("train", "--train", os.path.join(data, "train.corpus"),
            "--loss", "stc", "--epochs", "1", "--p0", "0.5", "--p-max", "0.9",
            "--t-half", "100", "--seed", "3", "--out", rundir)
        with open(os.path.join(rundir, "metrics.csv")) as f:
            rows = list(csv.DictReader(f))
        # the first epoch logs lambda at step 0: exactly ln(p0)
        assert float(rows[0]["lambda"]) == math.log(0.5)


def test_train_resume_bit_for_bit():
    with tempfile.TemporaryDirectory() as tmp:
        data = make_tiny_data(tmp, seed=7, p_drop="0.3")
        train_args = ["--train", os.path.join(data, "train.corpus"),
                      "--dev", os.path.join(data, "dev.corpus"),
                      "--loss", "stc", "--lr", "0.4", "--seed", "11"]
        full = os.path.join(tmp, "full")
        run("train", *train_args, "--epochs", "2", "--out", full)
        part = os.path.join(tmp, "part")
        run("train", *train_args, "--epochs", "1", "--out", part)
        run("train", *train_args, "--epochs", "2", "--out", part,
            "--resume", os.path.join(part, "checkpoint.txt"))

        def rows_without_seconds(path):
            with open(os.path.join(path, "metrics.csv")) as f:
                return [line.rsplit(",", 1)[0] for line in f.read().splitlines()
                        if line and not line.startswith("epoch,")]

        assert rows_without_seconds(full) == rows_without_seconds(part)
        assert read(os.path.join(full, "checkpoint.txt")) == \
            read(os.path.join(part, "checkpoint.txt"))


def test_bench_report():
    out = run("bench", "--epochs", "3", "--num-samples", "40",
              "--big-vocab", "1000").stdout
    fields = dict(line.split(",") for line in out.strip().splitlines()[1:])
    assert set(fields) == {"ctc_epoch_seconds", "stc_epoch_seconds",
                           "stc_over_ctc", "stc_full_alphabet_seconds",
                           "stc_reduced_alphabet_seconds", "reduced_over_full"}
    assert float(fields["stc_over_ctc"]) > 0
    assert float(fields["reduced_over_full"]) < 1.0, \
        "reduced-alphabet mode should be faster at vocab 1000"


def test_config_errors():
    run("make-data", "--strategy", "bogus", "--out", "/tmp/x", expect=2)
    run("inspect-graph", "--label", "a", "--kind", "bogus", expect=2)
    run("train", "--train", "/nonexistent.corpus", expect=3)


check("make-data is deterministic", test_make_data_deterministic)
check("make-data rejects p-drop 1.0", test_make_data_all_dropped)
check("per-sample split histogram is trimodal", test_make_data_split_histogram)
check("inspect-graph stc topology", test_inspect_stc_graph)
check("inspect-graph stc without stars", test_inspect_stc_no_stars_at_minus_inf)
check("inspect-graph ctc mandatory blank", test_inspect_ctc_repeated_token)
check("inspect-graph dot output", test_inspect_dot)
check("train + eval round trip", test_train_eval_roundtrip)
check("train logs the penalty schedule", test_train_lambda_schedule)
check("resume reproduces metrics bit for bit", test_train_resume_bit_for_bit)
check("bench reports both comparisons", test_bench_report)
check("config errors use distinct exit codes", test_config_errors)

if failures:
    print(f"{len(failures)} CLI checks failed: {failures}")
    sys.exit(1)
print("all CLI checks passed")
