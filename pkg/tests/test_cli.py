import json
import shutil
import subprocess
import sys

import pytest

from helpers import PROGRAMS
from sdpi.cli import main


def sdpi(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_check_accepts_the_dependent_protocol(capsys):
    code, out, _ = sdpi(capsys, "check", PROGRAMS / "datadep.sdp")
    assert code == 0 and out.startswith("ok ") and "datadep.sdp: 5 declarations" in out


def test_check_rejects_the_flipped_protocol(capsys):
    code, out, err = sdpi(capsys, "check", PROGRAMS / "datadep_flipped.sdp")
    assert code == 1
    text = out + err
    assert "exists-R" in text and "datadep_flipped.sdp:9:11" in text


def test_run_prints_the_counter_trace(capsys):
    code, out, _ = sdpi(capsys, "run", PROGRAMS / "counter.sdp", "--main", "demo", "--seed", "7")
    assert code == 0
    lines = out.splitlines()
    assert "STEP 2: ValueComm x succ (succ z)" in lines
    assert "STEP 5: ValueComm x succ z" in lines
    assert lines[-1] == "-- quiescent after 8 steps"


def test_run_json(capsys):
    code, out, _ = sdpi(capsys, "run", PROGRAMS / "counter.sdp", "--main", "demo", "--json")
    records = [json.loads(line) for line in out.splitlines() if line.startswith("{")]
    assert code == 0 and [r["step"] for r in records] == list(range(1, len(records) + 1))
    assert [r["payload"] for r in records if r["kind"] == "ValueComm"] == ["succ (succ z)", "succ z"]


def test_run_a_closed_process_value(capsys, tmp_path):
    src = tmp_path / "value.sdp"
    src.write_text("def two : { |- c:Nat /\\ 1 } = { c <- send c <2>. end }\n")
    code, out, _ = sdpi(capsys, "run", src, "--main", "two")
    assert code == 0 and out.splitlines()[-1].startswith("-- quiescent")


def test_run_drains_the_simple_counter(capsys):
    code, out, _ = sdpi(capsys, "run", PROGRAMS / "simple_counter.sdp", "--main", "useSimple")
    assert code == 0 and "Choice x dec" in out and "ValueComm x succ z" in out


def test_run_budget(capsys):
    code, out, _ = sdpi(capsys, "run", PROGRAMS / "counter.sdp", "--main", "demo", "--max-steps", "2")
    assert code == 1 and "budget" in out


def test_run_unknown_main(capsys):
    code, _, err = sdpi(capsys, "run", PROGRAMS / "counter.sdp", "--main", "nope")
    assert code == 1 and "no declaration named nope" in err


def test_missing_file(capsys):
    code, _, err = sdpi(capsys, "check", PROGRAMS / "missing.sdp")
    assert code == 1 and err.startswith("error")


@pytest.mark.parametrize(
    "lhs, rhs, extra, verdict",
    [
        ("countDown [1]", "exists y:Nat. 1", [], "yes"),
        ("tt", "ff", [], "no"),
        ("natrecT Nat 30 z (n, r => succ r)", "30", ["--fuel", "3"], "undecided"),
        ("natrecT Nat 30 z (n, r => succ r)", "30", [], "yes"),
    ],
)
def test_eq(capsys, lhs, rhs, extra, verdict):
    code, out, _ = sdpi(capsys, "eq", PROGRAMS / "counter.sdp", lhs, rhs, *extra)
    assert code == 0 and out.strip() == verdict


def test_eq_on_declarations(capsys):
    code, out, _ = sdpi(capsys, "eq", PROGRAMS / "datadep.sdp", "Q", "Q")
    assert code == 0 and out.strip() == "yes"


def test_embed_prints_a_process_declaration(capsys):
    code, out, _ = sdpi(capsys, "embed", PROGRAMS / "embed_example.sdp", "--def", "example")
    assert code == 0 and out.startswith("proc example : { |- z:")
    assert "nu c. (recv c (x" in out


def test_embed_outside_the_fragment(capsys):
    code, _, err = sdpi(capsys, "embed", PROGRAMS / "counter.sdp", "--def", "counter")
    assert code == 1 and "outside embedding fragment" in err


def test_test_meta(capsys):
    code, out, _ = sdpi(capsys, "test-meta", "--suite", "equality-laws")
    assert code == 0 and out.splitlines()[1].split()[:3] == ["equality-laws", "10", "10"]
    code, out, _ = sdpi(capsys, "test-meta", "--suite", "subject-reduction-terms", "--iters", "5", "--json")
    assert code == 0 and json.loads(out)["iters"] == 5


@pytest.mark.parametrize("argv", [[], ["bogus"], ["run", "x.sdp"], ["test-meta", "--suite", "nope"]])
def test_usage_errors(capsys, argv):
    code, _, err = sdpi(capsys, *argv)
    assert code == 2 and "usage" in err


def test_console_script_is_bit_identical():
    exe = shutil.which("sdpi")
    cmd = [exe] if exe else [sys.executable, "-m", "sdpi.cli"]
    args = [*cmd, "run", str(PROGRAMS / "counter.sdp"), "--main", "demo", "--seed", "7"]
    one = subprocess.run(args, capture_output=True, check=True)
    two = subprocess.run(args, capture_output=True, check=True)
    assert one.stdout == two.stdout and one.stdout
