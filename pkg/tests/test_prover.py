import pytest

from streamprod.prover import invoke_external_prover
from streamprod.strategy import Outcome, check_productivity
from stubs import prover_command
from conftest import load


@pytest.mark.parametrize(
    "kind, outcome",
    [("yes", "yes"), ("no", "no"), ("maybe", "maybe"), ("garbage", "error"), ("crash", "error")],
)
def test_protocol(tmp_path, kind, outcome):
    ans = invoke_external_prover(prover_command(tmp_path, kind), "(RULES)\n", timeout=20)
    assert ans.outcome == outcome


def test_timeout(tmp_path):
    ans = invoke_external_prover(prover_command(tmp_path, "timeout"), "(RULES)\n", timeout=0.5)
    assert ans.outcome == "error" and "timeout" in ans.detail


def test_problem_file_is_passed(tmp_path):
    ans = invoke_external_prover(prover_command(tmp_path, "echo"), "(STRATEGY OUTERMOST)\n", timeout=20)
    assert ans.outcome == "yes"


def test_missing_program():
    ans = invoke_external_prover("/nonexistent/prover {}", "", timeout=5)
    assert ans.outcome == "error"


def test_placeholder_required():
    with pytest.raises(ValueError):
        invoke_external_prover("prover --input", "", timeout=5)


@pytest.mark.parametrize(
    "kind, outcome",
    [("yes", Outcome.PRODUCTIVE), ("no", Outcome.BOUNDED_PRODUCTIVE),
     ("maybe", Outcome.BOUNDED_PRODUCTIVE), ("timeout", Outcome.BOUNDED_PRODUCTIVE)],
)
def test_verdict_per_prover_answer(tmp_path, kind, outcome):
    cmd = prover_command(tmp_path, kind)
    v = check_productivity(load("fc"), prover=lambda p: invoke_external_prover(cmd, p, timeout=1))
    assert v.outcome is outcome
