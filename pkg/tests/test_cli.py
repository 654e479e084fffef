import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from streamprod import fixtures
from streamprod.cli import main, split_terms
from streamprod.parser import parse_spec, parse_term
from streamprod.report import AnalysisReport, schema, trace_from_dict
from streamprod.streamspec import extend_with_overflow, validate
from stubs import prover_command

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def spec_file(tmp_path):
    def write(name, text=None):
        p = tmp_path / f"{name}.spec"
        p.write_text(fixtures.text(name) if text is None else text, encoding="utf-8")
        return str(p)

    return write


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, "--json", *argv)
    data = json.loads(out)
    jsonschema.validate(data, schema())
    return code, data


def test_validate(capsys, spec_file):
    code, out, _ = run(capsys, "validate", spec_file("morse"))
    assert code == 0 and "validation: pass" in out


def test_validate_raw_suggests_unfold(capsys, spec_file):
    code, out, _ = run(capsys, "validate", spec_file("fc_raw"))
    assert code == 3
    assert "unfolding required" in out and "streamprod unfold" in out


def test_validate_json(capsys, spec_file):
    code, data = run_json(capsys, "validate", spec_file("fc_raw"))
    assert code == 3
    assert data["validation"]["verdict"] == "fail"
    assert {v["requirement"] for v in data["validation"]["violations"]} == {"lhs-shape"}


def test_json_flag_after_subcommand(capsys, spec_file):
    code, out, _ = run(capsys, "validate", spec_file("fc"), "--json")
    assert code == 0 and json.loads(out)["validation"]["verdict"] == "pass"


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "validate", str(tmp_path / "nope.spec"))
    assert code == 3 and "cannot read" in err


def test_syntax_error(capsys, spec_file):
    code, _, err = run(capsys, "check", spec_file("bad", "0 : d\nc : s\nc = 0 : g(c)\n"))
    assert code == 3 and "line 3" in err


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 3


def test_unfold(capsys, spec_file, tmp_path):
    out_path = tmp_path / "out.spec"
    code, _, _ = run(capsys, "unfold", spec_file("alt_morse_raw"), "-o", str(out_path))
    assert code == 0
    spec = parse_spec(out_path.read_text(encoding="utf-8")).to_spec()
    assert validate(spec).passed
    assert "f1 : d s -> s" in out_path.read_text(encoding="utf-8")


def test_unfold_to_stdout(capsys, spec_file):
    code, out, _ = run(capsys, "unfold", spec_file("fc_raw"))
    assert code == 0 and "f(x:sigma) -> f1(x, sigma)" in out


def test_eval(capsys, spec_file):
    code, out, _ = run(capsys, "eval", spec_file("fc_raw"), "--term", "f(c)", "-n", "10")
    assert code == 0
    assert out.strip() == "f(c) = " + " : ".join(["1"] * 10 + ["..."])


def test_eval_json(capsys, spec_file):
    code, data = run_json(capsys, "eval", spec_file("alt_morse"), "--term", "morse", "-n", "8")
    assert code == 0
    assert data["certificate"]["prefixes"] == {"morse": list("01101001")}
    assert data["verdict"]["display"] == "BOUNDED_PRODUCTIVE(8)"


def test_eval_failure(capsys, spec_file):
    code, out, _ = run(capsys, "eval", spec_file("cycle"), "--term", "f(c)", "-n", "3")
    assert code == 2 and "not produced" in out


def test_eval_rejects_open_term(capsys, spec_file):
    code, _, err = run(capsys, "eval", spec_file("fc"), "--term", "f(sigma)")
    assert code == 3 and "not ground" in err


def test_check_not_productive(capsys, spec_file):
    code, data = run_json(capsys, "check", spec_file("topterm"))
    assert code == 1
    assert data["certificate"]["kind"] == "consUnreachable"


def test_check_cycle_trace_replays(capsys, spec_file):
    path = spec_file("cycle")
    code, data = run_json(capsys, "check", path, "--roots", "f(c)")
    assert code == 1
    cert = data["certificate"]
    assert cert["kind"] == "cycle" and cert["cycle"]["length"] == 2
    spec = fixtures.spec("cycle")
    trs = extend_with_overflow(spec)
    (trace,) = data["traces"]
    replayed = trace_from_dict(trs, trace, lambda s: parse_term(s, spec))
    assert len(replayed) == len(trace["steps"])


def test_check_bounded(capsys, spec_file):
    code, out, _ = run(capsys, "check", spec_file("tailc"), "--roots", "tail(c), c", "--prefix", "5")
    assert code == 2 and "BOUNDED_PRODUCTIVE(5)" in out


def test_check_all_small(capsys, spec_file):
    code, data = run_json(capsys, "check", spec_file("fc"), "--all-small", "3")
    assert code == 2
    assert set(data["certificate"]["prefixes"]) == {"c", "f(c)", "f(f(c))", "0:c", "1:c", "g(0, c)", "g(1, c)"}


def test_check_with_prover(capsys, spec_file, tmp_path):
    code, out, _ = run(capsys, "check", spec_file("alt_morse_raw"), "--prover", prover_command(tmp_path, "yes"))
    assert code == 0 and "PRODUCTIVE" in out


def test_check_prover_needs_placeholder(capsys, spec_file):
    code, _, err = run(capsys, "check", spec_file("fc"), "--prover", "true")
    assert code == 3 and "placeholder" in err


def test_export(capsys, spec_file, tmp_path):
    out_path = tmp_path / "alt.tpdb"
    code, _, _ = run(capsys, "export", spec_file("alt_morse"), "-o", str(out_path))
    assert code == 0
    assert out_path.read_text(encoding="utf-8") == (GOLDEN / "alt_morse_extended.tpdb").read_text(encoding="utf-8")


def test_report_round_trip(capsys, spec_file):
    _, data = run_json(capsys, "check", spec_file("fc"), "--roots", "f(c)")
    rep = AnalysisReport.from_dict(data)
    assert json.loads(rep.to_json()) == data


def test_split_terms():
    assert split_terms("f(c), zip(a, b) ,c") == ["f(c)", "zip(a, b)", "c"]


def test_module_entry_point(spec_file):
    proc = subprocess.run(
        [sys.executable, "-m", "streamprod", "validate", spec_file("fc")],
        capture_output=True,
        text=True,
        timeout=60,
    )
    assert proc.returncode == 0 and "pass" in proc.stdout
