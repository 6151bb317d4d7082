import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from cayleytrap.cli import run_cli
from cayleytrap.groups import FreeAbelian, HeisenbergModP
from cayleytrap.report import REPORT_FIELDS, emit_report
from cayleytrap.scenarios import drifter, random_collective, single_collective
from cayleytrap.simulator import certify

VALID = Path(__file__).parent / "corpus" / "valid"


def run(*argv):
    out = io.StringIO()
    code = run_cli([str(a) for a in argv], out)
    return code, out.getvalue()


@pytest.fixture
def spec(tmp_path):
    def write(text, name="c.spec"):
        p = tmp_path / name
        p.write_text(text)
        return p
    return write


DRIFT = "group free-abelian 1\nautomaton d states 1\nrule 0 -> move s1 next 0\ncollective d @ e\n"


class TestBounds:
    def test_example(self):
        code, out = run("bounds", "--m", 2, "--qa", 1, "--exponent", 2)
        assert code == 0
        assert "H_2=6" in out and "O_2=4102" in out

    def test_digit_summary(self):
        code, out = run("bounds", "--m", 2, "--qa", 3, "--exponent", 3)
        assert code == 0
        assert "digits]" in out.splitlines()[1]

    def test_over_cap(self):
        assert run("bounds", "--m", 3, "--qa", 2, "--exponent", 3)[0] == 2

    def test_bad_params(self):
        assert run("bounds", "--m", 0, "--qa", 1, "--exponent", 2)[0] == 1


class TestCertify:
    def test_drift(self, spec):
        code, out = run("certify", spec(DRIFT), "--budget", 100)
        assert code == 0
        assert "verdict: DriftUnbounded" in out

    def test_json(self, spec):
        code, out = run("certify", spec(DRIFT), "--budget", 100, "--format", "json")
        d = json.loads(out)
        assert code == 0
        assert tuple(d) == REPORT_FIELDS
        assert d["T_pair"] is None
        assert d["holonomy"] == "(1)" and d["holonomy_order"] == "infinite"

    def test_budget_exhausted(self):
        code, out = run("certify", VALID / "21_line_explorer.spec", "--budget", 1000)
        assert code == 2
        assert "BudgetExhausted" in out

    def test_all_starts(self):
        code, out = run("certify", VALID / "07_two_members_meeting.spec", "--budget", 1000, "--all-starts")
        assert code == 0
        assert out.strip().splitlines()[-1] == "starts: 27 (FiniteExploration=27)"

    def test_all_starts_infinite(self, spec):
        assert run("certify", spec(DRIFT), "--budget", 10, "--all-starts")[0] == 2

    def test_golden_stability(self):
        a = run("certify", VALID / "14_three_members.spec", "--budget", 1000, "--format", "json")
        b = run("certify", VALID / "14_three_members.spec", "--budget", 1000, "--format", "json")
        assert a == b


class TestSimulate:
    def test_summary(self, spec):
        code, out = run("simulate", spec(DRIFT), "--steps", 5)
        assert code == 0
        assert "visited vertices: 6" in out

    def test_trace_file(self, spec, tmp_path):
        t = tmp_path / "trace.txt"
        code, _ = run("simulate", spec(DRIFT), "--steps", 2, "--trace", t)
        assert code == 0
        assert t.read_text() == (
            "t=0 q=[0] v=[(0)] F=[1]\nt=1 q=[0] v=[(1)] F=[1]\nt=2 q=[0] v=[(2)] F=[1]\n"
        )

    def test_resource_cap(self, spec):
        assert run("simulate", spec(DRIFT), "--steps", 101, "--max-steps", 100)[0] == 2

    def test_parse_error(self, spec, capsys):
        code, _ = run("simulate", spec("group nope\n"), "--steps", 1)
        assert code == 1
        assert "1:7" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert run("simulate", tmp_path / "none.spec", "--steps", 1)[0] == 1


class TestVerify:
    def test_exponent(self):
        code, out = run("verify", "exponent", VALID / "01_minimal_stayer.spec")
        assert code == 0 and "27 elements" in out

    def test_exponent_mismatch(self):
        code, out = run("verify", "exponent", VALID / "05_comments_blank_lines.spec", "--exponent", 2)
        assert code == 3 and "counterexample" in out

    def test_exponent_needs_value(self):
        assert run("verify", "exponent", VALID / "02_drifter_z.spec")[0] == 1

    def test_single(self):
        code, out = run("verify", "single", VALID / "18_unreached_state.spec")
        assert code == 0 and out.strip().endswith("agree")

    def test_single_on_free_group(self):
        assert run("verify", "single", VALID / "11_free_group.spec")[0] == 0

    def test_orbit(self):
        code, out = run("verify", "orbit", VALID / "14_three_members.spec")
        assert code == 0 and "agree" in out

    def test_orbit_needs_finite(self):
        assert run("verify", "orbit", VALID / "02_drifter_z.spec")[0] == 1


class TestScenario:
    def test_line_explorer_round_trip(self, tmp_path):
        p = tmp_path / "le.spec"
        assert run("scenario", "line-explorer", "--out", p)[0] == 0
        code, out = run("certify", p, "--budget", 500)
        assert code == 2

    def test_drifter_certify(self):
        code, out = run("scenario", "drifter", "--certify")
        assert code == 0 and "DriftUnbounded" in out

    def test_looper(self):
        code, out = run("scenario", "looper", "--group", "free-abelian 2", "--word", "s1*s2",
                        "--certify", "--format", "json")
        assert json.loads(out)["holonomy"] == "(1,1)"

    def test_looper_needs_word(self):
        assert run("scenario", "looper")[0] == 1

    def test_random_reproducible(self):
        a = run("scenario", "random", "--seed", 4, "--m", 3)
        b = run("scenario", "random", "--seed", 4, "--m", 3)
        assert a == b and a[0] == 0
        assert a[1].startswith("group heisenberg 3\n")

    def test_bad_random_params(self, capsys):
        assert run("scenario", "random", "--m", 0)[0] == 1
        assert "usage error" in capsys.readouterr().err

    def test_bad_generator(self):
        assert run("scenario", "drifter", "--gen", 3, "--group", "heisenberg 3")[0] == 1


class TestUsage:
    def test_no_command(self):
        assert run()[0] == 1

    def test_unknown_flag(self):
        assert run("bounds", "--m", 1, "--qa", 1, "--exponent", 1, "--bogus")[0] == 1

    def test_entry_point(self):
        r = subprocess.run([sys.executable, "-m", "cayleytrap.cli", "bounds", "--m", "1", "--qa", "2",
                            "--exponent", "3"], capture_output=True, text=True)
        assert r.returncode == 0
        assert r.stdout == "H_1=1 O_1=2\n"


class TestReport:
    def test_round_trip(self):
        H3 = HeisenbergModP(3)
        for seed in range(20):
            r = certify(H3, random_collective(seed, 2, 3, H3))
            d = json.loads(emit_report(r, H3, "json"))
            assert d["verdict"] == "FiniteExploration"
            assert (d["U"], d["T_state"], d["T_quotient"], d["T_pair"]) == (
                r.U, r.T_state, r.T_quotient, r.T_pair)
            assert d["holonomy_order"] == r.holonomy_order
            assert (d["visited_count"], d["steps_used"]) == (r.visited_count, r.steps_used)
            assert all(isinstance(d[k], int) for k in REPORT_FIELDS if k not in ("verdict", "holonomy"))

    def test_drift_null(self):
        Z = FreeAbelian(1)
        d = json.loads(emit_report(certify(Z, single_collective(Z, drifter(1))), Z, "json"))
        assert d["T_pair"] is None

    def test_text(self):
        H3 = HeisenbergModP(3)
        text = emit_report(certify(H3, single_collective(H3, drifter(1))), H3)
        assert text.splitlines()[0] == "verdict: FiniteExploration"
        assert "visited vertices: 3" in text

    def test_unknown_format(self):
        Z = FreeAbelian(1)
        with pytest.raises(ValueError):
            emit_report(certify(Z, single_collective(Z, drifter(1))), Z, "xml")
