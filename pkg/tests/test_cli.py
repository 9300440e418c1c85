"""CLI subcommands, exit codes, and stream handling."""

from __future__ import annotations

import io
import json

import pytest

from coverdx import load_kb
from coverdx.cli import run_command


def run(argv, stdin_text=""):
    stdin = io.StringIO(stdin_text)
    stdout = io.StringIO()
    stderr = io.StringIO()
    code = run_command(argv, stdin=stdin, stdout=stdout, stderr=stderr)
    return code, stdout.getvalue(), stderr.getvalue()


class TestKbcheck:
    def test_clean_kb(self, kb3_path):
        code, out, err = run(["kbcheck", str(kb3_path)])
        assert code == 0
        assert "0 errors, 0 warnings" in out

    def test_broken_kb(self, tmp_path, kb3_json):
        doc = json.loads(kb3_json)
        doc["links"][0]["causal_strength"] = 1.3
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc))
        code, out, err = run(["kbcheck", str(bad)])
        assert code == 1
        assert "strength out of range" in out
        assert "1 errors, 0 warnings" in out

    def test_lenient_flag_downgrades_unknown_keys(self, tmp_path, kb3_json):
        doc = json.loads(kb3_json)
        doc["faults"][0]["color"] = "red"
        path = tmp_path / "extra.json"
        path.write_text(json.dumps(doc))
        assert run(["kbcheck", str(path)])[0] == 1
        code, out, _ = run(["kbcheck", str(path), "--lenient"])
        assert code == 0
        assert "0 errors, 1 warnings" in out

    def test_missing_file_is_a_domain_error(self):
        code, out, err = run(["kbcheck", "nope.json"])
        assert code == 1
        assert err.startswith("error:")


class TestDiagnose:
    def test_ranked_covers_for_two_symptoms(self, kb3_path):
        code, out, _ = run(
            ["diagnose", "--kb", str(kb3_path), "--present", "s1,s3", "--mode", "multiple"]
        )
        assert code == 0
        assert "{f1, f2}" in out.splitlines()[1]

    def test_json_format(self, kb3_path):
        code, out, _ = run(
            ["diagnose", "--kb", str(kb3_path), "--present", "s4", "--format", "json"]
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["explanations"][0]["faults"] == ["f3"]
        assert doc["concluded"] is True

    def test_unknown_symptom_id(self, kb3_path):
        code, _, err = run(["diagnose", "--kb", str(kb3_path), "--present", "s99"])
        assert code == 1
        assert "error:" in err and "s99" in err

    def test_usage_error_without_kb(self):
        code, _, err = run(["diagnose", "--present", "s1"])
        assert code == 2


class TestConsult:
    def test_full_session_to_conclusion(self, kb3_path):
        # keep answering "absent" until asked about something f3 explains;
        # then the present answer concludes on {f3}
        answers = []
        code, out, err = run(
            ["consult", "--kb", str(kb3_path), "--threshold", "0.9"],
            stdin_text="a\na\na\np\n" * 2,
        )
        assert code == 0
        assert "status:" in out
        assert "questions asked:" in out

    def test_quit_early(self, kb3_path):
        code, out, _ = run(["consult", "--kb", str(kb3_path)], stdin_text="q\n")
        assert code == 0
        assert "still-open" in out

    def test_eof_ends_gracefully(self, kb3_path):
        code, out, _ = run(["consult", "--kb", str(kb3_path)], stdin_text="")
        assert code == 0


class TestRulegen:
    def test_json_rules(self, kb3_path):
        code, out, _ = run(["rulegen", "--kb", str(kb3_path)])
        assert code == 0
        rules = json.loads(out)
        assert len(rules) == 3
        assert {r["consequent"] for r in rules} == {"f1", "f2", "f3"}

    def test_text_format(self, kb3_path):
        code, out, _ = run(["rulegen", "--kb", str(kb3_path), "--format", "text"])
        assert code == 0
        assert "{s1} => f1" in out
        assert "3 rules" in out


class TestCluster:
    def test_newick_output(self, kb3_path):
        code, out, _ = run(["cluster", "--kb", str(kb3_path)])
        assert code == 0
        assert out.strip() == "((f1:0.75,f2:0.75):0.25,f3:1);"

    def test_symptom_clustering_json(self, kb3_path):
        code, out, _ = run(
            ["cluster", "--kb", str(kb3_path), "--items", "symptoms", "--format", "json"]
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["leaves"] == ["s1", "s2", "s3", "s4"]
        assert len(doc["merges"]) == 3


class TestEstimate:
    @pytest.fixture
    def case_file(self, tmp_path):
        lines = ["case_id,faults,s1,s2,s3,s4"]
        lines += [f"c{i},f1,1,0,0,0" for i in range(9)]
        lines += ["c9,f1,0,0,0,0"]
        path = tmp_path / "cases.csv"
        path.write_text("\n".join(lines) + "\n")
        return path

    def test_estimate_to_stdout(self, kb3_path, case_file):
        code, out, err = run(["estimate", "--kb", str(kb3_path), "--cases", str(case_file)])
        assert code == 0
        kb = load_kb(out)
        assert kb.strength("f1", "s1") == pytest.approx(10 / 12)
        assert "no isolated support" in err

    def test_estimate_to_file(self, kb3_path, case_file, tmp_path):
        out_path = tmp_path / "estimated.json"
        code, out, _ = run(
            ["estimate", "--kb", str(kb3_path), "--cases", str(case_file), "--out", str(out_path)]
        )
        assert code == 0
        assert "cases: 10 total" in out
        assert load_kb(out_path.read_text()).strength("f1", "s1") == pytest.approx(10 / 12)


class TestServe:
    def test_env_var_overrides_kb_dir(self, monkeypatch, tmp_path):
        captured = {}

        def fake_serve(config):
            captured["config"] = config

        monkeypatch.setattr("coverdx.service.serve", fake_serve)
        monkeypatch.setenv("COVERDX_KB_DIR", str(tmp_path / "from-env"))
        code, out, _ = run(["serve", "--kb-dir", str(tmp_path / "from-flag"), "--port", "9001"])
        assert code == 0
        assert captured["config"].kb_dir == tmp_path / "from-env"
        assert captured["config"].port == 9001

    def test_flag_used_without_env(self, monkeypatch, tmp_path):
        captured = {}
        monkeypatch.setattr("coverdx.service.serve", lambda config: captured.update(config=config))
        monkeypatch.delenv("COVERDX_KB_DIR", raising=False)
        code, _, _ = run(["serve", "--kb-dir", str(tmp_path / "flagged")])
        assert code == 0
        assert captured["config"].kb_dir == tmp_path / "flagged"


class TestUsage:
    def test_no_subcommand(self):
        code, _, err = run([])
        assert code == 2

    def test_unknown_subcommand(self):
        code, _, err = run(["frobnicate"])
        assert code == 2

    def test_help_exits_zero(self):
        code, out, _ = run(["--help"])
        assert code == 0
        assert "kbcheck" in out

    def test_version(self):
        code, out, _ = run(["--version"])
        assert code == 0
        assert "coverdx" in out
