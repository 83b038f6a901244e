import json

import pytest
from click.testing import CliRunner

from main import cli

from tests.conftest import ROOT

CORPUS = ROOT / "corpus"


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner(mix_stderr=False)


class TestDemo:
    def test_acn(self, runner):
        result = runner.invoke(cli, ["demo", "acn", "--n", "3"])
        assert result.exit_code == 0, result.stderr
        assert "f(3) = 3" in result.output
        assert "oracle wit(H 3) = 3" in result.output

    def test_dc_small_step(self, runner):
        result = runner.invoke(cli, ["demo", "dc", "--n", "2", "--x0", "4", "--machine", "small"])
        assert result.exit_code == 0, result.stderr
        assert "f(2) = 6" in result.output

    def test_json(self, runner):
        result = runner.invoke(cli, ["demo", "acn", "--n", "1", "--json"])
        report = json.loads(result.output)
        assert report["value"] == 1
        assert report["program"] == "acn"

    def test_negative_index_is_rejected(self, runner):
        result = runner.invoke(cli, ["demo", "acn", "--n", "-1"])
        assert result.exit_code == 2


class TestFiles:
    @pytest.mark.parametrize("name", ["ac_n.dlpaw", "dc.dlpaw", "basics.dlpaw"])
    def test_check(self, runner, name):
        result = runner.invoke(cli, ["check", str(CORPUS / name)])
        assert result.exit_code == 0, result.stderr

    def test_check_json(self, runner):
        result = runner.invoke(cli, ["check", "--json", str(CORPUS / "basics.dlpaw")])
        report = json.loads(result.output)
        assert all(d["status"] == "ok" for d in report["definitions"])

    def test_run(self, runner):
        result = runner.invoke(cli, ["run", str(CORPUS / "basics.dlpaw")])
        assert result.exit_code == 0, result.stderr
        assert result.output.count("normal after") == 7

    def test_run_writes_trace(self, runner, tmp_path):
        trace = tmp_path / "trace.jsonl"
        result = runner.invoke(cli, ["run", "--machine", "small", "--trace", str(trace), str(CORPUS / "basics.dlpaw")])
        assert result.exit_code == 0, result.stderr
        records = [json.loads(line) for line in trace.read_text().splitlines()]
        assert records and all("rule" in r and "focus" in r for r in records)

    def test_fuel_exhaustion_fails(self, runner):
        result = runner.invoke(cli, ["run", "--fuel", "1", str(CORPUS / "basics.dlpaw")])
        assert result.exit_code == 1
        assert "fuel_exhausted" in result.output

    def test_require_typed(self, runner, tmp_path):
        path = tmp_path / "bad.dlpaw"
        path.write_text("def bad : 0 = 1 := refl\nrun <bad | alpha>\n")
        assert runner.invoke(cli, ["run", str(path)]).exit_code == 0
        result = runner.invoke(cli, ["run", "--require-typed", str(path)])
        assert result.exit_code == 1
        assert "bad" in result.stderr

    def test_parse_error(self, runner, tmp_path):
        path = tmp_path / "broken.dlpaw"
        path.write_text("run <refl | \n")
        result = runner.invoke(cli, ["run", str(path)])
        assert result.exit_code == 1
        assert "error" in result.stderr

    def test_expand(self, runner):
        result = runner.invoke(cli, ["expand", str(CORPUS / "basics.dlpaw")])
        assert result.exit_code == 0, result.stderr
        assert "def swap :=" in result.output
        assert "let" not in result.output

    def test_agree(self, runner):
        result = runner.invoke(cli, ["agree", str(CORPUS / "basics.dlpaw")])
        assert result.exit_code == 0, result.output
        assert "DISAGREE" not in result.output


def test_suite_command(runner, tmp_path):
    result = runner.invoke(cli, ["suite", "--corpus", str(tmp_path), "--fuzz", "5", "--json"])
    report = json.loads(result.output)
    assert report["ok"], report["failures"]
    assert result.exit_code == 0
