"""Tests for the command-line interface."""

import json
import sys

import pytest
from loguru import logger
from typer.testing import CliRunner

from hforms.cli import OutputFormat, app, parse_range, render, table_row
from hforms.config import SearchConfig
from hforms.errors import FormSpecError
from hforms.gf import make_field
from hforms.verify.golden_models import GoldenEntry, GoldenReport, GoldenStatus


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture(autouse=True)
def restore_log_sink():
    """The CLI callback points loguru at the runner's captured stderr."""
    yield
    logger.remove()
    logger.add(sys.stderr)


def run_json(runner, args):
    result = runner.invoke(app, args)
    assert result.exit_code == 0, result.output
    return json.loads(result.stdout)


class TestInvariantCommands:
    """Test level, udiag, waring and orzech."""

    def test_level(self, runner):
        data = run_json(runner, ["level", "--p", "29", "--d", "4"])
        assert data["s"] == 3
        assert data["field"] == "F_29"
        assert len(data["witness"]) == 3

    def test_udiag_finite(self, runner):
        data = run_json(runner, ["udiag", "--p", "7", "--d", "6"])
        assert data["u_diag"] == 6
        assert data["bound_used"] == 6

    def test_udiag_threshold(self, runner):
        data = run_json(runner, ["udiag", "--p", "5", "--d", "4", "--threshold"])
        assert data["universality_threshold"] == 4

    def test_udiag_padic(self, runner):
        data = run_json(runner, ["udiag", "--over", "padic", "--p", "5", "--d", "4"])
        assert data["u_diag"] == 16
        assert data["details"]["gamma_quotient"] == 4

    def test_udiag_closed(self, runner):
        data = run_json(runner, ["udiag", "--over", "closed", "--layers", "2", "--d", "3"])
        assert data["u_diag"] == 9

    def test_udiag_wild(self, runner):
        result = runner.invoke(app, ["udiag", "--over", "padic", "--p", "2", "--d", "4"])
        assert result.exit_code == 1
        assert "error" in json.loads(result.stdout)

    def test_budget_exhausted(self, runner):
        result = runner.invoke(app, ["--budget-evals", "1", "udiag", "--p", "7", "--d", "6"])
        assert result.exit_code == 2
        assert '"budget_exhausted": true' in result.stdout

    def test_waring(self, runner):
        data = run_json(runner, ["waring", "--p", "7", "--d", "3"])
        assert data["waring"] == 3
        assert data["closure_is_field"] is True

    def test_orzech(self, runner):
        data = run_json(runner, ["orzech", "--p", "11", "--d", "5"])
        assert data["found"] is True
        assert data["agrees"] is True

    def test_not_prime(self, runner):
        result = runner.invoke(app, ["level", "--p", "9", "--d", "2"])
        assert result.exit_code == 1

    @pytest.mark.parametrize("command", ["udiag", "bounds"])
    def test_padic_residue_field_respects_table_budget(self, runner, mocker, command):
        """Test that p-adic commands build their residue field under the configured table budget."""
        mocker.patch("hforms.cli.get_config", return_value=SearchConfig(table_budget=16))
        result = runner.invoke(app, [command, "--over", "padic", "--p", "17", "--d", "3"])
        assert result.exit_code == 1
        assert "exceeds the table budget of 16" in json.loads(result.stdout)["error"]

    def test_padic_command_respects_table_budget(self, runner, mocker):
        mocker.patch("hforms.cli.get_config", return_value=SearchConfig(table_budget=16))
        result = runner.invoke(app, ["padic", "--p", "17", "--d", "3", "--coeffs", "1@0,2@1"])
        assert result.exit_code == 1

    def test_table_respects_table_budget(self, runner, mocker):
        mocker.patch("hforms.cli.get_config", return_value=SearchConfig(table_budget=16))
        result = runner.invoke(app, ["table", "--d", "2", "--q-range", "13..17", "--columns", "gcd"])
        assert result.exit_code == 1
        assert "table budget of 16" in result.stdout


class TestIsotropyCommands:
    """Test isotropy and padic."""

    def test_diagonal(self, runner):
        data = run_json(runner, ["isotropy", "--p", "5", "--d", "2", "--coeffs", "1,1"])
        assert data["status"] == "isotropic"
        assert data["witness"] == [1, 2]

    def test_tagged_degree(self, runner):
        data = run_json(runner, ["isotropy", "--p", "3", "--coeffs", "d:2 diag:1,1"])
        assert data["isotropic"] is False

    def test_poly(self, runner):
        data = run_json(runner, ["isotropy", "--p", "2", "--poly", "x1^2 + x1*x2 + x2^2"])
        assert data["status"] == "anisotropic"
        assert data["d"] == 2

    def test_undecided_exit_code(self, runner):
        result = runner.invoke(
            app, ["--budget-evals", "5", "isotropy", "--p", "7", "--d", "3", "--coeffs", "1,2,3"]
        )
        assert result.exit_code == 2
        assert '"status": "undecided"' in result.stdout

    def test_both_inputs(self, runner):
        result = runner.invoke(app, ["isotropy", "--p", "5", "--d", "2", "--coeffs", "1,1", "--poly", "x1^2"])
        assert result.exit_code == 1

    def test_missing_degree(self, runner):
        result = runner.invoke(app, ["isotropy", "--p", "5", "--coeffs", "1,1"])
        assert result.exit_code == 1

    def test_padic(self, runner):
        data = run_json(
            runner, ["padic", "--p", "3", "--d", "2", "--coeffs", "1@0,1@0,1@1,1@1", "--oracle"]
        )
        assert data["isotropic"] is False
        assert data["oracle_isotropic"] is False
        assert data["residue_forms"] == {"0": "<1, 1>", "1": "<1, 1>"}

    def test_padic_negative_unit(self, runner):
        data = run_json(runner, ["padic", "--p", "5", "--d", "2", "--coeffs", "1@0,-1@2"])
        assert data["isotropic"] is True
        assert data["exact_witness"] is False

    def test_padic_vanishing_unit(self, runner):
        result = runner.invoke(app, ["padic", "--p", "5", "--d", "2", "--coeffs", "1@0,5@1"])
        assert result.exit_code == 1

    def test_laurent_tower(self, runner):
        data = run_json(
            runner, ["padic", "--p", "3", "--d", "2", "--laurent", "--coeffs", "1@(0,0),1@(0,1),1@(1,0),1@(1,1)"]
        )
        assert data["field"] == "F_3((t1))((t2))"
        assert data["isotropic"] is False

    def test_padic_wild(self, runner):
        result = runner.invoke(app, ["padic", "--p", "2", "--d", "2", "--coeffs", "1@0,1@0"])
        assert result.exit_code == 1


class TestBoundsCommand:
    """Test the bound table."""

    def test_json(self, runner):
        data = run_json(runner, ["bounds", "--over", "padic", "--p", "5", "--d", "4"])
        assert data["tightest"] == "kneser"
        names = [e["name"] for e in data["entries"]]
        assert "unit_group" in names

    def test_csv(self, runner):
        result = runner.invoke(app, ["--format", "csv", "bounds", "--over", "finite", "--p", "17", "--d", "4"])
        assert result.exit_code == 0
        lines = result.stdout.strip().splitlines()
        assert lines[0].startswith("field,d,name,formula,value")
        assert any(line.startswith("F_17,4,orzech") for line in lines)


class TestTableCommand:
    """Test the invariant table."""

    def test_csv(self, runner):
        result = runner.invoke(app, ["--format", "csv", "table", "--d", "4", "--q-range", "5..7"])
        assert result.exit_code == 0
        assert result.stdout.strip().splitlines() == [
            "q,d,gcd,s_d,u_diag,waring,kneser_bound",
            "5,4,4,4,4,4,4",
            "7,4,2,2,2,2,2",
        ]

    def test_columns(self, runner):
        data = run_json(runner, ["table", "--d", "2..3", "--q-range", "3..3", "--columns", "q,d,u_diag"])
        assert data == [{"q": 3, "d": 2, "u_diag": 2}, {"q": 3, "d": 3, "u_diag": 1}]

    def test_unknown_column(self, runner):
        result = runner.invoke(app, ["table", "--d", "4", "--columns", "q,rank"])
        assert result.exit_code == 1

    def test_row_matches_single_queries(self):
        """Test that a table cell reports what level and udiag report."""
        row = table_row(make_field(29), 4, SearchConfig())
        assert row["s_d"] == 3
        assert row["u_diag"] in (3, 4)
        assert row["kneser_bound"] == 4


class TestConstructCommand:
    """Test construct RECIPE."""

    def test_norm_form(self, runner):
        data = run_json(runner, ["construct", "norm-form", "--p", "2", "--d", "3"])
        assert data["dim"] == 3
        assert data["certificate"]["status"] == "anisotropic"

    def test_prime_lift_norm(self, runner):
        data = run_json(runner, ["construct", "prime-lift", "--p", "2", "--d", "3", "--norm"])
        assert data["dim"] == 9

    def test_prime_lift_poly(self, runner):
        data = run_json(runner, ["construct", "prime-lift", "--p", "3", "--d", "2", "--poly", "x1^2 + x2^2"])
        assert data["dim"] == 4

    def test_tensor_lift_closed(self, runner):
        data = run_json(runner, ["construct", "tensor-lift", "--closed", "--d", "3", "--coeffs", "1"])
        assert data["dim"] == 3

    def test_iterated(self, runner):
        data = run_json(runner, ["construct", "iterated-laurent", "--closed", "--d", "2", "--n", "3"])
        assert data["dim"] == 8

    def test_layered(self, runner):
        data = run_json(runner, ["construct", "layered", "--p", "3", "--d", "2", "--blocks", "1,1; x1^2 + x2^2"])
        assert data["dim"] == 4
        assert data["certificate"]["status"] == "anisotropic"

    def test_power(self, runner):
        data = run_json(runner, ["construct", "power", "--p", "3", "--d", "2", "--coeffs", "1,1", "--m", "2"])
        assert data["d"] == 4

    def test_rejected(self, runner):
        result = runner.invoke(app, ["construct", "prime-lift", "--p", "5", "--d", "2", "--coeffs", "1,1"])
        assert result.exit_code == 1
        assert "rejected" in json.loads(result.stdout)["error"]

    def test_unknown(self, runner):
        result = runner.invoke(app, ["construct", "mystery", "--p", "3"])
        assert result.exit_code == 1


class TestVerifyCommand:
    """Test verify with a replaced golden manager."""

    def report(self, status):
        return GoldenReport(
            entries=[
                GoldenEntry(
                    description="level of F_5",
                    query="level --p 5 --d 4",
                    expected=4,
                    computed=4 if status == GoldenStatus.MATCH else 3,
                    provenance="stated: s_4(F_5) = 4",
                    status=status,
                )
            ]
        )

    def test_pass(self, runner, mocker):
        manager = mocker.patch("hforms.cli.GoldenManager")
        manager.return_value.run.return_value = self.report(GoldenStatus.MATCH)
        data = run_json(runner, ["verify", "--no-scan"])
        assert data["mismatches"] == 0
        manager.return_value.run.assert_called_once_with(include_scan=False)

    def test_mismatch(self, runner, mocker):
        manager = mocker.patch("hforms.cli.GoldenManager")
        manager.return_value.run.return_value = self.report(GoldenStatus.MISMATCH)
        result = runner.invoke(app, ["--format", "csv", "verify"])
        assert result.exit_code == 1
        assert "mismatch" in result.stdout


class TestOutput:
    """Test rendering and file output."""

    def test_output_file(self, runner, tmp_path):
        target = tmp_path / "out" / "level.json"
        result = runner.invoke(app, ["--output", str(target), "level", "--p", "5", "--d", "4"])
        assert result.exit_code == 0
        assert json.loads(target.read_text())["s"] == 4

    def test_render_csv_nested(self):
        text = render({"a": 1, "b": [1, 2], "c": None}, OutputFormat.CSV)
        assert text.splitlines() == ["a,b,c", '1,"[1,2]",']

    def test_parse_range(self):
        assert list(parse_range("3..5")) == [3, 4, 5]
        assert list(parse_range("7")) == [7]
        with pytest.raises(FormSpecError):
            parse_range("a..b")
