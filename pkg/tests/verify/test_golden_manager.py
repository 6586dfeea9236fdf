"""Unit tests for GoldenManager."""

import pytest

from hforms.config import SearchConfig
from hforms.errors import HypothesisError, SearchBudgetExceeded
from hforms.models import OrzechCheck
from hforms.verify.golden_manager import GoldenCheck, GoldenManager, default_checks
from hforms.verify.golden_models import GoldenStatus


def constant(value):
    return lambda config: value


class TestGoldenCheck:
    """Test expected values and admissible sets."""

    def test_single_value(self):
        check = GoldenCheck("c", "q", "stated", constant(3), 3)
        assert check.accepts(3)
        assert not check.accepts(4)
        assert check.expected_json == 3

    def test_admissible_set(self):
        check = GoldenCheck("c", "q", "stated", constant(3), {4, 3})
        assert check.accepts(4)
        assert not check.accepts(5)
        assert check.expected_json == [3, 4]


class TestGoldenManager:
    """Test single checks, the Orzech scan and full runs."""

    @pytest.fixture
    def manager(self):
        return GoldenManager(config=SearchConfig(), checks=[])

    def test_default_checks_have_provenance(self):
        checks = default_checks()
        assert checks
        assert all(check.provenance for check in checks)
        assert len({check.description for check in checks}) == len(checks)

    def test_match(self, manager):
        e = manager.run_check(GoldenCheck("level", "level --p 5 --d 4", "stated: 4", constant(4), 4))
        assert e.status == GoldenStatus.MATCH
        assert e.computed == 4

    def test_mismatch(self, manager):
        e = manager.run_check(GoldenCheck("level", "level --p 5 --d 4", "stated: 4", constant(3), 4))
        assert e.status == GoldenStatus.MISMATCH
        assert e.expected == 4

    def test_discrepancy_noted(self, manager):
        check = GoldenCheck("u_diag", "udiag", "stated: 8", constant(8), 8, discrepancy="wrong field named")
        e = manager.run_check(check)
        assert e.status == GoldenStatus.DISCREPANCY_NOTED
        assert e.note == "wrong field named"

    def test_discrepancy_that_does_not_reproduce(self, manager):
        check = GoldenCheck("u_diag", "udiag", "stated: 8", constant(16), 8, discrepancy="wrong field named")
        assert manager.run_check(check).status == GoldenStatus.MISMATCH

    def test_error_becomes_mismatch(self, manager):
        def compute(config):
            raise HypothesisError("residue field is not finite")

        e = manager.run_check(GoldenCheck("bad", "bounds", "stated", compute, 1))
        assert e.status == GoldenStatus.MISMATCH
        assert e.computed is None
        assert e.note == "residue field is not finite"

    def test_budget_propagates(self, manager):
        def compute(config):
            raise SearchBudgetExceeded("u_diag search", 10)

        with pytest.raises(SearchBudgetExceeded):
            manager.run_check(GoldenCheck("slow", "udiag", "stated", compute, 1))

    def test_config_passed_through(self):
        config = SearchConfig(budget_evals=123)
        manager = GoldenManager(config=config, checks=[])
        e = manager.run_check(GoldenCheck("budget", "q", "stated", lambda c: c.budget_evals, 123))
        assert e.status == GoldenStatus.MATCH

    def test_run_without_scan(self, mocker):
        scan = mocker.patch.object(GoldenManager, "orzech_scan")
        manager = GoldenManager(
            checks=[
                GoldenCheck("a", "q", "stated", constant(1), 1),
                GoldenCheck("b", "q", "stated", constant(2), 3),
            ]
        )
        report = manager.run(include_scan=False)
        assert [e.status for e in report.entries] == [GoldenStatus.MATCH, GoldenStatus.MISMATCH]
        assert not report.passed
        scan.assert_not_called()

    def test_orzech_scan_reports_disagreements(self, manager, mocker):
        def fake(F, d, config):
            agrees = not (F.q == 7 and d == 4)
            return OrzechCheck(field=F.name, d=d, found=not agrees, witness=[1, 1, 1], listed=False, agrees=agrees)

        mocker.patch("hforms.verify.golden_manager.check_orzech_dim3", side_effect=fake)
        entries = manager.orzech_scan(q_max=9, degrees=(4,))
        assert len(entries) == 1
        assert entries[0].status == GoldenStatus.DISCREPANCY_NOTED
        assert entries[0].query == "orzech --p 7 --f 1 --d 4"
        assert entries[0].note == "search witness [1, 1, 1]"

    @pytest.mark.slow
    def test_full_golden_table(self):
        report = GoldenManager().run()
        assert report.mismatches == 0, [e for e in report.entries if e.status == GoldenStatus.MISMATCH]
        assert report.discrepancies_noted >= 1
