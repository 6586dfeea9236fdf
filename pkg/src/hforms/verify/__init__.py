"""Golden-table verification of computed invariants against stated values."""

from .storage import ResultStore
from .golden_models import GoldenEntry, GoldenReport, GoldenStatus
from .golden_manager import GoldenCheck, GoldenManager, default_checks

__all__ = [
    "ResultStore",
    "GoldenEntry",
    "GoldenReport",
    "GoldenStatus",
    "GoldenCheck",
    "GoldenManager",
    "default_checks",
]
