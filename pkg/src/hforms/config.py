"""Search budgets and precision settings."""

import os
from functools import lru_cache
from typing import Self

from pydantic import BaseModel, Field

DEFAULT_BUDGET_EVALS = 10**8
DEFAULT_TABLE_BUDGET = 2**20


class SearchConfig(BaseModel):
    """Budgets shared by every search kernel.

    Exhausting ``budget_evals`` never yields a guessed answer: deciders return an
    undecided verdict and invariant searches raise ``SearchBudgetExceeded``.
    """

    model_config = {"frozen": True}

    budget_evals: int = Field(default=DEFAULT_BUDGET_EVALS, ge=1)
    table_budget: int = Field(default=DEFAULT_TABLE_BUDGET, ge=2)
    term_budget: int = Field(default=200_000, ge=1)
    # None: d + 1, above the normalized valuation spread, so a primitive
    # solution mod p^K forces a residue zero.
    oracle_precision: int | None = Field(default=None, ge=1)
    scan_chunk: int = Field(default=65_536, ge=1)

    @classmethod
    def from_env(cls) -> Self:
        """Build a config from ``HFORMS_BUDGET`` and ``HFORMS_TABLE_BUDGET``."""
        overrides = {}
        if budget := os.environ.get("HFORMS_BUDGET"):
            overrides["budget_evals"] = int(budget)
        if table := os.environ.get("HFORMS_TABLE_BUDGET"):
            overrides["table_budget"] = int(table)
        return cls(**overrides)


@lru_cache(maxsize=None)
def get_config() -> SearchConfig:
    """Process-wide default configuration, read once from the environment."""
    return SearchConfig.from_env()
