"""Pydantic models for the golden-value report."""

from enum import StrEnum
from typing import Any

from pydantic import BaseModel, Field, computed_field, field_validator


class GoldenStatus(StrEnum):
    MATCH = "match"
    MISMATCH = "mismatch"
    DISCREPANCY_NOTED = "paper-discrepancy-noted"


class GoldenEntry(BaseModel):
    """One stated value checked against a fresh computation."""

    description: str = Field(..., min_length=1)
    query: str = Field(..., min_length=1)
    expected: Any
    computed: Any = None
    provenance: str
    status: GoldenStatus
    note: str | None = None

    @field_validator("provenance")
    @classmethod
    def validate_provenance(cls, v):
        """Every entry has to say where its expected value comes from."""
        if not v or not v.strip():
            raise ValueError("Golden entries need a provenance")
        return v.strip()


class GoldenReport(BaseModel):
    entries: list[GoldenEntry] = Field(default_factory=list)

    @computed_field
    @property
    def mismatches(self) -> int:
        return sum(1 for e in self.entries if e.status == GoldenStatus.MISMATCH)

    @computed_field
    @property
    def discrepancies_noted(self) -> int:
        return sum(1 for e in self.entries if e.status == GoldenStatus.DISCREPANCY_NOTED)

    @property
    def passed(self) -> bool:
        """Noted discrepancies do not fail the run."""
        return self.mismatches == 0

    def rows(self) -> list[dict[str, Any]]:
        """Flat rows for CSV output."""
        return [
            {
                "description": e.description,
                "query": e.query,
                "expected": e.expected,
                "computed": e.computed,
                "status": e.status.value,
                "provenance": e.provenance,
                "note": e.note or "",
            }
            for e in self.entries
        ]
