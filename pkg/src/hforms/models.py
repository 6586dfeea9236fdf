"""Pydantic result models shared by the library and the CLI."""

from enum import StrEnum
from typing import Any, Literal, Self

from pydantic import BaseModel, Field, computed_field, model_validator

INF = "inf"

Extended = int | Literal["inf"]


def ext_mul(a: Extended, b: Extended) -> Extended:
    """Product with inf * finite = inf (0 * inf does not occur for u-invariants)."""
    if a == INF or b == INF:
        return INF
    return a * b


def ext_le(a: Extended, b: Extended) -> bool:
    if b == INF:
        return True
    if a == INF:
        return False
    return a <= b


class Verdict(StrEnum):
    ISOTROPIC = "isotropic"
    ANISOTROPIC = "anisotropic"
    UNDECIDED = "undecided"


class IsotropyVerdict(BaseModel):
    """Outcome of an isotropy decision.

    ``witness`` is the lexicographically least nonzero zero when the verdict is
    isotropic over a finite field. For valued fields it is a residue vector
    (``exact_witness`` False) that lifts to a true zero by Hensel's lemma.
    """

    status: Verdict
    witness: list[int] | None = None
    exact_witness: bool = True
    search_cost: int = 0
    note: str | None = None

    @computed_field
    @property
    def isotropic(self) -> bool | None:
        if self.status == Verdict.UNDECIDED:
            return None
        return self.status == Verdict.ISOTROPIC

    @model_validator(mode="after")
    def validate_witness(self) -> Self:
        if self.status == Verdict.ISOTROPIC and self.witness is not None and not any(self.witness):
            raise ValueError("An isotropy witness must be nonzero")
        if self.status != Verdict.ISOTROPIC and self.witness is not None:
            raise ValueError("Only isotropic verdicts carry a witness")
        return self


class InvariantReport(BaseModel):
    """A computed invariant with the data that certifies it."""

    invariant: str
    field: str
    d: int
    value: Extended
    witness: list[Any] | None = None
    bound_used: Extended | None = None
    search_cost: int = 0
    details: dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def validate_bound(self) -> Self:
        if self.bound_used is not None and not ext_le(self.value, self.bound_used):
            raise ValueError(f"Value {self.value} exceeds the bound {self.bound_used} that closed the search")
        return self


class BoundEntry(BaseModel):
    """One labelled upper bound. ``strict`` bounds read "value < bound"."""

    name: str
    formula: str
    value: Extended | None = None
    strict: bool = False
    applicable: bool = True
    # "u_diag" and "u" bounds both bound u_diag; "waring" and "lower" do not.
    target: Literal["u_diag", "u", "waring", "lower"] = "u_diag"
    note: str | None = None

    @property
    def inclusive_value(self) -> Extended | None:
        if self.value is None or self.value == INF or not self.strict:
            return self.value
        return self.value - 1


class BoundTable(BaseModel):
    field: str
    d: int
    entries: list[BoundEntry] = Field(default_factory=list)

    def get(self, name: str) -> BoundEntry | None:
        return next((e for e in self.entries if e.name == name), None)

    @computed_field
    @property
    def tightest(self) -> str | None:
        """Name of the smallest applicable upper bound on u_diag."""
        candidates = [
            e for e in self.entries if e.applicable and e.target in ("u_diag", "u") and e.inclusive_value not in (None, INF)
        ]
        if not candidates:
            return None
        return min(candidates, key=lambda e: e.inclusive_value).name


class OrzechCheck(BaseModel):
    """Existence of a 3-dimensional anisotropic diagonal form, against Orzech's list.

    ``listed`` says whether (q, d) appears in the classification for d <= 5;
    ``agrees`` is None when the classification does not speak about d.
    """

    field: str
    d: int
    found: bool
    witness: list[int] | None = None
    listed: bool | None = None
    agrees: bool | None = None
