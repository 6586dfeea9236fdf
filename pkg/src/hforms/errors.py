"""Exceptions raised by hforms."""


class HFormsError(Exception):
    """Base class for every error hforms raises on purpose."""


class NotPrimeError(HFormsError):
    def __init__(self, p: int):
        super().__init__(f"Characteristic {p} is not a prime")


class FieldBudgetError(HFormsError):
    def __init__(self, q: int, budget: int):
        super().__init__(f"Field of size {q} exceeds the table budget of {budget} elements")


class CharacteristicError(HFormsError):
    def __init__(self, p: int, d: int):
        super().__init__(f"Polarization of degree {d} needs characteristic 0 or > {d}, got {p}")


class WildCaseError(HFormsError):
    def __init__(self, p: int, d: int):
        super().__init__(f"Residue characteristic {p} divides the degree {d} (wild case is not supported)")


class DegreeMismatchError(HFormsError):
    def __init__(self, left: int, right: int):
        super().__init__(f"Forms of degree {left} and {right} cannot be combined")


class DimensionMismatchError(HFormsError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"Expected a vector of length {expected}, got {got}")


class ZeroCoefficientError(HFormsError):
    def __init__(self, position: int):
        super().__init__(f"Diagonal coefficient at position {position} is zero")


class HypothesisError(HFormsError):
    """A theorem's hypothesis is not met by the arguments."""


class TermBudgetError(HFormsError):
    def __init__(self, terms: int, budget: int):
        super().__init__(f"Symbolic expansion needs {terms} terms, budget is {budget}")


class RecipeRejectedError(HFormsError):
    def __init__(self, recipe: str, reason: str):
        super().__init__(f"Recipe '{recipe}' rejected: {reason}")


class FormSpecError(HFormsError):
    def __init__(self, spec: str, reason: str):
        super().__init__(f"Cannot parse form '{spec}': {reason}")


class SearchBudgetExceeded(HFormsError):
    def __init__(self, what: str, budget: int):
        super().__init__(f"{what} exceeded the evaluation budget of {budget}")
