"""Diagonal forms, homogeneous polynomials and symmetric d-linear forms.

A form of degree d in n variables is stored either as a diagonal form
``<a_1, ..., a_n>`` or as a sparse homogeneous polynomial. Over a field of
characteristic 0 or > d both correspond to a unique symmetric d-linear form,
obtained by polarization. Coefficients are field elements of the ``ScalarField``
passed to each operation (integers for F_q, Fractions for ``QQ``).
"""

from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement, product
from math import factorial, prod

import numpy as np
from sympy.utilities.iterables import multiset_permutations

from .errors import (
    CharacteristicError,
    DegreeMismatchError,
    DimensionMismatchError,
    HFormsError,
    HypothesisError,
    TermBudgetError,
    ZeroCoefficientError,
)
from .gf import FieldDescriptor, ScalarField, power_classes

Exponents = tuple[int, ...]


@dataclass(frozen=True)
class DiagonalForm:
    """The diagonal form a_1 x_1^d + ... + a_n x_n^d."""

    d: int
    coeffs: tuple = ()

    def __post_init__(self):
        if self.d < 1:
            raise HFormsError(f"Degree must be positive, got {self.d}")
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        for i, a in enumerate(self.coeffs):
            if a == 0:
                raise ZeroCoefficientError(i)

    @classmethod
    def empty(cls, d: int) -> "DiagonalForm":
        """The zero-dimensional form, identity of the orthogonal sum."""
        return cls(d=d, coeffs=())

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    def orthogonal_sum(self, other: "DiagonalForm") -> "DiagonalForm":
        _check_degrees(self.d, other.d)
        return DiagonalForm(d=self.d, coeffs=self.coeffs + other.coeffs)

    def tensor(self, other: "DiagonalForm", F: ScalarField) -> "DiagonalForm":
        """Coefficients a_i * b_j in row-major order."""
        _check_degrees(self.d, other.d)
        return DiagonalForm(d=self.d, coeffs=tuple(F.mul(a, b) for a in self.coeffs for b in other.coeffs))

    def scaled(self, c, F: ScalarField) -> "DiagonalForm":
        return DiagonalForm(d=self.d, coeffs=tuple(F.mul(c, a) for a in self.coeffs))

    def to_polyform(self) -> "PolyForm":
        terms = {}
        for i, a in enumerate(self.coeffs):
            exps = [0] * self.dim
            exps[i] = self.d
            terms[tuple(exps)] = a
        return PolyForm(d=self.d, n=self.dim, terms=terms)

    def to_text(self) -> str:
        return f"d:{self.d} diag:" + ",".join(str(a) for a in self.coeffs)

    def __str__(self) -> str:
        return "<" + ", ".join(str(a) for a in self.coeffs) + ">"


@dataclass(frozen=True)
class PolyForm:
    """A homogeneous polynomial of degree ``d`` in ``n`` variables.

    ``terms`` maps exponent vectors (summing to d) to nonzero coefficients.
    """

    d: int
    n: int
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {}
        for exps, c in self.terms.items():
            exps = tuple(exps)
            if len(exps) != self.n:
                raise DimensionMismatchError(self.n, len(exps))
            if sum(exps) != self.d or min(exps, default=0) < 0:
                raise HFormsError(f"Monomial {exps} is not of degree {self.d}")
            if c != 0:
                cleaned[exps] = c
        object.__setattr__(self, "terms", cleaned)

    @property
    def dim(self) -> int:
        return self.n

    def variables_used(self) -> set[int]:
        return {i for exps in self.terms for i, e in enumerate(exps) if e}

    def reduce(self, F: ScalarField) -> "PolyForm":
        """Image of a form with integer or rational coefficients in ``F``."""
        terms = {}
        for exps, c in self.terms.items():
            num, den = getattr(c, "numerator", c), getattr(c, "denominator", 1)
            terms[exps] = F.div(F.from_int(int(num)), F.from_int(int(den)))
        return PolyForm(d=self.d, n=self.n, terms=terms)

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for exps, c in sorted(self.terms.items(), reverse=True):
            factors = [f"x{i + 1}" if e == 1 else f"x{i + 1}^{e}" for i, e in enumerate(exps) if e]
            pieces.append("*".join([str(c)] + factors))
        return " + ".join(pieces)

    def __str__(self) -> str:
        return self.to_text()


@dataclass(frozen=True)
class SymmetricTensor:
    """A symmetric d-linear form on an n-dimensional space.

    Only sorted index tuples ``i_1 <= ... <= i_d`` are stored; the value on a
    basis tuple is the entry of its sorted rearrangement.
    """

    d: int
    n: int
    entries: dict = field(default_factory=dict)

    def entry(self, indices) -> object:
        return self.entries.get(tuple(sorted(indices)), 0)

    def value(self, F: ScalarField, *vectors) -> object:
        """theta(v_1, ..., v_d)."""
        if len(vectors) != self.d:
            raise HFormsError(f"A {self.d}-linear form takes {self.d} vectors, got {len(vectors)}")
        for v in vectors:
            if len(v) != self.n:
                raise DimensionMismatchError(self.n, len(v))
        total = F.zero
        for key, c in self.entries.items():
            for perm in multiset_permutations(list(key)):
                term = c
                for v, i in zip(vectors, perm):
                    term = F.mul(term, v[i])
                    if term == 0:
                        break
                total = F.add(total, term)
        return total

    def to_polyform(self, F: ScalarField) -> PolyForm:
        """The form v -> theta(v, ..., v)."""
        terms = {}
        for key, c in self.entries.items():
            counts = Counter(key)
            multinomial = factorial(self.d) // prod(factorial(k) for k in counts.values())
            exps = tuple(counts.get(i, 0) for i in range(self.n))
            terms[exps] = F.mul(F.from_int(multinomial), c)
        return PolyForm(d=self.d, n=self.n, terms=terms)

    def tensor(self, other: "SymmetricTensor", F: ScalarField) -> "SymmetricTensor":
        """(theta_1 (x) theta_2)(u_1 (x) v_1, ...) = theta_1(u_1, ...) * theta_2(v_1, ...).

        The basis vector e_i (x) f_j gets index ``i * other.n + j``.
        """
        _check_degrees(self.d, other.d)
        entries = {}
        for key1, c1 in self.entries.items():
            for key2, c2 in other.entries.items():
                c = F.mul(c1, c2)
                for perm in multiset_permutations(list(key2)):
                    key = tuple(sorted(i * other.n + j for i, j in zip(key1, perm)))
                    entries[key] = c
        return SymmetricTensor(d=self.d, n=self.n * other.n, entries=entries)


def _check_degrees(left: int, right: int) -> None:
    if left != right:
        raise DegreeMismatchError(left, right)


def _check_polarizable(F: ScalarField, d: int) -> None:
    if F.p != 0 and F.p <= d:
        raise CharacteristicError(F.p, d)


# Sparse polynomial arithmetic over a ScalarField.


def poly_add(F: ScalarField, a: dict, b: dict) -> dict:
    out = dict(a)
    for exps, c in b.items():
        s = F.add(out.get(exps, F.zero), c)
        if s == 0:
            out.pop(exps, None)
        else:
            out[exps] = s
    return out


def poly_mul(F: ScalarField, a: dict, b: dict, budget: int | None = None) -> dict:
    out: dict = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            exps = tuple(x + y for x, y in zip(ea, eb))
            s = F.add(out.get(exps, F.zero), F.mul(ca, cb))
            if s == 0:
                out.pop(exps, None)
            else:
                out[exps] = s
        if budget is not None and len(out) > budget:
            raise TermBudgetError(len(out), budget)
    return out


def poly_pow(F: ScalarField, a: dict, m: int, n: int, budget: int | None = None) -> dict:
    result = {(0,) * n: F.one}
    base = a
    while m:
        if m & 1:
            result = poly_mul(F, result, base, budget)
        m >>= 1
        if m:
            base = poly_mul(F, base, base, budget)
    return result


# Operations.


def evaluate(F: ScalarField, phi: DiagonalForm | PolyForm, v) -> object:
    """phi(v) as an exact field value.

    Raises:
        DimensionMismatchError: If ``len(v)`` differs from the form's dimension.
    """
    if len(v) != phi.dim:
        raise DimensionMismatchError(phi.dim, len(v))
    total = F.zero
    if isinstance(phi, DiagonalForm):
        for a, x in zip(phi.coeffs, v):
            total = F.add(total, F.mul(a, F.pow(x, phi.d)))
        return total
    for exps, c in phi.terms.items():
        term = c
        for x, e in zip(v, exps):
            if e:
                term = F.mul(term, F.pow(x, e))
        total = F.add(total, term)
    return total


def evaluate_many(F: FieldDescriptor, phi: DiagonalForm | PolyForm, points: np.ndarray) -> np.ndarray:
    """Vectorised evaluation over F_q on the rows of ``points``."""
    points = np.asarray(points, dtype=np.int64)
    if points.shape[1] != phi.dim:
        raise DimensionMismatchError(phi.dim, points.shape[1])
    if isinstance(phi, DiagonalForm):
        phi = phi.to_polyform()
    total = np.zeros(points.shape[0], dtype=np.int64)
    for exps, c in phi.terms.items():
        term = np.full(points.shape[0], c, dtype=np.int64)
        for i, e in enumerate(exps):
            if e:
                term = F.mul_array(term, F.pow_array(points[:, i], e))
        total = F.add_array(total, term)
    return total


def polarize(phi: PolyForm | DiagonalForm, F: ScalarField) -> SymmetricTensor:
    """The symmetric d-linear form theta with theta(v, ..., v) = phi(v).

    Each basis entry is computed by the inclusion-exclusion formula
    theta(v_1, ..., v_d) = 1/d! * sum over nonempty I of (-1)^(d-|I|) phi(sum_{i in I} v_i).

    Raises:
        CharacteristicError: If the characteristic of ``F`` is positive and <= d.
    """
    d, n = phi.d, phi.dim
    _check_polarizable(F, d)
    scale = F.inv(F.from_int(factorial(d)))
    entries = {}
    for key in combinations_with_replacement(range(n), d):
        total = F.zero
        for size in range(1, d + 1):
            sign = F.from_int((-1) ** (d - size))
            for subset in combinations(key, size):
                counts = Counter(subset)
                point = [F.from_int(counts.get(i, 0)) for i in range(n)]
                total = F.add(total, F.mul(sign, evaluate(F, phi, point)))
        value = F.mul(scale, total)
        if value != 0:
            entries[key] = value
    return SymmetricTensor(d=d, n=n, entries=entries)


def orthogonal_sum(phi, psi):
    """phi _|_ psi on the direct sum, for forms of the same kind and degree."""
    _check_degrees(phi.d, psi.d)
    if isinstance(phi, PolyForm) or isinstance(psi, PolyForm):
        phi, psi = _as_poly(phi), _as_poly(psi)
        terms = {exps + (0,) * psi.n: c for exps, c in phi.terms.items()}
        terms.update({(0,) * phi.n + exps: c for exps, c in psi.terms.items()})
        return PolyForm(d=phi.d, n=phi.n + psi.n, terms=terms)
    if type(phi) is not type(psi):
        raise HFormsError(f"Cannot sum a {type(phi).__name__} with a {type(psi).__name__}")
    return phi.orthogonal_sum(psi)


def tensor_product(phi, psi, F: ScalarField):
    """phi (x) psi. Diagonal inputs give diagonal outputs; general forms go through polarization."""
    _check_degrees(phi.d, psi.d)
    if isinstance(phi, PolyForm) or isinstance(psi, PolyForm):
        phi, psi = _as_poly(phi), _as_poly(psi)
        theta = polarize(phi, F).tensor(polarize(psi, F), F)
        return theta.to_polyform(F)
    if type(phi) is not type(psi):
        raise HFormsError(f"Cannot tensor a {type(phi).__name__} with a {type(psi).__name__}")
    return phi.tensor(psi, F)


def _as_poly(phi) -> PolyForm:
    if isinstance(phi, DiagonalForm):
        return phi.to_polyform()
    if isinstance(phi, PolyForm):
        return phi
    raise HFormsError(f"{type(phi).__name__} has no polynomial form")


def matrix_rank(F: ScalarField, rows: list[list]) -> int:
    """Rank of a matrix over ``F`` by Gaussian elimination."""
    m = [list(r) for r in rows]
    rank = 0
    width = len(m[0]) if m else 0
    for col in range(width):
        pivot = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        inv = F.inv(m[rank][col])
        m[rank] = [F.mul(inv, x) for x in m[rank]]
        for r in range(len(m)):
            if r != rank and m[r][col] != 0:
                factor = m[r][col]
                m[r] = [F.sub(x, F.mul(factor, y)) for x, y in zip(m[r], m[rank])]
        rank += 1
        if rank == len(m):
            break
    return rank


def flattening(theta: SymmetricTensor) -> list[list]:
    """The n x n^(d-1) matrix M[i, (i_2..i_d)] = theta(e_i, e_{i_2}, ..., e_{i_d})."""
    return [
        [theta.entry((i,) + rest) for rest in product(range(theta.n), repeat=theta.d - 1)]
        for i in range(theta.n)
    ]


def is_nondegenerate(theta: SymmetricTensor, F: ScalarField) -> bool:
    """True iff only v = 0 satisfies theta(v, v_2, ..., v_d) = 0 for all v_i."""
    if theta.n == 0:
        return True
    return matrix_rank(F, flattening(theta)) == theta.n


def diagonal_isomorphic(phi: DiagonalForm, psi: DiagonalForm, F: FieldDescriptor) -> bool:
    """Harrison's Krull-Schmidt criterion for diagonal forms of degree >= 3.

    Raises:
        HypothesisError: If d < 3.
    """
    _check_degrees(phi.d, psi.d)
    if phi.d < 3:
        raise HypothesisError(f"Krull-Schmidt comparison needs degree >= 3, got {phi.d}")
    if phi.dim != psi.dim:
        return False
    table = power_classes(F, phi.d)
    return sorted(table.index_of(a) for a in phi.coeffs) == sorted(table.index_of(b) for b in psi.coeffs)
