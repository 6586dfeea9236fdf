"""Table-driven arithmetic in small finite fields and d-th power classes.

Elements of F_q (q = p^f) are the integers 0..q-1. For prime fields this is the
usual residue; for extension fields the integer packs the coefficients of the
element as a polynomial in the class of x, ``c_0 + c_1 p + ... + c_{f-1} p^{f-1}``.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd

import numpy as np
import sympy
from loguru import logger

from .config import get_config
from .errors import FieldBudgetError, HFormsError, NotPrimeError


def _digits(n: int, p: int, f: int) -> list[int]:
    out = []
    for _ in range(f):
        out.append(n % p)
        n //= p
    return out


def _pack(digits: list[int], p: int) -> int:
    n = 0
    for c in reversed(digits):
        n = n * p + c
    return n


def _poly_mulmod(a: list[int], b: list[int], modulus: tuple[int, ...], p: int) -> list[int]:
    """Multiply two residues modulo a monic ``modulus`` (coefficients low to high)."""
    f = len(modulus) - 1
    prod = [0] * (2 * f - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % p
    for k in range(len(prod) - 1, f - 1, -1):
        c = prod[k]
        if c:
            for j in range(f + 1):
                prod[k - f + j] = (prod[k - f + j] - c * modulus[j]) % p
    return prod[:f]


def _poly_powmod(a: list[int], n: int, modulus: tuple[int, ...], p: int) -> list[int]:
    f = len(modulus) - 1
    result = [1] + [0] * (f - 1)
    base = a
    while n:
        if n & 1:
            result = _poly_mulmod(result, base, modulus, p)
        base = _poly_mulmod(base, base, modulus, p)
        n >>= 1
    return result


def least_irreducible(p: int, f: int) -> tuple[int, ...]:
    """Lexicographically least monic irreducible polynomial of degree ``f`` over F_p.

    Candidates ``x^f + c_{f-1} x^{f-1} + ... + c_0`` are ordered by the tuple
    ``(c_{f-1}, ..., c_0)``. Returns coefficients from low to high degree.
    """
    x = sympy.Symbol("x")
    for n in range(p**f):
        lower = _digits(n, p, f)
        coeffs = tuple(lower) + (1,)
        poly = sympy.Poly(list(reversed(coeffs)), x, modulus=p)
        if poly.is_irreducible:
            return coeffs
    raise HFormsError(f"No irreducible polynomial of degree {f} over F_{p}")


@dataclass(frozen=True, eq=False, repr=False)
class FieldDescriptor:
    """The finite field F_q with discrete-log tables.

    ``exp_table[i] = gen^i`` for ``0 <= i < q - 1`` and ``log_table[exp_table[i]] = i``;
    ``log_table[0]`` is -1.
    """

    p: int
    f: int
    modulus: tuple[int, ...]
    gen: int
    exp_table: np.ndarray
    log_table: np.ndarray
    digit_table: np.ndarray = field(default=None)

    @property
    def q(self) -> int:
        return self.p**self.f

    @property
    def order(self) -> int:
        """Order of the multiplicative group."""
        return self.q - 1

    @property
    def name(self) -> str:
        return f"F_{self.q}"

    def __repr__(self) -> str:
        return f"FieldDescriptor({self.name}, gen={self.gen})"

    def __eq__(self, other) -> bool:
        return isinstance(other, FieldDescriptor) and (self.p, self.f) == (other.p, other.f)

    def __hash__(self) -> int:
        return hash((self.p, self.f))

    def elements(self) -> range:
        return range(self.q)

    def nonzero(self) -> range:
        return range(1, self.q)

    def from_int(self, n: int) -> int:
        """Image of the integer ``n`` under Z -> F_q."""
        return n % self.p

    @property
    def zero(self) -> int:
        return 0

    @property
    def one(self) -> int:
        return 1

    def add(self, a: int, b: int) -> int:
        if self.f == 1:
            return (a + b) % self.p
        digits = (self.digit_table[a] + self.digit_table[b]) % self.p
        return int(digits @ self._weights)

    def neg(self, a: int) -> int:
        if self.f == 1:
            return (-a) % self.p
        return int(((-self.digit_table[a]) % self.p) @ self._weights)

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp_table[(int(self.log_table[a]) + int(self.log_table[b])) % self.order])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError(f"0 has no inverse in {self.name}")
        return int(self.exp_table[(-int(self.log_table[a])) % self.order])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, n: int) -> int:
        if a == 0:
            if n < 0:
                raise ZeroDivisionError(f"0 has no inverse in {self.name}")
            return 1 if n == 0 else 0
        return int(self.exp_table[(int(self.log_table[a]) * n) % self.order])

    @property
    def _weights(self) -> np.ndarray:
        return self.p ** np.arange(self.f, dtype=np.int64)

    # Vectorised variants used by the search kernels.

    def add_array(self, xs: np.ndarray, ys) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64)
        if self.f == 1:
            return (xs + ys) % self.p
        digits = (self.digit_table[xs] + self.digit_table[ys]) % self.p
        return digits @ self._weights

    def neg_array(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64)
        if self.f == 1:
            return (-xs) % self.p
        return ((-self.digit_table[xs]) % self.p) @ self._weights

    def mul_array(self, xs: np.ndarray, ys) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64)
        ys = np.broadcast_to(np.asarray(ys, dtype=np.int64), xs.shape)
        out = np.zeros(xs.shape, dtype=np.int64)
        live = (xs != 0) & (ys != 0)
        logs = (self.log_table[xs[live]] + self.log_table[ys[live]]) % self.order
        out[live] = self.exp_table[logs]
        return out

    def pow_array(self, xs: np.ndarray, n: int) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.int64)
        out = np.full(xs.shape, 1 if n == 0 else 0, dtype=np.int64)
        live = xs != 0
        out[live] = self.exp_table[(self.log_table[xs[live]] * n) % self.order]
        return out

    def roots_of_unity_count(self, d: int) -> int:
        """Number of d-th roots of unity in F_q."""
        return gcd(d, self.order)


@lru_cache(maxsize=None)
def make_field(p: int, f: int = 1, budget: int | None = None) -> FieldDescriptor:
    """Build F_{p^f} with discrete-log tables.

    Args:
        p: Prime characteristic.
        f: Extension degree.
        budget: Largest admissible field size; defaults to the configured table budget.

    Raises:
        NotPrimeError: If ``p`` is not prime.
        FieldBudgetError: If ``p^f`` exceeds the budget.
    """
    if f < 1:
        raise HFormsError(f"Extension degree must be positive, got {f}")
    if not sympy.isprime(p):
        raise NotPrimeError(p)
    budget = budget or get_config().table_budget
    q = p**f
    if q > budget:
        raise FieldBudgetError(q, budget)

    order = q - 1
    exp_table = np.zeros(max(order, 1), dtype=np.int64)
    log_table = np.full(q, -1, dtype=np.int64)

    if f == 1:
        modulus = (0, 1)
        gen = int(sympy.primitive_root(p)) if p > 2 else 1
        x = 1
        for i in range(order):
            exp_table[i] = x
            log_table[x] = i
            x = x * gen % p
        digit_table = None
    else:
        modulus = least_irreducible(p, f)
        factors = sympy.primefactors(order)
        gen = None
        for candidate in range(1, q):
            digits = _digits(candidate, p, f)
            if all(_poly_powmod(digits, order // r, modulus, p) != [1] + [0] * (f - 1) for r in factors):
                gen = candidate
                break
        gen_digits = _digits(gen, p, f)
        x = [1] + [0] * (f - 1)
        for i in range(order):
            packed = _pack(x, p)
            exp_table[i] = packed
            log_table[packed] = i
            x = _poly_mulmod(x, gen_digits, modulus, p)
        digit_table = np.array([_digits(n, p, f) for n in range(q)], dtype=np.int64)

    logger.debug(f"Built F_{q} (p={p}, f={f}) with modulus {modulus} and generator {gen}")
    return FieldDescriptor(
        p=p,
        f=f,
        modulus=modulus,
        gen=gen,
        exp_table=exp_table,
        log_table=log_table,
        digit_table=digit_table,
    )


def field_of_size(q: int) -> FieldDescriptor:
    """Build F_q from its size."""
    p, f = prime_power(q)
    return make_field(p, f)


def prime_power(q: int) -> tuple[int, int]:
    """Split a prime power ``q`` into ``(p, f)``."""
    factors = sympy.factorint(q)
    if q < 2 or len(factors) != 1:
        raise HFormsError(f"{q} is not a prime power")
    (p, f), = factors.items()
    return int(p), int(f)


def prime_powers(lo: int, hi: int) -> list[int]:
    """All prime powers q with lo <= q <= hi, ascending."""
    return [q for q in range(max(lo, 2), hi + 1) if len(sympy.factorint(q)) == 1]


@dataclass(frozen=True, eq=False)
class PowerClassTable:
    """Cosets of F_q^x modulo d-th powers.

    ``reps`` holds the least encoding of each coset in ascending order, so the
    class of 1 always has index 0. ``class_index[a]`` is the coset index of a
    nonzero ``a`` and -1 for 0.
    """

    d: int
    d_star: int
    reps: tuple[int, ...]
    class_index: np.ndarray

    def class_of(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no power class")
        return self.reps[int(self.class_index[a])]

    def index_of(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no power class")
        return int(self.class_index[a])


@lru_cache(maxsize=None)
def power_classes(F: FieldDescriptor, d: int) -> PowerClassTable:
    """Coset representatives of F_q^x / F_q^{x d}; there are gcd(d, q - 1) of them."""
    if d < 1:
        raise HFormsError(f"Degree must be positive, got {d}")
    d_star = gcd(d, F.order)
    residues = F.log_table % d_star
    residues[0] = -1
    least = {}
    for a in F.nonzero():
        least.setdefault(int(residues[a]), a)
    by_residue = sorted(least.items(), key=lambda item: item[1])
    reps = tuple(rep for _, rep in by_residue)
    position = {residue: i for i, (residue, _) in enumerate(by_residue)}
    class_index = np.full(F.q, -1, dtype=np.int64)
    for a in F.nonzero():
        class_index[a] = position[int(residues[a])]
    return PowerClassTable(d=d, d_star=d_star, reps=reps, class_index=class_index)


@lru_cache(maxsize=None)
def dth_power_mask(F: FieldDescriptor, d: int) -> np.ndarray:
    """Boolean mask over F_q marking {x^d : x in F_q}; 0 is included."""
    mask = np.zeros(F.q, dtype=bool)
    mask[F.pow_array(np.arange(F.q), d)] = True
    mask.flags.writeable = False
    return mask


def dth_powers(F: FieldDescriptor, d: int) -> frozenset[int]:
    """The set {x^d : x in F_q}, including 0."""
    return frozenset(int(a) for a in np.flatnonzero(dth_power_mask(F, d)))


@lru_cache(maxsize=None)
def dth_root_table(F: FieldDescriptor, d: int) -> dict[int, int]:
    """Map each d-th power to its least d-th root."""
    roots: dict[int, int] = {}
    for x in F.elements():
        roots.setdefault(F.pow(x, d), x)
    return roots


class RationalField:
    """Characteristic-0 scalar backend over Q with the FieldDescriptor interface."""

    p = 0
    name = "Q"
    zero = Fraction(0)
    one = Fraction(1)

    def from_int(self, n: int) -> Fraction:
        return Fraction(n)

    def add(self, a, b) -> Fraction:
        return Fraction(a) + Fraction(b)

    def neg(self, a) -> Fraction:
        return -Fraction(a)

    def sub(self, a, b) -> Fraction:
        return Fraction(a) - Fraction(b)

    def mul(self, a, b) -> Fraction:
        return Fraction(a) * Fraction(b)

    def inv(self, a) -> Fraction:
        return 1 / Fraction(a)

    def div(self, a, b) -> Fraction:
        return Fraction(a) / Fraction(b)

    def pow(self, a, n: int) -> Fraction:
        return Fraction(a) ** n

    def __repr__(self) -> str:
        return "RationalField()"


QQ = RationalField()

ScalarField = FieldDescriptor | RationalField
