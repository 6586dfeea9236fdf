"""Acceptance sweeps over many fields and random forms.

Run with ``pytest -m slow``; deselect with ``-m "not slow"``.
"""

import random
from itertools import product
from math import gcd

import numpy as np
import pytest
from sympy import primerange

from hforms.config import SearchConfig
from hforms.forms import DiagonalForm, PolyForm, evaluate, evaluate_many, is_nondegenerate, polarize
from hforms.gf import field_of_size, make_field, prime_powers
from hforms.invariants import level, u_diag, waring_number
from hforms.isotropy import is_isotropic_diagonal
from hforms.models import ext_le
from hforms.valued import (
    ValuedCoefficient,
    ValuedDiagonalForm,
    ValuedFieldDescriptor,
    is_isotropic_valued_diagonal,
    truncated_padic_oracle,
    u_diag_springer,
)

pytestmark = pytest.mark.slow

SWEEP_CONFIG = SearchConfig(budget_evals=10**10)


def test_coprime_degree_over_qp():
    """Test u_diag(d, Q_p) = d whenever d is prime to both p and p - 1."""
    for p in primerange(2, 51):
        K = ValuedFieldDescriptor.padic(p)
        for d in range(1, 13):
            if gcd(d, p) == 1 and gcd(d, p - 1) == 1:
                assert u_diag_springer(K, d, SWEEP_CONFIG).value == d, (p, d)


class TestFiniteFieldSweep:
    """Structural relations between s_d, u_diag and the Waring number for q <= 64, d <= 12."""

    @pytest.fixture(scope="class")
    def table(self):
        rows = {}
        for q in prime_powers(2, 64):
            F = field_of_size(q)
            for d in range(1, 13):
                rows[(q, d)] = (
                    level(F, d).value,
                    u_diag(F, d, SWEEP_CONFIG).value,
                    waring_number(F, d).value,
                )
        return rows

    def test_level_below_udiag_below_kneser(self, table):
        for (q, d), (s, u, _) in table.items():
            assert ext_le(s, u), (q, d)
            assert u <= gcd(d, q - 1), (q, d)

    def test_udiag_depends_on_gcd_only(self, table):
        for (q, d), (_, u, _) in table.items():
            assert u == table[(q, gcd(d, q - 1))][1], (q, d)

    def test_level_chain(self, table):
        for q in prime_powers(2, 64):
            assert ext_le(table[(q, 2)][0], table[(q, 4)][0]), q
            assert ext_le(table[(q, 4)][0], table[(q, 8)][0]), q

    def test_waring_at_most_degree(self, table):
        for (q, d), (_, _, w) in table.items():
            assert w <= d, (q, d)

    def test_large_fields_have_udiag_two(self, table):
        for (q, d), (_, u, _) in table.items():
            d_star = gcd(d, q - 1)
            if d_star >= 2 and q > (d_star - 1) ** 4:
                assert u == 2, (q, d)


def test_springer_agrees_with_truncated_oracle():
    """Test 500 random diagonal forms over Q_3, Q_5 and Q_7."""
    rng = random.Random(20240611)
    disagreements = []
    for _ in range(500):
        p = rng.choice([3, 5, 7])
        d = rng.choice([dd for dd in (3, 4, 6) if dd % p])
        coeffs = tuple(
            ValuedCoefficient(rng.randrange(1, p), (rng.randrange(0, 2 * d),))
            for _ in range(rng.randint(1, 6))
        )
        phi = ValuedDiagonalForm(d=d, coeffs=coeffs)
        K = ValuedFieldDescriptor.padic(p)
        if is_isotropic_valued_diagonal(phi, K, SWEEP_CONFIG).isotropic != truncated_padic_oracle(phi, K):
            disagreements.append((p, phi.to_text()))
    assert disagreements == []


def _random_poly(rng: random.Random, p: int, d: int, n: int) -> PolyForm:
    terms = {}
    for _ in range(rng.randint(1, 5)):
        exps = [0] * n
        for _ in range(d):
            exps[rng.randrange(n)] += 1
        exps = tuple(exps)
        terms[exps] = (terms.get(exps, 0) + rng.randrange(1, p)) % p
    return PolyForm(d=d, n=n, terms=terms)


def test_polarization_on_random_forms():
    """Test theta(v, ..., v) = phi(v) and linearity in the first slot on 200 random forms."""
    rng = random.Random(7)
    for _ in range(200):
        d = rng.randint(2, 5)
        p = rng.choice(list(primerange(d + 1, 32)))
        n = rng.randint(1, 4)
        F = make_field(p)
        phi = _random_poly(rng, p, d, n)
        theta = polarize(phi, F)

        if p**n <= 2500:
            vectors = product(range(p), repeat=n)
        else:
            vectors = ([rng.randrange(p) for _ in range(n)] for _ in range(200))
        for v in vectors:
            assert theta.value(F, *([list(v)] * d)) == evaluate(F, phi, v), (p, phi.terms, v)

        u, w = [rng.randrange(p) for _ in range(n)], [rng.randrange(p) for _ in range(n)]
        rest = [[rng.randrange(p) for _ in range(n)] for _ in range(d - 1)]
        a, b = rng.randrange(p), rng.randrange(p)
        combined = [F.add(F.mul(a, x), F.mul(b, y)) for x, y in zip(u, w)]
        expected = F.add(F.mul(a, theta.value(F, u, *rest)), F.mul(b, theta.value(F, w, *rest)))
        assert theta.value(F, combined, *rest) == expected


def test_diagonal_forms_are_nondegenerate():
    rng = random.Random(11)
    for _ in range(100):
        d = rng.randint(2, 5)
        p = rng.choice(list(primerange(d + 1, 32)))
        coeffs = tuple(rng.randrange(1, p) for _ in range(rng.randint(1, 4)))
        assert is_nondegenerate(polarize(DiagonalForm(d=d, coeffs=coeffs), make_field(p)), make_field(p))


def test_diagonal_decider_matches_enumeration():
    """Test the least witness against a full enumeration of F_q^n for q^n <= 10^6."""
    rng = random.Random(31)
    fields = [field_of_size(q) for q in prime_powers(2, 32)]
    for _ in range(150):
        F = rng.choice(fields)
        n = rng.randint(1, 6)
        while F.q**n > 10**6:
            n -= 1
        d = rng.randint(1, 12)
        coeffs = [rng.randrange(1, F.q) for _ in range(n)]
        points = np.indices((F.q,) * n).reshape(n, -1).T[1:]
        zeros = np.flatnonzero(evaluate_many(F, DiagonalForm(d=d, coeffs=tuple(coeffs)), points) == 0)
        expected = None if zeros.size == 0 else [int(x) for x in points[zeros[0]]]
        assert is_isotropic_diagonal(F, d, coeffs, SWEEP_CONFIG).witness == expected, (F.name, d, coeffs)
