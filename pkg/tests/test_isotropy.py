"""Unit tests for isotropy decisions over finite fields."""

import random
from itertools import combinations_with_replacement
from math import gcd

import numpy as np
import pytest

from hforms.config import SearchConfig
from hforms.errors import ZeroCoefficientError
from hforms.forms import DiagonalForm, PolyForm, evaluate, evaluate_many
from hforms.gf import field_of_size, make_field, power_classes
from hforms.isotropy import (
    is_isotropic,
    is_isotropic_diagonal,
    is_isotropic_poly,
    is_universal,
    represented_values,
)
from hforms.models import Verdict


class TestDiagonalIsotropy:
    """Test the dynamic-programming decider."""

    def test_sum_of_two_squares_mod_3(self):
        """Test that x^2 + y^2 is anisotropic over F_3."""
        verdict = is_isotropic_diagonal(make_field(3), 2, [1, 1])
        assert verdict.status == Verdict.ANISOTROPIC
        assert verdict.isotropic is False
        assert verdict.witness is None

    def test_least_witness_mod_5(self):
        """Test that the least zero of x^2 + y^2 over F_5 is (1, 2)."""
        verdict = is_isotropic_diagonal(make_field(5), 2, [1, 1])
        assert verdict.status == Verdict.ISOTROPIC
        assert verdict.witness == [1, 2]

    def test_least_witness_ternary(self):
        verdict = is_isotropic_diagonal(make_field(3), 2, [1, 1, 1])
        assert verdict.witness == [1, 1, 1]

    def test_quartic_level_of_f5(self):
        """Test that four quartics stay anisotropic over F_5 and five do not."""
        F = make_field(5)
        assert is_isotropic_diagonal(F, 4, [1] * 4).status == Verdict.ANISOTROPIC
        verdict = is_isotropic_diagonal(F, 4, [1] * 5)
        assert verdict.witness == [1, 1, 1, 1, 1]

    def test_witness_is_a_zero(self):
        F = make_field(3, 2)
        phi = DiagonalForm(d=4, coeffs=(1, 2, 3, 5, 7))
        verdict = is_isotropic(F, phi)
        assert verdict.status == Verdict.ISOTROPIC
        assert any(verdict.witness)
        assert evaluate(F, phi, verdict.witness) == 0

    def test_empty_form(self):
        assert is_isotropic_diagonal(make_field(5), 3, []).status == Verdict.ANISOTROPIC

    def test_zero_coefficient(self):
        with pytest.raises(ZeroCoefficientError):
            is_isotropic_diagonal(make_field(5), 2, [1, 0])

    def test_budget_gives_undecided(self):
        """Test that an exhausted budget never yields a guess."""
        verdict = is_isotropic_diagonal(make_field(7), 3, [1, 2, 3], SearchConfig(budget_evals=10))
        assert verdict.status == Verdict.UNDECIDED
        assert verdict.isotropic is None


class TestPolyIsotropy:
    """Test the projective scan."""

    def test_norm_form_of_f4(self):
        """Test that x^2 + xy + y^2 is anisotropic over F_2."""
        phi = PolyForm(d=2, n=2, terms={(2, 0): 1, (1, 1): 1, (0, 2): 1})
        assert is_isotropic_poly(make_field(2), phi).status == Verdict.ANISOTROPIC

    def test_least_projective_point(self):
        """Test that the scan starts at (0, ..., 0, 1)."""
        phi = PolyForm(d=2, n=2, terms={(1, 1): 1})
        verdict = is_isotropic_poly(make_field(7), phi)
        assert verdict.witness == [0, 1]
        assert verdict.search_cost == 1

    def test_unused_variable(self):
        """Test that a variable missing from every term gives a zero at once."""
        phi = PolyForm(d=2, n=3, terms={(2, 0, 0): 1, (0, 2, 0): 1})
        verdict = is_isotropic_poly(make_field(3), phi)
        assert verdict.witness == [0, 0, 1]

    def test_budget_gives_undecided(self):
        phi = PolyForm(d=3, n=3, terms={(3, 0, 0): 1, (0, 3, 0): 2, (0, 0, 3): 4})
        verdict = is_isotropic_poly(make_field(7), phi, SearchConfig(budget_evals=10))
        assert verdict.status == Verdict.UNDECIDED

    def test_small_chunks(self):
        """Test that chunking does not change the witness."""
        phi = DiagonalForm(d=3, coeffs=(1, 2, 3)).to_polyform()
        whole = is_isotropic_poly(make_field(7), phi)
        chunked = is_isotropic_poly(make_field(7), phi, SearchConfig(scan_chunk=2))
        assert whole.witness == chunked.witness

    def test_kernels_agree(self):
        """Test that both kernels return the same least witness."""
        F = make_field(7)
        for coeffs in [(1, 2, 3), (1, 1), (1, 3, 5), (2, 3)]:
            phi = DiagonalForm(d=3, coeffs=coeffs)
            dp = is_isotropic(F, phi)
            scan = is_isotropic_poly(F, phi.to_polyform())
            assert dp.status == scan.status
            assert dp.witness == scan.witness


class TestRepresentedValues:
    """Test D(phi) and universality."""

    def test_single_quartic(self):
        assert represented_values(make_field(5), 4, [1]) == frozenset({1})

    def test_universal(self):
        F = make_field(5)
        assert is_universal(F, 4, [1, 1, 1, 1])
        assert not is_universal(F, 4, [1, 1, 1])


def exhaustive_least_zero(F, d, coeffs):
    """First nonzero zero of the diagonal form in lexicographic order, by brute force."""
    n = len(coeffs)
    points = np.indices((F.q,) * n).reshape(n, -1).T[1:]
    values = evaluate_many(F, DiagonalForm(d=d, coeffs=tuple(coeffs)), points)
    zeros = np.flatnonzero(values == 0)
    return None if zeros.size == 0 else [int(x) for x in points[zeros[0]]]


def random_coeffs(rng, F, n):
    return [rng.randrange(1, F.q) for _ in range(n)]


SMALL_FIELDS = [(2, 1), (3, 1), (5, 1), (7, 1), (2, 2), (13, 1), (3, 2), (2, 3)]


class TestSampledInvariants:
    """Test structural properties of the decider on random diagonal forms."""

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_exhaustive_search(self, seed):
        """Test the verdict and the least witness against a full enumeration of F_q^n."""
        rng = random.Random(seed)
        for _ in range(30):
            F = make_field(*rng.choice(SMALL_FIELDS))
            d = rng.randint(1, 6)
            n = rng.randint(1, 5)
            while F.q**n > 20_000:
                n -= 1
            coeffs = random_coeffs(rng, F, n)
            expected = exhaustive_least_zero(F, d, coeffs)
            verdict = is_isotropic_diagonal(F, d, coeffs)
            assert verdict.witness == expected, (F.name, d, coeffs)
            assert verdict.isotropic == (expected is not None)

    @pytest.mark.parametrize("seed", range(3))
    def test_power_class_reduction(self, seed):
        """Test that degree d and degree gcd(d, q - 1) give the same verdict."""
        rng = random.Random(100 + seed)
        for _ in range(40):
            F = make_field(*rng.choice(SMALL_FIELDS))
            d = rng.randint(1, 12)
            coeffs = random_coeffs(rng, F, rng.randint(1, 4))
            reduced = gcd(d, F.order)
            assert (
                is_isotropic_diagonal(F, d, coeffs).status == is_isotropic_diagonal(F, reduced, coeffs).status
            ), (F.name, d, coeffs)
            assert represented_values(F, d, coeffs) == represented_values(F, reduced, coeffs)

    @pytest.mark.parametrize("seed", range(3))
    def test_representation_by_anisotropic_forms(self, seed):
        """Test that an anisotropic phi represents a exactly when phi + <-a> is isotropic."""
        rng = random.Random(200 + seed)
        checked = 0
        while checked < 15:
            F = make_field(*rng.choice(SMALL_FIELDS))
            d = rng.randint(2, 6)
            coeffs = random_coeffs(rng, F, rng.randint(1, 3))
            if is_isotropic_diagonal(F, d, coeffs).status != Verdict.ANISOTROPIC:
                continue
            values = represented_values(F, d, coeffs)
            for a in F.nonzero():
                extended = is_isotropic_diagonal(F, d, coeffs + [F.neg(a)])
                assert (a in values) == (extended.status == Verdict.ISOTROPIC), (F.name, d, coeffs, a)
            checked += 1

    @pytest.mark.parametrize("q, d", [(5, 4), (7, 3), (13, 3), (9, 4), (7, 6), (13, 4)])
    def test_anisotropic_forms_of_dimension_d_star_are_universal(self, q, d):
        """Test that every anisotropic diagonal form in gcd(d, q - 1) variables represents all of F_q^x."""
        F = field_of_size(q)
        table = power_classes(F, d)
        anisotropic = 0
        for tail in combinations_with_replacement(table.reps, table.d_star - 1):
            coeffs = [1, *tail]
            if is_isotropic_diagonal(F, d, coeffs).status == Verdict.ANISOTROPIC:
                anisotropic += 1
                assert is_universal(F, d, coeffs), (q, d, coeffs)
        if (q, d) == (5, 4):
            assert anisotropic > 0

    @pytest.mark.parametrize("seed", range(3))
    def test_diagonal_forms_beyond_the_degree_are_isotropic(self, seed):
        """Test that d + 1 diagonal terms of degree d always have a zero."""
        rng = random.Random(300 + seed)
        for _ in range(40):
            F = make_field(*rng.choice(SMALL_FIELDS))
            d = rng.randint(1, 8)
            verdict = is_isotropic_diagonal(F, d, random_coeffs(rng, F, d + 1))
            assert verdict.status == Verdict.ISOTROPIC, (F.name, d)

    @pytest.mark.parametrize("seed", range(3))
    def test_general_forms_beyond_the_degree_are_isotropic(self, seed):
        """Test that a form of degree d in more than d variables has a zero."""
        rng = random.Random(400 + seed)
        for _ in range(25):
            F = make_field(*rng.choice([(2, 1), (3, 1), (5, 1), (7, 1), (2, 2)]))
            d = rng.randint(1, 3)
            n = d + 1
            terms = {}
            for _ in range(rng.randint(1, 6)):
                exps = [0] * n
                for _ in range(d):
                    exps[rng.randrange(n)] += 1
                terms[tuple(exps)] = rng.randrange(1, F.q)
            phi = PolyForm(d=d, n=n, terms=terms)
            verdict = is_isotropic_poly(F, phi)
            assert verdict.status == Verdict.ISOTROPIC, (F.name, phi.terms)
            assert evaluate(F, phi, verdict.witness) == 0
