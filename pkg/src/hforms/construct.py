"""Explicit anisotropic forms: Laurent and prime lifts, norm forms, compositions and powers.

Every builder has a ``*_recipe`` counterpart that wraps the output in a
``ConstructionRecipe`` together with a machine-checked anisotropy certificate.
"""

from collections.abc import Callable
from dataclasses import dataclass, field
from itertools import product
from typing import Any

import numpy as np
from loguru import logger

from .config import SearchConfig, get_config
from .errors import DegreeMismatchError, DimensionMismatchError, HFormsError, RecipeRejectedError, TermBudgetError
from .forms import DiagonalForm, PolyForm, poly_add, poly_mul, poly_pow
from .gf import FieldDescriptor, ScalarField, make_field
from .isotropy import is_isotropic, is_isotropic_poly
from .models import IsotropyVerdict, Verdict
from .valued import (
    ValuedCoefficient,
    ValuedDiagonalForm,
    ValuedFieldDescriptor,
    decide_by_classes,
    group_by_class,
)

AnyForm = DiagonalForm | PolyForm | ValuedDiagonalForm


@dataclass(frozen=True)
class LayeredForm:
    """phi_0 + t phi_1 + ... + t^{m-1} phi_{m-1} on disjoint blocks of variables."""

    d: int
    blocks: tuple[DiagonalForm | PolyForm, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        for block in self.blocks:
            if block.d != self.d:
                raise DegreeMismatchError(self.d, block.d)
        if len(self.blocks) > self.d:
            raise HFormsError(f"At most {self.d} layers fit below t^{self.d}, got {len(self.blocks)}")

    @property
    def dim(self) -> int:
        return sum(b.dim for b in self.blocks)

    def expand(self, uniformizer: int) -> PolyForm:
        """The form with t specialized to an integer (p for a lift to Q)."""
        terms = {}
        offset = 0
        for j, block in enumerate(self.blocks):
            poly = block.to_polyform() if isinstance(block, DiagonalForm) else block
            for exps, c in poly.terms.items():
                full = [0] * self.dim
                full[offset : offset + poly.n] = exps
                terms[tuple(full)] = c * uniformizer**j
            offset += poly.n
        return PolyForm(d=self.d, n=self.dim, terms=terms)

    def to_text(self) -> str:
        return " + ".join(f"t^{j}*({b.to_text()})" for j, b in enumerate(self.blocks))


@dataclass
class ConstructionRecipe:
    """A built form together with the property it is claimed to have."""

    name: str
    inputs: dict[str, Any]
    output: AnyForm | LayeredForm
    claimed_property: str
    argument: str
    certificate: IsotropyVerdict | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.output.dim

    @property
    def certified(self) -> bool:
        return self.certificate is not None and self.certificate.status == Verdict.ANISOTROPIC

    def to_dict(self) -> dict[str, Any]:
        return {
            "recipe": self.name,
            "inputs": self.inputs,
            "d": self.output.d,
            "dim": self.dim,
            "form": self.output.to_text(),
            "claimed_property": self.claimed_property,
            "argument": self.argument,
            "certificate": self.certificate.model_dump() if self.certificate else None,
            "notes": self.notes,
        }


def certify_layers(
    F: FieldDescriptor,
    blocks: list[DiagonalForm | PolyForm],
    exact: bool = True,
    config: SearchConfig | None = None,
) -> IsotropyVerdict:
    """Layered criterion: sum_j t^j phi_j is anisotropic iff every phi_j is.

    An isotropic block gives a zero supported on that block. It is an exact zero
    over k((t)) and only a residue zero (``exact`` False) for a lift to Q_p.
    """
    dim = sum(b.dim for b in blocks)
    offset, cost, undecided = 0, 0, False
    for block in blocks:
        verdict = is_isotropic(F, block, config)
        cost += verdict.search_cost
        if verdict.status == Verdict.ISOTROPIC:
            witness = [0] * dim
            witness[offset : offset + block.dim] = verdict.witness
            return IsotropyVerdict(status=Verdict.ISOTROPIC, witness=witness, exact_witness=exact, search_cost=cost)
        undecided = undecided or verdict.status == Verdict.UNDECIDED
        offset += block.dim
    status = Verdict.UNDECIDED if undecided else Verdict.ANISOTROPIC
    return IsotropyVerdict(status=status, search_cost=cost)


# Laurent lifts.


def tensor_lift(phi: DiagonalForm, d: int | None = None) -> ValuedDiagonalForm:
    """<1, t, ..., t^{d-1}> (x) phi over k((t))."""
    d = phi.d if d is None else d
    if d != phi.d:
        raise DegreeMismatchError(d, phi.d)
    return ValuedDiagonalForm(
        d=d, coeffs=tuple(ValuedCoefficient(a, (j,)) for j in range(d) for a in phi.coeffs)
    )


def tensor_lift_recipe(
    phi: DiagonalForm, F: FieldDescriptor | None, config: SearchConfig | None = None
) -> ConstructionRecipe:
    out = tensor_lift(phi)
    K = ValuedFieldDescriptor.laurent(F)
    # Units are constants of k, so grouping by t-degree decides isotropy in every characteristic.
    certificate = decide_by_classes(out, K, group_by_class(out, K), config)
    return ConstructionRecipe(
        name="tensor-lift",
        inputs={"phi": str(phi), "field": K.name},
        output=out,
        claimed_property=f"anisotropic over {K.name} iff phi is anisotropic over the residue field",
        argument="minimal t-degree of a zero of <1, t, ..., t^{d-1}> (x) phi",
        certificate=certificate,
    )


def iterated_laurent_form(
    k: FieldDescriptor | None,
    d: int,
    n: int,
    residue: DiagonalForm | None = None,
    config: SearchConfig | None = None,
) -> ValuedDiagonalForm:
    """<1, t_1, ..., t_1^{d-1}> (x) ... (x) <1, t_n, ..., t_n^{d-1}> (x) residue.

    Raises:
        TermBudgetError: If d^n * dim(residue) exceeds the term budget.
    """
    config = config or get_config()
    residue = residue or DiagonalForm(d=d, coeffs=(1,))
    if residue.d != d:
        raise DegreeMismatchError(d, residue.d)
    size = d**n * residue.dim
    if size > config.term_budget:
        raise TermBudgetError(size, config.term_budget)
    return ValuedDiagonalForm(
        d=d,
        coeffs=tuple(ValuedCoefficient(a, vec) for vec in product(range(d), repeat=n) for a in residue.coeffs),
    )


def iterated_laurent_recipe(
    k: FieldDescriptor | None,
    d: int,
    n: int,
    residue: DiagonalForm | None = None,
    config: SearchConfig | None = None,
) -> ConstructionRecipe:
    out = iterated_laurent_form(k, d, n, residue, config)
    K = ValuedFieldDescriptor.laurent(k, n)
    certificate = decide_by_classes(out, K, group_by_class(out, K), config)
    return ConstructionRecipe(
        name="iterated-laurent",
        inputs={"field": K.name, "d": d, "n": n, "residue": str(residue) if residue else "<1>"},
        output=out,
        claimed_property=f"anisotropic of dimension d^n * dim(residue) = {out.dim} over {K.name}",
        argument="iterated Laurent tensor, one residue class per valuation vector",
        certificate=certificate,
    )


def layered_sum(blocks: list[DiagonalForm | PolyForm]) -> LayeredForm:
    if not blocks:
        raise HFormsError("A layered sum needs at least one block")
    return LayeredForm(d=blocks[0].d, blocks=tuple(blocks))


def layered_recipe(
    blocks: list[DiagonalForm | PolyForm], F: FieldDescriptor, config: SearchConfig | None = None
) -> ConstructionRecipe:
    out = layered_sum(blocks)
    return ConstructionRecipe(
        name="layered",
        inputs={"blocks": [b.to_text() for b in blocks], "field": F.name},
        output=out,
        claimed_property=f"anisotropic over {F.name}((t)) iff every block is anisotropic over {F.name}",
        argument="minimal t-degree of a zero of a layered sum",
        certificate=certify_layers(F, list(out.blocks), config=config),
    )


# Lifts to Q and Q_p.


def _reduce(phi: DiagonalForm | PolyForm, F: FieldDescriptor) -> DiagonalForm | PolyForm | None:
    """phi mod p, or None when a diagonal coefficient vanishes mod p."""
    if isinstance(phi, DiagonalForm):
        coeffs = [F.from_int(a) for a in phi.coeffs]
        if 0 in coeffs:
            return None
        return DiagonalForm(d=phi.d, coeffs=tuple(coeffs))
    return phi.reduce(F)


def prime_lift(
    phi: DiagonalForm | PolyForm, p: int, d: int | None = None, config: SearchConfig | None = None
) -> tuple[DiagonalForm | PolyForm, IsotropyVerdict]:
    """f = <1, p, ..., p^{d-1}> (x) phi over Q, in d^2 variables.

    Returns the integer form and its anisotropy certificate over Q_p.

    Raises:
        DimensionMismatchError: If phi does not have dimension d.
        RecipeRejectedError: If phi is isotropic mod p.
    """
    d = phi.d if d is None else d
    if d != phi.d:
        raise DegreeMismatchError(d, phi.d)
    if phi.dim != d:
        raise DimensionMismatchError(d, phi.dim)
    F = make_field(p)
    reduced = _reduce(phi, F)
    if reduced is None:
        raise RecipeRejectedError("prime-lift", f"{phi} has a coefficient divisible by {p}")
    residue = is_isotropic(F, reduced, config)
    if residue.status != Verdict.ANISOTROPIC:
        raise RecipeRejectedError("prime-lift", f"{phi} is not anisotropic mod {p} ({residue.status})")
    certificate = certify_layers(F, [reduced] * d, exact=False, config=config)
    if isinstance(phi, DiagonalForm):
        out = DiagonalForm(d=d, coeffs=tuple(a * p**j for j in range(d) for a in phi.coeffs))
    else:
        out = LayeredForm(d=d, blocks=(phi,) * d).expand(p)
    return out, certificate


def prime_lift_recipe(
    phi: DiagonalForm | PolyForm, p: int, config: SearchConfig | None = None
) -> ConstructionRecipe:
    out, certificate = prime_lift(phi, p, config=config)
    d = phi.d
    return ConstructionRecipe(
        name="prime-lift",
        inputs={"phi": phi.to_text(), "p": p},
        output=out,
        claimed_property=f"anisotropic over Q_{p}, so u({d}, Q_{p}) >= {d * d} and u({d}, Q) >= {d * d}",
        argument="a primitive zero reduces to a zero of some layer mod p",
        certificate=certificate,
    )


# Norm forms.


def _subfield_embedding(F: FieldDescriptor, E: FieldDescriptor) -> np.ndarray:
    """Images in E of the elements of F, sending the class of x to the least root of F's modulus."""
    if F.f == 1:
        return np.arange(F.q, dtype=np.int64)
    rs = np.arange(E.q, dtype=np.int64)
    acc = np.zeros(E.q, dtype=np.int64)
    for i, c in enumerate(F.modulus):
        if c:
            acc = E.add_array(acc, E.mul_array(E.pow_array(rs, i), c))
    root = int(np.flatnonzero(acc == 0)[0])
    powers = [E.pow(root, j) for j in range(F.f)]
    images = np.zeros(F.q, dtype=np.int64)
    for a in F.elements():
        image = 0
        for digit, power in zip(F.digit_table[a], powers, strict=True):
            if digit:
                image = E.add(image, E.mul(int(digit), power))
        images[a] = image
    return images


def norm_form(F: FieldDescriptor, d: int, config: SearchConfig | None = None) -> PolyForm:
    """N_{F_{q^d}/F_q}(x_1 + x_2 b + ... + x_d b^{d-1}) for b the class of x in F_{p^{fd}}.

    The norm is the product of the Galois conjugates under b -> b^q.

    Raises:
        FieldBudgetError: If p^{fd} exceeds the table budget.
    """
    config = config or get_config()
    if d == 1:
        return PolyForm(d=1, n=1, terms={(1,): 1})
    E = make_field(F.p, F.f * d, budget=config.table_budget)
    images = _subfield_embedding(F, E)
    back = {int(v): a for a, v in enumerate(images)}
    beta = F.p
    product_poly = {(0,) * d: E.one}
    for j in range(d):
        linear = {}
        for i in range(d):
            exps = [0] * d
            exps[i] = 1
            linear[tuple(exps)] = E.pow(beta, i * F.q**j)
        product_poly = poly_mul(E, product_poly, linear, config.term_budget)
    terms = {}
    for exps, c in product_poly.items():
        if c not in back:
            raise HFormsError(f"Norm coefficient {c} of {E.name} does not lie in {F.name}")
        terms[exps] = back[c]
    logger.debug(f"Norm form of {E.name}/{F.name} has {len(terms)} terms")
    return PolyForm(d=d, n=d, terms=terms)


def norm_form_recipe(F: FieldDescriptor, d: int, config: SearchConfig | None = None) -> ConstructionRecipe:
    out = norm_form(F, d, config)
    return ConstructionRecipe(
        name="norm-form",
        inputs={"field": F.name, "d": d},
        output=out,
        claimed_property=f"anisotropic of degree {d} in {d} variables over {F.name} (multiplicativity of the norm)",
        argument="norm of a degree-d extension vanishes only at 0",
        certificate=is_isotropic_poly(F, out, config),
    )


# Compositions and powers.


def _as_poly(f: DiagonalForm | PolyForm) -> PolyForm:
    return f.to_polyform() if isinstance(f, DiagonalForm) else f


def compose_forms(f: DiagonalForm | PolyForm, F: ScalarField, config: SearchConfig | None = None) -> PolyForm:
    """f(f(X_1), ..., f(X_u)) on u disjoint blocks of u variables.

    Raises:
        TermBudgetError: If an intermediate product exceeds the term budget.
    """
    config = config or get_config()
    f = _as_poly(f)
    u = f.n
    n = u * u
    blocks = []
    for j in range(u):
        shifted = {}
        for exps, c in f.terms.items():
            full = [0] * n
            full[j * u : (j + 1) * u] = exps
            shifted[tuple(full)] = c
        blocks.append(shifted)
    cache: dict[tuple[int, int], dict] = {}

    def block_power(j: int, e: int) -> dict:
        if (j, e) not in cache:
            cache[(j, e)] = poly_pow(F, blocks[j], e, n, config.term_budget)
        return cache[(j, e)]

    terms: dict = {}
    for exps, c in f.terms.items():
        term = {(0,) * n: c}
        for j, e in enumerate(exps):
            if e:
                term = poly_mul(F, term, block_power(j, e), config.term_budget)
        terms = poly_add(F, terms, term)
        if len(terms) > config.term_budget:
            raise TermBudgetError(len(terms), config.term_budget)
    return PolyForm(d=f.d * f.d, n=n, terms=terms)


def compose_recipe(f: DiagonalForm | PolyForm, F: FieldDescriptor, config: SearchConfig | None = None) -> ConstructionRecipe:
    out = compose_forms(f, F, config)
    base = is_isotropic(F, f, config)
    recipe = ConstructionRecipe(
        name="compose",
        inputs={"f": f.to_text(), "field": F.name},
        output=out,
        claimed_property=f"anisotropic of degree {out.d} in {out.dim} variables when f is anisotropic",
        argument="f(f(X_1), ..., f(X_u)) = 0 forces every f(X_j) = 0",
        certificate=is_isotropic_poly(F, out, config),
    )
    if base.status != Verdict.ANISOTROPIC:
        recipe.notes.append(f"input form is {base.status}; no anisotropy is claimed")
    return recipe


def power_form(f: DiagonalForm | PolyForm, m: int, F: ScalarField, config: SearchConfig | None = None) -> PolyForm:
    """f^m; same zero set, degree m * d."""
    config = config or get_config()
    if m < 1:
        raise HFormsError(f"Exponent must be positive, got {m}")
    f = _as_poly(f)
    return PolyForm(d=f.d * m, n=f.n, terms=poly_pow(F, f.terms, m, f.n, config.term_budget))


def power_recipe(
    f: DiagonalForm | PolyForm, m: int, F: FieldDescriptor, config: SearchConfig | None = None
) -> ConstructionRecipe:
    out = power_form(f, m, F, config)
    return ConstructionRecipe(
        name="power",
        inputs={"f": f.to_text(), "m": m, "field": F.name},
        output=out,
        claimed_property=f"anisotropic of degree {out.d} when f is anisotropic (same zero set)",
        argument="f^m has the zero set of f",
        certificate=is_isotropic_poly(F, out, config),
    )


RECIPES: dict[str, Callable[..., ConstructionRecipe]] = {
    "tensor-lift": tensor_lift_recipe,
    "prime-lift": prime_lift_recipe,
    "norm-form": norm_form_recipe,
    "compose": compose_recipe,
    "power": power_recipe,
    "iterated-laurent": iterated_laurent_recipe,
    "layered": layered_recipe,
}
