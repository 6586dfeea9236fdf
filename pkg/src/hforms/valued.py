"""Diagonal forms over Henselian discretely valued fields.

Coefficients are stored exactly as a residue unit together with a valuation
(one integer per Laurent layer). When the residue characteristic does not
divide d, isotropy and u_diag reduce to the residue field by Springer's theorem.
"""

from dataclasses import dataclass, field
from enum import StrEnum
from functools import lru_cache
from itertools import product
from math import gcd

import numpy as np
from loguru import logger
from sympy import multiplicity

from .config import SearchConfig, get_config
from .errors import (
    DegreeMismatchError,
    DimensionMismatchError,
    HFormsError,
    HypothesisError,
    SearchBudgetExceeded,
    WildCaseError,
)
from .forms import DiagonalForm
from .gf import FieldDescriptor, dth_power_mask, make_field
from .invariants import level, u_diag
from .isotropy import is_isotropic_diagonal
from .models import BoundEntry, BoundTable, Extended, InvariantReport, IsotropyVerdict, Verdict, ext_mul

ClassKey = tuple[int, ...]


class ValuedKind(StrEnum):
    PADIC = "p-adic"
    LAURENT = "laurent-tower"
    FORMAL = "formal"


@dataclass(frozen=True)
class ValuedFieldDescriptor:
    """A Henselian field described by its residue field and value group.

    ``layers`` is the rank of the value group (1 for p-adic fields, n for
    k((t_1))...((t_n))), so |Gamma / d Gamma| = d ** layers. A ``residue`` of
    None stands for an algebraically closed residue field of characteristic
    ``residue_char`` (or, for the formal kind, one known only through
    ``residue_udiag``).
    """

    kind: ValuedKind
    layers: int = 1
    residue: FieldDescriptor | None = None
    residue_char: int = 0
    e: int = 1
    residue_udiag: Extended | None = None

    @classmethod
    def padic(cls, p: int, f: int = 1, e: int = 1, budget: int | None = None) -> "ValuedFieldDescriptor":
        """A finite extension of Q_p with residue field F_{p^f} and ramification index e.

        ``budget`` caps the residue field size like ``make_field``.
        """
        if e < 1:
            raise HFormsError(f"Ramification index must be positive, got {e}")
        return cls(kind=ValuedKind.PADIC, residue=make_field(p, f, budget=budget), residue_char=p, e=e)

    @classmethod
    def laurent(cls, base: FieldDescriptor | None, layers: int = 1, residue_char: int = 0) -> "ValuedFieldDescriptor":
        """k((t_1))...((t_n)); ``base=None`` marks an algebraically closed k."""
        if layers < 1:
            raise HFormsError(f"A Laurent tower needs at least one layer, got {layers}")
        char = base.p if base is not None else residue_char
        return cls(kind=ValuedKind.LAURENT, layers=layers, residue=base, residue_char=char)

    @classmethod
    def formal(cls, residue_udiag: Extended, rank: int = 1, residue_char: int = 0) -> "ValuedFieldDescriptor":
        return cls(kind=ValuedKind.FORMAL, layers=rank, residue_char=residue_char, residue_udiag=residue_udiag)

    @property
    def p(self) -> int:
        return self.residue_char

    @property
    def algebraically_closed(self) -> bool:
        return self.kind == ValuedKind.LAURENT and self.residue is None

    @property
    def name(self) -> str:
        if self.kind == ValuedKind.PADIC:
            base = f"Q_{self.residue.q}"
            return base if self.e == 1 else f"{base}(e={self.e})"
        if self.kind == ValuedKind.LAURENT:
            base = self.residue.name if self.residue is not None else "kbar"
            if self.layers == 1:
                return f"{base}((t))"
            return base + "".join(f"((t{i}))" for i in range(1, self.layers + 1))
        return f"formal(u={self.residue_udiag}, rank={self.layers})"

    def gamma_quotient(self, d: int) -> int:
        """|Gamma / d Gamma|."""
        return d**self.layers

    def check_tame(self, d: int) -> None:
        if self.residue_char and d % self.residue_char == 0:
            raise WildCaseError(self.residue_char, d)


@dataclass(frozen=True)
class ValuedCoefficient:
    unit: int
    val: tuple[int, ...]

    def __post_init__(self):
        val = (self.val,) if isinstance(self.val, int) else tuple(self.val)
        object.__setattr__(self, "val", val)
        if self.unit == 0:
            raise HFormsError("Valued coefficients need a nonzero unit")

    def to_text(self) -> str:
        if len(self.val) == 1:
            return f"{self.unit}@{self.val[0]}"
        return f"{self.unit}@(" + ",".join(str(v) for v in self.val) + ")"


@dataclass(frozen=True)
class ValuedDiagonalForm:
    """sum_i u_i * pi^{v_i} * x_i^d with exact unit residues and raw valuations."""

    d: int
    coeffs: tuple[ValuedCoefficient, ...] = field(default_factory=tuple)

    def __post_init__(self):
        coeffs = tuple(c if isinstance(c, ValuedCoefficient) else ValuedCoefficient(*c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if len({len(c.val) for c in coeffs}) > 1:
            raise HFormsError("All coefficients must carry one valuation per layer")

    @classmethod
    def from_residue(cls, phi: DiagonalForm, layers: int = 1) -> "ValuedDiagonalForm":
        """A unit form: every coefficient of valuation zero."""
        return cls(d=phi.d, coeffs=tuple(ValuedCoefficient(a, (0,) * layers) for a in phi.coeffs))

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    @property
    def layers(self) -> int:
        return len(self.coeffs[0].val) if self.coeffs else 0

    def orthogonal_sum(self, other: "ValuedDiagonalForm") -> "ValuedDiagonalForm":
        if self.d != other.d:
            raise DegreeMismatchError(self.d, other.d)
        return ValuedDiagonalForm(d=self.d, coeffs=self.coeffs + other.coeffs)

    def tensor(self, other: "ValuedDiagonalForm", F: FieldDescriptor | None) -> "ValuedDiagonalForm":
        """Row-major products: units multiply in F, valuations add.

        With an algebraically closed residue field (``F`` None) every unit is a
        d-th power and products are normalized to 1.
        """
        if self.d != other.d:
            raise DegreeMismatchError(self.d, other.d)
        coeffs = []
        for a in self.coeffs:
            for b in other.coeffs:
                unit = F.mul(a.unit, b.unit) if F is not None else 1
                coeffs.append(ValuedCoefficient(unit, tuple(x + y for x, y in zip(a.val, b.val, strict=True))))
        return ValuedDiagonalForm(d=self.d, coeffs=tuple(coeffs))

    def classes(self) -> dict[ClassKey, list[int]]:
        """Positions grouped by valuation mod d, keys ascending."""
        groups: dict[ClassKey, list[int]] = {}
        for i, c in enumerate(self.coeffs):
            groups.setdefault(tuple(v % self.d for v in c.val), []).append(i)
        return dict(sorted(groups.items()))

    def canonical(self) -> "ValuedDiagonalForm":
        """Same form up to isometry with valuations reduced mod d."""
        return ValuedDiagonalForm(
            d=self.d,
            coeffs=tuple(ValuedCoefficient(c.unit, tuple(v % self.d for v in c.val)) for c in self.coeffs),
        )

    def to_text(self) -> str:
        return ",".join(c.to_text() for c in self.coeffs)

    def __str__(self) -> str:
        return "<" + ", ".join(c.to_text() for c in self.coeffs) + ">"


def _check_shape(phi: ValuedDiagonalForm, K: ValuedFieldDescriptor) -> None:
    if phi.coeffs and phi.layers != K.layers:
        raise DimensionMismatchError(K.layers, phi.layers)
    if K.residue is not None:
        for c in phi.coeffs:
            if not 0 < c.unit < K.residue.q:
                raise HFormsError(f"Unit {c.unit} is not a nonzero element of {K.residue.name}")


def group_by_class(phi: ValuedDiagonalForm, K: ValuedFieldDescriptor) -> dict[ClassKey, DiagonalForm]:
    """Residue forms phi_gamma without the tameness check."""
    _check_shape(phi, K)
    return {
        key: DiagonalForm(d=phi.d, coeffs=tuple(phi.coeffs[i].unit for i in positions))
        for key, positions in phi.classes().items()
    }


def residue_decomposition(phi: ValuedDiagonalForm, K: ValuedFieldDescriptor) -> dict[ClassKey, DiagonalForm]:
    """Map each class gamma in Gamma/d Gamma to the residue form of its coefficients.

    Raises:
        WildCaseError: If the residue characteristic divides d.
    """
    K.check_tame(phi.d)
    return group_by_class(phi, K)


def residue_verdict(K: ValuedFieldDescriptor, form: DiagonalForm, config: SearchConfig | None = None) -> IsotropyVerdict:
    """Isotropy of a residue form over the residue field of ``K``."""
    if K.kind == ValuedKind.FORMAL:
        raise HypothesisError("A formal descriptor only carries the residue u_diag; it cannot decide isotropy")
    if K.residue is None:
        # Over an algebraically closed field every binary form a x^d + b y^d has a zero.
        status = Verdict.ISOTROPIC if form.dim >= 2 else Verdict.ANISOTROPIC
        return IsotropyVerdict(status=status, note="algebraically closed residue field")
    return is_isotropic_diagonal(K.residue, form.d, form.coeffs, config)


def decide_by_classes(
    phi: ValuedDiagonalForm,
    K: ValuedFieldDescriptor,
    groups: dict[ClassKey, DiagonalForm],
    config: SearchConfig | None = None,
) -> IsotropyVerdict:
    """Anisotropic iff every residue form is; the witness is a residue vector."""
    positions = phi.classes()
    cost, undecided = 0, False
    for key, form in groups.items():
        verdict = residue_verdict(K, form, config)
        cost += verdict.search_cost
        if verdict.status == Verdict.ISOTROPIC:
            witness = None
            if verdict.witness is not None:
                witness = [0] * phi.dim
                for i, x in zip(positions[key], verdict.witness, strict=True):
                    witness[i] = x
            logger.debug(f"Residue form of class {key} over {K.name} is isotropic")
            return IsotropyVerdict(
                status=Verdict.ISOTROPIC,
                witness=witness,
                exact_witness=False,
                search_cost=cost,
                note=f"residue form of class {list(key)} is isotropic and lifts by Hensel's lemma",
            )
        undecided = undecided or verdict.status == Verdict.UNDECIDED
    status = Verdict.UNDECIDED if undecided else Verdict.ANISOTROPIC
    return IsotropyVerdict(status=status, search_cost=cost, note="budget" if undecided else None)


def is_isotropic_valued_diagonal(
    phi: ValuedDiagonalForm, K: ValuedFieldDescriptor, config: SearchConfig | None = None
) -> IsotropyVerdict:
    """Springer decision for a diagonal form over a tame Henselian field.

    Raises:
        WildCaseError: If the residue characteristic divides d.
    """
    return decide_by_classes(phi, K, residue_decomposition(phi, K), config)


def springer_witness(residue_form: list[int], d: int, layers: int) -> ValuedDiagonalForm:
    """<1, pi, ..., pi^{d-1}>^{(x layers)} tensored with an anisotropic residue form."""
    return ValuedDiagonalForm(
        d=d,
        coeffs=tuple(
            ValuedCoefficient(a, vec) for vec in product(range(d), repeat=layers) for a in residue_form
        ),
    )


def u_diag_springer(K: ValuedFieldDescriptor, d: int, config: SearchConfig | None = None) -> InvariantReport:
    """u_diag(d, K) = |Gamma / d Gamma| * u_diag(d, residue field).

    Raises:
        WildCaseError: If the residue characteristic divides d.
    """
    K.check_tame(d)
    gamma = K.gamma_quotient(d)
    residue_witness: list[int] | None = None
    bound: Extended | None = None
    if K.kind == ValuedKind.FORMAL:
        residue_value = K.residue_udiag
    elif K.residue is None:
        residue_value, residue_witness, bound = 1, [1], gamma
    else:
        report = u_diag(K.residue, d, config)
        residue_value, residue_witness = report.value, report.witness
        bound = gamma * gcd(d, K.residue.order)
    value = ext_mul(gamma, residue_value)
    witness = None
    if residue_witness is not None:
        witness = [c.to_text() for c in springer_witness(residue_witness, d, K.layers).coeffs]
    logger.info(f"u_diag({d}, {K.name}) = {gamma} * {residue_value} = {value}")
    return InvariantReport(
        invariant="u_diag",
        field=K.name,
        d=d,
        value=value,
        witness=witness,
        bound_used=bound,
        details={"residue_u_diag": residue_value, "gamma_quotient": gamma},
    )


def level_padic(p: int, f: int, d: int) -> InvariantReport:
    """s_d of the unramified extension of Q_p of degree f, equal to s_d(F_q) by Hensel."""
    F = make_field(p, f)
    if d % 2 == 0 and d % p == 0:
        raise WildCaseError(p, d)
    report = level(F, d)
    return report.model_copy(update={"field": f"Q_{F.q}", "details": {**report.details, "residue_field": F.name}})


def m_d(p: int, d: int, f: int = 1, e: int = 1) -> int:
    """Least m >= 1 such that -m is a d-th power in the ring of integers.

    Writing -m = p^k * u with u a unit, this holds iff d | k and the residue of u
    is a d-th power; the scan ends by m = p - 1 since -(p - 1) = 1 mod p.

    Raises:
        HypothesisError: If d is odd, or the extension is ramified (e > 1), where the
            residue of p / pi^e is not determined by p, f and e.
        WildCaseError: If p divides d.
    """
    if d % 2:
        raise HypothesisError(f"m_d is defined for even d, got {d}")
    if e > 1:
        raise HypothesisError(f"m_d is only determined for unramified extensions, got e = {e}")
    if d % p == 0:
        raise WildCaseError(p, d)
    powers = dth_power_mask(make_field(p, f), d)
    m = 1
    while True:
        k = multiplicity(p, m)
        if k % d == 0 and powers[(-(m // p**k)) % p]:
            return m
        m += 1


def _ord(p: int, n: int) -> int:
    return int(multiplicity(p, n))


def finite_field_bounds(F: FieldDescriptor, d: int) -> BoundTable:
    d_star = gcd(d, F.order)
    minus_one_power = bool(dth_power_mask(F, d)[F.neg(1)])
    entries = [
        BoundEntry(name="kneser", formula="gcd(d, q-1)", value=d_star),
        BoundEntry(name="chevalley", formula="d", value=d, target="u", note="Chevalley-Warning: u(d, F_q) <= d"),
        BoundEntry(
            name="orzech",
            formula="d - 1",
            value=d - 1,
            applicable=minus_one_power and d >= 4,
            note=None if minus_one_power else "-1 is not a d-th power",
        ),
        BoundEntry(
            name="smith",
            formula="2 when q > (d*-1)^4",
            value=2,
            applicable=F.q > (d_star - 1) ** 4,
        ),
        BoundEntry(name="tornheim", formula="d", value=d, target="waring"),
        BoundEntry(
            name="two_powers",
            formula="2 when q > (d*-1)^2",
            value=2,
            target="waring",
            applicable=F.q > (d_star - 1) ** 2,
        ),
    ]
    return BoundTable(field=F.name, d=d, entries=entries)


def padic_bounds(K: ValuedFieldDescriptor, d: int) -> BoundTable:
    """Upper bounds on u_diag(d, K) for a finite extension of Q_p of degree n = e f."""
    p, q, e = K.p, K.residue.q, K.e
    n = e * K.residue.f
    d_star = gcd(d, q - 1)
    zp = p ** _ord(p, d)
    units = d_star * zp**e
    tame = d % p != 0
    entries = [
        BoundEntry(name="kneser", formula="d gcd(d, q-1) |Z_p/dZ_p|^e", value=d * units),
    ]

    if tame:
        w, w_note = d_star, None
    elif e == 1:
        # An unramified extension holds -1 but no other p-power root of unity.
        w, w_note = d_star * (gcd(d, 2) if p == 2 else 1), None
    else:
        w, w_note = None, "p-power roots of unity in a ramified extension are not determined"
    entries.append(
        BoundEntry(
            name="koblitz",
            formula="d p^{ord_p d} w",
            value=None if w is None else d * zp * w,
            applicable=w is not None,
            note=w_note,
        )
    )

    if p == 2:
        alemu = 4 * n * d * d - n * d + 1
        entries.append(BoundEntry(name="alemu", formula="4nd^2 - nd + 1", value=alemu, strict=True))
    else:
        alemu = max(3 * n * d * d - n * d + 1, 2 * d**3 - d * d)
        entries.append(
            BoundEntry(
                name="alemu",
                formula="max(3nd^2 - nd + 1, 2d^3 - d^2)",
                value=alemu,
                strict=True,
                applicable=not tame,
                note=None if not tame else "stated for p | d",
            )
        )

    two_power = d & (d - 1) == 0
    joly_ok = n == 1 or tame
    entries.append(
        BoundEntry(
            name="joly",
            formula="2d^2 if p = 2 and d = 2^r else d^2",
            value=2 * d * d if p == 2 and two_power else d * d,
            applicable=joly_ok,
            note=None if joly_ok else "stated for Q_p, or p not dividing d",
        )
    )

    unit_note = None
    if d % 2:
        unit_bound = d * units
        unit_formula = "d |R^x/R^xd|"
    elif tame and e == 1:
        unit_bound = (1 + m_d(p, d, K.residue.f)) * d * units
        unit_formula = "(1 + m_d) d |R^x/R^xd|"
    else:
        unit_bound = None
        unit_formula = "(1 + m_d) d |R^x/R^xd|"
        unit_note = "m_d needs p not dividing d" if not tame else "m_d is not determined for e > 1"
    entries.append(
        BoundEntry(
            name="unit_group",
            formula=unit_formula,
            value=unit_bound,
            applicable=unit_bound is not None,
            note=unit_note,
        )
    )
    entries.append(
        BoundEntry(
            name="unit_group_padic",
            formula=unit_formula.replace("|R^x/R^xd|", "gcd(d, q-1) |Z_p/dZ_p|^e"),
            value=unit_bound,
            applicable=unit_bound is not None,
        )
    )
    display_ok = d % 2 == 1 or tame
    entries.append(
        BoundEntry(
            name="unit_group_without_md",
            formula="d gcd(d, q-1) |Z_p/dZ_p|^e",
            value=d * units,
            applicable=display_ok,
            note=None if d % 2 else "without the (1 + m_d) factor this only holds for p not dividing d",
        )
    )
    if unit_bound is not None:
        entries.append(
            BoundEntry(
                name="min_kneser_unit_group",
                formula="min(|K^x/K^xd|, unit_group)",
                value=min(d * units, unit_bound),
            )
        )
    if tame:
        entries.append(
            BoundEntry(
                name="springer_kneser",
                formula="d gcd(d, q-1)",
                value=d * d_star,
                note="Springer with the Kneser bound on the residue field",
            )
        )
    return BoundTable(field=K.name, d=d, entries=entries)


def laurent_bounds(K: ValuedFieldDescriptor, d: int) -> BoundTable:
    gamma = K.gamma_quotient(d)
    n = K.layers
    if K.residue is None:
        residue_classes, tsen = 1, gamma
    else:
        residue_classes, tsen = gcd(d, K.residue.order), gamma * d
    entries = [
        BoundEntry(name="kneser", formula="d^n |k^x/k^xd|", value=gamma * residue_classes),
        BoundEntry(
            name="tsen_lang",
            formula="d^n over closed k, d^{n+1} over F_q",
            value=tsen,
            target="u",
        ),
        BoundEntry(
            name="function_field_lower",
            formula="d^n u_diag(d, k')",
            value=d**n,
            target="lower",
            note="lower bound for function fields of transcendence degree n",
        ),
    ]
    return BoundTable(field=K.name, d=d, entries=entries)


def bound_calculators(K: ValuedFieldDescriptor | FieldDescriptor, d: int) -> BoundTable:
    """Every applicable upper bound on u_diag(d, K) as a labelled table.

    Bounds whose hypotheses fail are kept with ``applicable`` False so the table
    shows why they were skipped.
    """
    if isinstance(K, FieldDescriptor):
        return finite_field_bounds(K, d)
    if K.kind == ValuedKind.PADIC:
        return padic_bounds(K, d)
    if K.kind == ValuedKind.LAURENT:
        return laurent_bounds(K, d)
    value = ext_mul(K.gamma_quotient(d), K.residue_udiag)
    return BoundTable(
        field=K.name,
        d=d,
        entries=[BoundEntry(name="springer", formula="d^rank u_diag(residue)", value=value)],
    )


# Truncated p-adic oracle: an independent check of the Springer decision by
# counting primitive solutions of sum a_i x_i^d = 0 mod p^K.

@lru_cache(maxsize=32)
def _power_images_mod(p: int, d: int, precision: int) -> tuple[np.ndarray, np.ndarray]:
    """Residues x^d mod p^K for units x and for non-units x."""
    N = p**precision
    xs = np.arange(N, dtype=np.int64)
    values = np.ones(N, dtype=np.int64)
    for _ in range(d):
        values = (values * xs) % N
    unit = xs % p != 0
    unit_images, other_images = np.unique(values[unit]), np.unique(values[~unit])
    # Shared between calls through the cache.
    unit_images.setflags(write=False)
    other_images.setflags(write=False)
    return unit_images, other_images


def _cyclic_or(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = a.size
    conv = np.fft.irfft(np.fft.rfft(a.astype(float)) * np.fft.rfft(b.astype(float)), n=n)
    return conv > 0.5


def oracle_precision(phi: ValuedDiagonalForm, config: SearchConfig | None = None) -> int:
    """Precision K used by the oracle: configured, or d + 1.

    Valuations reduced mod d spread over at most d - 1, so d + 1 exceeds the
    spread + 1 at which a primitive solution forces a residue zero.
    """
    config = config or get_config()
    if config.oracle_precision is not None:
        return config.oracle_precision
    return phi.d + 1


def truncated_padic_oracle(
    phi: ValuedDiagonalForm, K: ValuedFieldDescriptor, config: SearchConfig | None = None
) -> bool:
    """Whether sum u_i p^{v_i} x_i^d = 0 has a primitive solution mod p^K over Z_p.

    Valuations are reduced mod d and shifted to start at 0; a primitive solution
    modulo p^K with K > spread already forces a residue zero.

    Raises:
        SearchBudgetExceeded: If dim * p^K exceeds ``budget_evals``.
    """
    if K.kind != ValuedKind.PADIC or K.residue.f != 1 or K.e != 1:
        raise HypothesisError("The truncated oracle handles Q_p only")
    K.check_tame(phi.d)
    if phi.dim == 0:
        return False
    p, d = K.p, phi.d
    config = config or get_config()
    precision = oracle_precision(phi, config)
    N = p**precision
    if N * phi.dim > config.budget_evals:
        raise SearchBudgetExceeded(f"truncated oracle mod {p}^{precision}", config.budget_evals)
    reduced = [c.val[0] % d for c in phi.coeffs]
    low = min(reduced)
    unit_images, other_images = _power_images_mod(p, d, precision)

    s0 = np.zeros(N, dtype=bool)
    s0[0] = True
    s1 = np.zeros(N, dtype=bool)
    for c, v in zip(phi.coeffs, reduced, strict=True):
        a = c.unit * p ** (v - low) % N
        units = np.zeros(N, dtype=bool)
        units[(a * unit_images) % N] = True
        others = np.zeros(N, dtype=bool)
        others[(a * other_images) % N] = True
        s1 = _cyclic_or(s1, units | others) | _cyclic_or(s0, units)
        s0 = _cyclic_or(s0, others)
    return bool(s1[0])

