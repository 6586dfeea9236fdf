"""Text grammar for forms on the command line.

- diagonal: ``a1,a2,...`` or ``d:4 diag:1,1,1,1``
- valued: ``u@v`` or ``u@(v1,...,vn)``, comma separated
- polynomial: ``c*x1^e1*x2^e2 + ...`` (``-`` also separates terms)
"""

import re

from .errors import FormSpecError
from .forms import DiagonalForm, PolyForm
from .gf import FieldDescriptor
from .valued import ValuedCoefficient, ValuedDiagonalForm

_VALUED = re.compile(r"\s*(-?\d+)\s*@\s*(\(\s*-?\d+(?:\s*,\s*-?\d+)*\s*\)|-?\d+)\s*(,|$)")
_FACTOR = re.compile(r"x(\d+)(?:\^(\d+))?")
_TAGGED = re.compile(r"\s*d:(\d+)\s+diag:(.*)")


def field_element(F: FieldDescriptor, c: int, spec: str = "") -> int:
    """Encoding of an integer literal in F_q.

    Over a prime field integers are reduced mod p. Over an extension field a
    literal 0 <= c < q is taken as the packed element and ``-c`` as its negative.
    """
    if F.f == 1:
        return c % F.p
    if abs(c) >= F.q:
        raise FormSpecError(spec or str(c), f"{abs(c)} is not an element of {F.name}")
    return F.neg(-c) if c < 0 else c


def parse_coeff_list(spec: str) -> tuple[int | None, list[int]]:
    """Integers of a diagonal spec plus the degree when tagged ``d:<d> diag:``."""
    d = None
    body = spec
    if m := _TAGGED.fullmatch(spec):
        d, body = int(m.group(1)), m.group(2)
    try:
        values = [int(part) for part in body.split(",") if part.strip()]
    except ValueError:
        raise FormSpecError(spec, "expected comma-separated integers") from None
    if not values:
        raise FormSpecError(spec, "no coefficients")
    return d, values


def parse_diagonal(spec: str, d: int, F: FieldDescriptor | None = None) -> DiagonalForm:
    """A diagonal form; coefficients are mapped into F when one is given."""
    tagged, values = parse_coeff_list(spec)
    if tagged is not None and tagged != d:
        raise FormSpecError(spec, f"tagged degree {tagged} differs from --d {d}")
    if F is not None:
        values = [field_element(F, c, spec) for c in values]
    if 0 in values:
        raise FormSpecError(spec, f"coefficient {values.index(0) + 1} vanishes")
    return DiagonalForm(d=d, coeffs=tuple(values))


def parse_valued(spec: str, d: int) -> ValuedDiagonalForm:
    """Valued coefficients ``u@v`` or ``u@(v1,...,vn)``."""
    coeffs = []
    pos = 0
    text = spec.strip()
    while pos < len(text):
        m = _VALUED.match(text, pos)
        if not m or m.end() == pos:
            raise FormSpecError(spec, f"unexpected text at position {pos}")
        unit, val = int(m.group(1)), m.group(2)
        if val.startswith("("):
            vals = tuple(int(v) for v in val.strip("()").split(","))
        else:
            vals = (int(val),)
        if unit == 0:
            raise FormSpecError(spec, "units must be nonzero")
        coeffs.append(ValuedCoefficient(unit, vals))
        pos = m.end()
    if not coeffs:
        raise FormSpecError(spec, "no coefficients")
    if len({len(c.val) for c in coeffs}) > 1:
        raise FormSpecError(spec, "every coefficient needs the same number of valuations")
    return ValuedDiagonalForm(d=d, coeffs=tuple(coeffs))


def _split_terms(spec: str) -> list[tuple[int, str]]:
    text = spec.replace(" ", "")
    if not text:
        raise FormSpecError(spec, "empty polynomial")
    pieces = []
    sign, start = 1, 0
    if text[0] in "+-":
        sign, start = (-1 if text[0] == "-" else 1), 1
    buf = ""
    for ch in text[start:]:
        if ch in "+-":
            if not buf:
                raise FormSpecError(spec, "empty term")
            pieces.append((sign, buf))
            sign, buf = (-1 if ch == "-" else 1), ""
        else:
            buf += ch
    if not buf:
        raise FormSpecError(spec, "empty term")
    pieces.append((sign, buf))
    return pieces


def parse_poly(spec: str, n: int | None = None) -> PolyForm:
    """A homogeneous polynomial with integer coefficients.

    The number of variables is the largest index used unless ``n`` is given.
    """
    monomials: list[tuple[dict[int, int], int]] = []
    for sign, term in _split_terms(spec):
        coeff = 1
        powers: dict[int, int] = {}
        for factor in term.split("*"):
            if factor.isdigit():
                coeff *= int(factor)
            elif m := _FACTOR.fullmatch(factor):
                index = int(m.group(1))
                if index < 1:
                    raise FormSpecError(spec, "variables are numbered from x1")
                powers[index - 1] = powers.get(index - 1, 0) + int(m.group(2) or 1)
            else:
                raise FormSpecError(spec, f"cannot read factor '{factor}'")
        monomials.append((powers, sign * coeff))

    used = max((i + 1 for powers, _ in monomials for i in powers), default=0)
    n = used if n is None else n
    if used > n:
        raise FormSpecError(spec, f"uses x{used} but only {n} variables were declared")
    degrees = {sum(powers.values()) for powers, _ in monomials}
    if len(degrees) != 1:
        raise FormSpecError(spec, f"not homogeneous (degrees {sorted(degrees)})")
    terms: dict[tuple[int, ...], int] = {}
    for powers, c in monomials:
        exps = tuple(powers.get(i, 0) for i in range(n))
        terms[exps] = terms.get(exps, 0) + c
    return PolyForm(d=degrees.pop(), n=n, terms=terms)


def poly_over(phi: PolyForm, F: FieldDescriptor, spec: str = "") -> PolyForm:
    """Map integer coefficients into F with the literal convention of ``field_element``."""
    return PolyForm(
        d=phi.d, n=phi.n, terms={exps: field_element(F, c, spec) for exps, c in phi.terms.items()}
    )
