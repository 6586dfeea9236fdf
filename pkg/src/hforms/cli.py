"""Command-line interface.

Results go to stdout as JSON (default) or CSV; logs go to stderr. Exit codes:
0 on success, 1 on input errors or golden mismatches, 2 when a search budget is
exhausted or a verdict stays undecided.
"""

import csv
import io
import json
import sys
from dataclasses import dataclass
from enum import StrEnum
from functools import wraps
from math import gcd
from pathlib import Path
from typing import Annotated, Any

import typer
from loguru import logger
from pydantic import ValidationError

from .config import SearchConfig, get_config
from .construct import (
    RECIPES,
    ConstructionRecipe,
    compose_recipe,
    iterated_laurent_recipe,
    layered_recipe,
    norm_form,
    norm_form_recipe,
    power_recipe,
    prime_lift_recipe,
    tensor_lift_recipe,
)
from .errors import FormSpecError, HFormsError, SearchBudgetExceeded
from .forms import DiagonalForm, PolyForm
from .gf import FieldDescriptor, make_field, prime_power, prime_powers
from .invariants import check_orzech_dim3, level, u_diag, universality_threshold, waring_number
from .isotropy import is_isotropic
from .models import IsotropyVerdict, Verdict
from .parsing import field_element, parse_coeff_list, parse_diagonal, parse_poly, parse_valued, poly_over
from .valued import (
    ValuedCoefficient,
    ValuedDiagonalForm,
    ValuedFieldDescriptor,
    bound_calculators,
    is_isotropic_valued_diagonal,
    residue_decomposition,
    truncated_padic_oracle,
    u_diag_springer,
)
from .verify.golden_manager import GoldenManager
from .verify.storage import ResultStore

LOG_FORMAT = "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | {name}:{function}:{line} - {message}"

TABLE_COLUMNS = ("q", "d", "gcd", "s_d", "u_diag", "waring", "kneser_bound")

app = typer.Typer(
    name="hforms",
    help="Levels, u-invariants and isotropy of forms of higher degree.",
    no_args_is_help=True,
    add_completion=False,
)


class OutputFormat(StrEnum):
    JSON = "json"
    CSV = "csv"


class Over(StrEnum):
    FINITE = "finite"
    PADIC = "padic"
    LAURENT = "laurent"
    CLOSED = "closed"


@dataclass
class CliState:
    config: SearchConfig
    fmt: OutputFormat = OutputFormat.JSON
    output: Path | None = None


def configure_logging(verbose: bool) -> None:
    logger.remove()
    logger.add(sys.stderr, format=LOG_FORMAT, level="DEBUG" if verbose else "WARNING")


def _cell(value: Any) -> Any:
    if isinstance(value, (list, dict)):
        return json.dumps(value, separators=(",", ":"))
    return "" if value is None else value


def render(payload: dict | list[dict], fmt: OutputFormat) -> str:
    """Indented JSON, or CSV with one row per record."""
    if fmt == OutputFormat.JSON:
        return json.dumps(payload, indent=2, default=str)
    rows = payload if isinstance(payload, list) else [payload]
    fieldnames: list[str] = []
    for row in rows:
        fieldnames.extend(k for k in row if k not in fieldnames)
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _cell(v) for k, v in row.items()})
    return buffer.getvalue().rstrip("\n")


def emit(ctx: typer.Context, payload: dict | list[dict]) -> None:
    state: CliState = ctx.obj
    text = render(payload, state.fmt)
    typer.echo(text)
    if state.output is not None:
        ResultStore(state.output).write(text)


def guarded(func):
    """Map library errors onto exit codes with a JSON error body."""

    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except SearchBudgetExceeded as e:
            logger.warning(str(e))
            typer.echo(json.dumps({"error": str(e), "budget_exhausted": True}))
            raise typer.Exit(2) from e
        except (HFormsError, ValidationError) as e:
            logger.debug(f"{func.__name__} failed: {e}")
            typer.echo(json.dumps({"error": str(e)}))
            raise typer.Exit(1) from e

    return wrapper


def parse_range(text: str) -> range:
    """``A..B`` (inclusive) or a single integer."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return range(int(lo), int(hi) + 1)
        return range(int(text), int(text) + 1)
    except ValueError:
        raise FormSpecError(text, "expected A..B or an integer") from None


def _state(ctx: typer.Context) -> CliState:
    return ctx.obj


def _field(ctx: typer.Context, p: int, f: int) -> FieldDescriptor:
    return make_field(p, f, budget=_state(ctx).config.table_budget)


def _verdict_payload(verdict: IsotropyVerdict) -> dict[str, Any]:
    return verdict.model_dump(mode="json")


def _exit_if_undecided(verdict: IsotropyVerdict) -> None:
    if verdict.status == Verdict.UNDECIDED:
        raise typer.Exit(2)


def _valued_field(
    ctx: typer.Context, over: Over, p: int, f: int, e: int, layers: int
) -> ValuedFieldDescriptor | FieldDescriptor:
    if over == Over.FINITE:
        return _field(ctx, p, f)
    if over == Over.PADIC:
        return ValuedFieldDescriptor.padic(p, f, e, budget=_state(ctx).config.table_budget)
    if over == Over.LAURENT:
        return ValuedFieldDescriptor.laurent(_field(ctx, p, f), layers)
    return ValuedFieldDescriptor.laurent(None, layers)


P = Annotated[int, typer.Option("--p", help="Prime characteristic")]
F_DEG = Annotated[int, typer.Option("--f", help="Extension degree over F_p")]
D = Annotated[int, typer.Option("--d", help="Degree of the forms")]


@app.callback()
def main_options(
    ctx: typer.Context,
    fmt: Annotated[OutputFormat, typer.Option("--format", help="Output format")] = OutputFormat.JSON,
    budget_evals: Annotated[int | None, typer.Option("--budget-evals", help="Evaluation budget")] = None,
    output: Annotated[Path | None, typer.Option("--output", help="Also write the result to this file")] = None,
    verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Debug logging on stderr")] = False,
):
    configure_logging(verbose)
    config = get_config()
    if budget_evals is not None:
        config = config.model_copy(update={"budget_evals": budget_evals})
    ctx.obj = CliState(config=config, fmt=fmt, output=output)


@app.command("level")
@guarded
def cmd_level(ctx: typer.Context, p: P, d: D, f: F_DEG = 1):
    """d-th level s_d(F_q) with a witness -1 = x_1^d + ... + x_s^d."""
    report = level(_field(ctx, p, f), d)
    emit(
        ctx,
        {"field": report.field, "d": d, "s": report.value, "witness": report.witness, "bound_used": report.bound_used},
    )


@app.command("udiag")
@guarded
def cmd_udiag(
    ctx: typer.Context,
    d: D,
    p: Annotated[int, typer.Option("--p", help="Prime characteristic")] = 0,
    f: F_DEG = 1,
    e: Annotated[int, typer.Option("--e", help="Ramification index (p-adic)")] = 1,
    over: Annotated[Over, typer.Option("--over", help="Field kind")] = Over.FINITE,
    layers: Annotated[int, typer.Option("--layers", help="Laurent layers")] = 1,
    threshold: Annotated[bool, typer.Option("--threshold", help="Also compute the universality threshold")] = False,
):
    """Diagonal u-invariant over F_q, or over a p-adic or Laurent field via Springer's theorem."""
    config = _state(ctx).config
    K = _valued_field(ctx, over, p, f, e, layers)
    if isinstance(K, FieldDescriptor):
        report = u_diag(K, d, config)
    else:
        report = u_diag_springer(K, d, config)
    payload = {
        "field": report.field,
        "d": d,
        "u_diag": report.value,
        "witness": report.witness,
        "bound_used": report.bound_used,
        "details": report.details,
    }
    if threshold and isinstance(K, FieldDescriptor):
        payload["universality_threshold"] = universality_threshold(K, d, config).value
    emit(ctx, payload)


@app.command("waring")
@guarded
def cmd_waring(ctx: typer.Context, p: P, d: D, f: F_DEG = 1):
    """Waring number of F_q for d-th powers."""
    report = waring_number(_field(ctx, p, f), d)
    emit(ctx, {"field": report.field, "d": d, "waring": report.value, "witness": report.witness, **report.details})


@app.command("orzech")
@guarded
def cmd_orzech(ctx: typer.Context, p: P, d: D, f: F_DEG = 1):
    """Search for an anisotropic ternary diagonal form of degree d."""
    emit(ctx, check_orzech_dim3(_field(ctx, p, f), d, _state(ctx).config).model_dump())


@app.command("isotropy")
@guarded
def cmd_isotropy(
    ctx: typer.Context,
    p: P,
    d: Annotated[int, typer.Option("--d", help="Degree (diagonal forms)")] = 0,
    f: F_DEG = 1,
    coeffs: Annotated[str | None, typer.Option("--coeffs", help="Diagonal coefficients a1,a2,...")] = None,
    poly: Annotated[str | None, typer.Option("--poly", help="Polynomial c*x1^e1*x2^e2 + ...")] = None,
    n: Annotated[int | None, typer.Option("--n", help="Number of variables of --poly")] = None,
):
    """Decide isotropy of a diagonal or general form over F_q."""
    F = _field(ctx, p, f)
    phi = _form_option(F, d, coeffs, poly, n)
    verdict = is_isotropic(F, phi, _state(ctx).config)
    emit(ctx, {"field": F.name, "d": phi.d, "dim": phi.dim, **_verdict_payload(verdict)})
    _exit_if_undecided(verdict)


def _form_option(F: FieldDescriptor, d: int, coeffs: str | None, poly: str | None, n: int | None):
    if (coeffs is None) == (poly is None):
        raise FormSpecError(coeffs or poly or "", "give exactly one of --coeffs and --poly")
    if coeffs is not None:
        tagged, _ = parse_coeff_list(coeffs)
        d = d or tagged
        if not d:
            raise FormSpecError(coeffs, "a diagonal form needs --d")
        return parse_diagonal(coeffs, d, F)
    phi = poly_over(parse_poly(poly, n), F, poly)
    if d and d != phi.d:
        raise FormSpecError(poly, f"has degree {phi.d}, not {d}")
    return phi


@app.command("padic")
@guarded
def cmd_padic(
    ctx: typer.Context,
    p: P,
    d: D,
    coeffs: Annotated[str, typer.Option("--coeffs", help="Valued coefficients u@v or u@(v1,...,vn)")],
    f: F_DEG = 1,
    e: Annotated[int, typer.Option("--e", help="Ramification index")] = 1,
    laurent: Annotated[bool, typer.Option("--laurent", help="Read valuations over F_q((t_1))...((t_n))")] = False,
    oracle: Annotated[bool, typer.Option("--oracle", help="Cross-check with the truncated mod p^K search")] = False,
):
    """Decide isotropy of a valued diagonal form by its residue forms."""
    F = _field(ctx, p, f)
    raw = parse_valued(coeffs, d)
    phi = ValuedDiagonalForm(
        d=d,
        coeffs=tuple(ValuedCoefficient(_unit(F, c.unit, coeffs), c.val) for c in raw.coeffs),
    )
    config = _state(ctx).config
    if laurent:
        K = ValuedFieldDescriptor.laurent(F, phi.layers)
    else:
        K = ValuedFieldDescriptor.padic(p, f, e, budget=config.table_budget)
    verdict = is_isotropic_valued_diagonal(phi, K, config)
    payload = {
        "field": K.name,
        "d": d,
        "dim": phi.dim,
        **_verdict_payload(verdict),
        "residue_forms": {",".join(map(str, key)): str(form) for key, form in residue_decomposition(phi, K).items()},
    }
    if oracle:
        payload["oracle_isotropic"] = truncated_padic_oracle(phi, K, config)
    emit(ctx, payload)
    _exit_if_undecided(verdict)


def _unit(F: FieldDescriptor, c: int, spec: str) -> int:
    unit = field_element(F, c, spec)
    if unit == 0:
        raise FormSpecError(spec, f"unit {c} vanishes in {F.name}")
    return unit


@app.command("bounds")
@guarded
def cmd_bounds(
    ctx: typer.Context,
    d: D,
    p: Annotated[int, typer.Option("--p", help="Prime characteristic")] = 0,
    f: F_DEG = 1,
    e: Annotated[int, typer.Option("--e", help="Ramification index (p-adic)")] = 1,
    over: Annotated[Over, typer.Option("--over", help="Field kind")] = Over.PADIC,
    layers: Annotated[int, typer.Option("--layers", help="Laurent layers")] = 1,
):
    """Labelled upper bounds on u_diag with the tightest applicable one marked."""
    table = bound_calculators(_valued_field(ctx, over, p, f, e, layers), d)
    if _state(ctx).fmt == OutputFormat.CSV:
        emit(ctx, [{"field": table.field, "d": d, **entry.model_dump()} for entry in table.entries])
    else:
        emit(ctx, table.model_dump())


def table_row(F: FieldDescriptor, d: int, config: SearchConfig, columns: tuple[str, ...] = TABLE_COLUMNS) -> dict:
    """One (q, d) cell with the same values the single-query commands report."""
    row: dict[str, Any] = {"q": F.q, "d": d}
    if "gcd" in columns or "kneser_bound" in columns:
        row["gcd"] = gcd(d, F.order)
    if "s_d" in columns:
        row["s_d"] = level(F, d).value
    if "u_diag" in columns:
        row["u_diag"] = u_diag(F, d, config).value
    if "waring" in columns:
        row["waring"] = waring_number(F, d).value
    if "kneser_bound" in columns:
        row["kneser_bound"] = row["gcd"]
    return {k: row[k] for k in columns if k in row}


@app.command("table")
@guarded
def cmd_table(
    ctx: typer.Context,
    d: Annotated[str, typer.Option("--d", help="Degree or range A..B")],
    q_range: Annotated[str, typer.Option("--q-range", help="Field sizes A..B (prime powers only)")] = "2..64",
    columns: Annotated[str, typer.Option("--columns", help="Comma-separated columns")] = ",".join(TABLE_COLUMNS),
):
    """Invariant table over every prime power q in range, one row per (q, d)."""
    selected = tuple(c.strip() for c in columns.split(",") if c.strip())
    unknown = [c for c in selected if c not in TABLE_COLUMNS]
    if unknown:
        raise FormSpecError(columns, f"unknown columns {unknown}")
    config = _state(ctx).config
    degrees = parse_range(d)
    qs = parse_range(q_range)
    rows = []
    for q in prime_powers(qs.start, qs.stop - 1):
        p, f = prime_power(q)
        F = _field(ctx, p, f)
        for deg in degrees:
            rows.append(table_row(F, deg, config, selected))
    logger.info(f"Table with {len(rows)} rows")
    emit(ctx, rows)


@app.command("construct")
@guarded
def cmd_construct(
    ctx: typer.Context,
    recipe: Annotated[str, typer.Argument(help="tensor-lift, prime-lift, norm-form, compose, power, iterated-laurent or layered")],
    p: Annotated[int, typer.Option("--p", help="Prime characteristic")] = 0,
    f: F_DEG = 1,
    d: Annotated[int, typer.Option("--d", help="Degree")] = 0,
    coeffs: Annotated[str | None, typer.Option("--coeffs", help="Diagonal coefficients")] = None,
    poly: Annotated[str | None, typer.Option("--poly", help="Polynomial form")] = None,
    blocks: Annotated[str | None, typer.Option("--blocks", help="Layered blocks separated by ';'")] = None,
    m: Annotated[int, typer.Option("--m", help="Exponent for power")] = 2,
    n: Annotated[int, typer.Option("--n", help="Laurent layers")] = 1,
    closed: Annotated[bool, typer.Option("--closed", help="Algebraically closed residue field")] = False,
    norm: Annotated[bool, typer.Option("--norm", help="Use the norm form of degree d as input")] = False,
):
    """Build an explicit anisotropic form together with its certificate."""
    config = _state(ctx).config
    result = _build(ctx, recipe, p, f, d, coeffs, poly, blocks, m, n, closed, norm, config)
    emit(ctx, result.to_dict())
    if result.certificate is not None and result.certificate.status == Verdict.UNDECIDED:
        raise typer.Exit(2)


def _build(ctx, recipe, p, f, d, coeffs, poly, blocks, m, n, closed, norm, config) -> ConstructionRecipe:
    if recipe not in RECIPES:
        raise FormSpecError(recipe, f"unknown recipe; choose from {sorted(RECIPES)}")
    if recipe == "iterated-laurent":
        base = None if closed else _field(ctx, p, f)
        residue = parse_diagonal(coeffs, d, base) if coeffs else None
        return iterated_laurent_recipe(base, d, n, residue, config)
    if recipe == "tensor-lift":
        base = None if closed else _field(ctx, p, f)
        if coeffs is None:
            raise FormSpecError("", "tensor-lift needs --coeffs")
        return tensor_lift_recipe(parse_diagonal(coeffs, d, base), base, config)
    F = _field(ctx, p, f)
    if recipe == "norm-form":
        return norm_form_recipe(F, d, config)
    if recipe == "layered":
        if not blocks:
            raise FormSpecError("", "layered needs --blocks")
        parts = [b.strip() for b in blocks.split(";") if b.strip()]
        return layered_recipe([_block(F, d, part) for part in parts], F, config)
    if recipe == "prime-lift":
        if f != 1:
            raise FormSpecError(recipe, "prime-lift works over F_p")
        return prime_lift_recipe(_integer_form(F, d, coeffs, poly, norm, config), p, config)
    if recipe in ("compose", "power"):
        phi = _form_option(F, d, coeffs, poly, None)
        if recipe == "compose":
            return compose_recipe(phi, F, config)
        return power_recipe(phi, m, F, config)


def _block(F: FieldDescriptor, d: int, spec: str) -> DiagonalForm | PolyForm:
    if "x" in spec:
        return poly_over(parse_poly(spec), F, spec)
    return parse_diagonal(spec, d, F)


def _integer_form(F, d, coeffs, poly, norm, config) -> DiagonalForm | PolyForm:
    """Integer-coefficient input for a lift to Q."""
    if norm:
        return norm_form(F, d, config)
    if coeffs is not None:
        _, values = parse_coeff_list(coeffs)
        return DiagonalForm(d=d, coeffs=tuple(values))
    if poly is not None:
        return parse_poly(poly)
    raise FormSpecError("", "prime-lift needs --coeffs, --poly or --norm")


@app.command("verify")
@guarded
def cmd_verify(
    ctx: typer.Context,
    scan: Annotated[bool, typer.Option("--scan/--no-scan", help="Include the ternary-form scan over q <= 64")] = True,
):
    """Recompute the golden table; exits 1 on any mismatch."""
    report = GoldenManager(config=_state(ctx).config).run(include_scan=scan)
    if _state(ctx).fmt == OutputFormat.CSV:
        emit(ctx, report.rows())
    else:
        emit(ctx, report.model_dump(mode="json"))
    if not report.passed:
        raise typer.Exit(1)


def main():
    app()


if __name__ == "__main__":
    main()
