"""Command-line front end: evaluation, constant terms, corpus
verification, recurrence checks, and corpus inventory.

Exit codes: 0 success, 1 verification failure, 2 usage/parse/eval error.
"""
from __future__ import annotations

import sys
import time
from importlib import resources
from pathlib import Path

import click

from .corpus import CorpusError, load_corpus
from .dsl import ParseError, free_vars, parse
from .evaluate import EvalError, eval_expr, eval_sequence, harmonic_cy_coefficients
from .harness import Ranges, verify_all
from .laurent import CtSpec, LaurentParseError, ct_sequence, parse_laurent
from .theta import ThetaParseError, check_sequence, parse_theta, to_recurrence, twist_alternating

_KIND_CHOICES = ("member", "ghost", "ct", "closed", "conditional", "rec")


def _die(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(2)


def _default_corpus() -> Path:
    return Path(str(resources.files("cyid").joinpath("data/paper.cyid")))


@click.group()
def main() -> None:
    """Exact verification of binomial-sum, constant-term, and recurrence
    formulas for Calabi-Yau series coefficients."""


@main.command("eval")
@click.argument("expr_text", metavar="EXPR")
@click.option("--n", "n_single", type=int, default=None,
              help="Evaluate at one n.")
@click.option("--nmax", type=int, default=None,
              help="Evaluate at every n from 0 to NMAX.")
@click.option("--skip-singular", is_flag=True,
              help="Singular summands contribute 0 instead of failing.")
def cmd_eval(expr_text: str, n_single: int | None, nmax: int | None,
             skip_singular: bool) -> None:
    """Evaluate a formula exactly; prints `n<TAB>value` lines."""
    if (n_single is None) == (nmax is None):
        _die("give exactly one of --n or --nmax")
    try:
        expr = parse(expr_text)
    except ParseError as err:
        _die(str(err))
    extra = free_vars(expr) - {"n"}
    if extra:
        _die(f"expression has free variables besides n: {sorted(extra)}")
    try:
        if n_single is not None:
            if n_single < 0:
                _die("--n must be nonnegative")
            value = eval_expr(expr, {"n": n_single}, skip_singular=skip_singular)
            click.echo(f"{n_single}\t{value}")
        else:
            if nmax < 0:
                _die("--nmax must be nonnegative")
            for n, value in enumerate(
                    eval_sequence(expr, nmax, skip_singular=skip_singular)):
                click.echo(f"{n}\t{value}")
    except EvalError as err:
        _die(str(err))


@main.command("ct")
@click.argument("poly_text", metavar="POLY")
@click.option("--mult", type=int, required=True,
              help="Power multiplier M; the constant term of POLY^(M*n).")
@click.option("--nmax", type=int, default=4, show_default=True,
              help="Largest n to print.")
def cmd_ct(poly_text: str, mult: int, nmax: int) -> None:
    """Constant terms of POLY^(M*n); prints `n<TAB>value` lines."""
    if mult < 1:
        _die("--mult must be at least 1")
    if nmax < 0:
        _die("--nmax must be nonnegative")
    try:
        poly = parse_laurent(poly_text)
    except LaurentParseError as err:
        _die(str(err))
    for n, value in enumerate(ct_sequence(CtSpec(poly, mult), nmax)):
        click.echo(f"{n}\t{value}")


@main.command("verify")
@click.option("--corpus", "corpus_path", type=click.Path(path_type=Path),
              default=None, help="Corpus file (defaults to the shipped one).")
@click.option("--items", default=None,
              help="Comma-separated item ids to verify.")
@click.option("--kind", "kinds", multiple=True,
              type=click.Choice(_KIND_CHOICES),
              help="Restrict reported record kinds (repeatable).")
@click.option("--format", "fmt", type=click.Choice(("human", "tsv")),
              default="human", show_default=True)
@click.option("--nmax-single", type=int, default=None, help="Single sums.")
@click.option("--nmax-double", type=int, default=None, help="Double sums.")
@click.option("--nmax-triple", type=int, default=None, help="Triple sums.")
@click.option("--nmax-closed", type=int, default=None, help="Closed forms.")
@click.option("--nmax-cond", type=int, default=None, help="Conditionals.")
@click.option("--nmax-ghost", type=int, default=None, help="Ghost zeros.")
@click.option("--nmax-ct", type=int, default=None, help="CT cross-checks.")
@click.option("--nmax-rec", type=int, default=None, help="Recurrences.")
def cmd_verify(corpus_path: Path | None, items: str | None,
               kinds: tuple[str, ...], fmt: str,
               nmax_single: int | None, nmax_double: int | None,
               nmax_triple: int | None, nmax_closed: int | None,
               nmax_cond: int | None, nmax_ghost: int | None,
               nmax_ct: int | None, nmax_rec: int | None) -> None:
    """Verify the corpus; exit 0 only if nothing unexpected fails."""
    overrides = {
        "single": nmax_single,
        "double": nmax_double,
        "triple": nmax_triple,
        "closed_single": nmax_closed,
        "closed_multi": nmax_closed,
        "conditional": nmax_cond,
        "ghost_zero": nmax_ghost,
        "ct": nmax_ct,
        "ct_high": nmax_ct,
        "recurrence": nmax_rec,
    }
    cleaned = {}
    for name, value in overrides.items():
        if value is None:
            continue
        if value < 0:
            _die(f"--nmax overrides must be nonnegative")
        cleaned[name] = value
    ranges = Ranges(**cleaned) if cleaned else Ranges()

    path = corpus_path or _default_corpus()
    try:
        groups = load_corpus(path)
    except (OSError, CorpusError) as err:
        _die(str(err))

    item_list = None
    if items:
        item_list = [s.strip() for s in items.split(",") if s.strip()]
        known = {g.item_id for g in groups}
        missing = [i for i in item_list if i not in known]
        if missing:
            _die(f"unknown items: {', '.join(missing)}")

    started = time.monotonic()
    report = verify_all(groups, ranges, items=item_list,
                        kinds=list(kinds) or None)
    elapsed = time.monotonic() - started
    out = report.render_tsv() if fmt == "tsv" else report.render_human()
    click.echo(out, nl=False)
    click.echo(f"elapsed: {elapsed:.2f}s", err=True)
    sys.exit(report.exit_code)


@main.command("rec-check")
@click.argument("operator_text", metavar="OPERATOR")
@click.option("-b", type=int, required=True,
              help="Exponent b of the harmonic coefficient formula.")
@click.option("-c", type=int, required=True,
              help="Exponent c of the harmonic coefficient formula.")
@click.option("--nmax", type=int, default=20, show_default=True)
@click.option("--twist", type=click.Choice(("auto", "plain", "alternating")),
              default="auto", show_default=True)
def cmd_rec_check(operator_text: str, b: int, c: int, nmax: int,
                  twist: str) -> None:
    """Check the operator against harmonic_cy_coefficients(b, c)."""
    if b < 1 or c < 1:
        _die("-b and -c must be at least 1")
    if nmax < 0:
        _die("--nmax must be nonnegative")
    try:
        op = parse_theta(operator_text)
    except ThetaParseError as err:
        _die(str(err))
    seq = harmonic_cy_coefficients(b, c, nmax)
    rec = to_recurrence(op)
    attempts = []
    if twist in ("auto", "plain"):
        attempts.append(("plain", seq))
    if twist in ("auto", "alternating"):
        attempts.append(("alternating", twist_alternating(seq)))
    reports = [(name, check_sequence(rec, values)) for name, values in attempts]
    for name, rep in reports:
        if rep.ok:
            click.echo(f"satisfied (twist={name}) for n <= {rep.checked_to}")
            return
    for name, rep in reports:
        m, residual = rep.first_failure
        click.echo(f"failed (twist={name}): first m={m}, residual {residual}")
    sys.exit(1)


@main.command("list")
@click.option("--corpus", "corpus_path", type=click.Path(path_type=Path),
              default=None, help="Corpus file (defaults to the shipped one).")
def cmd_list(corpus_path: Path | None) -> None:
    """Print the corpus inventory, one item per line."""
    path = corpus_path or _default_corpus()
    try:
        groups = load_corpus(path)
    except (OSError, CorpusError) as err:
        _die(str(err))
    total = 0
    for g in groups:
        counts: dict[str, int] = {}
        for r in g.records:
            counts[r.kind] = counts.get(r.kind, 0) + 1
        total += len(g.records)
        summary = ", ".join(f"{k}={counts[k]}" for k in sorted(counts))
        click.echo(f"{g.item_id}\t{summary}")
    click.echo(f"# {len(groups)} items, {total} records", err=False)


if __name__ == "__main__":
    main()
