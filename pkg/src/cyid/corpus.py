"""Corpus file model and loader.

Format (line-oriented UTF-8, '#' starts a comment):

    item <id>
    member <label> :: <dsl-expr>
    ghost <label> [zero-expected|divergent] :: <dsl-expr or free text>
    ct <label> :: <laurent-text> ^ <M>n
    closed <label> :: <dsl-lhs> == <dsl-rhs> [when n % <q> == <r> else <dsl-expr>]
    rec <label> :: <operator-text> ; seq = harmonic(<b>,<c>) ; twist = auto

Any record line may end with `flags: <flag> ...`.  Recognized flags:
typo-suspect (recorded as printed, mismatches are non-fatal),
skip_singular (singular summands contribute 0), from-1 (the claim starts
at n = 1), duplicate (added automatically when a body repeats within an
item).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .dsl import Expr, ParseError, Sum, SumC, bound_indices, free_vars, parse
from .laurent import CtSpec, LaurentParseError, parse_laurent
from .theta import ThetaOperator, ThetaParseError, parse_theta

KINDS = (
    "identity-member",
    "ghost",
    "ct-spec",
    "closed-form",
    "conditional-closed-form",
    "recurrence-check",
)

_ALLOWED_FLAGS = frozenset({"typo-suspect", "skip_singular", "from-1", "duplicate"})
_ALLOWED_MULTIPLIERS = frozenset({2, 3, 4, 5, 6, 8, 10})

_FLAGS_RE = re.compile(r"\s+flags:\s*(?P<flags>[\w\-, |]+)\s*$")
_CT_RE = re.compile(r"^(?P<poly>.*\S)\s*\^\s*(?P<mult>\d+)\s*n$")
_WHEN_RE = re.compile(
    r"\s+when\s+n\s*%\s*(?P<q>\d+)\s*==\s*(?P<r>\d+)\s+else\s+(?P<els>.+)$")
_SEQ_RE = re.compile(r"^seq\s*=\s*harmonic\(\s*(?P<b>\d+)\s*,\s*(?P<c>\d+)\s*\)$")
_TWIST_RE = re.compile(r"^twist\s*=\s*(?P<mode>\w+)$")


class CorpusError(ValueError):
    pass


@dataclass
class FormulaRecord:
    item_id: str
    label: str
    kind: str  # one of KINDS
    status: str  # expected-true | typo-suspect | divergent | zero-expected | recorded
    flags: frozenset[str] = frozenset()
    text: str = ""  # payload as written, for round-trip checks and reports
    line: int = 0
    body: Expr | None = None  # member/ghost body, or closed-form LHS
    rhs: Expr | None = None
    condition: tuple[int, int] | None = None  # (q, r) for n % q == r
    else_expr: Expr | None = None
    ct: CtSpec | None = None
    operator: ThetaOperator | None = None
    harmonic_params: tuple[int, int] | None = None
    twist: str | None = None
    arity: int = 0

    @property
    def start_n(self) -> int:
        return 1 if "from-1" in self.flags else 0

    @property
    def typo_suspect(self) -> bool:
        return "typo-suspect" in self.flags

    @property
    def skip_singular(self) -> bool:
        return "skip_singular" in self.flags


@dataclass
class IdentityGroup:
    item_id: str
    records: list[FormulaRecord] = field(default_factory=list)

    @property
    def members(self) -> list[FormulaRecord]:
        return [r for r in self.records if r.kind == "identity-member"]

    @property
    def ghosts(self) -> list[FormulaRecord]:
        return [r for r in self.records if r.kind == "ghost"]

    @property
    def ct_specs(self) -> list[FormulaRecord]:
        return [r for r in self.records if r.kind == "ct-spec"]

    @property
    def closed_forms(self) -> list[FormulaRecord]:
        return [r for r in self.records
                if r.kind in ("closed-form", "conditional-closed-form")]

    @property
    def recurrences(self) -> list[FormulaRecord]:
        return [r for r in self.records if r.kind == "recurrence-check"]


def sum_arity(e: Expr) -> int:
    """Nesting weight of the summations: a plain sum counts 1, a
    composition sum over p parts counts p - 1 (its enumeration cost)."""
    match e:
        case Sum(_, lo, hi, body):
            return 1 + sum_arity(lo) + sum_arity(hi) + sum_arity(body)
        case SumC(indices, total, body):
            return (len(indices) - 1) + sum_arity(total) + sum_arity(body)
    total = 0
    for name in getattr(e, "__slots__", ()) or ():
        child = getattr(e, name)
        if isinstance(child, Expr):
            total += sum_arity(child)
    return total


def _check_body(e: Expr, where: str) -> None:
    extra = free_vars(e) - {"n"}
    if extra:
        raise CorpusError(f"{where}: free variables {sorted(extra)} besides n")
    bound = bound_indices(e)
    if "n" in bound:
        raise CorpusError(f"{where}: summation index shadows n")
    if len(bound) != len(set(bound)):
        dup = sorted({b for b in bound if bound.count(b) > 1})
        raise CorpusError(f"{where}: summation index reused: {dup}")


def _parse_flags(raw: str, where: str) -> frozenset[str]:
    names = [f for f in re.split(r"[,\s|]+", raw.strip()) if f]
    for name in names:
        if name not in _ALLOWED_FLAGS:
            raise CorpusError(f"{where}: unknown flag {name!r}")
    return frozenset(names)


def _norm_text(text: str) -> str:
    return " ".join(text.split())


def load_corpus(path: str | Path) -> list[IdentityGroup]:
    """Load and validate a corpus file into item groups, in file order."""
    path = Path(path)
    groups: list[IdentityGroup] = []
    by_id: dict[str, IdentityGroup] = {}
    current: IdentityGroup | None = None
    seen_bodies: dict[str, FormulaRecord] = {}

    lines = path.read_text(encoding="utf-8").splitlines()
    for lineno, raw_line in enumerate(lines, start=1):
        where = f"{path.name}:{lineno}"
        line = raw_line.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        stripped = line.strip()

        head, _, rest = stripped.partition(" ")
        if head == "item":
            item_id = rest.strip()
            if not item_id:
                raise CorpusError(f"{where}: item line needs an id")
            if item_id in by_id:
                raise CorpusError(f"{where}: duplicate item id {item_id!r}")
            current = IdentityGroup(item_id)
            by_id[item_id] = current
            groups.append(current)
            seen_bodies = {}
            continue

        if current is None:
            raise CorpusError(f"{where}: record before any item line")

        flags = frozenset()
        m = _FLAGS_RE.search(stripped)
        if m:
            flags = _parse_flags(m.group("flags"), where)
            stripped = stripped[: m.start()].rstrip()

        head_part, sep, payload = stripped.partition("::")
        if not sep:
            raise CorpusError(f"{where}: missing '::'")
        payload = payload.strip()
        head_tokens = head_part.split()
        if len(head_tokens) < 2:
            raise CorpusError(f"{where}: record needs a kind and a label")
        kind_word, label = head_tokens[0], head_tokens[1]
        marker = head_tokens[2] if len(head_tokens) > 2 else None
        if len(head_tokens) > 3:
            raise CorpusError(f"{where}: too many tokens before '::'")
        if marker is not None and kind_word != "ghost":
            raise CorpusError(f"{where}: unexpected token {marker!r}")

        try:
            rec = _build_record(kind_word, label, marker, payload, flags,
                                current.item_id, lineno, where)
        except (ParseError, LaurentParseError, ThetaParseError) as err:
            raise CorpusError(f"{where}: {err}") from None

        if rec.kind in ("identity-member", "ghost"):
            key = _norm_text(rec.text)
            prior = seen_bodies.get(key)
            if prior is not None:
                rec.flags = rec.flags | {"duplicate"}
            else:
                seen_bodies[key] = rec
        current.records.append(rec)

    return groups


def _build_record(kind_word: str, label: str, marker: str | None,
                  payload: str, flags: frozenset[str], item_id: str,
                  lineno: int, where: str) -> FormulaRecord:
    status = "typo-suspect" if "typo-suspect" in flags else "expected-true"

    if kind_word == "member":
        body = parse(payload)
        if "typo-suspect" not in flags:
            # A printed misprint may leave a variable unbound; keep such
            # records loadable so the report can show how they fail.
            _check_body(body, where)
        return FormulaRecord(item_id, label, "identity-member", status, flags,
                             payload, lineno, body=body, arity=sum_arity(body))

    if kind_word == "ghost":
        if marker not in (None, "zero-expected", "divergent"):
            raise CorpusError(f"{where}: unknown ghost marker {marker!r}")
        if marker == "divergent":
            return FormulaRecord(item_id, label, "ghost", "divergent", flags,
                                 payload, lineno)
        body = parse(payload)
        _check_body(body, where)
        return FormulaRecord(item_id, label, "ghost", marker or "recorded",
                             flags, payload, lineno, body=body,
                             arity=sum_arity(body))

    if kind_word == "ct":
        m = _CT_RE.match(payload)
        if not m:
            raise CorpusError(f"{where}: ct record must end with '^ <M>n'")
        mult = int(m.group("mult"))
        if mult not in _ALLOWED_MULTIPLIERS:
            raise CorpusError(f"{where}: power multiplier {mult} out of range")
        poly = parse_laurent(m.group("poly"))
        return FormulaRecord(item_id, label, "ct-spec", status, flags,
                             m.group("poly").strip(), lineno,
                             ct=CtSpec(poly, mult))

    if kind_word == "closed":
        cond = None
        els = None
        m = _WHEN_RE.search(payload)
        if m:
            q, r = int(m.group("q")), int(m.group("r"))
            if q < 1 or not 0 <= r < q:
                raise CorpusError(f"{where}: bad condition n % {q} == {r}")
            cond = (q, r)
            els = parse(m.group("els"))
            _check_body(els, where)
            payload_core = payload[: m.start()].rstrip()
        else:
            payload_core = payload
        sides = payload_core.split("==")
        if len(sides) != 2:
            raise CorpusError(f"{where}: closed record needs exactly one '=='")
        lhs = parse(sides[0])
        rhs = parse(sides[1])
        _check_body(lhs, where)
        _check_body(rhs, where)
        kind = "conditional-closed-form" if cond else "closed-form"
        return FormulaRecord(item_id, label, kind, status, flags,
                             payload, lineno, body=lhs, rhs=rhs,
                             condition=cond, else_expr=els,
                             arity=max(sum_arity(lhs), sum_arity(rhs)))

    if kind_word == "rec":
        parts = [p.strip() for p in payload.split(";")]
        if len(parts) != 3:
            raise CorpusError(
                f"{where}: rec record needs '<op> ; seq = ... ; twist = ...'")
        op = parse_theta(parts[0])
        m = _SEQ_RE.match(parts[1])
        if not m:
            raise CorpusError(f"{where}: bad seq clause {parts[1]!r}")
        b, c = int(m.group("b")), int(m.group("c"))
        if b < 1 or c < 1:
            raise CorpusError(f"{where}: harmonic exponents must be positive")
        t = _TWIST_RE.match(parts[2])
        if not t or t.group("mode") != "auto":
            raise CorpusError(f"{where}: only 'twist = auto' is supported")
        return FormulaRecord(item_id, label, "recurrence-check", status, flags,
                             parts[0], lineno, operator=op,
                             harmonic_params=(b, c), twist="auto")

    raise CorpusError(f"{where}: unknown record kind {kind_word!r}")
