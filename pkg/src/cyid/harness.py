"""Verification passes over a loaded corpus and report assembly.

Every record lands in exactly one verdict bucket:

    agree                  identity member matches the group reference,
                           or a ct record matches the first binomial member
    mismatch               exact disagreement (first n and both values)
    zero-confirmed         ghost with an (n-2k)-type body vanishes
    closed-form-confirmed  LHS == RHS on the whole tested range
    condition-confirmed    conditional closed form holds on and off condition
    recurrence-satisfied   operator annihilates the sequence (twist named)
    skipped-divergent      divergent ghost, never evaluated
    ghost-recorded         ghost kept for the record, no claim attached
    ct-recorded            ct spec with no companion member, values printed
    error                  evaluation failed (detail holds the message)

Records flagged typo-suspect never make the run fail; their behavior is
still reported.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .arith import Rational
from .corpus import FormulaRecord, IdentityGroup
from .evaluate import EvalError, eval_expr, eval_sequence, harmonic_cy_coefficients
from .laurent import ct_sequence
from .theta import check_sequence, to_recurrence, twist_alternating

_KIND_KEYS = {
    "identity-member": "member",
    "ghost": "ghost",
    "ct-spec": "ct",
    "closed-form": "closed",
    "conditional-closed-form": "conditional",
    "recurrence-check": "rec",
}


@dataclass(frozen=True)
class Ranges:
    single: int = 16
    double: int = 10
    triple: int = 8
    closed_single: int = 10
    closed_multi: int = 8
    conditional: int = 12
    ghost_zero: int = 12
    ct: int = 4
    ct_high: int = 3  # used once the power multiplier reaches ct_high_mult
    ct_high_mult: int = 3
    recurrence: int = 20

    def member_max(self, arity: int) -> int:
        if arity <= 1:
            return self.single
        if arity == 2:
            return self.double
        return self.triple

    def closed_max(self, arity: int) -> int:
        return self.closed_single if arity <= 1 else self.closed_multi

    def ct_max(self, multiplier: int) -> int:
        return self.ct_high if multiplier >= self.ct_high_mult else self.ct


@dataclass(frozen=True)
class RecordResult:
    item_id: str
    label: str
    kind: str
    verdict: str
    detail: str = ""
    flags: frozenset[str] = frozenset()
    advisories: tuple[str, ...] = ()

    @property
    def fatal(self) -> bool:
        return (self.verdict in ("mismatch", "error")
                and "typo-suspect" not in self.flags)


@dataclass
class VerificationReport:
    results: list[RecordResult] = field(default_factory=list)

    def extend(self, other: "VerificationReport") -> None:
        self.results.extend(other.results)

    @property
    def failures(self) -> list[RecordResult]:
        return [r for r in self.results if r.fatal]

    @property
    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for r in self.results:
            out[r.verdict] = out.get(r.verdict, 0) + 1
        return out

    @property
    def exit_code(self) -> int:
        return 1 if self.failures else 0

    def render_tsv(self) -> str:
        lines = ["item\tlabel\tkind\tverdict\tflags\tadvisories\tdetail"]
        for r in self.results:
            flags = ",".join(sorted(r.flags)) or "-"
            adv = ",".join(r.advisories) or "-"
            lines.append("\t".join((r.item_id, r.label, r.kind, r.verdict,
                                    flags, adv, r.detail or "-")))
        return "\n".join(lines) + "\n"

    def render_human(self) -> str:
        if not self.results:
            return "nothing to verify\n"
        rows = []
        for r in self.results:
            marks = []
            if "typo-suspect" in r.flags:
                marks.append("typo-suspect")
            marks.extend(r.advisories)
            note = f" [{', '.join(marks)}]" if marks else ""
            rows.append((f"{r.item_id} {r.label}", r.verdict, r.detail + note))
        w0 = max(len(a) for a, _, _ in rows)
        w1 = max(len(b) for _, b, _ in rows)
        lines = [f"{a:<{w0}}  {b:<{w1}}  {c}".rstrip() for a, b, c in rows]
        lines.append("")
        counts = self.counts
        lines.append("totals: " + ", ".join(
            f"{k}={counts[k]}" for k in sorted(counts)))
        fails = self.failures
        if fails:
            lines.append(f"unexpected failures: {len(fails)}")
            for r in fails:
                lines.append(f"  {r.item_id} {r.label}: {r.verdict} {r.detail}")
        else:
            lines.append("unexpected failures: 0")
        return "\n".join(lines) + "\n"


def _fmt(v: Rational) -> str:
    return str(v)


def _member_values(rec: FormulaRecord, n_max: int) -> tuple[int, list[Rational]]:
    vals = eval_sequence(rec.body, n_max, skip_singular=rec.skip_singular,
                         n_min=rec.start_n)
    return rec.start_n, vals


def _integrality(rec: FormulaRecord, vals: list[Rational]) -> tuple[str, ...]:
    if rec.kind != "identity-member" or rec.typo_suspect:
        return ()
    if any(isinstance(v, Fraction) for v in vals):
        return ("non-integral",)
    return ()


def verify_group(group: IdentityGroup, ranges: Ranges | None = None) -> VerificationReport:
    """Equality, ghost, ct, and recurrence checks for one item group."""
    ranges = ranges or Ranges()
    report = VerificationReport()

    # evaluate members once; they anchor both the equality claim and
    # the ct cross-checks
    member_data: dict[int, tuple[int, list[Rational]]] = {}
    member_error: dict[int, str] = {}
    members = group.members
    for idx, rec in enumerate(members):
        try:
            member_data[idx] = _member_values(rec, ranges.member_max(rec.arity))
        except EvalError as err:
            member_error[idx] = str(err)

    ref_idx = _reference_index(members, member_data)

    results: dict[int, RecordResult] = {}
    for idx, rec in enumerate(members):
        if idx in member_error:
            results[id(rec)] = RecordResult(rec.item_id, rec.label, rec.kind,
                                            "error", member_error[idx],
                                            rec.flags)
            continue
        start, vals = member_data[idx]
        adv = _integrality(rec, vals)
        if ref_idx is None or idx == ref_idx:
            top = start + len(vals) - 1
            results[id(rec)] = RecordResult(rec.item_id, rec.label, rec.kind,
                                            "agree", f"n <= {top}",
                                            rec.flags, adv)
            continue
        ref_start, ref_vals = member_data[ref_idx]
        verdict, detail = _compare(start, vals, ref_start, ref_vals,
                                   members[ref_idx].label)
        results[id(rec)] = RecordResult(rec.item_id, rec.label, rec.kind,
                                        verdict, detail, rec.flags, adv)

    cross_idx = _cross_target_index(members, member_data)

    for rec in group.records:
        if rec.kind == "identity-member":
            report.results.append(results[id(rec)])
        elif rec.kind == "ghost":
            report.results.append(_verify_ghost(rec, ranges))
        elif rec.kind == "ct-spec":
            report.results.append(
                _verify_ct(rec, members, member_data, cross_idx, ranges))
        elif rec.kind == "recurrence-check":
            report.results.append(_verify_recurrence(rec, ranges))
        else:
            report.extend(verify_closed_form(rec, ranges))
    return report


def _reference_index(members: list[FormulaRecord],
                     member_data: dict[int, tuple[int, list[Rational]]]) -> int | None:
    # prefer the clean member with the longest evaluated range
    best: int | None = None
    for idx, rec in enumerate(members):
        if idx not in member_data or rec.typo_suspect:
            continue
        if best is None or len(member_data[idx][1]) > len(member_data[best][1]):
            best = idx
    if best is None:
        for idx in range(len(members)):
            if idx in member_data:
                return idx
    return best


def _cross_target_index(members: list[FormulaRecord],
                        member_data: dict[int, tuple[int, list[Rational]]]) -> int | None:
    for idx, rec in enumerate(members):
        if idx in member_data and not rec.typo_suspect:
            return idx
    return None


def _compare(start_a: int, vals_a: list[Rational],
             start_b: int, vals_b: list[Rational],
             ref_label: str) -> tuple[str, str]:
    lo = max(start_a, start_b)
    hi = min(start_a + len(vals_a), start_b + len(vals_b)) - 1
    for n in range(lo, hi + 1):
        va = vals_a[n - start_a]
        vb = vals_b[n - start_b]
        if va != vb:
            return ("mismatch",
                    f"first n={n}: {_fmt(va)} != {_fmt(vb)} (vs {ref_label})")
    return ("agree", f"matches {ref_label} for n <= {hi}")


def _verify_ghost(rec: FormulaRecord, ranges: Ranges) -> RecordResult:
    if rec.status == "divergent":
        return RecordResult(rec.item_id, rec.label, rec.kind,
                            "skipped-divergent", "never evaluated", rec.flags)
    if rec.status == "recorded":
        return RecordResult(rec.item_id, rec.label, rec.kind,
                            "ghost-recorded", "no claim attached", rec.flags)
    try:
        start, vals = _member_values(rec, ranges.ghost_zero)
    except EvalError as err:
        return RecordResult(rec.item_id, rec.label, rec.kind, "error",
                            str(err), rec.flags)
    for n, v in enumerate(vals, start=start):
        if v != 0:
            return RecordResult(rec.item_id, rec.label, rec.kind, "mismatch",
                                f"first n={n}: {_fmt(v)} != 0", rec.flags)
    return RecordResult(rec.item_id, rec.label, rec.kind, "zero-confirmed",
                        f"0 for n <= {start + len(vals) - 1}", rec.flags)


def _verify_ct(rec: FormulaRecord, members: list[FormulaRecord],
               member_data: dict[int, tuple[int, list[Rational]]],
               cross_idx: int | None, ranges: Ranges) -> RecordResult:
    spec = rec.ct
    n_max = ranges.ct_max(spec.power_multiplier)
    if cross_idx is None:
        vals = ct_sequence(spec, min(n_max, 2))
        shown = ", ".join(str(v) for v in vals)
        return RecordResult(rec.item_id, rec.label, rec.kind, "ct-recorded",
                            f"values: {shown}", rec.flags)
    target = members[cross_idx]
    start, mvals = member_data[cross_idx]
    top = min(n_max, start + len(mvals) - 1)
    cvals = ct_sequence(spec, top)
    for n in range(max(start, 0), top + 1):
        cv = cvals[n]
        mv = mvals[n - start]
        if cv != mv:
            return RecordResult(
                rec.item_id, rec.label, rec.kind, "mismatch",
                f"first n={n}: {cv} != {_fmt(mv)} (vs {target.label})",
                rec.flags)
    return RecordResult(rec.item_id, rec.label, rec.kind, "agree",
                        f"matches {target.label} for n <= {top}", rec.flags)


def _verify_recurrence(rec: FormulaRecord, ranges: Ranges) -> RecordResult:
    b, c = rec.harmonic_params
    seq = harmonic_cy_coefficients(b, c, ranges.recurrence)
    recur = to_recurrence(rec.operator)
    plain = check_sequence(recur, seq)
    if plain.ok:
        return RecordResult(rec.item_id, rec.label, rec.kind,
                            "recurrence-satisfied",
                            f"twist=plain, n <= {plain.checked_to}", rec.flags)
    alt = check_sequence(recur, twist_alternating(seq))
    if alt.ok:
        return RecordResult(rec.item_id, rec.label, rec.kind,
                            "recurrence-satisfied",
                            f"twist=alternating, n <= {alt.checked_to}",
                            rec.flags)
    pm, pr = plain.first_failure
    am, ar = alt.first_failure
    return RecordResult(
        rec.item_id, rec.label, rec.kind, "mismatch",
        f"no twist holds; plain first m={pm} residual {_fmt(pr)}, "
        f"alternating first m={am} residual {_fmt(ar)}", rec.flags)


def verify_closed_form(rec: FormulaRecord, ranges: Ranges | None = None) -> VerificationReport:
    """LHS == RHS check, with on/off-condition handling for conditionals."""
    ranges = ranges or Ranges()
    report = VerificationReport()
    try:
        result = _closed_result(rec, ranges)
    except EvalError as err:
        result = RecordResult(rec.item_id, rec.label, rec.kind, "error",
                              str(err), rec.flags)
    report.results.append(result)
    return report


def _closed_result(rec: FormulaRecord, ranges: Ranges) -> RecordResult:
    if rec.kind == "closed-form":
        n_max = ranges.closed_max(rec.arity)
        start, lhs = _member_values(rec, n_max)
        rhs = eval_sequence(rec.rhs, n_max, n_min=start)
        for n in range(start, n_max + 1):
            if lhs[n - start] != rhs[n - start]:
                return RecordResult(
                    rec.item_id, rec.label, rec.kind, "mismatch",
                    f"first n={n}: {_fmt(lhs[n - start])} != {_fmt(rhs[n - start])}",
                    rec.flags)
        return RecordResult(rec.item_id, rec.label, rec.kind,
                            "closed-form-confirmed", f"n <= {n_max}", rec.flags)

    q, r = rec.condition
    n_max = ranges.conditional
    start, lhs = _member_values(rec, n_max)
    for n in range(start, n_max + 1):
        env = {"n": n}
        on = n % q == r
        expected = eval_expr(rec.rhs if on else rec.else_expr, env)
        got = lhs[n - start]
        if got != expected:
            side = "on-condition" if on else "off-condition"
            return RecordResult(
                rec.item_id, rec.label, rec.kind, "mismatch",
                f"first n={n} ({side}): {_fmt(got)} != {_fmt(expected)}",
                rec.flags)
    return RecordResult(rec.item_id, rec.label, rec.kind, "condition-confirmed",
                        f"n <= {n_max} (mod {q})", rec.flags)


def verify_all(groups: list[IdentityGroup], ranges: Ranges | None = None,
               items: list[str] | None = None,
               kinds: list[str] | None = None) -> VerificationReport:
    """Run every check over the corpus, in corpus order."""
    ranges = ranges or Ranges()
    report = VerificationReport()
    wanted_items = set(items) if items else None
    wanted_kinds = set(kinds) if kinds else None
    for group in groups:
        if wanted_items is not None and group.item_id not in wanted_items:
            continue
        sub = verify_group(group, ranges)
        if wanted_kinds is not None:
            sub.results = [r for r in sub.results
                           if _KIND_KEYS[r.kind] in wanted_kinds]
        report.extend(sub)
    return report
