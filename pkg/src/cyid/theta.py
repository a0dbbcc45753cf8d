"""Differential operators polynomial in T = z*d/dz and z, their induced
coefficient recurrences, and exact sequence checks.

T acting on z^m multiplies by m, so an operator sum_j z^j * P_j(T)
annihilates sum_m A_m z^m exactly when for every m >= 0

    sum_{j=0..max_j} P_j(m - j) * A_{m-j} = 0,   with A_{<0} = 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .arith import Rational

_Key = tuple[int, int]  # (power of z, power of T)
_Poly2 = dict[_Key, int]


class ThetaParseError(ValueError):
    pass


@dataclass(frozen=True)
class ThetaOperator:
    """z-power slices of the expanded operator; slices[j] holds the dense
    coefficient tuple of P_j(T), constant term first."""

    slices: dict[int, tuple[int, ...]]
    max_j: int

    @classmethod
    def from_slices(cls, raw: dict[int, Sequence[int]]) -> "ThetaOperator":
        slices: dict[int, tuple[int, ...]] = {}
        for j, coeffs in raw.items():
            if j < 0:
                raise ThetaParseError("negative power of z")
            trimmed = list(coeffs)
            while trimmed and trimmed[-1] == 0:
                trimmed.pop()
            if trimmed:
                slices[j] = tuple(trimmed)
        if not slices:
            raise ThetaParseError("operator has no nonzero slice")
        return cls(slices, max(slices))


@dataclass(frozen=True)
class Recurrence:
    """Constraint sum_j P_j(m-j) * A_{m-j} = 0 for all m >= 0."""

    slices: dict[int, tuple[int, ...]]
    order: int

    def residual(self, seq: Sequence[Rational], m: int) -> Rational:
        total: Rational = 0
        for j, coeffs in self.slices.items():
            i = m - j
            if 0 <= i < len(seq) and seq[i] != 0:
                total += _horner(coeffs, i) * seq[i]
        return total


@dataclass(frozen=True)
class CheckReport:
    checked_to: int  # largest m with the constraint tested
    failures: tuple[tuple[int, Rational], ...]  # (m, residual)

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def first_failure(self) -> tuple[int, Rational] | None:
        return self.failures[0] if self.failures else None


def _horner(coeffs: Sequence[int], x: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _tokenize(text: str) -> Iterator[tuple[str, str]]:
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            yield ("int", text[i:j])
            i = j
        elif ch in ("T", "z"):
            yield ("sym", ch)
            i += 1
        elif ch in "+-*^()":
            yield (ch, ch)
            i += 1
        else:
            raise ThetaParseError(f"unexpected character {ch!r}")
    yield ("end", "")


def _p_add(a: _Poly2, b: _Poly2) -> _Poly2:
    out = dict(a)
    for k, c in b.items():
        out[k] = out.get(k, 0) + c
    return {k: c for k, c in out.items() if c != 0}


def _p_neg(a: _Poly2) -> _Poly2:
    return {k: -c for k, c in a.items()}


def _p_mul(a: _Poly2, b: _Poly2) -> _Poly2:
    out: _Poly2 = {}
    for (za, ta), ca in a.items():
        for (zb, tb), cb in b.items():
            k = (za + zb, ta + tb)
            out[k] = out.get(k, 0) + ca * cb
    return {k: c for k, c in out.items() if c != 0}


def _p_pow(a: _Poly2, e: int) -> _Poly2:
    out: _Poly2 = {(0, 0): 1}
    for _ in range(e):
        out = _p_mul(out, a)
    return out


class _Parser:
    def __init__(self, text: str) -> None:
        self.toks = list(_tokenize(text))
        self.i = 0

    def peek(self) -> tuple[str, str]:
        return self.toks[self.i]

    def advance(self) -> tuple[str, str]:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> None:
        tok = self.advance()
        if tok[0] != kind:
            raise ThetaParseError(
                f"expected {kind!r}, found {tok[1] or 'end of input'!r}")

    def expr(self) -> _Poly2:
        if self.peek()[0] == "-":
            self.advance()
            e = _p_neg(self.term())
        else:
            e = self.term()
        while self.peek()[0] in "+-":
            op = self.advance()[0]
            rhs = self.term()
            e = _p_add(e, rhs if op == "+" else _p_neg(rhs))
        return e

    def term(self) -> _Poly2:
        e = self.factor()
        while True:
            kind = self.peek()[0]
            if kind == "*":
                self.advance()
                e = _p_mul(e, self.factor())
            elif kind in ("sym", "int", "("):
                # adjacency means multiplication, e.g. 3z^2(T+1)
                e = _p_mul(e, self.factor())
            else:
                return e

    def factor(self) -> _Poly2:
        base = self.atom()
        if self.peek()[0] == "^":
            self.advance()
            tok = self.advance()
            if tok[0] != "int":
                raise ThetaParseError(
                    f"exponent must be a nonnegative integer, found {tok[1]!r}")
            return _p_pow(base, int(tok[1]))
        return base

    def atom(self) -> _Poly2:
        kind, val = self.advance()
        if kind == "int":
            return {(0, 0): int(val)}
        if kind == "sym":
            return {(0, 1) if val == "T" else (1, 0): 1}
        if kind == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ThetaParseError(
            f"expected a value, found {val or 'end of input'!r}")

    def parse(self) -> _Poly2:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ThetaParseError(f"unexpected trailing input {tok[1]!r}")
        return e


def parse_theta(text: str) -> ThetaOperator:
    """Parse and fully expand an operator written in T and z."""
    poly = _Parser(text).parse()
    if not poly:
        raise ThetaParseError("operator is identically zero")
    raw: dict[int, list[int]] = {}
    for (zp, tp), c in poly.items():
        row = raw.setdefault(zp, [])
        while len(row) <= tp:
            row.append(0)
        row[tp] += c
    return ThetaOperator.from_slices(raw)


def to_recurrence(op: ThetaOperator) -> Recurrence:
    """Coefficient constraint family induced by the operator."""
    return Recurrence(dict(op.slices), op.max_j)


def check_sequence(rec: Recurrence, seq: Sequence[Rational]) -> CheckReport:
    """Test the constraint at every m the sequence can support."""
    if not seq:
        raise ValueError("sequence must have at least one element")
    failures = []
    top = len(seq) - 1
    for m in range(top + 1):
        r = rec.residual(seq, m)
        if r != 0:
            failures.append((m, r))
    return CheckReport(top, tuple(failures))


def twist_alternating(seq: Sequence[Rational]) -> list[Rational]:
    """Apply the sign twist A_n -> (-1)^n A_n."""
    return [v if i % 2 == 0 else -v for i, v in enumerate(seq)]
