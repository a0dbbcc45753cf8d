"""Sparse Laurent polynomials in x, y, z, t and exact constant terms of
powers P^(M*n).

Exponent vectors are fixed-width 4-tuples; unused variables stay 0.
Powers are taken by iterated multiplication with a reachability prune:
a monomial whose exponent in some variable cannot be brought back to 0
by the remaining factors is dropped.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

ExponentVector = tuple[int, int, int, int]

VARS = ("x", "y", "z", "t")
_VAR_INDEX = {v: i for i, v in enumerate(VARS)}
_ZERO: ExponentVector = (0, 0, 0, 0)


@dataclass(frozen=True)
class LaurentPoly:
    terms: Mapping[ExponentVector, int]
    mins: ExponentVector
    maxs: ExponentVector

    @classmethod
    def from_terms(cls, terms: Mapping[ExponentVector, int]) -> "LaurentPoly":
        clean = {e: c for e, c in terms.items() if c != 0}
        if clean:
            mins = tuple(min(e[v] for e in clean) for v in range(4))
            maxs = tuple(max(e[v] for e in clean) for v in range(4))
        else:
            mins = maxs = _ZERO
        return cls(clean, mins, maxs)  # type: ignore[arg-type]

    @classmethod
    def one(cls) -> "LaurentPoly":
        return cls.from_terms({_ZERO: 1})

    def constant_term(self) -> int:
        return self.terms.get(_ZERO, 0)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return dict(self.terms) == dict(other.terms)

    def __len__(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class CtSpec:
    poly: LaurentPoly
    power_multiplier: int

    def __post_init__(self) -> None:
        if self.power_multiplier < 1:
            raise ValueError("power multiplier must be positive")


class LaurentParseError(ValueError):
    pass


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
        elif ch.isalpha():
            yield ("var", ch)
            i += 1
        elif ch in "+-*/^()":
            yield (ch, ch)
            i += 1
        else:
            raise LaurentParseError(f"unexpected character {ch!r}")
    yield ("end", "")


def parse_laurent(text: str) -> LaurentPoly:
    """Parse a sign-separated list of monomials.

    monomial := coefficient? var-product ('/' var-product)?
    var-product := (var ('^' integer)?)+ with '*' separators permitted,
    optionally parenthesized; a monomial may also be a bare integer.
    """
    toks = list(_tokenize(text))
    pos = 0

    def peek() -> tuple[str, str]:
        return toks[pos]

    def advance() -> tuple[str, str]:
        nonlocal pos
        tok = toks[pos]
        pos += 1
        return tok

    def parse_int() -> int:
        tok = advance()
        if tok[0] != "int":
            raise LaurentParseError(f"expected integer, found {tok[1]!r}")
        return int(tok[1])

    def parse_var_product() -> ExponentVector:
        grouped = peek()[0] == "("
        if grouped:
            advance()
        exps = [0, 0, 0, 0]
        saw_var = False
        while True:
            kind, val = peek()
            if kind == "*":
                advance()
                continue
            if kind != "var":
                break
            advance()
            if val not in _VAR_INDEX:
                raise LaurentParseError(f"variable {val!r} not in x,y,z,t")
            e = 1
            if peek()[0] == "^":
                advance()
                if peek()[0] == "-":
                    advance()
                    e = -parse_int()
                else:
                    e = parse_int()
            exps[_VAR_INDEX[val]] += e
            saw_var = True
        if not saw_var:
            raise LaurentParseError(
                f"expected a variable, found {peek()[1] or 'end of input'!r}")
        if grouped:
            tok = advance()
            if tok[0] != ")":
                raise LaurentParseError("unbalanced parentheses")
        return tuple(exps)  # type: ignore[return-value]

    terms: dict[ExponentVector, int] = {}
    first = True
    while True:
        kind, val = peek()
        if kind == "end":
            if first:
                raise LaurentParseError("empty polynomial")
            break
        sign = 1
        if kind in "+-":
            advance()
            sign = -1 if kind == "-" else 1
        elif not first:
            raise LaurentParseError(f"expected '+' or '-', found {val!r}")
        first = False
        coeff = sign
        saw_coeff = False
        kind, val = peek()
        if kind == "int":
            advance()
            coeff = sign * int(val)
            saw_coeff = True
            if peek()[0] == "*":
                advance()
        exps = _ZERO
        kind, val = peek()
        if kind in ("var", "("):
            exps = parse_var_product()
        elif not saw_coeff:
            raise LaurentParseError(
                f"expected a monomial, found {val or 'end of input'!r}")
        if peek()[0] == "/":
            advance()
            den = parse_var_product()
            exps = tuple(a - b for a, b in zip(exps, den))  # type: ignore[assignment]
        terms[exps] = terms.get(exps, 0) + coeff
    return LaurentPoly.from_terms(terms)


def mul(p: LaurentPoly, q: LaurentPoly) -> LaurentPoly:
    """Exact product of two polynomials."""
    out: dict[ExponentVector, int] = {}
    for e1, c1 in p.terms.items():
        for e2, c2 in q.terms.items():
            e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2], e1[3] + e2[3])
            out[e] = out.get(e, 0) + c1 * c2
    return LaurentPoly.from_terms(out)


def _mul_pruned(acc: dict[ExponentVector, int], base: LaurentPoly,
                remaining: int) -> dict[ExponentVector, int]:
    # keep a product monomial only if `remaining` further base factors can
    # still cancel every exponent back to 0
    mins, maxs = base.mins, base.maxs
    lo = tuple(-remaining * maxs[v] for v in range(4))
    hi = tuple(-remaining * mins[v] for v in range(4))
    out: dict[ExponentVector, int] = {}
    for e1, c1 in acc.items():
        for e2, c2 in base.terms.items():
            e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2], e1[3] + e2[3])
            if (lo[0] <= e[0] <= hi[0] and lo[1] <= e[1] <= hi[1]
                    and lo[2] <= e[2] <= hi[2] and lo[3] <= e[3] <= hi[3]):
                out[e] = out.get(e, 0) + c1 * c2
    return out


def ct_power(spec: CtSpec, n: int, *, prune: bool = True) -> int:
    """Constant term of poly^(M*n)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    total = spec.power_multiplier * n
    if total == 0:
        return 1
    base = spec.poly
    if not prune:
        acc_poly = base
        for _ in range(total - 1):
            acc_poly = mul(acc_poly, base)
        return acc_poly.constant_term()
    acc = {e: c for e, c in base.terms.items()
           if all(-(total - 1) * base.maxs[v] <= e[v] <= -(total - 1) * base.mins[v]
                  for v in range(4))}
    for step in range(2, total + 1):
        acc = _mul_pruned(acc, base, total - step)
    return acc.get(_ZERO, 0)


def ct_sequence(spec: CtSpec, n_max: int, *, prune: bool = True) -> list[int]:
    """Constant terms of poly^(M*n) for n = 0 .. n_max."""
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    return [ct_power(spec, m, prune=prune) for m in range(n_max + 1)]
