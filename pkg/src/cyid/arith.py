"""Exact combinatorial arithmetic: factorials, binomials, harmonic numbers.

Every operation is exact.  Values are Python ints where integral and
`fractions.Fraction` otherwise; both are arbitrary precision and compare
equal across types, so callers may treat the result type as "rational".
No floating point is used anywhere.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence, Union

Rational = Union[int, Fraction]


class FactorialCache:
    """Growable table of factorials with table[m] == m!.

    The table only ever grows; concurrent readers are safe because list
    appends never invalidate existing entries.
    """

    def __init__(self) -> None:
        self._table: list[int] = [1]

    def get(self, m: int) -> int:
        if m < 0:
            raise ValueError(f"factorial of negative integer {m}")
        table = self._table
        while len(table) <= m:
            table.append(table[-1] * len(table))
        return table[m]

    def __len__(self) -> int:
        return len(self._table)


_FACTORIALS = FactorialCache()
_HARMONIC: list[Fraction] = [Fraction(0)]


def factorial(m: int) -> int:
    """m! for m >= 0, served from the shared cache."""
    return _FACTORIALS.get(m)


def binom(a: Rational, k: int) -> Rational:
    """Generalized binomial coefficient, total over all inputs.

    k < 0 gives 0; otherwise the falling factorial a(a-1)...(a-k+1)/k!.
    Integer tops in range use the factorial table.
    """
    if k < 0:
        return 0
    if isinstance(a, Fraction):
        if a.denominator == 1:
            a = a.numerator
        else:
            num = Fraction(1)
            for step in range(k):
                num *= a - step
            return num / factorial(k)
    if a >= 0:
        if k > a:
            return 0
        return factorial(a) // (factorial(k) * factorial(a - k))
    # negative integer top: exact integer falling factorial
    num = 1
    for step in range(k):
        num *= a - step
    return num // factorial(k)


def harmonic(k: int) -> Rational:
    """Harmonic number H_k = sum_{j=1..k} 1/j, with H_k = 0 for k <= 0."""
    if k <= 0:
        return 0
    table = _HARMONIC
    while len(table) <= k:
        table.append(table[-1] + Fraction(1, len(table)))
    return table[k]


def ipow(base: Rational, e: int) -> Rational:
    """Exact base**e for integer e of either sign.

    Raises ZeroDivisionError for 0 raised to a negative power.
    """
    if e >= 0:
        return base ** e
    if base == 0:
        raise ZeroDivisionError("0 raised to a negative power")
    if isinstance(base, int):
        p = base ** (-e)
        return Fraction(1, p)
    return base ** e


def multinomial(n: int, parts: Sequence[int]) -> int:
    """n! / (p1! p2! ... pk!) for nonnegative parts summing to n."""
    if any(p < 0 for p in parts):
        raise ValueError(f"negative part in {list(parts)}")
    if sum(parts) != n:
        raise ValueError(f"parts {list(parts)} do not sum to {n}")
    denom = 1
    for p in parts:
        denom *= factorial(p)
    return factorial(n) // denom
