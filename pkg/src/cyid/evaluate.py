"""Exact evaluation of formula ASTs over integer environments.

Values are int or fractions.Fraction.  Evaluation is strict about
singular subterms (division by zero, 0 to a negative power, factorial
of a negative integer); a record-level ``skip_singular`` escape hatch
makes the offending summand of a sum contribute 0 instead.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterator, Mapping

from .arith import Rational, binom, factorial, harmonic, ipow
from .dsl import (
    Add, Binom, Div, Expr, Fact, H, IDiv, IntLit, Mul, Neg, Pow, Sub, Sum,
    SumC, Var, free_vars,
)

Env = Mapping[str, int]


class EvalError(ValueError):
    """Base class for evaluation failures."""


class UnboundVariable(EvalError):
    pass


class NonIntegerArgument(EvalError):
    pass


class SingularTerm(EvalError):
    pass


def _norm(v: Rational) -> Rational:
    if isinstance(v, Fraction) and v.denominator == 1:
        return v.numerator
    return v


def _as_int(v: Rational, what: str) -> int:
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction) and v.denominator == 1:
        return v.numerator
    raise NonIntegerArgument(f"{what} must be an integer, got {v}")


def _env_note(env: dict[str, int]) -> str:
    if not env:
        return ""
    inside = ", ".join(f"{k}={env[k]}" for k in sorted(env))
    return f" at {inside}"


def eval_expr(e: Expr, env: Env, *, skip_singular: bool = False) -> Rational:
    """Evaluate an expression exactly in the given environment."""
    scope = dict(env)
    return _norm(_eval(e, scope, skip_singular))


def _eval(e: Expr, env: dict[str, int], skip: bool) -> Rational:
    match e:
        case IntLit(v):
            return v
        case Var(name):
            try:
                return env[name]
            except KeyError:
                raise UnboundVariable(f"unbound variable {name!r}") from None
        case Neg(x):
            return -_eval(x, env, skip)
        case Add(a, b):
            return _eval(a, env, skip) + _eval(b, env, skip)
        case Sub(a, b):
            return _eval(a, env, skip) - _eval(b, env, skip)
        case Mul(a, b):
            return _eval(a, env, skip) * _eval(b, env, skip)
        case Div(a, b):
            num = _eval(a, env, skip)
            den = _eval(b, env, skip)
            if den == 0:
                raise SingularTerm(f"division by zero{_env_note(env)}")
            return Fraction(num) / Fraction(den)
        case Pow(base, exp):
            bv = _eval(base, env, skip)
            ev = _as_int(_eval(exp, env, skip), "exponent")
            try:
                return ipow(bv, ev)
            except ZeroDivisionError:
                raise SingularTerm(
                    f"0 raised to negative power {ev}{_env_note(env)}"
                ) from None
        case Fact(x):
            m = _as_int(_eval(x, env, skip), "factorial argument")
            if m < 0:
                raise SingularTerm(
                    f"factorial of negative integer {m}{_env_note(env)}")
            return factorial(m)
        case Binom(top, bottom):
            tv = _eval(top, env, skip)
            kv = _as_int(_eval(bottom, env, skip), "binomial lower argument")
            return binom(tv, kv)
        case H(x):
            return harmonic(_as_int(_eval(x, env, skip), "harmonic argument"))
        case IDiv(a, b):
            av = _as_int(_eval(a, env, skip), "idiv argument")
            bv = _as_int(_eval(b, env, skip), "idiv argument")
            if bv == 0:
                raise SingularTerm(f"idiv by zero{_env_note(env)}")
            return av // bv
        case Sum(index, lo, hi, body):
            lo_v = _as_int(_eval(lo, env, skip), "sum lower bound")
            hi_v = _as_int(_eval(hi, env, skip), "sum upper bound")
            total: Rational = 0
            for v in range(lo_v, hi_v + 1):
                env[index] = v
                try:
                    total += _eval(body, env, skip)
                except SingularTerm:
                    if not skip:
                        raise
            env.pop(index, None)
            return total
        case SumC(indices, total_e, body):
            t = _as_int(_eval(total_e, env, skip), "sumc total")
            acc: Rational = 0
            for parts in _compositions(t, len(indices)):
                for name, v in zip(indices, parts):
                    env[name] = v
                try:
                    acc += _eval(body, env, skip)
                except SingularTerm:
                    if not skip:
                        raise
            for name in indices:
                env.pop(name, None)
            return acc
    raise TypeError(f"not an Expr: {e!r}")


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Nonnegative integer compositions of `total` into `parts` slots,
    in lexicographic order of the part vector."""
    if total < 0:
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first, *rest)


def eval_sequence(e: Expr, n_max: int, *,
                  skip_singular: bool = False,
                  n_min: int = 0) -> list[Rational]:
    """Values of the expression at n = n_min .. n_max inclusive."""
    extra = free_vars(e) - {"n"}
    if extra:
        raise UnboundVariable(
            f"sequence expression has free variables {sorted(extra)}")
    out: list[Rational] = []
    for m in range(n_min, n_max + 1):
        try:
            out.append(eval_expr(e, {"n": m}, skip_singular=skip_singular))
        except EvalError as err:
            raise type(err)(f"n={m}: {err}") from None
    return out


def harmonic_cy_coefficients(b: int, c: int, n_max: int) -> list[Rational]:
    """Coefficients A_n of the holomorphic solution attached to the pair
    of exponents (b, c):

        A_n = (fact(3n)/fact(n)^3)^b
              * sum_{k=0..n} binom(n,k)^c * binom(3n,n+k)^(-b)
                * (1 + k*(-c*H(k) + c*H(n-k) + b*H(n+k) - b*H(2n-k)))

    Exact rational arithmetic throughout; the result is a list of length
    n_max + 1.
    """
    if b < 1 or c < 1:
        raise ValueError("exponents b and c must be positive")
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    out: list[Rational] = []
    for n in range(n_max + 1):
        pre = ipow(factorial(3 * n) // ipow(factorial(n), 3), b)
        acc: Rational = 0
        for k in range(n + 1):
            brace = 1 + k * (-c * harmonic(k) + c * harmonic(n - k)
                             + b * harmonic(n + k) - b * harmonic(2 * n - k))
            acc += ipow(binom(n, k), c) * ipow(binom(3 * n, n + k), -b) * brace
        out.append(_norm(pre * acc))
    return out
