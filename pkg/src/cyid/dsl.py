"""Formula AST, plain-text grammar, parser, and round-tripping printer.

Grammar (whitespace-insensitive):

    expr     := term (('+'|'-') term)*
    term     := factor (('*'|'/') factor)*
    factor   := ('-')? atom ('^' exponent)?
    exponent := signed integer | '(' expr ')'
    atom     := integer | name | '(' expr ')'
              | 'binom(' expr ',' expr ')' | 'fact(' expr ')'
              | 'H(' expr ')' | 'idiv(' expr ',' expr ')'
              | 'sum(' name '=' expr '..' expr ',' expr ')'
              | 'sumc(' name ('+' name)+ '=' expr ',' expr ')'

'+', '-', '*', '/' are left-associative; '^' binds tighter than '*';
unary minus binds tighter than '^', so a negative base needs no inner
parentheses but exponentiating a whole negation does ('-(a^b)').
Sum bounds, sumc totals, and exponents may not contain sum/sumc nodes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

VAR_NAMES = frozenset("nijklpm")
_KEYWORDS = frozenset({"sum", "sumc", "binom", "fact", "H", "idiv"})


class Expr:
    """Base class for formula AST nodes."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class IntLit(Expr):
    value: int


@dataclass(frozen=True, slots=True)
class Var(Expr):
    name: str


@dataclass(frozen=True, slots=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True, slots=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Pow(Expr):
    base: Expr
    exp: Expr  # must evaluate to an integer


@dataclass(frozen=True, slots=True)
class Fact(Expr):
    operand: Expr


@dataclass(frozen=True, slots=True)
class Binom(Expr):
    top: Expr
    bottom: Expr


@dataclass(frozen=True, slots=True)
class H(Expr):
    operand: Expr


@dataclass(frozen=True, slots=True)
class IDiv(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, slots=True)
class Sum(Expr):
    index: str
    lo: Expr
    hi: Expr
    body: Expr


@dataclass(frozen=True, slots=True)
class SumC(Expr):
    indices: tuple[str, ...]
    total: Expr
    body: Expr


ExprNode = Union[
    IntLit, Var, Neg, Add, Sub, Mul, Div, Pow, Fact, Binom, H, IDiv, Sum, SumC
]


class ParseError(ValueError):
    """Syntax error with a position in the source text."""

    def __init__(self, message: str, text: str, pos: int) -> None:
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} at line {line}, column {col}")
        self.pos = pos


_Token = tuple[str, str, int]  # kind, value, position


def _tokenize(text: str) -> Iterator[_Token]:
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            yield ("int", text[i:j], i)
            i = j
        elif ch.isalpha():
            j = i
            while j < n and text[j].isalpha():
                j += 1
            yield ("word", text[i:j], i)
            i = j
        elif ch == "." and text[i : i + 2] == "..":
            yield ("..", "..", i)
            i += 2
        elif ch in "+-*/^(),=":
            yield (ch, ch, i)
            i += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", text, i)
    yield ("end", "", n)


class _Parser:
    def __init__(self, text: str) -> None:
        self.text = text
        self.tokens = list(_tokenize(text))
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.peek()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1] or 'end of input'!r}",
                             self.text, tok[2])
        return self.next()

    def fail(self, message: str) -> ParseError:
        return ParseError(message, self.text, self.peek()[2])

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise self.fail(f"unexpected trailing input {tok[1]!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[0] in "+-":
            op = self.next()[0]
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek()[0] in "*/":
            op = self.next()[0]
            rhs = self.factor()
            e = Mul(e, rhs) if op == "*" else Div(e, rhs)
        return e

    def factor(self) -> Expr:
        if self.peek()[0] == "-":
            self.next()
            base: Expr = Neg(self.atom())
        else:
            base = self.atom()
        if self.peek()[0] == "^":
            self.next()
            e = self.exponent()
            _reject_sums(e, self.text, self.peek()[2], "exponent")
            return Pow(base, e)
        return base

    def exponent(self) -> Expr:
        tok = self.peek()
        if tok[0] == "int":
            self.next()
            return IntLit(int(tok[1]))
        if tok[0] == "-":
            self.next()
            val = self.expect("int")
            return IntLit(-int(val[1]))
        if tok[0] == "(":
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        raise self.fail("expected integer or parenthesized exponent")

    def name(self) -> str:
        tok = self.expect("word")
        if tok[1] not in VAR_NAMES:
            raise ParseError(f"unknown variable {tok[1]!r}", self.text, tok[2])
        return tok[1]

    def atom(self) -> Expr:
        tok = self.peek()
        if tok[0] == "int":
            self.next()
            return IntLit(int(tok[1]))
        if tok[0] == "(":
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        if tok[0] != "word":
            raise self.fail(f"expected a value, found {tok[1] or 'end of input'!r}")
        word = tok[1]
        if word in VAR_NAMES:
            self.next()
            return Var(word)
        if word not in _KEYWORDS:
            raise ParseError(f"unknown identifier {word!r}", self.text, tok[2])
        self.next()
        self.expect("(")
        if word == "binom":
            top = self.expr()
            self.expect(",")
            bottom = self.expr()
            self.expect(")")
            return Binom(top, bottom)
        if word == "fact":
            e = self.expr()
            self.expect(")")
            return Fact(e)
        if word == "H":
            e = self.expr()
            self.expect(")")
            return H(e)
        if word == "idiv":
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect(")")
            return IDiv(a, b)
        if word == "sum":
            index = self.name()
            self.expect("=")
            lo = self.expr()
            _reject_sums(lo, self.text, tok[2], "sum bound")
            self.expect("..")
            hi = self.expr()
            _reject_sums(hi, self.text, tok[2], "sum bound")
            self.expect(",")
            body = self.expr()
            self.expect(")")
            return Sum(index, lo, hi, body)
        # sumc
        indices = [self.name()]
        while self.peek()[0] == "+":
            self.next()
            indices.append(self.name())
        if len(indices) < 2:
            raise self.fail("sumc needs at least two indices")
        self.expect("=")
        total = self.expr()
        _reject_sums(total, self.text, tok[2], "sumc total")
        self.expect(",")
        body = self.expr()
        self.expect(")")
        return SumC(tuple(indices), total, body)


def _reject_sums(e: Expr, text: str, pos: int, where: str) -> None:
    if _contains_sum(e):
        raise ParseError(f"{where} may not contain a sum", text, pos)


def _contains_sum(e: Expr) -> bool:
    match e:
        case Sum() | SumC():
            return True
        case IntLit() | Var():
            return False
        case Neg(x) | Fact(x) | H(x):
            return _contains_sum(x)
        case Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | Pow(a, b) | Binom(a, b) | IDiv(a, b):
            return _contains_sum(a) or _contains_sum(b)
    raise TypeError(f"not an Expr: {e!r}")


def parse(text: str) -> Expr:
    """Parse DSL text into an AST; raises ParseError with position info."""
    return _Parser(text).parse()


# Rendering.  Precedence levels: additive 1, multiplicative 2, power 3,
# atoms 4.  render(parse(s)) is not textually s, but parse(render(e)) == e.

def _prec(e: Expr) -> int:
    match e:
        case Add() | Sub():
            return 1
        case Mul() | Div():
            return 2
        case Neg() | Pow():
            return 3
        case _:
            return 4


def _wrap(e: Expr, limit: int) -> str:
    s = render(e)
    return f"({s})" if _prec(e) < limit else s


def render(e: Expr) -> str:
    """Print an AST so that parse(render(e)) reproduces it exactly."""
    match e:
        case IntLit(v):
            return str(v) if v >= 0 else f"({v})"
        case Var(name):
            return name
        case Neg(x):
            # the grammar allows '-' only before an atom
            return f"-{_wrap(x, 4)}"
        case Add(a, b):
            return f"{_wrap(a, 1)} + {_wrap(b, 2)}"
        case Sub(a, b):
            return f"{_wrap(a, 1)} - {_wrap(b, 2)}"
        case Mul(a, b):
            return f"{_wrap(a, 2)}*{_wrap(b, 3)}"
        case Div(a, b):
            return f"{_wrap(a, 2)}/{_wrap(b, 3)}"
        case Pow(base, exp):
            if isinstance(base, Neg):
                b = f"-{_wrap(base.operand, 4)}"
            elif _prec(base) == 4:
                b = render(base)
            else:
                b = f"({render(base)})"
            if isinstance(exp, IntLit):
                return f"{b}^{exp.value}"
            return f"{b}^({render(exp)})"
        case Fact(x):
            return f"fact({render(x)})"
        case Binom(t, bm):
            return f"binom({render(t)},{render(bm)})"
        case H(x):
            return f"H({render(x)})"
        case IDiv(a, b):
            return f"idiv({render(a)},{render(b)})"
        case Sum(index, lo, hi, body):
            return f"sum({index}={render(lo)}..{render(hi)}, {render(body)})"
        case SumC(indices, total, body):
            heads = "+".join(indices)
            return f"sumc({heads}={render(total)}, {render(body)})"
    raise TypeError(f"not an Expr: {e!r}")


def free_vars(e: Expr) -> frozenset[str]:
    """Unbound variable names of an expression."""
    match e:
        case IntLit():
            return frozenset()
        case Var(name):
            return frozenset({name})
        case Neg(x) | Fact(x) | H(x):
            return free_vars(x)
        case Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | Pow(a, b) | Binom(a, b) | IDiv(a, b):
            return free_vars(a) | free_vars(b)
        case Sum(index, lo, hi, body):
            return free_vars(lo) | free_vars(hi) | (free_vars(body) - {index})
        case SumC(indices, total, body):
            return free_vars(total) | (free_vars(body) - set(indices))
    raise TypeError(f"not an Expr: {e!r}")


def bound_indices(e: Expr) -> list[str]:
    """All index names bound by sum/sumc nodes, in prefix order."""
    out: list[str] = []

    def walk(node: Expr) -> None:
        match node:
            case Sum(index, lo, hi, body):
                out.append(index)
                walk(lo)
                walk(hi)
                walk(body)
            case SumC(indices, total, body):
                out.extend(indices)
                walk(total)
                walk(body)
            case Neg(x) | Fact(x) | H(x):
                walk(x)
            case Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | Pow(a, b) | Binom(a, b) | IDiv(a, b):
                walk(a)
                walk(b)
            case _:
                pass

    walk(e)
    return out
