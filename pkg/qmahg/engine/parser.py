"""
Polynomial expression grammar.

    number  :: digits ['.' digits] [('e'|'E') ['+'|'-'] digits]
    atom    :: number | identifier | '(' expr ')'
    factor  :: atom ['^' integer]
    signed  :: ['+'|'-']* factor
    term    :: signed [('*'|'/') signed]*
    expr    :: term [('+'|'-') term]*

Identifiers are the variables of the target PolySpace plus the imaginary unit
`i`. Division is allowed by real constants only, so p/q literals stay exact.
"""
import logging
from fractions import Fraction

from pyparsing import (
    Forward,
    ParseBaseException,
    ParseFatalException,
    Regex,
    Suppress,
    Word,
    ZeroOrMore,
    alphanums,
    alphas,
    col,
    lineno,
    nums,
    one_of,
)

from qmahg.engine.polynomial import PolyScalar, PolySpace
from qmahg.errors import ExpressionSyntaxError

logger = logging.getLogger(__name__)

IMAGINARY_UNIT = "i"


class PolynomialParser:
    def __init__(self, space: PolySpace):
        self.space = space
        self.bnf = self._build()

    def _build(self):
        expr = Forward()
        number = Regex(r"(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?").set_parse_action(self._number)
        ident = Word(alphas, alphanums + "_").set_parse_action(self._identifier)
        atom = number | ident | (Suppress("(") + expr + Suppress(")"))
        factor = (atom + ZeroOrMore(Suppress("^") + Word(nums))).set_parse_action(self._power)
        signed = (ZeroOrMore(one_of("+ -")) + factor).set_parse_action(self._sign)
        term = (signed + ZeroOrMore(one_of("* /") + signed)).set_parse_action(self._fold)
        expr <<= (term + ZeroOrMore(one_of("+ -") + term)).set_parse_action(self._fold)
        return expr

    # --- parse actions ---

    def _number(self, s, loc, toks):
        text = toks[0]
        value = Fraction(text) if self.space.exact else float(text)
        return PolyScalar.constant(self.space, value)

    def _identifier(self, s, loc, toks):
        name = toks[0]
        if name == IMAGINARY_UNIT:
            return PolyScalar.constant(self.space, 1j)
        if name not in self.space.names:
            raise ParseFatalException(s, loc, f"unknown identifier '{name}'")
        return PolyScalar.variable(self.space, name)

    def _power(self, s, loc, toks):
        base = toks[0]
        if len(toks) > 2:
            raise ParseFatalException(s, loc, "chained exponents are not supported")
        if len(toks) == 2:
            return base ** int(toks[1])
        return base

    def _sign(self, s, loc, toks):
        value = toks[-1]
        negative = sum(1 for tok in toks[:-1] if tok == "-") % 2
        return -value if negative else value

    def _fold(self, s, loc, toks):
        acc = toks[0]
        for i in range(1, len(toks), 2):
            op, rhs = toks[i], toks[i + 1]
            if op == "+":
                acc = acc + rhs
            elif op == "-":
                acc = acc - rhs
            elif op == "*":
                acc = acc * rhs
            else:
                acc = self._divide(s, loc, acc, rhs)
        return acc

    def _divide(self, s, loc, num: PolyScalar, den: PolyScalar) -> PolyScalar:
        if not den.is_constant() or not den.is_real():
            raise ParseFatalException(s, loc, "division is only allowed by real constants")
        value = den.constant_value()
        if value == 0:
            raise ParseFatalException(s, loc, "division by zero")
        return num / value

    def parse(self, text: str) -> PolyScalar:
        if not text or not text.strip():
            raise ExpressionSyntaxError("empty expression", 1, 1, text or "")
        try:
            result = self.bnf.parse_string(text, parse_all=True)
        except ParseBaseException as e:
            raise ExpressionSyntaxError(e.msg, e.lineno, e.col, e.line)
        except ArithmeticError as e:
            raise ExpressionSyntaxError(str(e), lineno(0, text), col(0, text), text)
        logger.debug(f"parsed '{text}' into {result[0]!r}")
        return result[0]


def parse_polynomial(text: str, space: PolySpace) -> PolyScalar:
    return PolynomialParser(space).parse(text)
