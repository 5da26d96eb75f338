"""The modal logic with tt, conjunction and <a>{cmp q}: syntax, parser and LMP semantics."""

from dataclasses import dataclass
from fractions import Fraction
import operator

from .errors import FormulaSyntaxError, UnknownLabel, ValidationError
from .measurable import fmt_fraction

COMPARATORS = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge}


@dataclass(frozen=True)
class Top:
    def __str__(self):
        return "tt"


@dataclass(frozen=True)
class And:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} & {self.right})"


@dataclass(frozen=True)
class Diamond:
    label: str
    cmp: str
    q: Fraction
    body: object

    def __str__(self):
        return f"<{self.label}>{{{self.cmp}{fmt_fraction(self.q)}}} {self.body}"


TT = Top()


def labels_of(phi):
    if isinstance(phi, Top):
        return set()
    if isinstance(phi, And):
        return labels_of(phi.left) | labels_of(phi.right)
    return {phi.label} | labels_of(phi.body)


def comparators_of(phi):
    if isinstance(phi, Top):
        return set()
    if isinstance(phi, And):
        return comparators_of(phi.left) | comparators_of(phi.right)
    return {phi.cmp} | comparators_of(phi.body)


def depth(phi):
    if isinstance(phi, Top):
        return 0
    if isinstance(phi, And):
        return max(depth(phi.left), depth(phi.right))
    return 1 + depth(phi.body)


class _Parser:
    def __init__(self, text):
        self.text = text
        self.pos = 0

    def error(self, message, pos=None):
        raise FormulaSyntaxError(message, self.pos if pos is None else pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, token):
        self.skip()
        if not self.text.startswith(token, self.pos):
            self.error(f"expected {token!r}")
        self.pos += len(token)

    def integer(self):
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected an integer")
        return int(self.text[start:self.pos])

    def formula(self):
        self.skip()
        t = self.text
        if t.startswith("tt", self.pos):
            self.pos += 2
            return TT
        if t.startswith("(", self.pos):
            self.pos += 1
            left = self.formula()
            self.expect("&")
            right = self.formula()
            self.expect(")")
            return And(left, right)
        if t.startswith("<", self.pos):
            self.pos += 1
            start = self.pos
            while self.pos < len(t) and t[self.pos] not in "<>{}()& \t\n":
                self.pos += 1
            if start == self.pos:
                self.error("expected a label")
            label = t[start:self.pos]
            self.expect(">")
            self.expect("{")
            self.skip()
            for cmp in ("<=", ">=", "<", ">"):
                if t.startswith(cmp, self.pos):
                    self.pos += len(cmp)
                    break
            else:
                self.error("expected one of <, <=, >, >=")
            self.skip()
            qpos = self.pos
            num = self.integer()
            den = 1
            if t.startswith("/", self.pos):
                self.pos += 1
                den = self.integer()
                if den == 0:
                    self.error("zero denominator", qpos)
            q = Fraction(num, den)
            if q > 1:
                self.error("threshold must lie in [0, 1]", qpos)
            self.expect("}")
            return Diamond(label, cmp, q, self.formula())
        if self.pos >= len(t):
            self.error("unexpected end of input")
        self.error(f"unexpected character {t[self.pos]!r}")


def parse_formula(text):
    p = _Parser(text)
    phi = p.formula()
    p.skip()
    if p.pos != len(text):
        p.error("trailing input")
    return phi


def semantics(S, phi, extended=False):
    """The set of states of ``S`` satisfying ``phi``.

    Only the comparator ``>`` belongs to the LMP logic; ``extended=True`` admits
    the other three and is reported as such by callers.
    """
    if isinstance(phi, Top):
        return S.space.full
    if isinstance(phi, And):
        return S.space.measurable(semantics(S, phi.left, extended) & semantics(S, phi.right, extended))
    if phi.label not in S.kernel:
        raise UnknownLabel(f"formula uses label {phi.label!r} unknown to the process")
    if phi.cmp != ">" and not extended:
        raise ValidationError(f"comparator {phi.cmp!r} is outside the LMP logic (only '>')")
    inner = semantics(S, phi.body, extended)
    cmp = COMPARATORS[phi.cmp]
    return S.space.measurable(s for s in S.states if cmp(S.tau(phi.label, s, inner), phi.q))
