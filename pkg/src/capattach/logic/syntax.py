"""First-order formulas over graphs: AST, s-expression parser, printer.

Grammar (one formula per s-expression, ``;`` starts a comment)::

    phi ::= (forall x phi) | (exists x phi)
          | (and phi phi ...) | (or phi phi ...) | (not phi)
          | (implies phi phi) | (iff phi phi)
          | (adj x y) | (eq x y)
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property

from ..errors import FormulaSyntaxError, FreeVariableError


class Formula:
    """Base class; subclasses are frozen dataclasses."""

    @cached_property
    def depth(self) -> int:
        """Quantifier depth."""
        return _depth(self)

    @cached_property
    def free(self) -> frozenset:
        return _free(self)

    @cached_property
    def variables(self) -> frozenset:
        """All variable names occurring, bound or free."""
        return _vars(self)

    @property
    def variable_count(self) -> int:
        return len(self.variables)

    @property
    def is_sentence(self) -> bool:
        return not self.free

    def __str__(self):
        return to_sexpr(self)


@dataclass(frozen=True, eq=True)
class Adj(Formula):
    x: str
    y: str


@dataclass(frozen=True, eq=True)
class Eq(Formula):
    x: str
    y: str


@dataclass(frozen=True, eq=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True, eq=True)
class And(Formula):
    parts: tuple


@dataclass(frozen=True, eq=True)
class Or(Formula):
    parts: tuple


@dataclass(frozen=True, eq=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True, eq=True)
class Exists(Formula):
    var: str
    body: Formula


def children(f: Formula) -> tuple:
    if isinstance(f, (And, Or)):
        return f.parts
    if isinstance(f, (Implies, Iff)):
        return (f.left, f.right)
    if isinstance(f, (Not, Forall, Exists)):
        return (f.body,)
    return ()


def _depth(f):
    if isinstance(f, (Forall, Exists)):
        return 1 + f.body.depth
    return max((c.depth for c in children(f)), default=0)


def _free(f):
    if isinstance(f, (Adj, Eq)):
        return frozenset((f.x, f.y))
    if isinstance(f, (Forall, Exists)):
        return f.body.free - {f.var}
    return frozenset().union(*(c.free for c in children(f)))


def _vars(f):
    if isinstance(f, (Adj, Eq)):
        return frozenset((f.x, f.y))
    own = {f.var} if isinstance(f, (Forall, Exists)) else set()
    return frozenset(own).union(*(c.variables for c in children(f)))


def to_sexpr(f: Formula) -> str:
    if isinstance(f, Adj):
        return f"(adj {f.x} {f.y})"
    if isinstance(f, Eq):
        return f"(eq {f.x} {f.y})"
    if isinstance(f, Not):
        return f"(not {to_sexpr(f.body)})"
    if isinstance(f, And):
        return "(and " + " ".join(map(to_sexpr, f.parts)) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(map(to_sexpr, f.parts)) + ")"
    if isinstance(f, Implies):
        return f"(implies {to_sexpr(f.left)} {to_sexpr(f.right)})"
    if isinstance(f, Iff):
        return f"(iff {to_sexpr(f.left)} {to_sexpr(f.right)})"
    if isinstance(f, Forall):
        return f"(forall {f.var} {to_sexpr(f.body)})"
    if isinstance(f, Exists):
        return f"(exists {f.var} {to_sexpr(f.body)})"
    raise TypeError(f"not a formula: {f!r}")


@dataclass(frozen=True)
class Sentence:
    """A closed formula with an optional catalog name."""

    formula: Formula
    name: str | None = None

    def __post_init__(self):
        if self.formula.free:
            raise FreeVariableError(
                f"free variables {sorted(self.formula.free)} in {to_sexpr(self.formula)}")

    @property
    def depth(self) -> int:
        return self.formula.depth

    @property
    def variable_count(self) -> int:
        return self.formula.variable_count

    @property
    def text(self) -> str:
        return to_sexpr(self.formula)

    def __str__(self):
        return self.text


# -- parser ---------------------------------------------------------------

_TOKEN = re.compile(r"\s+|;[^\n]*|(?P<open>\()|(?P<close>\))|(?P<atom>[^\s();]+)")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*$")
_KEYWORDS = {"forall", "exists", "and", "or", "not", "implies", "iff", "adj", "eq"}


def _tokens(text):
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if mt is None:  # unreachable: the atom branch matches any other character
            raise FormulaSyntaxError("unexpected character", line, pos - line_start + 1)
        col = pos - line_start + 1
        if mt.lastgroup:
            yield mt.lastgroup, mt.group(), line, col
        chunk = mt.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = mt.end()


def _read(tokens, i, text_end):
    """Read one s-expression starting at tokens[i]; return (tree, next index)."""
    if i >= len(tokens):
        raise FormulaSyntaxError("unexpected end of input", *text_end)
    kind, val, line, col = tokens[i]
    if kind == "close":
        raise FormulaSyntaxError("unexpected ')'", line, col)
    if kind == "atom":
        return (val, line, col), i + 1
    items = []
    i += 1
    while True:
        if i >= len(tokens):
            raise FormulaSyntaxError(f"unclosed '(' opened at line {line}, column {col}", *text_end)
        if tokens[i][0] == "close":
            return (items, line, col), i + 1
        item, i = _read(tokens, i, text_end)
        items.append(item)


def _var(node):
    val, line, col = node
    if isinstance(val, list):
        raise FormulaSyntaxError("expected a variable, found a list", line, col)
    if not _IDENT.match(val) or val in _KEYWORDS:
        raise FormulaSyntaxError(f"invalid variable name {val!r}", line, col)
    return val


def _build(node) -> Formula:
    items, line, col = node
    if not isinstance(items, list):
        raise FormulaSyntaxError(f"expected a formula, found {items!r}", line, col)
    if not items:
        raise FormulaSyntaxError("empty formula '()'", line, col)
    head, hline, hcol = items[0]
    if isinstance(head, list):
        raise FormulaSyntaxError("operator expected", hline, hcol)
    args = items[1:]

    def arity(ok, expected):
        if not ok:
            raise FormulaSyntaxError(f"'{head}' takes {expected}, got {len(args)}", line, col)

    if head in ("forall", "exists"):
        arity(len(args) == 2, "a variable and a formula")
        cls = Forall if head == "forall" else Exists
        return cls(_var(args[0]), _build(args[1]))
    if head in ("adj", "eq"):
        arity(len(args) == 2, "two variables")
        cls = Adj if head == "adj" else Eq
        return cls(_var(args[0]), _var(args[1]))
    if head == "not":
        arity(len(args) == 1, "one formula")
        return Not(_build(args[0]))
    if head in ("and", "or"):
        arity(len(args) >= 2, "at least two formulas")
        cls = And if head == "and" else Or
        return cls(tuple(_build(a) for a in args))
    if head in ("implies", "iff"):
        arity(len(args) == 2, "two formulas")
        cls = Implies if head == "implies" else Iff
        return cls(_build(args[0]), _build(args[1]))
    raise FormulaSyntaxError(f"unknown operator {head!r}", hline, hcol)


def _end_position(text):
    line = text.count("\n") + 1
    return line, len(text) - (text.rfind("\n") + 1) + 1


def parse_formulas(text: str) -> list[Formula]:
    """Every top-level s-expression in ``text``, free variables allowed."""
    tokens = list(_tokens(text))
    end = _end_position(text)
    out = []
    i = 0
    while i < len(tokens):
        tree, i = _read(tokens, i, end)
        out.append(_build(tree))
    return out


def parse_formula(text: str) -> Formula:
    forms = parse_formulas(text)
    if not forms:
        raise FormulaSyntaxError("no formula found", *_end_position(text))
    if len(forms) > 1:
        tokens = list(_tokens(text))
        # locate the start of the second expression for the error position
        _, i = _read(tokens, 0, _end_position(text))
        _, _, line, col = tokens[i]
        raise FormulaSyntaxError("trailing input after formula", line, col)
    return forms[0]


def parse_sentence(text: str, name: str | None = None) -> Sentence:
    return Sentence(parse_formula(text), name)


def parse_sentences(text: str) -> list[Sentence]:
    return [Sentence(f) for f in parse_formulas(text)]
