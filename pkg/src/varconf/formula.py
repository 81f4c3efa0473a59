"""Propositional formulas over boolean configuration variables.

Formulas are immutable trees built from :class:`Var`, :class:`Not`,
:class:`And`, :class:`Or` and the two constants :data:`TRUE` and
:data:`FALSE`.  Variables are interned in a :class:`VarTable`, which hands
out dense indices in first-appearance order; an assignment is a tuple of
booleans indexed by those indices.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, Union

Assignment = tuple  # tuple[bool, ...] indexed by Var.index


class FormulaSyntaxError(SyntaxError):
    """Malformed formula text.  ``offset`` is the byte offset of the error."""

    def __init__(self, msg: str, text: str, offset: int):
        super().__init__(f"{msg} at offset {offset}: {text!r}")
        self.text = text
        self.offset = offset


class UnsupportedExpression(ValueError):
    """A preprocessor expression that is not purely boolean (``X > 1``, ``A + B``)."""


@dataclass(frozen=True)
class Const:
    value: bool

    def __repr__(self):
        return "TRUE" if self.value else "FALSE"


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Var:
    name: str
    index: int

    def __repr__(self):
        return f"Var({self.name})"


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class And:
    children: tuple

    def __post_init__(self):
        if not self.children:
            raise ValueError("And needs at least one child")


@dataclass(frozen=True)
class Or:
    children: tuple

    def __post_init__(self):
        if not self.children:
            raise ValueError("Or needs at least one child")


Formula = Union[Const, Var, Not, And, Or]


class VarTable:
    """Append-only name -> index map.  Frozen tables refuse new names."""

    def __init__(self, names: Iterable[str] = ()):
        self._vars: list[Var] = []
        self._by_name: dict[str, Var] = {}
        self.frozen = False
        for name in names:
            self.intern(name)

    def intern(self, name: str) -> Var:
        var = self._by_name.get(name)
        if var is None:
            if self.frozen:
                raise KeyError(f"unknown variable {name!r}")
            var = Var(name, len(self._vars))
            self._vars.append(var)
            self._by_name[name] = var
        return var

    def freeze(self) -> "VarTable":
        self.frozen = True
        return self

    def __getitem__(self, name: str) -> Var:
        return self._by_name[name]

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __len__(self) -> int:
        return len(self._vars)

    def __iter__(self) -> Iterator[Var]:
        return iter(self._vars)

    @property
    def names(self) -> list[str]:
        return [v.name for v in self._vars]

    def assignment(self, values: Mapping[str, bool] | Iterable[str] = ()) -> Assignment:
        """Total assignment from a name->bool mapping or a set of true names.

        Unmentioned variables are false.
        """
        if isinstance(values, Mapping):
            true = {k for k, v in values.items() if v}
            unknown = set(values) - set(self._by_name)
        else:
            true = set(values)
            unknown = true - set(self._by_name)
        if unknown:
            raise KeyError(f"unknown variables: {sorted(unknown)}")
        return tuple(v.name in true for v in self._vars)

    def as_dict(self, a: Assignment) -> dict[str, bool]:
        return {v.name: bool(a[v.index]) for v in self._vars}

    def true_names(self, a: Assignment) -> list[str]:
        return [v.name for v in self._vars if a[v.index]]


# -- smart constructors ------------------------------------------------------

def negate(f: Formula) -> Formula:
    if isinstance(f, Const):
        return FALSE if f.value else TRUE
    if isinstance(f, Not):
        return f.child
    return Not(f)


def conj(*fs: Formula) -> Formula:
    """Flattening conjunction with constant folding."""
    out = []
    for f in fs:
        if f == TRUE:
            continue
        if f == FALSE:
            return FALSE
        if isinstance(f, And):
            out.extend(f.children)
        else:
            out.append(f)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(*fs: Formula) -> Formula:
    """Flattening disjunction with constant folding."""
    out = []
    for f in fs:
        if f == FALSE:
            continue
        if f == TRUE:
            return TRUE
        if isinstance(f, Or):
            out.extend(f.children)
        else:
            out.append(f)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


# -- evaluation --------------------------------------------------------------

def evaluate(f: Formula, a: Sequence[bool]) -> bool:
    if isinstance(f, Var):
        return bool(a[f.index])
    if isinstance(f, Not):
        return not evaluate(f.child, a)
    if isinstance(f, And):
        return all(evaluate(c, a) for c in f.children)
    if isinstance(f, Or):
        return any(evaluate(c, a) for c in f.children)
    return f.value


def variables(f: Formula) -> set[Var]:
    out: set[Var] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Var):
            out.add(g)
        elif isinstance(g, Not):
            stack.append(g.child)
        elif isinstance(g, (And, Or)):
            stack.extend(g.children)
    return out


def max_index(fs: Iterable[Formula]) -> int:
    """One past the largest variable index used, i.e. the minimal table size."""
    top = 0
    for f in fs:
        for v in variables(f):
            top = max(top, v.index + 1)
    return top


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<num>\d+[uUlL]*)"
    r"|(?P<op>&&|\|\||==|!=|<=|>=|<<|>>|[!()<>+\-*/%&|^~?:,]))"
)
_ARITH_OPS = {"==", "!=", "<=", ">=", "<<", ">>", "<", ">", "+", "-", "*", "/",
              "%", "&", "|", "^", "~", "?", ":", ","}


def _tokenize(text: str, preprocessor: bool):
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise FormulaSyntaxError("unexpected character", text, bad)
        start = m.start(m.lastgroup)
        kind = m.lastgroup
        val = m.group(kind)
        if kind == "op" and val in _ARITH_OPS:
            if preprocessor:
                raise UnsupportedExpression(
                    f"non-boolean operator {val!r} in {text.strip()!r}")
            raise FormulaSyntaxError(f"unexpected operator {val!r}", text, start)
        if kind == "num":
            if not preprocessor:
                raise FormulaSyntaxError("unexpected number", text, start)
            digits = val.rstrip("uUlL")
            if digits not in ("0", "1"):
                raise UnsupportedExpression(
                    f"integer constant {val} in {text.strip()!r}")
            kind, val = "ident", "true" if digits == "1" else "false"
        toks.append((kind, val, start))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, vars: VarTable, preprocessor: bool):
        self.text = text
        self.vars = vars
        self.preprocessor = preprocessor
        self.toks = _tokenize(text, preprocessor)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, val):
        kind, v, off = self.take()
        if v != val:
            raise FormulaSyntaxError(f"expected {val!r}", self.text, off)

    def parse(self) -> Formula:
        f = self.disjunction()
        kind, _, off = self.peek()
        if kind != "eof":
            raise FormulaSyntaxError("trailing input", self.text, off)
        return f

    def disjunction(self):
        parts = [self.conjunction()]
        while self.peek()[1] == "||":
            self.take()
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self):
        parts = [self.unary()]
        while self.peek()[1] == "&&":
            self.take()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self):
        if self.peek()[1] == "!":
            self.take()
            return Not(self.unary())
        return self.atom()

    def atom(self):
        kind, val, off = self.take()
        if val == "(":
            f = self.disjunction()
            self.expect(")")
            return f
        if kind != "ident":
            raise FormulaSyntaxError("expected operand", self.text, off)
        if val == "true":
            return TRUE
        if val == "false":
            return FALSE
        if self.preprocessor and val == "defined":
            if self.peek()[1] == "(":
                self.take()
                name = self._ident()
                self.expect(")")
            else:
                name = self._ident()
            return self.vars.intern(name)
        if self.preprocessor and self.peek()[1] == "(":
            raise UnsupportedExpression(
                f"function-like macro {val}() in {self.text.strip()!r}")
        return self.vars.intern(val)

    def _ident(self):
        kind, val, off = self.take()
        if kind != "ident":
            raise FormulaSyntaxError("expected identifier", self.text, off)
        return val


def parse_formula(text: str, vars: VarTable, *, preprocessor: bool = False) -> Formula:
    """Parse ``!``/``&&``/``||`` infix text, interning new names into ``vars``.

    With ``preprocessor=True`` the input is a ``#if`` expression: ``defined X``
    and ``defined(X)`` mean ``X``, the integers 0 and 1 mean false and true,
    and arithmetic raises :class:`UnsupportedExpression`.
    """
    return _Parser(text, vars, preprocessor).parse()


_PREC = {Or: 1, And: 2, Not: 3}


def to_text(f: Formula) -> str:
    """Minimally parenthesized infix text; ``parse_formula`` reads it back."""
    return _print(f, 0)


def _print(f, ctx):
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Var):
        return f.name
    if isinstance(f, (And, Or)) and len(f.children) == 1:
        return _print(f.children[0], ctx)
    prec = _PREC[type(f)]
    if isinstance(f, Not):
        s = "!" + _print(f.child, prec)
    else:
        sep = " && " if isinstance(f, And) else " || "
        # same-operator children would be re-associated by the parser
        s = sep.join(_print(c, prec + 1 if type(c) is type(f) else prec)
                     for c in f.children)
    return f"({s})" if prec < ctx or (prec == ctx and prec != 3) else s


# -- normal form fast path -----------------------------------------------------

def normal_key(f: Formula):
    """Hashable key equal for formulas that differ only by And/Or flattening,
    child order, duplicate children and double negation."""
    if isinstance(f, Const):
        return ("c", f.value)
    if isinstance(f, Var):
        return ("v", f.index)
    if isinstance(f, Not):
        if isinstance(f.child, Not):
            return normal_key(f.child.child)
        return ("n", normal_key(f.child))
    tag = "a" if isinstance(f, And) else "o"
    keys = set()
    for c in f.children:
        k = normal_key(c)
        if k[0] == tag:
            keys.update(k[1])
        else:
            keys.add(k)
    if len(keys) == 1:
        return next(iter(keys))
    return (tag, frozenset(keys))


# -- CNF -----------------------------------------------------------------------

@dataclass
class CnfInstance:
    """Clauses of DIMACS-style literals.  Variable ``i`` of the table is
    literal ``i + 1``; auxiliaries follow the originals."""

    clauses: list
    num_original_vars: int
    num_aux_vars: int

    @property
    def num_vars(self) -> int:
        return self.num_original_vars + self.num_aux_vars


class TseitinEncoder:
    """Structure-preserving encoding of formulas into a clause sink.

    ``new_var`` returns a fresh positive DIMACS variable and ``add_clause``
    receives lists of literals.  Every subformula gets a literal that is
    equivalent to it (both implication directions), so any model of the
    emitted clauses restricted to the original variables is a model of the
    encoded formula and vice versa.
    """

    def __init__(self, new_var, add_clause):
        self.new_var = new_var
        self.add_clause = add_clause
        self._cache: dict = {}
        self._true = None

    def true_lit(self) -> int:
        if self._true is None:
            self._true = self.new_var()
            self.add_clause([self._true])
        return self._true

    def lit(self, f: Formula) -> int:
        if isinstance(f, Var):
            return f.index + 1
        if isinstance(f, Const):
            t = self.true_lit()
            return t if f.value else -t
        if isinstance(f, Not):
            return -self.lit(f.child)
        hit = self._cache.get(f)
        if hit is not None:
            return hit
        kids = [self.lit(c) for c in f.children]
        if len(kids) == 1:
            out = kids[0]
        else:
            out = self.new_var()
            if isinstance(f, And):
                for k in kids:
                    self.add_clause([-out, k])
                self.add_clause([out] + [-k for k in kids])
            else:
                for k in kids:
                    self.add_clause([out, -k])
                self.add_clause([-out] + kids)
        self._cache[f] = out
        return out

    def assert_formula(self, f: Formula) -> None:
        """Add clauses forcing ``f`` true, clausifying top-level structure directly."""
        if f == TRUE:
            return
        if f == FALSE:
            self.add_clause([])
            return
        if isinstance(f, And):
            for c in f.children:
                self.assert_formula(c)
        elif isinstance(f, Or):
            self.add_clause([self.lit(c) for c in f.children])
        else:
            self.add_clause([self.lit(f)])


def to_cnf(f: Formula, num_vars: int | None = None) -> CnfInstance:
    n = max_index([f]) if num_vars is None else num_vars
    clauses: list = []
    counter = [n]

    def new_var():
        counter[0] += 1
        return counter[0]

    TseitinEncoder(new_var, clauses.append).assert_formula(f)
    return CnfInstance(clauses, n, counter[0] - n)


def semantically_equal(f: Formula, g: Formula) -> bool:
    """True iff ``f <-> g`` is valid; decided by one SAT call on ``!(f <-> g)``."""
    if normal_key(f) == normal_key(g):
        return True
    from varconf.backend import SatCore

    core = SatCore()
    for _ in range(max_index([f, g])):
        core.new_var()
    enc = TseitinEncoder(core.new_var, core.add_clause)
    lf, lg = enc.lit(f), enc.lit(g)
    core.add_clause([lf, lg])
    core.add_clause([-lf, -lg])
    return not core.solve()
