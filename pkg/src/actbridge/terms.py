"""First-order terms shared by the ontology, constraint and event-calculus layers.

Fluents, event arguments and constraint atoms are all built from three node
kinds: ``Var`` (``?x``), ``Lit`` (a quoted literal such as ``'polite'``) and
``Fn`` (a functor applied to arguments; a constant is an ``Fn`` with no
arguments).  A small parser reads the textual notation used in golden files,
registry effect lines and observation files.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Union


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self) -> str:
        return f"?{self.name}"


@dataclass(frozen=True, order=True)
class Lit:
    value: str

    def __str__(self) -> str:
        escaped = self.value.translate(_LIT_ESCAPES)
        return f"'{escaped}'"


_LIT_ESCAPES = str.maketrans({"\\": "\\\\", "'": "\\'", "\n": "\\n", "\t": "\\t", "\r": "\\r"})
_LIT_CONTROLS = {"n": "\n", "t": "\t", "r": "\r"}


def unescape_literal(body: str) -> str:
    """Inverse of the escaping ``Lit`` uses when rendered (quotes already stripped)."""
    return re.sub(r"\\(.)", lambda m: _LIT_CONTROLS.get(m.group(1), m.group(1)), body, flags=re.S)


@dataclass(frozen=True)
class Fn:
    functor: str
    args: tuple["Term", ...] = ()

    def __str__(self) -> str:
        return render(self)

    def __lt__(self, other: object) -> bool:
        return sort_key(self) < sort_key(other)  # type: ignore[arg-type]


Term = Union[Var, Lit, Fn]
Subst = Mapping[Var, Term]


def const(name: str) -> Fn:
    return Fn(name)


def fn(functor: str, *args: Union[Term, str]) -> Fn:
    """Build ``functor(args...)``; bare strings become constants (``?x`` a variable)."""
    return Fn(functor, tuple(_coerce(a) for a in args))


def _coerce(arg: Union[Term, str]) -> Term:
    if isinstance(arg, str):
        return Var(arg[1:]) if arg.startswith("?") else Fn(arg)
    return arg


def is_ground(term: Term) -> bool:
    if isinstance(term, Var):
        return False
    if isinstance(term, Fn):
        return all(is_ground(a) for a in term.args)
    return True


def variables(term: Term) -> set[Var]:
    if isinstance(term, Var):
        return {term}
    if isinstance(term, Fn):
        out: set[Var] = set()
        for a in term.args:
            out |= variables(a)
        return out
    return set()


def subterms(term: Term) -> Iterator[Term]:
    yield term
    if isinstance(term, Fn):
        for a in term.args:
            yield from subterms(a)


def substitute(term: Term, subst: Subst) -> Term:
    if isinstance(term, Var):
        return subst.get(term, term)
    if isinstance(term, Fn) and term.args:
        return Fn(term.functor, tuple(substitute(a, subst) for a in term.args))
    return term


def match(pattern: Term, ground: Term, subst: dict[Var, Term] | None = None) -> dict[Var, Term] | None:
    """One-way matching of ``pattern`` against a ground term; returns an extended copy or None."""
    subst = dict(subst or {})
    stack = [(pattern, ground)]
    while stack:
        p, g = stack.pop()
        if isinstance(p, Var):
            bound = subst.get(p)
            if bound is None:
                subst[p] = g
            elif bound != g:
                return None
        elif isinstance(p, Fn):
            if not isinstance(g, Fn) or p.functor != g.functor or len(p.args) != len(g.args):
                return None
            stack.extend(zip(p.args, g.args))
        elif p != g:
            return None
    return subst


def sort_key(term: Term) -> tuple:
    if isinstance(term, Var):
        return (0, term.name)
    if isinstance(term, Lit):
        return (1, term.value)
    return (2, term.functor, len(term.args), tuple(sort_key(a) for a in term.args))


def render(term: Term, aliases: Mapping[str, str] | None = None) -> str:
    if isinstance(term, Var):
        return str(term)
    if isinstance(term, Lit):
        return str(term)
    name = aliases.get(term.functor, term.functor) if aliases else term.functor
    if not term.args:
        return name
    return f"{name}({','.join(render(a, aliases) for a in term.args)})"


class TermSyntaxError(ValueError):
    def __init__(self, text: str, position: int, expected: str):
        self.text = text
        self.position = position
        self.expected = expected
        super().__init__(f"expected {expected} at position {position} in {text!r}")


_TOKEN = re.compile(
    r"\s*(?:(?P<lit>'(?:[^'\\]|\\.)*')|(?P<var>\?[A-Za-z_][\w\-]*)"
    r"|(?P<name>[A-Za-z0-9_][\w\-.:#/]*)|(?P<punct>[(),]))"
)


def _tokens(text: str) -> list[tuple[str, str, int]]:
    pos, out = 0, []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise TermSyntaxError(text, pos, "a term")
        kind = m.lastgroup or ""
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return out


class _TermParser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokens(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int] | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, value: str | None = None) -> tuple[str, str, int]:
        tok = self.peek()
        if tok is None or (value is not None and tok[1] != value):
            pos = tok[2] if tok else len(self.text)
            raise TermSyntaxError(self.text, pos, repr(value) if value else "a term")
        self.i += 1
        return tok

    def term(self) -> Term:
        kind, value, pos = self.take()
        if kind == "var":
            return Var(value[1:])
        if kind == "lit":
            body = value[1:-1]
            return Lit(unescape_literal(body))
        if kind != "name":
            raise TermSyntaxError(self.text, pos, "a term")
        nxt = self.peek()
        if nxt is None or nxt[1] != "(":
            return Fn(value)
        self.take("(")
        args: list[Term] = []
        if self.peek() is not None and self.peek()[1] == ")":  # type: ignore[index]
            self.take(")")
            return Fn(value, ())
        while True:
            args.append(self.term())
            tok = self.take()
            if tok[1] == ")":
                return Fn(value, tuple(args))
            if tok[1] != ",":
                raise TermSyntaxError(self.text, tok[2], "',' or ')'")

    def done(self) -> None:
        tok = self.peek()
        if tok is not None:
            raise TermSyntaxError(self.text, tok[2], "end of input")


def parse_term(text: str) -> Term:
    """Parse ``CC(a02,a01,accept(a02,a01,f01),f01)``-style notation."""
    p = _TermParser(text)
    t = p.term()
    p.done()
    return t


def split_top_level(text: str, sep: str) -> list[str]:
    """Split on ``sep`` outside parentheses and quotes."""
    parts, depth, quote, start, i = [], 0, False, 0, 0
    while i < len(text):
        ch = text[i]
        if quote:
            if ch == "\\":
                i += 1
            elif ch == "'":
                quote = False
        elif ch == "'":
            quote = True
        elif ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif depth == 0 and text.startswith(sep, i):
            parts.append(text[start:i])
            start = i + len(sep)
            i = start
            continue
        i += 1
    parts.append(text[start:])
    return [p.strip() for p in parts]
