"""Basic ABox assertions and their line-oriented triple text form.

One triple per line, whitespace separated: ``subject predicate object``.
``rdf:type`` marks a class assertion; any other predicate is a property
assertion whose object is either an individual name or a single-quoted
literal.  ``#`` starts a comment, ``@prefix p: <expansion>`` declares a
textual prefix expanded in ``p:name`` tokens.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

from .terms import Lit, unescape_literal

RDF_TYPE = "rdf:type"


@dataclass(frozen=True, order=True)
class ClassAssertion:
    cls: str
    individual: str

    def __str__(self) -> str:
        return f"{self.individual} {RDF_TYPE} {self.cls}"


@dataclass(frozen=True)
class PropertyAssertion:
    prop: str
    subject: str
    object: Union[str, Lit]

    def __post_init__(self) -> None:
        if self.prop in ("a", RDF_TYPE):
            raise ValueError(f"{self.prop!r} is reserved for class assertions")

    def __str__(self) -> str:
        return f"{self.subject} {self.prop} {self.object}"

    def __lt__(self, other: "PropertyAssertion") -> bool:
        return _key(self) < _key(other)


Assertion = Union[ClassAssertion, PropertyAssertion]


def _key(a: Assertion) -> tuple:
    if isinstance(a, ClassAssertion):
        return (a.individual, 0, RDF_TYPE, a.cls)
    obj = a.object
    return (a.subject, 1, a.prop, (1, obj.value) if isinstance(obj, Lit) else (0, obj))


@dataclass(frozen=True)
class ABox:
    assertions: frozenset = frozenset()

    @classmethod
    def of(cls, items: Iterable[Assertion]) -> "ABox":
        return cls(frozenset(items))

    def __iter__(self) -> Iterator[Assertion]:
        return iter(sorted(self.assertions, key=_key))

    def __len__(self) -> int:
        return len(self.assertions)

    def __contains__(self, item: object) -> bool:
        return item in self.assertions

    def __or__(self, other: "ABox") -> "ABox":
        return ABox(self.assertions | other.assertions)

    def __sub__(self, other: "ABox") -> "ABox":
        return ABox(self.assertions - other.assertions)

    def __le__(self, other: "ABox") -> bool:
        return self.assertions <= other.assertions

    def individuals(self) -> set[str]:
        out: set[str] = set()
        for a in self.assertions:
            if isinstance(a, ClassAssertion):
                out.add(a.individual)
            else:
                out.add(a.subject)
                if isinstance(a.object, str):
                    out.add(a.object)
        return out

    def types_of(self, individual: str) -> set[str]:
        return {a.cls for a in self.assertions if isinstance(a, ClassAssertion) and a.individual == individual}

    def instances_of(self, cls: str) -> set[str]:
        return {a.individual for a in self.assertions if isinstance(a, ClassAssertion) and a.cls == cls}

    def objects(self, subject: str, prop: str) -> list[Union[str, Lit]]:
        found = [a.object for a in self.assertions
                 if isinstance(a, PropertyAssertion) and a.subject == subject and a.prop == prop]
        return sorted(found, key=lambda o: (1, o.value) if isinstance(o, Lit) else (0, o))

    def properties_of(self, subject: str) -> list[PropertyAssertion]:
        return sorted((a for a in self.assertions if isinstance(a, PropertyAssertion) and a.subject == subject),
                      key=_key)

    def subjects_of(self, prop: str, obj: Union[str, Lit]) -> set[str]:
        return {a.subject for a in self.assertions
                if isinstance(a, PropertyAssertion) and a.prop == prop and a.object == obj}

    def to_text(self) -> str:
        return format_triples(self)


class TripleSyntaxError(ValueError):
    def __init__(self, line: int, position: int, expected: str):
        self.line = line
        self.position = position
        self.expected = expected
        super().__init__(f"line {line}, column {position}: expected {expected}")


_TRIPLE_TOKEN = re.compile(r"'(?:[^'\\]|\\.)*'|[^\s']+")
_PREFIX = re.compile(r"@prefix\s+([\w\-]*):\s*<([^>]*)>\s*$")


def expand(token: str, prefixes: dict[str, str]) -> str:
    if token == RDF_TYPE:
        return token
    if ":" in token:
        head, _, tail = token.partition(":")
        if head in prefixes:
            return prefixes[head] + tail
    return token


def parse_literal(token: str) -> Lit:
    return Lit(unescape_literal(token[1:-1]))


def tokenize_line(line: str, lineno: int) -> list[str]:
    tokens, pos = [], 0
    while pos < len(line):
        if line[pos].isspace():
            pos += 1
            continue
        if line[pos] == "#":
            break
        m = _TRIPLE_TOKEN.match(line, pos)
        if not m:
            raise TripleSyntaxError(lineno, pos + 1, "closing quote")
        tokens.append(m.group(0))
        pos = m.end()
    return tokens


def parse_triple(tokens: list[str], prefixes: dict[str, str], lineno: int) -> Assertion:
    if len(tokens) != 3:
        raise TripleSyntaxError(lineno, 1, "exactly three tokens: subject predicate object")
    subj, pred, obj = tokens
    if subj.startswith("'"):
        raise TripleSyntaxError(lineno, 1, "an individual name as subject")
    subj = expand(subj, prefixes)
    pred = RDF_TYPE if pred == "a" else expand(pred, prefixes)
    if pred == RDF_TYPE:
        if obj.startswith("'"):
            raise TripleSyntaxError(lineno, 1, "a class name after rdf:type")
        return ClassAssertion(expand(obj, prefixes), subj)
    if obj.startswith("'"):
        return PropertyAssertion(pred, subj, parse_literal(obj))
    return PropertyAssertion(pred, subj, expand(obj, prefixes))


def parse_triples(text: str) -> ABox:
    """Parse a plain triple block (prefix lines and comments allowed)."""
    prefixes: dict[str, str] = {}
    out: list[Assertion] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("@prefix"):
            m = _PREFIX.match(stripped)
            if not m:
                raise TripleSyntaxError(lineno, 1, "@prefix name: <expansion>")
            prefixes[m.group(1)] = m.group(2)
            continue
        if stripped.startswith("@"):
            raise TripleSyntaxError(lineno, 1, "a triple (directives belong to message headers)")
        out.append(parse_triple(tokenize_line(raw, lineno), prefixes, lineno))
    return ABox.of(out)


def format_triples(abox: Iterable[Assertion]) -> str:
    return "".join(f"{a}\n" for a in sorted(abox, key=_key))
