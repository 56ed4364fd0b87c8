"""Layered communication-acts ontology: TBox fragment, ABox realization, forces.

The supported TBox fragment is deliberately small: every axiom has an atomic
left-hand side and a right-hand side built from atomic classes, conjunction
and existential restriction.  Over that fragment realization is a Horn
saturation that never invents individuals:

* downward: ``B(x)`` and ``B [= ... and D and ...`` give ``D(x)``;
* recognition: for ``B == expr``, an individual satisfying every conjunct
  of ``expr`` (existentials witnessed by asserted edges) gets ``B(x)``.

Membership of the five primitive illocutionary classes is only ever asserted
or propagated downward, never recognised.
"""

from __future__ import annotations

import enum
import re
from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Union

from .abox import ABox, Assertion, ClassAssertion, PropertyAssertion

PRIMITIVES = frozenset({"Assertive", "Directive", "Commissive", "Declarative", "Expressive"})


# -- class expressions --------------------------------------------------------

@dataclass(frozen=True)
class Atomic:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Conjunction:
    conjuncts: tuple["ClassExpr", ...]

    def __post_init__(self) -> None:
        if len(self.conjuncts) < 2:
            raise ValueError("a conjunction needs at least two conjuncts")

    def __str__(self) -> str:
        return " and ".join(_paren(c) for c in self.conjuncts)


@dataclass(frozen=True)
class Existential:
    prop: str
    filler: "ClassExpr"

    def __str__(self) -> str:
        return f"{self.prop} some {_paren(self.filler)}"


ClassExpr = Union[Atomic, Conjunction, Existential]


def _paren(e: ClassExpr) -> str:
    return str(e) if isinstance(e, Atomic) else f"({e})"


def conjuncts(expr: ClassExpr) -> list[ClassExpr]:
    """Flatten nested conjunctions into a list of atomic/existential parts."""
    if isinstance(expr, Conjunction):
        out: list[ClassExpr] = []
        for c in expr.conjuncts:
            out.extend(conjuncts(c))
        return out
    return [expr]


def signature(expr: ClassExpr) -> tuple[set[str], set[str]]:
    if isinstance(expr, Atomic):
        return {expr.name}, set()
    if isinstance(expr, Existential):
        classes, props = signature(expr.filler)
        return classes, props | {expr.prop}
    classes, props = set(), set()
    for c in expr.conjuncts:
        cs, ps = signature(c)
        classes |= cs
        props |= ps
    return classes, props


def depth(expr: ClassExpr) -> int:
    if isinstance(expr, Atomic):
        return 0
    if isinstance(expr, Existential):
        return 1 + depth(expr.filler)
    return max(depth(c) for c in expr.conjuncts)


# -- axioms and forces ---------------------------------------------------------

class AxiomKind(enum.Enum):
    SUBCLASS = "SubClassOf"
    EQUIVALENT = "EquivalentTo"


class Layer(enum.Enum):
    COMMON = "Common"
    APPLICATION = "Application"
    DOMAIN = "Domain"
    ACTION = "Action"


@dataclass(frozen=True)
class TBoxAxiom:
    kind: AxiomKind
    lhs: str
    rhs: ClassExpr
    layer: Layer = Layer.COMMON
    system: str | None = None

    def __post_init__(self) -> None:
        if self.layer is Layer.APPLICATION and not self.system:
            raise ValueError(f"application-layer axiom for {self.lhs} needs a system id")

    def __str__(self) -> str:
        return f"{self.lhs} {self.kind.value} {self.rhs}"


@dataclass(frozen=True)
class ForceOp:
    kind: str
    arg: Union[str, int]

    KINDS = ("add-content-condition", "add-preparatory", "add-sincerity", "restrict-mode", "strengthen", "weaken")

    def __post_init__(self) -> None:
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown force operation {self.kind!r}")
        if self.kind in ("strengthen", "weaken"):
            if not isinstance(self.arg, int) or self.arg < 1:
                raise ValueError(f"{self.kind} takes an integer n >= 1")


def restrict_mode(label: str) -> ForceOp:
    return ForceOp("restrict-mode", label)


def add_content_condition(label: str) -> ForceOp:
    return ForceOp("add-content-condition", label)


def add_preparatory(label: str) -> ForceOp:
    return ForceOp("add-preparatory", label)


def add_sincerity(label: str) -> ForceOp:
    return ForceOp("add-sincerity", label)


def strengthen(n: int = 1) -> ForceOp:
    return ForceOp("strengthen", n)


def weaken(n: int = 1) -> ForceOp:
    return ForceOp("weaken", n)


@dataclass(frozen=True)
class ForceDescriptor:
    """Illocutionary force in canonical form: label sets plus a summed degree."""

    base: str
    mode: frozenset[str] = frozenset()
    degree: int = 0
    content_conditions: frozenset[str] = frozenset()
    preparatory: frozenset[str] = frozenset()
    sincerity: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.base not in PRIMITIVES:
            raise ValueError(f"{self.base!r} is not a primitive force")


def derive_force(base: ForceDescriptor, ops: Iterable[ForceOp]) -> ForceDescriptor:
    mode, content, prep, sinc = set(base.mode), set(base.content_conditions), set(base.preparatory), set(base.sincerity)
    degree = base.degree
    for op in ops:
        if op.kind == "restrict-mode":
            mode.add(op.arg)
        elif op.kind == "add-content-condition":
            content.add(op.arg)
        elif op.kind == "add-preparatory":
            prep.add(op.arg)
        elif op.kind == "add-sincerity":
            sinc.add(op.arg)
        elif op.kind == "strengthen":
            degree += op.arg
        else:
            degree -= op.arg
    return ForceDescriptor(base.base, frozenset(mode), degree, frozenset(content), frozenset(prep), frozenset(sinc))


# -- ontology ------------------------------------------------------------------

@dataclass(frozen=True)
class Ontology:
    tbox: frozenset[TBoxAxiom] = frozenset()
    forces: tuple[tuple[str, ForceDescriptor], ...] = ()

    def __or__(self, other: "Ontology") -> "Ontology":
        forces = dict(self.forces)
        forces.update(dict(other.forces))
        return Ontology(self.tbox | other.tbox, tuple(sorted(forces.items())))

    @property
    def force_map(self) -> dict[str, ForceDescriptor]:
        return dict(self.forces)

    def axioms(self) -> list[TBoxAxiom]:
        return sorted(self.tbox, key=lambda a: (a.lhs, a.kind.value, str(a.rhs)))

    @cached_property
    def class_names(self) -> frozenset[str]:
        names: set[str] = set()
        for ax in self.tbox:
            names.add(ax.lhs)
            names |= signature(ax.rhs)[0]
        return frozenset(names)

    def restricted_to(self, layers: Iterable[Layer]) -> "Ontology":
        keep = set(layers)
        return Ontology(frozenset(a for a in self.tbox if a.layer in keep), self.forces)

    @cached_property
    def _superclasses(self) -> dict[str, frozenset[str]]:
        return _classify(self)

    def superclasses(self, cls: str) -> frozenset[str]:
        """Every atomic class subsuming ``cls`` (reflexive)."""
        return self._superclasses.get(cls, frozenset({cls}))

    def subsumes(self, sup: str, sub: str) -> bool:
        return sup in self.superclasses(sub)

    def most_specific(self, classes: Iterable[str]) -> set[str]:
        """Drop every class strictly subsumed-from-below by another member of ``classes``."""
        pool = set(classes)
        out = set()
        for c in pool:
            strictly_below = any(d != c and self.subsumes(c, d) and not self.subsumes(d, c) for d in pool)
            if not strictly_below:
                out.add(c)
        return out


# -- DSL -----------------------------------------------------------------------

class OntologySyntaxError(ValueError):
    def __init__(self, line: int, position: int, expected: str):
        self.line = line
        self.position = position
        self.expected = expected
        super().__init__(f"line {line}, column {position}: expected {expected}")


class UnsupportedAxiomShape(ValueError):
    def __init__(self, line: int, detail: str):
        self.line = line
        self.detail = detail
        super().__init__(f"line {line}: unsupported axiom shape ({detail})")


_EXPR_TOKEN = re.compile(r"\s*(?:([()])|([{}])|([A-Za-z_][\w\-.:]*))")
_OUTSIDE_FRAGMENT = {"or", "not", "only", "min", "max", "exactly", "value", "that", "inverse", "Self"}
_FORCE_FIELD = re.compile(r"(\w+)=(\{[^}]*\}|\S+)")


class _ExprParser:
    def __init__(self, text: str, lineno: int, offset: int):
        self.lineno = lineno
        self.offset = offset
        self.tokens: list[tuple[str, int]] = []
        pos = 0
        while pos < len(text) and text[pos:].strip():
            m = _EXPR_TOKEN.match(text, pos)
            if not m:
                raise OntologySyntaxError(lineno, offset + pos + 1, "class name, 'and', 'some' or parenthesis")
            tok = m.group(1) or m.group(2) or m.group(3)
            if m.group(2):
                raise UnsupportedAxiomShape(lineno, "nominals")
            if tok in _OUTSIDE_FRAGMENT:
                raise UnsupportedAxiomShape(lineno, f"'{tok}' is outside the supported fragment")
            self.tokens.append((tok, offset + m.start(m.lastindex or 0) + 1))
            pos = m.end()
        self.i = 0

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def fail(self, expected: str) -> OntologySyntaxError:
        pos = self.tokens[self.i][1] if self.i < len(self.tokens) else self.offset + 1
        return OntologySyntaxError(self.lineno, pos, expected)

    def expr(self) -> ClassExpr:
        parts = [self.primary()]
        while self.peek() == "and":
            self.i += 1
            parts.append(self.primary())
        return parts[0] if len(parts) == 1 else Conjunction(tuple(parts))

    def primary(self) -> ClassExpr:
        tok = self.peek()
        if tok == "(":
            self.i += 1
            inner = self.expr()
            if self.peek() != ")":
                raise self.fail("')'")
            self.i += 1
            return inner
        if tok is None or tok in ("and", "some", ")"):
            raise self.fail("a class name or '('")
        self.i += 1
        if self.peek() == "some":
            self.i += 1
            return Existential(tok, self.primary())
        return Atomic(tok)

    def parse(self) -> ClassExpr:
        e = self.expr()
        if self.i != len(self.tokens):
            raise self.fail("end of axiom")
        return e


def _label_set(raw: str) -> frozenset[str]:
    inner = raw.strip()
    if inner.startswith("{"):
        inner = inner[1:-1]
    labels = [p.strip().strip("'\"") for p in inner.split(",")]
    return frozenset(lab for lab in labels if lab)


def _parse_force(line: str, lineno: int) -> tuple[str, ForceDescriptor]:
    head, _, rest = line.partition(" ")
    rest = rest.strip()
    name, _, fields_text = rest.partition(" ")
    if not name:
        raise OntologySyntaxError(lineno, len(head) + 2, "a class name after 'force'")
    fields = dict(_FORCE_FIELD.findall(fields_text))
    if "base" not in fields:
        raise OntologySyntaxError(lineno, 1, "base=<Primitive>")
    try:
        return name, ForceDescriptor(
            base=fields["base"],
            mode=_label_set(fields.get("mode", "")),
            degree=int(fields.get("degree", "0")),
            content_conditions=_label_set(fields.get("content", "")),
            preparatory=_label_set(fields.get("preparatory", "")),
            sincerity=_label_set(fields.get("sincerity", "")),
        )
    except ValueError as exc:
        raise OntologySyntaxError(lineno, 1, str(exc)) from exc


def parse_ontology(text: str) -> Ontology:
    layer, system = Layer.COMMON, None
    axioms: list[TBoxAxiom] = []
    forces: dict[str, ForceDescriptor] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("layer:"):
            value = line.split(":", 1)[1].strip()
            try:
                layer = Layer(value)
            except ValueError:
                raise OntologySyntaxError(lineno, 8, "one of Common, Application, Domain, Action") from None
            continue
        if line.startswith("system:"):
            system = line.split(":", 1)[1].strip() or None
            continue
        if line.startswith("force "):
            name, desc = _parse_force(line, lineno)
            forces[name] = desc
            continue
        m = re.match(r"(.*?)\s+(SubClassOf|EquivalentTo)\s+(.*)$", line)
        if not m:
            word = re.search(r"\b(DisjointWith|DisjointUnionOf|SubPropertyOf|InverseOf|HasKey)\b", line)
            if word:
                raise UnsupportedAxiomShape(lineno, word.group(1))
            raise OntologySyntaxError(lineno, 1, "<Class> SubClassOf|EquivalentTo <expression>")
        lhs_text, kind, rhs_text = m.groups()
        lhs = _ExprParser(lhs_text, lineno, 0).parse()
        if not isinstance(lhs, Atomic):
            raise UnsupportedAxiomShape(lineno, "left-hand side must be a class name")
        rhs = _ExprParser(rhs_text, lineno, m.start(3)).parse()
        if layer is Layer.APPLICATION and not system:
            raise OntologySyntaxError(lineno, 1, "a 'system:' pragma before application-layer axioms")
        axioms.append(TBoxAxiom(AxiomKind(kind), lhs.name, rhs, layer,
                                system if layer is Layer.APPLICATION else None))
    return Ontology(frozenset(axioms), tuple(sorted(forces.items())))


def load(source: Union[str, Path]) -> Ontology:
    """Load from a path, or from DSL text when ``source`` is not an existing file."""
    if isinstance(source, Path):
        return parse_ontology(source.read_text(encoding="utf-8"))
    if "\n" not in source and source.strip() and Path(source).is_file():
        return parse_ontology(Path(source).read_text(encoding="utf-8"))
    return parse_ontology(source)


def load_many(paths: Iterable[Union[str, Path]]) -> Ontology:
    onto = Ontology()
    for p in paths:
        onto = onto | load(Path(p))
    return onto


# -- realization -----------------------------------------------------------------

@dataclass
class _Rules:
    down: dict[str, set[str]] = field(default_factory=lambda: defaultdict(set))
    recognizers: list[tuple[str, ClassExpr]] = field(default_factory=list)
    by_symbol: dict[str, list[int]] = field(default_factory=lambda: defaultdict(list))
    max_depth: int = 0


def _compile(onto: Ontology) -> _Rules:
    rules = _Rules()
    for ax in onto.axioms():
        for part in conjuncts(ax.rhs):
            if isinstance(part, Atomic):
                rules.down[ax.lhs].add(part.name)
        if ax.kind is AxiomKind.EQUIVALENT and ax.lhs not in PRIMITIVES:
            idx = len(rules.recognizers)
            rules.recognizers.append((ax.lhs, ax.rhs))
            classes, props = signature(ax.rhs)
            for sym in classes | props:
                rules.by_symbol[sym].append(idx)
            rules.max_depth = max(rules.max_depth, depth(ax.rhs))
    return rules


class _Model:
    def __init__(self, abox: ABox):
        self.types: dict[str, set[str]] = defaultdict(set)
        self.edges: dict[str, dict[str, set[str]]] = defaultdict(lambda: defaultdict(set))
        self.back: dict[str, set[str]] = defaultdict(set)
        for a in abox.assertions:
            if isinstance(a, ClassAssertion):
                self.types[a.individual].add(a.cls)
            elif isinstance(a.object, str):
                self.edges[a.subject][a.prop].add(a.object)
                self.back[a.object].add(a.subject)

    def satisfies(self, ind: str, expr: ClassExpr) -> bool:
        if isinstance(expr, Atomic):
            return expr.name in self.types[ind]
        if isinstance(expr, Existential):
            return any(self.satisfies(y, expr.filler) for y in self.edges[ind].get(expr.prop, ()))
        return all(self.satisfies(ind, c) for c in expr.conjuncts)

    def ancestors(self, ind: str, hops: int) -> set[str]:
        seen, frontier = {ind}, {ind}
        for _ in range(hops):
            frontier = {p for y in frontier for p in self.back.get(y, ())} - seen
            if not frontier:
                break
            seen |= frontier
        return seen


def _saturate_model(model: _Model, rules: _Rules) -> list[ClassAssertion]:
    derived: list[ClassAssertion] = []
    agenda: deque[tuple[str, str | None]] = deque()
    for ind in list(model.types):
        for cls in list(model.types[ind]):
            agenda.append((ind, cls))
    # individuals with edges but no types still need a recognition pass
    for ind in list(model.edges):
        agenda.append((ind, None))

    def add(ind: str, cls: str) -> None:
        if cls not in model.types[ind]:
            model.types[ind].add(cls)
            derived.append(ClassAssertion(cls, ind))
            agenda.append((ind, cls))

    while agenda:
        ind, cls = agenda.popleft()
        if cls is not None:
            for sup in sorted(rules.down.get(cls, ())):
                add(ind, sup)
            candidates = sorted(rules.by_symbol.get(cls, ()))
        else:
            candidates = sorted({i for props in model.edges[ind] for i in rules.by_symbol.get(props, ())})
        if not candidates:
            continue
        for who in sorted(model.ancestors(ind, rules.max_depth)):
            for idx in candidates:
                head, body = rules.recognizers[idx]
                if head not in model.types[who] and model.satisfies(who, body):
                    add(who, head)
    return derived


def realize(onto: Ontology, m: ABox) -> ABox:
    """Return M_der: class assertions entailed by ``m`` under ``onto`` and not already in ``m``."""
    named = m.individuals()
    model = _complete(onto, set(m.assertions))
    return ABox.of(ClassAssertion(cls, ind) for ind in sorted(named) for cls in sorted(model.types.get(ind, ()))
                   if ClassAssertion(cls, ind) not in m)


def saturate(onto: Ontology, m: ABox) -> ABox:
    return m | realize(onto, m)


# -- completion over a canonical model -------------------------------------------------

def _canonical_name(expr: ClassExpr) -> str:
    return f"<{expr}>"


def _complete(onto: Ontology, assertions: set, seeds: Iterable[ClassExpr] = ()) -> _Model:
    """Saturate ``assertions`` after giving every existential a shared witness.

    Each told ``C SubClassOf/EquivalentTo ... p some F`` that applies to an
    element adds an edge to the element ``<F>``, which carries F's own parts.
    One witness per filler is enough for this fragment, so this terminates.
    """
    rules = _compile(onto)
    told: dict[str, list[ClassExpr]] = defaultdict(list)
    for ax in onto.axioms():
        told[ax.lhs].append(ax.rhs)
    assertions = set(assertions)
    pending: deque[tuple[str, ClassExpr]] = deque()
    built: set[str] = set()

    def build(expr: ClassExpr) -> str:
        name = _canonical_name(expr)
        if name not in built:
            built.add(name)
            pending.append((name, expr))
        return name

    def expand(ind: str, expr: ClassExpr) -> bool:
        grew = False
        for part in conjuncts(expr):
            if isinstance(part, Atomic):
                a: Assertion = ClassAssertion(part.name, ind)
            else:
                a = PropertyAssertion(part.prop, ind, build(part.filler))
            if a not in assertions:
                assertions.add(a)
                grew = True
        return grew

    for expr in seeds:
        build(expr)
    expanded: set[tuple[str, str]] = set()
    while True:
        while pending:
            name, expr = pending.popleft()
            expand(name, expr)
        model = _Model(ABox(frozenset(assertions)))
        _saturate_model(model, rules)
        grew = False
        for ind in sorted(model.types):
            for cls in sorted(model.types[ind]):
                assertions.add(ClassAssertion(cls, ind))
                if (ind, cls) in expanded:
                    continue
                expanded.add((ind, cls))
                for rhs in told.get(cls, ()):
                    grew |= expand(ind, rhs)
        if not grew and not pending:
            return model


def _classify(onto: Ontology) -> dict[str, frozenset[str]]:
    """Subsumption over the fragment: the types of each class's canonical element."""
    model = _complete(onto, set(), [Atomic(cls) for cls in sorted(onto.class_names)])
    return {cls: frozenset(model.types[_canonical_name(Atomic(cls))]) for cls in onto.class_names}
