"""Compile a TBox into event-calculus state and event-occurrence constraints.

For ``B [= D and p some E`` a state constraint ``HoldsAt(B(?m),t) -> HoldsAt(D(?m),t)``
is emitted per atomic conjunct.  For ``B == D and p some E`` the recognition
direction becomes ``HoldsAt(D(?m),t) & HoldsAt(p(?m,?op),t) & HoldsAt(E(?op),t)
-> HoldsAt(B(?m),t)``; wider or nested expressions add one body atom per
conjunct by structural recursion.  Atomic subsumptions between
communication-act classes also give ``Happens(send(B(?m)),t) ->
Happens(send(C(?m)),t)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .ontology import PRIMITIVES, Atomic, AxiomKind, ClassExpr, Conjunction, Ontology, TBoxAxiom, conjuncts
from .terms import Fn, Term, Var, render, sort_key

ACT_ROOT = "CommunicationAct"
TIME = "t"


def _holds(atom: Term, aliases: Mapping[str, str] | None) -> str:
    return f"HoldsAt({render(atom, aliases)},{TIME})"


@dataclass(frozen=True)
class StateConstraint:
    body: tuple[Term, ...]
    head: Term
    source: str = ""

    def render(self, aliases: Mapping[str, str] | None = None) -> str:
        lhs = " ∧ ".join(_holds(a, aliases) for a in self.body)
        return f"{lhs} → {_holds(self.head, aliases)}"

    def __str__(self) -> str:
        return self.render()

    def key(self) -> tuple:
        return (sort_key(self.head), tuple(sort_key(a) for a in self.body), self.source)


@dataclass(frozen=True)
class EventConstraint:
    trigger: str
    implied: str
    source: str = ""

    def render(self, aliases: Mapping[str, str] | None = None) -> str:
        a = aliases or {}
        return (f"Happens(send({a.get(self.trigger, self.trigger)}(?m)),{TIME}) → "
                f"Happens(send({a.get(self.implied, self.implied)}(?m)),{TIME})")

    def __str__(self) -> str:
        return self.render()

    def key(self) -> tuple:
        return (self.trigger, self.implied, self.source)


@dataclass(frozen=True)
class ConstraintSet:
    state: frozenset[StateConstraint] = frozenset()
    event: frozenset[EventConstraint] = frozenset()
    system: str = ""

    def __or__(self, other: "ConstraintSet") -> "ConstraintSet":
        system = "+".join(s for s in (self.system, other.system) if s)
        return ConstraintSet(self.state | other.state, self.event | other.event, system)

    def __len__(self) -> int:
        return len(self.state) + len(self.event)

    def sorted_state(self) -> list[StateConstraint]:
        return sorted(self.state, key=StateConstraint.key)

    def sorted_event(self) -> list[EventConstraint]:
        return sorted(self.event, key=EventConstraint.key)

    def to_text(self, aliases: Mapping[str, str] | None = None) -> str:
        lines = [f"event: {c.render(aliases)}" for c in self.sorted_event()]
        lines += [f"state: {c.render(aliases)}" for c in self.sorted_state()]
        return "".join(line + "\n" for line in lines)


def compile_body(expr: ClassExpr, var: Var, fresh: Iterable[Var]) -> list[Term]:
    """Body atoms asserting that ``var`` satisfies ``expr``."""
    fresh = iter(fresh)
    out: list[Term] = []

    def walk(e: ClassExpr, v: Var) -> None:
        if isinstance(e, Atomic):
            out.append(Fn(e.name, (v,)))
        elif isinstance(e, Conjunction):
            for c in e.conjuncts:
                walk(c, v)
        else:
            w = next(fresh)
            out.append(Fn(e.prop, (v, w)))
            walk(e.filler, w)

    walk(expr, var)
    return out


def _fresh_vars() -> Iterable[Var]:
    yield Var("op")
    n = 2
    while True:
        yield Var(f"op{n}")
        n += 1


def _is_act(onto: Ontology, cls: str, has_root: bool) -> bool:
    return not has_root or cls == ACT_ROOT or onto.subsumes(ACT_ROOT, cls)


def constraints_for_axiom(ax: TBoxAxiom, onto: Ontology, has_root: bool) -> tuple[list[StateConstraint], list[EventConstraint]]:
    m = Var("m")
    state: list[StateConstraint] = []
    event: list[EventConstraint] = []
    source = str(ax)
    for part in conjuncts(ax.rhs):
        if isinstance(part, Atomic):
            state.append(StateConstraint((Fn(ax.lhs, (m,)),), Fn(part.name, (m,)), source))
            if _is_act(onto, ax.lhs, has_root) and _is_act(onto, part.name, has_root):
                event.append(EventConstraint(ax.lhs, part.name, source))
    if ax.kind is AxiomKind.EQUIVALENT and ax.lhs not in PRIMITIVES:
        body = compile_body(ax.rhs, m, _fresh_vars())
        state.append(StateConstraint(tuple(body), Fn(ax.lhs, (m,)), source))
    return state, event


def generate(onto: Ontology, system: str = "") -> ConstraintSet:
    has_root = ACT_ROOT in onto.class_names
    state: set[StateConstraint] = set()
    event: set[EventConstraint] = set()
    for ax in onto.axioms():
        s, e = constraints_for_axiom(ax, onto, has_root)
        state.update(s)
        event.update(e)
    return ConstraintSet(frozenset(state), frozenset(event), system)
