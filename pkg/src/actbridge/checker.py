"""Decide whether a target-system message is a satisfactory conversion of a source message.

Each side sends its message as a one-event narrative, steps one timepoint
and yields a set of observations.  The target side is satisfactory when its
observations are consistent and, closed under the state constraints of both
systems, contain every source observation.

Besides the shared context, each side observes features of the content it
carries: the most specific classes of the content individual, its property
assertions and the most specific classes of the individuals those point to.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .abox import ABox
from .constraints import ConstraintSet
from .ec import (ROLE_PROPERTIES, Happens, Observation, Trace, check_consistent, entails,
                 format_observations, render_time, resolve_event, sorted_obs, step)
from .ontology import Ontology
from .terms import Fn, Lit, Term


@dataclass(frozen=True)
class Side:
    act: str
    message: str
    abox: ABox
    sigma: frozenset
    psi: ConstraintSet
    ontology: Optional[Ontology] = None
    system: str = ""


@dataclass(frozen=True)
class ConversionCase:
    source: Side
    target: Side
    gamma: frozenset = frozenset()
    time: int = 0

    def __post_init__(self) -> None:
        if self.source.message != self.target.message:
            raise ValueError("source and target must describe the same message individual")
        for o in self.gamma:
            if o.time != self.time:
                raise ValueError(f"context observation {o} is not at {render_time(self.time)}")


@dataclass
class ConversionReport:
    satisfactory: bool
    phi_source: frozenset
    phi_target: frozenset
    consistent: bool
    missing: frozenset
    trace: Trace
    context: frozenset = frozenset()
    source_act: str = ""
    target_act: str = ""
    time: int = 0
    aliases: Mapping[str, str] = field(default_factory=dict)

    def to_text(self, aliases: Mapping[str, str] | None = None) -> str:
        a = self.aliases if aliases is None else aliases
        lines = [f"source: {a.get(self.source_act, self.source_act)}",
                 f"target: {a.get(self.target_act, self.target_act)}"]
        ctx = ", ".join(o.render(a) for o in sorted_obs(self.context)) or "∅"
        lines.append(f"context {render_time(self.time)}: {ctx}")
        lines.append("phi-source:")
        lines += [f"  {o.render(a)}" for o in sorted_obs(self.phi_source)]
        lines.append("phi-target:")
        lines += [f"  {o.render(a)}" for o in sorted_obs(self.phi_target)]
        lines.append(f"consistent: {str(self.consistent).lower()}")
        lines.append("missing:" + ("" if self.missing else " ∅"))
        lines += [f"  {o.render(a)}" for o in sorted_obs(self.missing)]
        lines.append(f"satisfactory: {str(self.satisfactory).lower()}")
        return "\n".join(lines) + "\n"

    def trace_text(self) -> str:
        return self.trace.to_text()


def _term(obj) -> Term:
    return obj if isinstance(obj, Lit) else Fn(obj)


def _specific(abox: ABox, ind: str, onto: Optional[Ontology]) -> list[str]:
    types = abox.types_of(ind)
    if onto is not None:
        types = onto.most_specific(types)
    return sorted(types)


def content_features(side: Side, time: int, content_prop: str = ROLE_PROPERTIES["content"]) -> frozenset:
    """Observations describing the content individuals of ``side``'s message."""
    out: set[Observation] = set()
    m = side.abox
    for content in m.objects(side.message, content_prop):
        if isinstance(content, Lit):
            continue
        for cls in _specific(m, content, side.ontology):
            out.add(Observation(Fn(cls, (Fn(content),)), time))
        for a in m.properties_of(content):
            out.add(Observation(Fn(a.prop, (Fn(content), _term(a.object))), time))
            if isinstance(a.object, str):
                for cls in _specific(m, a.object, side.ontology):
                    out.add(Observation(Fn(cls, (Fn(a.object),)), time))
    return frozenset(out)


def _phi(side: Side, gamma: frozenset, time: int, trace: Trace, label: str) -> frozenset:
    event = resolve_event(side.act, side.message, side.abox)
    delta = {Happens(event, time)}
    features = content_features(side, time)
    trace.note(f"{label}: narrative {Happens(event, time).render(trace.aliases)}")
    for o in sorted_obs(features - gamma):
        trace.add(o.render(trace.aliases), f"{label} content feature")
    return step(gamma | features, delta, side.sigma, side.psi, trace=trace, time=time)


def check(case: ConversionCase, aliases: Mapping[str, str] | None = None) -> ConversionReport:
    trace = Trace(aliases=dict(aliases or {}))
    gamma = frozenset(case.gamma)
    for side, label in ((case.source, "source"), (case.target, "target")):
        foreign = _foreign_terms(gamma, side.ontology)
        if foreign:
            trace.note(f"context uses terms unknown to the {label} system: {', '.join(foreign)}")
    phi_source = _phi(case.source, gamma, case.time, trace, "source")
    phi_target = _phi(case.target, gamma, case.time, trace, "target")
    consistent = check_consistent(phi_target)
    trace.note(f"target observations are {'consistent' if consistent else 'inconsistent'}")
    _, missing = entails(phi_target, phi_source, case.source.psi | case.target.psi, trace)
    ok = consistent and not missing
    trace.note("conversion is satisfactory" if ok else "conversion is not satisfactory")
    return ConversionReport(ok, phi_source, phi_target, consistent, missing, trace, gamma,
                            case.source.act, case.target.act, case.time, trace.aliases)


def _foreign_terms(gamma: Iterable[Observation], onto: Optional[Ontology]) -> list[str]:
    if onto is None:
        return []
    known = onto.class_names
    out = set()
    for o in gamma:
        f = o.fluent
        if isinstance(f, Fn) and len(f.args) == 1 and f.functor not in known and f.functor[:1].isupper():
            out.add(f.functor)
    return sorted(out)


def phi_text(phi: Iterable[Observation], aliases: Mapping[str, str] | None = None) -> str:
    return format_observations(phi, aliases)
