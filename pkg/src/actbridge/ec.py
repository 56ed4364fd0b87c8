"""One-step Discrete Event Calculus reasoner.

Given observations at ``t``, a narrative of send events, effect axioms and
constraints, ``step`` computes the observations that hold at ``t+1``.
Minimisation of Happens/Initiates/Terminates/Releases is closed-world
saturation: only events reachable through event constraints occur, and only
effect facts derivable from the axioms exist.  Three axioms are applied:

* inertia: true at t, not released at t+1, not terminated => true at t+1;
* initiation: an occurring event initiates f => f true at t+1;
* termination: an occurring event terminates f => f false at t+1.

Negative observations are not carried forward by inertia.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Union

from .abox import ABox
from .constraints import ConstraintSet
from .terms import Fn, Lit, Term, TermSyntaxError, Var, is_ground, match, parse_term, render, sort_key, substitute, variables

HOLDS = "HoldsAt"
RELEASED = "ReleasedAt"
INITIATES = "Initiates"
TERMINATES = "Terminates"
RELEASES = "Releases"
EFFECT_KINDS = (INITIATES, TERMINATES, RELEASES)
ROLES = ("sender", "receiver", "content", "reply")

# message-ABox properties that bind event roles
ROLE_PROPERTIES = {"sender": "hasSender", "receiver": "hasReceiver", "content": "hasContent", "reply": "inReplyTo"}


def render_time(t: int) -> str:
    return "t0" if t == 0 else f"t0+{t}"


def parse_time(text: str) -> int:
    text = text.strip().replace(" ", "")
    if text.isdigit():
        return int(text)
    m = re.fullmatch(r"t0(?:\+(\d+))?", text)
    if not m:
        raise ValueError(f"bad timepoint {text!r}")
    return int(m.group(1) or 0)


# -- fluents -------------------------------------------------------------------

def class_fluent(cls: str, individual: str) -> Fn:
    return Fn(cls, (Fn(individual),))


def property_fluent(prop: str, subject: str, obj: Union[str, Lit]) -> Fn:
    return Fn(prop, (Fn(subject), obj if isinstance(obj, Lit) else Fn(obj)))


def named_fluent(symbol: str) -> Fn:
    return Fn(symbol)


@dataclass(frozen=True)
class Observation:
    fluent: Term
    time: int
    holds: bool = True
    predicate: str = HOLDS

    def __post_init__(self) -> None:
        if self.time < 0:
            raise ValueError("timepoints are non-negative")
        if self.predicate not in (HOLDS, RELEASED):
            raise ValueError(f"unknown observation predicate {self.predicate}")
        if not is_ground(self.fluent):
            raise ValueError(f"observation fluent must be ground: {self.fluent}")

    def render(self, aliases: Mapping[str, str] | None = None) -> str:
        sign = "" if self.holds else "¬"
        return f"{sign}{self.predicate}({render(self.fluent, aliases)},{render_time(self.time)})"

    def __str__(self) -> str:
        return self.render()

    def key(self) -> tuple:
        return (self.time, self.predicate, sort_key(self.fluent), self.holds)


def holds(fluent: Term, t: int) -> Observation:
    return Observation(fluent, t)


def sorted_obs(obs: Iterable[Observation]) -> list[Observation]:
    return sorted(obs, key=Observation.key)


# -- events --------------------------------------------------------------------

@dataclass(frozen=True)
class Event:
    """``send(Act(m))`` with the message roles it was resolved against."""

    act: str
    message: str
    roles: tuple[tuple[str, Term], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "roles", tuple(sorted(self.roles, key=lambda r: ROLES.index(r[0]))))
        for role, _ in self.roles:
            if role not in ROLES:
                raise ValueError(f"unknown role {role}")

    def role(self, name: str) -> Optional[Term]:
        if name == "message":
            return Fn(self.message)
        return dict(self.roles).get(name)

    @property
    def agent(self) -> Optional[Term]:
        return self.role("sender")

    def with_act(self, act: str) -> "Event":
        return Event(act, self.message, self.roles)

    def term(self) -> Fn:
        """Resolved form: ``send(Inquiry(a01,a02,f01))``; bare ``send(A(m))`` without roles."""
        args = tuple(v for _, v in self.roles) or (Fn(self.message),)
        return Fn("send", (Fn(self.act, args),))

    def short(self) -> Fn:
        return Fn("send", (Fn(self.act, (Fn(self.message),)),))

    def render(self, aliases: Mapping[str, str] | None = None, resolved: bool = True) -> str:
        return render(self.term() if resolved else self.short(), aliases)


@dataclass(frozen=True)
class Happens:
    event: Event
    time: int

    def render(self, aliases: Mapping[str, str] | None = None) -> str:
        return f"Happens({self.event.render(aliases, resolved=False)},{render_time(self.time)})"

    def key(self) -> tuple:
        return (self.time, self.event.act, self.event.message, tuple((r, sort_key(v)) for r, v in self.event.roles))


Narrative = frozenset  # of Happens


def resolve_event(act: str, message: str, abox: ABox | None = None,
                  role_properties: Mapping[str, str] = ROLE_PROPERTIES) -> Event:
    """Bind sender/receiver/content/reply from the message ABox (first object, sorted)."""
    roles: list[tuple[str, Term]] = []
    if abox is not None:
        for role in ROLES:
            objs = abox.objects(message, role_properties.get(role, ""))
            if objs:
                obj = objs[0]
                roles.append((role, obj if isinstance(obj, Lit) else Fn(obj)))
    return Event(act, message, tuple(roles))


# -- effect axioms ---------------------------------------------------------------

class UnboundVariable(LookupError):
    def __init__(self, axiom: str, role: str, event: str):
        self.axiom = axiom
        self.role = role
        self.event = event
        super().__init__(f"axiom {axiom!r} needs role {role!r}, which message {event} does not provide")


@dataclass(frozen=True)
class EffectAxiom:
    """``[HoldsAt(c1,t) & ... & Initiates(e,i1,t) & ...] => Kind(e, f, t)`` for each effect.

    ``act`` None matches every event.  ``agent`` constrains the event's sender,
    ``bindings`` bind message roles to variables or constants.
    """

    act: Optional[str]
    effects: tuple[tuple[str, Term], ...]
    holds: tuple[Term, ...] = ()
    initiated: tuple[Term, ...] = ()
    agent: Optional[Term] = None
    bindings: tuple[tuple[str, Term], ...] = ()
    label: str = ""

    def __post_init__(self) -> None:
        if not self.effects:
            raise ValueError("an effect axiom needs at least one effect")
        for kind, _ in self.effects:
            if kind not in EFFECT_KINDS:
                raise ValueError(f"unknown effect kind {kind}")
        for role, _ in self.bindings:
            if role not in ROLES + ("message",):
                raise ValueError(f"unknown role {role}")
        bound: set[Var] = set()
        for t in (*self.holds, *self.initiated, *(v for _, v in self.bindings)):
            bound |= variables(t)
        if self.agent is not None:
            bound |= variables(self.agent)
        for _, f in self.effects:
            free = variables(f) - bound
            if free:
                names = ", ".join(sorted(str(v) for v in free))
                raise ValueError(f"effect {render(f)} has unbound variables {names}")

    def render(self, aliases: Mapping[str, str] | None = None) -> str:
        ev = _event_pattern(self, aliases)
        conds = [f"HoldsAt({render(c, aliases)},t)" for c in self.holds]
        conds += [f"Initiates({ev},{render(c, aliases)},t)" for c in self.initiated]
        effects = " ∧ ".join(f"{k}({ev},{render(f, aliases)},t)" for k, f in self.effects)
        return f"{' ∧ '.join(conds)} ⇒ {effects}" if conds else effects


def _event_pattern(ax: EffectAxiom, aliases: Mapping[str, str] | None) -> str:
    if ax.act is None:
        who = render(ax.agent, aliases) if ax.agent is not None else "?a"
        return f"e({who})"
    args = [render(v, aliases) for _, v in ax.bindings] or ["?m"]
    name = aliases.get(ax.act, ax.act) if aliases else ax.act
    return f"send({name}({','.join(args)}))"


@dataclass(frozen=True)
class EffectFact:
    kind: str
    event: Event
    fluent: Term
    time: int

    def render(self, aliases: Mapping[str, str] | None = None) -> str:
        return f"{self.kind}({self.event.render(aliases)},{render(self.fluent, aliases)},{render_time(self.time)})"

    def key(self) -> tuple:
        return (self.time, EFFECT_KINDS.index(self.kind), sort_key(self.fluent), self.event.act, self.event.message)


# -- trace -----------------------------------------------------------------------

@dataclass
class Derivation:
    conclusion: str
    reason: str

    def __str__(self) -> str:
        return f"{self.conclusion}    [{self.reason}]"


@dataclass
class Trace:
    steps: list[Derivation] = field(default_factory=list)
    aliases: Mapping[str, str] = field(default_factory=dict)

    def add(self, conclusion: str, reason: str) -> None:
        self.steps.append(Derivation(conclusion, reason))

    def note(self, text: str) -> None:
        self.steps.append(Derivation(text, "note"))

    def __iter__(self) -> Iterator[Derivation]:
        return iter(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def to_text(self) -> str:
        return "".join(f"({i}) {d}\n" for i, d in enumerate(self.steps, 1))


# -- reasoning -------------------------------------------------------------------

def close_events(delta: Iterable[Happens], psi: ConstraintSet, trace: Trace | None = None) -> frozenset:
    """Least fixpoint of the event constraints over ``delta``."""
    out = set(delta)
    for h in out:
        if not is_ground(h.event.term()):
            raise ValueError("narrative must be ground")
    by_trigger: dict[str, list[str]] = {}
    for c in psi.sorted_event():
        by_trigger.setdefault(c.trigger, []).append(c.implied)
    agenda = sorted(out, key=Happens.key)
    while agenda:
        h = agenda.pop(0)
        for implied in by_trigger.get(h.event.act, ()):
            new = Happens(h.event.with_act(implied), h.time)
            if new not in out:
                out.add(new)
                agenda.append(new)
                if trace is not None:
                    trace.add(new.render(trace.aliases),
                              f"{h.render(trace.aliases)} and event constraint {h.event.act} → {implied}")
    return frozenset(out)


def _join(atoms: tuple[Term, ...], facts: Mapping[str, list[Term]], subst: dict[Var, Term]) -> Iterator[dict[Var, Term]]:
    if not atoms:
        yield subst
        return
    first, rest = atoms[0], atoms[1:]
    pattern = substitute(first, subst)
    if isinstance(pattern, Fn):
        candidates: Iterable[Term] = facts.get(pattern.functor, ())
    else:
        candidates = [f for group in facts.values() for f in group]
    for fact in candidates:
        s = match(pattern, fact, subst)
        if s is not None:
            yield from _join(rest, facts, s)


def _index(fluents: Iterable[Term]) -> dict[str, list[Term]]:
    out: dict[str, list[Term]] = {}
    for f in sorted(set(fluents), key=sort_key):
        if isinstance(f, Fn):
            out.setdefault(f.functor, []).append(f)
    return out


def _event_bindings(ax: EffectAxiom, event: Event) -> Optional[dict[Var, Term]]:
    subst: dict[Var, Term] = {}
    if ax.agent is not None:
        agent = event.agent
        if agent is None:
            return None
        s = match(ax.agent, agent, subst)
        if s is None:
            return None
        subst = s
    for role, pattern in ax.bindings:
        value = event.role(role)
        if value is None:
            if ax.act is None:
                return None
            raise UnboundVariable(ax.label or ax.render(), role, event.message)
        s = match(substitute(pattern, subst), value, subst)
        if s is None:
            return None
        subst = s
    return subst


def ground_effects(sigma: Iterable[EffectAxiom], events: Iterable[Happens], gamma: Iterable[Observation],
                   abox: ABox | None = None, trace: Trace | None = None) -> frozenset:
    """All effect facts derivable from ``sigma`` (closed-world: nothing else)."""
    axioms = sorted(set(sigma), key=lambda a: (a.act or "", a.label, a.render()))
    happens = sorted(set(events), key=Happens.key)
    if abox is not None:
        happens = [Happens(_rebind(h.event, abox), h.time) for h in happens]
    gamma = list(gamma)
    facts: set[EffectFact] = set()
    changed = True
    while changed:
        changed = False
        for h in happens:
            state = _index(o.fluent for o in gamma if o.holds and o.predicate == HOLDS and o.time == h.time)
            initiated = _index(f.fluent for f in facts if f.kind == INITIATES and f.event == h.event)
            for ax in axioms:
                if ax.act is not None and ax.act != h.event.act:
                    continue
                base = _event_bindings(ax, h.event)
                if base is None:
                    continue
                for s1 in _join(ax.holds, state, base):
                    for s2 in _join(ax.initiated, initiated, s1):
                        for kind, template in ax.effects:
                            fluent = substitute(template, s2)
                            fact = EffectFact(kind, h.event, fluent, h.time)
                            if fact not in facts:
                                facts.add(fact)
                                changed = True
                                if trace is not None:
                                    trace.add(fact.render(trace.aliases),
                                              f"{h.render(trace.aliases)} and {ax.label or 'effect axiom'}")
    return frozenset(facts)


def _rebind(event: Event, abox: ABox) -> Event:
    if event.roles:
        return event
    return resolve_event(event.act, event.message, abox)


def _infer_time(gamma: Iterable[Observation], delta: Iterable[Happens]) -> int:
    times = {h.time for h in delta} | {o.time for o in gamma}
    if len(times) > 1:
        raise ValueError(f"observations and narrative span several timepoints: {sorted(times)}")
    return times.pop() if times else 0


def step(gamma: Iterable[Observation], delta: Iterable[Happens], sigma: Iterable[EffectAxiom],
         psi: ConstraintSet | None = None, abox: ABox | None = None, trace: Trace | None = None,
         time: int | None = None) -> frozenset:
    """Observations at t+1 from observations and events at t."""
    gamma = frozenset(gamma)
    delta = frozenset(delta)
    psi = psi or ConstraintSet()
    t = _infer_time(gamma, delta) if time is None else time
    closed = close_events(delta, psi, trace)
    effects = ground_effects(sigma, closed, gamma, abox, trace)
    initiated = {f.fluent for f in effects if f.kind == INITIATES}
    terminated = {f.fluent for f in effects if f.kind == TERMINATES}
    released_now = {f.fluent for f in effects if f.kind == RELEASES}
    released_before = {o.fluent for o in gamma if o.predicate == RELEASED and o.holds and o.time == t}
    released = released_now | (released_before - initiated - terminated)

    out: dict[Observation, str] = {}
    for f in sorted(initiated, key=sort_key):
        out[Observation(f, t + 1)] = "DEC9"
    for f in sorted(terminated, key=sort_key):
        out[Observation(f, t + 1, holds=False)] = "DEC10"
    for o in sorted_obs(gamma):
        if o.predicate == HOLDS and o.holds and o.time == t:
            if o.fluent not in released and o.fluent not in terminated:
                out.setdefault(Observation(o.fluent, t + 1), "DEC5")
    for f in sorted(released, key=sort_key):
        out[Observation(f, t + 1, predicate=RELEASED)] = "release"
    if trace is not None:
        for o in sorted_obs(out):
            trace.add(o.render(trace.aliases), out[o])
    return frozenset(out)


def check_consistent(phi: Iterable[Observation]) -> bool:
    seen: dict[tuple, bool] = {}
    for o in phi:
        k = (o.predicate, o.fluent, o.time)
        if seen.setdefault(k, o.holds) != o.holds:
            return False
    return True


def close_state(phi: Iterable[Observation], psi: ConstraintSet, trace: Trace | None = None) -> frozenset:
    """Close the positive HoldsAt observations under the state constraints, per timepoint."""
    phi = set(phi)
    rules = psi.sorted_state()
    for t in sorted({o.time for o in phi}):
        current = {o.fluent for o in phi if o.time == t and o.holds and o.predicate == HOLDS}
        changed = True
        while changed:
            changed = False
            index = _index(current)
            for rule in rules:
                for s in _join(rule.body, index, {}):
                    head = substitute(rule.head, s)
                    if head not in current and is_ground(head):
                        current.add(head)
                        phi.add(Observation(head, t))
                        changed = True
                        if trace is not None:
                            body = ", ".join(f"HoldsAt({render(substitute(a, s), trace.aliases)},{render_time(t)})"
                                             for a in rule.body)
                            trace.add(Observation(head, t).render(trace.aliases),
                                      f"{body} and {rule.render(trace.aliases)}")
    return frozenset(phi)


def entails(phi2: Iterable[Observation], phi1: Iterable[Observation], psi: ConstraintSet | None = None,
            trace: Trace | None = None) -> tuple[bool, frozenset]:
    closure = close_state(phi2, psi or ConstraintSet(), trace)
    missing = frozenset(o for o in phi1 if o not in closure)
    return not missing, missing


# -- text forms ------------------------------------------------------------------

_OBS = re.compile(r"^(?P<neg>¬|not\s+|-)?\s*(?P<pred>HoldsAt|ReleasedAt)\((?P<body>.*)\)$")


def parse_observation(line: str) -> Observation:
    m = _OBS.match(line.strip())
    if not m:
        raise ValueError(f"expected HoldsAt(f,t) or ReleasedAt(f,t): {line!r}")
    body = m.group("body")
    cut = body.rfind(",")
    if cut < 0:
        raise ValueError(f"observation needs a timepoint: {line!r}")
    try:
        fluent = parse_term(body[:cut])
    except TermSyntaxError as exc:
        raise ValueError(str(exc)) from exc
    return Observation(fluent, parse_time(body[cut + 1:]), holds=m.group("neg") is None, predicate=m.group("pred"))


def parse_observations(text: str) -> frozenset:
    """One observation per line; ``#`` comments and blank lines ignored."""
    out = set()
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            out.add(parse_observation(line))
    return frozenset(out)


def format_observations(obs: Iterable[Observation], aliases: Mapping[str, str] | None = None) -> str:
    return "".join(o.render(aliases) + "\n" for o in sorted_obs(obs))
