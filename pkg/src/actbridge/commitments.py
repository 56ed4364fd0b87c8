"""Commitment fluents, the commitment-dynamics axioms and per-act effect libraries.

``C(x,y,p)``: debtor x is committed to creditor y to bring about p.
``CC(x,y,c,p)``: the same, once condition c is brought about.  The agent of
a send event is its sender.

Per-act effects are data.  A registry line reads::

    effects Inquiry: initiates CC(receiver, sender, accept(receiver,sender,content), content)

with optional ``when <fluent> and <fluent>`` conditions and several effects
separated by ``;``.  The words sender, receiver, content, reply and message
stand for the corresponding roles of the sent message.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .ec import EFFECT_KINDS, INITIATES, TERMINATES, EffectAxiom
from .terms import Fn, Term, TermSyntaxError, Var, parse_term, split_top_level, substitute

COMMITMENT = "C"
CONDITIONAL = "CC"
ACCEPT = "accept"


def _agent(name: str | Term) -> Term:
    return Fn(name) if isinstance(name, str) else name


@dataclass(frozen=True)
class Commitment:
    debtor: str
    creditor: str
    proposition: Term

    def __post_init__(self) -> None:
        if self.debtor == self.creditor:
            raise ValueError("debtor and creditor must differ")

    def fluent(self) -> Fn:
        return Fn(COMMITMENT, (Fn(self.debtor), Fn(self.creditor), self.proposition))


@dataclass(frozen=True)
class ConditionalCommitment:
    debtor: str
    creditor: str
    condition: Term
    proposition: Term

    def __post_init__(self) -> None:
        if self.debtor == self.creditor:
            raise ValueError("debtor and creditor must differ")
        if self.condition == self.proposition:
            raise ValueError("condition and proposition must differ")

    def fluent(self) -> Fn:
        return Fn(CONDITIONAL, (Fn(self.debtor), Fn(self.creditor), self.condition, self.proposition))


def accept(accepter: str | Term, towards: str | Term, subject: str | Term) -> Fn:
    return Fn(ACCEPT, (_agent(accepter), _agent(towards), _agent(subject)))


def sigma_c() -> frozenset:
    """The three commitment-dynamics schemas, guarded on who causes the event."""
    x, y, c, p = Var("x"), Var("y"), Var("c"), Var("p")
    base = Fn(COMMITMENT, (x, y, p))
    cond = Fn(CONDITIONAL, (x, y, c, p))
    return frozenset({
        EffectAxiom(None, ((TERMINATES, base),), holds=(base,), initiated=(p,), agent=x,
                    label="discharge of C by its debtor"),
        EffectAxiom(None, ((INITIATES, base), (TERMINATES, cond)), holds=(cond,), initiated=(c,), agent=y,
                    label="CC becomes C when the creditor brings about the condition"),
        EffectAxiom(None, ((TERMINATES, cond),), holds=(cond,), initiated=(p,), agent=x,
                    label="discharge of CC by its debtor"),
    })


# -- per-act effect registry ---------------------------------------------------------

ROLE_WORDS = ("sender", "receiver", "content", "reply", "message")
PRIMITIVE_ACTS = ("Assertive", "Directive", "Commissive", "Declarative", "Expressive")


class UnknownActClass(KeyError):
    def __init__(self, act: str):
        self.act = act
        super().__init__(f"no effect entry for act class {act!r}")


class EffectSyntaxError(ValueError):
    def __init__(self, line: int, detail: str):
        self.line = line
        self.detail = detail
        super().__init__(f"line {line}: {detail}")


_ROLE_VARS = {w: Var(w) for w in ROLE_WORDS}
_ROLE_CONSTS = {Var(w): Fn(w) for w in ROLE_WORDS}


def _roles_to_vars(term: Term) -> Term:
    if isinstance(term, Fn):
        if not term.args and term.functor in _ROLE_VARS:
            return _ROLE_VARS[term.functor]
        return Fn(term.functor, tuple(_roles_to_vars(a) for a in term.args))
    return term


def _vars_to_roles(term: Term) -> Term:
    return substitute(term, _ROLE_CONSTS)


@dataclass(frozen=True)
class EffectEntry:
    act: str
    effects: tuple[tuple[str, Term], ...]
    conditions: tuple[Term, ...] = ()

    def axiom(self) -> EffectAxiom:
        used: set[str] = set()
        for t in (*self.conditions, *(f for _, f in self.effects)):
            used |= {v.name for v in _collect_vars(t)}
        bindings = tuple((r, Var(r)) for r in ROLE_WORDS if r in used)
        return EffectAxiom(self.act, self.effects, holds=self.conditions, bindings=bindings,
                           label=f"effects of {self.act}")

    def to_line(self) -> str:
        effects = "; ".join(f"{k.lower()} {_vars_to_roles(f)}" for k, f in self.effects)
        when = f"when {' and '.join(str(_vars_to_roles(c)) for c in self.conditions)} " if self.conditions else ""
        return f"effects {self.act}: {when}{effects}"


def _collect_vars(term: Term) -> set[Var]:
    if isinstance(term, Var):
        return {term}
    if isinstance(term, Fn):
        out: set[Var] = set()
        for a in term.args:
            out |= _collect_vars(a)
        return out
    return set()


_LINE = re.compile(r"^effects\s+(?P<act>[A-Za-z_][\w\-]*)\s*:\s*(?P<body>.+)$")
_KINDS = {k.lower(): k for k in EFFECT_KINDS}


def parse_effect_line(line: str, lineno: int = 1) -> EffectEntry:
    m = _LINE.match(line.strip())
    if not m:
        raise EffectSyntaxError(lineno, "expected 'effects <ActClass>: ...'")
    body = m.group("body").strip()
    conditions: list[Term] = []
    parts = split_top_level(body, ";")
    effects: list[tuple[str, Term]] = []
    for i, part in enumerate(parts):
        if i == 0 and part.startswith("when "):
            words = part[5:]
            kinds = [k for k in _KINDS if re.search(rf"\s{k}\s", f" {words} ")]
            if not kinds:
                raise EffectSyntaxError(lineno, "condition list must be followed by an effect")
            cut = min(re.search(rf"\s{k}\s", f" {words} ").start() for k in kinds)
            cond_text, part = words[:cut].strip(), words[cut:].strip()
            for c in split_top_level(cond_text, " and "):
                conditions.append(_term(c, lineno))
        kind, _, rest = part.partition(" ")
        if kind not in _KINDS or not rest.strip():
            raise EffectSyntaxError(lineno, f"expected initiates|terminates|releases <fluent>, got {part!r}")
        effects.append((_KINDS[kind], _term(rest.strip(), lineno)))
    return EffectEntry(m.group("act"), tuple(effects), tuple(conditions))


def _term(text: str, lineno: int) -> Term:
    try:
        return _roles_to_vars(parse_term(text))
    except TermSyntaxError as exc:
        raise EffectSyntaxError(lineno, str(exc)) from exc


class EffectRegistry:
    """Act class -> effect entries.  Primitive acts are known with no effects."""

    def __init__(self, entries: Iterable[EffectEntry] = (), known: Iterable[str] = PRIMITIVE_ACTS):
        self._entries: dict[str, list[EffectEntry]] = {a: [] for a in known}
        for e in entries:
            self.add(e)

    def add(self, entry: EffectEntry) -> None:
        self._entries.setdefault(entry.act, []).append(entry)

    def acts(self) -> list[str]:
        return sorted(self._entries)

    def lookup(self, act: str) -> list[EffectEntry]:
        if act not in self._entries:
            raise UnknownActClass(act)
        return list(self._entries[act])

    def __contains__(self, act: str) -> bool:
        return act in self._entries

    def merged(self, other: "EffectRegistry") -> "EffectRegistry":
        out = EffectRegistry(known=())
        for reg in (self, other):
            for act, entries in reg._entries.items():
                out._entries.setdefault(act, [])
                for e in entries:
                    if e not in out._entries[act]:
                        out._entries[act].append(e)
        return out

    def to_text(self) -> str:
        return "".join(e.to_line() + "\n" for act in self.acts() for e in self._entries[act])

    @classmethod
    def parse(cls, text: str) -> "EffectRegistry":
        entries = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if line:
                entries.append(parse_effect_line(line, lineno))
        return cls(entries)

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "EffectRegistry":
        return cls.parse("\n".join(lines))


SHIPPED_EFFECTS = """\
effects Inquiry: initiates CC(receiver, sender, accept(receiver, sender, content), content)
effects Responsive: terminates C(sender, receiver, reply); terminates CC(sender, receiver, accept(sender, receiver, reply), reply); initiates content
"""


def shipped_registry() -> EffectRegistry:
    return EffectRegistry.parse(SHIPPED_EFFECTS)


def sigma_t(registry: EffectRegistry, acts: Iterable[str] | None = None) -> frozenset:
    """Effect axioms for ``acts`` (default: every registered act)."""
    names = registry.acts() if acts is None else list(acts)
    return frozenset(e.axiom() for a in names for e in registry.lookup(a))


def effect_axioms(registry: EffectRegistry | None = None, acts: Iterable[str] | None = None) -> frozenset:
    return sigma_c() | sigma_t(registry or shipped_registry(), acts)
