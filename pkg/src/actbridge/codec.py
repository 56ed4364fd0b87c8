"""Concrete agent messages: FIPA-ACL and KQML s-expressions, assertion blocks.

FIPA-ACL and KQML messages share the ``(performative :key value ...)`` shape.
They differ in how content is written: FIPA-ACL quotes the content
expression as a string, KQML embeds it as a bare list.  The message id
travels in ``:reply-with`` for both.

An assertion-block message is a header of ``@`` directives (the envelope)
followed by a triple block (the content)::

    @message Message01
    @performative A-VitalSignQueryRef
    @sender ConditionsChecker
    @receiver VitalSignAgent
    Message01 rdf:type A-VitalSignQueryRef
    ...
"""

from __future__ import annotations

import enum
import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Union

import yaml

from .abox import (ABox, Assertion, ClassAssertion, PropertyAssertion, TripleSyntaxError, format_triples,
                   parse_literal, parse_triple, tokenize_line)
from .terms import Lit


class Syntax(enum.Enum):
    FIPA_ACL = "FipaAcl"
    KQML = "Kqml"
    ASSERTION_BLOCK = "AssertionBlock"

    @classmethod
    def parse(cls, value: Union[str, "Syntax"]) -> "Syntax":
        if isinstance(value, Syntax):
            return value
        for s in cls:
            if s.value.lower() == value.lower().replace("-", "").replace("_", ""):
                return s
        raise UnsupportedSyntax(value)


class CodecError(ValueError):
    pass


class MessageSyntaxError(CodecError):
    def __init__(self, position: int, expected: str):
        self.position = position
        self.expected = expected
        super().__init__(f"expected {expected} at offset {position}")


class MissingField(CodecError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"missing envelope field {name!r}")


class UnsupportedSyntax(CodecError):
    def __init__(self, syntax: object, reason: str = ""):
        self.syntax = syntax
        super().__init__(f"unsupported syntax {syntax!r}{': ' + reason if reason else ''}")


class UnmappedConstruct(CodecError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"translator profile has no rule for {name!r}")


class AmbiguousRoot(CodecError):
    def __init__(self, candidates: Iterable[str]):
        self.candidates = sorted(candidates)
        super().__init__(f"expected exactly one message individual, found {self.candidates or 'none'}")


# -- s-expressions -------------------------------------------------------------

@dataclass(frozen=True)
class Text:
    """A double-quoted string atom (as opposed to a bare symbol)."""

    value: str


SExpr = Union[str, Text, tuple]

_ATOM = re.compile(r'[^\s()"]+')


def _quote(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_sexpr(node: SExpr) -> str:
    if isinstance(node, tuple):
        return "(" + " ".join(format_sexpr(n) for n in node) + ")"
    if isinstance(node, Text):
        return _quote(node.value)
    return node


class _SExprReader:
    def __init__(self, text: str, base: int = 0):
        self.text = text
        self.pos = 0
        self.base = base

    def error(self, expected: str) -> MessageSyntaxError:
        return MessageSyntaxError(self.base + self.pos, expected)

    def skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def read(self) -> SExpr:
        self.skip()
        if self.pos >= len(self.text):
            raise self.error("an expression")
        ch = self.text[self.pos]
        if ch == "(":
            self.pos += 1
            items = []
            while True:
                self.skip()
                if self.pos >= len(self.text):
                    raise self.error("')'")
                if self.text[self.pos] == ")":
                    self.pos += 1
                    return tuple(items)
                items.append(self.read())
        if ch == ")":
            raise self.error("an expression")
        if ch == '"':
            out, i = [], self.pos + 1
            while i < len(self.text):
                c = self.text[i]
                if c == "\\" and i + 1 < len(self.text):
                    out.append(self.text[i + 1])
                    i += 2
                    continue
                if c == '"':
                    self.pos = i + 1
                    return Text("".join(out))
                out.append(c)
                i += 1
            raise self.error("closing '\"'")
        m = _ATOM.match(self.text, self.pos)
        assert m is not None
        self.pos = m.end()
        return m.group(0)

    def read_all(self) -> list[SExpr]:
        out = []
        while True:
            self.skip()
            if self.pos >= len(self.text):
                return out
            out.append(self.read())


def parse_sexpr(text: str) -> SExpr:
    reader = _SExprReader(text)
    node = reader.read()
    reader.skip()
    if reader.pos != len(text):
        raise reader.error("end of input")
    return node


# -- message model ---------------------------------------------------------------

@dataclass(frozen=True)
class RawMessage:
    syntax: Syntax
    text: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("message text is empty")


@dataclass(frozen=True)
class Envelope:
    performative: str
    sender: str
    receiver: str
    language: str | None = None
    extra: tuple[tuple[str, str], ...] = ()
    message_id: str = ""

    def __post_init__(self) -> None:
        for name in ("performative", "sender", "receiver"):
            if not getattr(self, name):
                raise MissingField(name)
        object.__setattr__(self, "extra", tuple(sorted(dict(self.extra).items())))

    @property
    def params(self) -> dict[str, str]:
        return dict(self.extra)


@dataclass(frozen=True)
class Content:
    """Either a tuple of s-expressions or an ABox (assertion-block content)."""

    body: Union[tuple, ABox] = ()

    @property
    def is_assertions(self) -> bool:
        return isinstance(self.body, ABox)

    def __bool__(self) -> bool:
        return len(self.body) > 0


@dataclass(frozen=True)
class StructuredMessage:
    envelope: Envelope
    content: Content = field(default_factory=Content)

    @property
    def message_id(self) -> str:
        return self.envelope.message_id

    @property
    def performative(self) -> str:
        return self.envelope.performative


def split(msg: StructuredMessage) -> tuple[Envelope, Content]:
    return msg.envelope, msg.content


def join(envelope: Envelope, content: Content) -> StructuredMessage:
    return StructuredMessage(envelope, content)


def _fallback_id(text: str) -> str:
    return "msg-" + hashlib.sha1(text.encode("utf-8")).hexdigest()[:10]


# -- FIPA-ACL / KQML -------------------------------------------------------------------

_ENVELOPE_KEYS = {":sender", ":receiver", ":content", ":language", ":reply-with"}


def _agent_name(value: SExpr, position: int) -> str:
    if isinstance(value, Text):
        return value.value
    if isinstance(value, str):
        return value
    if value and value[0] == "set":
        if len(value) != 2:
            raise MessageSyntaxError(position, "a single receiver")
        return _agent_name(value[1], position)
    if value and value[0] == "agent-identifier":
        for i in range(1, len(value) - 1):
            if value[i] == ":name":
                return _agent_name(value[i + 1], position)
    raise MessageSyntaxError(position, "an agent name")


def _scalar(value: SExpr, position: int) -> str:
    if isinstance(value, Text):
        return value.value
    if isinstance(value, str):
        return value
    raise MessageSyntaxError(position, "a symbol or string parameter value")


def _content_body(value: SExpr, position: int) -> tuple:
    if isinstance(value, Text):
        if not value.value.strip():
            return ()
        try:
            items = _SExprReader(value.value).read_all()
        except MessageSyntaxError as exc:
            raise MessageSyntaxError(position + 1 + exc.position, exc.expected) from None
        if len(items) == 1 and isinstance(items[0], tuple):
            return items[0]
        return tuple(items)
    if isinstance(value, tuple):
        return value
    return (value,)


def _parse_sexpr_message(text: str) -> StructuredMessage:
    reader = _SExprReader(text)
    reader.skip()
    if reader.pos >= len(text) or text[reader.pos] != "(":
        raise reader.error("'(' opening the message")
    reader.pos += 1
    reader.skip()
    start = reader.pos
    performative = reader.read()
    if not isinstance(performative, str) or performative.startswith(":"):
        raise MessageSyntaxError(start, "a performative symbol")
    fields: dict[str, tuple[SExpr, int]] = {}
    while True:
        reader.skip()
        if reader.pos >= len(text):
            raise reader.error("')'")
        if text[reader.pos] == ")":
            reader.pos += 1
            break
        kpos = reader.pos
        key = reader.read()
        if not isinstance(key, str) or not key.startswith(":") or len(key) < 2:
            raise MessageSyntaxError(kpos, "a ':parameter' keyword")
        if key in fields:
            raise MessageSyntaxError(kpos, f"no duplicate {key}")
        reader.skip()
        vpos = reader.pos
        if vpos >= len(text) or text[vpos] == ")":
            raise MessageSyntaxError(vpos, f"a value for {key}")
        fields[key] = (reader.read(), vpos)
    reader.skip()
    if reader.pos != len(text):
        raise reader.error("end of message")

    def agent(key: str) -> str:
        if key not in fields:
            raise MissingField(key[1:])
        return _agent_name(*fields[key])

    sender, receiver = agent(":sender"), agent(":receiver")
    language = _scalar(*fields[":language"]) if ":language" in fields else None
    msg_id = _scalar(*fields[":reply-with"]) if ":reply-with" in fields else _fallback_id(text)
    body = _content_body(*fields[":content"]) if ":content" in fields else ()
    extra = tuple((k[1:], _scalar(v, p)) for k, (v, p) in fields.items() if k not in _ENVELOPE_KEYS)
    envelope = Envelope(performative, sender, receiver, language, extra, msg_id)
    return StructuredMessage(envelope, Content(body))


def _token(value: str) -> str:
    if value and _ATOM.fullmatch(value) and not value.startswith(":"):
        return value
    return _quote(value)


def _serialize_sexpr_message(msg: StructuredMessage, syntax: Syntax) -> str:
    env = msg.envelope
    body = msg.content.body
    if isinstance(body, ABox):
        raise UnsupportedSyntax(syntax.value, "assertion content cannot be written as an s-expression message")
    if syntax is Syntax.FIPA_ACL:
        sender = f"(agent-identifier :name {_token(env.sender)})"
        receiver = f"(set (agent-identifier :name {_token(env.receiver)}))"
        content = _quote(format_sexpr(body)) if body else "()"
    else:
        sender, receiver = _token(env.sender), _token(env.receiver)
        content = format_sexpr(body)
    lines = [f"({env.performative}", f" :reply-with {_token(env.message_id)}",
             f" :sender {sender}", f" :receiver {receiver}", f" :content {content}"]
    if env.language is not None:
        lines.append(f" :language {_token(env.language)}")
    for key, value in env.extra:
        lines.append(f" :{key} {_token(value)}")
    return "\n".join(lines) + ")\n"


# -- assertion blocks -------------------------------------------------------------------

_DIRECTIVES = ("message", "performative", "sender", "receiver", "language")


def _directive_value(token: str) -> str:
    return parse_literal(token).value if token.startswith("'") else token


def _parse_assertion_block(text: str) -> StructuredMessage:
    header: dict[str, str] = {}
    extra: list[tuple[str, str]] = []
    prefixes: dict[str, str] = {}
    triples: list[Assertion] = []
    offset = 0
    for lineno, line in enumerate(text.splitlines(keepends=True), 1):
        start, offset = offset, offset + len(line)
        raw = line.rstrip("\r\n")
        try:
            tokens = tokenize_line(raw, lineno)
        except TripleSyntaxError as exc:
            raise MessageSyntaxError(start + exc.position - 1, exc.expected) from None
        if not tokens:
            continue
        head = tokens[0]
        if head.startswith("@"):
            name = head[1:]
            if name == "prefix":
                if len(tokens) != 3 or not tokens[1].endswith(":") or not re.fullmatch(r"<[^>]*>", tokens[2]):
                    raise MessageSyntaxError(start, "@prefix name: <expansion>")
                prefixes[tokens[1][:-1]] = tokens[2][1:-1]
            elif name == "param":
                if len(tokens) != 3:
                    raise MessageSyntaxError(start, "@param key value")
                extra.append((tokens[1], _directive_value(tokens[2])))
            elif name in _DIRECTIVES:
                if len(tokens) != 2:
                    raise MessageSyntaxError(start, f"@{name} value")
                if name in header:
                    raise MessageSyntaxError(start, f"a single @{name}")
                header[name] = _directive_value(tokens[1])
            else:
                raise MessageSyntaxError(start, "a known @directive")
            continue
        try:
            triples.append(parse_triple(tokens, prefixes, lineno))
        except TripleSyntaxError as exc:
            raise MessageSyntaxError(start, exc.expected) from None
    for name in ("performative", "sender", "receiver"):
        if name not in header:
            raise MissingField(name)
    envelope = Envelope(header["performative"], header["sender"], header["receiver"], header.get("language"),
                        tuple(extra), header.get("message") or _fallback_id(text))
    return StructuredMessage(envelope, Content(ABox.of(triples)))


def _lit_token(value: str) -> str:
    return value if value and re.fullmatch(r"[^\s'#@][^\s']*", value) else str(Lit(value))


def _serialize_assertion_block(msg: StructuredMessage) -> str:
    env = msg.envelope
    body = msg.content.body
    if not isinstance(body, ABox):
        raise UnsupportedSyntax(Syntax.ASSERTION_BLOCK.value, "s-expression content cannot be written as triples")
    lines = [f"@message {_lit_token(env.message_id)}", f"@performative {_lit_token(env.performative)}",
             f"@sender {_lit_token(env.sender)}", f"@receiver {_lit_token(env.receiver)}"]
    if env.language is not None:
        lines.append(f"@language {_lit_token(env.language)}")
    for key, value in env.extra:
        lines.append(f"@param {key} {_lit_token(value)}")
    return "\n".join(lines) + "\n" + format_triples(body)


# -- public codec surface -------------------------------------------------------------

def parse(raw: RawMessage) -> StructuredMessage:
    if raw.syntax is Syntax.ASSERTION_BLOCK:
        return _parse_assertion_block(raw.text)
    return _parse_sexpr_message(raw.text)


def serialize(msg: StructuredMessage, syntax: Union[Syntax, str]) -> RawMessage:
    syntax = Syntax.parse(syntax)
    if syntax is Syntax.ASSERTION_BLOCK:
        return RawMessage(syntax, _serialize_assertion_block(msg))
    return RawMessage(syntax, _serialize_sexpr_message(msg, syntax))


# -- translator profiles -------------------------------------------------------------

@dataclass(frozen=True)
class PerformativeRule:
    performative: str
    cls: str
    defaults: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class ConstructRule:
    head: str
    cls: str
    prefix: str
    args: tuple[str | None, ...] = ()


@dataclass(frozen=True)
class TranslatorProfile:
    """Declarative ACL <-> ontology mapping for one system and syntax."""

    name: str
    syntax: Syntax
    language: str | None = None
    performatives: tuple[PerformativeRule, ...] = ()
    open_performatives: bool = False
    params: tuple[tuple[str, str], ...] = ()
    constructs: tuple[ConstructRule, ...] = ()
    sender_prop: str = "hasSender"
    receiver_prop: str = "hasReceiver"
    content_prop: str = "hasContent"
    actor_class: str = "Actor"
    actor_prefix: str = "Actor"
    agent_name_prop: str = "hasAgentName"
    message_class: str = "CommunicationAct"
    unknown_agent: str = "anonymous"

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any], name: str = "profile") -> "TranslatorProfile":
        perfs = []
        for perf, spec in (data.get("performatives") or {}).items():
            spec = spec if isinstance(spec, Mapping) else {"class": spec}
            defaults = tuple(sorted((k, str(v)) for k, v in (spec.get("assert") or {}).items()))
            perfs.append(PerformativeRule(str(perf), spec["class"], defaults))
        constructs = []
        for head, spec in (data.get("constructs") or {}).items():
            args = spec.get("args") or []
            if isinstance(args, str):
                args = [args]
            constructs.append(ConstructRule(str(head), spec["class"], spec.get("prefix", spec["class"][:2].upper()),
                                            tuple(a if a not in (None, "_") else None for a in args)))
        roles = data.get("roles") or {}
        return cls(
            name=data.get("name", name),
            syntax=Syntax.parse(data["syntax"]),
            language=data.get("language"),
            performatives=tuple(perfs),
            open_performatives=bool(data.get("open_performatives", False)),
            params=tuple((str(k), str(v)) for k, v in (data.get("params") or {}).items()),
            constructs=tuple(constructs),
            sender_prop=roles.get("sender", "hasSender"),
            receiver_prop=roles.get("receiver", "hasReceiver"),
            content_prop=roles.get("content", "hasContent"),
            actor_class=roles.get("actor_class", "Actor"),
            actor_prefix=roles.get("actor_prefix", "Actor"),
            agent_name_prop=roles.get("agent_name", "hasAgentName"),
            message_class=data.get("message_class", "CommunicationAct"),
            unknown_agent=data.get("unknown_agent", "anonymous"),
        )

    @classmethod
    def load(cls, path: Union[str, Path]) -> "TranslatorProfile":
        path = Path(path)
        return cls.from_mapping(yaml.safe_load(path.read_text(encoding="utf-8")) or {}, name=path.stem)

    def performative_rule(self, performative: str) -> PerformativeRule:
        for rule in self.performatives:
            if rule.performative == performative:
                return rule
        if self.open_performatives:
            return PerformativeRule(performative, performative)
        raise UnmappedConstruct(performative)

    def act_class(self, performative: str) -> str:
        return self.performative_rule(performative).cls

    @property
    def message_classes(self) -> set[str]:
        return {r.cls for r in self.performatives} | {self.message_class}


class _Namer:
    def __init__(self, taken: Iterable[str]):
        self.taken = set(taken)
        self.counters: dict[str, int] = {}

    def fresh(self, prefix: str) -> str:
        n = self.counters.get(prefix, 0)
        while True:
            n += 1
            name = f"{prefix}{n:02d}"
            if name not in self.taken:
                self.counters[prefix] = n
                self.taken.add(name)
                return name


def _is_variable(node: SExpr) -> bool:
    return isinstance(node, str) and node.startswith("?")


def to_abox(msg: StructuredMessage, mapping: TranslatorProfile) -> ABox:
    """Translate a message into basic assertions (the pre-realization set M)."""
    env = msg.envelope
    root = env.message_id
    rule = mapping.performative_rule(env.performative)
    if env.language and mapping.language and env.language != mapping.language:
        raise UnmappedConstruct(f"language {env.language}")
    body = msg.content.body
    out: set[Assertion] = {ClassAssertion(rule.cls, root)}
    out |= {PropertyAssertion(p, root, Lit(v)) for p, v in rule.defaults}
    params = dict(mapping.params)
    for key, value in env.extra:
        if key not in params:
            raise UnmappedConstruct(f":{key}")
        out.add(PropertyAssertion(params[key], root, Lit(value)))

    body_abox = body if isinstance(body, ABox) else ABox()
    namer = _Namer(body_abox.individuals() | {root})
    for prop, agent in ((mapping.sender_prop, env.sender), (mapping.receiver_prop, env.receiver)):
        if body_abox.objects(root, prop):
            continue
        actor = namer.fresh(mapping.actor_prefix)
        out |= {PropertyAssertion(prop, root, actor), ClassAssertion(mapping.actor_class, actor),
                PropertyAssertion(mapping.agent_name_prop, actor, Lit(agent))}

    if isinstance(body, ABox):
        out |= body.assertions
        return ABox.of(out)

    constructs = {c.head: c for c in mapping.constructs}

    def translate(node: SExpr) -> Union[str, Lit]:
        if isinstance(node, Text):
            return Lit(node.value)
        if isinstance(node, str):
            return Lit(node)
        if not node or not isinstance(node[0], str):
            raise UnmappedConstruct(format_sexpr(node))
        head, args = node[0], node[1:]
        c = constructs.get(head)
        if c is None:
            raise UnmappedConstruct(head)
        if len(args) > len(c.args):
            raise UnmappedConstruct(f"{head}/{len(args)}")
        ind = namer.fresh(c.prefix)
        out.add(ClassAssertion(c.cls, ind))
        for slot, arg in zip(c.args, args):
            if slot is None:
                continue
            if _is_variable(arg):
                raise UnmappedConstruct(f"variable {arg} in {head}")
            out.add(PropertyAssertion(slot, ind, translate(arg)))
        return ind

    for item in body:
        out.add(PropertyAssertion(mapping.content_prop, root, translate(item)))
    return ABox.of(out)


def find_root(abox: ABox, mapping: TranslatorProfile) -> str:
    classes = mapping.message_classes
    envelope_props = {mapping.sender_prop, mapping.receiver_prop, mapping.content_prop}
    candidates = set()
    contents = set()
    for a in abox.assertions:
        if isinstance(a, ClassAssertion) and a.cls in classes:
            candidates.add(a.individual)
        elif isinstance(a, PropertyAssertion) and a.prop in envelope_props:
            candidates.add(a.subject)
            if a.prop == mapping.content_prop and isinstance(a.object, str):
                contents.add(a.object)
    candidates -= contents
    if len(candidates) != 1:
        raise AmbiguousRoot(candidates)
    return candidates.pop()


def _prefer(classes: Iterable[str], ontology: Any) -> list[str]:
    pool = list(dict.fromkeys(classes))
    if ontology is None:
        return pool
    specific = ontology.most_specific(pool)
    return [c for c in pool if c in specific]


def message_performative(abox: ABox, root: str, mapping: TranslatorProfile, ontology: Any = None) -> str:
    """Most specific profile performative typing ``root``; falls back to its most specific class."""
    types = abox.types_of(root)
    matching = [r for r in mapping.performatives if r.cls in types]
    if matching:
        best = _prefer([r.cls for r in matching], ontology)[0]
        return next(r.performative for r in matching if r.cls == best)
    others = sorted(types - {mapping.message_class})
    if others:
        preferred = _prefer(others, ontology)
        return preferred[0]
    if mapping.message_class in types or mapping.open_performatives:
        return mapping.message_class
    raise UnmappedConstruct(f"performative for {root}")


def from_abox(abox: ABox, mapping: TranslatorProfile, ontology: Any = None) -> StructuredMessage:
    """Rebuild a message in the profile's vocabulary from a (possibly saturated) ABox."""
    root = find_root(abox, mapping)
    performative = message_performative(abox, root, mapping, ontology)

    def agent(prop: str) -> str:
        for actor in abox.objects(root, prop):
            if isinstance(actor, Lit):
                return actor.value
            for name in abox.objects(actor, mapping.agent_name_prop):
                if isinstance(name, Lit):
                    return name.value
            return actor
        return mapping.unknown_agent

    extra = []
    for key, prop in mapping.params:
        for value in abox.objects(root, prop):
            if isinstance(value, Lit):
                extra.append((key, value.value))
                break
    envelope = Envelope(performative, agent(mapping.sender_prop), agent(mapping.receiver_prop), mapping.language,
                        tuple(extra), root)
    if mapping.syntax is Syntax.ASSERTION_BLOCK:
        return StructuredMessage(envelope, Content(abox))

    constructs = list(mapping.constructs)
    fresh_var = iter(range(1, 10_000))

    def rebuild(node: Union[str, Lit], seen: frozenset[str], var: str | None) -> SExpr:
        if isinstance(node, Lit):
            return node.value if _ATOM.fullmatch(node.value) and not node.value.startswith((":", "?")) \
                else Text(node.value)
        if node in seen:
            raise UnmappedConstruct(f"cycle through {node}")
        types = abox.types_of(node)
        matches = [c for c in constructs if c.cls in types]
        if not matches:
            raise UnmappedConstruct(f"individual {node} ({', '.join(sorted(types)) or 'untyped'})")
        best = _prefer([c.cls for c in matches], ontology)[0]
        c = next(c for c in matches if c.cls == best)
        # a variable slot refers to the variable of the nearest enclosing construct that has one
        if None in c.args and var is None:
            var = f"?v{next(fresh_var)}"
        args: list[SExpr] = []
        pending_gap = False
        for slot in c.args:
            if slot is None:
                args.append(var)
                continue
            values = abox.objects(node, slot)
            if not values:
                pending_gap = True
                continue
            if pending_gap:
                raise UnmappedConstruct(f"{c.head} missing an argument before {slot}")
            args.append(rebuild(values[0], seen | {node}, var))
        return (c.head, *args)

    body = tuple(rebuild(obj, frozenset({root}), None) for obj in abox.objects(root, mapping.content_prop))
    return StructuredMessage(envelope, Content(body))
