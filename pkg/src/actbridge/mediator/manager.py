"""Per-system manager: turns local messages into shared assertions and back.

Outbound (a local agent sends to another system)::

    Idle -> Splitting -> Translating -> RealizingSource -> Materializing -> Dispatching -> Done

Inbound (a frame from another manager)::

    Idle -> RealizingTarget -> Emitting -> Done

Any stage may end in Error; the failing stage is kept as the reason.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from ..abox import ABox
from ..codec import (Content, Envelope, RawMessage, StructuredMessage, Syntax, find_root, from_abox, message_performative,
                     parse, serialize, split, to_abox)
from ..ontology import saturate
from .directory import Directory, DirectoryEntry
from .registry import SystemConfig, SystemRegistry
from .transport import Frame


class ManagerState(enum.Enum):
    IDLE = "Idle"
    SPLITTING = "Splitting"
    TRANSLATING = "Translating"
    REALIZING_SOURCE = "RealizingSource"
    MATERIALIZING = "Materializing"
    DISPATCHING = "Dispatching"
    REALIZING_TARGET = "RealizingTarget"
    EMITTING = "Emitting"
    DONE = "Done"
    ERROR = "Error"


ORDER = [s for s in ManagerState if s is not ManagerState.ERROR]


class StageError(RuntimeError):
    def __init__(self, stage: ManagerState, reason: str, message_id: str = "", system: str = ""):
        self.stage = stage
        self.reason = reason
        self.message_id = message_id
        self.system = system
        super().__init__(f"Error({stage.value}) in {system or 'manager'}: {reason}")


class IllegalTransition(RuntimeError):
    pass


@dataclass
class Outbound:
    """Everything the source side produced for one message."""

    message_id: str
    source_act: str
    envelope: Envelope
    abox: ABox          # before realization
    saturated: ABox     # the materialized payload
    frame: Optional[Frame] = None
    stages: list[str] = field(default_factory=list)


@dataclass
class Emitted:
    message_id: str
    target_act: str
    raw: RawMessage
    saturated: ABox
    receiver: str
    stages: list[str] = field(default_factory=list)


def act_of(abox: ABox, root: str, cfg: SystemConfig, syntax: Union[Syntax, str, None] = None) -> str:
    """Act class a system's agents would read ``root`` as."""
    profile = cfg.profile(syntax)
    perf = message_performative(abox, root, profile, cfg.ontology)
    for rule in profile.performatives:
        if rule.performative == perf:
            return rule.cls
    return perf


class CommOntManager:
    def __init__(self, config: SystemConfig, registry: SystemRegistry, log: Callable[[str], None] | None = None):
        self.config = config
        self.registry = registry
        self.state = ManagerState.IDLE
        self.error: Optional[StageError] = None
        self.address = config.address
        self.peers: dict[str, str] = {}
        self.inboxes: dict[str, list[RawMessage]] = {a: [] for a in config.agents}
        self._log = log or (lambda line: None)
        self._current = ""
        self._stages: list[str] = []

    @property
    def system_id(self) -> str:
        return self.config.system_id

    # -- state machine ---------------------------------------------------------

    def _enter(self, state: ManagerState) -> None:
        if state is not ManagerState.ERROR:
            if self.state in (ManagerState.DONE, ManagerState.ERROR) and state is not ManagerState.IDLE:
                raise IllegalTransition(f"{self.state.value} -> {state.value}")
            if state is not ManagerState.IDLE and self.state is not ManagerState.IDLE \
                    and ORDER.index(state) <= ORDER.index(self.state):
                raise IllegalTransition(f"{self.state.value} -> {state.value}")
        self.state = state
        if state not in (ManagerState.IDLE, ManagerState.ERROR):
            self._stages.append(state.value)
        self._log(f"[{self._current}] {self.system_id} {state.value}")

    def _fail(self, stage: ManagerState, exc: Exception) -> StageError:
        err = exc if isinstance(exc, StageError) else StageError(stage, f"{type(exc).__name__}: {exc}",
                                                                 self._current, self.system_id)
        self.error = err
        self.state = ManagerState.ERROR
        self._log(f"[{self._current}] {self.system_id} Error({stage.value}) {err.reason}")
        return err

    def _begin(self, message_id: str) -> None:
        self._current = message_id or "?"
        self._stages = []
        self.error = None
        self.state = ManagerState.IDLE

    def _run(self, stage: ManagerState, fn: Callable[[], object]) -> object:
        self._enter(stage)
        try:
            return fn()
        except Exception as exc:  # every stage failure is reported with its stage
            raise self._fail(stage, exc) from exc

    # -- directory -------------------------------------------------------------

    def join(self, directory: Directory) -> None:
        for entry in directory.join(self.system_id, self.address, self._on_join):
            self.peers[entry.system_id] = entry.address
        self._log(f"join {self.system_id}")

    def _on_join(self, entry: DirectoryEntry) -> None:
        self.peers[entry.system_id] = entry.address
        self._log(f"{self.system_id} learns {entry.system_id}")

    # -- outbound --------------------------------------------------------------

    def prepare(self, raw: RawMessage, target: str) -> Outbound:
        """Splitting through Materializing."""
        self._begin("?")
        profile_holder: dict = {}

        def do_split() -> tuple[Envelope, Content]:
            msg = parse(raw)
            self._current = msg.message_id
            return split(msg)

        envelope, content = self._run(ManagerState.SPLITTING, do_split)  # type: ignore[misc]

        def do_translate() -> ABox:
            profile = self.config.profile(raw.syntax)
            profile_holder["p"] = profile
            return to_abox(StructuredMessage(envelope, content), profile)

        abox: ABox = self._run(ManagerState.TRANSLATING, do_translate)  # type: ignore[assignment]
        saturated: ABox = self._run(ManagerState.REALIZING_SOURCE,
                                    lambda: saturate(self.config.ontology, abox))  # type: ignore[assignment]
        root = envelope.message_id

        def do_materialize() -> Frame:
            payload = StructuredMessage(
                Envelope(envelope.performative, envelope.sender, envelope.receiver, envelope.language, (), root),
                Content(saturated))
            body = serialize(payload, Syntax.ASSERTION_BLOCK).text
            return Frame(root, self.system_id, target, body)

        frame: Frame = self._run(ManagerState.MATERIALIZING, do_materialize)  # type: ignore[assignment]
        source_act = profile_holder["p"].act_class(envelope.performative)
        return Outbound(root, source_act, envelope, abox, saturated, frame, list(self._stages))

    def dispatch(self, out: Outbound, directory: Directory, transport) -> str:
        def do_dispatch() -> str:
            entry = directory.lookup(out.frame.target)  # type: ignore[union-attr]
            transport.send(entry.address, out.frame)
            return entry.address

        address: str = self._run(ManagerState.DISPATCHING, do_dispatch)  # type: ignore[assignment]
        self._enter(ManagerState.DONE)
        out.stages = out.stages + [ManagerState.DISPATCHING.value, ManagerState.DONE.value]
        return address

    # -- inbound ---------------------------------------------------------------

    def realize_inbound(self, frame: Frame) -> tuple[Envelope, ABox]:
        self._begin(frame.message_id)

        def do_realize() -> tuple[Envelope, ABox]:
            msg = parse(RawMessage(Syntax.ASSERTION_BLOCK, frame.body))
            return msg.envelope, saturate(self.config.ontology, msg.content.body)  # type: ignore[arg-type]

        return self._run(ManagerState.REALIZING_TARGET, do_realize)  # type: ignore[return-value]

    def emit(self, frame: Frame, envelope: Envelope, saturated: ABox, deliver: bool = True,
             syntax: Union[Syntax, str, None] = None) -> Emitted:
        profile = self.config.profile(syntax)

        def do_emit() -> Emitted:
            msg = from_abox(saturated, profile, self.config.ontology)
            raw = serialize(msg, profile.syntax)
            root = find_root(saturated, profile)
            act = act_of(saturated, root, self.config, profile.syntax)
            return Emitted(frame.message_id, act, raw, saturated, msg.envelope.receiver)

        emitted: Emitted = self._run(ManagerState.EMITTING, do_emit)  # type: ignore[assignment]
        if deliver:
            if emitted.receiver not in self.inboxes:
                raise self._fail(ManagerState.EMITTING,
                                 LookupError(f"no agent {emitted.receiver!r} in system {self.system_id}"))
            self.inboxes[emitted.receiver].append(emitted.raw)
            self._log(f"[{frame.message_id}] deliver {self.system_id}/{emitted.receiver} {emitted.target_act}")
        self._enter(ManagerState.DONE)
        emitted.stages = list(self._stages)
        return emitted

    def receive(self, frame: Frame, deliver: bool = True) -> Emitted:
        envelope, saturated = self.realize_inbound(frame)
        return self.emit(frame, envelope, saturated, deliver)

    def deliver_local(self, raw: RawMessage) -> str:
        """Same-system traffic: hand the message to the receiving agent untouched."""
        msg = parse(raw)
        receiver = msg.envelope.receiver
        if receiver not in self.inboxes:
            raise StageError(ManagerState.EMITTING, f"no agent {receiver!r} in system {self.system_id}",
                             msg.message_id, self.system_id)
        self.inboxes[receiver].append(raw)
        self._log(f"[{msg.message_id}] loopback {self.system_id}/{receiver}")
        return receiver
