"""End-to-end conversion between registered systems, and the scenario harness.

A scenario file lists messages for local agents to send::

    transport: inproc        # or tcp
    join: [A, B]             # systems whose managers register (default: all)
    messages:
      - from: MedicalFIPAAgents
        to: Aingeru          # optional, else the system of the receiver
        file: message01.acl  # or text: "..."
        syntax: fipa-acl     # optional, default of the sending system
        check: true          # run the satisfaction check before dispatch
        gamma: ["HoldsAt(f,t0)"]
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

import yaml

from ..abox import ABox
from ..checker import ConversionCase, ConversionReport, Side, check
from ..codec import RawMessage, Syntax, find_root, parse
from ..ec import Observation, parse_observation
from ..ontology import saturate
from .directory import Directory
from .manager import CommOntManager, ManagerState, StageError, act_of
from .registry import SystemRegistry
from .transport import InProcessTransport, TcpTransport


@dataclass
class ConversionResult:
    message_id: str
    source: str
    target: str
    raw: Optional[RawMessage]
    source_act: str
    target_act: str
    source_abox: ABox
    target_abox: ABox
    stages: list[str] = field(default_factory=list)
    report: Optional[ConversionReport] = None
    refused: bool = False

    @property
    def provenance(self) -> dict:
        return {"message_id": self.message_id, "from": self.source, "to": self.target, "stages": list(self.stages)}


class Mediator:
    """One manager per system, a directory service and a shared transport."""

    def __init__(self, registry: SystemRegistry, transport=None, join: Iterable[str] | None = None,
                 log=None):
        self.registry = registry
        self.transport = transport or InProcessTransport()
        self.directory = Directory()
        self.transcript: list[str] = []
        self._external_log = log
        self.managers: dict[str, CommOntManager] = {}
        for sid in sorted(registry.systems):
            mgr = CommOntManager(registry.system(sid), registry, self.log)
            mgr.address = self.transport.listen(mgr.config.address)
            self.managers[sid] = mgr
        for sid in (sorted(registry.systems) if join is None else list(join)):
            self.manager(sid).join(self.directory)

    def log(self, line: str) -> None:
        self.transcript.append(line)
        if self._external_log is not None:
            self._external_log(line)

    def manager(self, system_id: str) -> CommOntManager:
        self.registry.system(system_id)
        return self.managers[system_id]

    def close(self) -> None:
        self.transport.close()

    def __enter__(self) -> "Mediator":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- conversion ------------------------------------------------------------

    def convert(self, raw: RawMessage, source: str, target: str, deliver: bool = False,
                check_gamma: Optional[Iterable[Observation]] = None, refuse: bool = True) -> ConversionResult:
        src, dst = self.manager(source), self.manager(target)
        out = src.prepare(raw, target)
        report = None
        if check_gamma is not None:
            report = self._check(out.message_id, out.source_act, out.saturated, source, target, check_gamma)
            self.log(f"[{out.message_id}] check {'satisfactory' if report.satisfactory else 'unsatisfactory'}")
            if refuse and not report.satisfactory:
                self.log(f"[{out.message_id}] refused dispatch")
                target_abox = saturate(dst.config.ontology, out.saturated)
                return ConversionResult(out.message_id, source, target, None, out.source_act, report.target_act,
                                        out.saturated, target_abox, out.stages, report, refused=True)
        address = src.dispatch(out, self.directory, self.transport)
        frame = self.transport.receive(address, timeout=5.0)
        if frame is None:
            raise StageError(ManagerState.DISPATCHING, f"frame never arrived at {address}", out.message_id, source)
        emitted = dst.receive(frame, deliver=deliver)
        return ConversionResult(out.message_id, source, target, emitted.raw, out.source_act, emitted.target_act,
                                out.saturated, emitted.saturated, out.stages + emitted.stages, report)

    def convert_and_check(self, raw: RawMessage, source: str, target: str,
                          gamma: Iterable[Observation] = (), refuse: bool = True,
                          deliver: bool = False) -> tuple[Optional[RawMessage], ConversionReport]:
        result = self.convert(raw, source, target, deliver=deliver, check_gamma=frozenset(gamma), refuse=refuse)
        assert result.report is not None
        return result.raw, result.report

    def _check(self, message_id: str, source_act: str, source_abox: ABox, source: str, target: str,
               gamma: Iterable[Observation]) -> ConversionReport:
        s_cfg, t_cfg = self.registry.system(source), self.registry.system(target)
        target_abox = saturate(t_cfg.ontology, source_abox)
        root = find_root(target_abox, t_cfg.profile())
        target_act = act_of(target_abox, root, t_cfg)
        case = ConversionCase(
            Side(source_act, message_id, source_abox, s_cfg.sigma, s_cfg.psi, s_cfg.ontology, source),
            Side(target_act, message_id, target_abox, t_cfg.sigma, t_cfg.psi, t_cfg.ontology, target),
            frozenset(gamma))
        return check(case, self.registry.aliases)


def check_conversion(registry: SystemRegistry, raw: RawMessage, source: str, target: str,
                     gamma: Iterable[Observation] = ()) -> ConversionResult:
    """Convert without dispatch side effects on agents and always return the report."""
    with Mediator(registry) as med:
        return med.convert(raw, source, target, check_gamma=frozenset(gamma), refuse=False)


def convert(raw: RawMessage, source: str, target: str, registry: SystemRegistry | None = None) -> RawMessage:
    with Mediator(registry or SystemRegistry.load()) as med:
        result = med.convert(raw, source, target)
        assert result.raw is not None
        return result.raw


def convert_and_check(raw: RawMessage, source: str, target: str, gamma: Iterable[Observation] = (),
                      registry: SystemRegistry | None = None,
                      refuse: bool = True) -> tuple[Optional[RawMessage], ConversionReport]:
    with Mediator(registry or SystemRegistry.load()) as med:
        return med.convert_and_check(raw, source, target, gamma, refuse)


# -- harness -------------------------------------------------------------------

@dataclass
class HarnessResult:
    status: int
    transcript: list[str]
    deliveries: dict[str, list[RawMessage]]
    results: list[Union[ConversionResult, StageError, str]]

    def transcript_text(self) -> str:
        return "".join(line + "\n" for line in self.transcript)


def _message_text(item: dict, base: Path) -> str:
    if "text" in item:
        return str(item["text"])
    if "file" in item:
        return (base / item["file"]).read_text(encoding="utf-8")
    raise ValueError("scenario message needs 'file' or 'text'")


def run_harness(config: Union[str, Path, SystemRegistry, None], scenario: Union[str, Path, dict],
                transport: str | None = None, transcript_path: Union[str, Path, None] = None) -> HarnessResult:
    registry = config if isinstance(config, SystemRegistry) else SystemRegistry.load(config)
    if isinstance(scenario, dict):
        spec, base = scenario, registry.root
    else:
        scenario = Path(scenario)
        spec, base = yaml.safe_load(scenario.read_text(encoding="utf-8")) or {}, scenario.parent
    kind = transport or spec.get("transport", "inproc")
    if kind not in ("inproc", "tcp"):
        raise ValueError(f"unknown transport {kind!r}")
    wire = TcpTransport() if kind == "tcp" else InProcessTransport()
    status = 0
    results: list = []
    with Mediator(registry, wire, join=spec.get("join")) as med:
        for n, item in enumerate(spec.get("messages") or [], 1):
            source = str(item["from"])
            try:
                cfg = registry.system(source)
                syntax = Syntax.parse(item.get("syntax") or cfg.default_syntax)
                raw = RawMessage(syntax, _message_text(item, base))
                target = item.get("to")
                if target is None:
                    target = registry.system_of_agent(parse(raw).envelope.receiver) or source
                target = str(target)
                if target == source:
                    med.manager(source).deliver_local(raw)
                    results.append("loopback")
                    continue
                gamma = None
                if item.get("check"):
                    gamma = frozenset(parse_observation(g) for g in item.get("gamma") or [])
                result = med.convert(raw, source, target, deliver=True, check_gamma=gamma,
                                     refuse=bool(item.get("refuse", True)))
                results.append(result)
                if result.refused:
                    status = status or 2
            except StageError as exc:
                results.append(exc)
                status = 1
            except Exception as exc:  # a broken scenario entry must not stop the others
                med.log(f"[message {n}] error {type(exc).__name__}: {exc}")
                results.append(f"{type(exc).__name__}: {exc}")
                status = 1
        deliveries = {f"{sid}/{agent}": list(inbox)
                      for sid, mgr in sorted(med.managers.items()) for agent, inbox in sorted(mgr.inboxes.items())}
        transcript = list(med.transcript)
    result = HarnessResult(status, transcript, deliveries, results)
    if transcript_path is not None:
        Path(transcript_path).write_text(result.transcript_text(), encoding="utf-8")
    return result
