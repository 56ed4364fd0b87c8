"""HTTP service wrapping the conversion engine.

Endpoints: ``POST /convert``, ``POST /check``, ``POST /reason``, ``GET /systems``,
``GET /directory`` and ``POST /frame`` (hand a wire frame to its target manager).
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Union

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .abox import TripleSyntaxError, parse_triples
from .codec import CodecError, RawMessage, Syntax
from .commitments import UnknownActClass
from .ec import UnboundVariable, parse_observation, sorted_obs
from .mediator import Frame, FrameError, Mediator, RegistryError, StageError, SystemRegistry
from .ontology import OntologySyntaxError, UnsupportedAxiomShape, parse_ontology, realize
from .schemas import (CheckRequest, CheckResponse, ConvertRequest, ConvertResponse, DirectoryInfo, FrameRequest,
                      FrameResponse, ReasonRequest, ReasonResponse, SystemInfo)


def _raw(registry: SystemRegistry, system: str, text: str, syntax: str | None) -> RawMessage:
    cfg = registry.system(system)
    return RawMessage(Syntax.parse(syntax) if syntax else cfg.default_syntax, text)


def create_app(registry: Union[SystemRegistry, str, Path, None] = None) -> FastAPI:
    reg = registry if isinstance(registry, SystemRegistry) else SystemRegistry.load(registry)
    app = FastAPI(title="actbridge", version="0.1.0")
    app.state.registry = reg
    app.state.mediator = Mediator(reg)
    # managers process one message at a time
    lock = threading.Lock()

    @app.exception_handler(StageError)
    async def stage_error(_: Request, exc: StageError) -> JSONResponse:
        return JSONResponse(status_code=422, content={"error": exc.reason, "stage": exc.stage.value})

    @app.exception_handler(RegistryError)
    async def registry_error(_: Request, exc: RegistryError) -> JSONResponse:
        return JSONResponse(status_code=404, content={"error": str(exc)})

    for kind in (CodecError, TripleSyntaxError, OntologySyntaxError, UnsupportedAxiomShape, FrameError,
                 UnknownActClass, UnboundVariable, ValueError):
        @app.exception_handler(kind)
        async def bad_input(_: Request, exc: Exception) -> JSONResponse:
            return JSONResponse(status_code=422, content={"error": str(exc)})

    @app.post("/convert", response_model=ConvertResponse)
    def convert(req: ConvertRequest) -> ConvertResponse:
        med: Mediator = app.state.mediator
        with lock:
            result = med.convert(_raw(reg, req.source, req.message, req.syntax), req.source, req.target)
        assert result.raw is not None
        return ConvertResponse(message=result.raw.text, syntax=result.raw.syntax.value,
                               source_act=result.source_act, target_act=result.target_act,
                               provenance=result.provenance)

    @app.post("/check", response_model=CheckResponse)
    def check(req: CheckRequest) -> CheckResponse:
        med: Mediator = app.state.mediator
        gamma = frozenset(parse_observation(g) for g in req.gamma)
        with lock:
            result = med.convert(_raw(reg, req.source, req.message, req.syntax), req.source, req.target,
                                 check_gamma=gamma, refuse=False)
        rep = result.report
        assert rep is not None
        a = reg.aliases

        def rendered(obs) -> list[str]:
            return [o.render(a) for o in sorted_obs(obs)]

        return CheckResponse(satisfactory=rep.satisfactory, consistent=rep.consistent, source_act=rep.source_act,
                             target_act=rep.target_act, context=rendered(rep.context),
                             phi_source=rendered(rep.phi_source), phi_target=rendered(rep.phi_target),
                             missing=rendered(rep.missing), report=rep.to_text(),
                             trace=rep.trace_text() if req.trace else None)

    @app.post("/reason", response_model=ReasonResponse)
    def reason(req: ReasonRequest) -> ReasonResponse:
        derived = realize(parse_ontology(req.ontology), parse_triples(req.abox))
        return ReasonResponse(derived=derived.to_text(), count=len(derived))

    @app.get("/systems", response_model=list[SystemInfo])
    def systems() -> list[SystemInfo]:
        out = []
        for sid, cfg in sorted(reg.systems.items()):
            acts = sorted({r.cls for p in cfg.profiles.values() for r in p.performatives})
            out.append(SystemInfo(system_id=sid, default_syntax=cfg.default_syntax.value,
                                  syntaxes=sorted(s.value for s in cfg.profiles), agents=list(cfg.agents),
                                  act_classes=acts))
        return out

    @app.get("/directory", response_model=list[DirectoryInfo])
    def directory() -> list[DirectoryInfo]:
        med: Mediator = app.state.mediator
        return [DirectoryInfo(system_id=e.system_id, address=e.address) for e in med.directory.entries()]

    @app.post("/frame", response_model=FrameResponse)
    def frame(req: FrameRequest) -> FrameResponse:
        med: Mediator = app.state.mediator
        f = Frame.decode(req.frame)
        with lock:
            emitted = med.manager(f.target).receive(f, deliver=False)
        return FrameResponse(message=emitted.raw.text, syntax=emitted.raw.syntax.value,
                             target_act=emitted.target_act, receiver=emitted.receiver, stages=emitted.stages)

    return app
