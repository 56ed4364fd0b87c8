"""Request and response models of the HTTP service."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class _Routed(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    source: str = Field(alias="from")
    target: str = Field(alias="to")
    message: str
    syntax: Optional[str] = None


class ConvertRequest(_Routed):
    pass


class ConvertResponse(BaseModel):
    message: str
    syntax: str
    source_act: str
    target_act: str
    provenance: dict


class CheckRequest(_Routed):
    gamma: list[str] = []
    trace: bool = False


class CheckResponse(BaseModel):
    satisfactory: bool
    consistent: bool
    source_act: str
    target_act: str
    context: list[str]
    phi_source: list[str]
    phi_target: list[str]
    missing: list[str]
    report: str
    trace: Optional[str] = None


class ReasonRequest(BaseModel):
    ontology: str
    abox: str


class ReasonResponse(BaseModel):
    derived: str
    count: int


class SystemInfo(BaseModel):
    system_id: str
    default_syntax: str
    syntaxes: list[str]
    agents: list[str]
    act_classes: list[str]


class DirectoryInfo(BaseModel):
    system_id: str
    address: str


class FrameRequest(BaseModel):
    frame: str


class FrameResponse(BaseModel):
    message: str
    syntax: str
    target_act: str
    receiver: str
    stages: list[str]


class ErrorResponse(BaseModel):
    error: str
    stage: Optional[str] = None
