"""System registry: one YAML file naming every participating system.

Paths are relative to the registry file.  Example::

    common: common.ont
    effects: effects.txt
    aliases: aliases.yaml
    systems:
      Aingeru:
        ontologies: [aingeru.ont]
        profiles: {assertion-block: profiles/aingeru-owl.yaml}
        default_syntax: assertion-block
        effects: [extra-effects.txt]
        agents: [VitalSignAgent]
        address: inproc://Aingeru
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Mapping, Union

import yaml

from ..codec import Syntax, TranslatorProfile, UnsupportedSyntax
from ..commitments import EffectRegistry, effect_axioms
from ..constraints import ConstraintSet, generate
from ..ontology import Ontology, load

PACKAGE_DATA = Path(__file__).resolve().parent.parent / "data"
DEFAULT_REGISTRY = PACKAGE_DATA / "registry.yaml"


class RegistryError(ValueError):
    pass


class UnknownSystem(RegistryError):
    def __init__(self, system: str):
        self.system = system
        super().__init__(f"unknown system {system!r}")


@dataclass(frozen=True)
class SystemConfig:
    system_id: str
    ontology: Ontology
    profiles: Mapping[Syntax, TranslatorProfile]
    default_syntax: Syntax
    effects: EffectRegistry
    agents: tuple[str, ...] = ()
    address: str = ""

    def profile(self, syntax: Union[Syntax, str, None] = None) -> TranslatorProfile:
        s = self.default_syntax if syntax is None else Syntax.parse(syntax)
        if s not in self.profiles:
            raise UnsupportedSyntax(s.value, f"system {self.system_id} has no translator for it")
        return self.profiles[s]

    @cached_property
    def psi(self) -> ConstraintSet:
        return generate(self.ontology, self.system_id)

    @cached_property
    def sigma(self) -> frozenset:
        return effect_axioms(self.effects)


@dataclass
class SystemRegistry:
    common: Ontology
    systems: dict[str, SystemConfig]
    aliases: dict[str, str] = field(default_factory=dict)
    root: Path = Path(".")

    def system(self, system_id: str) -> SystemConfig:
        try:
            return self.systems[system_id]
        except KeyError:
            raise UnknownSystem(system_id) from None

    def system_of_agent(self, agent: str) -> str | None:
        for sid, cfg in sorted(self.systems.items()):
            if agent in cfg.agents:
                return sid
        return None

    @classmethod
    def load(cls, path: Union[str, Path, None] = None) -> "SystemRegistry":
        path = Path(path) if path is not None else DEFAULT_REGISTRY
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except OSError as exc:
            raise RegistryError(f"cannot read registry {path}: {exc}") from exc
        return cls.from_mapping(data, path.parent)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any], root: Path) -> "SystemRegistry":
        def resolve(p: str) -> Path:
            full = root / p
            if not full.is_file():
                raise RegistryError(f"missing file {full}")
            return full

        if "common" not in data:
            raise RegistryError("registry needs a 'common' ontology shared by every system")
        common = load(resolve(data["common"]))
        shared_effects = EffectRegistry()
        if data.get("effects"):
            shared_effects = EffectRegistry.parse(resolve(data["effects"]).read_text(encoding="utf-8"))
        aliases = {}
        if data.get("aliases"):
            aliases = {str(k): str(v) for k, v in
                       (yaml.safe_load(resolve(data["aliases"]).read_text(encoding="utf-8")) or {}).items()}
        systems: dict[str, SystemConfig] = {}
        for sid, spec in (data.get("systems") or {}).items():
            sid = str(spec.get("id", sid))
            onto = common
            for p in spec.get("ontologies") or []:
                onto = onto | load(resolve(p))
            profiles = {}
            for syntax, p in (spec.get("profiles") or {}).items():
                prof = TranslatorProfile.load(resolve(p))
                if prof.syntax is not Syntax.parse(syntax):
                    raise RegistryError(f"{sid}: profile {p} is for {prof.syntax.value}, declared as {syntax}")
                profiles[prof.syntax] = prof
            if not profiles:
                raise RegistryError(f"{sid}: no translator profiles")
            default = Syntax.parse(spec.get("default_syntax") or next(iter(profiles)).value)
            if default not in profiles:
                raise RegistryError(f"{sid}: no translator for default syntax {default.value}")
            effects = shared_effects
            for p in spec.get("effects") or []:
                effects = effects.merged(EffectRegistry.parse(resolve(p).read_text(encoding="utf-8")))
            systems[sid] = SystemConfig(sid, onto, profiles, default, effects,
                                        tuple(str(a) for a in spec.get("agents") or ()),
                                        str(spec.get("address") or f"inproc://{sid}"))
        if not systems:
            raise RegistryError("registry declares no systems")
        return cls(common, systems, aliases, root)
