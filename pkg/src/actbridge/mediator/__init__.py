"""Per-system managers, directory service, transports and the scenario harness."""

from .directory import Directory, DirectoryMiss
from .harness import ConversionResult, HarnessResult, Mediator, run_harness
from .manager import CommOntManager, ManagerState, StageError
from .registry import RegistryError, SystemConfig, SystemRegistry, UnknownSystem
from .transport import Frame, FrameError, InProcessTransport, TcpTransport

__all__ = [
    "CommOntManager", "ConversionResult", "Directory", "DirectoryMiss", "Frame", "FrameError", "HarnessResult",
    "InProcessTransport", "ManagerState", "Mediator", "RegistryError", "StageError", "SystemConfig",
    "SystemRegistry", "TcpTransport", "UnknownSystem", "run_harness",
]
