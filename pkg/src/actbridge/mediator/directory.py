"""Directory of managers: which address serves which system."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable


class DirectoryMiss(LookupError):
    def __init__(self, system: str):
        self.system = system
        super().__init__(f"no manager registered for system {system!r}")


class DuplicateSystem(ValueError):
    pass


@dataclass(frozen=True)
class DirectoryEntry:
    system_id: str
    address: str


class Directory:
    """Registration is serialized; each join is announced to earlier members."""

    def __init__(self) -> None:
        self._entries: dict[str, DirectoryEntry] = {}
        self._listeners: dict[str, Callable[[DirectoryEntry], None]] = {}
        self._lock = threading.Lock()

    def join(self, system_id: str, address: str, on_join: Callable[[DirectoryEntry], None] | None = None) -> list[DirectoryEntry]:
        """Register a manager; returns the entries it should already know about."""
        entry = DirectoryEntry(system_id, address)
        with self._lock:
            if system_id in self._entries:
                raise DuplicateSystem(f"system {system_id!r} already has a manager")
            existing = sorted(self._entries.values(), key=lambda e: e.system_id)
            listeners = [self._listeners[e.system_id] for e in existing if e.system_id in self._listeners]
            self._entries[system_id] = entry
            if on_join is not None:
                self._listeners[system_id] = on_join
        for notify in listeners:
            notify(entry)
        return existing

    def lookup(self, system_id: str) -> DirectoryEntry:
        with self._lock:
            try:
                return self._entries[system_id]
            except KeyError:
                raise DirectoryMiss(system_id) from None

    def entries(self) -> list[DirectoryEntry]:
        with self._lock:
            return sorted(self._entries.values(), key=lambda e: e.system_id)
