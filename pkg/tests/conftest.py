from __future__ import annotations

from pathlib import Path

import pytest

from actbridge.codec import RawMessage, Syntax
from actbridge.mediator import SystemRegistry
from actbridge.mediator.registry import PACKAGE_DATA

TESTS = Path(__file__).parent
GOLDEN = TESTS / "golden"
DATA = PACKAGE_DATA
SYNTHETIC = DATA / "synthetic"
NEGATIVE = DATA / "negative"


def golden(name: str) -> str:
    return (GOLDEN / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def registry() -> SystemRegistry:
    return SystemRegistry.load()


@pytest.fixture(scope="session")
def synthetic() -> SystemRegistry:
    return SystemRegistry.load(SYNTHETIC / "registry.yaml")


@pytest.fixture(scope="session")
def negative() -> SystemRegistry:
    return SystemRegistry.load(NEGATIVE / "registry.yaml")


@pytest.fixture
def message01() -> RawMessage:
    return RawMessage(Syntax.FIPA_ACL, (DATA / "message01.acl").read_text(encoding="utf-8"))


@pytest.fixture
def m1() -> RawMessage:
    return RawMessage(Syntax.KQML, (SYNTHETIC / "m1.kqml").read_text(encoding="utf-8"))


# acceptance criteria report one line each at the end of the run
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
