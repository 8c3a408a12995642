from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from secweb.domain.repository import Repository, register_user  # noqa: E402
from secweb.models import run_enc_scenario  # noqa: E402

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def repo(tmp_path: Path) -> Repository:
    return Repository(tmp_path / "store").init()


@pytest.fixture
def users(repo: Repository) -> Repository:
    register_user(repo, "alice", "pw1")
    register_user(repo, "bob", "pw2")
    register_user(repo, "carol", "pw3")
    return repo


@pytest.fixture
def published(users: Repository) -> Repository:
    """alice publishes p1 = "hello", readable by alice and bob."""
    run_enc_scenario(users, "alice", "p1", b"hello", ["alice", "bob"])
    return users


ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        line = f"[{'PASS' if ok else 'FAIL'}] {name}"
        terminalreporter.write_line(line + (f" -- {detail}" if detail and not ok else ""))
