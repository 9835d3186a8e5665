"""Shared fixtures: scripted git repositories with recorded ground truth."""

from __future__ import annotations

import subprocess
from pathlib import Path

import pytest

from blocktrace.gitio import Repository


class ScriptedRepo:
    """Builds a git repository commit by commit and records the shas.

    Commit timestamps increase monotonically so chronological ordering in
    histories is deterministic.
    """

    def __init__(self, root: Path):
        self.root = root
        self.shas: list[str] = []
        root.mkdir(parents=True, exist_ok=True)
        self._git("init", "-q", "-b", "main")
        self._git("config", "user.email", "dev@example.com")
        self._git("config", "user.name", "Dev One")
        self._git("config", "commit.gpgsign", "false")

    def _git(self, *args: str, env: dict | None = None):
        import os

        full_env = dict(os.environ)
        if env:
            full_env.update(env)
        subprocess.run(
            ["git", *args], cwd=self.root, check=True, capture_output=True, env=full_env
        )

    def commit(self, files: dict[str, str | None], message: str = "change") -> str:
        """Apply file writes (None deletes) and commit; returns the sha."""
        for path, content in files.items():
            target = self.root / path
            if content is None:
                self._git("rm", "-q", path)
            else:
                target.parent.mkdir(parents=True, exist_ok=True)
                target.write_text(content)
                self._git("add", path)
        tick = len(self.shas) + 1
        stamp = f"2021-01-{(tick - 1) // 24 + 1:02d}T{(tick - 1) % 24:02d}:00:00"
        self._git(
            "commit", "-q", "--allow-empty", "-m", message,
            env={"GIT_AUTHOR_DATE": stamp, "GIT_COMMITTER_DATE": stamp},
        )
        sha = subprocess.run(
            ["git", "rev-parse", "HEAD"],
            cwd=self.root, check=True, capture_output=True, text=True,
        ).stdout.strip()
        self.shas.append(sha)
        return sha

    def rename(self, old: str, new: str, message: str = "rename") -> str:
        content = (self.root / old).read_text()
        return self.commit({old: None, new: content}, message)

    def repository(self) -> Repository:
        return Repository(self.root)


@pytest.fixture
def scripted_repo(tmp_path) -> ScriptedRepo:
    return ScriptedRepo(tmp_path / "repo")


@pytest.fixture
def make_repo(tmp_path):
    counter = {"n": 0}

    def _make() -> ScriptedRepo:
        counter["n"] += 1
        return ScriptedRepo(tmp_path / f"repo{counter['n']}")

    return _make


ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def record_acceptance(name: str, passed: bool, detail: str = ""):
    ACCEPTANCE_RESULTS.append((name, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] {name}"
        if detail:
            line += f" — {detail}"
        terminalreporter.write_line(line)
