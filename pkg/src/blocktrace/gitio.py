"""Read-only git access: file histories, blobs at commits, per-commit change listings.

Everything shells out to the system ``git`` binary (override with the
BLOCKTRACE_GIT environment variable). History traversal follows first-parent
ancestry; rename detection is delegated to git's similarity heuristic.
"""

from __future__ import annotations

import os
import subprocess
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DecodeError, GitError, UnknownCommit, UnknownPath

_FIELD_SEP = "\x1f"
_RECORD_SEP = "\x1e"


@dataclass(frozen=True)
class CommitRef:
    """One commit: identity plus the metadata the change graph needs."""

    id: str
    author: str
    authored_at: str  # ISO-8601 UTC timestamp
    message: str
    parent_ids: tuple[str, ...]

    def __post_init__(self):
        if len(self.id) != 40 or any(c not in "0123456789abcdef" for c in self.id):
            raise ValueError(f"not a 40-hex sha: {self.id!r}")


@dataclass(frozen=True)
class FileChange:
    """One file-level delta of a commit versus its first parent."""

    kind: str  # added | modified | deleted | renamed
    path_before: str | None = None
    path_after: str | None = None

    def __post_init__(self):
        if self.kind == "added" and (self.path_before is not None or self.path_after is None):
            raise ValueError("added requires path_after only")
        if self.kind == "deleted" and (self.path_after is not None or self.path_before is None):
            raise ValueError("deleted requires path_before only")
        if self.kind == "renamed" and (
            not self.path_before or not self.path_after or self.path_before == self.path_after
        ):
            raise ValueError("renamed requires two distinct paths")
        if self.kind == "modified" and self.path_before != self.path_after:
            raise ValueError("modified requires equal paths")


@dataclass(frozen=True)
class FileHistoryEntry:
    """A commit that touched the tracked file, with the file's path at that commit."""

    commit: CommitRef
    path: str  # path as of this commit (after any rename it performed)
    path_before: str  # path at the first parent (differs at rename commits)
    status: str  # A | M | D | R


class Repository:
    """Handle on a local clone; caches blobs and commit metadata."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        if not (self.path / ".git").exists() and not (self.path / "HEAD").exists():
            raise GitError(f"not a git repository: {self.path}")
        self._blob_cache: dict[tuple[str, str], str | None] = {}
        self._commit_cache: dict[str, CommitRef] = {}
        self._lock = threading.Lock()

    # -- plumbing ----------------------------------------------------------

    def _git(self, *args: str, check: bool = True) -> subprocess.CompletedProcess:
        binary = os.environ.get("BLOCKTRACE_GIT", "git")
        proc = subprocess.run(
            [binary, *args],
            cwd=self.path,
            capture_output=True,
        )
        if check and proc.returncode != 0:
            raise GitError(
                f"git {' '.join(args[:2])} failed ({proc.returncode}): "
                f"{proc.stderr.decode('utf-8', 'replace').strip()}"
            )
        return proc

    def _text(self, *args: str) -> str:
        return self._git(*args).stdout.decode("utf-8", "replace")

    # -- queries -----------------------------------------------------------

    def resolve(self, rev: str) -> str:
        """Resolve a revision (HEAD, branch, sha prefix) to a full sha."""
        proc = self._git("rev-parse", "--verify", f"{rev}^{{commit}}", check=False)
        if proc.returncode != 0:
            raise UnknownCommit(rev)
        return proc.stdout.decode().strip()

    def commit(self, sha: str) -> CommitRef:
        sha = self.resolve(sha)
        with self._lock:
            cached = self._commit_cache.get(sha)
        if cached is not None:
            return cached
        out = self._text(
            "show", "-s", f"--format=%H{_FIELD_SEP}%an{_FIELD_SEP}%aI{_FIELD_SEP}%P{_FIELD_SEP}%s", sha
        )
        ref = _parse_commit_line(out.strip())
        with self._lock:
            self._commit_cache[sha] = ref
        return ref

    def head(self) -> CommitRef:
        return self.commit("HEAD")

    def first_parent_ancestry(self, start: str) -> list[str]:
        """All commit shas reachable from start along first parents, newest first."""
        start = self.resolve(start)
        out = self._text("rev-list", "--first-parent", start)
        return out.split()

    def file_history(self, path: str, start: CommitRef | str) -> list[CommitRef]:
        """Commits (newest first) reachable from start in which `path` changed, following renames."""
        return [entry.commit for entry in self.file_history_entries(path, start)]

    def file_history_entries(self, path: str, start: CommitRef | str) -> list[FileHistoryEntry]:
        start_sha = start.id if isinstance(start, CommitRef) else self.resolve(start)
        if self.read_file(start_sha, path) is None:
            raise UnknownPath(f"{path} does not exist at {start_sha}")
        out = self._text(
            "log",
            "--first-parent",
            "--follow",
            "--name-status",
            "-M",
            f"--format={_RECORD_SEP}%H{_FIELD_SEP}%an{_FIELD_SEP}%aI{_FIELD_SEP}%P{_FIELD_SEP}%s",
            start_sha,
            "--",
            path,
        )
        entries: list[FileHistoryEntry] = []
        for record in out.split(_RECORD_SEP):
            record = record.strip("\n")
            if not record:
                continue
            lines = record.split("\n")
            ref = _parse_commit_line(lines[0])
            status_line = next((ln for ln in lines[1:] if ln.strip()), None)
            if status_line is None:
                continue  # e.g. merge commit listed without a diff entry
            parts = status_line.split("\t")
            code = parts[0]
            if code.startswith("C"):
                # --follow drifts into the source history of a copied file; the
                # copy commit is this file's creation, the rest is not its past
                entries.append(FileHistoryEntry(ref, path=parts[2], path_before=parts[2], status="A"))
                break
            if code.startswith("R"):
                entry = FileHistoryEntry(ref, path=parts[2], path_before=parts[1], status="R")
            elif code == "A":
                entry = FileHistoryEntry(ref, path=parts[1], path_before=parts[1], status="A")
            elif code == "D":
                entry = FileHistoryEntry(ref, path=parts[1], path_before=parts[1], status="D")
            else:
                entry = FileHistoryEntry(ref, path=parts[1], path_before=parts[1], status="M")
            entries.append(entry)
        return entries

    def read_file(self, commit: CommitRef | str, path: str) -> str | None:
        """Blob contents at a commit, or None if the path is absent there."""
        sha = commit.id if isinstance(commit, CommitRef) else self.resolve(commit)
        key = (sha, path)
        with self._lock:
            if key in self._blob_cache:
                return self._blob_cache[key]
        proc = self._git("show", f"{sha}:{path}", check=False)
        if proc.returncode != 0:
            stderr = proc.stderr.decode("utf-8", "replace")
            if "does not exist" in stderr or "exists on disk, but not in" in stderr or "bad file" in stderr:
                result = None
            elif "Invalid object name" in stderr or "bad revision" in stderr:
                raise UnknownCommit(sha)
            else:
                result = None
        else:
            try:
                result = proc.stdout.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise DecodeError(f"{sha}:{path} is not UTF-8") from exc
        with self._lock:
            self._blob_cache[key] = result
        return result

    def changed_files(self, commit: CommitRef | str) -> list[FileChange]:
        """Complete added/modified/deleted/renamed listing versus the first parent."""
        sha = commit.id if isinstance(commit, CommitRef) else self.resolve(commit)
        out = self._text("diff-tree", "-r", "-M", "--root", "--format=", "--name-status", sha)
        changes: list[FileChange] = []
        for line in out.splitlines():
            if not line.strip():
                continue
            parts = line.split("\t")
            code = parts[0]
            if code.startswith("R"):
                changes.append(FileChange("renamed", path_before=parts[1], path_after=parts[2]))
            elif code == "A":
                changes.append(FileChange("added", path_after=parts[1]))
            elif code == "D":
                changes.append(FileChange("deleted", path_before=parts[1]))
            else:
                changes.append(FileChange("modified", path_before=parts[1], path_after=parts[1]))
        return changes


def _parse_commit_line(line: str) -> CommitRef:
    sha, author, when, parents, message = line.split(_FIELD_SEP, 4)
    return CommitRef(
        id=sha,
        author=author,
        authored_at=when,
        message=message,
        parent_ids=tuple(parents.split()) if parents.strip() else (),
    )


def clone_if_absent(url: str, dest: str | Path) -> Repository:
    """Clone url into dest unless dest already holds a repository."""
    dest = Path(dest)
    if (dest / ".git").exists():
        return Repository(dest)
    dest.parent.mkdir(parents=True, exist_ok=True)
    binary = os.environ.get("BLOCKTRACE_GIT", "git")
    proc = subprocess.run([binary, "clone", url, str(dest)], capture_output=True)
    if proc.returncode != 0:
        raise GitError(f"clone failed: {proc.stderr.decode('utf-8', 'replace').strip()}")
    return Repository(dest)
