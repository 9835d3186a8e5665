"""Oracle files, precision/recall scorers, the git log -L baseline, and timing.

Oracle schema (original to this project, versioned): one JSON document per
tracked block with the fields of OracleEntry; `expected` is chronologically
descending and its terminal entry either carries the `introduced` tag or the
whole entry is flagged existed-since-first-commit.
"""

from __future__ import annotations

import json
import re
import subprocess
import time
from dataclasses import dataclass, field
from pathlib import Path

from .errors import GitError, MismatchedElement, RangeRestartNeeded
from .gitio import Repository
from .tracker import ChangeHistoryGraph, SessionLog, TrackerConfig, track

SCHEMA_VERSION = 1


@dataclass
class OracleChange:
    commit_id: str
    change_types: list[str]
    element_key_before: str | None = None
    element_key_after: str | None = None


@dataclass
class OracleEntry:
    repository: str
    file: str
    block_kind: str
    block_key: str
    expected: list[OracleChange] = field(default_factory=list)
    existed_since_first_commit: bool = False

    def to_json(self) -> dict:
        return {
            "schemaVersion": SCHEMA_VERSION,
            "repository": self.repository,
            "file": self.file,
            "block_kind": self.block_kind,
            "block_key": self.block_key,
            "existedSinceFirstCommit": self.existed_since_first_commit,
            "expected": [
                {
                    "commitId": c.commit_id,
                    "changeTypes": list(c.change_types),
                    "elementKeyBefore": c.element_key_before,
                    "elementKeyAfter": c.element_key_after,
                }
                for c in self.expected
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "OracleEntry":
        if data.get("schemaVersion") != SCHEMA_VERSION:
            raise ValueError(f"unsupported oracle schemaVersion: {data.get('schemaVersion')!r}")
        return cls(
            repository=data["repository"],
            file=data["file"],
            block_kind=data["block_kind"],
            block_key=data["block_key"],
            existed_since_first_commit=data.get("existedSinceFirstCommit", False),
            expected=[
                OracleChange(
                    commit_id=e["commitId"],
                    change_types=list(e["changeTypes"]),
                    element_key_before=e.get("elementKeyBefore"),
                    element_key_after=e.get("elementKeyAfter"),
                )
                for e in data.get("expected", [])
            ],
        )

    def save(self, path: str | Path):
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True))

    @classmethod
    def load(cls, path: str | Path) -> "OracleEntry":
        return cls.from_json(json.loads(Path(path).read_text()))


def oracle_from_graph(graph: ChangeHistoryGraph, repository: str = "") -> OracleEntry:
    """An oracle asserting exactly what the graph contains (tp-only by construction)."""
    start = graph.nodes[graph.start] if graph.start else None
    changes_by_commit: dict[str, list[str]] = {}
    for edge in graph.edges:
        commit = graph.nodes[edge.to_id].commit.id
        changes_by_commit.setdefault(commit, []).extend(c.tag for c in edge.changes)
    ordered_nodes = sorted(
        graph.nodes.values(), key=lambda n: (n.commit.authored_at, n.commit.id), reverse=True
    )
    expected = []
    seen = set()
    for node in ordered_nodes:
        commit = node.commit.id
        if commit in seen:
            continue
        seen.add(commit)
        expected.append(OracleChange(commit_id=commit, change_types=sorted(set(changes_by_commit.get(commit, [])))))
    has_intro = any("introduced" in c.change_types for c in expected)
    return OracleEntry(
        repository=repository,
        file=start.path if start else "",
        block_kind=start.element.block_type if start else "",
        block_key=start.element.key if start else "",
        expected=expected,
        existed_since_first_commit=not has_intro,
    )


@dataclass
class ScoreReport:
    tp: int
    fp: int
    fn: int
    level: str  # commit | change

    @property
    def precision(self) -> float:
        return 1.0 if self.tp + self.fp == 0 else self.tp / (self.tp + self.fp)

    @property
    def recall(self) -> float:
        return 1.0 if self.tp + self.fn == 0 else self.tp / (self.tp + self.fn)

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
        }


def report_from_counts(tp: int, fp: int, fn: int, level: str = "change") -> ScoreReport:
    return ScoreReport(tp=tp, fp=fp, fn=fn, level=level)


def _fork_pruned(graph: ChangeHistoryGraph) -> tuple[set[str], list]:
    """Nodes/edges with all but the largest fork branch removed (baseline-fair mode)."""
    in_edges: dict[str, list] = {}
    for e in graph.edges:
        if e.from_id is not None:
            in_edges.setdefault(e.to_id, []).append(e)
    dropped_edges = set()
    for node_id, edges in in_edges.items():
        merge_edges = [e for e in edges if any(c.tag == "block-merge" for c in e.changes)]
        if len(merge_edges) < 2:
            continue
        # keep the branch with the largest source block (line count proxy for overlap)
        keep = max(
            merge_edges,
            key=lambda e: (
                graph.nodes[e.from_id].end_line - graph.nodes[e.from_id].start_line,
                e.from_id,
            ),
        )
        dropped_edges.update(id(e) for e in merge_edges if e is not keep)
    # walk backward from start over kept edges only
    kept_edges = [e for e in graph.edges if id(e) not in dropped_edges]
    reachable = set()
    frontier = [graph.start] if graph.start else []
    backward: dict[str, list] = {}
    for e in kept_edges:
        if e.from_id is not None:
            backward.setdefault(e.to_id, []).append(e.from_id)
    while frontier:
        node_id = frontier.pop()
        if node_id in reachable or node_id is None:
            continue
        reachable.add(node_id)
        frontier.extend(backward.get(node_id, []))
    final_edges = [
        e
        for e in kept_edges
        if e.to_id in reachable and (e.from_id is None or e.from_id in reachable)
    ]
    return reachable, final_edges


def score(
    history: ChangeHistoryGraph,
    oracle: OracleEntry,
    level: str = "commit",
    baseline_fair: bool = False,
) -> ScoreReport:
    """Compare a tracked history against an oracle at commit or change level."""
    if level not in ("commit", "change"):
        raise ValueError(f"unknown level {level!r}")
    # The start node sits at the block's last change commit, so its file may
    # legitimately differ from the oracle's (queried) path after silent moves;
    # the block kind always agrees because migrations are change-bearing.
    start = history.nodes.get(history.start) if history.start else None
    if start is not None and oracle.block_kind and start.element.block_type != oracle.block_kind:
        raise MismatchedElement(
            f"history tracks a {start.element.block_type}, oracle a {oracle.block_kind}"
        )
    if (
        start is not None
        and oracle.block_key
        and start.element.container  # wire-reconstructed graphs have opaque identifiers
        and start.element.key != oracle.block_key
    ):
        raise MismatchedElement("history and oracle start from different block keys")

    if baseline_fair:
        node_ids, edges = _fork_pruned(history)
        nodes = [history.nodes[i] for i in node_ids]
    else:
        nodes = list(history.nodes.values())
        edges = history.edges

    if level == "commit":
        got = {n.commit.id for n in nodes}
        want = {c.commit_id for c in oracle.expected}
    else:
        node_commit = {n.id: n.commit.id for n in history.nodes.values()}
        got = {
            (node_commit[e.to_id], c.tag)
            for e in edges
            for c in e.changes
        }
        want = {
            (c.commit_id, tag)
            for c in oracle.expected
            for tag in c.change_types
        }
    tp = len(got & want)
    fp = len(got - want)
    fn = len(want - got)
    return ScoreReport(tp=tp, fp=fp, fn=fn, level=level)


# -- git log -L baseline ------------------------------------------------------------


def _run_git(repo: Repository, *args: str) -> str:
    proc = subprocess.run(["git", *args], cwd=repo.path, capture_output=True)
    if proc.returncode != 0:
        raise GitError(f"git {' '.join(args[:3])} failed: {proc.stderr.decode('utf-8', 'replace').strip()}")
    return proc.stdout.decode("utf-8", "replace")


def _log_l_commits(repo: Repository, file: str, start: int, end: int, commit: str) -> list[str]:
    out = _run_git(
        repo, "log", "--first-parent", "--format=%x1e%H", f"-L{start},{end}:{file}", commit
    )
    commits = []
    for record in out.split("\x1e"):
        record = record.strip()
        if record:
            commits.append(record.split("\n", 1)[0].strip())
    return commits


def _is_reformatting_commit(repo: Repository, commit: str, file: str) -> bool:
    """Over 95% of the file's lines change textually but not when whitespace is ignored."""
    ref = repo.commit(commit)
    if not ref.parent_ids:
        return False
    parent = ref.parent_ids[0]
    normal = _run_git(repo, "diff", "--numstat", parent, commit, "--", file)
    loose = _run_git(
        repo, "diff", "--numstat", "--ignore-all-space", "--ignore-blank-lines", parent, commit, "--", file
    )

    def _touched(numstat: str) -> int:
        total = 0
        for line in numstat.splitlines():
            parts = line.split("\t")
            if len(parts) >= 2 and parts[0].isdigit() and parts[1].isdigit():
                total += max(int(parts[0]), int(parts[1]))
        return total

    blob = repo.read_file(commit, file)
    if blob is None:
        return False
    file_lines = max(blob.count("\n"), 1)
    reformatted = _touched(normal) - _touched(loose)
    return reformatted / file_lines > 0.95


def gitlog_baseline(
    repo: Repository,
    file: str,
    start_line: int,
    end_line: int,
    start_commit: str,
    *,
    introduced_at: str | None = None,
    corrections: dict[str, tuple[int, int]] | None = None,
) -> list[str]:
    """Commits reported by `git log -L start,end:file`, with the paper's fixes.

    Commits older than the oracle's introduction commit are trimmed. At a
    whole-file reformatting commit the trace restarts from the caller-supplied
    corrected range (RangeRestartNeeded is raised when none is given) and the
    results are spliced.
    """
    corrections = corrections or {}
    commits: list[str] = []
    cursor_commit = repo.resolve(start_commit)
    cursor_range = (start_line, end_line)
    cursor_file = file
    visited: set[str] = set()
    while True:
        reported = _log_l_commits(repo, cursor_file, cursor_range[0], cursor_range[1], cursor_commit)
        restart = None
        for sha in reported:
            if sha in visited:
                continue
            visited.add(sha)
            commits.append(sha)
            if _is_reformatting_commit(repo, sha, cursor_file):
                if sha not in corrections:
                    raise RangeRestartNeeded(sha)
                restart = sha
                break
        if restart is None:
            break
        cursor_commit = restart
        cursor_range = corrections[restart]

    if introduced_at is not None:
        intro = repo.resolve(introduced_at)
        order = repo.first_parent_ancestry(repo.resolve(start_commit))
        if intro in order:
            cutoff = order.index(intro)
            commits = [c for c in commits if c in order and order.index(c) <= cutoff]
    return commits


# -- timing harness -------------------------------------------------------------------


def time_session(
    repo: Repository,
    file_path: str,
    block_kind: str,
    start_line: int,
    start_commit: str = "HEAD",
    config: TrackerConfig | None = None,
) -> dict:
    """Wall-clock profile of one tracking session, split by resolution category."""
    log = SessionLog()
    t0 = time.perf_counter()
    graph = track(repo, file_path, block_kind, start_line, start_commit, config=config, session_log=log)
    total_s = time.perf_counter() - t0
    categories = {"no-change": {"commits": 0, "ms": 0.0}, "change": {"commits": 0, "ms": 0.0}, "move": {"commits": 0, "ms": 0.0}}
    for rec in log.records:
        categories[rec.category]["commits"] += 1
        categories[rec.category]["ms"] += rec.elapsed_s * 1000.0
    step_ms = sum(c["ms"] for c in categories.values())
    for cat in categories.values():
        cat["fraction_time"] = cat["ms"] / step_ms if step_ms > 0 else 0.0
    return {
        "total_ms": total_s * 1000.0,
        "commits_processed": len(log.records),
        "per_commit": [
            {
                "commit": rec.commit,
                "step": rec.step,
                "category": rec.category,
                "ms": rec.elapsed_s * 1000.0,
                "changed": rec.changed,
            }
            for rec in log.records
        ],
        "categories": categories,
        "history_commits": sorted(graph.commits()),
    }
