"""REST service: tracking, element-type probing, and the validation workflow.

Sessions live in memory and checkpoint to JSON on every decision. The graph
payload of POST /api/track is byte-identical to the CLI's stdout (one
serializer); the session id travels in the X-Blocktrace-Session header.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel

from ..errors import BlocktraceError, CodeElementNotFound, GitError, ParseError, UnknownCommit
from ..evalkit import OracleChange, OracleEntry
from ..gitio import Repository, clone_if_absent
from ..srcmodel import TRACKABLE_KINDS, build_partial_model, locate_block, parse_file
from ..stmtmap import map_bodies
from ..tracker import (
    ChangeHistoryGraph,
    GraphEdge,
    TrackingSession,
    classify_changes,
    graph_to_wire,
    serialize_graph,
    track,
)

_SELECTION_KEYWORDS = {
    "if": "if",
    "for": "for",
    "while": "while",
    "do": "do-while",
    "try": "try",
    "catch": "catch",
    "finally": "finally",
    "switch": "switch",
    "synchronized": "synchronized",
}


class TrackRequest(BaseModel):
    repoPath: str | None = None
    cloneUrl: str | None = None
    commit: str = "HEAD"
    filePath: str
    blockType: str
    line: int


class Correction(BaseModel):
    filePath: str
    blockType: str
    line: int


class ValidationDecision(BaseModel):
    commitId: str
    verdict: str  # confirm | reject
    correction: Correction | None = None


@dataclass
class Session:
    id: str
    repo_key: str
    request: dict
    graph: ChangeHistoryGraph
    decisions: dict[str, dict] = field(default_factory=dict)
    status: str = "open"  # open | unresolved | complete

    def pending_commits(self) -> set[str]:
        return {n.commit.id for n in self.graph.nodes.values()} - set(self.decisions)


def create_app(workspace: Path, ui_dir: Path | None = None) -> FastAPI:
    workspace = Path(workspace)
    (workspace / "sessions").mkdir(parents=True, exist_ok=True)
    app = FastAPI(title="blocktrace")
    repos: dict[str, Repository] = {}
    sessions: dict[str, Session] = {}

    def _repo(repo_path: str | None, clone_url: str | None = None) -> Repository:
        key = repo_path or clone_url
        if not key:
            raise HTTPException(404, "no repository given")
        if key in repos:
            return repos[key]
        try:
            if repo_path:
                repo = Repository(repo_path)
            else:
                slug = clone_url.rstrip("/").rsplit("/", 1)[-1].removesuffix(".git")
                repo = clone_if_absent(clone_url, workspace / "repos" / slug)
        except GitError as exc:
            raise HTTPException(404, f"repository unavailable: {exc}") from exc
        repos[key] = repo
        return repo

    def _checkpoint(session: Session):
        payload = {
            "sessionId": session.id,
            "request": session.request,
            "status": session.status,
            "decisions": session.decisions,
            "graph": graph_to_wire(session.graph),
        }
        (workspace / "sessions" / f"{session.id}.json").write_text(
            json.dumps(payload, indent=2, sort_keys=True)
        )

    @app.get("/api/element-type")
    def element_type(repo: str, commit: str, filePath: str, line: int, selection: str = ""):
        repository = _repo(repo)
        try:
            sha = repository.resolve(commit)
        except UnknownCommit as exc:
            raise HTTPException(404, f"unknown commit: {commit}") from exc
        text = repository.read_file(sha, filePath)
        if text is None:
            raise HTTPException(404, f"{filePath} not found at {commit}")
        try:
            types = parse_file(text, filePath)
        except ParseError as exc:
            raise HTTPException(422, f"unparseable file: {exc}") from exc
        wanted = _SELECTION_KEYWORDS.get(selection.strip()) if selection.strip() else None
        if selection.strip() and wanted is None:
            return {"elementType": "invalid"}
        for top in types:
            for t in top.all_types():
                for m in t.methods:
                    for node in m.all_nodes():
                        if node.start_line != line or node.kind not in TRACKABLE_KINDS:
                            continue
                        if wanted is None or node.kind == wanted:
                            return {"elementType": node.kind}
        return {"elementType": "invalid"}

    @app.get("/api/file")
    def file_content(repo: str, commit: str, path: str):
        repository = _repo(repo)
        try:
            sha = repository.resolve(commit)
        except UnknownCommit as exc:
            raise HTTPException(404, f"unknown commit: {commit}") from exc
        text = repository.read_file(sha, path)
        if text is None:
            raise HTTPException(404, f"{path} not found at {commit}")
        return {"repo": repo, "commit": sha, "path": path, "content": text}

    @app.post("/api/track")
    def http_track(request: TrackRequest):
        if request.blockType not in TRACKABLE_KINDS:
            raise HTTPException(422, f"unsupported block type: {request.blockType}")
        repository = _repo(request.repoPath, request.cloneUrl)
        try:
            graph = track(repository, request.filePath, request.blockType, request.line, request.commit)
        except CodeElementNotFound as exc:
            raise HTTPException(422, str(exc)) from exc
        except UnknownCommit as exc:
            raise HTTPException(404, f"unknown commit: {exc}") from exc
        except ParseError as exc:
            raise HTTPException(422, str(exc)) from exc
        except BlocktraceError as exc:
            raise HTTPException(404, str(exc)) from exc
        session = Session(
            id=uuid.uuid4().hex[:12],
            repo_key=request.repoPath or request.cloneUrl or "",
            request=request.model_dump(),
            graph=graph,
        )
        sessions[session.id] = session
        _checkpoint(session)
        return Response(
            content=serialize_graph(graph),
            media_type="application/json",
            headers={"X-Blocktrace-Session": session.id},
        )

    def _session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(404, f"unknown session: {session_id}")
        return session

    @app.get("/api/session/{session_id}")
    def session_state(session_id: str):
        session = _session(session_id)
        return {
            "sessionId": session.id,
            "request": session.request,
            "status": session.status,
            "decisions": session.decisions,
            "graph": graph_to_wire(session.graph),
        }

    @app.get("/api/session/{session_id}/oracle")
    def session_oracle(session_id: str):
        session = _session(session_id)
        entry = _oracle_from_session(session)
        return entry.to_json()

    @app.post("/api/session/{session_id}/decision")
    def decide(session_id: str, decision: ValidationDecision):
        session = _session(session_id)
        commits = {n.commit.id for n in session.graph.nodes.values()}
        if decision.commitId not in commits:
            raise HTTPException(409, f"commit {decision.commitId} is not part of the session graph")
        if decision.verdict == "confirm":
            session.decisions[decision.commitId] = {"verdict": "confirm"}
            if not session.pending_commits():
                session.status = "complete"
            _checkpoint(session)
            return {"status": "recorded"}
        if decision.verdict != "reject":
            raise HTTPException(422, f"unknown verdict: {decision.verdict}")
        if decision.correction is None:
            session.decisions[decision.commitId] = {"verdict": "reject"}
            session.status = "unresolved"
            _checkpoint(session)
            return {"status": "unresolved"}
        resumed_from = _resume_with_correction(
            _repo(session.repo_key), session, decision.commitId, decision.correction
        )
        session.decisions[decision.commitId] = {
            "verdict": "reject",
            "correction": decision.correction.model_dump(),
        }
        _checkpoint(session)
        return {"status": "resumed", "resumedFrom": resumed_from}

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def _oracle_from_session(session: Session) -> OracleEntry:
    graph = session.graph
    start = graph.nodes.get(graph.start) if graph.start else None
    by_commit: dict[str, list[str]] = {}
    for edge in graph.edges:
        commit = graph.nodes[edge.to_id].commit.id
        by_commit.setdefault(commit, []).extend(c.tag for c in edge.changes)
    confirmed = [
        n
        for n in sorted(
            graph.nodes.values(), key=lambda n: (n.commit.authored_at, n.commit.id), reverse=True
        )
        if session.decisions.get(n.commit.id, {}).get("verdict") == "confirm"
    ]
    expected = []
    seen: set[str] = set()
    for node in confirmed:
        if node.commit.id in seen:
            continue
        seen.add(node.commit.id)
        expected.append(
            OracleChange(
                commit_id=node.commit.id,
                change_types=sorted(set(by_commit.get(node.commit.id, []))),
            )
        )
    has_intro = any("introduced" in c.change_types for c in expected)
    return OracleEntry(
        repository=session.repo_key,
        file=start.path if start else "",
        block_kind=start.element.block_type if start else "",
        block_key=start.element.key if start else "",
        expected=expected,
        existed_since_first_commit=not has_intro,
    )


def _resume_with_correction(
    repo: Repository, session: Session, commit_id: str, correction: Correction
) -> str:
    """Re-run tracking from the parent of the faulted commit and splice the suffix."""
    graph = session.graph
    rejected = next(
        (n for n in graph.nodes.values() if n.commit.id == commit_id),
        None,
    )
    if rejected is None:
        raise HTTPException(409, f"no node at commit {commit_id}")
    parent_ids = repo.commit(commit_id).parent_ids
    if not parent_ids:
        raise HTTPException(409, "cannot resume before the root commit")
    parent = parent_ids[0]

    # Drop the rejected suffix: everything backward-reachable from the node.
    drop_nodes: set[str] = set()
    frontier = [e.from_id for e in graph.edges if e.to_id == rejected.id and e.from_id]
    while frontier:
        node_id = frontier.pop()
        if node_id in drop_nodes:
            continue
        drop_nodes.add(node_id)
        frontier.extend(
            e.from_id for e in graph.edges if e.to_id == node_id and e.from_id is not None
        )
    kept_edges = [
        e
        for e in graph.edges
        if e.to_id not in drop_nodes
        and e.from_id not in drop_nodes
        and e.to_id != rejected.id  # in-edges of the rejected node are the wrong match
    ]
    for node_id in drop_nodes:
        graph.nodes.pop(node_id, None)
    graph.edges = kept_edges

    resumed = track(repo, correction.filePath, correction.blockType, correction.line, parent)
    for node_id, node in resumed.nodes.items():
        graph.nodes.setdefault(node_id, node)
    graph.edges.extend(resumed.edges)

    splice_changes = _classify_correction(repo, rejected, correction, parent, commit_id)
    if resumed.start is not None:
        graph.edges.append(GraphEdge(from_id=resumed.start, to_id=rejected.id, changes=splice_changes))
    return parent


def _classify_correction(repo, rejected, correction: Correction, parent: str, commit_id: str):
    try:
        model_p = build_partial_model(repo, parent, {correction.filePath})
        left_block, left_method = locate_block(
            model_p, correction.filePath, correction.blockType, correction.line
        )
        model_r = build_partial_model(repo, commit_id, {rejected.path})
        right_block, right_method = locate_block(
            model_r, rejected.path, rejected.element.block_type, rejected.start_line
        )
        mapping = map_bodies(left_method, right_method)
        return classify_changes(left_block, right_block, mapping)
    except BlocktraceError:
        from ..tracker import ChangeKind

        return [ChangeKind("body-change", "Corrected match recorded by the validator.")]
