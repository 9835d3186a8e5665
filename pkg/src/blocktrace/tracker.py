"""The 5-step block tracking state machine and the change history graph.

Walks the tracked file's commit history newest to oldest; for each (parent,
child) pair exactly one step resolves the match: unchanged container (2),
changed body (3), changed signature or intra-file method refactoring (4),
cross-file relocation (5). Only change-bearing commits materialize graph
nodes; merges fork the walk into one cursor per original block.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

from .errors import CodeElementNotFound, ParseError
from .gitio import CommitRef, FileHistoryEntry, Repository
from .javaparse import MethodDeclarationInfo, StatementNode, TypeDeclarationInfo
from .refdetect import (
    DEFAULT_CONFIG,
    RefDetectConfig,
    augment_models,
    detect_body_refactorings,
    detect_class_level,
    detect_intra_file,
    match_methods,
    MethodPairing,
)
from .srcmodel import (
    BlockIdentifier,
    SourceModel,
    block_identifier,
    build_partial_model,
    locate_block,
    parent_signature,
)
from .stmtmap import MappingSet, StatementMapping, map_bodies

INTRODUCED = "introduced"
BODY_CHANGE = "body-change"
EXPRESSION_CHANGE = "expression-change"
BLOCK_SPLIT = "block-split"
BLOCK_MERGE = "block-merge"
REPLACE_LOOP_WITH_PIPELINE = "replace-loop-with-pipeline"
REPLACE_PIPELINE_WITH_LOOP = "replace-pipeline-with-loop"


@dataclass(frozen=True)
class ChangeKind:
    tag: str
    description: str


@dataclass(eq=False)
class HistoryNode:
    element: BlockIdentifier
    commit: CommitRef
    path: str
    start_line: int
    end_line: int
    wire_id: str | None = None  # set when reconstructed from serialized form

    @property
    def id(self) -> str:
        return self.wire_id or self.element.node_id()


@dataclass(eq=False)
class GraphEdge:
    from_id: str | None  # None marks the terminal `introduced` edge
    to_id: str
    changes: list[ChangeKind]


@dataclass(eq=False)
class ChangeHistoryGraph:
    start: str | None = None
    nodes: dict[str, HistoryNode] = field(default_factory=dict)
    edges: list[GraphEdge] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    def add_node(self, node: HistoryNode) -> str:
        node_id = node.id
        if node_id not in self.nodes:
            self.nodes[node_id] = node
        if self.start is None:
            self.start = node_id
        return node_id

    def commits(self) -> set[str]:
        return {n.commit.id for n in self.nodes.values()}

    def change_pairs(self) -> set[tuple[str, str]]:
        out = set()
        for edge in self.edges:
            commit = self.nodes[edge.to_id].commit.id
            for change in edge.changes:
                out.add((commit, change.tag))
        return out


@dataclass
class CommitRecord:
    """One processed (parent, child) pair, for the timing harness."""

    commit: str
    step: int  # 2..5
    category: str  # no-change | change | move
    elapsed_s: float
    changed: bool


@dataclass
class SessionLog:
    records: list[CommitRecord] = field(default_factory=list)
    total_s: float = 0.0


@dataclass
class TrackerConfig:
    refdetect: RefDetectConfig = field(default_factory=RefDetectConfig)
    emit_evolution_hooks: bool = False


# -- cursor bookkeeping ----------------------------------------------------------


@dataclass(frozen=True)
class BlockKey:
    """Everything needed to relocate a block in a fresh parse of its file."""

    path: str
    type_chain: tuple[str, ...]
    method_signature: tuple
    block_kind: str
    parent_sig: str
    content_hash: str  # body hash (text itself for leaves)
    start_line: int


@dataclass
class _Cursor:
    key: BlockKey
    at: str  # commit sha where the block is currently known
    pending: tuple[str, list[ChangeKind]] | None  # (newer node id, changes at it)


@dataclass
class _Resolution:
    step: int
    outcome: str  # pass | changed | introduced | merge
    changes: list[ChangeKind] = field(default_factory=list)
    left: BlockKey | None = None
    parents: list[tuple[BlockKey, list[ChangeKind]]] = field(default_factory=list)


def _key_of(block: StatementNode, method: MethodDeclarationInfo, path: str) -> BlockKey:
    return BlockKey(
        path=path,
        type_chain=method.container.qualified_chain if method.container else (),
        method_signature=method.signature,
        block_kind=block.kind,
        parent_sig=parent_signature(block),
        content_hash=block.body_hash,
        start_line=block.start_line,
    )


def _relocate(model: SourceModel, key: BlockKey) -> tuple[StatementNode, MethodDeclarationInfo] | None:
    """Find the cursor's block in a fresh parse; falls back progressively."""
    methods = model.methods_in(key.path)
    scoped = [
        m
        for m in methods
        if m.signature == key.method_signature
        and (m.container.qualified_chain if m.container else ()) == key.type_chain
    ]
    for pool in (scoped, methods):
        for m in pool:
            for n in m.all_nodes():
                if n.kind == key.block_kind and parent_signature(n) == key.parent_sig and n.body_hash == key.content_hash:
                    return n, m
        for m in pool:
            for n in m.all_nodes():
                if n.kind == key.block_kind and n.body_hash == key.content_hash:
                    return n, m
    return None


# -- change classification ---------------------------------------------------------


def classify_changes(
    left: StatementNode,
    right: StatementNode,
    mapping: MappingSet | None = None,
    transformation=None,
) -> list[ChangeKind]:
    """Semantic delta between two matched versions of a block."""
    changes: list[ChangeKind] = []
    if transformation is None and mapping is not None:
        mp = mapping.mapping_for_right(right)
        if mp is not None and mp.left is left:
            transformation = mp.transformation
    if transformation is not None:
        if transformation.kind == "for↔forEach-pipeline":
            if transformation.direction == "forward":
                changes.append(ChangeKind(REPLACE_LOOP_WITH_PIPELINE, "The loop was replaced with a pipeline."))
            else:
                changes.append(ChangeKind(REPLACE_PIPELINE_WITH_LOOP, "The pipeline was replaced with a loop."))
        else:
            changes.append(
                ChangeKind(
                    f"block-type-migration({transformation.kind})",
                    f"The block migrated from {left.kind} to {right.kind}.",
                )
            )
            # restructuring is inherent to a migration; only content deltas count
            if _content_leaves(left) != _content_leaves(right):
                changes.append(ChangeKind(BODY_CHANGE, f"The body of the {right.kind} block changed."))
    else:
        if left.expressions != right.expressions:
            changes.append(ChangeKind(EXPRESSION_CHANGE, f"The expression of the {right.kind} block changed."))
        if left.body_text != right.body_text:
            changes.append(ChangeKind(BODY_CHANGE, f"The body of the {right.kind} block changed."))
    if left.kind == "try" and right.kind == "try":
        changes.extend(_try_clause_changes(left, right, mapping))
    if not changes and left.text != right.text:
        changes.append(ChangeKind(BODY_CHANGE, f"The {right.kind} block changed."))
    return changes


def _content_leaves(node: StatementNode) -> dict[str, int]:
    """Body-leaf text multiset minus control-structure artifacts (labels, bare jumps).

    Catch/finally clauses are excluded (they have their own change kinds).
    """
    counts: dict[str, int] = {}
    for child in node.body_children:
        for n in child.walk():
            if n.kind != "leaf":
                continue
            text = n.text
            if text.startswith("case ") or text.startswith("default ") or text in ("break ;", "continue ;"):
                continue
            counts[text] = counts.get(text, 0) + 1
    return counts


def _try_clause_changes(left: StatementNode, right: StatementNode, mapping: MappingSet | None) -> list[ChangeKind]:
    changes: list[ChangeKind] = []
    lcatch = [c for c in left.children if c.kind == "catch"]
    rcatch = [c for c in right.children if c.kind == "catch"]
    paired: list[tuple[StatementNode, StatementNode]] = []
    used_l: set[int] = set()
    used_r: set[int] = set()
    if mapping is not None:
        for mp in mapping.mappings:
            if mp.left in lcatch and mp.right in rcatch:
                paired.append((mp.left, mp.right))
                used_l.add(id(mp.left))
                used_r.add(id(mp.right))
        for group in mapping.multi:
            if group.right in rcatch:
                used_r.add(id(group.right))
                used_l.update(id(l) for l in group.lefts if l in lcatch)
    # position/parameter fallback for catches the mapping did not cover
    for lc in lcatch:
        if id(lc) in used_l:
            continue
        twin = next((rc for rc in rcatch if id(rc) not in used_r and rc.expressions == lc.expressions), None)
        if twin is not None:
            paired.append((lc, twin))
            used_l.add(id(lc))
            used_r.add(id(twin))
    for lc, rc in paired:
        if lc.text != rc.text:
            changes.append(ChangeKind("catch-block-change", "A catch clause of the try block changed."))
    for rc in rcatch:
        if id(rc) not in used_r:
            changes.append(ChangeKind("catch-block-added", "A catch clause was added to the try block."))
    for lc in lcatch:
        if id(lc) not in used_l:
            changes.append(ChangeKind("catch-block-removed", "A catch clause was removed from the try block."))
    lfin = next((c for c in left.children if c.kind == "finally"), None)
    rfin = next((c for c in right.children if c.kind == "finally"), None)
    if lfin is not None and rfin is not None:
        if lfin.text != rfin.text:
            changes.append(ChangeKind("finally-block-change", "The finally block of the try changed."))
    elif rfin is not None:
        changes.append(ChangeKind("finally-block-added", "A finally block was added to the try."))
    elif lfin is not None:
        changes.append(ChangeKind("finally-block-removed", "The finally block was removed from the try."))
    return changes


# -- the tracking session ------------------------------------------------------------


class TrackingSession:
    def __init__(self, repo: Repository, config: TrackerConfig | None = None):
        self.repo = repo
        self.config = config or TrackerConfig()
        self.graph = ChangeHistoryGraph()
        self.log = SessionLog()

    # .. graph helpers

    def _materialize(self, block: StatementNode, method: MethodDeclarationInfo, entry_path: str, commit: CommitRef) -> str:
        element = block_identifier(block, method, commit.id)
        node = HistoryNode(
            element=element,
            commit=commit,
            path=entry_path,
            start_line=block.start_line,
            end_line=block.end_line,
        )
        return self.graph.add_node(node)

    def _link_pending(self, node_id: str, pending: tuple[str, list[ChangeKind]] | None):
        if pending is not None:
            to_id, changes = pending
            self.graph.edges.append(GraphEdge(from_id=node_id, to_id=to_id, changes=changes))

    # .. main loop

    def run(self, file_path: str, block_kind: str, start_line: int, start_commit: str = "HEAD") -> ChangeHistoryGraph:
        start_sha = self.repo.resolve(start_commit)
        model = build_partial_model(self.repo, start_sha, {file_path})
        block, method = locate_block(model, file_path, block_kind, start_line)
        key = _key_of(block, method, file_path)
        queue: list[_Cursor] = [_Cursor(key=key, at=start_sha, pending=None)]
        started = time.perf_counter()
        while queue:
            self._walk(queue.pop(0), queue)
        self.log.total_s = time.perf_counter() - started
        return self.graph

    def _walk(self, cursor: _Cursor, queue: list[_Cursor]):
        history = self.repo.file_history_entries(cursor.key.path, cursor.at)
        idx = 0
        while idx < len(history):
            entry = history[idx]
            r = entry.commit
            t0 = time.perf_counter()
            try:
                resolution = self._resolve_pair(entry, cursor)
            except ParseError as exc:
                self.graph.diagnostics.append(f"parse failure at {r.id[:8]}: {exc}")
                idx += 1
                continue
            if resolution is None:  # block not locatable: abort branch with diagnostic
                self.graph.diagnostics.append(
                    f"lost track of {cursor.key.block_kind} at {r.id[:8]} ({cursor.key.path})"
                )
                return
            elapsed = time.perf_counter() - t0
            category = {2: "no-change", 3: "change", 4: "change", 5: "move"}[resolution.step]
            self.log.records.append(
                CommitRecord(r.id, resolution.step, category, elapsed, resolution.outcome != "pass")
            )

            if resolution.outcome == "terminal-root":
                model = build_partial_model(self.repo, r.id, {entry.path})
                located = _relocate(model, cursor.key)
                if located is not None:
                    node_id = self._materialize(located[0], located[1], entry.path, r)
                    self._link_pending(node_id, cursor.pending)
                return
            if resolution.outcome == "introduced":
                model = build_partial_model(self.repo, r.id, {entry.path})
                located = _relocate(model, cursor.key)
                if located is None:
                    self.graph.diagnostics.append(f"lost track at introduction {r.id[:8]}")
                    return
                node_id = self._materialize(located[0], located[1], entry.path, r)
                self._link_pending(node_id, cursor.pending)
                self.graph.edges.append(
                    GraphEdge(
                        from_id=None,
                        to_id=node_id,
                        changes=[ChangeKind(INTRODUCED, resolution.changes[0].description if resolution.changes else "The block was introduced.")],
                    )
                )
                return
            if resolution.outcome == "merge":
                model = build_partial_model(self.repo, r.id, {entry.path})
                located = _relocate(model, cursor.key)
                if located is None:
                    self.graph.diagnostics.append(f"lost track at merge {r.id[:8]}")
                    return
                node_id = self._materialize(located[0], located[1], entry.path, r)
                self._link_pending(node_id, cursor.pending)
                p_sha = r.parent_ids[0]
                for parent_key, parent_changes in resolution.parents:
                    queue.append(_Cursor(key=parent_key, at=p_sha, pending=(node_id, parent_changes)))
                return
            if resolution.outcome == "changed":
                model = build_partial_model(self.repo, r.id, {entry.path})
                located = _relocate(model, cursor.key)
                if located is None:
                    self.graph.diagnostics.append(f"lost track at change {r.id[:8]}")
                    return
                node_id = self._materialize(located[0], located[1], entry.path, r)
                self._link_pending(node_id, cursor.pending)
                cursor.pending = (node_id, resolution.changes)

            # pass or changed: continue at the parent with the left identity
            assert resolution.left is not None
            jumped = resolution.left.path != entry.path_before
            cursor.key = resolution.left
            cursor.at = r.parent_ids[0]
            if jumped:
                history = self.repo.file_history_entries(cursor.key.path, cursor.at)
                idx = 0
            else:
                idx += 1
        # History exhausted without a terminal: keep the oldest known state.
        if history:
            oldest = history[-1]
            model = build_partial_model(self.repo, oldest.commit.id, {oldest.path})
            located = _relocate(model, cursor.key)
            if located is not None:
                node_id = self._materialize(located[0], located[1], oldest.path, oldest.commit)
                self._link_pending(node_id, cursor.pending)

    # .. per-pair resolution

    def _resolve_pair(self, entry: FileHistoryEntry, cursor: _Cursor) -> _Resolution | None:
        r = entry.commit
        if not r.parent_ids:
            return _Resolution(step=2, outcome="terminal-root")
        p_sha = r.parent_ids[0]
        model_r = build_partial_model(self.repo, r.id, {entry.path})
        located = _relocate(model_r, cursor.key)
        if located is None:
            return None
        b_r, m_r = located

        if entry.status == "A" or self.repo.read_file(p_sha, entry.path_before) is None:
            return self._step5(entry, p_sha, b_r, m_r, model_r)

        model_p = build_partial_model(self.repo, p_sha, {entry.path_before})

        step2 = self._step2(model_p, entry.path_before, b_r, m_r)
        if step2 is not None:
            return step2
        step3 = self._step3(model_p, entry.path_before, b_r, m_r)
        if step3 is not None:
            return step3
        step4 = self._step4(model_p, entry.path_before, b_r, m_r)
        if step4 is not None:
            return step4
        return self._step5(entry, p_sha, b_r, m_r, model_r)

    def _step2(self, model_p: SourceModel, path_p: str, b_r: StatementNode, m_r: MethodDeclarationInfo) -> _Resolution | None:
        chain = m_r.container.qualified_chain if m_r.container else ()
        for m_p in model_p.methods_in(path_p):
            if (m_p.container.qualified_chain if m_p.container else ()) != chain:
                continue
            if m_p.signature == m_r.signature and m_p.body_hash == m_r.body_hash:
                b_p = next(
                    (
                        n
                        for n in m_p.all_nodes()
                        if n.kind == b_r.kind
                        and parent_signature(n) == parent_signature(b_r)
                        and n.body_hash == b_r.body_hash
                    ),
                    None,
                )
                if b_p is None:
                    return None
                return _Resolution(step=2, outcome="pass", left=_key_of(b_p, m_p, path_p))
        return None

    def _step3(self, model_p: SourceModel, path_p: str, b_r: StatementNode, m_r: MethodDeclarationInfo) -> _Resolution | None:
        chain = m_r.container.qualified_chain if m_r.container else ()
        m_p = next(
            (
                m
                for m in model_p.methods_in(path_p)
                if m.signature == m_r.signature
                and (m.container.qualified_chain if m.container else ()) == chain
            ),
            None,
        )
        if m_p is None:
            return None
        mapping = map_bodies(m_p, m_r)
        pairing = MethodPairing(m_p, m_r, "identical-signature", mapping)

        outcome = self._from_body_refactorings(pairing, b_r, path_p, step=3)
        if outcome is not None:
            return outcome
        outcome = self._from_mapping(mapping, b_r, m_p, m_r, path_p, step=3)
        if outcome is not None:
            return outcome

        # b_r unmapped: inline-method continuation, else introduced.
        inline = self._inline_continuation(model_p, path_p, m_r, b_r)
        if inline is not None:
            return inline
        if b_r in mapping.unmatched_right:
            return _Resolution(
                step=3,
                outcome="introduced",
                changes=[ChangeKind(INTRODUCED, "The block was introduced in an existing method.")],
            )
        return None

    def _inline_continuation(self, model_p: SourceModel, path_p: str, m_r: MethodDeclarationInfo, b_r: StatementNode) -> _Resolution | None:
        pairings = self._file_pairings(model_p, path_p, m_r)
        left_methods = model_p.methods_in(path_p)
        right_methods = m_r.container.methods if m_r.container else [m_r]
        intra = detect_intra_file([], [], pairings, left_methods=left_methods, right_methods=right_methods)
        for pairing in intra:
            if pairing.kind == "inlined" and pairing.right is m_r:
                mp = pairing.mapping.mapping_for_right(b_r)
                if mp is not None:
                    changes = classify_changes(mp.left, b_r, pairing.mapping)
                    return _Resolution(
                        step=3,
                        outcome="changed" if changes else "pass",
                        changes=changes,
                        left=_key_of(mp.left, pairing.left, path_p),
                    )
        return None

    def _file_pairings(self, model_p: SourceModel, path_p: str, m_r: MethodDeclarationInfo) -> list[MethodPairing]:
        """match_methods for the tracked container against its same-chain twin."""
        right_types = [m_r.container] if m_r.container is not None else []
        pairings: list[MethodPairing] = []
        left_types = model_p.types_in(path_p)
        for rt in right_types:
            lt = next((t for t in left_types if t.qualified_chain == rt.qualified_chain), None)
            if lt is not None:
                pairings.extend(
                    match_methods(lt, rt, left_methods=model_p.methods_of(lt), right_methods=rt.methods)
                )
        return pairings

    def _from_body_refactorings(self, pairing: MethodPairing, b_r: StatementNode, path_p: str, step: int) -> _Resolution | None:
        for ref in detect_body_refactorings(pairing):
            if b_r not in ref.right_blocks:
                continue
            if ref.kind == "split-conditional":
                left_block = ref.left_blocks[0]
                changes = [ChangeKind(BLOCK_SPLIT, "The block was split out of a combined conditional.")]
                if self.config.emit_evolution_hooks:
                    changes.append(ChangeKind("evolution-hook(split)", "Split point; history continues at the original block."))
                return _Resolution(
                    step=step, outcome="changed", changes=changes, left=_key_of(left_block, pairing.left, path_p)
                )
            if ref.kind in ("merge-conditional", "merge-catch"):
                parents = [
                    (
                        _key_of(lb, pairing.left, path_p),
                        [ChangeKind(BLOCK_MERGE, "The block absorbed another block in a merge.")],
                    )
                    for lb in ref.left_blocks
                ]
                return _Resolution(step=step, outcome="merge", parents=parents)
            if ref.kind == "invert-condition":
                changes = [ChangeKind(EXPRESSION_CHANGE, "The condition of the block was inverted.")]
                # swapped then/else branches are part of the inversion, not a body change
                if _content_leaves(ref.left_blocks[0]) != _content_leaves(b_r):
                    changes.append(ChangeKind(BODY_CHANGE, "The body of the block changed."))
                return _Resolution(
                    step=step, outcome="changed", changes=changes, left=_key_of(ref.left_blocks[0], pairing.left, path_p)
                )
            if ref.kind in (REPLACE_LOOP_WITH_PIPELINE, REPLACE_PIPELINE_WITH_LOOP):
                tag = ref.kind
                desc = (
                    "The loop was replaced with a pipeline."
                    if tag == REPLACE_LOOP_WITH_PIPELINE
                    else "The pipeline was replaced with a loop."
                )
                return _Resolution(
                    step=step,
                    outcome="changed",
                    changes=[ChangeKind(tag, desc)],
                    left=_key_of(ref.left_blocks[0], pairing.left, path_p),
                )
        # multi groups not covered by a named refactoring still fork the walk
        for group in pairing.mapping.multi:
            if group.right is b_r:
                parents = [
                    (
                        _key_of(lb, pairing.left, path_p),
                        [ChangeKind(BLOCK_MERGE, "The block absorbed another block in a merge.")],
                    )
                    for lb in group.lefts
                ]
                return _Resolution(step=step, outcome="merge", parents=parents)
        return None

    def _from_mapping(
        self,
        mapping: MappingSet,
        b_r: StatementNode,
        m_p: MethodDeclarationInfo,
        m_r: MethodDeclarationInfo,
        path_p: str,
        step: int,
    ) -> _Resolution | None:
        mp = mapping.mapping_for_right(b_r)
        if mp is None:
            return None
        changes = classify_changes(mp.left, b_r, mapping, transformation=mp.transformation)
        return _Resolution(
            step=step,
            outcome="changed" if changes else "pass",
            changes=changes,
            left=_key_of(mp.left, m_p, path_p),
        )

    def _step4(self, model_p: SourceModel, path_p: str, b_r: StatementNode, m_r: MethodDeclarationInfo) -> _Resolution | None:
        pairings = self._file_pairings(model_p, path_p, m_r)
        mine = next((p for p in pairings if p.right is m_r), None)
        if mine is not None:
            outcome = self._from_body_refactorings(mine, b_r, path_p, step=4)
            if outcome is not None:
                return outcome
            outcome = self._from_mapping(mine.mapping, b_r, mine.left, m_r, path_p, step=4)
            if outcome is not None:
                return outcome
        left_methods = model_p.methods_in(path_p)
        right_methods = [m for m in (m_r.container.methods if m_r.container else [m_r])]
        intra = detect_intra_file([], [], pairings, left_methods=left_methods, right_methods=right_methods)
        hits: list[tuple[MethodPairing, StatementMapping]] = []
        for pairing in intra:
            if pairing.right is not m_r:
                continue
            mp = pairing.mapping.mapping_for_right(b_r)
            if mp is not None:
                hits.append((pairing, mp))
        if len(hits) >= 2:  # duplicated blocks merged by extraction: fork
            parents = [
                (
                    _key_of(mp.left, pairing.left, path_p),
                    [ChangeKind(BLOCK_MERGE, "Duplicated blocks were merged by an extraction.")],
                )
                for pairing, mp in hits
            ]
            return _Resolution(step=4, outcome="merge", parents=parents)
        if hits:
            pairing, mp = hits[0]
            changes = classify_changes(mp.left, b_r, pairing.mapping, transformation=mp.transformation)
            if self.config.emit_evolution_hooks and pairing.kind == "extracted":
                changes = changes + [ChangeKind("evolution-hook(extracted)", "Extraction point; history continues in the origin method.")]
            return _Resolution(
                step=4,
                outcome="changed" if changes else "pass",
                changes=changes,
                left=_key_of(mp.left, pairing.left, path_p),
            )
        return None

    def _step5(
        self,
        entry: FileHistoryEntry,
        p_sha: str,
        b_r: StatementNode,
        m_r: MethodDeclarationInfo,
        model_r_base: SourceModel,
    ) -> _Resolution:
        r = entry.commit
        container = m_r.container
        model_r5, model_p5 = augment_models(
            self.repo,
            r.id,
            p_sha,
            {entry.path},
            container_method_name=m_r.name,
            container_type_name=container.name if container else None,
            config=self.config.refdetect,
            diagnostics=self.graph.diagnostics,
        )
        relocated = _relocate(model_r5, _key_of(b_r, m_r, entry.path))
        if relocated is not None:
            b_r, m_r = relocated
            container = m_r.container

        # 5a: container class moved/renamed/extracted/merged/split
        if container is not None:
            class_pairings = detect_class_level(model_p5, model_r5, self.config.refdetect)
            for cp in class_pairings:
                if cp.right.qualified_chain != container.qualified_chain or cp.right.path != container.path:
                    continue
                pairings = match_methods(
                    cp.left,
                    cp.right,
                    left_methods=model_p5.methods_of(cp.left),
                    right_methods=model_r5.methods_of(cp.right),
                )
                mine = next((p for p in pairings if p.right is m_r), None)
                if mine is None:
                    continue
                mp = mine.mapping.mapping_for_right(b_r)
                if mp is None:
                    continue
                changes = classify_changes(mp.left, b_r, mine.mapping, transformation=mp.transformation)
                return _Resolution(
                    step=5,
                    outcome="changed" if changes else "pass",
                    changes=changes,
                    left=_key_of(mp.left, mine.left, cp.left.path),
                )

        # 5b: the method (or the block with it) moved to another pre-existing file
        candidates: list[tuple[int, MethodDeclarationInfo, str]] = []
        for path, _units in model_p5.files.items():
            for m_p in model_p5.methods_in(path):
                if not m_p.statements:
                    continue
                if self._survives_at(path, r.id, m_p):
                    continue  # a method still present unchanged at r cannot have moved
                rank = 0 if m_p.signature == m_r.signature else 1
                candidates.append((rank, m_p, path))
        candidates.sort(key=lambda c: c[0])
        for rank, m_p, path in candidates:
            mapping = map_bodies(m_p, m_r)
            covered = len(mapping.mappings) / max(len(m_r.all_nodes()), 1)
            if rank == 0 and covered <= 0:
                continue
            if rank == 1 and covered < 0.5:
                continue
            mp = mapping.mapping_for_right(b_r)
            if mp is None:
                continue
            changes = classify_changes(mp.left, b_r, mapping, transformation=mp.transformation)
            return _Resolution(
                step=5,
                outcome="changed" if changes else "pass",
                changes=changes,
                left=_key_of(mp.left, m_p, path),
            )

        return _Resolution(
            step=5,
            outcome="introduced",
            changes=[ChangeKind(INTRODUCED, "The block was introduced as part of a newly added method.")],
        )

    def _survives_at(self, path: str, commit: str, m_p: MethodDeclarationInfo) -> bool:
        """True when an identical twin of m_p still exists at `commit` in the same file."""
        from .refdetect import method_identity

        text = self.repo.read_file(commit, path)
        if text is None:
            return False
        try:
            model = build_partial_model(self.repo, commit, {path})
        except ParseError:
            return False
        wanted = method_identity(m_p)
        return any(method_identity(m) == wanted for m in model.methods_in(path))


def track(
    repo: Repository,
    file_path: str,
    block_kind: str,
    start_line: int,
    start_commit: str = "HEAD",
    config: TrackerConfig | None = None,
    session_log: SessionLog | None = None,
) -> ChangeHistoryGraph:
    """Reconstruct the complete change history graph of one block."""
    session = TrackingSession(repo, config)
    graph = session.run(file_path, block_kind, start_line, start_commit)
    if session_log is not None:
        session_log.records = session.log.records
        session_log.total_s = session.log.total_s
    return graph


# -- wire format (single serializer shared by CLI, REST, evalkit, UI) --------------


def graph_to_wire(graph: ChangeHistoryGraph) -> dict:
    nodes = sorted(
        graph.nodes.values(),
        key=lambda n: (n.commit.authored_at, n.commit.id, n.id),
        reverse=True,
    )
    return {
        "start": graph.start,
        "nodes": [
            {
                "commitId": n.commit.id,
                "author": n.commit.author,
                "date": n.commit.authored_at,
                "blockType": n.element.block_type,
                "file": n.path,
                "startLine": n.start_line,
                "endLine": n.end_line,
                "signature": n.id,
            }
            for n in nodes
        ],
        "edges": [
            {
                "from": e.from_id,
                "to": e.to_id,
                "changes": [{"type": c.tag, "description": c.description} for c in e.changes],
            }
            for e in sorted(graph.edges, key=lambda e: (e.to_id, e.from_id or ""))
        ],
    }


def serialize_graph(graph: ChangeHistoryGraph) -> str:
    return json.dumps(graph_to_wire(graph), indent=2, sort_keys=True)


def graph_from_wire(data: dict) -> ChangeHistoryGraph:
    """Rebuild a graph from its wire form (sufficient for scoring and the UI)."""
    graph = ChangeHistoryGraph(start=data.get("start"))
    for n in data.get("nodes", []):
        element = BlockIdentifier(
            version=n["commitId"],
            container="",
            block_type=n["blockType"],
            parent_signature="",
            body_hash="",
        )
        commit = CommitRef(
            id=n["commitId"],
            author=n.get("author", ""),
            authored_at=n.get("date", ""),
            message="",
            parent_ids=(),
        )
        node = HistoryNode(
            element=element,
            commit=commit,
            path=n["file"],
            start_line=n["startLine"],
            end_line=n["endLine"],
            wire_id=n["signature"],
        )
        graph.nodes[node.id] = node
        if graph.start is None:
            graph.start = node.id
    for e in data.get("edges", []):
        graph.edges.append(
            GraphEdge(
                from_id=e.get("from"),
                to_id=e["to"],
                changes=[ChangeKind(c["type"], c.get("description", "")) for c in e.get("changes", [])],
            )
        )
    return graph
