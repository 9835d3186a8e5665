"""Method- and class-level matching plus the refactoring inference tracking needs.

Covers signature-first method matching with a combinatorial second phase,
intra-file extract/inline/merge/split detection, class move/rename/extract
pairing, the cross-file model augmentation heuristics (deprecation links,
same-name-other-package copies, instantiation/extension of the new type), the
identical-method pruning optimization, and method-body-level refactorings
(split/merge conditional, invert condition, merge catch, loop<->pipeline).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .javalex import tokenize
from .javaparse import MethodDeclarationInfo, StatementNode, TypeDeclarationInfo
from .srcmodel import SourceModel, build_partial_model, parse_file
from .stmtmap import MappingSet, map_bodies


@dataclass
class RefDetectConfig:
    """Thresholds and scan patterns; loadable from a key=value text file."""

    member_overlap_threshold: float = 0.5
    deprecated_pattern: str = r"@deprecated[\s\S]{0,200}?@link\s+[\w.#]*{name}"
    instantiation_pattern: str = r"new\s+{name}\s*[(<]"
    extension_pattern: str = r"(extends|implements)\s+{name}\b"
    identical_method_pruning: bool = True

    @classmethod
    def load(cls, path: str | Path) -> "RefDetectConfig":
        cfg = cls()
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#") or "=" not in line:
                continue
            key, value = (part.strip() for part in line.split("=", 1))
            if key == "member_overlap_threshold":
                cfg.member_overlap_threshold = float(value)
            elif key == "identical_method_pruning":
                cfg.identical_method_pruning = value.lower() in ("1", "true", "yes", "on")
            elif hasattr(cfg, key):
                setattr(cfg, key, value)
        return cfg


DEFAULT_CONFIG = RefDetectConfig()


@dataclass(eq=False)
class MethodPairing:
    left: MethodDeclarationInfo
    right: MethodDeclarationInfo
    kind: str  # identical-signature | signature-changed | extracted | inlined |
    #           merged | split | moved | pulled-up | pushed-down | extracted-and-moved
    mapping: MappingSet


@dataclass(eq=False)
class ClassPairing:
    left: TypeDeclarationInfo
    right: TypeDeclarationInfo
    kind: str  # moved | renamed | extracted | merged | split


@dataclass(eq=False)
class BodyRefactoring:
    kind: str  # replace-loop-with-pipeline | replace-pipeline-with-loop |
    #           invert-condition | split-conditional | merge-conditional | merge-catch
    left_blocks: list[StatementNode]
    right_blocks: list[StatementNode]


# -- method matching ----------------------------------------------------------


def _match_score(mapping: MappingSet, left: MethodDeclarationInfo, right: MethodDeclarationInfo) -> float:
    total = max(len(left.all_nodes()), len(right.all_nodes()))
    if total == 0:
        return 1.0 if left.normalized_body == right.normalized_body else 0.0
    return len(mapping.mappings) / total


def match_methods(
    left_type: TypeDeclarationInfo,
    right_type: TypeDeclarationInfo,
    left_methods: list[MethodDeclarationInfo] | None = None,
    right_methods: list[MethodDeclarationInfo] | None = None,
) -> list[MethodPairing]:
    """Pair identical signatures first, then best-scoring leftover combinations."""
    lefts = list(left_methods if left_methods is not None else left_type.methods)
    rights = list(right_methods if right_methods is not None else right_type.methods)
    pairings: list[MethodPairing] = []

    by_sig = {m.signature: m for m in lefts}
    used_left: set[int] = set()
    used_right: set[int] = set()
    for r in rights:
        l = by_sig.get(r.signature)
        if l is not None and id(l) not in used_left:
            pairings.append(MethodPairing(l, r, "identical-signature", map_bodies(l, r)))
            used_left.add(id(l))
            used_right.add(id(r))

    leftover_l = [m for m in lefts if id(m) not in used_left]
    leftover_r = [m for m in rights if id(m) not in used_right]
    candidates: list[tuple[float, int, int, int, MethodPairing]] = []
    for li, l in enumerate(leftover_l):
        for ri, r in enumerate(leftover_r):
            mapping = map_bodies(l, r)
            score = _match_score(mapping, l, r)
            if score <= 0.5:
                # anything weaker stays leftover so merge/split detection can
                # claim it; cross-file matching still recovers 1:1 relocations
                continue
            repl = sum(len(m.replacements) for m in mapping.mappings)
            candidates.append(
                (score, repl, li, ri, MethodPairing(l, r, "signature-changed", mapping))
            )
    candidates.sort(key=lambda c: (-c[0], c[1], c[2], c[3]))
    for score, _, li, ri, pairing in candidates:
        if id(pairing.left) in used_left or id(pairing.right) in used_right:
            continue
        used_left.add(id(pairing.left))
        used_right.add(id(pairing.right))
        pairings.append(pairing)
    return pairings


def _calls(method: MethodDeclarationInfo, name: str) -> bool:
    pattern = f" {name} ("
    body = " " + method.normalized_body + " "
    return pattern in body or body.startswith(f"{name} (")


def detect_intra_file(
    left_types: list[TypeDeclarationInfo],
    right_types: list[TypeDeclarationInfo],
    pairings: list[MethodPairing],
    left_methods: list[MethodDeclarationInfo] | None = None,
    right_methods: list[MethodDeclarationInfo] | None = None,
) -> list[MethodPairing]:
    """Extract/inline/merge/split pairings among the methods left unmatched."""
    lefts = list(left_methods if left_methods is not None else [m for t in left_types for m in t.methods])
    rights = list(right_methods if right_methods is not None else [m for t in right_types for m in t.methods])
    paired_left = {id(p.left) for p in pairings}
    paired_right = {id(p.right) for p in pairings}
    leftover_l = [m for m in lefts if id(m) not in paired_left]
    leftover_r = [m for m in rights if id(m) not in paired_right]
    found: list[MethodPairing] = []
    consumed_r: set[int] = set()
    consumed_l: set[int] = set()

    # Extract Method: leftover right R fed by unmatched-left statements of a matched pair,
    # with a call site referencing R.
    for r_method in leftover_r:
        if not r_method.statements:
            continue
        call_site = any(_calls(m, r_method.name) for m in rights if m is not r_method)
        if not call_site:
            continue
        sources = []
        for pairing in pairings:
            unmatched_left_ids = {id(n) for n in pairing.mapping.unmatched_left}
            if not unmatched_left_ids:
                continue
            mm = map_bodies(pairing.left, r_method)
            moved = [mp for mp in mm.mappings if id(mp.left) in unmatched_left_ids]
            if moved:
                sources.append((pairing.left, mm, len(moved)))
        for source, mm, _ in sources:
            found.append(MethodPairing(source, r_method, "extracted", mm))
        if sources:
            consumed_r.add(id(r_method))

    # Inline Method: leftover left L flowed into the right side of a matched pair,
    # with the old left side calling L.
    for l_method in leftover_l:
        if not l_method.statements:
            continue
        call_site = any(_calls(m, l_method.name) for m in lefts if m is not l_method)
        if not call_site:
            continue
        for pairing in pairings:
            unmatched_right_ids = {id(n) for n in pairing.mapping.unmatched_right}
            if not unmatched_right_ids:
                continue
            mm = map_bodies(l_method, pairing.right)
            landed = [mp for mp in mm.mappings if id(mp.right) in unmatched_right_ids]
            if landed:
                found.append(MethodPairing(l_method, pairing.right, "inlined", mm))
                consumed_l.add(id(l_method))
                break

    # Merge Method: >=2 leftover lefts jointly mapping into one leftover right.
    for r_method in leftover_r:
        if id(r_method) in consumed_r or not r_method.statements:
            continue
        parents = []
        covered: set[int] = set()
        for l_method in leftover_l:
            if id(l_method) in consumed_l or not l_method.statements:
                continue
            mm = map_bodies(l_method, r_method)
            if mm.mappings and _match_score(mm, l_method, r_method) > 0:
                matched_right = {id(mp.right) for mp in mm.mappings}
                if matched_right - covered:
                    parents.append((l_method, mm))
                    covered |= matched_right
        if len(parents) >= 2 and len(covered) / max(len(r_method.all_nodes()), 1) >= 0.5:
            for l_method, mm in parents:
                found.append(MethodPairing(l_method, r_method, "merged", mm))
                consumed_l.add(id(l_method))
            consumed_r.add(id(r_method))

    # Split Method: one leftover left distributed over >=2 leftover rights.
    for l_method in leftover_l:
        if id(l_method) in consumed_l or not l_method.statements:
            continue
        parts = []
        for r_method in leftover_r:
            if id(r_method) in consumed_r or not r_method.statements:
                continue
            mm = map_bodies(l_method, r_method)
            if mm.mappings and len(mm.mappings) / max(len(r_method.all_nodes()), 1) >= 0.5:
                parts.append((r_method, mm))
        if len(parts) >= 2:
            for r_method, mm in parts:
                found.append(MethodPairing(l_method, r_method, "split", mm))
                consumed_r.add(id(r_method))
            consumed_l.add(id(l_method))

    return found


# -- class-level matching -------------------------------------------------------


def _member_overlap(left: TypeDeclarationInfo, right: TypeDeclarationInfo) -> float:
    if not left.methods or not right.methods:
        return 0.0
    left_bodies = {m.body_hash for m in left.methods if m.statements}
    left_sigs = {m.signature for m in left.methods}
    matched = sum(
        1
        for m in right.methods
        if (m.statements and m.body_hash in left_bodies) or m.signature in left_sigs
    )
    return matched / min(len(left.methods), len(right.methods))


def detect_class_level(
    left_model: SourceModel,
    right_model: SourceModel,
    config: RefDetectConfig = DEFAULT_CONFIG,
) -> list[ClassPairing]:
    left_types = left_model.all_types()
    right_types = right_model.all_types()
    left_by_key = {(t.package, t.qualified_chain): t for t in left_types}
    right_keys = {(t.package, t.qualified_chain) for t in right_types}
    unmatched_left = [t for t in left_types if (t.package, t.qualified_chain) not in right_keys]
    pairings: list[ClassPairing] = []
    used_left: set[int] = set()

    for r in right_types:
        key = (r.package, r.qualified_chain)
        surviving = left_by_key.get(key)
        if surviving is not None:
            if surviving.path != r.path or surviving.source_folder != r.source_folder:
                pairings.append(ClassPairing(surviving, r, "moved"))
            continue
        # same simple name, different package -> moved
        moved = next(
            (
                t
                for t in unmatched_left
                if id(t) not in used_left and t.name == r.name and t.package != r.package
            ),
            None,
        )
        if moved is not None:
            pairings.append(ClassPairing(moved, r, "moved"))
            used_left.add(id(moved))
            continue
        # same package, different name, member overlap -> renamed
        renamed = next(
            (
                t
                for t in unmatched_left
                if id(t) not in used_left
                and t.package == r.package
                and t.name != r.name
                and _member_overlap(t, r) >= config.member_overlap_threshold
            ),
            None,
        )
        if renamed is not None:
            pairings.append(ClassPairing(renamed, r, "renamed"))
            used_left.add(id(renamed))
            continue
        # members moved out of a surviving left type -> extracted
        extract_origin = None
        for t in left_types:
            counterpart = next(
                (x for x in right_types if (x.package, x.qualified_chain) == (t.package, t.qualified_chain)),
                None,
            )
            if counterpart is None:
                continue
            remaining = {m.body_hash for m in counterpart.methods if m.statements}
            moved_in = [
                m
                for m in t.methods
                if m.statements and m.body_hash not in remaining
                and any(m.body_hash == rm.body_hash for rm in r.methods if rm.statements)
            ]
            if moved_in:
                extract_origin = t
                break
        if extract_origin is not None:
            pairings.append(ClassPairing(extract_origin, r, "extracted"))
            continue
        # several vanished lefts whose members land in r -> merged
        parents = [
            t
            for t in unmatched_left
            if id(t) not in used_left and _member_overlap(t, r) >= config.member_overlap_threshold
        ]
        if len(parents) >= 2:
            for t in parents:
                pairings.append(ClassPairing(t, r, "merged"))
                used_left.add(id(t))

    # split: one vanished left whose members are spread over several new rights
    matched_rights = {id(p.right) for p in pairings}
    for t in unmatched_left:
        if id(t) in used_left:
            continue
        parts = [
            r
            for r in right_types
            if id(r) not in matched_rights
            and (r.package, r.qualified_chain) not in left_by_key
            and _member_overlap(t, r) > 0
        ]
        if len(parts) >= 2:
            for r in parts:
                pairings.append(ClassPairing(t, r, "split"))
            used_left.add(id(t))
    return pairings


# -- Step-5 model augmentation ---------------------------------------------------


def _nonessential_normalized(text: str) -> str:
    """Token stream with comments and import declarations removed."""
    try:
        toks = tokenize(text)
    except Exception:
        return text
    out: list[str] = []
    i = 0
    while i < len(toks):
        if toks[i].text == "import" and toks[i].kind == "keyword":
            while i < len(toks) and toks[i].text != ";":
                i += 1
            i += 1
            continue
        out.append(toks[i].text)
        i += 1
    return " ".join(out)


def augment_models(
    repo,
    commit_r: str,
    parent_p: str,
    base_right_paths: set[str],
    container_method_name: str | None = None,
    container_type_name: str | None = None,
    config: RefDetectConfig = DEFAULT_CONFIG,
    diagnostics: list[str] | None = None,
) -> tuple[SourceModel, SourceModel]:
    """Build the widened (right, left) models for cross-file matching.

    The parent model takes every file modified or removed by the commit, minus
    files whose change is comments/imports only. The right model keeps the
    tracked file plus files pulled in by the three textual heuristics.
    """
    changes = repo.changed_files(commit_r)
    p_paths: set[str] = set()
    for change in changes:
        before = change.path_before
        if before is None or not before.endswith(".java"):
            continue
        if change.kind == "modified":
            old = repo.read_file(parent_p, before)
            new = repo.read_file(commit_r, change.path_after)
            if old is not None and new is not None:
                if _nonessential_normalized(old) == _nonessential_normalized(new):
                    continue
        p_paths.add(before)

    r_paths = {p for p in base_right_paths if repo.read_file(commit_r, p) is not None}
    candidates = [
        c.path_after
        for c in changes
        if c.path_after is not None and c.path_after.endswith(".java") and c.path_after not in r_paths
    ]
    base_names = {Path(p).name for p in base_right_paths}
    for path in candidates:
        text = repo.read_file(commit_r, path)
        if text is None:
            continue
        include = False
        if container_method_name or container_type_name:
            for name in filter(None, (container_method_name, container_type_name)):
                if re.search(config.deprecated_pattern.replace("{name}", re.escape(name)), text, re.IGNORECASE):
                    include = True
        if not include and Path(path).name in base_names:
            include = True  # same simple type name, different directory/package
        if not include and container_type_name:
            if re.search(config.instantiation_pattern.replace("{name}", re.escape(container_type_name)), text):
                include = True
            elif re.search(config.extension_pattern.replace("{name}", re.escape(container_type_name)), text):
                include = True
        if include:
            r_paths.add(path)

    model_p = SourceModel(commit=parent_p)
    for path in sorted(p_paths):
        text = repo.read_file(parent_p, path)
        if text is None:
            continue
        try:
            model_p.files[path] = parse_file(text, path)
        except Exception as exc:  # unparseable revisions are skipped, not fatal
            if diagnostics is not None:
                diagnostics.append(f"skipped unparseable {path}@{parent_p[:8]}: {exc}")
    model_r = SourceModel(commit=commit_r)
    for path in sorted(r_paths):
        text = repo.read_file(commit_r, path)
        if text is None:
            continue
        try:
            model_r.files[path] = parse_file(text, path)
        except Exception as exc:
            if diagnostics is not None:
                diagnostics.append(f"skipped unparseable {path}@{commit_r[:8]}: {exc}")

    if config.identical_method_pruning:
        prune_identical_methods(model_p, model_r)
    return model_r, model_p


def method_identity(m: MethodDeclarationInfo) -> tuple:
    """Container chain + signature + body tokens: the pruning equality key."""
    chain = m.container.qualified_chain if m.container else ()
    return (chain, m.signature, m.normalized_body)


def prune_identical_methods(model_p: SourceModel, model_r: SourceModel) -> int:
    """Exclude identical method pairs from same-path file pairs.

    Identity covers the container chain, so methods of a renamed class are
    never pruned away from the class-level pairing that needs them.
    """
    pruned = 0
    for path in set(model_p.files) & set(model_r.files):
        left_index = {
            method_identity(m): m
            for t in model_p.types_in(path)
            for m in t.methods
            if m.statements
        }
        for t in model_r.types_in(path):
            for m in t.methods:
                if not m.statements:
                    continue
                twin = left_index.get(method_identity(m))
                if twin is not None:
                    model_p.excluded.add(id(twin))
                    model_r.excluded.add(id(m))
                    pruned += 1
    return pruned


# -- method-body-level refactorings ------------------------------------------------


def _split_operands(expr: str, op: str) -> list[str]:
    toks = [t.text for t in tokenize(expr)]
    out: list[list[str]] = [[]]
    depth = 0
    for t in toks:
        if t in "([{":
            depth += 1
        elif t in ")]}":
            depth -= 1
        if t == op and depth == 0:
            out.append([])
        else:
            out[-1].append(t)
    return [" ".join(part) for part in out]


def _negated(a: str, b: str) -> bool:
    strip = lambda s: s[2:-2].strip() if s.startswith("! (") and s.endswith(" )") else None
    if strip(a) == b or strip(b) == a:
        return True
    flips = {"==": "!=", "!=": "==", "<": ">=", ">": "<=", "<=": ">", ">=": "<"}
    ta, tb = a.split(" "), b.split(" ")
    if len(ta) == len(tb):
        diffs = [(x, y) for x, y in zip(ta, tb) if x != y]
        if len(diffs) == 1 and flips.get(diffs[0][0]) == diffs[0][1]:
            return True
    return False


def detect_body_refactorings(pairing: MethodPairing) -> list[BodyRefactoring]:
    found: list[BodyRefactoring] = []
    mapping = pairing.mapping
    left_nodes = pairing.left.all_nodes()
    right_nodes = pairing.right.all_nodes()

    for mp in mapping.mappings:
        if mp.transformation is not None and mp.transformation.kind == "for↔forEach-pipeline":
            kind = (
                "replace-loop-with-pipeline"
                if mp.transformation.direction == "forward"
                else "replace-pipeline-with-loop"
            )
            found.append(BodyRefactoring(kind, [mp.left], [mp.right]))
        if (
            mp.left.kind == "if"
            and mp.right.kind == "if"
            and mp.left.expressions != mp.right.expressions
            and _negated(mp.left.expressions[0], mp.right.expressions[0])
        ):
            found.append(BodyRefactoring("invert-condition", [mp.left], [mp.right]))

    # split-conditional: `a && b` -> nested ifs; `a || b` -> sequential ifs
    right_ifs = [n for n in right_nodes if n.kind == "if"]
    for left_if in (n for n in left_nodes if n.kind == "if"):
        cond = left_if.expressions[0] if left_if.expressions else ""
        for op, shape in (("&&", "nested"), ("||", "sequential")):
            operands = _split_operands(cond, op)
            if len(operands) < 2:
                continue
            targets = [r for r in right_ifs if r.expressions and r.expressions[0] in operands]
            if len({r.expressions[0] for r in targets}) < len(operands):
                continue
            if shape == "nested":
                outer = [r for r in targets if r.expressions[0] == operands[0]]
                ok = any(
                    all(
                        any(d.kind == "if" and d.expressions[0] == o for d in r.walk())
                        for o in operands[1:]
                    )
                    for r in outer
                )
                if not ok:
                    continue
                chain = [r for r in right_ifs if r.expressions[0] in operands]
            else:
                parents = {id(r.parent) for r in targets}
                if len(parents) != 1:
                    continue
                chain = targets
            if not any(_shares_leaf_text(left_if, r) for r in chain):
                continue
            found.append(BodyRefactoring("split-conditional", [left_if], chain))
            break

    for group in mapping.multi:
        if group.right.kind == "catch":
            found.append(BodyRefactoring("merge-catch", list(group.lefts), [group.right]))
        elif group.right.kind == "if":
            found.append(BodyRefactoring("merge-conditional", list(group.lefts), [group.right]))
        else:
            found.append(BodyRefactoring("merge-conditional", list(group.lefts), [group.right]))
    return found


def _shares_leaf_text(a: StatementNode, b: StatementNode) -> bool:
    a_texts = {n.text for n in a.walk() if n.kind == "leaf"}
    b_texts = {n.text for n in b.walk() if n.kind == "leaf"}
    return bool(a_texts & b_texts)
