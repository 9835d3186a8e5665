"""Partial source code models and the block identifier algebra.

A model is the parsed view of a chosen file set at one commit. Block identity
combines the commit, the container chain (source folder, package, type chain,
method signature), the block's position chain in the method's statement
structure, and a content hash of its body.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

from .errors import CodeElementNotFound, ParseError
from .javaparse import (
    COMPOSITE_KINDS,
    MethodDeclarationInfo,
    StatementNode,
    TypeDeclarationInfo,
    hash64,
    parse_java,
)

TRACKABLE_KINDS = frozenset(
    ["if", "for", "enhanced-for", "while", "do-while", "try", "catch", "finally",
     "switch", "synchronized"]
)

__all__ = [
    "BlockIdentifier",
    "MethodDeclarationInfo",
    "SourceModel",
    "StatementNode",
    "TRACKABLE_KINDS",
    "TypeDeclarationInfo",
    "block_identifier",
    "build_partial_model",
    "container_string",
    "locate_block",
    "parse_file",
    "parent_signature",
]


@dataclass(frozen=True)
class BlockIdentifier:
    """Unique identity of a block at one version of the repository."""

    version: str  # commit sha
    container: str  # source_folder#package#type chain#method signature
    block_type: str
    parent_signature: str  # position chain, e.g. "body[0].if[1]"
    body_hash: str

    def sans_version(self) -> tuple[str, str, str, str]:
        return (self.container, self.block_type, self.parent_signature, self.body_hash)

    @property
    def key(self) -> str:
        return f"{self.container}#{self.block_type}#{self.parent_signature}#{self.body_hash}"

    def node_id(self) -> str:
        return f"{hash64(self.key)}@{self.version}"


@dataclass
class SourceModel:
    """Parsed compilation units for a set of files at one commit.

    `excluded` holds ids of methods pruned from consideration (the parsed trees
    themselves are shared caches and stay untouched); use `methods_of` and
    `methods_in` to observe the pruned view.
    """

    commit: str
    files: dict[str, list[TypeDeclarationInfo]] = field(default_factory=dict)
    excluded: set[int] = field(default_factory=set)

    def all_types(self) -> list[TypeDeclarationInfo]:
        return [t for units in self.files.values() for top in units for t in top.all_types()]

    def types_in(self, path: str) -> list[TypeDeclarationInfo]:
        return [t for top in self.files.get(path, []) for t in top.all_types()]

    def find_type(self, path: str, qualified_chain: tuple[str, ...]) -> TypeDeclarationInfo | None:
        for t in self.types_in(path):
            if t.qualified_chain == qualified_chain:
                return t
        return None

    def methods_of(self, decl: TypeDeclarationInfo) -> list[MethodDeclarationInfo]:
        return [m for m in decl.methods if id(m) not in self.excluded]

    def methods_in(self, path: str) -> list[MethodDeclarationInfo]:
        return [m for t in self.types_in(path) for m in self.methods_of(t)]


@functools.lru_cache(maxsize=512)
def _parse_cached(text: str, path: str) -> tuple[str, tuple[TypeDeclarationInfo, ...]]:
    package, types = parse_java(text, path)
    return package, tuple(types)


def parse_file(text: str, path: str) -> list[TypeDeclarationInfo]:
    """Parse one file into its type declarations, annotated with path/source folder."""
    package, types = _parse_cached(text, path)
    source_folder = _source_folder(path, package)
    for top in types:
        for t in top.all_types():
            t.path = path
            t.source_folder = source_folder
    return list(types)


def _source_folder(path: str, package: str) -> str:
    """Longest path prefix before the directory chain spelled by the package."""
    dirs = path.split("/")[:-1]
    if package:
        pkg_dirs = package.split(".")
        if len(dirs) >= len(pkg_dirs) and dirs[len(dirs) - len(pkg_dirs) :] == pkg_dirs:
            return "/".join(dirs[: len(dirs) - len(pkg_dirs)])
    return "/".join(dirs)


def parent_signature(block: StatementNode) -> str:
    """Position chain from the method body down to the block (Eq.6 rendering).

    A method-body-level block has an empty prefix: just "body[i]".
    """
    if block.parent is None:
        return f"body[{block.index_in_parent}]"
    return f"{parent_signature(block.parent)}.{block.parent.kind}[{block.index_in_parent}]"


def container_string(method: MethodDeclarationInfo) -> str:
    t = method.container
    if t is None:
        return f"?#?#?#{method.signature_text}"
    chain = ".".join(t.qualified_chain)
    return f"{t.source_folder}#{t.package}#{chain}#{method.signature_text}"


def block_identifier(block: StatementNode, method: MethodDeclarationInfo, commit: str) -> BlockIdentifier:
    return BlockIdentifier(
        version=commit,
        container=container_string(method),
        block_type=block.kind,
        parent_signature=parent_signature(block),
        body_hash=block.body_hash,
    )


def locate_block(
    model: SourceModel, path: str, block_kind: str, start_line: int
) -> tuple[StatementNode, MethodDeclarationInfo]:
    """The unique block of `block_kind` starting at `start_line`, with its method."""
    if path not in model.files:
        raise CodeElementNotFound(f"{path} not in model at {model.commit}")
    for method in model.methods_in(path):
        for node in method.all_nodes():
            if node.kind == block_kind and node.start_line == start_line:
                return node, method
    raise CodeElementNotFound(f"no {block_kind} block starting at {path}:{start_line}")


def find_block_by_signature(
    method: MethodDeclarationInfo, block_type: str, parent_sig: str, body_hash: str | None = None
) -> StatementNode | None:
    """Block in `method` matching a signature-sans-version (body hash optional)."""
    for node in method.all_nodes():
        if node.kind != block_type:
            continue
        if parent_signature(node) != parent_sig:
            continue
        if body_hash is not None and node.body_hash != body_hash:
            continue
        return node
    return None


def build_partial_model(repo, commit, paths) -> SourceModel:
    """Parse the requested files at a commit into one model.

    Parse and decode failures are re-raised tagged with the offending path.
    """
    sha = commit if isinstance(commit, str) else commit.id
    model = SourceModel(commit=sha)
    for path in sorted(paths):
        text = repo.read_file(sha, path)
        if text is None:
            raise CodeElementNotFound(f"{path} does not exist at {sha}")
        try:
            model.files[path] = parse_file(text, path)
        except ParseError as exc:
            raise ParseError(str(exc), exc.line, exc.column, path) from exc
    return model
