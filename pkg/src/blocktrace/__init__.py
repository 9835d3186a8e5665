"""blocktrace: refactoring-aware change history tracking for Java code blocks."""

from .errors import (
    BlocktraceError,
    CodeElementNotFound,
    DecodeError,
    GitError,
    MismatchedElement,
    ParseError,
    RangeRestartNeeded,
    SizeLimit,
    UnknownCommit,
    UnknownPath,
)
from .gitio import CommitRef, FileChange, Repository, clone_if_absent
from .srcmodel import BlockIdentifier, SourceModel, block_identifier, build_partial_model, locate_block, parse_file
from .stmtmap import MappingSet, child_match_ratio, detect_transformation, map_bodies
from .tracker import ChangeHistoryGraph, SessionLog, TrackerConfig, graph_from_wire, graph_to_wire, serialize_graph, track
from .evalkit import OracleEntry, ScoreReport, gitlog_baseline, oracle_from_graph, score, time_session

__version__ = "0.1.0"

__all__ = [
    "BlockIdentifier",
    "BlocktraceError",
    "ChangeHistoryGraph",
    "CodeElementNotFound",
    "CommitRef",
    "DecodeError",
    "FileChange",
    "GitError",
    "MappingSet",
    "MismatchedElement",
    "OracleEntry",
    "ParseError",
    "RangeRestartNeeded",
    "Repository",
    "ScoreReport",
    "SessionLog",
    "SizeLimit",
    "SourceModel",
    "TrackerConfig",
    "UnknownCommit",
    "UnknownPath",
    "block_identifier",
    "build_partial_model",
    "child_match_ratio",
    "clone_if_absent",
    "detect_transformation",
    "gitlog_baseline",
    "graph_from_wire",
    "graph_to_wire",
    "locate_block",
    "map_bodies",
    "oracle_from_graph",
    "parse_file",
    "score",
    "serialize_graph",
    "time_session",
    "track",
]
