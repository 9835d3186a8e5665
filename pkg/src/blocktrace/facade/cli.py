"""blocktrace command line interface.

Exit codes for `track`: 0 success, 2 when the requested block cannot be
located, 1 for any other failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from ..errors import BlocktraceError, CodeElementNotFound
from ..evalkit import OracleEntry, gitlog_baseline, score
from ..gitio import Repository
from ..srcmodel import TRACKABLE_KINDS
from ..tracker import graph_from_wire, serialize_graph, track


@click.group()
def main():
    """Refactoring-aware change history tracking for Java code blocks."""


@main.command("track")
@click.option("--repo", "repo_path", required=True, type=click.Path(exists=True), help="Local clone path.")
@click.option("--commit", default="HEAD", show_default=True, help="Start commit.")
@click.option("--file", "file_path", required=True, help="Repo-relative file path.")
@click.option("--type", "block_type", required=True, type=click.Choice(sorted(TRACKABLE_KINDS)))
@click.option("--line", required=True, type=int, help="Start line of the block.")
def cli_track(repo_path: str, commit: str, file_path: str, block_type: str, line: int):
    """Print the block's change history graph as JSON."""
    try:
        repo = Repository(repo_path)
        graph = track(repo, file_path, block_type, line, commit)
    except CodeElementNotFound as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except BlocktraceError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(serialize_graph(graph))


@main.command("score")
@click.option("--history", "history_path", required=True, type=click.Path(exists=True), help="Graph JSON file.")
@click.option("--oracle", "oracle_path", required=True, type=click.Path(exists=True), help="Oracle JSON file.")
@click.option("--level", type=click.Choice(["commit", "change", "both"]), default="both", show_default=True)
@click.option("--baseline-fair", is_flag=True, help="Drop all but the largest fork branch before scoring.")
def cli_score(history_path: str, oracle_path: str, level: str, baseline_fair: bool):
    """Score a tracked history against an oracle entry."""
    graph = graph_from_wire(json.loads(Path(history_path).read_text()))
    oracle = OracleEntry.load(oracle_path)
    levels = ["commit", "change"] if level == "both" else [level]
    reports = [score(graph, oracle, level=lv, baseline_fair=baseline_fair) for lv in levels]
    click.echo(json.dumps([r.to_json() for r in reports], indent=2))
    for r in reports:
        click.echo(
            f"{r.level:>6}: tp={r.tp} fp={r.fp} fn={r.fn} "
            f"precision={r.precision:.4f} recall={r.recall:.4f}",
            err=True,
        )


@main.group("baseline")
def cli_baseline():
    """Baseline tracers."""


@cli_baseline.command("git-log")
@click.option("--repo", "repo_path", required=True, type=click.Path(exists=True))
@click.option("--file", "file_path", required=True)
@click.option("--start-line", required=True, type=int)
@click.option("--end-line", required=True, type=int)
@click.option("--commit", default="HEAD", show_default=True)
@click.option("--introduced-at", default=None, help="Trim commits older than this one.")
@click.option(
    "--correction",
    "corrections",
    multiple=True,
    help="sha:start,end corrected range for a reformatting commit (repeatable).",
)
def cli_gitlog(repo_path, file_path, start_line, end_line, commit, introduced_at, corrections):
    """Trace a line range with `git log -L` (the paper's second baseline)."""
    fixes = {}
    for item in corrections:
        sha, _, span = item.partition(":")
        a, _, b = span.partition(",")
        fixes[sha] = (int(a), int(b))
    repo = Repository(repo_path)
    try:
        commits = gitlog_baseline(
            repo, file_path, start_line, end_line, commit,
            introduced_at=introduced_at, corrections=fixes,
        )
    except BlocktraceError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(json.dumps(commits, indent=2))


@main.command("serve")
@click.option("--port", default=8712, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--workspace", default="~/.blocktrace", show_default=True, help="Clone/session directory.")
@click.option("--ui-dir", default=None, type=click.Path(exists=True), help="Static frontend bundle to serve at /.")
def cli_serve(port: int, host: str, workspace: str, ui_dir: str | None):
    """Run the REST service (and optionally the web UI)."""
    import uvicorn

    from .service import create_app

    app = create_app(Path(workspace).expanduser(), ui_dir=Path(ui_dir) if ui_dir else None)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
