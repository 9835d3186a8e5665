"""evalkit: scorer arithmetic, oracle round-trips, git log -L baseline, timing."""

from __future__ import annotations

import json

import pytest

from blocktrace.errors import MismatchedElement, RangeRestartNeeded
from blocktrace.evalkit import (
    OracleChange,
    OracleEntry,
    gitlog_baseline,
    oracle_from_graph,
    report_from_counts,
    score,
    time_session,
)
from blocktrace.tracker import track


def java_class(body: str, name: str = "A") -> str:
    return f"public class {name} {{\n{body}}}\n"


IF_METHOD = """\
    int pick(int n) {
        if (n > 0) {
            use(n);
        }
        return n;
    }
"""


def test_table3_overall_row():
    report = report_from_counts(tp=5651, fp=12, fn=13, level="commit")
    assert abs(report.precision - 0.9979) < 0.0001
    assert abs(report.recall - 0.9977) < 0.0001


def test_table4_overall_row():
    report = report_from_counts(tp=6063, fp=31, fn=31, level="change")
    assert abs(report.precision - 0.99491) < 0.0001
    assert report.precision == report.recall


def test_empty_history_vs_empty_oracle_is_perfect():
    from blocktrace.tracker import ChangeHistoryGraph

    report = score(ChangeHistoryGraph(), OracleEntry("r", "", "", ""), level="commit")
    assert report.precision == 1.0 and report.recall == 1.0
    assert (report.tp, report.fp, report.fn) == (0, 0, 0)


def test_score_self_oracle_tp_only(scripted_repo):
    r = scripted_repo
    c1 = r.commit({"A.java": java_class(IF_METHOD)})
    c2 = r.commit({"A.java": java_class(IF_METHOD.replace("use(n);", "use(n); log(n);"))})
    graph = track(r.repository(), "A.java", "if", 3, c2)
    oracle = oracle_from_graph(graph, repository="fixture")
    for level in ("commit", "change"):
        report = score(graph, oracle, level=level)
        assert report.fp == 0 and report.fn == 0
        assert report.precision == 1.0 and report.recall == 1.0


def test_score_monotonic_under_spurious_commit(scripted_repo):
    r = scripted_repo
    c1 = r.commit({"A.java": java_class(IF_METHOD)})
    c2 = r.commit({"A.java": java_class(IF_METHOD.replace("n > 0", "n > 1"))})
    graph = track(r.repository(), "A.java", "if", 3, c2)
    oracle = oracle_from_graph(graph)
    base = score(graph, oracle, level="commit")
    # spuriously drop one expected commit from the oracle: history now has an fp
    pruned = OracleEntry(
        oracle.repository, oracle.file, oracle.block_kind, oracle.block_key, oracle.expected[1:],
        oracle.existed_since_first_commit,
    )
    worse = score(graph, pruned, level="commit")
    assert worse.fp >= base.fp + 1
    assert worse.fn >= base.fn


def test_score_mismatched_element(scripted_repo):
    r = scripted_repo
    c1 = r.commit({"A.java": java_class(IF_METHOD)})
    graph = track(r.repository(), "A.java", "if", 3, c1)
    oracle = oracle_from_graph(graph)
    oracle.block_kind = "while"
    with pytest.raises(MismatchedElement):
        score(graph, oracle, level="commit")


def test_oracle_json_round_trip(tmp_path):
    entry = OracleEntry(
        repository="demo",
        file="A.java",
        block_kind="if",
        block_key="A#if#body[0]#abc",
        expected=[
            OracleChange("d" * 40, ["body-change"]),
            OracleChange("e" * 40, ["introduced"]),
        ],
    )
    path = tmp_path / "oracle.json"
    entry.save(path)
    loaded = OracleEntry.load(path)
    assert loaded == entry
    assert json.loads(path.read_text())["schemaVersion"] == 1


def test_gitlog_baseline_block_edits(scripted_repo):
    r = scripted_repo
    v1 = java_class(IF_METHOD)
    c1 = r.commit({"A.java": v1})
    c2 = r.commit({"A.java": v1.replace("use(n);", "use(n); log(n);")})
    c3 = r.commit({"A.java": v1.replace("use(n);", "use(n); log(n);") + "// trailer\n"})
    c4 = r.commit({"A.java": v1.replace("use(n);", "use(n); log(n); audit(n);")})
    repo = r.repository()
    commits = gitlog_baseline(repo, "A.java", 2, 4, c4)
    assert commits[0] == c4
    assert c2 in commits and c1 in commits
    assert c3 not in commits  # trailing-comment commit does not touch the range


def test_gitlog_baseline_untouched_block(scripted_repo):
    r = scripted_repo
    c1 = r.commit({"A.java": java_class(IF_METHOD)})
    c2 = r.commit({"A.java": java_class(IF_METHOD) + "// unrelated\n"})
    commits = gitlog_baseline(r.repository(), "A.java", 2, 4, c2)
    assert commits == [c1]


def test_gitlog_baseline_reformat_restart(scripted_repo):
    r = scripted_repo
    v1 = java_class(IF_METHOD)
    c1 = r.commit({"A.java": v1})
    reformatted = v1.replace("\n", "\r\n")  # CRLF conversion rewrites every line
    c2 = r.commit({"A.java": reformatted})
    c3 = r.commit({"A.java": reformatted.replace("use(n);", "use(n); log(n);")})
    repo = r.repository()
    with pytest.raises(RangeRestartNeeded) as err:
        gitlog_baseline(repo, "A.java", 2, 4, c3)
    assert err.value.commit_id == c2
    commits = gitlog_baseline(repo, "A.java", 2, 4, c3, corrections={c2: (2, 4)})
    assert c3 in commits and c1 in commits


def test_gitlog_baseline_trims_before_introduction(scripted_repo):
    r = scripted_repo
    base = java_class("    void filler() {\n        f1();\n        f2();\n    }\n")
    c1 = r.commit({"A.java": base})
    with_if = java_class("    void filler() {\n        if (go) {\n            f1();\n        }\n        f2();\n    }\n")
    c2 = r.commit({"A.java": with_if})
    c3 = r.commit({"A.java": with_if.replace("f1();", "f1(); extra();")})
    repo = r.repository()
    untrimmed = gitlog_baseline(repo, "A.java", 3, 5, c3)
    trimmed = gitlog_baseline(repo, "A.java", 3, 5, c3, introduced_at=c2)
    assert c1 in untrimmed
    assert c1 not in trimmed
    assert all(c in untrimmed for c in trimmed)


def test_time_session_conservation(scripted_repo):
    r = scripted_repo
    text = java_class(IF_METHOD)
    c = r.commit({"A.java": text})
    for i in range(4):
        text = text.replace("return n;", f"return n + {i};") if i % 2 == 0 else text.replace(
            "use(n)", f"use(n + {i})"
        )
        c = r.commit({"A.java": text})
    report = time_session(r.repository(), "A.java", "if", 3, c)
    counts = sum(cat["commits"] for cat in report["categories"].values())
    assert counts == report["commits_processed"] == len(report["per_commit"])
    assert report["total_ms"] > 0
    # schema survives a serialization round trip
    assert json.loads(json.dumps(report)) == report


def test_time_session_all_no_change_has_zero_move_fraction(scripted_repo):
    r = scripted_repo
    body = java_class(IF_METHOD + "    void extra() { }\n")
    c = r.commit({"A.java": body})
    for i in range(5):
        body = body.replace("void extra() {", f"void extra() {{ pad{i}();")
        c = r.commit({"A.java": body})
    report = time_session(r.repository(), "A.java", "if", 3, c)
    assert report["categories"]["move"]["commits"] == 0
    assert report["categories"]["move"]["fraction_time"] == 0.0
    # five pad edits plus the root-commit terminal, all resolved without mapping
    assert report["categories"]["no-change"]["commits"] == 6
