"""srcmodel: parsing, identifier algebra, hashing insensitivity, block lookup."""

from __future__ import annotations

import random

import pytest

from blocktrace.errors import CodeElementNotFound, ParseError
from blocktrace.srcmodel import (
    block_identifier,
    build_partial_model,
    locate_block,
    parse_file,
    parent_signature,
)

TWO_METHODS = """\
package com.example;

public class Pair {
    public int first(int a) {
        if (a > 0) {
            return a;
        }
        return 0;
    }

    void second() {
        for (Item it : items) {
            use(it);
        }
    }
}
"""


def test_parse_counts_types_and_methods():
    types = parse_file(TWO_METHODS, "src/com/example/Pair.java")
    assert len(types) == 1
    assert [m.name for m in types[0].methods] == ["first", "second"]


def test_source_folder_split():
    types = parse_file(TWO_METHODS, "src/main/java/com/example/Pair.java")
    assert types[0].source_folder == "src/main/java"
    assert types[0].package == "com.example"


def test_source_folder_disagreeing_package_keeps_full_dir():
    text = TWO_METHODS.replace("com.example", "org.elsewhere")
    types = parse_file(text, "src/com/example/Pair.java")
    assert types[0].source_folder == "src/com/example"


def test_nesting_structure():
    text = """\
class Outer {
    void m() {
        if (flag) {
            for (int i = 0; i < n; i++) {
                work(i);
            }
        }
    }
}
"""
    types = parse_file(text, "Outer.java")
    method = types[0].methods[0]
    top = method.statements[0]
    assert top.kind == "if"
    inner = top.children[0]
    assert inner.kind == "for"
    assert inner.index_in_parent == 0


def test_textually_identical_blocks_get_distinct_identifiers():
    text = """\
class Dup {
    void m() {
        if (ready) {
            fire();
        }
        if (ready) {
            fire();
        }
    }
}
"""
    types = parse_file(text, "Dup.java")
    method = types[0].methods[0]
    first, second = method.statements
    id1 = block_identifier(first, method, "c" * 40)
    id2 = block_identifier(second, method, "c" * 40)
    assert id1 != id2
    assert id1.body_hash == id2.body_hash
    assert id1.parent_signature != id2.parent_signature


def test_top_level_block_has_empty_parent_prefix():
    types = parse_file(TWO_METHODS, "Pair.java")
    method = types[0].methods[0]
    assert parent_signature(method.statements[0]) == "body[0]"


def test_block_identifier_deterministic():
    types = parse_file(TWO_METHODS, "Pair.java")
    method = types[0].methods[0]
    block = method.statements[0]
    assert block_identifier(block, method, "a" * 40) == block_identifier(block, method, "a" * 40)


def test_one_token_edit_changes_only_body_hash():
    before = parse_file(TWO_METHODS, "Pair.java")
    after = parse_file(TWO_METHODS.replace("return a;", "return a2;"), "Pair.java")
    mb, ma = before[0].methods[0], after[0].methods[0]
    ib = block_identifier(mb.statements[0], mb, "a" * 40)
    ia = block_identifier(ma.statements[0], ma, "a" * 40)
    assert ib.body_hash != ia.body_hash
    assert (ib.container, ib.block_type, ib.parent_signature) == (
        ia.container,
        ia.block_type,
        ia.parent_signature,
    )


def test_parse_determinism():
    a = parse_file(TWO_METHODS, "Pair.java")
    b = parse_file(TWO_METHODS, "Pair.java")
    for ma, mb in zip(a[0].methods, b[0].methods):
        assert ma.body_hash == mb.body_hash
        assert [n.text for n in ma.all_nodes()] == [n.text for n in mb.all_nodes()]


def test_hash_comment_and_whitespace_insensitive():
    noisy = TWO_METHODS.replace(
        "if (a > 0) {", "if (a > 0)   { // guard\n            /* noise */"
    ).replace("return 0;", "return 0;  // done")
    clean_m = parse_file(TWO_METHODS, "Pair.java")[0].methods[0]
    noisy_m = parse_file(noisy, "Pair.java")[0].methods[0]
    assert clean_m.body_hash == noisy_m.body_hash
    assert clean_m.statements[0].text_hash == noisy_m.statements[0].text_hash


def test_hash_changes_on_token_change():
    changed = TWO_METHODS.replace("return a;", "return a + 1;")
    clean_m = parse_file(TWO_METHODS, "Pair.java")[0].methods[0]
    changed_m = parse_file(changed, "Pair.java")[0].methods[0]
    assert clean_m.body_hash != changed_m.body_hash
    assert clean_m.normalized_body != changed_m.normalized_body


def test_identifier_uniqueness_within_methods():
    rng = random.Random(7)
    kinds = ["if (x > {0})", "while (x < {0})", "for (int i = 0; i < {0}; i++)"]
    for _ in range(25):
        lines = ["class G {", "  void m() {"]
        for d in range(rng.randint(1, 6)):
            head = rng.choice(kinds).format(rng.randint(0, 2))
            lines.append(f"    {head} {{ log({d}); }}")
        lines += ["  }", "}"]
        types = parse_file("\n".join(lines), "G.java")
        method = types[0].methods[0]
        idents = [
            block_identifier(n, method, "b" * 40)
            for n in method.all_nodes()
            if n.kind != "leaf"
        ]
        assert len(idents) == len(set(idents))


def test_parse_error_has_position():
    with pytest.raises(ParseError) as err:
        parse_file("class Broken { void m() { if (x { } } }", "Broken.java")
    assert err.value.line >= 1


def test_locate_block_by_kind_and_line():
    types = parse_file(TWO_METHODS, "Pair.java")
    from blocktrace.srcmodel import SourceModel

    model = SourceModel(commit="c" * 40, files={"Pair.java": types})
    node, method = locate_block(model, "Pair.java", "if", 5)
    assert node.kind == "if"
    assert method.name == "first"
    with pytest.raises(CodeElementNotFound):
        locate_block(model, "Pair.java", "for", 5)


def test_locate_catch_yields_enclosing_method():
    text = """\
class C {
    void risky() {
        try {
            work();
        } catch (IOException e) {
            log(e);
        }
    }
}
"""
    from blocktrace.srcmodel import SourceModel

    model = SourceModel(commit="c" * 40, files={"C.java": parse_file(text, "C.java")})
    node, method = locate_block(model, "C.java", "catch", 5)
    assert node.kind == "catch"
    assert method.name == "risky"


def test_build_partial_model(scripted_repo):
    r = scripted_repo
    c1 = r.commit({"src/com/example/Pair.java": TWO_METHODS})
    c2 = r.commit({"src/com/example/Pair.java": TWO_METHODS.replace("return 0;", "return -1;")})
    repo = r.repository()
    m1 = build_partial_model(repo, c1, {"src/com/example/Pair.java"})
    m2 = build_partial_model(repo, c2, {"src/com/example/Pair.java"})
    assert set(m1.files) == {"src/com/example/Pair.java"}
    assert m1.methods_in("src/com/example/Pair.java")[0].body_hash != m2.methods_in(
        "src/com/example/Pair.java"
    )[0].body_hash


def test_build_partial_model_file_count(scripted_repo):
    r = scripted_repo
    c1 = r.commit({"A.java": "class A { void a() { } }", "B.java": "class B { void b() { } }"})
    model = build_partial_model(r.repository(), c1, {"A.java", "B.java"})
    assert len(model.files) == 2
