from __future__ import annotations

import json
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from conftest import GREETING, FIXTURES, MINI_CORPUS
from mts_gen import random_program
from tau.block_tree import (
    attach_usage_comments, build_tree, collect_usages, decompose, format_tree, make_usage_comment,
    traversal_order,
)
from tau.lang.parser import parse
from tau.lang.printer import print_program

NESTED = """function f(a) {
  function g(b) {
    function h(c) {
      return c;
    }
    return h(b);
  }
  return g(a);
}
"""

ORIGAMI = """class Origami {
  fold(coords, folds) {
    let paper = this._preparePaper(coords, folds.find(f => f[0] === "y"));
    return paper;
  }
  _preparePaper(coords, firstYFold) {
    return coords;
  }
}
"""


def shape(node):
    return (node.name, [shape(c) for c in node.children])


def names(nodes):
    return [n.name for n in nodes]


def test_greeting_tree():
    tree = build_tree(parse(GREETING))
    assert shape(tree) == ("root", [("varNode1", []), ("hello", []), ("helloGen", [("helloHelper", [])])])
    assert [c.kind for c in tree.children] == ["VarGroup", "Decl", "Decl"]


def test_greeting_order():
    assert names(traversal_order(build_tree(parse(GREETING)))) == [
        "helloHelper", "varNode1", "hello", "helloGen", "root"]


def test_single_function():
    tree = build_tree(parse("function f(x) {\n  return x;\n}\n"))
    assert shape(tree) == ("root", [("f", [])])
    assert names(traversal_order(tree)) == ["f", "root"]


def test_nested_three_levels():
    tree = build_tree(parse(NESTED))
    assert shape(tree) == ("root", [("f", [("g", [("h", [])])])])
    assert names(traversal_order(tree)) == ["h", "g", "f", "root"]


def test_leading_comment_belongs_to_node():
    tree = build_tree(parse(GREETING))
    hello = tree.find("hello")
    assert hello.text(GREETING).startswith("// Produces a greeting")


def test_class_methods_are_children():
    tree = build_tree(parse(ORIGAMI))
    assert shape(tree) == ("root", [("Origami", [("fold", []), ("_preparePaper", [])])])


def test_hello_usage_comment():
    p = parse(GREETING)
    tree = build_tree(p)
    usages = collect_usages(tree, "hello", p)
    assert [u.text for u in usages] == ["hello(name) + suffix;"]
    assert make_usage_comment(usages, "hello") == (
        "/* Example usages of 'hello' are shown below:\n  hello(name) + suffix; */")


def test_unused_function_has_no_usages():
    p = parse(NESTED)
    tree = build_tree(p)
    assert collect_usages(tree, "f", p) == []


def test_split_key_three_usages():
    p = parse((FIXTURES / "quality" / "good.mts").read_text())
    assert len(collect_usages(build_tree(p), "splitKey", p)) == 3


def test_method_usage_comment():
    p = parse(ORIGAMI)
    tree = build_tree(p)
    attach_usage_comments(tree, p)
    assert 'this._preparePaper(coords, folds.find(f => f[0] === "y"))' in tree.find("_preparePaper").usage_comment


def test_max_usages_truncation():
    src = "function f(x) {\n  return x;\n}\n" + "".join(f"let v{i} = f({i});\n" for i in range(5))
    p = parse(src)
    usages = collect_usages(build_tree(p), "f", p)
    assert len(usages) == 5
    comment = make_usage_comment(usages, "f", max_usages=3)
    assert comment.count("\n  ") == 3
    assert "f(0)" in comment and "f(2)" in comment and "f(3)" not in comment


def test_usage_comment_window_budget():
    usages = [f"call_{i}_" + "x" * 60 + ";" for i in range(3)]
    comment = make_usage_comment(usages, "g", max_usages=3, window=600)
    assert len(comment) <= 150
    assert "call_0_" in comment and "call_1_" not in comment  # whole statements drop from the end
    assert make_usage_comment(usages, "g", window=64) is None


def test_decompose_outputs():
    text, doc = decompose(parse(GREETING))
    assert text.splitlines()[0].startswith("Root")
    d = json.loads(doc)
    assert set(d) == {"kind", "name", "span", "children"}
    assert d["children"][2]["children"][0]["name"] == "helloHelper"


def check_tree_invariants(tree, source):
    for node in tree.walk():
        for c in node.children:
            assert node.span[0] <= c.span[0] <= c.span[1] <= node.span[1]
            if c.kind == "VarGroup":
                assert node.kind == "Root"
    order = traversal_order(tree)
    seen = set()
    for n in order:
        assert all(id(c) in seen for c in n.children)
        seen.add(id(n))
    assert len(order) == len(list(tree.walk()))


@pytest.mark.parametrize("path", sorted(MINI_CORPUS.glob("*.mts")), ids=lambda p: p.name)
def test_tree_invariants_on_corpus(path):
    src = path.read_text()
    tree = build_tree(parse(src))
    check_tree_invariants(tree, src)
    again = build_tree(parse(print_program(parse(src))))
    assert shape(again) == shape(tree)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_tree_invariants_property(seed):
    src = random_program(seed)
    check_tree_invariants(build_tree(parse(src)), src)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_usage_comments_do_not_touch_source(seed):
    src = random_program(seed)
    p = parse(src)
    tree = build_tree(p)
    before = [n.text(src) for n in tree.walk()]
    attach_usage_comments(tree, p)
    assert [n.text(src) for n in tree.walk()] == before
