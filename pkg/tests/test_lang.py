from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from conftest import GREETING, GREETING_TYPED, MINI_CORPUS
from mts_gen import random_program
from tau.lang.lexer import count_tokens, tokenize
from tau.lang.metrics import count_loc
from tau.lang.parser import MTSSyntaxError, parse, parse_lenient
from tau.lang.printer import print_program
from tau.lang.sites import (
    EraseUnsupported, SiteOutOfRange, apply_annotations, erase_annotations, erase_text,
    find_annotation_sites, insert_hole,
)
from tau.typesys.texpr import FUNCTION, STRING, FuncT


def kinds(text):
    return [s.site_kind for s in find_annotation_sites(parse(text))]


def test_greeting_has_seven_sites():
    sites = find_annotation_sites(parse(GREETING))
    assert len(sites) == 7
    assert [s.site_index for s in sites] == list(range(7))
    assert all(s.annotation is None for s in sites)
    assert [str(s.key) for s in sites] == [
        "VarDecl:greeting", "VarDecl:suffix", "Param:hello.name", "Return:hello",
        "Param:helloGen.name", "Return:helloGen", "Return:helloGen.helloHelper",
    ]


def test_empty_program_has_no_sites():
    assert find_annotation_sites(parse("")) == []
    assert parse("").body == []


def test_missing_type_is_one_syntax_error():
    _, errors = parse_lenient("let x: = 5;")
    assert len(errors) == 1
    assert errors[0].line == 1
    with pytest.raises(MTSSyntaxError) as info:
        parse("let x: = 5;")
    assert len(info.value.errors) == 1


@pytest.mark.parametrize("src", ["function (", "let = 3;", "class { x", "if (a { }", "let x: number[ = 1;"])
def test_malformed_inputs_report_errors(src):
    _, errors = parse_lenient(src)
    assert errors


def test_site_kinds_cover_fields_and_interfaces():
    src = """interface P {
  x: number;
  name;
}
class C {
  v;
  constructor(v) {
    this.v = v;
  }
  get() {
    return this.v;
  }
}
"""
    ks = kinds(src)
    assert ks.count("InterfaceProp") == 2  # annotated or not, both props are sites
    assert "Field" in ks and "Param" in ks and "Return" in ks


def test_constructor_has_no_return_site():
    src = "class C {\n  constructor(v) {\n    this.v = v;\n  }\n  v;\n}\n"
    sites = find_annotation_sites(parse(src))
    assert not any(s.site_kind == "Return" and s.name == "constructor" for s in sites)


def test_duplicate_names_get_distinct_keys():
    src = "function f(a) {\n  return a;\n}\nfunction f(a) {\n  return a;\n}\n"
    keys = [s.key for s in find_annotation_sites(parse(src))]
    assert len(set(keys)) == len(keys)


def test_apply_annotations_round_trip():
    program = parse(GREETING)
    sites = find_annotation_sites(program)
    mapping = {s.key: STRING for s in sites}
    mapping[sites[5].key] = FuncT((), STRING)
    out = apply_annotations(GREETING, sites, mapping)
    assert out == GREETING_TYPED
    assert erase_text(parse(out)) == GREETING


def test_apply_replaces_existing_annotations():
    out = apply_annotations(GREETING_TYPED, find_annotation_sites(parse(GREETING_TYPED)),
                            {s.key: FUNCTION for s in find_annotation_sites(parse(GREETING_TYPED))
                             if str(s.key) == "Return:helloGen"})
    assert "function helloGen(name: string): Function {" in out


def test_insert_hole():
    sites = find_annotation_sites(parse(GREETING))
    holed = insert_hole(GREETING, sites[5])
    assert "function helloGen(name): _hole_ {" in holed
    typed = find_annotation_sites(parse(GREETING_TYPED))
    assert "function helloGen(name: string): _hole_ {" in insert_hole(GREETING_TYPED, typed[5])
    with pytest.raises(SiteOutOfRange):
        insert_hole(GREETING[:10], sites[6])


def test_erase_rejects_unsupported_constructs():
    with pytest.raises(EraseUnsupported):
        erase_text(parse("type N = number;\nlet x: N = 1;\n"))
    with pytest.raises(EraseUnsupported):
        erase_text(parse("let x = (1 as any);\n"))


def test_erase_annotations_returns_program():
    p = erase_annotations(parse(GREETING_TYPED))
    assert all(s.annotation is None for s in find_annotation_sites(p))


def test_tokens_and_loc():
    assert count_tokens("let x = 1;") == 5
    assert not tokenize("let x = 1; // hi").errors
    loc = count_loc(GREETING)
    assert loc.functions == 3
    assert loc.loc == 11


@pytest.mark.parametrize("path", sorted(MINI_CORPUS.glob("*.mts")), ids=lambda p: p.name)
def test_printer_round_trip_on_corpus(path):
    p = parse(path.read_text())
    printed = print_program(p)
    assert parse(printed).shape() == p.shape()
    assert print_program(parse(printed)) == printed


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_printer_round_trip_property(seed):
    src = random_program(seed)
    p = parse(src)
    printed = print_program(p)
    assert parse(printed).shape() == p.shape()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_erase_then_sites_unannotated(seed):
    p = parse(random_program(seed))
    before = find_annotation_sites(p)
    erased = parse(erase_text(p))
    after = find_annotation_sites(erased)
    assert [s.key for s in after] == [s.key for s in before]
    assert all(s.annotation is None for s in after)


@settings(max_examples=50, deadline=None)
@given(st.text(alphabet="let x=1;(){}:[]\"'/\n abc", max_size=60))
def test_lenient_parse_never_crashes(src):
    parse_lenient(src)
