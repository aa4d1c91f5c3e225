from __future__ import annotations

import itertools
import time

import pytest
from hypothesis import given, settings, strategies as st

from conftest import GREETING_TYPED, MINI_CORPUS
from mts_gen import random_program
from tau.lang import ast as A
from tau.lang.parser import parse
from tau.lang.sites import apply_annotations, find_annotation_sites
from tau.typesys.checker import (
    check, compatible, diagnostics_report, infer_local, infer_locals, make_env,
)
from tau.typesys.texpr import (
    ANY, BOOLEAN, FUNCTION, NULL, NUMBER, STRING, UNKNOWN, VOID, ArrayT, FuncT, Named, NotAType,
    format_type, parse_type_expr,
)


def with_return(src: str, fn: str, ann: str) -> str:
    sites = find_annotation_sites(parse(src))
    return apply_annotations(src, sites, {s.key: ann for s in sites if str(s.key) == f"Return:{fn}"})


def annotate_vars(program: A.Program) -> str:
    inferred = infer_locals(program)
    sites = [s for s in find_annotation_sites(program) if s.site_kind == "VarDecl" and s.annotation is None]
    return apply_annotations(program.text, sites, {s.key: inferred.get(s.owner, ANY) for s in sites})


def test_typed_greeting_type_checks():
    assert check(parse(GREETING_TYPED)) == []
    assert check(parse(with_return(GREETING_TYPED, "helloGen", "Function"))) == []


def test_wrong_return_is_an_error():
    errors = check(parse(with_return(GREETING_TYPED, "hello", "number")))
    assert len(errors) >= 1
    assert errors[0].code == "return-mismatch"


def test_diagnostics_report_fields():
    text = with_return(GREETING_TYPED, "hello", "number")
    (rec,) = diagnostics_report(check(parse(text)), text)
    assert set(rec) == {"code", "line", "col", "message"}
    assert rec["line"] == 5  # the offending return statement


@pytest.mark.parametrize("src,dst,ok", [
    (STRING, ANY, True), (ANY, STRING, True), (UNKNOWN, STRING, False), (UNKNOWN, ANY, True),
    (UNKNOWN, UNKNOWN, True), (STRING, UNKNOWN, True), (NULL, STRING, False), (NULL, ANY, True),
    (FuncT((STRING,), STRING), FUNCTION, True), (FUNCTION, FuncT((), STRING), False),
    (ArrayT(NUMBER), ArrayT(ANY), True), (ArrayT(NUMBER), ArrayT(STRING), False),
    (FuncT((ANY,), NUMBER), FuncT((NUMBER,), NUMBER), True),
    (FuncT((NUMBER,), NUMBER), FuncT((NUMBER,), STRING), False),
    (Named("A"), Named("A"), True), (Named("A"), Named("B"), False),
])
def test_compatible_examples(src, dst, ok):
    assert compatible(src, dst) is ok


def enumerate_types(depth: int, atoms) -> list:
    level = list(atoms)
    for _ in range(depth - 1):
        prev = level
        level = list(atoms) + [ArrayT(t) for t in prev] + [FuncT((), t) for t in prev]
        level += [FuncT((p,), r) for p, r in itertools.product(prev, prev)]
    return level


def test_compatible_reflexive_exhaustive_depth4():
    types = enumerate_types(4, [NUMBER, ANY, UNKNOWN])
    assert len(types) > 100_000
    assert all(compatible(t, t) for t in types)


def test_compatible_reflexive_other_atoms():
    atoms = [STRING, BOOLEAN, NULL, VOID, FUNCTION, Named("Box")]
    for t in enumerate_types(3, atoms):
        assert compatible(t, t), format_type(t)


def test_parse_type_expr_examples():
    assert parse_type_expr("() => string") == FuncT((), STRING)
    assert parse_type_expr("Array<any>") == ArrayT(ANY)
    assert parse_type_expr("number[][]") == ArrayT(ArrayT(NUMBER))
    with pytest.raises(NotAType):
        parse_type_expr("strin")
    with pytest.raises(NotAType):
        parse_type_expr("string =")
    assert parse_type_expr("box", strict=False) == Named("box")


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(enumerate_types(2, [NUMBER, STRING, ANY, FUNCTION, Named("Box")])))
def test_format_parse_round_trip(t):
    assert parse_type_expr(format_type(t)) == t


def test_infer_local_examples():
    p = parse('let greeting = "Hello";\nlet suffix = "!";\nlet x;\n')
    assert [infer_local(s) for s in p.body] == [STRING, STRING, ANY]
    env = make_env({"morton3": FuncT((NUMBER, NUMBER), NUMBER), "a": NUMBER, "b": NUMBER})
    decl = parse("let x = morton3(a, b);").body[0]
    assert infer_local(decl, env) == NUMBER


def test_infer_local_gives_up_on_any():
    env = make_env({"f": ANY})
    assert infer_local(parse("let x = f(1);").body[0], env) == ANY


def test_check_is_pure():
    for path in sorted(MINI_CORPUS.glob("*.mts"))[:5]:
        p = parse(path.read_text())
        assert check(p) == check(p)


def test_soundness_500_programs():
    start = time.perf_counter()
    worse = []
    for seed in range(500):
        p = parse(random_program(seed))
        before = len(check(p))
        after = len(check(parse(annotate_vars(p))))
        if after > before:
            worse.append(seed)
    assert worse == []
    assert time.perf_counter() - start < 30


@settings(max_examples=100, deadline=None)
@given(st.integers(10_000, 1_000_000))
def test_soundness_property(seed):
    p = parse(random_program(seed))
    assert len(check(parse(annotate_vars(p)))) <= len(check(p))
