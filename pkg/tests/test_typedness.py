from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from conftest import GREETING, GREETING_TYPED
from tau.lang.parser import parse
from tau.lang.sites import apply_annotations, find_annotation_sites
from tau.typedness import MISSING, score_leaf, score_program, score_types
from tau.typesys.texpr import (
    ANY, BOOLEAN, FUNCTION, NULL, NUMBER, STRING, UNDEFINED, UNKNOWN, VOID, ArrayT, FuncT, Named,
)

LEAVES = [UNKNOWN, ANY, MISSING, FUNCTION, NULL, UNDEFINED, NUMBER, STRING, BOOLEAN, VOID, Named("EntityId")]


def annotate_all(src: str, value) -> str:
    sites = find_annotation_sites(parse(src))
    return apply_annotations(src, sites, {s.key: value for s in sites})


@pytest.mark.parametrize("leaf,score", [
    (UNKNOWN, 1.0), (ANY, 0.5), (MISSING, 0.5), (FUNCTION, 0.5), (NULL, 0.2), (UNDEFINED, 0.2),
    (NUMBER, 0.0), (STRING, 0.0), (VOID, 0.0), (Named("EntityId"), 0.0),
])
def test_leaf_table(leaf, score):
    assert score_leaf(leaf) == score


def test_all_unknown_scores_1000():
    assert score_program(parse(annotate_all(GREETING, "unknown"))).score == 1000.0


def test_descriptive_candidate_scores_zero():
    r = score_program(parse(GREETING_TYPED))
    assert r.score == 0.0
    assert r.leaf_count == 7


def test_alternate_candidate():
    alt = GREETING_TYPED.replace("): () => string {", "): Function {")
    r = score_program(parse(alt))
    assert r.leaf_count == 7
    assert abs(r.score - 1000 * 0.5 / 7) < 1e-9
    assert r.to_dict() == {"leaf_count": 7, "penalty_sum": 0.5, "score": 71.4}


def test_array_any_is_one_half_leaf():
    r = score_types([ArrayT(ANY)])
    assert (r.leaf_count, r.penalty_sum) == (1, 0.5)


def test_function_type_leaves():
    r = score_types([FuncT((ANY, NUMBER), NULL)])
    assert r.leaf_count == 3
    assert r.penalty_sum == pytest.approx(0.7)


def test_missing_annotations_count():
    r = score_program(parse(GREETING))
    assert (r.leaf_count, r.score) == (7, 500.0)


def test_empty_program_is_zero():
    assert score_program(parse("")).score == 0.0


def test_skip_kinds_score_as_missing():
    r = score_program(parse(GREETING_TYPED), skip_kinds=("VarDecl",))
    assert r.score == pytest.approx(1000 * 1.0 / 7)


leaf = st.sampled_from(LEAVES)


def shaped(t):
    return st.one_of(st.just(t), st.builds(ArrayT, st.just(t)))


@settings(max_examples=300)
@given(st.lists(leaf, min_size=1, max_size=12), st.data())
def test_score_bounds_and_monotonicity(anns, data):
    base = score_types(anns)
    assert 0.0 <= base.score <= 1000.0
    i = data.draw(st.integers(0, len(anns) - 1))
    lower = data.draw(st.sampled_from([t for t in LEAVES if score_leaf(t) <= score_leaf(anns[i])]))
    changed = list(anns)
    changed[i] = lower
    assert score_types(changed).score <= base.score + 1e-12


@settings(max_examples=200)
@given(st.lists(st.lists(leaf, min_size=1, max_size=6), min_size=2, max_size=6), st.integers(1, 10))
def test_argmin_stable_under_zero_leaves(cands, pad):
    scores = [score_types(c).score for c in cands]
    padded = [score_types(c + [NUMBER] * pad).score for c in cands]
    best = min(range(len(cands)), key=lambda i: (scores[i], i))
    # same leaf counts keep the order exactly; different counts only need the winner to stay minimal
    same_len = len({len(c) for c in cands}) == 1
    if same_len:
        assert min(range(len(cands)), key=lambda i: (padded[i], i)) == best


@settings(max_examples=200)
@given(st.lists(leaf, min_size=1, max_size=10))
def test_extremes(anns):
    r = score_types(anns)
    assert (r.score == 1000.0) == all(a == UNKNOWN for a in anns)
    assert (r.score == 0.0) == all(score_leaf(a) == 0.0 for a in anns)
