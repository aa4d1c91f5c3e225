from __future__ import annotations

import gzip
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import GREETING_TYPED, SUM_THREE
from mts_gen import random_program
from tau.fit_prep import (
    PSM, SPM, FitConfig, NoAnnotationAtSite, Spans, build_examples, emit_dataset, examples_for_file,
    format_example, reconstruct, split_at_site, strip_suffix_annotations,
)
from tau.lang.parser import parse
from tau.lang.sites import SiteOutOfRange, erase_text, find_annotation_sites
from tau.predictor import Sentinels
from tau.typesys.texpr import parse_type_expr

SUFFIX = ", c) {\n  return a + b + c;\n}"


class FixedRng:
    def __init__(self, *values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0)


def sum_three_spans() -> Spans:
    p = parse(SUM_THREE)
    spans = split_at_site(p, 1)
    suffix, stripped = strip_suffix_annotations(spans.suffix, find_annotation_sites(p)[2:], FixedRng(0.0),
                                                len(spans.prefix) + len(spans.middle))
    assert stripped
    return Spans(spans.prefix, spans.middle, suffix)


def test_split_sum_three():
    spans = split_at_site(parse(SUM_THREE), 1)
    assert spans.prefix == "function sumThree(a: number, b: "
    assert spans.middle == "number"
    assert spans.suffix == ", c: number): number {\n  return a + b + c;\n}"


def test_strip_suffix():
    assert sum_three_spans().suffix == SUFFIX
    p = parse(SUM_THREE)
    spans = split_at_site(p, 1)
    kept, stripped = strip_suffix_annotations(spans.suffix, find_annotation_sites(p)[2:], FixedRng(0.95),
                                              len(spans.prefix) + len(spans.middle))
    assert not stripped and kept == spans.suffix


def test_psm_layout_sum_three():
    text = format_example(sum_three_spans(), PSM)
    assert text == "<PRE>function sumThree(a: number, b: <SUF>" + SUFFIX + "<M>number"


def test_spm_layout():
    assert format_example(sum_three_spans(), SPM) == (
        "<PRE><SUF>" + SUFFIX + "<M>function sumThree(a: number, b: number")


def test_empty_suffix_and_unknown_format():
    assert format_example(Spans("p", "m", ""), PSM) == "<PRE>p<SUF><M>m"
    with pytest.raises(ValueError):
        format_example(Spans("p", "m", "s"), "MSP")


def test_split_errors():
    with pytest.raises(NoAnnotationAtSite):
        split_at_site(parse("function f(x) {\n  return x;\n}\n"), 0)
    with pytest.raises(SiteOutOfRange):
        split_at_site(parse(SUM_THREE), 9)


def test_first_and_last_site():
    src = "let x: number = 1;\n"
    spans = split_at_site(parse(src), 0)
    assert spans.prefix == "let x: " and spans.middle == "number"
    last = split_at_site(parse(SUM_THREE), 3)
    assert find_annotation_sites(parse(last.prefix + last.middle + last.suffix))[3].annotation is not None
    assert ":" not in last.suffix


def test_four_records_for_sum_three():
    assert len(examples_for_file("sumThree.mts", SUM_THREE)) == 4


def test_per_file_caps():
    assert len(examples_for_file("f", GREETING_TYPED, FitConfig(max_per_file=2))) == 2
    assert len(examples_for_file("f", GREETING_TYPED, FitConfig(one_per_file=True))) == 1


def typed_corpus(n_examples: int):
    corpus, total, seed = [], 0, 0
    while total < n_examples:
        text = random_program(seed)
        k = sum(s.annotation is not None for s in find_annotation_sites(parse(text)))
        corpus.append((f"gen/{seed:05d}.mts", text))
        total += k
        seed += 1
    return corpus


def test_statistics_over_5000_examples():
    corpus = typed_corpus(5000)
    examples, manifest = build_examples(corpus, FitConfig(seed=1))
    examples = examples[:5000]
    assert len(examples) == 5000
    stripped = np.mean([e.suffix_stripped for e in examples])
    psm = np.mean([e.format == PSM for e in examples])
    assert 0.88 <= stripped <= 0.92
    assert 0.48 <= psm <= 0.52
    sources = dict(corpus)
    for e in examples:
        parse_type_expr(e.middle)
        if not e.suffix_stripped:
            assert reconstruct(e.text(), e.format) == sources[e.file_id]


def test_stripped_examples_keep_prefix_types():
    corpus = typed_corpus(300)
    examples, _ = build_examples(corpus, FitConfig(seed=2))
    sources = dict(corpus)
    for e in examples:
        src = sources[e.file_id]
        assert src.startswith(e.prefix + e.middle)
        if e.suffix_stripped:
            whole = reconstruct(e.text(), e.format)
            assert whole == e.prefix + e.middle + e.suffix
            assert erase_text(parse(whole)) == erase_text(parse(src))


def test_skips_unparseable_files():
    examples, manifest = build_examples([("bad.mts", "let x: = 1;"), ("ok.mts", SUM_THREE)])
    assert manifest.skipped == 1 and manifest.files == 1 and len(examples) == 4


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([PSM, SPM]),
       st.tuples(st.sampled_from(["<A>", "[[p]]"]), st.sampled_from(["<B>", "[[s]]"]), st.sampled_from(["<C>", "[[m]]"])))
def test_reconstruction_property(seed, fmt, sent):
    sentinels = Sentinels(*sent)
    src = random_program(seed)
    p = parse(src)
    for s in find_annotation_sites(p):
        if s.annotation is None:
            continue
        spans = split_at_site(p, s.site_index)
        assert reconstruct(format_example(spans, fmt, sentinels), fmt, sentinels) == src


def read_shard(path):
    data = path.read_bytes()
    if path.suffix == ".gz":
        data = gzip.decompress(data)
    return [json.loads(line) for line in data.decode().splitlines()]


def test_emit_dataset(tmp_path):
    corpus = [("sumThree.mts", SUM_THREE), ("greeting_typed.mts", GREETING_TYPED)]
    m = emit_dataset(corpus, tmp_path / "a", FitConfig(seed=3))
    recs = read_shard(tmp_path / "a" / "shard-00000.jsonl")
    assert len(recs) == m.records == 11
    assert set(recs[0]) == {"file_id", "site_index", "format", "text", "suffix_stripped"}
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["records"] == 11 and manifest["shards"] == ["shard-00000.jsonl"]


def test_emit_is_deterministic(tmp_path):
    corpus = typed_corpus(200)
    for d in ("a", "b"):
        emit_dataset(corpus, tmp_path / d, FitConfig(seed=4), compress=True)
    for name in ("shard-00000.jsonl.gz", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert len(read_shard(tmp_path / "a" / "shard-00000.jsonl.gz")) > 0


def test_emit_empty_corpus(tmp_path):
    m = emit_dataset([], tmp_path)
    assert m.records == 0
    assert (tmp_path / "shard-00000.jsonl").read_text() == ""


def test_config_validation():
    with pytest.raises(ValueError):
        FitConfig(psm_ratio=1.5)
