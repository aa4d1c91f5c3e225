from __future__ import annotations

import datetime as dt
import json
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import FIXTURES, MINI_CORPUS
from tau.corpus import (
    CUTOFF, FACTORS, R_ERASE, R_EXTERNAL, R_NO_FUNCTIONS, R_NO_SITES, R_QUALITY, R_SHORT,
    R_SHORT_FUNCTIONS, R_SYNTAX, R_TYPECHECK, WEIGHTS, FileMetrics, SourceFile, TooFewFiles,
    apply_hard_filters, build_corpus, compute_quality, dynamism_count, file_metrics, load_corpus,
    select, write_outputs,
)
from tau.lang.parser import parse

EXCLUDED = FIXTURES / "excluded"
QUALITY = FIXTURES / "quality"


def typed_lines(n: int) -> str:
    return "".join(f"let v{i}: number = {i};\n" for i in range(n))


def long_function(name: str, body_lines: int) -> str:
    body = "".join(f"  let t{i}: number = x + {i};\n" for i in range(body_lines - 3))
    return f"function {name}(x: number): number {{\n{body}  return x;\n}}\n"


# -- hard filters ---------------------------------------------------------------------


def test_excluded_fixtures():
    assert apply_hard_filters((EXCLUDED / "a_no_code.mts").read_text()).reason == R_NO_SITES
    assert apply_hard_filters((EXCLUDED / "b_no_anns.mts").read_text()).reason == R_NO_SITES
    assert apply_hard_filters((EXCLUDED / "c_too_short.mts").read_text()).reason == R_SHORT


def test_reason_strings_quote_the_filters():
    assert R_NO_SITES == "no type annotation locations"
    assert R_SHORT == "fewer than 50 lines of code"
    assert R_SHORT_FUNCTIONS == "fewer than five lines of code per function"


def test_filter_reasons_in_order():
    assert apply_hard_filters("let x: = ;").reason == R_SYNTAX
    assert apply_hard_filters("let x = lodash.map(1);\n").reason == R_EXTERNAL
    assert apply_hard_filters("let x: number = \"s\";\n").reason == R_TYPECHECK
    assert apply_hard_filters(typed_lines(10)).reason == R_SHORT
    assert apply_hard_filters(typed_lines(60)).reason == R_NO_FUNCTIONS
    short_fns = typed_lines(52) + long_function("f", 4) + long_function("g", 4)
    assert apply_hard_filters(short_fns).reason == R_SHORT_FUNCTIONS
    assert apply_hard_filters(typed_lines(52) + long_function("f", 8)).ok


def test_sixty_lines_two_tiny_functions():
    src = typed_lines(52) + long_function("f", 4) + long_function("g", 4)
    from tau.lang.metrics import count_loc
    counts = count_loc(src)
    assert counts.loc == 60 and counts.functions == 2 and counts.loc_per_function == 4.0
    assert apply_hard_filters(src).reason == R_SHORT_FUNCTIONS


def test_unknown_type_is_external():
    assert apply_hard_filters("let x: Widget = null;\n").reason == R_EXTERNAL


def test_mini_corpus_files_pass_syntax_and_types():
    for p in sorted(MINI_CORPUS.glob("*.mts")):
        verdict = apply_hard_filters(p.read_text())
        assert getattr(verdict, "reason", None) not in (R_SYNTAX, R_EXTERNAL, R_TYPECHECK), p.name


# -- metrics and quality --------------------------------------------------------------


@pytest.mark.parametrize("src,n", [
    ("let r = eval(code);\n", 1),
    ("let r = 1 + 2;\n", 0),
    ("eval(a);\neval(b);\nlet s = eval(c);\n", 3),
    ("let t = typeof x;\n", 1),
])
def test_dynamism_count(src, n):
    assert dynamism_count(parse(src)) == n


def test_weights_sum_to_one():
    assert math.isclose(sum(w for w, _ in WEIGHTS.values()), 1.0)
    assert [f for f, (_, up) in WEIGHTS.items() if not up] == [
        "dynamism_density", "trivial_type_density", "predefined_type_density"]


def test_good_beats_bad():
    good = file_metrics((QUALITY / "good.mts").read_text())
    bad = file_metrics((QUALITY / "bad.mts").read_text())
    g, b = compute_quality([good, bad])
    assert g.weighted > b.weighted
    assert good.usage_count >= 3


def test_identical_files_score_equal():
    m = file_metrics((QUALITY / "good.mts").read_text())
    scores = compute_quality([m, m, m])
    assert len({s.weighted for s in scores}) == 1


def test_too_few_files():
    with pytest.raises(TooFewFiles):
        compute_quality([file_metrics((QUALITY / "good.mts").read_text())])


def metrics(*vals) -> FileMetrics:
    return FileMetrics(*vals[:7], int(vals[7]), 100)


# Five hand-built files. Columns follow FACTORS.
SHEET = [
    metrics(0.10, 0.05, 0.01, 0.000, 0.02, 0.08, 9.0, 4),
    metrics(0.02, 0.00, 0.00, 0.010, 0.05, 0.01, 4.0, 0),
    metrics(0.06, 0.03, 0.02, 0.000, 0.00, 0.05, 12.0, 7),
    metrics(0.08, 0.01, 0.00, 0.005, 0.01, 0.03, 6.5, 2),
    metrics(0.04, 0.02, 0.01, 0.000, 0.03, 0.02, 20.0, 1),
]


def spreadsheet(rows: list[FileMetrics]) -> list[float]:
    """Column by column, as one would lay it out in a spreadsheet."""
    n = len(rows)
    totals = [0.0] * n
    for f in FACTORS:
        weight, maximize = WEIGHTS[f]
        col = [float(getattr(r, f)) for r in rows]
        mean = sum(col) / n
        sd = math.sqrt(sum((x - mean) ** 2 for x in col) / n)
        z = [(x - mean) / sd if sd else 0.0 for x in col]
        if not maximize:
            z = [-v for v in z]
        lo, hi = min(z), max(z)
        unit = [(v - lo) / (hi - lo) if hi > lo else 0.0 for v in z]
        totals = [t + weight * u for t, u in zip(totals, unit)]
    return totals


def test_spreadsheet_oracle():
    got = [s.weighted for s in compute_quality(SHEET)]
    want = spreadsheet(SHEET)
    assert all(abs(a - b) <= 1e-9 for a, b in zip(got, want))
    assert got.index(max(got)) == 0 and got.index(min(got)) == 1


def test_two_files_by_hand():
    # with two files every normalized factor is 0 or 1, so a score is the
    # sum of the weights of the factors on which that file is better
    a = metrics(0.10, 0.00, 0.01, 0.00, 0.05, 0.00, 8.0, 3)
    b = metrics(0.05, 0.02, 0.01, 0.01, 0.00, 0.04, 6.0, 5)
    sa, sb = compute_quality([a, b])
    assert abs(sa.weighted - (0.25 + 0.01 + 0.05 + 0.11)) <= 1e-9
    assert abs(sb.weighted - (0.25 + 0.11 + 0.11)) <= 1e-9


def test_normalized_factors_in_unit_interval():
    for s in compute_quality(SHEET):
        assert all(0.0 <= v <= 1.0 for v in s.z_normalized.values())


def random_metrics(r: random.Random) -> FileMetrics:
    return metrics(*(r.random() * 0.1 for _ in range(6)), r.uniform(2, 30), r.randint(0, 10))


@settings(max_examples=100)
@given(st.integers(0, 10**6), st.integers(2, 12))
def test_permutation_invariance(seed, n):
    r = random.Random(seed)
    rows = [random_metrics(r) for _ in range(n)]
    perm = list(range(n))
    r.shuffle(perm)
    a = [s.weighted for s in compute_quality(rows)]
    b = [s.weighted for s in compute_quality([rows[i] for i in perm])]
    assert all(abs(a[i] - b[k]) < 1e-12 for k, i in enumerate(perm))


def kept(rows):
    files = [SourceFile(f"f{i}.mts", "") for i in range(len(rows))]
    return set(select(files, compute_quality(rows)).kept)


@settings(max_examples=200)
@given(st.integers(0, 10**6), st.integers(2, 10), st.floats(0.0, 0.2))
def test_select_monotone_in_func_density(seed, n, bump):
    r = random.Random(seed)
    rows = [random_metrics(r) for _ in range(n)]
    i = r.randrange(n)
    before = kept(rows)
    raised = list(rows)
    m = rows[i]
    raised[i] = FileMetrics(m.func_ann_density + bump, *m.vector()[1:7], m.usage_count, m.tokens)
    if f"f{i}.mts" in before:
        assert f"f{i}.mts" in kept(raised)


# -- selection ------------------------------------------------------------------------


def test_equal_scores_none_dropped():
    m = file_metrics((QUALITY / "good.mts").read_text())
    files = [SourceFile(f"f{i}", "") for i in range(4)]
    sel = select(files, compute_quality([m] * 4))
    assert sel.kept == [f.path for f in files]


def test_low_quality_dropped():
    good = file_metrics((QUALITY / "good.mts").read_text())
    bad = file_metrics((QUALITY / "bad.mts").read_text())
    files = [SourceFile(f"g{i}", "") for i in range(4)] + [SourceFile("bad", "")]
    sel = select(files, compute_quality([good] * 4 + [bad]))
    assert sel.rejected == [{"path": "bad", "reason": R_QUALITY}]


def test_date_split_and_erasure():
    from conftest import GREETING_TYPED
    text = GREETING_TYPED
    good = file_metrics(text)
    files = [SourceFile("old", text, dt.date(2021, 12, 31)), SourceFile("new", text, dt.date(2022, 1, 1)),
             SourceFile("undated", text)]
    sel = select(files, compute_quality([good] * 3))
    assert sel.eval_set == ["new"] and sel.train_set == ["old", "undated"]
    assert ": string" not in sel.erased["new"]


@pytest.mark.parametrize("path", sorted((FIXTURES / "erase_fail").glob("*.mts")), ids=lambda p: p.name)
def test_erase_failures_rejected(path):
    text = path.read_text()
    good = file_metrics((QUALITY / "good.mts").read_text())
    files = [SourceFile(path.name, text, dt.date(2023, 5, 1)), SourceFile("other", "", None)]
    sel = select(files, compute_quality([good, good]))
    assert [r["reason"] for r in sel.rejected] == [R_ERASE]
    assert sel.eval_set == []


def test_build_corpus_end_to_end(tmp_path):
    root = tmp_path / "src"
    root.mkdir()
    for p in list(EXCLUDED.glob("*.mts")) + list(QUALITY.glob("*.mts")):
        (root / p.name).write_text(p.read_text())
    good_long = (QUALITY / "good.mts").read_text()
    (root / "later.mts").write_text(good_long)
    meta = tmp_path / "meta.jsonl"
    meta.write_text(json.dumps({"path": "later.mts", "earliest_timestamp": "2022-03-04T10:00:00Z"}) + "\n")
    result = build_corpus(load_corpus(root, meta))
    reasons = {r["path"]: r["reason"] for r in result.manifest()["rejected"]}
    assert reasons["a_no_code.mts"] == R_NO_SITES
    assert reasons["c_too_short.mts"] == R_SHORT
    out = tmp_path / "out"
    write_outputs(result, out)
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest) == {"kept", "eval", "train", "rejected"}
    header = (out / "metrics.csv").read_text().splitlines()[0].split(",")
    assert header[0] == "path" and header[-1] == "quality"
    if "later.mts" in manifest["eval"]:
        assert (out / "eval" / "later.mts").exists()
    assert CUTOFF == dt.date(2021, 12, 31)
