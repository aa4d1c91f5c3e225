"""Corpus construction: hard filters, a weighted quality score, and the split.

Files that survive the hard filters are scored on eight factors. Each factor
is turned into a standard score, oriented so that larger is better, and
min-max scaled to [0, 1] before weighting. Files scoring one standard
deviation or more below the mean are dropped. The rest are split by their
earliest timestamp, and evaluation files have their annotations erased.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from tau.lang import ast as A
from tau.lang.metrics import count_loc, function_spans
from tau.lang.parser import MTSSyntaxError, parse
from tau.lang.sites import EraseUnsupported, erase_text, find_annotation_sites
from tau.typesys.checker import check
from tau.typesys.texpr import BOOLEAN, NULL, NUMBER, STRING, UNDEFINED, VOID, ANY, FunctionTop, leaves

MIN_LOC = 50
MIN_LOC_PER_FUNCTION = 5
CUTOFF = dt.date(2021, 12, 31)

# reasons, in the order the filters run
R_SYNTAX = "does not parse"
R_EXTERNAL = "depends on external modules"
R_TYPECHECK = "does not type check"
R_NO_SITES = "no type annotation locations"
R_SHORT = "fewer than 50 lines of code"
R_NO_FUNCTIONS = "no functions"
R_SHORT_FUNCTIONS = "fewer than five lines of code per function"
R_QUALITY = "quality score below cutoff"
R_ERASE = "EraseUnsupported"

# factor -> (weight, maximize)
WEIGHTS: dict[str, tuple[float, bool]] = {
    "func_ann_density": (0.25, True),
    "var_ann_density": (0.25, True),
    "typedef_density": (0.11, True),
    "dynamism_density": (0.01, False),
    "trivial_type_density": (0.11, False),
    "predefined_type_density": (0.05, False),
    "loc_per_function": (0.11, True),
    "usage_count": (0.11, True),
}
FACTORS = tuple(WEIGHTS)

_PREDEFINED = {NUMBER, STRING, BOOLEAN, NULL, UNDEFINED, VOID}


class TooFewFiles(ValueError):
    pass


@dataclass(frozen=True)
class Pass:
    ok = True


@dataclass(frozen=True)
class Reject:
    reason: str
    detail: str = ""
    ok = False


@dataclass
class FileMetrics:
    func_ann_density: float
    var_ann_density: float
    typedef_density: float
    dynamism_density: float
    trivial_type_density: float
    predefined_type_density: float
    loc_per_function: float
    usage_count: int
    tokens: int

    def vector(self) -> list[float]:
        return [float(getattr(self, f)) for f in FACTORS]


@dataclass
class QualityScore:
    raw_factors: FileMetrics
    z_normalized: dict[str, float]
    weighted: float


@dataclass
class SourceFile:
    path: str
    text: str
    earliest_timestamp: Optional[dt.date] = None


def apply_hard_filters(file: Union[SourceFile, str]) -> Union[Pass, Reject]:
    text = file.text if isinstance(file, SourceFile) else file
    try:
        program = parse(text)
    except MTSSyntaxError as exc:
        return Reject(R_SYNTAX, str(exc))
    errors = check(program)
    external = [e for e in errors if e.code in ("unresolved-name", "unresolved-type")]
    if external:
        return Reject(R_EXTERNAL, external[0].message)
    if errors:
        return Reject(R_TYPECHECK, f"{len(errors)} type error(s)")
    if not find_annotation_sites(program):
        return Reject(R_NO_SITES)
    counts = count_loc(text)
    if counts.loc < MIN_LOC:
        return Reject(R_SHORT, f"{counts.loc} lines")
    if counts.functions == 0:
        return Reject(R_NO_FUNCTIONS)
    if counts.loc_per_function < MIN_LOC_PER_FUNCTION:
        return Reject(R_SHORT_FUNCTIONS, f"{counts.loc_per_function:.2f} per function")
    return Pass()


def dynamism_count(program: A.Program) -> int:
    """Calls to ``eval`` plus ``typeof`` tests."""
    n = 0
    for node in program.walk():
        if isinstance(node, A.Call) and isinstance(node.callee, A.Ident) and node.callee.name == "eval":
            n += 1
        elif isinstance(node, A.Unary) and node.op == "typeof":
            n += 1
    return n


def usage_count(program: A.Program) -> int:
    """Calls of functions defined in the file."""
    names = {name for name, _ in function_spans(program)}
    n = 0
    for node in program.walk():
        if isinstance(node, A.Call):
            c = node.callee
            if isinstance(c, A.Ident) and c.name in names:
                n += 1
            elif isinstance(c, A.Member) and isinstance(c.obj, A.This) and c.prop in names:
                n += 1
    return n


def file_metrics(text: str) -> FileMetrics:
    program = parse(text)
    counts = count_loc(text)
    tokens = max(counts.tokens, 1)
    sites = find_annotation_sites(program)
    func = sum(1 for s in sites if s.site_kind in ("Param", "Return"))
    var = sum(1 for s in sites if s.site_kind in ("VarDecl", "Field"))
    typedefs = sum(1 for n in program.walk() if isinstance(n, (A.InterfaceDecl, A.TypeAlias, A.ClassDecl)))
    written = [leaf for s in sites if s.type is not None for leaf in leaves(s.type)]
    trivial = sum(1 for t in written if t == ANY or isinstance(t, FunctionTop))
    predefined = sum(1 for t in written if t in _PREDEFINED)
    return FileMetrics(
        func_ann_density=func / tokens,
        var_ann_density=var / tokens,
        typedef_density=typedefs / tokens,
        dynamism_density=dynamism_count(program) / tokens,
        trivial_type_density=trivial / tokens,
        predefined_type_density=predefined / tokens,
        loc_per_function=counts.loc_per_function,
        usage_count=usage_count(program),
        tokens=counts.tokens,
    )


def compute_quality(metrics: list[FileMetrics]) -> list[QualityScore]:
    if len(metrics) < 2:
        raise TooFewFiles(f"need at least 2 files, got {len(metrics)}")
    x = np.array([m.vector() for m in metrics], dtype=float)
    std = x.std(axis=0)
    z = np.where(std > 0, (x - x.mean(axis=0)) / np.where(std > 0, std, 1.0), 0.0)
    sign = np.array([1.0 if WEIGHTS[f][1] else -1.0 for f in FACTORS])
    z = z * sign
    lo, hi = z.min(axis=0), z.max(axis=0)
    span = hi - lo
    unit = np.where(span > 0, (z - lo) / np.where(span > 0, span, 1.0), 0.0)
    w = np.array([WEIGHTS[f][0] for f in FACTORS])
    weighted = unit @ w
    return [QualityScore(m, dict(zip(FACTORS, map(float, row))), float(s))
            for m, row, s in zip(metrics, unit, weighted)]


@dataclass
class Selection:
    eval_set: list[str] = field(default_factory=list)
    train_set: list[str] = field(default_factory=list)
    rejected: list[dict] = field(default_factory=list)
    kept: list[str] = field(default_factory=list)
    erased: dict[str, str] = field(default_factory=dict)

    def manifest(self) -> dict:
        return {"kept": self.kept, "eval": self.eval_set, "train": self.train_set, "rejected": self.rejected}


def select(files: list[SourceFile], scores: list[QualityScore], cutoff: dt.date = CUTOFF) -> Selection:
    """Quality cutoff, then date split, then erasure of evaluation files.

    Files with no timestamp go to training.
    """
    out = Selection()
    w = np.array([s.weighted for s in scores])
    threshold = w.mean() - w.std() if len(w) else 0.0
    for f, s in zip(files, scores):
        if s.weighted < threshold:
            out.rejected.append({"path": f.path, "reason": R_QUALITY})
            continue
        if f.earliest_timestamp is not None and f.earliest_timestamp > cutoff:
            try:
                out.erased[f.path] = erase_text(parse(f.text))
            except EraseUnsupported as exc:
                out.rejected.append({"path": f.path, "reason": R_ERASE, "detail": str(exc)})
                continue
            out.eval_set.append(f.path)
        else:
            out.train_set.append(f.path)
        out.kept.append(f.path)
    return out


def read_metadata(path: Union[str, Path]) -> dict[str, dt.date]:
    """JSONL sidecar of ``{path, earliest_timestamp}`` records."""
    out = {}
    for line in Path(path).read_text().splitlines():
        if line.strip():
            rec = json.loads(line)
            out[rec["path"]] = dt.date.fromisoformat(str(rec["earliest_timestamp"])[:10])
    return out


def load_corpus(root: Union[str, Path], metadata: Optional[Union[str, Path]] = None) -> list[SourceFile]:
    root = Path(root)
    dates = read_metadata(metadata) if metadata else {}
    files = []
    for p in sorted(root.rglob("*.mts")):
        rel = p.relative_to(root).as_posix()
        files.append(SourceFile(rel, p.read_text(), dates.get(rel)))
    return files


@dataclass
class CorpusResult:
    selection: Selection
    metrics: dict[str, FileMetrics]
    scores: dict[str, QualityScore]

    def manifest(self) -> dict:
        return self.selection.manifest()

    def metrics_csv(self) -> str:
        buf = io.StringIO()
        names = [f.name for f in fields(FileMetrics)]
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["path", *names, "quality"])
        for path, m in self.metrics.items():
            q = self.scores.get(path)
            writer.writerow([path, *(repr(getattr(m, n)) for n in names), repr(q.weighted) if q else ""])
        return buf.getvalue()


def build_corpus(files: list[SourceFile], cutoff: dt.date = CUTOFF) -> CorpusResult:
    passed: list[SourceFile] = []
    rejected: list[dict] = []
    for f in files:
        verdict = apply_hard_filters(f)
        if verdict.ok:
            passed.append(f)
        else:
            rejected.append({"path": f.path, "reason": verdict.reason})
    metrics = {f.path: file_metrics(f.text) for f in passed}
    if len(passed) >= 2:
        scores = compute_quality([metrics[f.path] for f in passed])
        selection = select(passed, scores, cutoff)
    else:
        scores = []
        selection = select(passed, [QualityScore(metrics[f.path], {}, 0.0) for f in passed], cutoff)
    selection.rejected = rejected + selection.rejected
    return CorpusResult(selection, metrics, {f.path: s for f, s in zip(passed, scores)})


def write_outputs(result: CorpusResult, out_dir: Union[str, Path]) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "manifest.json").write_text(json.dumps(result.manifest(), indent=2) + "\n")
    (out_dir / "metrics.csv").write_text(result.metrics_csv())
    if result.selection.erased:
        erased = out_dir / "eval"
        for path, text in result.selection.erased.items():
            target = erased / path
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(text)
