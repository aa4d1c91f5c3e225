"""Evaluation harness: migrate every file of a corpus and aggregate four metrics."""

from __future__ import annotations

import dataclasses
import json
import logging
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Union

from tau.lang.parser import MTSSyntaxError, parse, parse_lenient
from tau.predictor.base import PredictorFailure
from tau.search.config import SearchConfig
from tau.search.engine import migrate
from tau.typedness import score_program
from tau.typesys.checker import check

log = logging.getLogger(__name__)

METRICS = ("typecheck_pct", "avg_typedness_of_typechecking", "avg_type_errors", "avg_syntax_errors")


class CorpusMismatch(ValueError):
    pass


@dataclass
class FileResult:
    path: str
    errors: int
    syntax_errors: int
    typedness: float
    best_candidate_path: Optional[str] = None
    failure: Optional[str] = None

    @property
    def typechecks(self) -> bool:
        return self.errors == 0 and self.syntax_errors == 0


def _r1(x: float) -> float:
    return round(x + 0.0, 1)


@dataclass
class EvalReport:
    total_files: int = 0
    typecheck_count: int = 0
    typecheck_pct: float = 0.0
    avg_typedness_of_typechecking: float = 0.0
    avg_type_errors: float = 0.0
    avg_syntax_errors: float = 0.0
    per_file: list[FileResult] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @classmethod
    def from_results(cls, results: list[FileResult], config: Optional[dict] = None) -> "EvalReport":
        n = len(results)
        ok = [r for r in results if r.typechecks]
        if not n:
            return cls(config=config or {})
        return cls(
            total_files=n,
            typecheck_count=len(ok),
            typecheck_pct=_r1(100.0 * len(ok) / n),
            avg_typedness_of_typechecking=_r1(sum(r.typedness for r in ok) / len(ok)) if ok else 0.0,
            avg_type_errors=_r1(sum(r.errors for r in results) / n),
            avg_syntax_errors=_r1(sum(r.syntax_errors for r in results) / n),
            per_file=results,
            config=config or {},
        )

    @property
    def failures(self) -> int:
        return sum(1 for r in self.per_file if r.failure)

    def to_dict(self) -> dict:
        d = asdict(self)
        for r in d["per_file"]:
            r["typedness"] = _r1(r["typedness"])
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        d = dict(d)
        d["per_file"] = [FileResult(**r) for r in d.get("per_file", [])]
        return cls(**d)

    def table(self, label: str = "") -> str:
        return format_table([(label or self.config.get("mode", "run"), self)])


def file_seed(seed: int, path: str) -> int:
    return zlib.crc32(f"{seed}:{path}".encode())


def evaluate_file(path: str, text: str, predictor, cfg: SearchConfig,
                  out_dir: Optional[Path] = None) -> FileResult:
    cfg = dataclasses.replace(cfg, seed=file_seed(cfg.seed, path))
    try:
        program = parse(text)
    except MTSSyntaxError as exc:
        return FileResult(path, 0, len(exc.errors), 0.0, failure="input does not parse")
    failure = None
    try:
        best_text = migrate(program, predictor, cfg).best.text
    except PredictorFailure as exc:
        log.warning("%s: %s", path, exc)
        best_text, failure = text, f"predictor: {exc}"
    best_path = None
    if out_dir is not None:
        target = out_dir / (Path(path).with_suffix("").as_posix() + ".out.mts")
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(best_text)
        best_path = target.as_posix()
    out, syntax = parse_lenient(best_text)
    if syntax:
        return FileResult(path, 0, len(syntax), 0.0, best_path, failure)
    errors = len(check(out))
    return FileResult(path, errors, 0, score_program(out).score, best_path, failure)


def corpus_files(corpus_dir: Union[str, Path]) -> list[tuple[str, str]]:
    root = Path(corpus_dir)
    return [(p.relative_to(root).as_posix(), p.read_text()) for p in sorted(root.rglob("*.mts"))]


def run_eval(corpus_dir: Union[str, Path], predictor, cfg: SearchConfig = SearchConfig(),
             jobs: int = 1, out_dir: Optional[Union[str, Path]] = None) -> EvalReport:
    files = corpus_files(corpus_dir)
    out = Path(out_dir) if out_dir is not None else None
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            results = list(pool.map(lambda f: evaluate_file(f[0], f[1], predictor, cfg, out), files))
    else:
        results = [evaluate_file(p, t, predictor, cfg, out) for p, t in files]
    return EvalReport.from_results(results, cfg.to_dict())


def compare(a: EvalReport, b: EvalReport, labels: tuple[str, str] = ("a", "b")) -> dict:
    """Side by side metrics of two runs over the same corpus, with ``b - a`` deltas."""
    if [r.path for r in a.per_file] != [r.path for r in b.per_file]:
        raise CorpusMismatch("reports cover different files")
    rows = {labels[0]: {m: getattr(a, m) for m in METRICS},
            labels[1]: {m: getattr(b, m) for m in METRICS}}
    rows["delta"] = {m: _r1(getattr(b, m) - getattr(a, m)) for m in METRICS}
    return rows


_HEAD = ("run", "% type check", "typedness", "type errors", "syntax errors")


def format_table(rows: list[tuple[str, Union[EvalReport, dict]]]) -> str:
    def cells(label, r):
        get = (lambda m: r[m]) if isinstance(r, dict) else (lambda m: getattr(r, m))
        return [label] + [f"{get(m):.1f}" for m in METRICS]

    body = [list(_HEAD)] + [cells(label, r) for label, r in rows]
    widths = [max(len(row[i]) for row in body) for i in range(len(_HEAD))]
    lines = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(row, widths)))
             for row in body]
    return "\n".join(lines) + "\n"


def comparison_table(cmp: dict) -> str:
    return format_table(list(cmp.items()))
