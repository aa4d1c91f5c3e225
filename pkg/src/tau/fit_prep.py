"""Fill-in-the-type training examples.

Each example takes one written annotation of a typed file as the middle
span. Annotations before it stay in the prefix. Annotations after it are
removed from the suffix with probability ``strip_prob``, decided once per
example.
"""

from __future__ import annotations

import gzip
import io
import json
import logging
import zlib
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from tau.lang import ast as A
from tau.lang.parser import MTSSyntaxError, parse
from tau.lang.sites import AnnotationSite, SiteOutOfRange, find_annotation_sites
from tau.predictor.base import Sentinels

log = logging.getLogger(__name__)

PSM, SPM = "PSM", "SPM"


class NoAnnotationAtSite(ValueError):
    pass


@dataclass
class Spans:
    prefix: str
    middle: str
    suffix: str


@dataclass
class FitExample:
    file_id: str
    site_index: int
    format: str
    prefix: str
    middle: str
    suffix: str
    suffix_stripped: bool

    def text(self, sentinels: Sentinels = Sentinels()) -> str:
        return format_example(Spans(self.prefix, self.middle, self.suffix), self.format, sentinels)

    def record(self, sentinels: Sentinels = Sentinels()) -> dict:
        return {"file_id": self.file_id, "site_index": self.site_index, "format": self.format,
                "text": self.text(sentinels), "suffix_stripped": self.suffix_stripped}


def _site(program: A.Program, site_index: int) -> tuple[AnnotationSite, list[AnnotationSite]]:
    sites = find_annotation_sites(program)
    if not 0 <= site_index < len(sites):
        raise SiteOutOfRange(f"site {site_index} of {len(sites)}")
    site = sites[site_index]
    if site.annotation is None:
        raise NoAnnotationAtSite(f"site {site_index} ({site.name}) has no annotation")
    return site, sites


def split_at_site(program: A.Program, site_index: int) -> Spans:
    site, _ = _site(program, site_index)
    a, b = site.annotation.span
    text = program.text
    return Spans(text[:a], text[a:b], text[b:])


def strip_suffix_annotations(suffix: str, sites: Iterable[AnnotationSite], rng: np.random.Generator,
                             offset: int = 0, prob: float = 0.9) -> tuple[str, bool]:
    """Erase every annotation of ``sites`` lying in the suffix, with probability ``prob``.

    ``offset`` is the position of the suffix in the file the sites refer to.
    Returns the new suffix and whether it was stripped.
    """
    if rng.random() >= prob:
        return suffix, False
    spans = sorted((s.ann_span for s in sites if s.annotation is not None and s.ann_span[0] >= offset),
                   reverse=True)
    for a, b in spans:
        suffix = suffix[:a - offset] + suffix[b - offset:]
    return suffix, True


def format_example(spans: Spans, fmt: str = PSM, sentinels: Sentinels = Sentinels()) -> str:
    p, m, s = spans.prefix, spans.middle, spans.suffix
    if fmt == PSM:
        return sentinels.pre + p + sentinels.suf + s + sentinels.mid + m
    if fmt == SPM:
        return sentinels.pre + sentinels.suf + s + sentinels.mid + p + m
    raise ValueError(f"unknown format {fmt!r}")


def reconstruct(text: str, fmt: str, sentinels: Sentinels = Sentinels()) -> str:
    """Undo ``format_example``: the file the example was cut from (before stripping)."""
    if fmt == PSM:
        body = text[len(sentinels.pre):]
        p, rest = body.split(sentinels.suf, 1)
        s, m = rest.split(sentinels.mid, 1)
        return p + m + s
    body = text[len(sentinels.pre) + len(sentinels.suf):]
    s, pm = body.split(sentinels.mid, 1)
    return pm + s


@dataclass
class FitConfig:
    psm_ratio: float = 0.5
    strip_prob: float = 0.9
    seed: int = 0
    max_per_file: Optional[int] = None
    one_per_file: bool = False

    def __post_init__(self):
        if not 0.0 <= self.psm_ratio <= 1.0 or not 0.0 <= self.strip_prob <= 1.0:
            raise ValueError("psm_ratio and strip_prob must lie in [0, 1]")


def file_rng(seed: int, file_id: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(file_id.encode())])


def examples_for_file(file_id: str, text: str, cfg: FitConfig = FitConfig()) -> list[FitExample]:
    program = parse(text)
    sites = find_annotation_sites(program)
    eligible = [s.site_index for s in sites if s.annotation is not None]
    rng = file_rng(cfg.seed, file_id)
    if cfg.one_per_file and eligible:
        eligible = [eligible[int(rng.integers(len(eligible)))]]
    if cfg.max_per_file is not None:
        eligible = eligible[:cfg.max_per_file]
    out = []
    for i in eligible:
        spans = split_at_site(program, i)
        offset = len(spans.prefix) + len(spans.middle)
        suffix, stripped = strip_suffix_annotations(spans.suffix, sites[i + 1:], rng, offset, cfg.strip_prob)
        fmt = PSM if rng.random() < cfg.psm_ratio else SPM
        out.append(FitExample(file_id, i, fmt, spans.prefix, spans.middle, suffix, stripped))
    return out


@dataclass
class FitManifest:
    files: int = 0
    skipped: int = 0
    records: int = 0
    psm: int = 0
    stripped: int = 0
    shards: list[str] = field(default_factory=list)
    config: dict = field(default_factory=dict)


def build_examples(corpus: Iterable[tuple[str, str]], cfg: FitConfig = FitConfig()
                   ) -> tuple[list[FitExample], FitManifest]:
    """Examples for ``(file_id, text)`` pairs. Unparseable files are skipped."""
    manifest = FitManifest(config=asdict(cfg))
    out: list[FitExample] = []
    for file_id, text in corpus:
        try:
            ex = examples_for_file(file_id, text, cfg)
        except MTSSyntaxError as exc:
            manifest.skipped += 1
            log.warning("skipping %s: %s", file_id, exc)
            continue
        manifest.files += 1
        out.extend(ex)
    manifest.records = len(out)
    manifest.psm = sum(e.format == PSM for e in out)
    manifest.stripped = sum(e.suffix_stripped for e in out)
    return out, manifest


def _write(path: Path, data: bytes, compress: bool) -> None:
    if compress:
        buf = io.BytesIO()
        with gzip.GzipFile(filename="", mode="wb", fileobj=buf, mtime=0) as gz:
            gz.write(data)
        data = buf.getvalue()
    path.write_bytes(data)


def read_corpus(paths: Iterable[Union[str, Path]], root: Optional[Path] = None) -> list[tuple[str, str]]:
    out = []
    for p in sorted(Path(x) for x in paths):
        fid = str(p.relative_to(root)) if root else p.name
        out.append((fid, p.read_text()))
    return out


def emit_dataset(corpus: Iterable[tuple[str, str]], out_dir: Union[str, Path], cfg: FitConfig = FitConfig(),
                 sentinels: Sentinels = Sentinels(), compress: bool = False,
                 shard_size: int = 50_000) -> FitManifest:
    """Write JSONL shards and ``manifest.json`` into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    examples, manifest = build_examples(corpus, cfg)
    ext = ".jsonl.gz" if compress else ".jsonl"
    chunks = [examples[i:i + shard_size] for i in range(0, len(examples), shard_size)] or [[]]
    for n, chunk in enumerate(chunks):
        name = f"shard-{n:05d}{ext}"
        lines = "".join(json.dumps(e.record(sentinels), sort_keys=True) + "\n" for e in chunk)
        _write(out_dir / name, lines.encode(), compress)
        manifest.shards.append(name)
    (out_dir / "manifest.json").write_text(json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n")
    return manifest
