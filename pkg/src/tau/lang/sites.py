"""Annotation sites: where ``: T`` may be written in a program.

Each site gets a :class:`SiteKey` built from the chain of enclosing
declaration names, so the same site can be recognised in a whole program
and in the text of one of its code blocks.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Mapping, Optional, Union

from tau.lang import ast as A
from tau.lang.parser import parse
from tau.typesys.texpr import TypeExpr, format_type

SITE_KINDS = ("VarDecl", "Param", "Return", "Field", "InterfaceProp")


@dataclass(frozen=True)
class SiteKey:
    kind: str
    path: tuple[str, ...]
    dup: int = 0

    def __str__(self) -> str:
        suffix = f"#{self.dup}" if self.dup else ""
        return f"{self.kind}:{'.'.join(self.path)}{suffix}"


@dataclass
class AnnotationSite:
    site_index: int
    site_kind: str
    owner: A.Node
    insert_offset: int
    annotation: Optional[A.TypeAnn]
    key: SiteKey
    name: str

    @property
    def ann_span(self) -> Optional[tuple[int, int]]:
        if self.annotation is None:
            return None
        return (self.annotation.colon_start, self.annotation.span[1])

    @property
    def type(self) -> Optional[TypeExpr]:
        return None if self.annotation is None else self.annotation.type

    @property
    def decl_path(self) -> tuple[str, ...]:
        """Path of the declaration owning this site."""
        if self.site_kind == "Return":
            return self.key.path
        return self.key.path[:-1]


class EraseUnsupported(ValueError):
    """The program contains a construct that has no unannotated form."""


class SiteOutOfRange(IndexError):
    pass


class _SiteCollector:
    def __init__(self, prefix: tuple[str, ...]):
        self.prefix = prefix
        self.raw: list[tuple[int, str, A.Node, Optional[A.TypeAnn], tuple[str, ...], str]] = []
        self.lambdas: dict[tuple[str, ...], int] = defaultdict(int)

    def add(self, offset, kind, owner, ann, path, name):
        if ann is not None:
            offset = ann.colon_start
        self.raw.append((offset, kind, owner, ann, path, name))

    def func(self, node, path: tuple[str, ...], params, ann, ret_offset, body, has_return=True):
        for p in params:
            self.add(p.name_span[1], "Param", p, p.annotation, path + (p.name,), p.name)
            if p.default is not None:
                self.expr(p.default, path)
        if has_return:
            self.add(ret_offset, "Return", node, ann, path, path[-1] if path else "")
        if isinstance(body, A.Block):
            self.stmts(body.body, path)
        else:
            self.expr(body, path)

    def stmts(self, body, path):
        for s in body:
            self.stmt(s, path)

    def stmt(self, s, path):
        if isinstance(s, A.VarDecl):
            if A.is_function_var(s):
                fn = s.init
                dpath = path + (s.name,)
                if fn.bare and isinstance(fn.body, A.Block):
                    self.stmts(fn.body.body, dpath)
                elif fn.bare:
                    self.expr(fn.body, dpath)
                else:
                    self.func(fn, dpath, fn.params, fn.annotation, fn.ret_offset, fn.body)
            else:
                self.add(s.name_span[1], "VarDecl", s, s.annotation, path + (s.name,), s.name)
                if s.init is not None:
                    self.expr(s.init, path)
        elif isinstance(s, A.FuncDecl):
            self.func(s, path + (s.name,), s.params, s.annotation, s.ret_offset, s.body)
        elif isinstance(s, A.ClassDecl):
            cpath = path + (s.name,) if s.name else path
            for m in s.members:
                if isinstance(m, A.Field):
                    self.add(m.name_span[1], "Field", m, m.annotation, cpath + (m.name,), m.name)
                    if m.init is not None:
                        self.expr(m.init, cpath)
                elif isinstance(m, A.Method):
                    self.func(m, cpath + (m.name,), m.params, m.annotation, m.ret_offset, m.body,
                              has_return=not m.is_ctor)
        elif isinstance(s, A.InterfaceDecl):
            ipath = path + (s.name,)
            for m in s.members:
                if isinstance(m, A.PropSig):
                    self.add(m.name_span[1], "InterfaceProp", m, m.annotation, ipath + (m.name,), m.name)
        elif isinstance(s, A.TypeAlias):
            pass
        else:
            for c in s.children():
                if isinstance(c, (A.VarDecl, A.FuncDecl, A.ClassDecl, A.InterfaceDecl, A.Return,
                                  A.If, A.While, A.For, A.ForOf, A.ExprStmt, A.BlockStmt, A.Throw,
                                  A.ExportDefault, A.TypeAlias, A.Break, A.Continue)):
                    self.stmt(c, path)
                elif isinstance(c, A.Block):
                    self.stmts(c.body, path)
                else:
                    self.expr(c, path)

    def expr(self, e, path):
        if isinstance(e, A.ArrowFunc):
            k = self.lambdas[path]
            self.lambdas[path] += 1
            lpath = path + (f"<lambda#{k}>",)
            if e.bare:
                if isinstance(e.body, A.Block):
                    self.stmts(e.body.body, lpath)
                else:
                    self.expr(e.body, lpath)
            else:
                self.func(e, lpath, e.params, e.annotation, e.ret_offset, e.body)
            return
        for c in e.children():
            if isinstance(c, A.Block):
                self.stmts(c.body, path)
            else:
                self.expr(c, path)


def find_annotation_sites(program: A.Program, prefix: tuple[str, ...] = ()) -> list[AnnotationSite]:
    col = _SiteCollector(prefix)
    col.stmts(program.body, prefix)
    raw = sorted(col.raw, key=lambda r: r[0])
    seen: dict[tuple[str, tuple[str, ...]], int] = defaultdict(int)
    out = []
    for i, (offset, kind, owner, ann, path, name) in enumerate(raw):
        dup = seen[(kind, path)]
        seen[(kind, path)] += 1
        out.append(AnnotationSite(i, kind, owner, offset, ann, SiteKey(kind, path, dup), name))
    return out


def unsupported_constructs(program: A.Program) -> list[A.Node]:
    return [n for n in program.walk() if isinstance(n, (A.IndexSig, A.TypeAlias, A.AsExpr))]


AnnotationValue = Union[TypeExpr, str]


def _ann_text(v: AnnotationValue) -> str:
    return v if isinstance(v, str) else format_type(v)


def apply_annotations(
    text: str,
    sites: list[AnnotationSite],
    mapping: Mapping[SiteKey, AnnotationValue],
    offset: int = 0,
) -> str:
    """Write ``mapping[site.key]`` at each mapped site of ``text``.

    ``offset`` is subtracted from site offsets, for when ``text`` is a slice
    of the source the sites were computed on. Raw strings are spliced
    verbatim; existing annotations are replaced.
    """
    edits = []
    for s in sites:
        if s.key not in mapping:
            continue
        new = ": " + _ann_text(mapping[s.key])
        if s.annotation is None:
            edits.append((s.insert_offset - offset, s.insert_offset - offset, new))
        else:
            a, b = s.ann_span
            edits.append((a - offset, b - offset, new))
    for a, b, new in sorted(edits, reverse=True):
        if a < 0 or b > len(text):
            raise SiteOutOfRange(f"site at {a} outside text of length {len(text)}")
        text = text[:a] + new + text[b:]
    return text


def erase_text(program: A.Program, sites: Optional[list[AnnotationSite]] = None) -> str:
    bad = unsupported_constructs(program)
    if bad:
        raise EraseUnsupported(f"cannot remove annotations from {bad[0].kind} at offset {bad[0].span[0]}")
    text = program.text
    sites = find_annotation_sites(program) if sites is None else sites
    for s in sorted((s for s in sites if s.annotation is not None), key=lambda s: -s.insert_offset):
        a, b = s.ann_span
        text = text[:a] + text[b:]
    return text


def erase_annotations(program: A.Program) -> A.Program:
    return parse(erase_text(program))


def insert_hole(block_text: str, site: AnnotationSite, marker: str = "_hole_", offset: int = 0) -> str:
    a = site.insert_offset - offset
    if a < 0 or a > len(block_text):
        raise SiteOutOfRange(f"site {site.site_index} at {site.insert_offset} outside block")
    b = a if site.annotation is None else site.ann_span[1] - offset
    return block_text[:a] + ": " + marker + block_text[b:]
