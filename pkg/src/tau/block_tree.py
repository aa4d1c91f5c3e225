"""Decomposition of a program into a tree of code blocks.

The root is the whole file; each declaration (function, ``const f = () =>``,
class, method, interface) is a node; nested declarations are its children.
All top-level variable declarations share one ``VarGroup`` node.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator, Optional

from tau.lang import ast as A
from tau.lang.sites import AnnotationSite, find_annotation_sites

VAR_GROUP_NAME = "varNode1"
USAGE_HEADER = "/* Example usages of '{name}' are shown below:"


@dataclass(eq=False)
class BlockNode:
    kind: str  # Root | Decl | VarGroup
    name: str
    span: A.Span  # source slice, leading comment included
    path: tuple[str, ...] = ()  # declaration path, as used in site keys
    decl: Optional[A.Node] = None
    members: list[A.VarDecl] = field(default_factory=list)  # VarGroup only
    parts: list[A.Span] = field(default_factory=list)  # VarGroup only
    children: list["BlockNode"] = field(default_factory=list)
    parent: Optional["BlockNode"] = field(default=None, repr=False)
    usage_comment: Optional[str] = None
    usages: list["Usage"] = field(default_factory=list)
    candidates: list = field(default_factory=list)
    sites: list[AnnotationSite] = field(default_factory=list)  # sites owned by this node

    @property
    def fragment(self) -> str:
        return "class_body" if isinstance(self.decl, A.Method) else "program"

    @property
    def prefix(self) -> tuple[str, ...]:
        """Path of the enclosing declarations, for site keys of the block text."""
        if self.kind == "Decl":
            return self.path[:-1]
        return ()

    @property
    def decl_span(self) -> A.Span:
        return self.decl.span if self.decl is not None else self.span

    def text(self, source: str) -> str:
        if self.kind == "VarGroup":
            return "\n".join(source[a:b] for a, b in self.parts) + "\n"
        return source[self.span[0]:self.span[1]]

    def walk(self) -> Iterator["BlockNode"]:
        yield self
        for c in self.children:
            yield from c.walk()

    def depth(self) -> int:
        d, p = 0, self.parent
        while p is not None:
            d, p = d + 1, p.parent
        return d

    def subtree_sites(self) -> list[AnnotationSite]:
        out = []
        for n in self.walk():
            out.extend(n.sites)
        return sorted(out, key=lambda s: s.site_index)

    def find(self, name: str) -> Optional["BlockNode"]:
        for n in self.walk():
            if n.name == name:
                return n
        return None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "name": self.name, "span": list(self.span),
                "children": [c.to_dict() for c in self.children]}


def _leading_start(text: str, stmt) -> int:
    """Start of the comment run directly before ``stmt`` (at most one newline apart)."""
    start = stmt.span[0]
    for c in reversed(getattr(stmt, "comments", [])):
        gap = text[c.end:start]
        if gap.strip() or gap.count("\n") > 1:
            break
        start = c.start
    return start


def _line_start(text: str, offset: int) -> int:
    """Pull ``offset`` back over indentation so the slice starts a line."""
    i = offset
    while i > 0 and text[i - 1] in " \t":
        i -= 1
    return i if i == 0 or text[i - 1] == "\n" else offset


def _is_decl(s) -> bool:
    return isinstance(s, (A.FuncDecl, A.ClassDecl, A.InterfaceDecl)) or A.is_function_var(s)


def _nested_decls(stmts) -> Iterator:
    """Declarations nested in a statement list, not descending into declarations."""
    for s in stmts:
        if _is_decl(s):
            yield s
            continue
        for c in s.children():
            if isinstance(c, A.Block):
                yield from _nested_decls(c.body)
            elif isinstance(c, A.Node) and not isinstance(c, A.TypeAnn) and hasattr(c, "comments"):
                yield from _nested_decls([c])


def _body_of(decl):
    if isinstance(decl, (A.FuncDecl, A.Method)):
        return decl.body.body
    if A.is_function_var(decl):
        body = decl.init.body
        return body.body if isinstance(body, A.Block) else []
    return []


def _decl_node(text: str, decl, path: tuple[str, ...]) -> BlockNode:
    start = _line_start(text, _leading_start(text, decl))
    node = BlockNode("Decl", decl.name, (start, decl.span[1]), path + (decl.name,), decl)
    if isinstance(decl, A.ClassDecl):
        for m in decl.members:
            if isinstance(m, A.Method):
                mstart = _line_start(text, _leading_start(text, m))
                child = BlockNode("Decl", m.name, (mstart, m.span[1]), node.path + (m.name,), m)
                for d in _nested_decls(m.body.body):
                    _attach(child, _decl_node(text, d, child.path))
                _attach(node, child)
    else:
        for d in _nested_decls(_body_of(decl)):
            _attach(node, _decl_node(text, d, node.path))
    return node


def _attach(parent: BlockNode, child: BlockNode) -> None:
    child.parent = parent
    parent.children.append(child)


def _assign_sites(root: BlockNode, sites: list[AnnotationSite]) -> None:
    for s in sites:
        owner = root
        descend = True
        while descend:
            descend = False
            for c in owner.children:
                ranges = [(m.span[0], m.span[1]) for m in c.members] if c.kind == "VarGroup" else [c.decl_span]
                if any(a <= s.insert_offset <= b for a, b in ranges):
                    owner = c
                    descend = True
                    break
        owner.sites.append(s)


def build_tree(program: A.Program) -> BlockNode:
    text = program.text
    root = BlockNode("Root", "root", (0, len(text)))
    group: Optional[BlockNode] = None
    for s in program.body:
        if isinstance(s, A.VarDecl) and not A.is_function_var(s):
            start = _line_start(text, _leading_start(text, s))
            if group is None:
                group = BlockNode("VarGroup", VAR_GROUP_NAME, (start, s.span[1]))
                _attach(root, group)
            group.members.append(s)
            group.parts.append((start, s.span[1]))
            group.span = (group.span[0], s.span[1])
        elif _is_decl(s):
            _attach(root, _decl_node(text, s, ()))
        else:
            for d in _nested_decls([s]):
                _attach(root, _decl_node(text, d, ()))
    _assign_sites(root, find_annotation_sites(program))
    return root


def traversal_order(tree: BlockNode) -> list[BlockNode]:
    """Bottom-up level order: deepest level first, source order within a level."""
    nodes = list(tree.walk())
    return sorted(nodes, key=lambda n: (-n.depth(), n.span[0]))


# -- usages ----------------------------------------------------------------------


@dataclass
class Usage:
    text: str
    span: A.Span


_SIMPLE = (A.ExprStmt, A.VarDecl, A.Return, A.Throw, A.ExportDefault)


def _references(node, name: str, member: bool) -> bool:
    for n in node.walk():
        if member:
            if isinstance(n, A.Member) and n.prop == name:
                return True
        elif isinstance(n, A.Ident) and n.name == name:
            return True
    return False


def _one_line(src: str) -> str:
    return " ".join(line.strip() for line in src.splitlines() if line.strip())


def _contains(node, span: A.Span) -> bool:
    return node.span[0] <= span[0] and span[1] <= node.span[1]


def _arrow_bodies(node) -> list:
    """Statements of block-bodied arrows directly inside ``node``."""
    out = []
    for n in node.walk():
        if isinstance(n, A.ArrowFunc) and isinstance(n.body, A.Block):
            out.extend(n.body.body)
    return out


class _UsageScan:
    def __init__(self, name: str, member: bool, exclude: A.Span, text: str):
        self.name, self.member, self.exclude, self.text = name, member, exclude, text
        self.out: list[Usage] = []

    def emit(self, node, text: str) -> None:
        self.out.append(Usage(_one_line(text), node.span))

    def stmts(self, stmts) -> None:
        for s in stmts:
            if self.exclude[0] <= s.span[0] and s.span[1] <= self.exclude[1]:
                continue
            if isinstance(s, _SIMPLE) and not _contains(s, self.exclude):
                if not _references(s, self.name, self.member):
                    continue
                inner = _arrow_bodies(s)
                if any(_references(x, self.name, self.member) for x in inner):
                    self.stmts(inner)
                elif isinstance(s, A.Return):
                    self.emit(s, self.text[s.arg.span[0]:s.arg.span[1]] + ";")
                else:
                    src = self.text[s.span[0]:s.span[1]].rstrip()
                    self.emit(s, src if src.endswith(";") else src + ";")
                continue
            self.compound(s)

    def head(self, h) -> None:
        if h is not None and _references(h, self.name, self.member) and not _contains(h, self.exclude):
            self.emit(h, self.text[h.span[0]:h.span[1]] + ";")

    def compound(self, s) -> None:
        if isinstance(s, (A.If, A.While)):
            self.head(s.test)
        elif isinstance(s, A.For):
            if isinstance(s.init, A.VarDecl):
                self.stmts([s.init])
            else:
                self.head(s.init)
            self.head(s.test)
            self.head(s.update)
        elif isinstance(s, A.ForOf):
            self.head(s.iterable)
        for c in s.children():
            if isinstance(c, A.Block):
                self.stmts(c.body)
            elif isinstance(c, (A.Method, A.Field)) or hasattr(c, "comments"):
                if c is not getattr(s, "init", None):
                    self.stmts([c])
            elif isinstance(c, A.Node):
                self.stmts(_arrow_bodies(c))


def _usages_for_node(node: BlockNode, program: A.Program) -> list[Usage]:
    parent = node.parent
    scan = _UsageScan(node.name, isinstance(node.decl, A.Method), node.decl.span, program.text)
    if parent.kind == "Root":
        scan.stmts(program.body)
    elif isinstance(parent.decl, A.ClassDecl):
        for m in parent.decl.members:
            if m is not node.decl:
                scan.stmts([m])
    else:
        scan.stmts(_body_of(parent.decl))
    return sorted(scan.out, key=lambda u: u.span[0])


def collect_usages(tree: BlockNode, decl_name: str, program: A.Program) -> list[Usage]:
    """Statements in the parent block that use ``decl_name``, in source order."""
    node = tree.find(decl_name)
    if node is None or node.kind != "Decl" or isinstance(node.decl, A.InterfaceDecl):
        return []
    return _usages_for_node(node, program)


def make_usage_comment(usages: list, decl_name: str, max_usages: int = 3,
                       window: int = 2048) -> Optional[str]:
    """``/* Example usages of 'f' are shown below: ... */`` or ``None``."""
    stmts = [u.text if isinstance(u, Usage) else str(u) for u in usages][:max_usages]
    budget = window // 4
    while stmts:
        comment = USAGE_HEADER.format(name=decl_name) + "".join("\n  " + s for s in stmts) + " */"
        if len(comment) <= budget:
            return comment
        stmts.pop()
    return None


def attach_usage_comments(tree: BlockNode, program: A.Program, max_usages: int = 3,
                          window: int = 2048) -> None:
    for node in tree.walk():
        if node.kind != "Decl" or isinstance(node.decl, A.InterfaceDecl):
            continue
        node.usages = _usages_for_node(node, program)
        if node.usages:
            node.usage_comment = make_usage_comment(node.usages, node.name, max_usages, window)


# -- debugging output ---------------------------------------------------------------


def format_tree(tree: BlockNode) -> str:
    lines = []
    for n in tree.walk():
        label = n.kind if n.kind != "Decl" else f"Decl {n.name}"
        if n.kind == "VarGroup":
            label = f"VarGroup {n.name}"
        lines.append("  " * n.depth() + f"{label} [{n.span[0]}, {n.span[1]})")
    return "\n".join(lines)


def decompose(program: A.Program) -> tuple[str, str]:
    """Indented text and JSON renderings of the tree."""
    tree = build_tree(program)
    return format_tree(tree), json.dumps(tree.to_dict(), indent=2)
