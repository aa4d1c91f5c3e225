"""AST for MTS programs.

Every node carries ``span = (start, end)`` character offsets into the source
it was parsed from. Statements and class/interface members also carry the
comments that precede them.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Iterator, Optional, Union

from tau.lang.lexer import Comment
from tau.typesys.texpr import TypeExpr

Span = tuple[int, int]


@dataclass(eq=False)
class Node:
    span: Span = field(default=(0, 0), kw_only=True)

    @property
    def kind(self) -> str:
        return type(self).__name__

    def children(self) -> Iterator["Node"]:
        for f in fields(self):
            if f.name in ("span", "comments", "trailing_comments", "annotation"):
                continue
            v = getattr(self, f.name)
            if isinstance(v, Node):
                yield v
            elif isinstance(v, list):
                for x in v:
                    if isinstance(x, Node):
                        yield x

    def walk(self) -> Iterator["Node"]:
        yield self
        for c in self.children():
            yield from c.walk()

    def shape(self):
        """Structural summary, ignoring spans and comments."""
        out = [self.kind]
        for f in fields(self):
            if f.name in ("span", "comments", "trailing_comments") or f.name.endswith("_span"):
                continue
            if f.name.endswith("_offset"):
                continue
            out.append(_shape(getattr(self, f.name)))
        return tuple(out)


def _shape(v):
    if isinstance(v, Node):
        return v.shape()
    if isinstance(v, list):
        return tuple(_shape(x) for x in v)
    if isinstance(v, tuple):
        return tuple(_shape(x) for x in v)
    return v


@dataclass(eq=False)
class TypeAnn(Node):
    """A written annotation ``: T``. ``span`` covers the type text only."""

    type: TypeExpr
    colon_start: int = 0

    def shape(self):
        return ("TypeAnn", self.type)


# -- expressions ------------------------------------------------------------


@dataclass(eq=False)
class Ident(Node):
    name: str


@dataclass(eq=False)
class Literal(Node):
    lit: str  # number | string | boolean | null | undefined
    raw: str


@dataclass(eq=False)
class This(Node):
    pass


@dataclass(eq=False)
class ArrayLit(Node):
    elements: list["Expr"]


@dataclass(eq=False)
class Prop(Node):
    key: str
    value: Optional["Expr"]  # None for shorthand ``{ key }``


@dataclass(eq=False)
class ObjectLit(Node):
    props: list[Prop]


@dataclass(eq=False)
class Param(Node):
    name: str
    annotation: Optional[TypeAnn] = None
    default: Optional["Expr"] = None
    name_span: Span = (0, 0)

    def children(self):
        if self.default is not None:
            yield self.default


@dataclass(eq=False)
class Block(Node):
    body: list["Stmt"]
    trailing_comments: list[Comment] = field(default_factory=list)


@dataclass(eq=False)
class ArrowFunc(Node):
    params: list[Param]
    annotation: Optional[TypeAnn]  # return type
    body: Union[Block, "Expr"]
    bare: bool = False  # ``x => ...`` without parentheses
    ret_offset: int = 0

    def children(self):
        yield from self.params
        yield self.body


@dataclass(eq=False)
class Call(Node):
    callee: "Expr"
    args: list["Expr"]


@dataclass(eq=False)
class New(Node):
    callee: "Expr"
    args: list["Expr"]


@dataclass(eq=False)
class Member(Node):
    obj: "Expr"
    prop: str
    prop_span: Span = (0, 0)


@dataclass(eq=False)
class Index(Node):
    obj: "Expr"
    index: "Expr"


@dataclass(eq=False)
class BinaryOp(Node):
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(eq=False)
class Unary(Node):
    op: str  # ! - + ~ typeof
    arg: "Expr"


@dataclass(eq=False)
class Update(Node):
    op: str  # ++ --
    prefix: bool
    arg: "Expr"


@dataclass(eq=False)
class Assign(Node):
    op: str
    target: "Expr"
    value: "Expr"


@dataclass(eq=False)
class Cond(Node):
    test: "Expr"
    cons: "Expr"
    alt: "Expr"


@dataclass(eq=False)
class AsExpr(Node):
    expr: "Expr"
    annotation: TypeAnn

    def children(self):
        yield self.expr


Expr = Union[
    Ident, Literal, This, ArrayLit, ObjectLit, ArrowFunc, Call, New, Member,
    Index, BinaryOp, Unary, Update, Assign, Cond, AsExpr,
]


# -- statements -------------------------------------------------------------


@dataclass(eq=False)
class VarDecl(Node):
    keyword: str
    name: str
    annotation: Optional[TypeAnn] = None
    init: Optional[Expr] = None
    exported: bool = False
    name_span: Span = (0, 0)
    comments: list[Comment] = field(default_factory=list)

    def children(self):
        if self.init is not None:
            yield self.init


@dataclass(eq=False)
class FuncDecl(Node):
    name: str
    params: list[Param]
    annotation: Optional[TypeAnn]
    body: Block
    exported: bool = False
    name_span: Span = (0, 0)
    ret_offset: int = 0
    comments: list[Comment] = field(default_factory=list)


@dataclass(eq=False)
class Field(Node):
    name: str
    modifiers: list[str]
    annotation: Optional[TypeAnn] = None
    init: Optional[Expr] = None
    name_span: Span = (0, 0)
    comments: list[Comment] = field(default_factory=list)

    def children(self):
        if self.init is not None:
            yield self.init


@dataclass(eq=False)
class Method(Node):
    name: str
    modifiers: list[str]
    params: list[Param]
    annotation: Optional[TypeAnn]
    body: Block
    name_span: Span = (0, 0)
    ret_offset: int = 0
    comments: list[Comment] = field(default_factory=list)

    @property
    def is_ctor(self) -> bool:
        return self.name == "constructor"


@dataclass(eq=False)
class IndexSig(Node):
    key_name: str
    key_type: TypeAnn
    annotation: TypeAnn
    comments: list[Comment] = field(default_factory=list)

    def children(self):
        return iter(())


@dataclass(eq=False)
class ClassDecl(Node):
    name: str
    superclass: Optional[str]
    members: list[Union[Field, Method, IndexSig]]
    exported: bool = False
    name_span: Span = (0, 0)
    comments: list[Comment] = field(default_factory=list)
    trailing_comments: list[Comment] = field(default_factory=list)


@dataclass(eq=False)
class PropSig(Node):
    name: str
    annotation: Optional[TypeAnn] = None
    name_span: Span = (0, 0)
    comments: list[Comment] = field(default_factory=list)


@dataclass(eq=False)
class InterfaceDecl(Node):
    name: str
    members: list[Union[PropSig, IndexSig]]
    exported: bool = False
    name_span: Span = (0, 0)
    comments: list[Comment] = field(default_factory=list)
    trailing_comments: list[Comment] = field(default_factory=list)


@dataclass(eq=False)
class TypeAlias(Node):
    name: str
    annotation: TypeAnn
    exported: bool = False
    comments: list[Comment] = field(default_factory=list)


@dataclass(eq=False)
class Return(Node):
    arg: Optional[Expr] = None
    comments: list[Comment] = field(default_factory=list)


@dataclass(eq=False)
class Throw(Node):
    arg: Expr
    comments: list[Comment] = field(default_factory=list)


@dataclass(eq=False)
class Break(Node):
    comments: list[Comment] = field(default_factory=list)


@dataclass(eq=False)
class Continue(Node):
    comments: list[Comment] = field(default_factory=list)


@dataclass(eq=False)
class If(Node):
    test: Expr
    cons: "Stmt"
    alt: Optional["Stmt"] = None
    comments: list[Comment] = field(default_factory=list)


@dataclass(eq=False)
class While(Node):
    test: Expr
    body: "Stmt"
    comments: list[Comment] = field(default_factory=list)


@dataclass(eq=False)
class For(Node):
    init: Optional[Union[VarDecl, Expr]]
    test: Optional[Expr]
    update: Optional[Expr]
    body: "Stmt"
    comments: list[Comment] = field(default_factory=list)


@dataclass(eq=False)
class ForOf(Node):
    keyword: str
    name: str
    iterable: Expr
    body: "Stmt"
    comments: list[Comment] = field(default_factory=list)


@dataclass(eq=False)
class ExprStmt(Node):
    expr: Expr
    comments: list[Comment] = field(default_factory=list)


@dataclass(eq=False)
class ExportDefault(Node):
    expr: Expr
    comments: list[Comment] = field(default_factory=list)


@dataclass(eq=False)
class BlockStmt(Node):
    block: Block
    comments: list[Comment] = field(default_factory=list)


Stmt = Union[
    VarDecl, FuncDecl, ClassDecl, InterfaceDecl, TypeAlias, Return, Throw,
    Break, Continue, If, While, For, ForOf, ExprStmt, ExportDefault, BlockStmt,
]


@dataclass(eq=False)
class Program(Node):
    body: list[Stmt]
    text: str = ""
    comments: list[Comment] = field(default_factory=list)
    trailing_comments: list[Comment] = field(default_factory=list)

    def shape(self):
        return ("Program", tuple(s.shape() for s in self.body))


def function_like(node: Node) -> bool:
    return isinstance(node, (FuncDecl, Method, ArrowFunc))


def is_function_var(node: Node) -> bool:
    """``const f = (...) => ...`` declares a function rather than a variable."""
    return isinstance(node, VarDecl) and isinstance(node.init, ArrowFunc)
