"""Type expressions of the MTS type language.

    type := "number" | "string" | "boolean" | "null" | "undefined" | "any"
          | "unknown" | "void" | "Function" | Ident | type "[]"
          | "Array" "<" type ">" | "(" params ")" "=>" type | "(" type ")"

The parser for this grammar is a mixin (:class:`TypeGrammar`) so the program
parser can read annotations out of the same token stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from tau.lang.lexer import Token, tokenize


class TypeExpr:
    """Base class. Instances are immutable and hashable."""

    @property
    def kind(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return format_type(self)


PRIMITIVE_NAMES = ("number", "string", "boolean", "null", "undefined", "any", "unknown", "void")


@dataclass(frozen=True, repr=False)
class Prim(TypeExpr):
    name: str

    @property
    def kind(self) -> str:
        return self.name.capitalize()

    def __repr__(self) -> str:
        return self.name.upper()


@dataclass(frozen=True, repr=False)
class FunctionTop(TypeExpr):
    @property
    def kind(self) -> str:
        return "FunctionTop"

    def __repr__(self) -> str:
        return "FUNCTION"


@dataclass(frozen=True)
class Named(TypeExpr):
    name: str

    @property
    def kind(self) -> str:
        return "Named"


@dataclass(frozen=True)
class ArrayT(TypeExpr):
    elem: TypeExpr

    @property
    def kind(self) -> str:
        return "Array"


@dataclass(frozen=True)
class FuncT(TypeExpr):
    params: tuple[TypeExpr, ...]
    ret: TypeExpr
    required: int = -1
    names: tuple[str, ...] = field(default=(), compare=False, hash=False)

    def __post_init__(self) -> None:
        if self.required < 0:
            object.__setattr__(self, "required", len(self.params))

    @property
    def kind(self) -> str:
        return "Func"


# Checker-internal types. They never appear in source annotations.
@dataclass(frozen=True)
class ObjT(TypeExpr):
    fields: tuple[tuple[str, TypeExpr], ...]

    @property
    def kind(self) -> str:
        return "Object"

    def get(self, name: str) -> TypeExpr | None:
        for k, v in self.fields:
            if k == name:
                return v
        return None


@dataclass(frozen=True)
class ClassRefT(TypeExpr):
    name: str

    @property
    def kind(self) -> str:
        return "ClassRef"


@dataclass(frozen=True)
class RestFuncT(TypeExpr):
    """Built-in function with a trailing rest parameter, e.g. ``console.log``."""

    params: tuple[TypeExpr, ...]
    rest: TypeExpr
    ret: TypeExpr

    @property
    def kind(self) -> str:
        return "RestFunc"


NUMBER = Prim("number")
STRING = Prim("string")
BOOLEAN = Prim("boolean")
NULL = Prim("null")
UNDEFINED = Prim("undefined")
ANY = Prim("any")
UNKNOWN = Prim("unknown")
VOID = Prim("void")
FUNCTION = FunctionTop()

_PRIMS = {p.name: p for p in (NUMBER, STRING, BOOLEAN, NULL, UNDEFINED, ANY, UNKNOWN, VOID)}


def leaves(t: TypeExpr) -> list[TypeExpr]:
    if isinstance(t, ArrayT):
        return leaves(t.elem)
    if isinstance(t, FuncT):
        out: list[TypeExpr] = []
        for p in t.params:
            out.extend(leaves(p))
        out.extend(leaves(t.ret))
        return out
    return [t]


def is_annotatable(t: TypeExpr) -> bool:
    """True if ``t`` can be written as a source annotation."""
    if isinstance(t, (ObjT, ClassRefT, RestFuncT)):
        return False
    if isinstance(t, ArrayT):
        return is_annotatable(t.elem)
    if isinstance(t, FuncT):
        return all(is_annotatable(p) for p in t.params) and is_annotatable(t.ret)
    return True


def format_type(t: TypeExpr) -> str:
    if isinstance(t, Prim):
        return t.name
    if isinstance(t, FunctionTop):
        return "Function"
    if isinstance(t, Named):
        return t.name
    if isinstance(t, ArrayT):
        inner = format_type(t.elem)
        if isinstance(t.elem, FuncT):
            inner = f"({inner})"
        return inner + "[]"
    if isinstance(t, FuncT):
        parts = []
        for i, p in enumerate(t.params):
            name = t.names[i] if i < len(t.names) and t.names[i] else f"arg{i}"
            opt = "?" if i >= t.required else ""
            parts.append(f"{name}{opt}: {format_type(p)}")
        return f"({', '.join(parts)}) => {format_type(t.ret)}"
    if isinstance(t, ObjT):
        return "{ " + "; ".join(f"{k}: {format_type(v)}" for k, v in t.fields) + " }"
    if isinstance(t, ClassRefT):
        return f"typeof {t.name}"
    if isinstance(t, RestFuncT):
        parts = [f"arg{i}: {format_type(p)}" for i, p in enumerate(t.params)]
        parts.append(f"...rest: {format_type(t.rest)}[]")
        return f"({', '.join(parts)}) => {format_type(t.ret)}"
    raise TypeError(f"not a type: {t!r}")


class NotAType(ValueError):
    pass


class TypeSyntaxError(Exception):
    def __init__(self, message: str, token: Token):
        super().__init__(message)
        self.token = token


class TypeGrammar:
    """Recursive-descent type parser over a token list.

    Subclasses supply ``tokens`` and ``pos``. ``strict_names`` rejects
    lower-case identifiers as named types (used by the completion parser).
    """

    tokens: list[Token]
    pos: int
    strict_names: bool = False
    _pending_gt: int = 0

    def peek(self, k: int = 0) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def at(self, value: str, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok.value == value and tok.kind in ("punct", "keyword", "ident")

    def fail(self, message: str, tok: Token | None = None):
        raise TypeSyntaxError(message, tok or self.peek())

    def expect(self, value: str) -> Token:
        if not self.at(value):
            self.fail(f"expected {value!r}")
        return self.advance()

    def _expect_gt(self) -> None:
        if self._pending_gt:
            self._pending_gt -= 1
            return
        v = self.peek().value if self.peek().kind == "punct" else ""
        if v == ">":
            self.advance()
        elif v == ">>":
            self.advance()
            self._pending_gt = 1
        elif v == ">>>":
            self.advance()
            self._pending_gt = 2
        else:
            self.fail("expected '>'")

    def parse_type(self) -> TypeExpr:
        t = self._parse_primary_type()
        while self.at("[") and self.at("]", 1) and not self._pending_gt:
            self.advance()
            self.advance()
            t = ArrayT(t)
        return t

    def _parse_primary_type(self) -> TypeExpr:
        if self._pending_gt:
            self.fail("expected type")
        tok = self.peek()
        if tok.kind in ("ident", "keyword") and tok.value in _PRIMS:
            self.advance()
            return _PRIMS[tok.value]
        if tok.kind == "ident":
            if tok.value == "Function":
                self.advance()
                return FUNCTION
            if tok.value == "Array" and self.at("<", 1):
                self.advance()
                self.advance()
                elem = self.parse_type()
                self._expect_gt()
                return ArrayT(elem)
            if self.strict_names and not tok.value[0].isupper():
                self.fail("implausible type name")
            self.advance()
            return Named(tok.value)
        if self.at("("):
            start = self.pos
            try:
                return self._parse_func_type()
            except TypeSyntaxError:
                self.pos = start
                self._pending_gt = 0
            self.advance()
            inner = self.parse_type()
            self.expect(")")
            return inner
        self.fail("expected type")

    def _parse_func_type(self) -> FuncT:
        self.expect("(")
        params: list[TypeExpr] = []
        names: list[str] = []
        required = -1
        while not self.at(")"):
            name_tok = self.peek()
            if name_tok.kind not in ("ident", "keyword"):
                self.fail("expected parameter name")
            self.advance()
            optional = False
            if self.at("?"):
                self.advance()
                optional = True
            self.expect(":")
            params.append(self.parse_type())
            names.append(name_tok.value)
            if optional and required < 0:
                required = len(params) - 1
            elif not optional and required >= 0:
                self.fail("required parameter after optional")
            if not self.at(")"):
                self.expect(",")
        self.expect(")")
        self.expect("=>")
        ret = self.parse_type()
        return FuncT(tuple(params), ret, required, tuple(names))


class _TypeOnly(TypeGrammar):
    def __init__(self, tokens: list[Token], strict: bool = False):
        self.tokens = tokens
        self.pos = 0
        self.strict_names = strict
        self._pending_gt = 0


def parse_type_expr(text: str, strict: bool = True) -> TypeExpr:
    """Parse ``text`` as exactly one type; raise :class:`NotAType` otherwise.

    With ``strict`` a lower-case name that is not a primitive (``strin``) is
    rejected rather than read as a class name.
    """
    lexed = tokenize(text)
    if lexed.errors:
        raise NotAType(text)
    p = _TypeOnly(lexed.tokens, strict)
    try:
        t = p.parse_type()
    except TypeSyntaxError as exc:
        raise NotAType(text) from exc
    if p._pending_gt or p.peek().kind != "eof":
        raise NotAType(text)
    return t
