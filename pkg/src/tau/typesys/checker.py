"""A small, real type checker for MTS.

Unannotated parameters, returns and fields are ``any``. Unannotated
variables take the type of their initializer (``null``/``undefined``/``void``
widen to ``any``), which is exactly what :func:`infer_local` reports, so
writing the inferred annotation back never changes the outcome.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from tau.lang import ast as A
from tau.typesys.texpr import (
    ANY, BOOLEAN, FUNCTION, NULL, NUMBER, STRING, UNDEFINED, UNKNOWN, VOID,
    ArrayT, ClassRefT, FuncT, FunctionTop, Named, ObjT, Prim, RestFuncT, TypeExpr,
    format_type, is_annotatable,
)

ERROR_CODES = (
    "assign-mismatch", "arg-mismatch", "arity", "return-mismatch", "missing-return",
    "unresolved-name", "unresolved-type", "no-property", "not-callable", "bad-operand",
    "const-assign", "not-constructable", "unknown-use",
)

_ANYISH = (ANY,)
_NO_RETURN_NEEDED = (VOID, ANY, UNKNOWN, UNDEFINED)


@dataclass(frozen=True)
class MTSTypeError:
    code: str
    span: A.Span
    message: str

    def to_record(self, text: str) -> dict:
        line = text.count("\n", 0, self.span[0]) + 1
        col = self.span[0] - (text.rfind("\n", 0, self.span[0]) + 1) + 1
        return {"code": self.code, "line": line, "col": col, "message": self.message}


def diagnostics_report(errors: Iterable[MTSTypeError], text: str) -> list[dict]:
    return [e.to_record(text) for e in errors]


# -- declarations -------------------------------------------------------------


@dataclass
class ClassInfo:
    name: str
    superclass: Optional[str] = None
    fields: dict[str, TypeExpr] = field(default_factory=dict)
    methods: dict[str, TypeExpr] = field(default_factory=dict)
    statics: dict[str, TypeExpr] = field(default_factory=dict)
    ctor: Optional[FuncT] = None


@dataclass
class InterfaceInfo:
    name: str
    props: dict[str, TypeExpr] = field(default_factory=dict)


def _fn(params, ret, required=-1) -> FuncT:
    return FuncT(tuple(params), ret, required)


def _builtin_classes() -> dict[str, ClassInfo]:
    err = ClassInfo("Error", fields={"message": STRING, "name": STRING},
                    ctor=_fn([STRING], VOID, 0))
    return {"Error": err}


class TypeTable:
    """Named types declared in one program, plus compatibility rules."""

    def __init__(self):
        self.classes: dict[str, ClassInfo] = _builtin_classes()
        self.interfaces: dict[str, InterfaceInfo] = {}
        self.aliases: dict[str, TypeExpr] = {}

    def known(self, name: str) -> bool:
        return name in self.classes or name in self.interfaces or name in self.aliases

    def resolve(self, t: TypeExpr, seen: frozenset = frozenset()) -> TypeExpr:
        if isinstance(t, Named):
            if t.name in self.aliases and t.name not in seen:
                return self.resolve(self.aliases[t.name], seen | {t.name})
            if t.name in self.classes or t.name in self.interfaces:
                return t
            return ANY
        if isinstance(t, ArrayT):
            return ArrayT(self.resolve(t.elem, seen))
        if isinstance(t, FuncT):
            return FuncT(tuple(self.resolve(p, seen) for p in t.params),
                         self.resolve(t.ret, seen), t.required, t.names)
        return t

    def unresolved_names(self, t: TypeExpr) -> list[str]:
        if isinstance(t, Named):
            return [] if self.known(t.name) else [t.name]
        if isinstance(t, ArrayT):
            return self.unresolved_names(t.elem)
        if isinstance(t, FuncT):
            out = []
            for p in t.params:
                out += self.unresolved_names(p)
            return out + self.unresolved_names(t.ret)
        return []

    def superclasses(self, name: str) -> list[str]:
        out, seen = [], set()
        while name in self.classes and name not in seen:
            seen.add(name)
            out.append(name)
            name = self.classes[name].superclass
        return out

    def instance_member(self, name: str, prop: str) -> Optional[TypeExpr]:
        if name in self.interfaces:
            return self.interfaces[name].props.get(prop)
        for cname in self.superclasses(name):
            info = self.classes[cname]
            if prop in info.fields:
                return info.fields[prop]
            if prop in info.methods:
                return info.methods[prop]
        return None

    def static_member(self, name: str, prop: str) -> Optional[TypeExpr]:
        for cname in self.superclasses(name):
            if prop in self.classes[cname].statics:
                return self.classes[cname].statics[prop]
        return None

    def ctor(self, name: str) -> FuncT:
        for cname in self.superclasses(name):
            if self.classes[cname].ctor is not None:
                return self.classes[cname].ctor
        return _fn([], VOID)

    def compatible(self, src: TypeExpr, dst: TypeExpr) -> bool:
        if src == dst or src == ANY or dst == ANY or dst == UNKNOWN:
            return True
        if src == UNKNOWN:
            return False
        if src in (NULL, UNDEFINED):
            return src == UNDEFINED and dst == VOID
        if dst == VOID:
            return False
        if isinstance(dst, FunctionTop):
            return isinstance(src, (FuncT, RestFuncT, ClassRefT))
        if isinstance(dst, ArrayT):
            return isinstance(src, ArrayT) and self.compatible(src.elem, dst.elem)
        if isinstance(dst, FuncT):
            if isinstance(src, RestFuncT):
                return all(self.compatible(d, src.rest) for d in dst.params[len(src.params):]) and all(
                    self.compatible(d, s) for d, s in zip(dst.params, src.params)
                ) and (dst.ret == VOID or self.compatible(src.ret, dst.ret))
            if not isinstance(src, FuncT):
                return False
            if src.required > len(dst.params):
                return False
            for s, d in zip(src.params, dst.params):
                if not self.compatible(d, s):
                    return False
            return dst.ret == VOID or self.compatible(src.ret, dst.ret)
        if isinstance(dst, Named):
            if isinstance(src, Named):
                return dst.name in self.superclasses(src.name)
            if isinstance(src, ObjT) and dst.name in self.interfaces:
                for k, v in self.interfaces[dst.name].props.items():
                    got = src.get(k)
                    if got is None or not self.compatible(got, v):
                        return False
                return True
            return False
        if isinstance(dst, ObjT):
            if isinstance(src, ObjT):
                return all(src.get(k) is not None and self.compatible(src.get(k), v) for k, v in dst.fields)
            return False
        return False


def compatible(src: TypeExpr, dst: TypeExpr, table: Optional[TypeTable] = None) -> bool:
    return (table or TypeTable()).compatible(src, dst)


# -- built-in values ------------------------------------------------------------


def _prelude() -> dict[str, TypeExpr]:
    n1 = _fn([NUMBER], NUMBER)
    math = ObjT((
        ("PI", NUMBER), ("E", NUMBER), ("floor", n1), ("ceil", n1), ("round", n1), ("abs", n1),
        ("sqrt", n1), ("log", n1), ("exp", n1), ("sign", n1), ("trunc", n1), ("sin", n1), ("cos", n1),
        ("pow", _fn([NUMBER, NUMBER], NUMBER)), ("random", _fn([], NUMBER)),
        ("max", RestFuncT((), NUMBER, NUMBER)), ("min", RestFuncT((), NUMBER, NUMBER)),
    ))
    log = RestFuncT((), ANY, VOID)
    return {
        "Math": math,
        "console": ObjT((("log", log), ("error", log), ("warn", log), ("info", log))),
        "JSON": ObjT((("stringify", _fn([ANY], STRING)), ("parse", _fn([STRING], ANY)))),
        "Object": ObjT((("keys", _fn([ANY], ArrayT(STRING))),)),
        "Array": ObjT((("isArray", _fn([ANY], BOOLEAN)),)),
        "parseInt": _fn([STRING, NUMBER], NUMBER, 1),
        "parseFloat": _fn([STRING], NUMBER),
        "isNaN": _fn([NUMBER], BOOLEAN),
        "String": _fn([ANY], STRING),
        "Number": _fn([ANY], NUMBER),
        "Boolean": _fn([ANY], BOOLEAN),
        "eval": _fn([STRING], ANY),
        "NaN": NUMBER,
        "Infinity": NUMBER,
        "Error": ClassRefT("Error"),
    }


PRELUDE_NAMES = frozenset(_prelude())


def _string_members() -> dict[str, TypeExpr]:
    s_to_s = _fn([], STRING)
    return {
        "length": NUMBER, "charAt": _fn([NUMBER], STRING), "charCodeAt": _fn([NUMBER], NUMBER),
        "indexOf": _fn([STRING, NUMBER], NUMBER, 1), "lastIndexOf": _fn([STRING], NUMBER),
        "includes": _fn([STRING], BOOLEAN), "startsWith": _fn([STRING], BOOLEAN),
        "endsWith": _fn([STRING], BOOLEAN), "slice": _fn([NUMBER, NUMBER], STRING, 0),
        "substring": _fn([NUMBER, NUMBER], STRING, 1), "substr": _fn([NUMBER, NUMBER], STRING, 1),
        "toUpperCase": s_to_s, "toLowerCase": s_to_s, "trim": s_to_s, "toString": s_to_s,
        "split": _fn([STRING], ArrayT(STRING)), "replace": _fn([STRING, STRING], STRING),
        "concat": RestFuncT((), ANY, STRING), "repeat": _fn([NUMBER], STRING),
        "padStart": _fn([NUMBER, STRING], STRING, 1), "padEnd": _fn([NUMBER, STRING], STRING, 1),
    }


def _array_members(e: TypeExpr) -> dict[str, TypeExpr]:
    arr = ArrayT(e)
    cb = FUNCTION
    return {
        "length": NUMBER, "push": RestFuncT((), e, NUMBER), "pop": _fn([], e), "shift": _fn([], e),
        "unshift": RestFuncT((), e, NUMBER), "indexOf": _fn([e], NUMBER), "includes": _fn([e], BOOLEAN),
        "join": _fn([STRING], STRING, 0), "slice": _fn([NUMBER, NUMBER], arr, 0),
        "concat": RestFuncT((), ANY, arr), "reverse": _fn([], arr), "sort": _fn([cb], arr, 0),
        "map": _fn([cb], ArrayT(ANY)), "filter": _fn([cb], arr), "find": _fn([cb], e),
        "findIndex": _fn([cb], NUMBER), "forEach": _fn([cb], VOID), "some": _fn([cb], BOOLEAN),
        "every": _fn([cb], BOOLEAN), "reduce": _fn([cb, ANY], ANY, 1),
        "splice": _fn([NUMBER, NUMBER], arr, 1), "fill": _fn([e], arr),
    }


_NUMBER_MEMBERS = {"toFixed": _fn([NUMBER], STRING, 0), "toString": _fn([NUMBER], STRING, 0)}
_BOOLEAN_MEMBERS = {"toString": _fn([], STRING)}


# -- scopes ----------------------------------------------------------------------


@dataclass
class Binding:
    type: Optional[TypeExpr]  # None while a hoisted variable is not yet initialized
    const: bool = False


class Scope:
    def __init__(self, parent: Optional["Scope"] = None, this: Optional[TypeExpr] = None):
        self.parent = parent
        self.vars: dict[str, Binding] = {}
        self.this = this if this is not None else (parent.this if parent else None)

    def lookup(self, name: str) -> Optional[Binding]:
        s = self
        while s is not None:
            if name in s.vars:
                return s.vars[name]
            s = s.parent
        return None

    def child(self, this: Optional[TypeExpr] = None) -> "Scope":
        return Scope(self, this)


@dataclass
class _FnCtx:
    node: A.Node
    ret: Optional[TypeExpr]  # declared return type; None when unannotated
    returns: list[TypeExpr] = field(default_factory=list)


def widen(t: TypeExpr) -> TypeExpr:
    return ANY if t in (NULL, UNDEFINED, VOID) else t


def _join(types: list[TypeExpr]) -> TypeExpr:
    ts = [t for t in types if t not in (NULL, UNDEFINED)]
    if not ts:
        return types[0] if types else ANY
    if all(t == ts[0] for t in ts):
        return ts[0]
    return ANY


def always_returns(stmts: list) -> bool:
    for s in stmts:
        if isinstance(s, (A.Return, A.Throw)):
            return True
        if isinstance(s, A.If) and s.alt is not None and always_returns([s.cons]) and always_returns([s.alt]):
            return True
        if isinstance(s, A.BlockStmt) and always_returns(s.block.body):
            return True
    return False


class Checker:
    """Checks one program. After :meth:`run`, ``types`` maps expression nodes to
    their types, ``local_types`` maps each VarDecl to its inferred type and
    ``fn_returns`` maps function nodes to the types of their returned values."""

    def __init__(self, program: A.Program):
        self.program = program
        self.table = TypeTable()
        self.errors: list[MTSTypeError] = []
        self.types: dict[A.Node, TypeExpr] = {}
        self.local_types: dict[A.VarDecl, TypeExpr] = {}
        self.fn_returns: dict[A.Node, list[TypeExpr]] = {}
        self.fn_stack: list[_FnCtx] = []
        self.quiet = 0
        self.globals = Scope()
        for k, v in _prelude().items():
            self.globals.vars[k] = Binding(v, const=True)

    # -- reporting ----------------------------------------------------------------

    def err(self, code: str, node_or_span, message: str) -> None:
        if self.quiet:
            return
        span = node_or_span if isinstance(node_or_span, tuple) else node_or_span.span
        self.errors.append(MTSTypeError(code, span, message))

    def ok(self, src: TypeExpr, dst: TypeExpr) -> bool:
        return self.table.compatible(src, dst)

    # -- declarations ---------------------------------------------------------------

    def ann_type(self, ann: Optional[A.TypeAnn]) -> Optional[TypeExpr]:
        return None if ann is None else self.table.resolve(ann.type)

    def collect_types(self) -> None:
        decls = [n for n in self.program.walk() if isinstance(n, (A.ClassDecl, A.InterfaceDecl, A.TypeAlias))]
        for d in decls:
            if isinstance(d, A.ClassDecl):
                self.table.classes[d.name] = ClassInfo(d.name, d.superclass)
            elif isinstance(d, A.InterfaceDecl):
                self.table.interfaces[d.name] = InterfaceInfo(d.name)
            else:
                self.table.aliases[d.name] = d.annotation.type
        for d in decls:
            if isinstance(d, A.ClassDecl):
                info = self.table.classes[d.name]
                for m in d.members:
                    static = "static" in getattr(m, "modifiers", [])
                    target = info.statics if static else None
                    if isinstance(m, A.Field):
                        t = self.ann_type(m.annotation) or ANY
                        (target if static else info.fields)[m.name] = t
                    elif isinstance(m, A.Method):
                        sig = self.signature(m.params, None if m.is_ctor else m.annotation)
                        if m.is_ctor:
                            info.ctor = FuncT(sig.params, VOID, sig.required, sig.names)
                        else:
                            (target if static else info.methods)[m.name] = sig
            elif isinstance(d, A.InterfaceDecl):
                info = self.table.interfaces[d.name]
                for m in d.members:
                    if isinstance(m, A.PropSig):
                        info.props[m.name] = self.ann_type(m.annotation) or ANY

    def check_annotation_names(self) -> None:
        for node in self.program.walk():
            for attr in ("annotation", "key_type"):
                ann = getattr(node, attr, None)
                if isinstance(ann, A.TypeAnn):
                    for name in self.table.unresolved_names(ann.type):
                        self.err("unresolved-type", ann, f"cannot find type '{name}'")
            if isinstance(node, (A.FuncDecl, A.ArrowFunc, A.Method)):
                for p in node.params:
                    if p.annotation is not None:
                        for name in self.table.unresolved_names(p.annotation.type):
                            self.err("unresolved-type", p.annotation, f"cannot find type '{name}'")
            if isinstance(node, A.ClassDecl) and node.superclass and node.superclass not in self.table.classes:
                self.err("unresolved-name", node, f"cannot find class '{node.superclass}'")

    def signature(self, params, ret_ann) -> FuncT:
        ptypes = tuple(self.ann_type(p.annotation) or ANY for p in params)
        required = 0
        for i, p in enumerate(params):
            if p.default is None:
                required = i + 1
        ret = self.ann_type(ret_ann) or ANY
        return FuncT(ptypes, ret, required, tuple(p.name for p in params))

    # -- entry --------------------------------------------------------------------------

    def run(self) -> list[MTSTypeError]:
        self.collect_types()
        self.check_annotation_names()
        self.stmt_list(self.program.body, self.globals)
        return self.errors

    # -- statements ------------------------------------------------------------------------

    def hoist(self, stmts, scope: Scope) -> None:
        for s in stmts:
            if isinstance(s, A.FuncDecl):
                scope.vars[s.name] = Binding(self.signature(s.params, s.annotation), const=True)
            elif isinstance(s, A.ClassDecl):
                scope.vars[s.name] = Binding(ClassRefT(s.name), const=True)
            elif isinstance(s, A.VarDecl):
                scope.vars[s.name] = Binding(None, const=s.keyword == "const")

    def stmt_list(self, stmts, scope: Scope) -> None:
        self.hoist(stmts, scope)
        deferred: list[Callable[[], None]] = []
        for s in stmts:
            self.stmt(s, scope, deferred)
        for job in deferred:
            job()

    def stmt(self, s, scope: Scope, deferred: list) -> None:
        if isinstance(s, A.VarDecl):
            self.var_decl(s, scope)
        elif isinstance(s, A.FuncDecl):
            deferred.append(lambda: self.function(s, s.params, s.annotation, s.body, scope))
        elif isinstance(s, A.ClassDecl):
            deferred.append(lambda: self.class_body(s, scope))
        elif isinstance(s, (A.InterfaceDecl, A.TypeAlias, A.Break, A.Continue)):
            pass
        elif isinstance(s, A.Return):
            self.return_stmt(s, scope)
        elif isinstance(s, (A.Throw,)):
            self.expr(s.arg, scope)
        elif isinstance(s, (A.ExprStmt, A.ExportDefault)):
            self.expr(s.expr, scope)
        elif isinstance(s, A.BlockStmt):
            self.stmt_list(s.block.body, scope.child())
        elif isinstance(s, A.If):
            self.expr(s.test, scope)
            self.sub(s.cons, scope)
            if s.alt is not None:
                self.sub(s.alt, scope)
        elif isinstance(s, A.While):
            self.expr(s.test, scope)
            self.sub(s.body, scope)
        elif isinstance(s, A.For):
            inner = scope.child()
            if isinstance(s.init, A.VarDecl):
                self.hoist([s.init], inner)
                self.var_decl(s.init, inner)
            elif s.init is not None:
                self.expr(s.init, inner)
            if s.test is not None:
                self.expr(s.test, inner)
            if s.update is not None:
                self.expr(s.update, inner)
            self.sub(s.body, inner)
        elif isinstance(s, A.ForOf):
            it = self.expr(s.iterable, scope)
            if isinstance(it, ArrayT):
                elem = it.elem
            elif it == STRING:
                elem = STRING
            elif it == ANY:
                elem = ANY
            else:
                self.err("bad-operand", s.iterable, f"type '{format_type(it)}' is not iterable")
                elem = ANY
            inner = scope.child()
            inner.vars[s.name] = Binding(elem, const=s.keyword == "const")
            self.sub(s.body, inner)
        else:
            raise TypeError(f"unexpected statement {s.kind}")

    def sub(self, s, scope: Scope) -> None:
        if isinstance(s, A.BlockStmt):
            self.stmt_list(s.block.body, scope.child())
        else:
            deferred: list = []
            inner = scope.child()
            self.hoist([s], inner)
            self.stmt(s, inner, deferred)
            for job in deferred:
                job()

    def var_decl(self, s: A.VarDecl, scope: Scope) -> None:
        declared = self.ann_type(s.annotation)
        init_t = self.expr(s.init, scope) if s.init is not None else None
        if init_t is None:
            local = ANY
        else:
            local = widen(init_t)
        self.local_types[s] = local if is_annotatable(local) else ANY
        if declared is not None:
            if init_t is not None and not self.ok(init_t, declared):
                self.err("assign-mismatch", s.init,
                         f"type '{format_type(init_t)}' is not assignable to '{format_type(declared)}'")
            bound = declared
        else:
            bound = local
        scope.vars[s.name] = Binding(bound, const=s.keyword == "const")

    def return_stmt(self, s: A.Return, scope: Scope) -> None:
        t = self.expr(s.arg, scope) if s.arg is not None else VOID
        if not self.fn_stack:
            return
        ctx = self.fn_stack[-1]
        ctx.returns.append(t)
        if ctx.ret is None:
            return
        if s.arg is None:
            if ctx.ret not in _NO_RETURN_NEEDED:
                self.err("return-mismatch", s, f"missing value for return type '{format_type(ctx.ret)}'")
        elif not self.ok(t, ctx.ret):
            self.err("return-mismatch", s.arg,
                     f"type '{format_type(t)}' is not assignable to return type '{format_type(ctx.ret)}'")

    def function(self, node, params, ret_ann, body, scope: Scope, this: Optional[TypeExpr] = None,
                 super_t: Optional[TypeExpr] = None) -> FuncT:
        sig = self.signature(params, ret_ann)
        inner = scope.child(this)
        if super_t is not None:
            inner.vars["super"] = Binding(super_t, const=True)
        for p, pt in zip(params, sig.params):
            if p.default is not None:
                dt = self.expr(p.default, scope)
                if p.annotation is not None and not self.ok(dt, pt):
                    self.err("assign-mismatch", p.default,
                             f"default of type '{format_type(dt)}' is not assignable to '{format_type(pt)}'")
            inner.vars[p.name] = Binding(pt)
        declared = self.ann_type(ret_ann)
        ctx = _FnCtx(node, declared)
        self.fn_stack.append(ctx)
        try:
            if isinstance(body, A.Block):
                self.stmt_list(body.body, inner)
                if declared is not None and declared not in _NO_RETURN_NEEDED and not always_returns(body.body):
                    self.err("missing-return", ret_ann,
                             f"function with return type '{format_type(declared)}' does not always return")
            else:
                t = self.expr(body, inner)
                ctx.returns.append(t)
                if declared is not None and not self.ok(t, declared):
                    self.err("return-mismatch", body,
                             f"type '{format_type(t)}' is not assignable to return type '{format_type(declared)}'")
        finally:
            self.fn_stack.pop()
        self.fn_returns[node] = ctx.returns
        return sig

    def class_body(self, c: A.ClassDecl, scope: Scope) -> None:
        inst = Named(c.name)
        super_t = None
        if c.superclass in self.table.classes:
            base = self.table.ctor(c.superclass)
            super_t = FuncT(base.params, VOID, base.required, base.names)
        elif c.superclass:
            super_t = ANY
        for m in c.members:
            static = "static" in getattr(m, "modifiers", [])
            this = ClassRefT(c.name) if static else inst
            if isinstance(m, A.Field) and m.init is not None:
                t = self.expr(m.init, scope.child(this))
                declared = self.ann_type(m.annotation)
                if declared is not None and not self.ok(t, declared):
                    self.err("assign-mismatch", m.init,
                             f"type '{format_type(t)}' is not assignable to '{format_type(declared)}'")
            elif isinstance(m, A.Method):
                self.function(m, m.params, None if m.is_ctor else m.annotation, m.body, scope, this,
                              super_t if m.is_ctor else None)

    # -- expressions ----------------------------------------------------------------------

    def expr(self, e, scope: Scope) -> TypeExpr:
        t = self._expr(e, scope)
        self.types[e] = t
        return t

    def _expr(self, e, scope: Scope) -> TypeExpr:
        if isinstance(e, A.Literal):
            return {"number": NUMBER, "string": STRING, "boolean": BOOLEAN,
                    "null": NULL, "undefined": UNDEFINED}[e.lit]
        if isinstance(e, A.Ident):
            b = scope.lookup(e.name)
            if b is None:
                self.err("unresolved-name", e, f"cannot find name '{e.name}'")
                return ANY
            return ANY if b.type is None else b.type
        if isinstance(e, A.This):
            return scope.this if scope.this is not None else ANY
        if isinstance(e, A.ArrayLit):
            ts = [widen(self.expr(x, scope)) for x in e.elements]
            if ts and all(t == ts[0] for t in ts):
                return ArrayT(ts[0])
            return ArrayT(ANY)
        if isinstance(e, A.ObjectLit):
            fields = []
            for p in e.props:
                if p.value is None:
                    b = scope.lookup(p.key)
                    if b is None:
                        self.err("unresolved-name", p, f"cannot find name '{p.key}'")
                    t = ANY if b is None or b.type is None else b.type
                else:
                    t = self.expr(p.value, scope)
                fields = [f for f in fields if f[0] != p.key] + [(p.key, widen(t))]
            return ObjT(tuple(fields))
        if isinstance(e, A.ArrowFunc):
            return self.function(e, e.params, e.annotation, e.body, scope)
        if isinstance(e, A.Call):
            return self.call(e, scope)
        if isinstance(e, A.New):
            return self.new(e, scope)
        if isinstance(e, A.Member):
            return self.member(self.expr(e.obj, scope), e.prop, e)
        if isinstance(e, A.Index):
            obj = self.expr(e.obj, scope)
            idx = self.expr(e.index, scope)
            if obj == UNKNOWN:
                self.err("unknown-use", e, "object is of type 'unknown'")
                return ANY
            if isinstance(obj, ArrayT):
                if idx not in (NUMBER, ANY):
                    self.err("bad-operand", e.index, f"cannot index an array with '{format_type(idx)}'")
                return obj.elem
            if obj == STRING:
                return STRING
            if obj in (NULL, UNDEFINED, VOID, NUMBER, BOOLEAN):
                self.err("bad-operand", e, f"cannot index a value of type '{format_type(obj)}'")
            return ANY
        if isinstance(e, A.BinaryOp):
            return self.binary(e, scope)
        if isinstance(e, A.Unary):
            t = self.expr(e.arg, scope)
            if e.op == "!":
                return BOOLEAN
            if e.op == "typeof":
                return STRING
            if e.op == "+":
                return NUMBER
            if t == UNKNOWN:
                self.err("unknown-use", e, "operand is of type 'unknown'")
            elif t not in (NUMBER, ANY):
                self.err("bad-operand", e, f"operator '{e.op}' cannot be applied to '{format_type(t)}'")
            return NUMBER
        if isinstance(e, A.Update):
            t = self.expr(e.arg, scope)
            self.check_target(e.arg, scope)
            if t not in (NUMBER, ANY):
                self.err("bad-operand", e, f"operator '{e.op}' cannot be applied to '{format_type(t)}'")
            return NUMBER
        if isinstance(e, A.Assign):
            return self.assign(e, scope)
        if isinstance(e, A.Cond):
            self.expr(e.test, scope)
            return _join([self.expr(e.cons, scope), self.expr(e.alt, scope)])
        if isinstance(e, A.AsExpr):
            self.expr(e.expr, scope)
            return self.table.resolve(e.annotation.type)
        raise TypeError(f"unexpected expression {e.kind}")

    def check_target(self, target, scope: Scope) -> None:
        if isinstance(target, A.Ident):
            b = scope.lookup(target.name)
            if b is not None and b.const:
                self.err("const-assign", target, f"cannot assign to constant '{target.name}'")

    def assign(self, e: A.Assign, scope: Scope) -> TypeExpr:
        dst = self.expr(e.target, scope)
        self.check_target(e.target, scope)
        val = self.expr(e.value, scope)
        if e.op == "=":
            src = val
        elif e.op == "+=":
            src = self.plus_type(dst, val, e)
        else:
            self.arith_operands(dst, val, e, e.op[:-1])
            src = NUMBER
        if not self.ok(src, dst):
            self.err("assign-mismatch", e.value,
                     f"type '{format_type(src)}' is not assignable to '{format_type(dst)}'")
        return src

    def plus_type(self, lt: TypeExpr, rt: TypeExpr, e) -> TypeExpr:
        if UNKNOWN in (lt, rt):
            self.err("unknown-use", e, "operand is of type 'unknown'")
            return ANY
        if STRING in (lt, rt):
            return STRING
        if lt == NUMBER and rt == NUMBER:
            return NUMBER
        if ANY in (lt, rt):
            return ANY
        self.err("bad-operand", e, f"operator '+' cannot be applied to '{format_type(lt)}' and '{format_type(rt)}'")
        return ANY

    def arith_operands(self, lt, rt, e, op) -> None:
        for t in (lt, rt):
            if t == UNKNOWN:
                self.err("unknown-use", e, "operand is of type 'unknown'")
                return
            if t not in (NUMBER, ANY):
                self.err("bad-operand", e, f"operator '{op}' cannot be applied to '{format_type(t)}'")
                return

    def binary(self, e: A.BinaryOp, scope: Scope) -> TypeExpr:
        lt = self.expr(e.left, scope)
        rt = self.expr(e.right, scope)
        op = e.op
        if op == "+":
            return self.plus_type(lt, rt, e)
        if op in ("-", "*", "/", "%", "**", "<<", ">>", ">>>", "&", "|", "^"):
            self.arith_operands(lt, rt, e, op)
            return NUMBER
        if op in ("<", ">", "<=", ">="):
            if UNKNOWN in (lt, rt):
                self.err("unknown-use", e, "operand is of type 'unknown'")
            elif not (all(t in (NUMBER, ANY) for t in (lt, rt)) or all(t in (STRING, ANY) for t in (lt, rt))):
                self.err("bad-operand", e,
                         f"operator '{op}' cannot compare '{format_type(lt)}' and '{format_type(rt)}'")
            return BOOLEAN
        if op in ("==", "!=", "===", "!=="):
            prims = (NUMBER, STRING, BOOLEAN)
            if lt in prims and rt in prims and lt != rt:
                self.err("bad-operand", e,
                         f"comparison between '{format_type(lt)}' and '{format_type(rt)}' is always false")
            return BOOLEAN
        if op in ("&&", "||"):
            if op == "||" and lt in (NULL, UNDEFINED):
                return rt
            return lt if lt == rt else ANY
        raise TypeError(f"unknown operator {op}")

    def check_args(self, fn: TypeExpr, args, arg_types, e) -> None:
        if isinstance(fn, RestFuncT):
            if len(args) < len(fn.params):
                self.err("arity", e, f"expected at least {len(fn.params)} arguments, got {len(args)}")
            for i, (a, t) in enumerate(zip(args, arg_types)):
                p = fn.params[i] if i < len(fn.params) else fn.rest
                if not self.ok(t, p):
                    self.err("arg-mismatch", a,
                             f"argument of type '{format_type(t)}' is not assignable to '{format_type(p)}'")
            return
        if len(args) < fn.required or len(args) > len(fn.params):
            want = str(len(fn.params)) if fn.required == len(fn.params) else f"{fn.required}-{len(fn.params)}"
            self.err("arity", e, f"expected {want} arguments, got {len(args)}")
        for a, t, p in zip(args, arg_types, fn.params):
            if not self.ok(t, p):
                self.err("arg-mismatch", a,
                         f"argument of type '{format_type(t)}' is not assignable to '{format_type(p)}'")

    def call(self, e: A.Call, scope: Scope) -> TypeExpr:
        fn = self.expr(e.callee, scope)
        arg_types = [self.expr(a, scope) for a in e.args]
        if fn == ANY or isinstance(fn, FunctionTop):
            return ANY
        if fn == UNKNOWN:
            self.err("unknown-use", e, "cannot call a value of type 'unknown'")
            return ANY
        if isinstance(fn, (FuncT, RestFuncT)):
            self.check_args(fn, e.args, arg_types, e)
            if (isinstance(e.callee, A.Member) and e.callee.prop == "map" and arg_types
                    and isinstance(self.types.get(e.callee.obj), ArrayT) and isinstance(arg_types[0], FuncT)):
                return ArrayT(widen(arg_types[0].ret))
            return fn.ret
        self.err("not-callable", e, f"type '{format_type(fn)}' is not callable")
        return ANY

    def new(self, e: A.New, scope: Scope) -> TypeExpr:
        callee = self.expr(e.callee, scope)
        arg_types = [self.expr(a, scope) for a in e.args]
        if callee == ANY:
            return ANY
        if isinstance(callee, ClassRefT):
            self.check_args(self.table.ctor(callee.name), e.args, arg_types, e)
            return Named(callee.name)
        self.err("not-constructable", e, f"type '{format_type(callee)}' is not constructable")
        return ANY

    def member(self, obj: TypeExpr, prop: str, e) -> TypeExpr:
        found: Optional[TypeExpr] = None
        if obj == ANY:
            return ANY
        if obj == UNKNOWN:
            self.err("unknown-use", e, "object is of type 'unknown'")
            return ANY
        if obj == STRING:
            found = _string_members().get(prop)
        elif obj == NUMBER:
            found = _NUMBER_MEMBERS.get(prop)
        elif obj == BOOLEAN:
            found = _BOOLEAN_MEMBERS.get(prop)
        elif isinstance(obj, ArrayT):
            found = _array_members(obj.elem).get(prop)
        elif isinstance(obj, ObjT):
            found = obj.get(prop)
        elif isinstance(obj, Named):
            found = self.table.instance_member(obj.name, prop)
        elif isinstance(obj, ClassRefT):
            found = self.table.static_member(obj.name, prop)
        elif isinstance(obj, (FuncT, FunctionTop, RestFuncT)):
            return NUMBER if prop == "length" else ANY
        if found is None:
            self.err("no-property", e, f"property '{prop}' does not exist on type '{format_type(obj)}'")
            return ANY
        return found


# -- public API --------------------------------------------------------------------------


def check(program: A.Program) -> list[MTSTypeError]:
    return Checker(program).run()


def run_checker(program: A.Program) -> Checker:
    c = Checker(program)
    c.run()
    return c


class MTSChecker:
    """Default checker. Anything with a ``check(program) -> list`` method can
    stand in for it (for example an adapter around an external compiler)."""

    def check(self, program: A.Program) -> list[MTSTypeError]:
        return check(program)


def make_env(bindings: dict[str, TypeExpr], program: Optional[A.Program] = None) -> Scope:
    """A typing environment holding the prelude plus ``bindings``."""
    c = Checker(program or A.Program([]))
    c.collect_types()
    scope = c.globals.child()
    for k, v in bindings.items():
        scope.vars[k] = Binding(v)
    scope.checker = c  # type: ignore[attr-defined]
    return scope


def infer_local(decl: A.VarDecl, env: Optional[Scope] = None) -> TypeExpr:
    """Type of ``decl``'s initializer under ``env``; ``any`` when unknown."""
    if decl.init is None:
        return ANY
    env = env if env is not None else make_env({})
    c: Checker = getattr(env, "checker", None) or make_env({}).checker  # type: ignore[attr-defined]
    c.quiet += 1
    try:
        t = widen(c.expr(decl.init, env))
    finally:
        c.quiet -= 1
    return t if is_annotatable(t) else ANY


def infer_locals(program: A.Program) -> dict[A.VarDecl, TypeExpr]:
    """``infer_local`` for every variable declaration, each in its own scope."""
    return run_checker(program).local_types
