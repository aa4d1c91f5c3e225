"""Offline predictor that infers types from the evidence inside the prompt.

It only sees what a model would see: the (possibly truncated) prompt and
its usage comment. Evidence is tried first (returned values, call-site
arguments, how a parameter is used); without evidence it falls back to a
guess from the identifier name, the way a language model leans on names.
With several samples it emits the proposal followed by weaker variants.
"""

from __future__ import annotations

import re
from typing import Optional

from tau.lang import ast as A
from tau.lang.lexer import tokenize
from tau.lang.parser import parse_lenient
from tau.lang.sites import find_annotation_sites
from tau.predictor.base import HOLE, PredictRequest, PredictResponse
from tau.typesys.checker import Checker, widen
from tau.typesys.texpr import (
    ANY, BOOLEAN, FUNCTION, NUMBER, STRING, VOID, ArrayT, FuncT, Named, ObjT, TypeExpr,
    format_type, is_annotatable,
)

_USAGE_RE = re.compile(r"/\* Example usages of '[^']*' are shown below:\n(.*?) \*/", re.S)

_STRING_METHODS = {"toUpperCase", "toLowerCase", "trim", "split", "charAt", "charCodeAt", "startsWith",
                   "endsWith", "substring", "substr", "padStart", "padEnd", "repeat", "replace"}
_ARRAY_METHODS = {"push", "pop", "shift", "unshift", "map", "filter", "forEach", "reduce", "find",
                  "findIndex", "some", "every", "join", "sort", "reverse", "splice"}
_ARITH = {"-", "*", "/", "%", "**", "<<", ">>", ">>>", "&", "|", "^"}
_COMPARE = {"<", ">", "<=", ">="}

_BOOL_NAME = re.compile(r"^(is|has|can|should|enable|allow|visible|done|ok|flag)([A-Z_]|$)")
_STRING_NAME = re.compile(r"(name|key|id|prefix|suffix|label|title|text|str|msg|message|path|url|word|"
                          r"char|sep|separator|code|tag|greeting|email|format)$", re.I)
_NUMBER_NAME = re.compile(r"^(n|i|j|k|x|y|z|lo|hi|dx|dy)$|(count|num|index|idx|size|length|len|total|sum|"
                          r"age|width|height|min|max|amount|price|score|delta|step|rate|radius|level)$", re.I)
_ARRAY_NAMES = {"items": ArrayT(ANY), "list": ArrayT(ANY), "values": ArrayT(ANY), "arr": ArrayT(ANY),
                "array": ArrayT(ANY), "elements": ArrayT(ANY), "nums": ArrayT(NUMBER),
                "numbers": ArrayT(NUMBER), "xs": ArrayT(NUMBER), "words": ArrayT(STRING),
                "names": ArrayT(STRING), "keys": ArrayT(STRING), "lines": ArrayT(STRING)}
_BOOL_FN = re.compile(r"^(is|has|can|should|contains|check)[A-Z_]")
_STRING_FN = re.compile(r"^(format|to[A-Z]\w*String|greet|describe|render|join|repeat)|(Name|Key|Id|Label|Text|"
                        r"String|Message)$")
_NUMBER_FN = re.compile(r"^(count|compute|sum|area|average|mean|total|index|size|clamp|square|double|"
                        r"add|sub|mul|div)|(Count|Sum|Total|Index|Size|Length|Area)$")


def name_prior(name: str) -> Optional[TypeExpr]:
    """Guess a value's type from its identifier, as a model would."""
    if name in _ARRAY_NAMES:
        return _ARRAY_NAMES[name]
    if _BOOL_NAME.search(name):
        return BOOLEAN
    if _NUMBER_NAME.search(name):
        return NUMBER
    if _STRING_NAME.search(name):
        return STRING
    return None


def return_prior(name: str) -> Optional[TypeExpr]:
    if _BOOL_FN.search(name):
        return BOOLEAN
    if _NUMBER_FN.search(name):
        return NUMBER
    if _STRING_FN.search(name):
        return STRING
    return None


def weaken(t: TypeExpr) -> TypeExpr:
    if isinstance(t, FuncT):
        return FUNCTION
    if isinstance(t, ArrayT) and t.elem != ANY:
        return ArrayT(ANY)
    return ANY


def _join(types: list[TypeExpr]) -> Optional[TypeExpr]:
    ts = [widen(t) for t in types]
    ts = [t for t in ts if t != ANY]
    if not ts:
        return None
    if all(t == ts[0] for t in ts):
        return ts[0]
    arrays = [t for t in ts if isinstance(t, ArrayT)]
    if len(arrays) == len(ts):
        specific = {t for t in arrays if t.elem != ANY}
        if len(specific) <= 1:
            return specific.pop() if specific else ArrayT(ANY)
    return None


def _repair(text: str) -> str:
    """Close brackets left open by a truncated window."""
    stack = []
    for tok in tokenize(text).tokens:
        if tok.kind != "punct":
            continue
        if tok.value in "({[":
            stack.append({"(": ")", "{": "}", "[": "]"}[tok.value])
        elif tok.value in ")}]" and stack and stack[-1] == tok.value:
            stack.pop()
    return text + "\n" + "\n".join(reversed(stack))


class _Evidence:
    def __init__(self, program: A.Program):
        self.program = program
        self.checker = Checker(program)
        self.checker.quiet = 1
        self.checker.run()
        self.types = self.checker.types
        self.interfaces = {d.name: d for d in program.walk() if isinstance(d, A.InterfaceDecl)}
        self.parents: dict[A.Node, A.Node] = {}
        for n in program.walk():
            for c in n.children():
                self.parents[c] = n

    def type_of(self, e) -> TypeExpr:
        return self.types.get(e, ANY)

    def iface_for(self, obj: ObjT) -> Optional[TypeExpr]:
        keys = {k for k, _ in obj.fields}
        table = self.checker.table
        for name, d in self.interfaces.items():
            props = {m.name for m in d.members if isinstance(m, A.PropSig)}
            if props == keys and table.compatible(obj, Named(name)):
                return Named(name)
        return None

    def clean(self, t: Optional[TypeExpr]) -> Optional[TypeExpr]:
        if t is None:
            return None
        if isinstance(t, ObjT):
            return self.iface_for(t)
        if isinstance(t, ArrayT) and isinstance(t.elem, ObjT):
            elem = self.iface_for(t.elem)
            return ArrayT(elem) if elem is not None else ArrayT(ANY)
        t = widen(t)
        if t == ANY or not is_annotatable(t):
            return None
        return t

    # -- site kinds -------------------------------------------------------------------

    def function_of(self, param: A.Param):
        for n in self.program.walk():
            if isinstance(n, (A.FuncDecl, A.Method, A.ArrowFunc)) and any(p is param for p in n.params):
                return n
        return None

    def fn_name(self, fn) -> Optional[str]:
        if isinstance(fn, (A.FuncDecl, A.Method)):
            return fn.name
        parent = self.parents.get(fn)
        if isinstance(parent, A.VarDecl):
            return parent.name
        if isinstance(parent, A.Field):
            return parent.name
        return None

    def return_exprs(self, fn) -> list:
        """Returned expressions of ``fn``, not looking into nested functions."""
        out = []

        def visit(n):
            if isinstance(n, A.Return) and n.arg is not None:
                out.append(n.arg)
            for c in n.children():
                if not isinstance(c, (A.FuncDecl, A.ArrowFunc, A.Method, A.ClassDecl)):
                    visit(c)

        visit(fn.body)
        return out

    def expr_type(self, e) -> TypeExpr:
        t = self.type_of(e)
        if t == ANY and isinstance(e, A.New) and isinstance(e.callee, A.Ident) and e.callee.name[:1].isupper():
            return Named(e.callee.name)  # a class declared outside the visible text
        return t

    def returns(self, fn) -> tuple[Optional[TypeExpr], bool]:
        """Joined return type, and whether a name guess is still reasonable.

        A guess is reasonable when nothing is returned or when every
        untyped returned value is built from the parameters alone.
        """
        if not isinstance(getattr(fn, "body", None), A.Block):
            return None, True
        exprs = self.return_exprs(fn)
        if not exprs:
            return VOID, False
        params = {p.name for p in fn.params}
        cleaned, guessable = [], True
        for e in exprs:
            t = self.clean(self.expr_type(e))
            if t is None:
                guessable = guessable and _from_params(e, params)
                t = ANY
            cleaned.append(t)
        return _join(cleaned), guessable

    def call_args(self, fn, index: int) -> Optional[TypeExpr]:
        name = self.fn_name(fn)
        if name is None:
            return None
        found = []
        for n in self.program.walk():
            if not isinstance(n, (A.Call, A.New)) or index >= len(n.args):
                continue
            c = n.callee
            if (isinstance(c, A.Ident) and c.name == name) or (isinstance(c, A.Member) and c.prop == name):
                found.append(self.clean(self.expr_type(n.args[index])) or ANY)
        return _join(found)

    def demands(self, fn, name: str) -> Optional[TypeExpr]:
        body = fn.body
        found: list[TypeExpr] = []
        for n in body.walk():
            if not (isinstance(n, A.Ident) and n.name == name):
                continue
            t = self.demand_at(n)
            if t is not None:
                found.append(t)
        return _join(found) if found else None

    def demand_at(self, ident: A.Ident) -> Optional[TypeExpr]:
        parent = self.parents.get(ident)
        if isinstance(parent, A.Member) and parent.obj is ident:
            if parent.prop in _STRING_METHODS:
                return STRING
            if parent.prop in _ARRAY_METHODS:
                return ArrayT(ANY)
            if parent.prop == "length":
                return None
            owners = [k for k, d in self.interfaces.items()
                      if any(isinstance(m, A.PropSig) and m.name == parent.prop for m in d.members)]
            return Named(owners[0]) if len(owners) == 1 else None
        if isinstance(parent, A.Index) and parent.obj is ident:
            outer = self.parents.get(parent)
            if isinstance(outer, A.BinaryOp) and outer.op in _ARITH | _COMPARE:
                return ArrayT(NUMBER)
            if isinstance(outer, A.Assign) and outer.op in ("+=", "-=", "*=") and outer.value is parent:
                tgt = self.type_of(outer.target)
                return ArrayT(NUMBER) if tgt == NUMBER else ArrayT(ANY)
            return ArrayT(ANY)
        if isinstance(parent, A.ForOf) and parent.iterable is ident:
            return ArrayT(ANY)
        if isinstance(parent, A.BinaryOp):
            other = parent.right if parent.left is ident else parent.left
            ot = self.type_of(other)
            if parent.op in _ARITH:
                return NUMBER
            if parent.op in _COMPARE:
                return ot if ot in (NUMBER, STRING) else NUMBER
            if parent.op in ("===", "!==", "==", "!=") and isinstance(other, A.Literal):
                return self.clean(ot)
            if parent.op == "+" and ot == NUMBER and isinstance(other, A.Literal):
                return NUMBER
            return None
        if isinstance(parent, A.Unary) and parent.op in ("-", "~"):
            return NUMBER
        if isinstance(parent, A.Update):
            return NUMBER
        if isinstance(parent, A.Assign):
            if parent.target is ident and parent.op in ("-=", "*=", "/=", "%="):
                return NUMBER
            if parent.value is ident:
                return self.clean(self.type_of(parent.target))
            return None
        if isinstance(parent, A.Call):
            if parent.callee is ident:
                return FUNCTION
            callee = self.type_of(parent.callee)
            i = next(k for k, a in enumerate(parent.args) if a is ident)
            if isinstance(callee, FuncT) and i < len(callee.params):
                return self.clean(callee.params[i])
        return None

    def field_type(self, node: A.Field) -> Optional[TypeExpr]:
        if node.init is not None:
            return self.clean(self.type_of(node.init))
        found = []
        for n in self.program.walk():
            if (isinstance(n, A.Assign) and n.op == "=" and isinstance(n.target, A.Member)
                    and isinstance(n.target.obj, A.This) and n.target.prop == node.name):
                found.append(self.clean(self.type_of(n.value)) or ANY)
        return _join(found)

    def prop_type(self, iface: str, prop: str) -> Optional[TypeExpr]:
        d = self.interfaces.get(iface)
        if d is None:
            return None
        keys = {m.name for m in d.members if isinstance(m, A.PropSig)}
        found = []
        for n in self.program.walk():
            if isinstance(n, A.ObjectLit) and {p.key for p in n.props} >= keys:
                t = self.type_of(n)
                if isinstance(t, ObjT) and t.get(prop) is not None:
                    found.append(t.get(prop))
        return _join(found)


def _from_params(e, params: set[str]) -> bool:
    """Whether ``e`` only combines parameters and literals, without calls."""
    for n in e.walk():
        if isinstance(n, (A.Call, A.New, A.This)):
            return False
        if isinstance(n, A.Ident) and n.name not in params:
            return False
    return True


def _hole_site(program: A.Program):
    for s in find_annotation_sites(program):
        if s.type == Named(HOLE):
            return s
    return None


def _usage_lines(prefix: str) -> list[str]:
    m = _USAGE_RE.search(prefix)
    if not m:
        return []
    return [ln.strip() for ln in m.group(1).split("\n") if ln.strip()]


def _candidates(prompt: str, usages: list[str]) -> list[str]:
    """Program texts to try, most faithful first."""
    extra = "\n".join(usages)
    out = [prompt + "\n" + extra, _repair(prompt) + "\n" + extra]
    body = "class __Block {\n" + prompt + "\n__usage() {\n" + extra + "\n}\n}\n"
    out.append(body)
    out.append("class __Block {\n" + _repair(prompt) + "\n__usage() {\n" + extra + "\n}\n}\n")
    return out


class OraclePredictor:
    def __init__(self):
        self._cache: dict[tuple[str, str], TypeExpr] = {}

    def propose(self, prefix: str, suffix: str) -> TypeExpr:
        key = (prefix, suffix)
        if key not in self._cache:
            self._cache[key] = self._propose(prefix, suffix)
        return self._cache[key]

    def _propose(self, prefix: str, suffix: str) -> TypeExpr:
        usages = _usage_lines(prefix)
        prompt = prefix + HOLE + suffix
        for text in _candidates(prompt, usages):
            program, _ = parse_lenient(text)
            site = _hole_site(program)
            if site is not None:
                t = self.infer(_Evidence(program), site)
                return t if t is not None and is_annotatable(t) else ANY
        return ANY

    def infer(self, ev: _Evidence, site) -> Optional[TypeExpr]:
        owner = site.owner
        if site.site_kind == "Return":
            t, guessable = ev.returns(owner)
            if isinstance(owner, A.ArrowFunc) and not isinstance(owner.body, A.Block):
                t = ev.clean(ev.expr_type(owner.body))
                guessable = t is None and _from_params(owner.body, {p.name for p in owner.params})
            name = ev.fn_name(owner)
            if t is None and guessable and name:
                t = return_prior(name)
            return t
        if site.site_kind == "Param":
            fn = ev.function_of(owner)
            if fn is None:
                return name_prior(owner.name)
            index = next(i for i, p in enumerate(fn.params) if p is owner)
            t = ev.call_args(fn, index)
            if t is None and owner.default is not None:
                t = ev.clean(ev.type_of(owner.default))
            if t is None:
                t = ev.demands(fn, owner.name)
            return t or name_prior(owner.name)
        if site.site_kind == "Field":
            return ev.field_type(owner) or name_prior(owner.name)
        if site.site_kind == "InterfaceProp":
            return ev.prop_type(site.key.path[-2], owner.name) or name_prior(owner.name)
        return None

    def predict(self, req: PredictRequest) -> PredictResponse:
        exact = self.propose(req.prefix, req.suffix)
        options = [exact, weaken(exact), ANY]
        out = [options[min(i, 2)] for i in range(req.num_samples)]
        return PredictResponse([format_type(t) for t in out])
