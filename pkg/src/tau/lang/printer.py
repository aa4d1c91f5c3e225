"""Canonical MTS rendering: two-space indentation, one statement per line.

Comments attached in front of statements and members are kept; comments
inside expressions are dropped.
"""

from __future__ import annotations

from tau.lang import ast as A
from tau.typesys.texpr import format_type

INDENT = "  "

_BINARY_PREC = {
    "||": 3, "&&": 4, "|": 5, "^": 6, "&": 7,
    "==": 8, "!=": 8, "===": 8, "!==": 8,
    "<": 9, ">": 9, "<=": 9, ">=": 9,
    "<<": 10, ">>": 10, ">>>": 10,
    "+": 11, "-": 11, "*": 12, "/": 12, "%": 12, "**": 13,
}


def _prec(e) -> int:
    if isinstance(e, (A.Assign, A.ArrowFunc)):
        return 1
    if isinstance(e, A.Cond):
        return 2
    if isinstance(e, A.BinaryOp):
        return _BINARY_PREC[e.op]
    if isinstance(e, A.AsExpr):
        return 9
    if isinstance(e, A.Unary) or (isinstance(e, A.Update) and e.prefix):
        return 14
    if isinstance(e, A.Update):
        return 15
    if isinstance(e, (A.Call, A.New, A.Member, A.Index)):
        return 16
    return 17


class Printer:
    def __init__(self):
        self.lines: list[str] = []

    def ann(self, ann) -> str:
        return "" if ann is None else ": " + format_type(ann.type)

    def params(self, params) -> str:
        parts = []
        for p in params:
            s = p.name + self.ann(p.annotation)
            if p.default is not None:
                s += " = " + self.expr(p.default, 2, 0)
            parts.append(s)
        return "(" + ", ".join(parts) + ")"

    # -- expressions ---------------------------------------------------

    def expr(self, e, min_prec: int = 0, depth: int = 0) -> str:
        s = self._expr(e, depth)
        return f"({s})" if _prec(e) < min_prec else s

    def _expr(self, e, depth: int) -> str:
        if isinstance(e, A.Literal):
            return e.raw
        if isinstance(e, A.Ident):
            return e.name
        if isinstance(e, A.This):
            return "this"
        if isinstance(e, A.ArrayLit):
            return "[" + ", ".join(self.expr(x, 2, depth) for x in e.elements) + "]"
        if isinstance(e, A.ObjectLit):
            if not e.props:
                return "{}"
            pad = INDENT * (depth + 1)
            inner = []
            for p in e.props:
                if p.value is None:
                    inner.append(pad + p.key)
                else:
                    inner.append(pad + _prop_key(p.key) + ": " + self.expr(p.value, 2, depth + 1))
            return "{\n" + ",\n".join(inner) + "\n" + INDENT * depth + "}"
        if isinstance(e, A.ArrowFunc):
            if e.bare:
                head = e.params[0].name
            else:
                head = self.params(e.params) + self.ann(e.annotation)
            if isinstance(e.body, A.Block):
                body = self.block_text(e.body, depth)
            else:
                body = self.expr(e.body, 2, depth)
                if isinstance(e.body, A.ObjectLit):
                    body = f"({body})"
            return f"{head} => {body}"
        if isinstance(e, A.Call):
            return self.expr(e.callee, 16, depth) + "(" + ", ".join(self.expr(a, 2, depth) for a in e.args) + ")"
        if isinstance(e, A.New):
            callee = self.expr(e.callee, 17 if isinstance(e.callee, A.Call) else 16, depth)
            return "new " + callee + "(" + ", ".join(self.expr(a, 2, depth) for a in e.args) + ")"
        if isinstance(e, A.Member):
            obj = self.expr(e.obj, 16, depth)
            if isinstance(e.obj, A.Literal) and e.obj.lit == "number":
                obj = f"({obj})"  # `1.v` would lex as a number
            return obj + "." + e.prop
        if isinstance(e, A.Index):
            return self.expr(e.obj, 16, depth) + "[" + self.expr(e.index, 0, depth) + "]"
        if isinstance(e, A.BinaryOp):
            p = _BINARY_PREC[e.op]
            if e.op == "**":
                return f"{self.expr(e.left, p + 1, depth)} ** {self.expr(e.right, p, depth)}"
            return f"{self.expr(e.left, p, depth)} {e.op} {self.expr(e.right, p + 1, depth)}"
        if isinstance(e, A.AsExpr):
            return f"{self.expr(e.expr, 9, depth)} as {format_type(e.annotation.type)}"
        if isinstance(e, A.Unary):
            arg = self.expr(e.arg, 14, depth)
            if e.op == "typeof":
                return "typeof " + arg
            if arg.startswith(e.op) and e.op in "+-":
                return f"{e.op} {arg}"
            return e.op + arg
        if isinstance(e, A.Update):
            if e.prefix:
                return e.op + self.expr(e.arg, 14, depth)
            return self.expr(e.arg, 16, depth) + e.op
        if isinstance(e, A.Assign):
            return f"{self.expr(e.target, 16, depth)} {e.op} {self.expr(e.value, 1, depth)}"
        if isinstance(e, A.Cond):
            return f"{self.expr(e.test, 3, depth)} ? {self.expr(e.cons, 1, depth)} : {self.expr(e.alt, 1, depth)}"
        raise TypeError(f"cannot print {e!r}")

    # -- statements ----------------------------------------------------

    def block_text(self, block: A.Block, depth: int) -> str:
        if not block.body and not block.trailing_comments:
            return "{}"
        sub = Printer()
        for s in block.body:
            sub.stmt(s, depth + 1)
        sub.comments(block.trailing_comments, depth + 1)
        return "{\n" + "\n".join(sub.lines) + "\n" + INDENT * depth + "}"

    def comments(self, comments, depth: int) -> None:
        for c in comments:
            self.lines.append(INDENT * depth + c.text)

    def emit(self, text: str, depth: int) -> None:
        self.lines.append(INDENT * depth + text)

    def body_text(self, s, depth: int) -> str:
        """Text after a control header: a block inline, otherwise a nested line."""
        if isinstance(s, A.BlockStmt) and not s.comments:
            return " " + self.block_text(s.block, depth)
        sub = Printer()
        sub.stmt(s, depth + 1)
        return "\n" + "\n".join(sub.lines)

    def var_text(self, s: A.VarDecl, depth: int) -> str:
        out = f"{s.keyword} {s.name}{self.ann(s.annotation)}"
        if s.init is not None:
            out += " = " + self.expr(s.init, 1, depth)
        return out

    def stmt(self, s, depth: int) -> None:
        self.comments(getattr(s, "comments", []), depth)
        export = "export " if getattr(s, "exported", False) else ""
        if isinstance(s, A.VarDecl):
            self.emit(export + self.var_text(s, depth) + ";", depth)
        elif isinstance(s, A.FuncDecl):
            self.emit(f"{export}function {s.name}{self.params(s.params)}{self.ann(s.annotation)} "
                      + self.block_text(s.body, depth), depth)
        elif isinstance(s, A.ClassDecl):
            head = f"{export}class {s.name}" + (f" extends {s.superclass}" if s.superclass else "")
            self.emit(head + " {", depth)
            for m in s.members:
                self.member(m, depth + 1)
            self.comments(s.trailing_comments, depth + 1)
            self.emit("}", depth)
        elif isinstance(s, A.InterfaceDecl):
            self.emit(f"{export}interface {s.name} {{", depth)
            for m in s.members:
                self.member(m, depth + 1)
            self.comments(s.trailing_comments, depth + 1)
            self.emit("}", depth)
        elif isinstance(s, A.TypeAlias):
            self.emit(f"{export}type {s.name} = {format_type(s.annotation.type)};", depth)
        elif isinstance(s, A.Return):
            self.emit("return;" if s.arg is None else f"return {self.expr(s.arg, 0, depth)};", depth)
        elif isinstance(s, A.Throw):
            self.emit(f"throw {self.expr(s.arg, 0, depth)};", depth)
        elif isinstance(s, A.Break):
            self.emit("break;", depth)
        elif isinstance(s, A.Continue):
            self.emit("continue;", depth)
        elif isinstance(s, A.ExprStmt):
            code = self.expr(s.expr, 0, depth)
            if code.startswith(("{", "function")):
                code = f"({code})"  # would otherwise read as a block or declaration
            self.emit(code + ";", depth)
        elif isinstance(s, A.ExportDefault):
            self.emit("export default " + self.expr(s.expr, 1, depth) + ";", depth)
        elif isinstance(s, A.BlockStmt):
            self.emit(self.block_text(s.block, depth), depth)
        elif isinstance(s, A.If):
            text = f"if ({self.expr(s.test, 0, depth)})" + self.body_text(s.cons, depth)
            if s.alt is not None:
                joiner = " else" if text.endswith("}") else "\n" + INDENT * depth + "else"
                if isinstance(s.alt, A.If) and not s.alt.comments:
                    sub = Printer()
                    sub.stmt(s.alt, depth)
                    text += joiner + " " + "\n".join(sub.lines).lstrip()
                else:
                    text += joiner + self.body_text(s.alt, depth)
            self.emit(text, depth)
        elif isinstance(s, A.While):
            self.emit(f"while ({self.expr(s.test, 0, depth)})" + self.body_text(s.body, depth), depth)
        elif isinstance(s, A.For):
            if s.init is None:
                init = ""
            elif isinstance(s.init, A.VarDecl):
                init = self.var_text(s.init, depth)
            else:
                init = self.expr(s.init, 0, depth)
            test = "" if s.test is None else " " + self.expr(s.test, 0, depth)
            update = "" if s.update is None else " " + self.expr(s.update, 0, depth)
            self.emit(f"for ({init};{test};{update})" + self.body_text(s.body, depth), depth)
        elif isinstance(s, A.ForOf):
            self.emit(f"for ({s.keyword} {s.name} of {self.expr(s.iterable, 0, depth)})"
                      + self.body_text(s.body, depth), depth)
        else:
            raise TypeError(f"cannot print {s!r}")

    def member(self, m, depth: int) -> None:
        self.comments(m.comments, depth)
        mods = "".join(x + " " for x in getattr(m, "modifiers", []))
        if isinstance(m, A.Field):
            init = "" if m.init is None else " = " + self.expr(m.init, 1, depth)
            self.emit(f"{mods}{m.name}{self.ann(m.annotation)}{init};", depth)
        elif isinstance(m, A.Method):
            self.emit(f"{mods}{m.name}{self.params(m.params)}{self.ann(m.annotation)} "
                      + self.block_text(m.body, depth), depth)
        elif isinstance(m, A.PropSig):
            self.emit(f"{m.name}{self.ann(m.annotation)};", depth)
        elif isinstance(m, A.IndexSig):
            self.emit(f"[{m.key_name}: {format_type(m.key_type.type)}]: {format_type(m.annotation.type)};", depth)
        else:
            raise TypeError(f"cannot print member {m!r}")


def _prop_key(key: str) -> str:
    if key.isidentifier() or key.isdigit():
        return key
    return repr(key)


def print_program(program: A.Program) -> str:
    p = Printer()
    for s in program.body:
        p.stmt(s, 0)
    p.comments(program.trailing_comments, 0)
    return "\n".join(p.lines) + "\n" if p.lines else ""
