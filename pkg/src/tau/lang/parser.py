"""Recursive-descent parser for MTS.

Grammar (abridged)::

    program   := stmt*
    stmt      := varDecl | funcDecl | classDecl | interfaceDecl | typeAlias
               | return | if | while | for | throw | break | continue
               | block | exprStmt | "export" "default" expr ";"
    varDecl   := ("let"|"const"|"var") Ident (":" type)? ("=" expr)? ";"
    funcDecl  := "function" Ident "(" params ")" (":" type)? block
    arrow     := "(" params ")" (":" type)? "=>" (block | expr) | Ident "=>" ...
    params    := (Ident (":" type)? ("=" expr)?) % ","

Semicolons may be omitted before a newline, ``}`` or end of input.
Errors are recovered at statement granularity so callers always get a count.
"""

from __future__ import annotations

from dataclasses import dataclass

from tau.lang import ast as A
from tau.lang.lexer import Comment, Token, tokenize
from tau.typesys.texpr import TypeGrammar, TypeSyntaxError


@dataclass(frozen=True)
class SyntaxErrorInfo:
    message: str
    span: tuple[int, int]
    line: int
    col: int


class MTSSyntaxError(Exception):
    """Raised by :func:`parse`; ``errors`` has at least one entry."""

    def __init__(self, errors: list[SyntaxErrorInfo], partial: A.Program):
        super().__init__(f"{len(errors)} syntax error(s); first: {errors[0].message}")
        self.errors = errors
        self.partial = partial

    @property
    def count(self) -> int:
        return len(self.errors)


class ParseError(TypeSyntaxError):
    pass


MODIFIERS = ("public", "private", "protected", "static", "readonly")
ASSIGN_OPS = ("=", "+=", "-=", "*=", "/=", "%=", "<<=", ">>=", ">>>=")
BINARY_LEVELS = (
    ("||",),
    ("&&",),
    ("|",),
    ("^",),
    ("&",),
    ("==", "!=", "===", "!=="),
    ("<", ">", "<=", ">="),
    ("<<", ">>", ">>>"),
    ("+", "-"),
    ("*", "/", "%"),
)


class Parser(TypeGrammar):
    def __init__(self, text: str):
        lexed = tokenize(text)
        self.text = text
        self.tokens: list[Token] = lexed.tokens
        self.comments: list[Comment] = lexed.comments
        self.pos = 0
        self._pending_gt = 0
        self._ci = 0
        self.errors: list[SyntaxErrorInfo] = [
            SyntaxErrorInfo(e.message, (e.start, e.end), e.line, e.col) for e in lexed.errors
        ]

    # -- helpers -----------------------------------------------------------

    def fail(self, message: str, tok: Token | None = None):
        raise ParseError(message, tok or self.peek())

    @property
    def prev_end(self) -> int:
        return self.tokens[self.pos - 1].end if self.pos else 0

    def at_punct(self, value: str, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok.kind == "punct" and tok.value == value

    def at_kw(self, value: str, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok.kind == "keyword" and tok.value == value

    def eat(self, value: str) -> bool:
        if self.at(value):
            self.advance()
            return True
        return False

    def ident(self) -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            self.fail(f"expected identifier, found {tok.value or 'end of input'!r}")
        return self.advance()

    def name_token(self) -> Token:
        """Identifier or keyword usable as a property name."""
        tok = self.peek()
        if tok.kind not in ("ident", "keyword"):
            self.fail("expected name")
        return self.advance()

    def take_comments(self, before: int) -> list[Comment]:
        out = []
        while self._ci < len(self.comments) and self.comments[self._ci].start < before:
            out.append(self.comments[self._ci])
            self._ci += 1
        return out

    def skip_comments(self, before: int) -> None:
        self.take_comments(before)

    def terminate(self) -> None:
        if self.at_punct(";"):
            self.advance()
            return
        tok = self.peek()
        if tok.kind == "eof" or tok.nl_before or self.at_punct("}"):
            return
        self.fail(f"expected ';', found {tok.value!r}")

    def record(self, err: TypeSyntaxError) -> None:
        tok = err.token
        self.errors.append(SyntaxErrorInfo(str(err), (tok.start, tok.end), tok.line, tok.col))

    def synchronize(self, start_pos: int) -> None:
        if self.pos == start_pos:
            self.advance()
        depth = 0
        while self.peek().kind != "eof":
            tok = self.peek()
            if tok.kind == "punct":
                if tok.value in ("{", "(", "["):
                    depth += 1
                elif tok.value in ("}", ")", "]"):
                    if depth == 0:
                        if tok.value == "}":
                            return
                        self.advance()
                        continue
                    depth -= 1
                elif tok.value == ";" and depth == 0:
                    self.advance()
                    return
            self.advance()

    # -- program -----------------------------------------------------------

    def parse_program(self) -> A.Program:
        body = self.stmt_list(top=True)
        trailing = self.take_comments(len(self.text) + 1)
        return A.Program(body, text=self.text, comments=self.comments,
                         trailing_comments=trailing, span=(0, len(self.text)))

    def parse_class_body_fragment(self) -> A.Program:
        members = []
        while self.peek().kind != "eof":
            start = self.pos
            try:
                members.append(self.class_member())
            except TypeSyntaxError as err:
                self.record(err)
                self.synchronize(start)
        synthetic = A.ClassDecl("", None, members, span=(0, len(self.text)))
        return A.Program([synthetic], text=self.text, comments=self.comments,
                         span=(0, len(self.text)))

    def stmt_list(self, top: bool = False) -> list:
        out = []
        while True:
            if self.peek().kind == "eof":
                if not top:
                    self.record(ParseError("expected '}'", self.peek()))
                return out
            if self.at_punct("}"):
                if top:
                    tok = self.advance()
                    self.record(ParseError("unexpected '}'", tok))
                    continue
                return out
            start = self.pos
            try:
                out.append(self.statement())
            except TypeSyntaxError as err:
                self.record(err)
                self.synchronize(start)
                self._pending_gt = 0

    # -- statements --------------------------------------------------------

    def statement(self):
        tok = self.peek()
        comments = self.take_comments(tok.start)
        node = self._statement()
        node.comments = comments
        self.skip_comments(node.span[1])
        return node

    def _statement(self):
        tok = self.peek()
        start = tok.start
        if tok.kind == "keyword":
            v = tok.value
            if v in ("let", "const", "var"):
                node = self.var_decl()
                self.terminate()
                node.span = (start, self.prev_end)
                return node
            if v == "function":
                return self.func_decl()
            if v == "class":
                return self.class_decl()
            if v == "interface":
                return self.interface_decl()
            if v == "export":
                return self.export_stmt()
            if v == "return":
                self.advance()
                arg = None
                nxt = self.peek()
                if not (self.at_punct(";") or self.at_punct("}") or nxt.kind == "eof" or nxt.nl_before):
                    arg = self.expression()
                self.terminate()
                return A.Return(arg, span=(start, self.prev_end))
            if v == "throw":
                self.advance()
                arg = self.expression()
                self.terminate()
                return A.Throw(arg, span=(start, self.prev_end))
            if v == "break":
                self.advance()
                self.terminate()
                return A.Break(span=(start, self.prev_end))
            if v == "continue":
                self.advance()
                self.terminate()
                return A.Continue(span=(start, self.prev_end))
            if v == "if":
                self.advance()
                self.expect("(")
                test = self.expression()
                self.expect(")")
                cons = self.substatement()
                alt = None
                if self.at_kw("else"):
                    self.advance()
                    alt = self.substatement()
                return A.If(test, cons, alt, span=(start, self.prev_end))
            if v == "while":
                self.advance()
                self.expect("(")
                test = self.expression()
                self.expect(")")
                body = self.substatement()
                return A.While(test, body, span=(start, self.prev_end))
            if v == "for":
                return self.for_stmt()
        if tok.kind == "ident" and tok.value == "type" and self.peek(1).kind == "ident" and self.at_punct("=", 2):
            return self.type_alias(start, False)
        if self.at_punct("{"):
            block = self.block()
            return A.BlockStmt(block, span=block.span)
        expr = self.expression()
        self.terminate()
        return A.ExprStmt(expr, span=(start, self.prev_end))

    def substatement(self):
        node = self.statement()
        return node

    def export_stmt(self):
        start = self.advance().start
        if self.at_kw("default"):
            self.advance()
            expr = self.expression()
            self.terminate()
            return A.ExportDefault(expr, span=(start, self.prev_end))
        tok = self.peek()
        if tok.kind == "keyword" and tok.value in ("let", "const", "var"):
            node = self.var_decl()
            self.terminate()
        elif self.at_kw("function"):
            node = self.func_decl()
        elif self.at_kw("class"):
            node = self.class_decl()
        elif self.at_kw("interface"):
            node = self.interface_decl()
        elif tok.kind == "ident" and tok.value == "type":
            return self.type_alias(start, True)
        else:
            self.fail("expected declaration after 'export'")
        node.exported = True
        node.span = (start, self.prev_end)
        return node

    def type_alias(self, start: int, exported: bool):
        self.advance()
        name = self.ident().value
        self.expect("=")
        ann = self.type_ann_after_colon(self.prev_end)
        self.terminate()
        return A.TypeAlias(name, ann, exported, span=(start, self.prev_end))

    def var_decl(self) -> A.VarDecl:
        kw = self.advance()
        name = self.ident()
        ann = self.opt_type_ann()
        init = None
        if self.at_punct("="):
            self.advance()
            init = self.assignment()
        return A.VarDecl(kw.value, name.value, ann, init, name_span=(name.start, name.end),
                         span=(kw.start, self.prev_end))

    def opt_type_ann(self):
        if not self.at_punct(":"):
            return None
        colon = self.advance()
        return self.type_ann_after_colon(colon.start)

    def type_ann_after_colon(self, colon_start: int) -> A.TypeAnn:
        first = self.peek()
        t = self.parse_type()
        if self._pending_gt:
            self.fail("unbalanced '>' in type")
        return A.TypeAnn(t, colon_start=colon_start, span=(first.start, self.prev_end))

    def params(self) -> list[A.Param]:
        self.expect("(")
        out = []
        while not self.at_punct(")"):
            name = self.ident()
            ann = self.opt_type_ann()
            default = None
            if self.at_punct("="):
                self.advance()
                default = self.assignment()
            out.append(A.Param(name.value, ann, default, name_span=(name.start, name.end),
                               span=(name.start, self.prev_end)))
            if not self.at_punct(")"):
                self.expect(",")
        self.expect(")")
        return out

    def func_decl(self) -> A.FuncDecl:
        start = self.advance().start
        name = self.ident()
        params = self.params()
        ret_offset = self.prev_end
        ann = self.opt_type_ann()
        body = self.block()
        return A.FuncDecl(name.value, params, ann, body, name_span=(name.start, name.end),
                          ret_offset=ret_offset, span=(start, self.prev_end))

    def block(self) -> A.Block:
        start = self.expect("{").start
        body = self.stmt_list()
        trailing = self.take_comments(self.peek().start)
        self.expect("}")
        return A.Block(body, trailing, span=(start, self.prev_end))

    def for_stmt(self):
        start = self.advance().start
        self.expect("(")
        tok = self.peek()
        if tok.kind == "keyword" and tok.value in ("let", "const", "var") and self.at_kw("of", 2):
            kw = self.advance().value
            name = self.ident().value
            self.advance()
            iterable = self.expression()
            self.expect(")")
            body = self.substatement()
            return A.ForOf(kw, name, iterable, body, span=(start, self.prev_end))
        init = None
        if not self.at_punct(";"):
            if tok.kind == "keyword" and tok.value in ("let", "const", "var"):
                init = self.var_decl()
            else:
                init = self.expression()
        self.expect(";")
        test = None if self.at_punct(";") else self.expression()
        self.expect(";")
        update = None if self.at_punct(")") else self.expression()
        self.expect(")")
        body = self.substatement()
        return A.For(init, test, update, body, span=(start, self.prev_end))

    def class_decl(self) -> A.ClassDecl:
        start = self.advance().start
        name = self.ident()
        sup = None
        if self.at_kw("extends"):
            self.advance()
            sup = self.ident().value
        self.expect("{")
        members = []
        while not self.at_punct("}"):
            if self.peek().kind == "eof":
                self.fail("expected '}'")
            mstart = self.pos
            try:
                members.append(self.class_member())
            except TypeSyntaxError as err:
                self.record(err)
                self.synchronize(mstart)
                self._pending_gt = 0
        trailing = self.take_comments(self.peek().start)
        self.advance()
        return A.ClassDecl(name.value, sup, members, name_span=(name.start, name.end),
                           trailing_comments=trailing, span=(start, self.prev_end))

    def class_member(self):
        first = self.peek()
        comments = self.take_comments(first.start)
        mods = []
        while self.peek().kind == "keyword" and self.peek().value in MODIFIERS and not (
            self.at_punct("(", 1) or self.at_punct(":", 1) or self.at_punct("=", 1)
        ):
            mods.append(self.advance().value)
        if self.at_punct("["):
            node = self.index_sig()
        else:
            name = self.name_token()
            if self.at_punct("("):
                params = self.params()
                ret_offset = self.prev_end
                ann = None if name.value == "constructor" else self.opt_type_ann()
                body = self.block()
                node = A.Method(name.value, mods, params, ann, body, name_span=(name.start, name.end),
                                ret_offset=ret_offset)
            else:
                ann = self.opt_type_ann()
                init = None
                if self.at_punct("="):
                    self.advance()
                    init = self.assignment()
                self.terminate()
                node = A.Field(name.value, mods, ann, init, name_span=(name.start, name.end))
        node.span = (first.start, self.prev_end)
        node.comments = comments
        self.skip_comments(node.span[1])
        return node

    def index_sig(self) -> A.IndexSig:
        self.expect("[")
        key = self.ident()
        colon = self.expect(":")
        key_type = self.type_ann_after_colon(colon.start)
        self.expect("]")
        colon = self.expect(":")
        val = self.type_ann_after_colon(colon.start)
        if not self.eat(",") and not self.eat(";"):
            self.terminate()
        return A.IndexSig(key.value, key_type, val)

    def interface_decl(self) -> A.InterfaceDecl:
        start = self.advance().start
        name = self.ident()
        self.expect("{")
        members = []
        while not self.at_punct("}"):
            first = self.peek()
            if first.kind == "eof":
                self.fail("expected '}'")
            mstart = self.pos
            try:
                comments = self.take_comments(first.start)
                if self.at_punct("["):
                    m = self.index_sig()
                else:
                    pname = self.name_token()
                    ann = self.opt_type_ann()
                    if not self.eat(",") and not self.eat(";"):
                        self.terminate()
                    m = A.PropSig(pname.value, ann, name_span=(pname.start, pname.end))
                m.span = (first.start, self.prev_end)
                m.comments = comments
                members.append(m)
            except TypeSyntaxError as err:
                self.record(err)
                self.synchronize(mstart)
                self._pending_gt = 0
        trailing = self.take_comments(self.peek().start)
        self.advance()
        return A.InterfaceDecl(name.value, members, name_span=(name.start, name.end),
                               trailing_comments=trailing, span=(start, self.prev_end))

    # -- expressions -------------------------------------------------------

    def expression(self):
        return self.assignment()

    def assignment(self):
        arrow = self.try_arrow()
        if arrow is not None:
            return arrow
        start = self.peek().start
        left = self.conditional()
        tok = self.peek()
        if tok.kind == "punct" and tok.value in ASSIGN_OPS:
            if not isinstance(left, (A.Ident, A.Member, A.Index)):
                self.fail("invalid assignment target", tok)
            self.advance()
            value = self.assignment()
            return A.Assign(tok.value, left, value, span=(start, self.prev_end))
        return left

    def try_arrow(self):
        tok = self.peek()
        if tok.kind == "ident" and self.at_punct("=>", 1):
            self.advance()
            self.advance()
            param = A.Param(tok.value, name_span=(tok.start, tok.end), span=(tok.start, tok.end))
            body = self.arrow_body()
            return A.ArrowFunc([param], None, body, bare=True, ret_offset=tok.end,
                               span=(tok.start, self.prev_end))
        if not self.at_punct("("):
            return None
        saved = self.pos
        try:
            params = self.params()
            ret_offset = self.prev_end
            ann = self.opt_type_ann()
            if not self.at_punct("=>"):
                raise ParseError("not an arrow", self.peek())
        except TypeSyntaxError:
            self.pos = saved
            self._pending_gt = 0
            return None
        self.advance()
        body = self.arrow_body()
        return A.ArrowFunc(params, ann, body, ret_offset=ret_offset, span=(tok.start, self.prev_end))

    def arrow_body(self):
        if self.at_punct("{"):
            return self.block()
        return self.assignment()

    def conditional(self):
        start = self.peek().start
        test = self.binary(0)
        if self.at_punct("?"):
            self.advance()
            cons = self.assignment()
            self.expect(":")
            alt = self.assignment()
            return A.Cond(test, cons, alt, span=(start, self.prev_end))
        return test

    def binary(self, level: int):
        if level == len(BINARY_LEVELS):
            return self.exponent()
        start = self.peek().start
        left = self.binary(level + 1)
        ops = BINARY_LEVELS[level]
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.value in ops:
                self.advance()
                right = self.binary(level + 1)
                left = A.BinaryOp(tok.value, left, right, span=(start, self.prev_end))
            elif ops[0] == "<" and tok.kind == "ident" and tok.value == "as" and not tok.nl_before:
                colon = self.advance()
                ann = self.type_ann_after_colon(colon.start)
                left = A.AsExpr(left, ann, span=(start, self.prev_end))
            else:
                return left

    def exponent(self):
        start = self.peek().start
        base = self.unary()
        if self.at_punct("**"):
            self.advance()
            exp = self.exponent()
            return A.BinaryOp("**", base, exp, span=(start, self.prev_end))
        return base

    def unary(self):
        tok = self.peek()
        if tok.kind == "punct" and tok.value in ("!", "-", "+", "~"):
            self.advance()
            arg = self.unary()
            return A.Unary(tok.value, arg, span=(tok.start, self.prev_end))
        if tok.kind == "keyword" and tok.value == "typeof":
            self.advance()
            arg = self.unary()
            return A.Unary("typeof", arg, span=(tok.start, self.prev_end))
        if tok.kind == "punct" and tok.value in ("++", "--"):
            self.advance()
            arg = self.unary()
            if not isinstance(arg, (A.Ident, A.Member, A.Index)):
                self.fail("invalid update target", tok)
            return A.Update(tok.value, True, arg, span=(tok.start, self.prev_end))
        return self.postfix()

    def postfix(self):
        start = self.peek().start
        expr = self.call_member()
        tok = self.peek()
        if tok.kind == "punct" and tok.value in ("++", "--") and not tok.nl_before:
            if not isinstance(expr, (A.Ident, A.Member, A.Index)):
                self.fail("invalid update target", tok)
            self.advance()
            return A.Update(tok.value, False, expr, span=(start, self.prev_end))
        return expr

    def args(self) -> list:
        self.expect("(")
        out = []
        while not self.at_punct(")"):
            out.append(self.assignment())
            if not self.at_punct(")"):
                self.expect(",")
        self.expect(")")
        return out

    def call_member(self):
        start = self.peek().start
        if self.at_kw("new"):
            self.advance()
            callee = self.primary()
            while self.at_punct("."):
                self.advance()
                prop = self.name_token()
                callee = A.Member(callee, prop.value, prop_span=(prop.start, prop.end),
                                  span=(start, self.prev_end))
            args = self.args() if self.at_punct("(") else []
            expr = A.New(callee, args, span=(start, self.prev_end))
        else:
            expr = self.primary()
        while True:
            if self.at_punct("."):
                self.advance()
                prop = self.name_token()
                expr = A.Member(expr, prop.value, prop_span=(prop.start, prop.end),
                                span=(start, self.prev_end))
            elif self.at_punct("[") and not self.peek().nl_before:
                self.advance()
                index = self.expression()
                self.expect("]")
                expr = A.Index(expr, index, span=(start, self.prev_end))
            elif self.at_punct("(") and not self.peek().nl_before:
                args = self.args()
                expr = A.Call(expr, args, span=(start, self.prev_end))
            else:
                return expr

    def primary(self):
        tok = self.peek()
        span = (tok.start, tok.end)
        if tok.kind == "number":
            self.advance()
            return A.Literal("number", tok.value, span=span)
        if tok.kind == "string":
            self.advance()
            return A.Literal("string", tok.value, span=span)
        if tok.kind == "keyword":
            if tok.value in ("true", "false"):
                self.advance()
                return A.Literal("boolean", tok.value, span=span)
            if tok.value in ("null", "undefined"):
                self.advance()
                return A.Literal(tok.value, tok.value, span=span)
            if tok.value == "this":
                self.advance()
                return A.This(span=span)
        if tok.kind == "ident":
            self.advance()
            return A.Ident(tok.value, span=span)
        if self.at_punct("("):
            self.advance()
            inner = self.expression()
            self.expect(")")
            return inner
        if self.at_punct("["):
            self.advance()
            elems = []
            while not self.at_punct("]"):
                elems.append(self.assignment())
                if not self.at_punct("]"):
                    self.expect(",")
            self.expect("]")
            return A.ArrayLit(elems, span=(tok.start, self.prev_end))
        if self.at_punct("{"):
            return self.object_lit()
        self.fail(f"unexpected {tok.value or 'end of input'!r}")

    def object_lit(self) -> A.ObjectLit:
        start = self.advance().start
        props = []
        while not self.at_punct("}"):
            key = self.peek()
            if key.kind not in ("ident", "keyword", "string", "number"):
                self.fail("expected property name")
            self.advance()
            name = key.value[1:-1] if key.kind == "string" else key.value
            if self.at_punct(":"):
                self.advance()
                value = self.assignment()
                props.append(A.Prop(name, value, span=(key.start, self.prev_end)))
            else:
                if key.kind != "ident":
                    self.fail("expected ':'")
                props.append(A.Prop(name, None, span=(key.start, key.end)))
            if not self.at_punct("}"):
                self.expect(",")
        self.advance()
        return A.ObjectLit(props, span=(start, self.prev_end))


def parse(text: str, fragment: str = "program") -> A.Program:
    """Parse MTS source; raise :class:`MTSSyntaxError` if any errors occur.

    ``fragment="class_body"`` parses a sequence of class members (method
    blocks are decomposed out of their class) into a Program holding one
    anonymous ClassDecl.
    """
    p = Parser(text)
    prog = p.parse_class_body_fragment() if fragment == "class_body" else p.parse_program()
    if p.errors:
        raise MTSSyntaxError(sorted(p.errors, key=lambda e: e.span), prog)
    return prog


def parse_lenient(text: str, fragment: str = "program") -> tuple[A.Program, list[SyntaxErrorInfo]]:
    p = Parser(text)
    prog = p.parse_class_body_fragment() if fragment == "class_body" else p.parse_program()
    return prog, sorted(p.errors, key=lambda e: e.span)
