"""Seeded generator of random MTS programs for property tests.

Programs mix annotated and unannotated declarations, and some of them are
ill-typed on purpose so the checker has something to report.
"""

from __future__ import annotations

import random

TYPES = ["number", "string", "boolean", "any", "number[]", "string[]", "() => number", "Function", "Box"]


class Gen:
    def __init__(self, seed: int):
        self.r = random.Random(seed)
        self.vars: list[str] = []
        self.funcs: list[tuple[str, int]] = []
        self.n = 0

    def fresh(self, stem: str) -> str:
        self.n += 1
        return f"{stem}{self.n}"

    def ann(self, p: float = 0.4) -> str:
        return ": " + self.r.choice(TYPES) if self.r.random() < p else ""

    def atom(self, scope: list[str]) -> str:
        r = self.r.random()
        pool = scope + self.vars
        if pool and r < 0.35:
            return self.r.choice(pool)
        return self.r.choice(['1', '2.5', '"s"', '"t"', "true", "false", "null", "undefined", "[1, 2]",
                              '["a"]', "[]", "new Box(1)", "(() => 3)", "{ v: 1 }"])

    def expr(self, scope: list[str], depth: int = 0) -> str:
        if depth > 2:
            return self.atom(scope)
        r = self.r.random()
        if r < 0.3:
            return self.atom(scope)
        if r < 0.5:
            op = self.r.choice(["+", "-", "*", "<", "===", "&&"])
            return f"{self.expr(scope, depth + 1)} {op} {self.expr(scope, depth + 1)}"
        if r < 0.65 and self.funcs:
            name, arity = self.r.choice(self.funcs)
            k = arity if self.r.random() < 0.8 else arity + 1
            args = ", ".join(self.expr(scope, depth + 1) for _ in range(k))
            return f"{name}({args})"
        if r < 0.75:
            return f"({self.atom(scope)}).length"
        if r < 0.85:
            return f"({self.atom(scope)}).v"
        if r < 0.92:
            return f"[{self.expr(scope, depth + 1)}, {self.expr(scope, depth + 1)}]"
        return f"({self.expr(scope, depth + 1)})"

    def var_decl(self, scope: list[str], indent: str) -> str:
        name = self.fresh("v")
        kw = self.r.choice(["let", "const", "let"])
        init = "" if (kw == "let" and self.r.random() < 0.15) else f" = {self.expr(scope)}"
        scope.append(name)
        return f"{indent}{kw} {name}{self.ann(0.25)}{init};"

    def stmt(self, scope: list[str], indent: str, depth: int) -> list[str]:
        r = self.r.random()
        if r < 0.4:
            return [self.var_decl(scope, indent)]
        if r < 0.55 and scope:
            return [f"{indent}{self.r.choice(scope)} = {self.expr(scope)};"]
        if r < 0.65 and depth < 2:
            inner = list(scope)
            body = self.block(inner, indent + "  ", depth + 1, 2)
            return [f"{indent}if ({self.expr(scope)}) {{", *body, f"{indent}}}"]
        if r < 0.72 and depth < 2:
            inner = list(scope)
            it = self.fresh("e")
            inner.append(it)
            body = self.block(inner, indent + "  ", depth + 1, 2)
            return [f"{indent}for (const {it} of {self.atom(scope)}) {{", *body, f"{indent}}}"]
        if r < 0.8 and depth < 2:
            i = self.fresh("i")
            inner = list(scope) + [i]
            body = self.block(inner, indent + "  ", depth + 1, 2)
            return [f"{indent}for (let {i} = 0; {i} < 3; {i}++) {{", *body, f"{indent}}}"]
        e = self.expr(scope)
        return [f"{indent}({e});" if e.startswith("{") else f"{indent}{e};"]

    def block(self, scope: list[str], indent: str, depth: int, size: int) -> list[str]:
        out: list[str] = []
        for _ in range(self.r.randint(1, size)):
            out.extend(self.stmt(scope, indent, depth))
        return out

    def function(self) -> list[str]:
        name = self.fresh("f")
        params = [self.fresh("p") for _ in range(self.r.randint(0, 3))]
        scope = list(params)
        sig = ", ".join(p + self.ann() for p in params)
        body = self.block(scope, "  ", 1, 3)
        body.append(f"  return {self.expr(scope)};")
        self.funcs.append((name, len(params)))
        if self.r.random() < 0.5:
            return [f"function {name}({sig}){self.ann()} {{", *body, "}"]
        return [f"const {name} = ({sig}){self.ann()} => {{", *body, "};"]

    def program(self) -> str:
        lines = ["class Box {", "  v: number;", "  constructor(v: number) {", "    this.v = v;", "  }",
                 "  get() {", "    return this.v;", "  }", "}"]
        for _ in range(self.r.randint(2, 6)):
            if self.r.random() < 0.45:
                lines.extend(self.function())
            else:
                scope: list[str] = []
                lines.append(self.var_decl(scope, ""))
                self.vars.extend(scope)
        return "\n".join(lines) + "\n"


def random_program(seed: int) -> str:
    return Gen(seed).program()
