"""Line, token and function counts used by corpus filtering."""

from __future__ import annotations

from dataclasses import asdict, dataclass

from tau.lang import ast as A
from tau.lang.lexer import tokenize
from tau.lang.parser import MTSSyntaxError, parse


@dataclass
class LocCounts:
    loc: int
    tokens: int
    functions: int
    loc_per_function: float

    def to_dict(self) -> dict:
        return asdict(self)


def _code_lines(text: str) -> set[int]:
    """1-based line numbers that hold at least one token."""
    lines: set[int] = set()
    for tok in tokenize(text).tokens:
        if tok.kind == "eof":
            continue
        first = tok.line
        last = first + text.count("\n", tok.start, tok.end)
        lines.update(range(first, last + 1))
    return lines


def function_spans(program: A.Program) -> list[tuple[str, A.Span]]:
    """Named functions: declarations, methods and ``const f = () => ...``."""
    out = []

    def visit(node):
        if isinstance(node, (A.FuncDecl, A.Method)):
            out.append((node.name, node.span))
        elif A.is_function_var(node):
            out.append((node.name, node.init.span))
        for c in node.children():
            visit(c)

    visit(program)
    return out


def count_loc(text: str) -> LocCounts:
    code = _code_lines(text)
    tokens = sum(1 for t in tokenize(text).tokens if t.kind != "eof")
    try:
        program = parse(text)
    except MTSSyntaxError:
        return LocCounts(len(code), tokens, 0, 0.0)
    spans = function_spans(program)
    if not spans:
        return LocCounts(len(code), tokens, 0, 0.0)
    total = 0
    for _, (a, b) in spans:
        first = text.count("\n", 0, a) + 1
        last = text.count("\n", 0, b) + 1
        total += sum(1 for ln in range(first, last + 1) if ln in code)
    return LocCounts(len(code), tokens, len(spans), total / len(spans))
