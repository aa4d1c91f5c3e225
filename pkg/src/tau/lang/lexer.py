"""Tokenizer for MTS source text.

Comments are not tokens; they are collected on the side so the parser can
attach them to declarations and the metrics code can count comment lines.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

KEYWORDS = frozenset(
    {
        "let", "const", "var", "function", "return", "if", "else", "while",
        "for", "of", "class", "interface", "extends", "new", "this", "true",
        "false", "null", "undefined", "typeof", "export", "default", "break",
        "continue", "throw", "public", "private", "protected", "static",
        "readonly",
    }
)

# longest first
PUNCTUATORS = (
    ">>>=", "===", "!==", ">>>", "...", "<<=", ">>=", "**", "=>", "==", "!=",
    "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "%=", "<<",
    ">>", "(", ")", "{", "}", "[", "]", ";", ",", ".", ":", "?", "=", "<",
    ">", "+", "-", "*", "/", "%", "!", "&", "|", "^", "~",
)

_SPACE = re.compile(r"[ \t\r\f\v]+")
_IDENT = re.compile(r"(?:[^\W\d]|\$)(?:\w|\$)*")
_PUNCT = re.compile("|".join(re.escape(p) for p in PUNCTUATORS))


@dataclass(frozen=True)
class Token:
    kind: str  # ident | keyword | number | string | punct | eof
    value: str
    start: int
    end: int
    line: int
    col: int
    nl_before: bool = False


@dataclass(frozen=True)
class Comment:
    text: str
    start: int
    end: int
    line: int
    end_line: int

    @property
    def is_block(self) -> bool:
        return self.text.startswith("/*")


@dataclass(frozen=True)
class LexError:
    message: str
    start: int
    end: int
    line: int
    col: int


@dataclass
class LexResult:
    tokens: list[Token]
    comments: list[Comment]
    errors: list[LexError]


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch in "_$"


def _is_ident_part(ch: str) -> bool:
    return ch.isalnum() or ch in "_$"


def tokenize(text: str) -> LexResult:
    tokens: list[Token] = []
    comments: list[Comment] = []
    errors: list[LexError] = []
    i = 0
    n = len(text)
    line = 1
    line_start = 0
    nl_before = False

    def emit(kind: str, start: int, end: int) -> None:
        nonlocal nl_before
        tokens.append(
            Token(kind, text[start:end], start, end, line, start - line_start + 1, nl_before)
        )
        nl_before = False

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            line_start = i
            nl_before = True
            continue
        if ch in " \t\r\f\v":
            i = _SPACE.match(text, i).end()
            continue
        if text.startswith("//", i):
            j = text.find("\n", i)
            j = n if j < 0 else j
            comments.append(Comment(text[i:j], i, j, line, line))
            i = j
            continue
        if text.startswith("/*", i):
            j = text.find("*/", i + 2)
            if j < 0:
                errors.append(LexError("unterminated block comment", i, n, line, i - line_start + 1))
                j = n
            else:
                j += 2
            body = text[i:j]
            start_line = line
            newlines = body.count("\n")
            if newlines:
                line += newlines
                line_start = i + body.rfind("\n") + 1
                nl_before = True
            comments.append(Comment(body, i, j, start_line, line))
            i = j
            continue
        if _is_ident_start(ch):
            j = _IDENT.match(text, i).end()
            word = text[i:j]
            emit("keyword" if word in KEYWORDS else "ident", i, j)
            i = j
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            if text.startswith(("0x", "0X"), i):
                j += 2
                while j < n and (text[j].isalnum() or text[j] == "_"):
                    j += 1
            else:
                while j < n and (text[j].isdigit() or text[j] == "_"):
                    j += 1
                if j < n and text[j] == ".":
                    j += 1
                    while j < n and text[j].isdigit():
                        j += 1
                if j < n and text[j] in "eE":
                    k = j + 1
                    if k < n and text[k] in "+-":
                        k += 1
                    if k < n and text[k].isdigit():
                        j = k
                        while j < n and text[j].isdigit():
                            j += 1
            emit("number", i, j)
            i = j
            continue
        if ch in "'\"":
            j = i + 1
            closed = False
            while j < n:
                c = text[j]
                if c == "\\":
                    j += 2
                    continue
                if c == "\n":
                    break
                if c == ch:
                    closed = True
                    j += 1
                    break
                j += 1
            if not closed:
                errors.append(LexError("unterminated string literal", i, j, line, i - line_start + 1))
            emit("string", i, min(j, n))
            i = min(j, n)
            continue
        m = _PUNCT.match(text, i)
        if m:
            emit("punct", i, m.end())
            i = m.end()
        else:
            errors.append(LexError(f"unexpected character {ch!r}", i, i + 1, line, i - line_start + 1))
            i += 1

    tokens.append(Token("eof", "", n, n, line, n - line_start + 1, nl_before))
    return LexResult(tokens, comments, errors)


def count_tokens(text: str) -> int:
    """Number of lexer tokens, excluding comments and the end marker."""
    return len(tokenize(text).tokens) - 1
