"""Recovering one type annotation from a raw model completion."""

from __future__ import annotations

from tau.lang.lexer import tokenize
from tau.typesys.texpr import PRIMITIVE_NAMES, TypeExpr, TypeSyntaxError, _PRIMS, _TypeOnly

_GLUE_PREFIXES = sorted(PRIMITIVE_NAMES, key=len, reverse=True)


class NoType(ValueError):
    pass


def extract_first_type(completion: str) -> TypeExpr:
    """Longest type parsed at the first token where any type parses.

    Trailing text is ignored. Lower-case identifiers are only accepted as
    primitives; one that starts with a primitive name (``stringstring``) is
    read as that primitive.
    """
    tokens = tokenize(completion).tokens
    for i in range(len(tokens) - 1):
        tok = tokens[i]
        p = _TypeOnly(tokens[i:], strict=True)
        try:
            t = p.parse_type()
        except TypeSyntaxError:
            t = None
        if t is not None and not p._pending_gt:
            return t
        if tok.kind == "ident":
            for name in _GLUE_PREFIXES:
                if tok.value.startswith(name):
                    return _PRIMS[name]
    raise NoType(completion)
