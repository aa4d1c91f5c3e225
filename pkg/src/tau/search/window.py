"""Fitting a prompt into the context window around its hole."""

from __future__ import annotations


def window_bounds(text: str, hole: int, window: int) -> tuple[int, int]:
    """A slice ``[a, b)`` of at most ``window`` characters containing ``hole``.

    The hole is centred when the text allows it; both ends are then pulled
    inward to line boundaries, unless that would lose the hole's line.
    """
    n = len(text)
    if n <= window:
        return 0, n
    a = min(max(0, hole - window // 2), n - window)
    b = a + window
    sa, sb = a, b
    if a > 0 and text[a - 1] != "\n":
        nl = text.find("\n", a, b)
        sa = nl + 1 if nl != -1 else a
    if b < n:
        nl = text.rfind("\n", sa, b)
        sb = nl + 1 if nl != -1 else b
    if sa <= hole <= sb and sa < sb:
        return sa, sb
    return a, b


def truncate_window(prompt: str, hole_offset: int, window: int) -> str:
    a, b = window_bounds(prompt, hole_offset, window)
    return prompt[a:b]


def truncate_split(prefix: str, suffix: str, window: int) -> tuple[str, str]:
    text = prefix + suffix
    a, b = window_bounds(text, len(prefix), window)
    return text[a:len(prefix)], text[len(prefix):b]
