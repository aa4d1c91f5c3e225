"""Deterministic predictor driven by a table of completions."""

from __future__ import annotations

from typing import Mapping, Optional, Sequence

from tau.predictor.base import PredictorFailure, PredictRequest, PredictResponse


class ScriptMiss(PredictorFailure, KeyError):
    pass


class ScriptedPredictor:
    """Answers from ``script[(node_name, site_index)]``.

    For ``n`` samples on chain ``c`` (the engine's index of the first-hole
    completion being extended) it returns ``L[(c + i) % len(L)]`` for
    ``i < n``. Keys may also be ``site_index`` alone.
    """

    def __init__(self, script: Mapping, default: Optional[Sequence[str]] = None):
        self.script = {k: list(v) for k, v in script.items()}
        self.default = list(default) if default is not None else None
        self.calls: list[tuple] = []

    def lookup(self, req: PredictRequest) -> list[str]:
        node = req.context.get("node_name")
        site = req.context.get("site_index")
        for key in ((node, site), site):
            if key in self.script:
                return self.script[key]
        if self.default is not None:
            return self.default
        raise ScriptMiss((node, site))

    def predict(self, req: PredictRequest) -> PredictResponse:
        options = self.lookup(req)
        chain = req.context.get("chain", 0)
        self.calls.append((req.context.get("node_name"), req.context.get("site_index"), chain))
        return PredictResponse([options[(chain + i) % len(options)] for i in range(req.num_samples)])


def greeting_script() -> dict:
    """Completions for the greeting example: two solutions for ``helloGen``."""
    return {
        ("hello", 2): ["string"],
        ("hello", 3): ["string"],
        ("helloGen", 4): ["string"],
        ("helloGen", 5): ["() => string", "Function"],
        ("helloHelper", 6): ["string"],
    }


ADVERSARIAL_COMPLETIONS = (
    "number) {\n  return 0;\n}",
    "string = x => { y",
    "any[]): number { if (",
)


def adversarial_predictor() -> ScriptedPredictor:
    """Completions that run past the type into code, as raw models often do."""
    return ScriptedPredictor({}, default=ADVERSARIAL_COMPLETIONS)
