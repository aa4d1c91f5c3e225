"""Predictor contract: a request is a prefix/suffix pair around one hole."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional, Protocol

DEFAULT_STOP = ("\n", ")", ",", "{")
HOLE = "_hole_"


class PredictorFailure(RuntimeError):
    """The predictor could not answer; the engine degrades to ``any``."""


@dataclass
class PredictRequest:
    prefix: str
    suffix: str
    num_samples: int = 1
    temperature: float = 0.75
    max_tokens: int = 24
    stop: list[str] = field(default_factory=lambda: list(DEFAULT_STOP))
    # side channel filled by the engine; never sent over the wire
    context: dict[str, Any] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if HOLE in self.prefix or HOLE in self.suffix:
            raise ValueError("hole marker inside prompt text")
        if self.num_samples < 1 or self.temperature < 0:
            raise ValueError("num_samples must be >= 1 and temperature >= 0")

    def wire(self) -> dict:
        return {"prefix": self.prefix, "suffix": self.suffix, "num_samples": self.num_samples,
                "temperature": self.temperature, "max_tokens": self.max_tokens, "stop": list(self.stop)}


@dataclass
class PredictResponse:
    completions: list[str]


class Predictor(Protocol):
    def predict(self, req: PredictRequest) -> PredictResponse: ...


@dataclass(frozen=True)
class Sentinels:
    pre: str = "<PRE>"
    suf: str = "<SUF>"
    mid: str = "<M>"

    def __post_init__(self) -> None:
        vals = (self.pre, self.suf, self.mid)
        if not all(vals) or len(set(vals)) != 3:
            raise ValueError("sentinels must be non-empty and distinct")


def build_psm_prompt(req: PredictRequest, sentinels: Optional[Sentinels] = None) -> str:
    s = sentinels or Sentinels()
    return s.pre + req.prefix + s.suf + req.suffix + s.mid
