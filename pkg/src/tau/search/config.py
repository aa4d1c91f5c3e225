from __future__ import annotations

from dataclasses import asdict, dataclass, fields


@dataclass
class SearchConfig:
    num_comps: int = 3
    stop_at: int = 400
    temperature: float = 0.75
    window: int = 2048
    lam: float = 0.7
    seed: int = 0
    mode: str = "tree"  # tree | baseline
    usages: bool = True
    max_usages: int = 3
    type_parser: bool = True
    max_tokens: int = 24
    trace: bool = False

    def __post_init__(self) -> None:
        if self.num_comps < 1 or self.stop_at < 1:
            raise ValueError("num_comps and stop_at must be >= 1")
        if self.window < 64:
            raise ValueError("window must be >= 64 characters")
        if self.mode not in ("tree", "baseline"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.lam <= 0:
            raise ValueError("lambda must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SearchConfig":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})
