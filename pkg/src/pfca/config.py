from __future__ import annotations

import os
from dataclasses import asdict, dataclass, replace

THREADS_ENV = "PFCA_THREADS"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Mining and clustering parameters.

    ``max_premise_len=None`` picks the mode default (4 exact, 5 fisher).
    ``beam_width=None`` means no beam limit.
    """

    alpha: float = 0.01
    epsilon: float = 1e-4
    max_premise_len: int | None = None
    mode: str = "fisher"
    mscr_strict: bool = False
    beam_width: int | None = None
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0 < self.epsilon < 1:
            raise ConfigError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.mode not in ("exact", "fisher"):
            raise ConfigError(f"mode must be 'exact' or 'fisher', got {self.mode!r}")
        if self.max_premise_len is not None and self.max_premise_len < 0:
            raise ConfigError("max_premise_len must be >= 0")
        if self.beam_width is not None and self.beam_width < 1:
            raise ConfigError("beam_width must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    @property
    def premise_cap(self) -> int:
        if self.max_premise_len is not None:
            return self.max_premise_len
        return 4 if self.mode == "exact" else 5

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)


def thread_count(requested: int | None = None) -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        if value < 1:
            raise ConfigError(f"{THREADS_ENV} must be >= 1")
        return value
    return requested or 1
