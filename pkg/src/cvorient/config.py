"""Retrieval configuration, loadable from a TOML ``[retrieval]`` table."""

import os
from dataclasses import asdict, dataclass, fields, replace

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .correlation import METHODS

SEED_ENV = "CVO_SEED"
ORIENTATION_MODES = ("known", "unknown")


@dataclass(frozen=True)
class RetrievalConfig:
    method: str = "fi"
    scale: int = 10
    fov: float = 360.0
    orientation: str = "unknown"
    pool_size: int = None
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if isinstance(self.scale, bool) or int(self.scale) != self.scale or self.scale < 1:
            raise ValueError(f"scale must be an integer >= 1, got {self.scale!r}")
        if not 0.0 < self.fov <= 360.0:
            raise ValueError(f"fov must lie in (0, 360], got {self.fov!r}")
        if self.orientation not in ORIENTATION_MODES:
            raise ValueError(
                f"orientation must be one of {ORIENTATION_MODES}, got {self.orientation!r}"
            )
        if self.pool_size is not None and self.pool_size < 1:
            raise ValueError(f"pool_size must be >= 1, got {self.pool_size}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be >= 1, got {self.jobs}")

    def to_dict(self):
        return asdict(self)

    def updated(self, **overrides):
        """Copy with the non-``None`` overrides applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def default_seed():
    value = os.environ.get(SEED_ENV)
    return int(value) if value not in (None, "") else 0


def load_config(path=None):
    """Read a ``RetrievalConfig`` from TOML; unknown keys are rejected."""
    if path is None:
        return RetrievalConfig(seed=default_seed())
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    table = doc.get("retrieval", {})
    known = {f.name for f in fields(RetrievalConfig)}
    unknown = set(table) - known
    if unknown:
        raise ValueError(f"unknown [retrieval] keys in {path}: {sorted(unknown)}")
    table.setdefault("seed", default_seed())
    return RetrievalConfig(**table)
