"""Engine configuration with flags > config file > defaults precedence.

The config file is flat ``key = value`` text; keys match EngineConfig
field names. Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Any

from .errors import ValidationError


@dataclass
class EngineConfig:
    k: int = 32
    n_select: int = 3
    match_weight: float = 0.01
    answer_weight: float = 0.01
    ngram_max: int = 2
    abbreviations_path: str | None = None
    index_path: str | None = None
    params_path: str | None = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValidationError("k must be >= 1")
        if self.n_select < 1:
            raise ValidationError("n_select must be >= 1")
        if self.match_weight < 0 or self.answer_weight < 0:
            raise ValidationError("loss weights must be >= 0")
        if self.ngram_max not in (1, 2):
            raise ValidationError("ngram_max must be 1 or 2")


_FIELD_TYPES = {f.name: f.type for f in fields(EngineConfig)}


def parse_config_file(path: str) -> dict[str, Any]:
    """Parse ``key = value`` lines into typed EngineConfig overrides."""
    out: dict[str, Any] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{line_no}: expected 'key = value', got {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _FIELD_TYPES:
                raise ValidationError(f"{path}:{line_no}: unknown config key {key!r}")
            out[key] = _coerce(key, value)
    return out


def _coerce(key: str, value: str) -> Any:
    declared = str(_FIELD_TYPES[key])
    try:
        if declared.startswith("int"):
            return int(value)
        if declared.startswith("float"):
            return float(value)
    except ValueError as exc:
        raise ValidationError(f"config key {key!r}: {exc}") from exc
    return value


def resolve_config(config_path: str | None = None, **flag_overrides: Any) -> EngineConfig:
    """Defaults, overridden by the config file, overridden by non-None flags."""
    values: dict[str, Any] = {}
    if config_path:
        values.update(parse_config_file(config_path))
    values.update({k: v for k, v in flag_overrides.items() if v is not None})
    return EngineConfig(**values)
