# -*- coding: utf-8-*-
"""
Module : PipelineConfig
Author : InvoiceReader team
Description :
    Every tunable constant of the pipeline in one frozen dataclass,
    plus JSON loading. Variants are derived with dataclasses.replace.
"""
import json
import logging
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping, Tuple, Union

# Local imports
from InvoiceReader.Errors import ConfigError

__all__ = [
    "PipelineConfig",
    "MATCHER_REGEX",
    "MATCHER_SIMILARITY",
    "resource_path",
    "available_languages",
    "read_json_resource",
]

logger = logging.getLogger(__name__)

MATCHER_REGEX = "REGEX"
MATCHER_SIMILARITY = "SIMILARITY"


@dataclass(frozen=True)
class PipelineConfig:
    """
    PipelineConfig : thresholds, weights and switches for all stages.
    Defaults are the tuned values used by the shipped resources.
    """

    # layout
    line_gap_factor: float = 1.0
    block_gap_factor: float = 2.0
    line_overlap_ratio: float = 0.5
    font_tolerance: float = 0.4
    neighbor_overlap_ratio: float = 0.2
    zone_boundaries: Tuple[float, float, float, float] = (0.08, 0.33, 0.66, 0.92)

    # keyword matching
    matcher: str = MATCHER_SIMILARITY
    similarity_common_cost: float = 0.1
    similarity_default_cost: float = 1.0
    similarity_threshold_ratio: float = 0.15
    use_digraph_confusions: bool = True

    # extraction confidences
    key_conf_only: float = 0.7
    data_conf_only: float = 0.8
    neighbor_expected_weight: float = 2.0
    neighbor_other_data_weight: float = 0.5
    neighbor_keyword_penalty: float = -1.0
    address_conf_strong: float = 0.9
    address_conf_weak: float = 0.6
    address_entity_bonus: float = 0.05
    min_address_items: int = 2

    # evaluation
    partial_match_levenshtein: int = 2

    # language and annotators
    languages: Tuple[str, ...] = ("en", "cs")
    fallback_language: str = "en"
    entity_annotator: str = "gazetteer"
    address_parser: str = "rules"
    enable_keyword_annotations: bool = True
    enable_datatype_annotations: bool = True

    # page classifier
    nb_alpha: float = 1.0
    lr_l2: float = 1e-3
    lr_tolerance: float = 1e-6
    lr_max_iterations: int = 10000
    lr_learning_rate: float = 0.5
    cv_folds: int = 10
    cv_seed: int = 0

    def __post_init__(self):
        for name in ("line_gap_factor", "block_gap_factor", "similarity_common_cost",
                     "similarity_default_cost", "nb_alpha", "lr_learning_rate"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("line_overlap_ratio", "font_tolerance", "neighbor_overlap_ratio",
                     "similarity_threshold_ratio", "key_conf_only", "data_conf_only",
                     "address_conf_strong", "address_conf_weak"):
            value = getattr(self, name)
            if not 0 < value <= 1:
                raise ConfigError(f"{name} must be in (0, 1], got {value}")
        if self.similarity_common_cost >= self.similarity_default_cost:
            raise ConfigError("similarity_common_cost must be below similarity_default_cost")
        bounds = tuple(self.zone_boundaries)
        steps = zip((0.0,) + bounds, bounds + (1.0,))
        if len(bounds) != 4 or not all(a < b for a, b in steps):
            raise ConfigError(f"zone_boundaries must be 4 increasing fractions in (0, 1), got {bounds}")
        if not (self.neighbor_expected_weight > self.neighbor_other_data_weight > 0 > self.neighbor_keyword_penalty):
            raise ConfigError("neighbor weights must satisfy expected > other > 0 > penalty")
        if self.matcher not in (MATCHER_REGEX, MATCHER_SIMILARITY):
            raise ConfigError(f"matcher must be {MATCHER_REGEX} or {MATCHER_SIMILARITY}, got {self.matcher}")
        if self.min_address_items < 1:
            raise ConfigError("min_address_items must be >= 1")
        if self.partial_match_levenshtein < 1:
            raise ConfigError("partial_match_levenshtein must be >= 1")
        if self.lr_l2 < 0 or self.lr_tolerance <= 0 or self.lr_max_iterations < 1:
            raise ConfigError("logistic regression settings out of range")
        if self.cv_folds < 2:
            raise ConfigError("cv_folds must be >= 2")
        if not self.languages:
            raise ConfigError("at least one language must be configured")
        object.__setattr__(self, "zone_boundaries", bounds)
        object.__setattr__(self, "languages", tuple(self.languages))

    def with_overrides(self, **changes) -> "PipelineConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["zone_boundaries"] = list(self.zone_boundaries)
        data["languages"] = list(self.languages)
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        values = dict(data)
        for key in ("zone_boundaries", "languages"):
            if key in values:
                values[key] = tuple(values[key])
        try:
            return cls(**values)
        except TypeError as e:
            raise ConfigError(str(e)) from e

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "PipelineConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise ConfigError(f"cannot read configuration {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"configuration {path} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"configuration {path} must hold a JSON object")
        logger.debug("Loaded configuration from %s", path)
        return cls.from_dict(data)


PACKAGE_DIR = Path(__file__).resolve().parent
CONFIG_DIR = PACKAGE_DIR / "config"


def resource_path(*parts: str, base: Union[str, Path, None] = None) -> Path:
    """Path of a packaged resource, or of the same relative file under an override directory"""
    return Path(base).joinpath(*parts) if base is not None else CONFIG_DIR.joinpath(*parts)


def available_languages(base: Union[str, Path, None] = None) -> Tuple[str, ...]:
    keywords_dir = resource_path("keywords", base=base)
    if not keywords_dir.is_dir():
        return ()
    return tuple(sorted(p.name for p in keywords_dir.iterdir() if p.is_dir()))


def read_json_resource(*parts: str, base: Union[str, Path, None] = None) -> Any:
    path = resource_path(*parts, base=base)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"missing resource {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"resource {path} is not valid JSON: {e}") from e
