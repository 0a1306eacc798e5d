# -*- coding: utf-8-*-
import json

import pytest

# Local imports
from InvoiceReader.Errors import ConfigError
from InvoiceReader.PipelineConfig import (
    MATCHER_REGEX,
    MATCHER_SIMILARITY,
    PipelineConfig,
    available_languages,
)


def test_defaults():
    cfg = PipelineConfig()
    assert cfg.matcher == MATCHER_SIMILARITY
    assert cfg.similarity_common_cost == 0.1
    assert cfg.similarity_default_cost == 1.0
    assert cfg.similarity_threshold_ratio == 0.15
    assert cfg.partial_match_levenshtein == 2
    assert cfg.cv_folds == 10


@pytest.mark.parametrize("changes", [
    {"matcher": "fuzzy"},
    {"similarity_common_cost": 1.5},
    {"similarity_threshold_ratio": 0},
    {"zone_boundaries": (0.5, 0.3, 0.6, 0.9)},
    {"neighbor_keyword_penalty": 0.5},
    {"cv_folds": 1},
    {"languages": ()},
])
def test_invalid_values(changes):
    with pytest.raises(ConfigError):
        PipelineConfig().with_overrides(**changes)


def test_dict_roundtrip():
    cfg = PipelineConfig(matcher=MATCHER_REGEX, languages=("cs",))
    assert PipelineConfig.from_dict(cfg.to_dict()) == cfg


def test_unknown_key(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"matcher": "REGEX", "colour": "blue"}), encoding="utf-8")
    with pytest.raises(ConfigError, match="colour"):
        PipelineConfig.from_json(path)


def test_from_json(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"matcher": "REGEX", "zone_boundaries": [0.1, 0.3, 0.7, 0.9]}), encoding="utf-8")
    cfg = PipelineConfig.from_json(path)
    assert cfg.matcher == MATCHER_REGEX
    assert cfg.zone_boundaries == (0.1, 0.3, 0.7, 0.9)


def test_unreadable_json(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        PipelineConfig.from_json(path)


def test_shipped_languages():
    assert {"en", "cs"} <= set(available_languages())
