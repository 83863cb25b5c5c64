import glob
import os

import pytest

from uidiff.config import PROFILES, apply_profile, get_cfg, validate_cfg
from uidiff.structures import ConfigError

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "configs", "uidiff")


def test_defaults():
    cfg = get_cfg()
    assert cfg.MODEL.METHOD == "gvcd"
    assert (cfg.MODEL.GRAPH.K, cfg.MODEL.SIMILARITY.H) == (8, 10)
    assert (cfg.MODEL.SIMILARITY.TS, cfg.MODEL.SIMILARITY.NS) == (0.7, 0.8)
    assert cfg.MODEL.RCD.HASH_THRESHOLD == 10
    assert tuple(cfg.EVAL.IOU_THRESHOLDS) == (0.25, 0.5, 0.75)
    validate_cfg(cfg)


@pytest.mark.parametrize("profile, k", [("desktop", 8), ("cut", 6), ("mobile", 5)])
def test_profiles(profile, k):
    assert apply_profile(get_cfg(), profile).MODEL.GRAPH.K == k


def test_unknown_profile():
    with pytest.raises(ConfigError):
        apply_profile(get_cfg(), "tablet")


@pytest.mark.parametrize(
    "key, value",
    [
        ("MODEL.GRAPH.K", 0),
        ("MODEL.SIMILARITY.H", 65),
        ("MODEL.SIMILARITY.TS", 1.5),
        ("MODEL.SIMILARITY.NS", -0.2),
        ("MODEL.METHOD", "sift"),
        ("MODEL.MATCHER.CONTEXT_REDUCTION", "max"),
        ("EVAL.SIDES", "both"),
        ("EVAL.TUNE_FRACTION", 1.0),
        ("DETECTOR.NOISE.DROP_PROB", 1.0),
        ("DATAGEN.MAX_CHANGES", 0),
        ("DATAGEN.MAX_CHANGES", 5),
        ("JOBS", 0),
    ],
)
def test_validate_rejects(key, value):
    cfg = get_cfg()
    cfg.merge_from_list([key, value])
    with pytest.raises(ConfigError):
        validate_cfg(cfg)


@pytest.mark.parametrize("path", sorted(glob.glob(os.path.join(CONFIG_DIR, "*.yaml"))))
def test_shipped_configs_load(path):
    cfg = get_cfg()
    cfg.merge_from_file(path)
    validate_cfg(cfg)
    name = os.path.splitext(os.path.basename(path))[0]
    if name in PROFILES:
        assert cfg.MODEL.GRAPH.K == apply_profile(get_cfg(), name).MODEL.GRAPH.K
    if name == "cut":
        assert cfg.DATAGEN.CUT.ENABLED
