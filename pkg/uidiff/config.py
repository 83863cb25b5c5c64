# -*- coding: utf-8 -*-
from fvcore.common.config import CfgNode as CN

from uidiff.structures.errors import ConfigError

__all__ = [
    "get_cfg",
    "add_model_config",
    "add_datagen_config",
    "add_eval_config",
    "apply_profile",
    "validate_cfg",
    "PROFILES",
]

# Best K per screenshot modality; everything else keeps its default.
PROFILES = {
    "desktop": ["MODEL.GRAPH.K", 8],
    "cut": ["MODEL.GRAPH.K", 6],
    "mobile": ["MODEL.GRAPH.K", 5],
}

METHODS = ("gvcd", "pwc", "rcd")


def add_model_config(cfg):
    """
    Add config for the change detectors and the detector source
    """
    cfg.MODEL = CN()
    # one of METHODS
    cfg.MODEL.METHOD = "gvcd"

    cfg.MODEL.GRAPH = CN()
    # number of top nearest neighbors per control
    cfg.MODEL.GRAPH.K = 8

    cfg.MODEL.SIMILARITY = CN()
    # maximum hash difference (bits out of 64) between matched controls
    cfg.MODEL.SIMILARITY.H = 10
    # minimum text similarity between TEXT controls
    cfg.MODEL.SIMILARITY.TS = 0.7
    # minimum neighbor similarity for a pair to become a match
    cfg.MODEL.SIMILARITY.NS = 0.8
    # share of a pair's own base similarity in its ranking score; 0 ranks on context only
    cfg.MODEL.SIMILARITY.SELF_WEIGHT = 0.5

    cfg.MODEL.MATCHER = CN()
    # "best": symmetric best-counterpart mean over the neighbor cross-product
    # "mean": plain mean over the neighbor cross-product
    cfg.MODEL.MATCHER.CONTEXT_REDUCTION = "best"

    cfg.MODEL.PWC = CN()
    # connected components smaller than this many pixels are ignored
    cfg.MODEL.PWC.MIN_AREA = 16
    # components whose boxes overlap are reported as one region
    cfg.MODEL.PWC.MERGE_OVERLAPPING = True

    cfg.MODEL.RCD = CN()
    cfg.MODEL.RCD.PAIR_IOU = 0.5
    # paired controls with a larger hash difference are reported
    cfg.MODEL.RCD.HASH_THRESHOLD = 10

    cfg.DETECTOR = CN()
    cfg.DETECTOR.NOISE = CN()
    cfg.DETECTOR.NOISE.DROP_PROB = 0.0
    cfg.DETECTOR.NOISE.JITTER = 0


def add_datagen_config(cfg):
    """
    Add config for the synthetic benchmark generator
    """
    cfg.DATAGEN = CN()
    cfg.DATAGEN.VARIANTS = 7
    cfg.DATAGEN.MAX_CHANGES = 4
    cfg.DATAGEN.PLACEMENT_RETRIES = 100
    # placements keep this many pixels away from every other control
    cfg.DATAGEN.PLACEMENT_MARGIN = 2
    # width of the ring whose modal colour fills vacated areas
    cfg.DATAGEN.FILL_RING = 5
    cfg.DATAGEN.RESIZE_SMALLER = (0.3, 0.8)
    cfg.DATAGEN.RESIZE_LARGER = (1.3, 1.8)

    cfg.DATAGEN.CUT = CN()
    cfg.DATAGEN.CUT.ENABLED = False
    cfg.DATAGEN.CUT.AMOUNTS = (100, 200, 300, 400, 500)
    cfg.DATAGEN.CUT.SIDES = ("left", "right", "top", "bottom")
    # re-centre on the original canvas; False crops and changes the image size
    cfg.DATAGEN.CUT.KEEP_CANVAS = True
    # controls losing more than this share of their area are dropped
    cfg.DATAGEN.CUT.MAX_CLIPPED = 0.5

    # procedural base layouts
    cfg.DATAGEN.SYNTHETIC = CN()
    cfg.DATAGEN.SYNTHETIC.WIDTH = 1920
    cfg.DATAGEN.SYNTHETIC.HEIGHT = 1080
    cfg.DATAGEN.SYNTHETIC.MIN_CONTROLS = 20
    cfg.DATAGEN.SYNTHETIC.MAX_CONTROLS = 40
    cfg.DATAGEN.SYNTHETIC.GAP = 8


def add_eval_config(cfg):
    """
    Add config for scoring and the hyperparameter sweep
    """
    cfg.EVAL = CN()
    cfg.EVAL.IOU_THRESHOLDS = (0.25, 0.5, 0.75)
    # "auto": pool both images of aligned pairs, score cut pairs per image
    # "pooled" / "per_side": force one behaviour
    cfg.EVAL.SIDES = "auto"
    # "all", "tune" or "test"
    cfg.EVAL.SPLIT = "all"
    cfg.EVAL.TUNE_FRACTION = 0.7


def get_cfg() -> CN:
    """
    Get a copy of the default config.

    Returns:
        a CfgNode instance.
    """
    cfg = CN()
    cfg.VERSION = 1
    cfg.SEED = 0
    # worker processes for per-pair work
    cfg.JOBS = 1
    cfg.OUTPUT_DIR = "./output"
    add_model_config(cfg)
    add_datagen_config(cfg)
    add_eval_config(cfg)
    return cfg


def apply_profile(cfg, profile: str):
    if profile not in PROFILES:
        raise ConfigError(f"unknown profile {profile!r}; expected one of {sorted(PROFILES)}")
    cfg.merge_from_list(list(PROFILES[profile]))
    return cfg


def _check(ok: bool, msg: str):
    if not ok:
        raise ConfigError(msg)


def validate_cfg(cfg):
    """
    Raise ConfigError when a value is outside its valid range.
    """
    m = cfg.MODEL
    _check(m.METHOD in METHODS, f"MODEL.METHOD must be one of {METHODS}, got {m.METHOD!r}")
    _check(isinstance(m.GRAPH.K, int) and m.GRAPH.K >= 1, f"K must be an integer >= 1, got {m.GRAPH.K}")
    _check(
        isinstance(m.SIMILARITY.H, int) and 0 <= m.SIMILARITY.H <= 64,
        f"H must be an integer in [0, 64], got {m.SIMILARITY.H}",
    )
    for key in ("TS", "NS", "SELF_WEIGHT"):
        value = m.SIMILARITY[key]
        _check(0.0 <= float(value) <= 1.0, f"{key} must be in [0, 1], got {value}")
    _check(
        m.MATCHER.CONTEXT_REDUCTION in ("best", "mean"),
        f"MODEL.MATCHER.CONTEXT_REDUCTION must be 'best' or 'mean', got {m.MATCHER.CONTEXT_REDUCTION!r}",
    )
    _check(m.PWC.MIN_AREA >= 0, "MODEL.PWC.MIN_AREA must be >= 0")
    _check(0.0 < m.RCD.PAIR_IOU <= 1.0, "MODEL.RCD.PAIR_IOU must be in (0, 1]")
    _check(0 <= m.RCD.HASH_THRESHOLD <= 64, "MODEL.RCD.HASH_THRESHOLD must be in [0, 64]")
    _check(0.0 <= cfg.DETECTOR.NOISE.DROP_PROB < 1.0, "DETECTOR.NOISE.DROP_PROB must be in [0, 1)")
    _check(cfg.DETECTOR.NOISE.JITTER >= 0, "DETECTOR.NOISE.JITTER must be >= 0")

    d = cfg.DATAGEN
    _check(d.VARIANTS >= 1, "DATAGEN.VARIANTS must be >= 1")
    _check(1 <= d.MAX_CHANGES <= 4, "DATAGEN.MAX_CHANGES must be in [1, 4]")
    _check(d.PLACEMENT_RETRIES >= 1, "DATAGEN.PLACEMENT_RETRIES must be >= 1")
    _check(0.0 < d.RESIZE_SMALLER[0] <= d.RESIZE_SMALLER[1] < 1.0, "DATAGEN.RESIZE_SMALLER must lie in (0, 1)")
    _check(1.0 < d.RESIZE_LARGER[0] <= d.RESIZE_LARGER[1], "DATAGEN.RESIZE_LARGER must lie above 1")
    _check(len(d.CUT.AMOUNTS) > 0 and min(d.CUT.AMOUNTS) >= 0, "DATAGEN.CUT.AMOUNTS must be non-negative")
    _check(
        set(d.CUT.SIDES) <= {"left", "right", "top", "bottom"} and len(d.CUT.SIDES) > 0,
        "DATAGEN.CUT.SIDES must be a subset of left/right/top/bottom",
    )
    s = d.SYNTHETIC
    _check(1 <= s.MIN_CONTROLS <= s.MAX_CONTROLS, "DATAGEN.SYNTHETIC control counts are inconsistent")

    e = cfg.EVAL
    _check(len(e.IOU_THRESHOLDS) > 0, "EVAL.IOU_THRESHOLDS must not be empty")
    for t in e.IOU_THRESHOLDS:
        _check(0.0 < t <= 1.0, f"IOU thresholds must be in (0, 1], got {t}")
    _check(e.SIDES in ("auto", "pooled", "per_side"), f"EVAL.SIDES invalid: {e.SIDES!r}")
    _check(e.SPLIT in ("all", "tune", "test"), f"EVAL.SPLIT invalid: {e.SPLIT!r}")
    _check(0.0 < e.TUNE_FRACTION < 1.0, "EVAL.TUNE_FRACTION must be in (0, 1)")
    _check(cfg.JOBS >= 1, "JOBS must be >= 1")
    return cfg
