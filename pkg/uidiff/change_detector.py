# -*- coding: utf-8 -*-
"""
End-to-end change detection on one screenshot pair and the registry of the
available methods.
"""
import logging
from dataclasses import dataclass
from typing import Optional

from fvcore.common.registry import Registry

from uidiff.config import METHODS
from uidiff.modeling.baselines import PixelWiseParams, RegionBasedParams, pixel_wise_detect, region_based_detect
from uidiff.modeling.graph import GraphParams, build_graph
from uidiff.modeling.matcher import GraphMatcher, MatcherParams
from uidiff.modeling.report import ChangeRegion, ChangeReport
from uidiff.modeling.similarity import SimilarityParams
from uidiff.structures import ConfigError, DetectionSet, Raster
from uidiff.utils.file_io import dump_json, load_json

__all__ = [
    "CHANGE_DETECTOR_REGISTRY",
    "GvcdParams",
    "detect_changes",
    "GraphChangeDetector",
    "PixelWiseChangeDetector",
    "RegionBasedChangeDetector",
    "build_change_detector",
    "save_report",
    "load_report",
]

logger = logging.getLogger(__name__)

CHANGE_DETECTOR_REGISTRY = Registry("CHANGE_DETECTOR")
CHANGE_DETECTOR_REGISTRY.__doc__ = """
Registry for change detectors, which compare two screenshots and report changed
regions in each.

The registered object will be called with `obj(cfg)` and called as
`detector(img_a, dets_a, img_b, dets_b)` to return a ChangeReport.
"""

# MODEL.METHOD -> registered class
METHOD_CLASSES = {
    "gvcd": "GraphChangeDetector",
    "pwc": "PixelWiseChangeDetector",
    "rcd": "RegionBasedChangeDetector",
}


@dataclass(frozen=True)
class GvcdParams:
    graph: GraphParams = GraphParams()
    similarity: SimilarityParams = SimilarityParams()
    matcher: MatcherParams = MatcherParams()

    @classmethod
    def from_config(cls, cfg) -> "GvcdParams":
        return cls(GraphParams.from_config(cfg), SimilarityParams.from_config(cfg), MatcherParams.from_config(cfg))

    def to_dict(self) -> dict:
        return {
            "K": self.graph.K,
            "H": self.similarity.H,
            "TS": self.similarity.TS,
            "NS": self.similarity.NS,
            "self_weight": self.matcher.self_weight,
            "context_reduction": self.matcher.context_reduction,
        }


def detect_changes(
    img_a: Raster,
    dets_a: DetectionSet,
    img_b: Raster,
    dets_b: DetectionSet,
    params: GvcdParams = GvcdParams(),
) -> ChangeReport:
    """
    Build the KNN graph of each image, match their nodes and report every
    unmatched control as a change in its own image.
    """
    graph_a = build_graph(dets_a, params.graph)
    graph_b = build_graph(dets_b, params.graph)
    result = GraphMatcher(params.similarity, params.matcher)(graph_a, img_a, graph_b, img_b)
    return ChangeReport(
        method="gvcd",
        size_original=img_a.size,
        size_changed=img_b.size,
        changes_in_original=tuple(ChangeRegion.of(c) for c in dets_a if c.id in result.unmatched_source),
        changes_in_changed=tuple(ChangeRegion.of(c) for c in dets_b if c.id in result.unmatched_target),
        match_result=result,
        params=params.to_dict(),
    )


@CHANGE_DETECTOR_REGISTRY.register()
class GraphChangeDetector:
    needs_detections = True

    def __init__(self, params: GvcdParams):
        self.params = params

    @classmethod
    def from_config(cls, cfg):
        return cls(GvcdParams.from_config(cfg))

    def __call__(self, img_a, dets_a, img_b, dets_b) -> ChangeReport:
        return detect_changes(img_a, dets_a, img_b, dets_b, self.params)


@CHANGE_DETECTOR_REGISTRY.register()
class PixelWiseChangeDetector:
    needs_detections = False

    def __init__(self, params: PixelWiseParams):
        self.params = params

    @classmethod
    def from_config(cls, cfg):
        return cls(PixelWiseParams.from_config(cfg))

    def __call__(self, img_a, dets_a, img_b, dets_b) -> ChangeReport:
        return pixel_wise_detect(img_a, img_b, self.params)


@CHANGE_DETECTOR_REGISTRY.register()
class RegionBasedChangeDetector:
    needs_detections = True

    def __init__(self, params: RegionBasedParams):
        self.params = params

    @classmethod
    def from_config(cls, cfg):
        return cls(RegionBasedParams.from_config(cfg))

    def __call__(self, img_a, dets_a, img_b, dets_b) -> ChangeReport:
        return region_based_detect(img_a, dets_a, img_b, dets_b, self.params)


def build_change_detector(cfg, method: Optional[str] = None):
    """
    Build the change detector named by ``method``, or by ``cfg.MODEL.METHOD``.
    """
    method = method or cfg.MODEL.METHOD
    if method not in METHOD_CLASSES:
        raise ConfigError(f"unknown method {method!r}; expected one of {METHODS}")
    detector = CHANGE_DETECTOR_REGISTRY.get(METHOD_CLASSES[method]).from_config(cfg)
    logger.debug("Built change detector {} with {}".format(method, detector.params))
    return detector


def save_report(report: ChangeReport, path: str) -> None:
    dump_json(report.to_dict(), path)


def load_report(path: str) -> ChangeReport:
    return ChangeReport.from_dict(load_json(path))
