from .baselines import PixelWiseParams, RegionBasedParams, pixel_wise_detect, region_based_detect
from .graph import GraphParams, UiGraph, build_graph, dump_graph, nearest_neighbors
from .matcher import GraphMatcher, MatcherParams, MatchResult, assign_matches, neighbor_similarity
from .report import BaselineReport, ChangeRegion, ChangeReport, Heatmap
from .similarity import (
    BaseSimilarityTable,
    PerceptualHash,
    SimilarityParams,
    average_hash,
    base_similarity,
    hash_difference,
    levenshtein,
    text_similarity,
)
