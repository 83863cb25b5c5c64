from .boxes import BBox, euclidean_distance, iou
from .controls import Control, ControlCategory, DetectionSet
from .errors import (
    BoundsError,
    CategoryError,
    ConfigError,
    DegenerateBox,
    DimensionMismatch,
    PlacementFailed,
    SchemaError,
    UiDiffError,
)
from .raster import Raster

__all__ = [k for k in globals().keys() if not k.startswith("_")]
