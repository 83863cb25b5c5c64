"""
Outputs of the change detectors: change regions per image, the binary heatmaps
derived from them and their JSON form.
"""
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple

import numpy as np

from uidiff.structures import BBox, Control, ControlCategory, SchemaError

from .matcher import MatchResult

__all__ = ["Heatmap", "ChangeRegion", "ChangeReport", "BaselineReport"]


@dataclass(frozen=True, eq=False)
class Heatmap:
    """
    Binary matrix with the size of its image; a cell is 1 iff it lies inside at
    least one change region.
    """

    width: int
    height: int
    cells: np.ndarray

    @classmethod
    def from_regions(cls, width: int, height: int, boxes: Iterable[BBox]) -> "Heatmap":
        cells = np.zeros((height, width), dtype=np.uint8)
        for box in boxes:
            # overlapping regions simply union
            cells[box.y1 : min(box.y2, height), box.x1 : min(box.x2, width)] = 1
        cells.setflags(write=False)
        return cls(width, height, cells)

    def count_nonzero(self) -> int:
        return int(np.count_nonzero(self.cells))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Heatmap):
            return NotImplemented
        return self.width == other.width and self.height == other.height and np.array_equal(self.cells, other.cells)


@dataclass(frozen=True)
class ChangeRegion:
    bbox: BBox
    control_id: Optional[int] = None
    category: Optional[ControlCategory] = None

    @classmethod
    def of(cls, control: Control) -> "ChangeRegion":
        return cls(control.bbox, control.id, control.category)

    def to_dict(self) -> dict:
        return {
            "bbox": self.bbox.to_list(),
            "id": self.control_id,
            "category": None if self.category is None else self.category.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChangeRegion":
        category = d.get("category")
        return cls(
            bbox=BBox.from_list(d["bbox"]),
            control_id=d.get("id"),
            category=None if category is None else ControlCategory.parse(category),
        )


@dataclass(frozen=True)
class ChangeReport:
    """
    Result of one change detector on one image pair.

    ``match_result`` is only set by the graph-based detector. A pixel-wise run on
    images of different sizes sets ``dimension_mismatch`` and reports no regions.
    """

    method: str
    size_original: Tuple[int, int]
    size_changed: Tuple[int, int]
    changes_in_original: Tuple[ChangeRegion, ...] = ()
    changes_in_changed: Tuple[ChangeRegion, ...] = ()
    match_result: Optional[MatchResult] = None
    params: dict = field(default_factory=dict)
    dimension_mismatch: bool = False

    @property
    def heatmap_original(self) -> Heatmap:
        return Heatmap.from_regions(*self.size_original, (r.bbox for r in self.changes_in_original))

    @property
    def heatmap_changed(self) -> Heatmap:
        return Heatmap.from_regions(*self.size_changed, (r.bbox for r in self.changes_in_changed))

    @property
    def boxes_original(self) -> List[BBox]:
        return [r.bbox for r in self.changes_in_original]

    @property
    def boxes_changed(self) -> List[BBox]:
        return [r.bbox for r in self.changes_in_changed]

    def __len__(self) -> int:
        return len(self.changes_in_original) + len(self.changes_in_changed)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "dimension_mismatch": self.dimension_mismatch,
            "image_original": {"width": self.size_original[0], "height": self.size_original[1]},
            "image_changed": {"width": self.size_changed[0], "height": self.size_changed[1]},
            "changes_in_original": [r.to_dict() for r in self.changes_in_original],
            "changes_in_changed": [r.to_dict() for r in self.changes_in_changed],
            "match_result": None if self.match_result is None else self.match_result.to_dict(),
            "params": dict(self.params),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChangeReport":
        try:
            a, b = d["image_original"], d["image_changed"]
            match = d.get("match_result")
            return cls(
                method=d["method"],
                size_original=(int(a["width"]), int(a["height"])),
                size_changed=(int(b["width"]), int(b["height"])),
                changes_in_original=tuple(ChangeRegion.from_dict(r) for r in d["changes_in_original"]),
                changes_in_changed=tuple(ChangeRegion.from_dict(r) for r in d["changes_in_changed"]),
                match_result=None if match is None else MatchResult.from_dict(match),
                params=dict(d.get("params", {})),
                dimension_mismatch=bool(d.get("dimension_mismatch", False)),
            )
        except (KeyError, TypeError) as e:
            raise SchemaError(f"malformed change report: {e}") from e


# baselines fill the same fields and leave match_result unset
BaselineReport = ChangeReport
