import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

from .errors import BoundsError, DegenerateBox

__all__ = ["BBox", "euclidean_distance", "iou"]


@dataclass(frozen=True, order=True)
class BBox:
    """
    An axis-aligned integer pixel box in XYXY_ABS format.

    The origin is the top-left corner of the image and ``x2``/``y2`` are exclusive,
    so ``area == (x2 - x1) * (y2 - y1)``.
    """

    x1: int
    y1: int
    x2: int
    y2: int

    def __post_init__(self):
        for name in ("x1", "y1", "x2", "y2"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                # numpy integers are accepted and normalized to int
                try:
                    as_int = int(value)
                except (TypeError, ValueError):
                    raise DegenerateBox(f"{name} must be an integer, got {value!r}")
                if as_int != value:
                    raise DegenerateBox(f"{name} must be an integer, got {value!r}")
                object.__setattr__(self, name, as_int)
        if min(self.x1, self.y1, self.x2, self.y2) < 0:
            raise BoundsError(f"negative coordinate in {self.to_list()}")
        if self.x1 >= self.x2 or self.y1 >= self.y2:
            raise DegenerateBox(f"empty box {self.to_list()}")

    @classmethod
    def from_list(cls, values: Iterable[int]) -> "BBox":
        values = list(values)
        if len(values) != 4:
            raise DegenerateBox(f"a box needs 4 coordinates, got {len(values)}")
        return cls(*values)

    @classmethod
    def from_xywh(cls, x: int, y: int, w: int, h: int) -> "BBox":
        return cls(x, y, x + w, y + h)

    def to_list(self) -> List[int]:
        return [self.x1, self.y1, self.x2, self.y2]

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return (self.x1, self.y1, self.x2, self.y2)

    @property
    def width(self) -> int:
        return self.x2 - self.x1

    @property
    def height(self) -> int:
        return self.y2 - self.y1

    @property
    def area(self) -> int:
        return self.width * self.height

    def fits_in(self, width: int, height: int) -> bool:
        return self.x2 <= width and self.y2 <= height

    def intersection(self, other: "BBox") -> Optional["BBox"]:
        x1, y1 = max(self.x1, other.x1), max(self.y1, other.y1)
        x2, y2 = min(self.x2, other.x2), min(self.y2, other.y2)
        if x1 >= x2 or y1 >= y2:
            return None
        return BBox(x1, y1, x2, y2)

    def intersects(self, other: "BBox") -> bool:
        return self.intersection(other) is not None

    def enclose(self, other: "BBox") -> "BBox":
        return BBox(
            min(self.x1, other.x1), min(self.y1, other.y1), max(self.x2, other.x2), max(self.y2, other.y2)
        )

    def translate(self, dx: int, dy: int) -> "BBox":
        return BBox(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)

    def expand(self, margin: int, width: int, height: int) -> "BBox":
        """Grow by ``margin`` pixels on every side, clamped to a ``width`` x ``height`` image."""
        return BBox(
            max(0, self.x1 - margin),
            max(0, self.y1 - margin),
            min(width, self.x2 + margin),
            min(height, self.y2 + margin),
        )

    def resized(self, factor: float) -> "BBox":
        """Scale width and height by ``factor`` keeping the top-left corner fixed."""
        w = max(1, int(round(self.width * factor)))
        h = max(1, int(round(self.height * factor)))
        return BBox(self.x1, self.y1, self.x1 + w, self.y1 + h)

    def moved_to(self, x: int, y: int) -> "BBox":
        return BBox(x, y, x + self.width, y + self.height)


def euclidean_distance(a: BBox, b: BBox) -> float:
    """Distance between two boxes seen as points (x1, y1, x2, y2) in R^4."""
    return math.sqrt(
        float(a.x1 - b.x1) ** 2 + float(a.y1 - b.y1) ** 2 + float(a.x2 - b.x2) ** 2 + float(a.y2 - b.y2) ** 2
    )


def iou(a: BBox, b: BBox) -> float:
    inter = a.intersection(b)
    if inter is None:
        return 0.0
    overlap = inter.area
    return overlap / float(a.area + b.area - overlap)
