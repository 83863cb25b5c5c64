"""
Pixel-level helpers shared by the mutations, and the cut-and-shift transform that
simulates a resized window.
"""
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from uidiff.structures import BBox, BoundsError, ConfigError, DetectionSet, PlacementFailed, Raster

__all__ = [
    "CutSpec",
    "cut_and_shift",
    "modal_color",
    "ring_color",
    "border_color",
    "recolor",
    "CUT_SIDES",
    "CUT_AMOUNTS",
]

CUT_SIDES = ("left", "right", "top", "bottom")
CUT_AMOUNTS = (100, 200, 300, 400, 500)


def modal_color(pixels: np.ndarray) -> Tuple[int, int, int]:
    """Most frequent RGB value; ties go to the smallest value."""
    flat = np.asarray(pixels, dtype=np.uint8).reshape(-1, 3)
    if len(flat) == 0:
        raise ValueError("no pixels to take a colour from")
    colors, counts = np.unique(flat, axis=0, return_counts=True)
    return tuple(int(v) for v in colors[int(np.argmax(counts))])


def ring_color(pixels: np.ndarray, box: BBox, width: int = 5) -> Tuple[int, int, int]:
    """
    Modal colour of the ``width``-pixel ring around ``box`` (clipped to the image).
    Falls back to the box's own border when the box covers the whole image.
    """
    h, w = pixels.shape[:2]
    outer = box.expand(width, w, h)
    mask = np.zeros((outer.height, outer.width), dtype=bool)
    mask[...] = True
    mask[box.y1 - outer.y1 : box.y2 - outer.y1, box.x1 - outer.x1 : box.x2 - outer.x1] = False
    region = pixels[outer.y1 : outer.y2, outer.x1 : outer.x2]
    if mask.any():
        return modal_color(region[mask])
    return border_color(region)


def border_color(pixels: np.ndarray) -> Tuple[int, int, int]:
    """Modal colour of the outermost 1-px frame of an image."""
    frame = np.concatenate([pixels[0], pixels[-1], pixels[:, 0], pixels[:, -1]], axis=0)
    return modal_color(frame)


def recolor(patch: np.ndarray, rng: np.random.Generator, retries: int = 10) -> np.ndarray:
    """
    Give every distinct colour of ``patch`` a new random colour. The mapping is
    one-to-one and no colour maps to itself, so every pixel changes and pixels that
    shared a colour still share one.
    """
    colors, inverse = np.unique(patch.reshape(-1, 3), axis=0, return_inverse=True)
    for _ in range(retries):
        new = rng.integers(0, 256, size=colors.shape, dtype=np.uint8)
        if (new == colors).all(axis=1).any() or len(np.unique(new, axis=0)) < len(colors):
            continue
        return new[inverse.reshape(-1)].reshape(patch.shape)
    raise PlacementFailed(f"no one-to-one recolouring of {len(colors)} colours after {retries} draws")


@dataclass(frozen=True)
class CutSpec:
    """
    Remove ``amount`` pixels from one ``side`` of an image. With ``keep_canvas`` the
    remaining content is re-centred on the original canvas; otherwise the image is
    cropped to it.
    """

    side: str
    amount: int
    keep_canvas: bool = True

    def __post_init__(self):
        if self.side not in CUT_SIDES:
            raise ConfigError(f"side must be one of {CUT_SIDES}, got {self.side!r}")
        if self.amount < 0:
            raise ConfigError(f"cut amount must be non-negative, got {self.amount}")

    @property
    def horizontal(self) -> bool:
        return self.side in ("left", "right")

    def kept_region(self, width: int, height: int) -> BBox:
        limit = width if self.horizontal else height
        if self.amount >= limit:
            raise BoundsError(f"cannot cut {self.amount} px from a {width}x{height} image on the {self.side}")
        a = self.amount
        return {
            "left": BBox(a, 0, width, height),
            "right": BBox(0, 0, width - a, height),
            "top": BBox(0, a, width, height),
            "bottom": BBox(0, 0, width, height - a),
        }[self.side]

    def shift(self, width: int, height: int) -> Tuple[int, int]:
        """Translation applied to surviving content."""
        kept = self.kept_region(width, height)
        if self.keep_canvas:
            lead = self.amount // 2
            dx = lead - kept.x1 if self.horizontal else 0
            dy = lead - kept.y1 if not self.horizontal else 0
            return dx, dy
        return -kept.x1, -kept.y1

    def to_dict(self) -> dict:
        return {"side": self.side, "amount": self.amount, "keep_canvas": self.keep_canvas}

    @classmethod
    def from_dict(cls, d: dict) -> "CutSpec":
        return cls(side=d["side"], amount=int(d["amount"]), keep_canvas=bool(d.get("keep_canvas", True)))


def _survivor(box: BBox, kept: BBox, max_clipped: float) -> Optional[BBox]:
    clipped = box.intersection(kept)
    if clipped is None:
        return None
    if clipped.area < (1.0 - max_clipped) * box.area:
        return None
    return clipped


def cut_and_shift(
    img: Raster,
    dets: DetectionSet,
    gt: Sequence[BBox],
    spec: CutSpec,
    max_clipped: float = 0.5,
) -> Tuple[Raster, DetectionSet, List[BBox]]:
    """
    Apply ``spec`` to an image, its detections and its ground-truth change regions.

    Controls and regions outside the kept part, or losing more than ``max_clipped``
    of their area, disappear; the others are clipped and translated with the pixels.
    Margins created by re-centring take the image's modal border colour.
    """
    width, height = img.size
    kept = spec.kept_region(width, height)
    dx, dy = spec.shift(width, height)
    src = img.pixels

    if spec.keep_canvas:
        out = np.empty_like(src)
        out[...] = np.asarray(border_color(src), dtype=np.uint8)
        out_w, out_h = width, height
    else:
        out = np.empty((kept.height, kept.width, 3), dtype=np.uint8)
        out_w, out_h = kept.width, kept.height
    out[kept.y1 + dy : kept.y2 + dy, kept.x1 + dx : kept.x2 + dx] = src[kept.y1 : kept.y2, kept.x1 : kept.x2]

    controls = []
    for control in dets.controls:
        box = _survivor(control.bbox, kept, max_clipped)
        if box is not None:
            controls.append(control.replace(bbox=box.translate(dx, dy)))
    regions = []
    for region in gt:
        box = _survivor(region, kept, max_clipped)
        if box is not None:
            regions.append(box.translate(dx, dy))
    return Raster(out), DetectionSet(out_w, out_h, tuple(controls)), regions
