"""
The eight synthetic UI changes and the in-progress pair they operate on.

Every mutation either succeeds and records its ground-truth regions, or raises
:class:`PlacementFailed` without touching the pair.
"""
import logging
from dataclasses import dataclass
from enum import Enum, unique
from typing import Any, Dict, Iterable, List, Optional, Set, Tuple

import numpy as np
from fvcore.common.registry import Registry
from PIL import Image

from uidiff.modeling.similarity import hash_difference, patch_hash
from uidiff.structures import BBox, Control, DetectionSet, PlacementFailed, Raster, SchemaError

from .sprites import random_sprite
from .transforms import CutSpec, recolor, ring_color

__all__ = ["ChangeKind", "AppliedChange", "GeneratedPair", "PairBuilder", "apply_change", "MUTATION_REGISTRY"]

logger = logging.getLogger(__name__)

MUTATION_REGISTRY = Registry("MUTATION")
MUTATION_REGISTRY.__doc__ = """
Registry for mutations, keyed by ChangeKind value.

A mutation is called as ``mutation(pair, rng)`` on a :class:`PairBuilder` and returns
the parameters it used.
"""

# SWAP first looks for equal-size controls whose hashes differ by more than this
SWAP_MIN_HASH_DIFFERENCE = 10


@unique
class ChangeKind(Enum):
    ADD_CONTROL = "ADD_CONTROL"
    CHANGE_LOCATION = "CHANGE_LOCATION"
    CHANGE_COLOR = "CHANGE_COLOR"
    DUPLICATE = "DUPLICATE"
    REMOVE = "REMOVE"
    RESIZE_SMALLER = "RESIZE_SMALLER"
    RESIZE_LARGER = "RESIZE_LARGER"
    SWAP_CONTROLS = "SWAP_CONTROLS"


@dataclass(frozen=True)
class AppliedChange:
    kind: ChangeKind
    params: Dict[str, Any]

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "params": self.params}

    @classmethod
    def from_dict(cls, d: dict) -> "AppliedChange":
        return cls(ChangeKind(d["kind"]), dict(d.get("params", {})))


@dataclass
class GeneratedPair:
    original: Raster
    original_dets: DetectionSet
    changed: Raster
    changed_dets: DetectionSet
    applied: List[AppliedChange]
    gt_changes_original: List[BBox]
    gt_changes_changed: List[BBox]
    seed: int = 0
    cut: Optional[CutSpec] = None


class PairBuilder:
    """
    A pair in progress: the untouched original, and a writable copy of its pixels
    and controls that mutations edit.

    Mutations never pick a control an earlier mutation produced or modified, and
    new boxes keep ``margin`` pixels away from every control and every ground-truth
    region, so change regions stay disjoint.
    """

    def __init__(
        self,
        original: Raster,
        dets: DetectionSet,
        *,
        margin: int = 2,
        retries: int = 100,
        fill_ring: int = 5,
        resize_smaller: Tuple[float, float] = (0.3, 0.8),
        resize_larger: Tuple[float, float] = (1.3, 1.8),
    ):
        if original.size != dets.size:
            raise SchemaError(f"image is {original.size} but annotations declare {dets.size}")
        self.original = original
        self.original_dets = dets
        self.pixels = original.to_array()
        self.controls: Dict[int, Control] = dets.by_id()
        self.gt_original: List[BBox] = []
        self.gt_changed: List[BBox] = []
        self.touched: Set[int] = set()
        self.applied: List[AppliedChange] = []
        self._next_id = max(self.controls, default=-1) + 1

        self.margin = margin
        self.retries = retries
        self.fill_ring = fill_ring
        self.resize_smaller = tuple(resize_smaller)
        self.resize_larger = tuple(resize_larger)

    @classmethod
    def from_config(cls, original: Raster, dets: DetectionSet, cfg) -> "PairBuilder":
        d = cfg.DATAGEN
        return cls(
            original,
            dets,
            margin=d.PLACEMENT_MARGIN,
            retries=d.PLACEMENT_RETRIES,
            fill_ring=d.FILL_RING,
            resize_smaller=d.RESIZE_SMALLER,
            resize_larger=d.RESIZE_LARGER,
        )

    @property
    def width(self) -> int:
        return self.original.width

    @property
    def height(self) -> int:
        return self.original.height

    # ---- geometry -----------------------------------------------------------------

    def _obstacles(self, exclude: Iterable[int] = ()) -> List[BBox]:
        exclude = set(exclude)
        boxes = [c.bbox for i, c in self.controls.items() if i not in exclude]
        boxes.extend(self.gt_original)
        boxes.extend(self.gt_changed)
        return [b.expand(self.margin, self.width, self.height) for b in boxes]

    def is_free(self, box: BBox, exclude: Iterable[int] = (), others: Iterable[BBox] = ()) -> bool:
        if not box.fits_in(self.width, self.height):
            return False
        obstacles = self._obstacles(exclude)
        obstacles.extend(b.expand(self.margin, self.width, self.height) for b in others)
        return not any(box.intersects(o) for o in obstacles)

    def random_placement(self, width: int, height: int, rng: np.random.Generator) -> BBox:
        if width > self.width or height > self.height:
            raise PlacementFailed(f"a {width}x{height} control does not fit the canvas")
        for _ in range(self.retries):
            x = int(rng.integers(0, self.width - width + 1))
            y = int(rng.integers(0, self.height - height + 1))
            box = BBox(x, y, x + width, y + height)
            if self.is_free(box):
                return box
        raise PlacementFailed(f"no free {width}x{height} spot after {self.retries} attempts")

    def candidates(self, rng: np.random.Generator, minimum: int = 1) -> List[int]:
        """Untouched control ids in random order."""
        ids = sorted(i for i in self.controls if i not in self.touched)
        if len(ids) < minimum:
            raise PlacementFailed(f"needs {minimum} unmodified controls, {len(ids)} left")
        return [ids[i] for i in rng.permutation(len(ids))]

    # ---- pixels -------------------------------------------------------------------

    def patch(self, box: BBox) -> np.ndarray:
        return self.pixels[box.y1 : box.y2, box.x1 : box.x2].copy()

    def paste(self, box: BBox, patch: np.ndarray):
        self.pixels[box.y1 : box.y2, box.x1 : box.x2] = patch

    def erase(self, box: BBox):
        """Fill ``box`` with the modal colour of the ring around it."""
        self.pixels[box.y1 : box.y2, box.x1 : box.x2] = np.asarray(
            ring_color(self.pixels, box, self.fill_ring), dtype=np.uint8
        )

    def new_id(self) -> int:
        self._next_id += 1
        return self._next_id - 1

    # ---- result -------------------------------------------------------------------

    def apply(self, kind: ChangeKind, rng: np.random.Generator) -> AppliedChange:
        params = MUTATION_REGISTRY.get(kind.value)(self, rng)
        change = AppliedChange(kind, params)
        self.applied.append(change)
        return change

    def build(self, seed: int = 0) -> GeneratedPair:
        controls = tuple(self.controls[i] for i in sorted(self.controls))
        return GeneratedPair(
            original=self.original,
            original_dets=self.original_dets,
            changed=Raster(self.pixels),
            changed_dets=DetectionSet(self.width, self.height, controls),
            applied=list(self.applied),
            gt_changes_original=list(self.gt_original),
            gt_changes_changed=list(self.gt_changed),
            seed=seed,
        )


def apply_change(pair: PairBuilder, kind: ChangeKind, rng: np.random.Generator) -> AppliedChange:
    """
    Apply one mutation of ``kind`` to ``pair``. Raises PlacementFailed, leaving the
    pair unchanged, when the mutation has no valid target or placement.
    """
    return pair.apply(kind, rng)


def _resize(patch: np.ndarray, box: BBox) -> np.ndarray:
    image = Image.fromarray(patch).resize((box.width, box.height), resample=Image.Resampling.BILINEAR)
    return np.asarray(image)


@MUTATION_REGISTRY.register()
def ADD_CONTROL(pair: PairBuilder, rng):
    sprite = random_sprite(rng)
    box = pair.random_placement(sprite.width, sprite.height, rng)
    pair.paste(box, sprite.pixels)
    control = Control(pair.new_id(), box, sprite.category, sprite.text)
    pair.controls[control.id] = control
    pair.touched.add(control.id)
    pair.gt_changed.append(box)
    return {"id": control.id, "category": control.category.value, "bbox": box.to_list()}


@MUTATION_REGISTRY.register()
def CHANGE_LOCATION(pair: PairBuilder, rng):
    control = pair.controls[pair.candidates(rng)[0]]
    old = control.bbox
    new = pair.random_placement(old.width, old.height, rng)
    patch = pair.patch(old)
    pair.erase(old)
    pair.paste(new, patch)
    pair.controls[control.id] = control.replace(bbox=new)
    pair.touched.add(control.id)
    pair.gt_original.append(old)
    pair.gt_changed.append(new)
    return {"id": control.id, "from": old.to_list(), "to": new.to_list()}


@MUTATION_REGISTRY.register()
def CHANGE_COLOR(pair: PairBuilder, rng):
    control = pair.controls[pair.candidates(rng)[0]]
    box = control.bbox
    pair.paste(box, recolor(pair.patch(box), rng))
    pair.touched.add(control.id)
    pair.gt_original.append(box)
    pair.gt_changed.append(box)
    return {"id": control.id, "bbox": box.to_list()}


@MUTATION_REGISTRY.register()
def DUPLICATE(pair: PairBuilder, rng):
    control = pair.controls[pair.candidates(rng)[0]]
    box = pair.random_placement(control.bbox.width, control.bbox.height, rng)
    pair.paste(box, pair.patch(control.bbox))
    copy = control.replace(id=pair.new_id(), bbox=box)
    pair.controls[copy.id] = copy
    pair.touched.update((control.id, copy.id))
    pair.gt_changed.append(box)
    return {"id": control.id, "copy_id": copy.id, "bbox": box.to_list()}


@MUTATION_REGISTRY.register()
def REMOVE(pair: PairBuilder, rng):
    control = pair.controls[pair.candidates(rng)[0]]
    pair.erase(control.bbox)
    del pair.controls[control.id]
    pair.gt_original.append(control.bbox)
    return {"id": control.id, "bbox": control.bbox.to_list()}


@MUTATION_REGISTRY.register()
def RESIZE_SMALLER(pair: PairBuilder, rng):
    control = pair.controls[pair.candidates(rng)[0]]
    old = control.bbox
    factor = float(rng.uniform(*pair.resize_smaller))
    new = old.resized(factor)
    if new.width == old.width and new.height == old.height:
        raise PlacementFailed(f"control {control.id} is too small to shrink")
    patch = _resize(pair.patch(old), new)
    pair.erase(old)
    pair.paste(new, patch)
    pair.controls[control.id] = control.replace(bbox=new)
    pair.touched.add(control.id)
    pair.gt_original.append(old)
    pair.gt_changed.append(old)
    return {"id": control.id, "factor": factor, "from": old.to_list(), "to": new.to_list()}


@MUTATION_REGISTRY.register()
def RESIZE_LARGER(pair: PairBuilder, rng):
    control = pair.controls[pair.candidates(rng)[0]]
    old = control.bbox
    for _ in range(pair.retries):
        factor = float(rng.uniform(*pair.resize_larger))
        new = old.resized(factor)
        if pair.is_free(new, exclude=(control.id,)):
            break
    else:
        raise PlacementFailed(f"control {control.id} cannot grow without overlapping")
    # the enlarged box contains the old one, so pasting covers every old pixel
    pair.paste(new, _resize(pair.patch(old), new))
    pair.controls[control.id] = control.replace(bbox=new)
    pair.touched.add(control.id)
    pair.gt_original.append(new)
    pair.gt_changed.append(new)
    return {"id": control.id, "factor": factor, "from": old.to_list(), "to": new.to_list()}


def _swap_destinations(pair: PairBuilder, a: Control, b: Control) -> Optional[Tuple[BBox, BBox]]:
    new_a = a.bbox.moved_to(b.bbox.x1, b.bbox.y1) if _fits_at(pair, a.bbox, b.bbox) else None
    new_b = b.bbox.moved_to(a.bbox.x1, a.bbox.y1) if _fits_at(pair, b.bbox, a.bbox) else None
    if new_a is None or new_b is None:
        return None
    if a.bbox.width == b.bbox.width and a.bbox.height == b.bbox.height:
        return new_a, new_b
    exclude = (a.id, b.id)
    if not pair.is_free(new_a, exclude, others=(new_b,)) or not pair.is_free(new_b, exclude):
        return None
    return new_a, new_b


def _fits_at(pair: PairBuilder, box: BBox, anchor: BBox) -> bool:
    return anchor.x1 + box.width <= pair.width and anchor.y1 + box.height <= pair.height


def _frame(patch: np.ndarray) -> np.ndarray:
    return np.concatenate([patch[0], patch[-1], patch[:, 0], patch[:, -1]], axis=0)


@MUTATION_REGISTRY.register()
def SWAP_CONTROLS(pair: PairBuilder, rng):
    ids = pair.candidates(rng, minimum=2)
    patches = {i: pair.patch(pair.controls[i].bbox) for i in ids}
    hashes = {i: patch_hash(p) for i, p in patches.items()}

    def same_size(i, j):
        return patches[i].shape == patches[j].shape

    def frame_distinct(i, j):
        # every border pixel changes, so the pixel difference spans the whole box
        return bool((_frame(patches[i]) != _frame(patches[j])).any(axis=1).all())

    pairs = [(ids[x], ids[y]) for x in range(len(ids)) for y in range(x + 1, len(ids))]
    passes = [
        lambda i, j: same_size(i, j)
        and frame_distinct(i, j)
        and hash_difference(hashes[i], hashes[j]) > SWAP_MIN_HASH_DIFFERENCE,
        lambda i, j: same_size(i, j) and frame_distinct(i, j),
        lambda i, j: not same_size(i, j),
        lambda i, j: same_size(i, j) and not np.array_equal(patches[i], patches[j]),
    ]
    chosen = None
    for accept in passes:
        for i, j in pairs:
            if not accept(i, j):
                continue
            dest = _swap_destinations(pair, pair.controls[i], pair.controls[j])
            if dest is not None:
                chosen = (i, j, dest)
                break
        if chosen is not None:
            break
    if chosen is None:
        raise PlacementFailed("no pair of controls can be swapped")

    i, j, (new_i, new_j) = chosen
    a, b = pair.controls[i], pair.controls[j]
    pair.erase(a.bbox)
    pair.erase(b.bbox)
    pair.paste(new_i, patches[i])
    pair.paste(new_j, patches[j])
    pair.controls[i] = a.replace(bbox=new_i)
    pair.controls[j] = b.replace(bbox=new_j)
    pair.touched.update((i, j))
    pair.gt_original.extend([a.bbox, b.bbox])
    pair.gt_changed.extend([new_i, new_j])
    return {"ids": [i, j], "from": [a.bbox.to_list(), b.bbox.to_list()], "to": [new_i.to_list(), new_j.to_list()]}
