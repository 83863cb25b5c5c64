"""
Leaf-level control similarity: an 8x8 average hash, its Hamming distance, a
normalized Levenshtein text similarity, and the gated combination of the two.
"""
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Tuple

import numpy as np
from PIL import Image

from uidiff.structures import BBox, ConfigError, Control, ControlCategory, DegenerateBox, Raster

__all__ = [
    "PerceptualHash",
    "SimilarityParams",
    "average_hash",
    "patch_hash",
    "hash_difference",
    "levenshtein",
    "text_similarity",
    "base_similarity",
    "BaseSimilarityTable",
]

HASH_SIZE = 8
HASH_BITS = HASH_SIZE * HASH_SIZE


@dataclass(frozen=True)
class PerceptualHash:
    """
    A 64-bit hash; bit ``i`` (most significant first) belongs to cell
    ``(i // 8, i % 8)`` of the 8x8 grid in row-major order.
    """

    value: int

    def __post_init__(self):
        if not 0 <= self.value < (1 << HASH_BITS):
            raise ValueError(f"hash value out of range: {self.value}")

    @classmethod
    def from_bits(cls, bits: np.ndarray) -> "PerceptualHash":
        value = 0
        for bit in np.asarray(bits, dtype=bool).reshape(-1):
            value = (value << 1) | int(bit)
        return cls(value)

    def bits(self) -> np.ndarray:
        out = np.zeros(HASH_BITS, dtype=bool)
        for i in range(HASH_BITS):
            out[i] = (self.value >> (HASH_BITS - 1 - i)) & 1
        return out.reshape(HASH_SIZE, HASH_SIZE)

    def __invert__(self) -> "PerceptualHash":
        return PerceptualHash(self.value ^ ((1 << HASH_BITS) - 1))

    def __int__(self) -> int:
        return self.value

    def __str__(self) -> str:
        return f"{self.value:016x}"


@dataclass(frozen=True)
class SimilarityParams:
    """
    H: max hash difference in bits. TS: min text similarity for TEXT controls.
    NS: min pair score for a match.
    """

    H: int = 10
    TS: float = 0.7
    NS: float = 0.8

    def __post_init__(self):
        if isinstance(self.H, bool) or not isinstance(self.H, (int, np.integer)) or not 0 <= self.H <= HASH_BITS:
            raise ConfigError(f"H must be an integer in [0, 64], got {self.H}")
        for name in ("TS", "NS"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {value}")

    @classmethod
    def from_config(cls, cfg) -> "SimilarityParams":
        s = cfg.MODEL.SIMILARITY
        return cls(H=int(s.H), TS=float(s.TS), NS=float(s.NS))


def patch_hash(patch: np.ndarray) -> PerceptualHash:
    """Average hash of an (h, w, 3) uint8 pixel array."""
    if patch.shape[0] == 0 or patch.shape[1] == 0:
        raise DegenerateBox("cannot hash an empty patch")
    # "L" conversion is the Rec. 601 luma transform
    luma = np.asarray(Image.fromarray(np.ascontiguousarray(patch)).convert("L"), dtype=np.float32)
    small = Image.fromarray(luma).resize((HASH_SIZE, HASH_SIZE), resample=Image.Resampling.BILINEAR)
    # rounding absorbs float32 resampling noise so flat regions compare equal to the mean
    cells = np.round(np.asarray(small, dtype=np.float64), 3)
    return PerceptualHash.from_bits(cells >= cells.mean() - 1e-6)


def average_hash(img: Raster, box: BBox) -> PerceptualHash:
    """
    Average hash of the pixels inside ``box``: grayscale, bilinear resize to 8x8,
    then one bit per cell set when the cell is at least the mean. A constant patch
    therefore hashes to all ones.
    """
    return patch_hash(img.crop(box))


def hash_difference(a: PerceptualHash, b: PerceptualHash) -> int:
    return bin(a.value ^ b.value).count("1")


def levenshtein(a: str, b: str) -> int:
    """Edit distance with unit-cost insertions, deletions and substitutions."""
    if len(a) < len(b):
        a, b = b, a
    if len(b) == 0:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i] + [0] * len(b)
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current[j] = min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost)
        previous = current
    return previous[-1]


def text_similarity(a: Optional[str], b: Optional[str]) -> float:
    if a is None and b is None:
        return 1.0
    if a is None or b is None:
        return 0.0
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def _combine(a: Control, b: Control, diff: int, p: SimilarityParams) -> float:
    if a.category is not b.category:
        return 0.0
    if diff > p.H:
        return 0.0
    hash_sim = 1.0 - diff / float(HASH_BITS)
    if a.category is ControlCategory.TEXT:
        ts = text_similarity(a.text, b.text)
        if ts < p.TS:
            return 0.0
        return 0.5 * ts + 0.5 * hash_sim
    return hash_sim


def base_similarity(a: Control, b: Control, img_a: Raster, img_b: Raster, p: SimilarityParams) -> float:
    """
    Similarity of two controls by their own pixels and text, in [0, 1].

    Zero when the categories differ, when the hashes differ by more than ``p.H`` bits
    or, for TEXT controls, when the text similarity is below ``p.TS``.
    """
    if a.category is not b.category:
        return 0.0
    diff = hash_difference(average_hash(img_a, a.bbox), average_hash(img_b, b.bbox))
    return _combine(a, b, diff, p)


class BaseSimilarityTable:
    """
    Hashes every control of an image pair once and memoizes base similarities.

    ``table.get(i, j)`` equals ``base_similarity(a, b, img_a, img_b, params)`` for the
    controls with ids ``i`` and ``j``.
    The table only grows by adding entries, so concurrent readers see either a
    missing or a final value.
    """

    def __init__(
        self,
        img_a: Raster,
        controls_a: Iterable[Control],
        img_b: Raster,
        controls_b: Iterable[Control],
        params: SimilarityParams,
    ):
        self.params = params
        self._controls_a: Dict[int, Control] = {c.id: c for c in controls_a}
        self._controls_b: Dict[int, Control] = {c.id: c for c in controls_b}
        self.hashes_a: Dict[int, PerceptualHash] = {i: average_hash(img_a, c.bbox) for i, c in self._controls_a.items()}
        self.hashes_b: Dict[int, PerceptualHash] = {i: average_hash(img_b, c.bbox) for i, c in self._controls_b.items()}
        self._cache: Dict[Tuple[int, int], float] = {}

    def control_a(self, i: int) -> Control:
        return self._controls_a[i]

    def control_b(self, j: int) -> Control:
        return self._controls_b[j]

    def hash_difference(self, i: int, j: int) -> int:
        return hash_difference(self.hashes_a[i], self.hashes_b[j])

    def get(self, i: int, j: int) -> float:
        key = (i, j)
        value = self._cache.get(key)
        if value is None:
            a, b = self._controls_a[i], self._controls_b[j]
            if a.category is not b.category:
                value = 0.0
            else:
                value = _combine(a, b, self.hash_difference(i, j), self.params)
            self._cache[key] = value
        return value
