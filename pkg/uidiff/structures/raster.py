from typing import Tuple

import numpy as np
from PIL import Image

from .boxes import BBox
from .errors import BoundsError, SchemaError

__all__ = ["Raster"]


class Raster:
    """
    An RGB8 screenshot.

    The pixels are held as a read-only ``(height, width, 3)`` uint8 array in
    row-major order; the flattened buffer therefore has ``width * height * 3`` bytes.
    Mutating code works on a copy obtained from :meth:`to_array` and wraps the
    result in a new Raster.
    """

    __slots__ = ("_pixels",)

    def __init__(self, pixels: np.ndarray):
        pixels = np.asarray(pixels)
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise SchemaError(f"expected an (H, W, 3) array, got shape {pixels.shape}")
        if pixels.shape[0] == 0 or pixels.shape[1] == 0:
            raise SchemaError("an image needs at least one pixel")
        pixels = np.ascontiguousarray(pixels, dtype=np.uint8).copy()
        pixels.setflags(write=False)
        self._pixels = pixels

    @classmethod
    def blank(cls, width: int, height: int, color=(255, 255, 255)) -> "Raster":
        pixels = np.empty((height, width, 3), dtype=np.uint8)
        pixels[...] = np.asarray(color, dtype=np.uint8)
        return cls(pixels)

    @classmethod
    def from_pil(cls, image: Image.Image) -> "Raster":
        return cls(np.asarray(image.convert("RGB")))

    @classmethod
    def from_bytes(cls, width: int, height: int, buffer: bytes) -> "Raster":
        if len(buffer) != width * height * 3:
            raise SchemaError(f"buffer of {len(buffer)} bytes does not hold a {width}x{height} RGB image")
        return cls(np.frombuffer(buffer, dtype=np.uint8).reshape(height, width, 3))

    @property
    def pixels(self) -> np.ndarray:
        return self._pixels

    @property
    def width(self) -> int:
        return int(self._pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self._pixels.shape[0])

    @property
    def size(self) -> Tuple[int, int]:
        return (self.width, self.height)

    def to_array(self) -> np.ndarray:
        """A writable copy of the pixels."""
        return self._pixels.copy()

    def to_pil(self) -> Image.Image:
        return Image.fromarray(self._pixels)

    def tobytes(self) -> bytes:
        return self._pixels.tobytes()

    def crop(self, box: BBox) -> np.ndarray:
        if not box.fits_in(self.width, self.height):
            raise BoundsError(f"box {box.to_list()} outside {self.width}x{self.height} image")
        return self._pixels[box.y1 : box.y2, box.x1 : box.x2]

    def __reduce__(self):
        return (Raster, (self._pixels,))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Raster):
            return NotImplemented
        return self._pixels.shape == other._pixels.shape and bool(np.array_equal(self._pixels, other._pixels))

    def __hash__(self):
        return hash((self._pixels.shape, self._pixels.tobytes()))

    def __repr__(self) -> str:
        return f"Raster(width={self.width}, height={self.height})"
