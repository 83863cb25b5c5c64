"""
Exception types raised across uidiff.

Parsing and validation errors also derive from ValueError so callers that only
care about "bad input" can catch the builtin.
"""

__all__ = [
    "UiDiffError",
    "SchemaError",
    "BoundsError",
    "CategoryError",
    "DegenerateBox",
    "DimensionMismatch",
    "PlacementFailed",
    "ConfigError",
]


class UiDiffError(Exception):
    pass


class SchemaError(UiDiffError, ValueError):
    """An annotation, report or manifest document does not follow its schema."""


class BoundsError(UiDiffError, ValueError):
    """A box lies (partly) outside the image it is declared on."""


class CategoryError(UiDiffError, ValueError):
    """A control label is not one of the known categories."""


class DegenerateBox(UiDiffError, ValueError):
    pass


class DimensionMismatch(UiDiffError):
    """Two images that must share a size do not."""

    def __init__(self, size_a, size_b):
        super().__init__(f"image sizes differ: {size_a[0]}x{size_a[1]} vs {size_b[0]}x{size_b[1]}")
        self.size_a = tuple(size_a)
        self.size_b = tuple(size_b)


class PlacementFailed(UiDiffError):
    """A mutation found no valid placement within its retry budget."""


class ConfigError(UiDiffError, ValueError):
    pass
