from dataclasses import dataclass, field
from enum import Enum, unique
from typing import Dict, Iterator, List, Optional, Tuple

from .boxes import BBox
from .errors import BoundsError, CategoryError, SchemaError

__all__ = ["ControlCategory", "Control", "DetectionSet"]


@unique
class ControlCategory(Enum):
    """
    The 24 UI control classes a detector may assign.
    """

    ICON = "ICON"
    DROPDOWN = "DROPDOWN"
    BUTTON = "BUTTON"
    MENU = "MENU"
    INPUT = "INPUT"
    LIST = "LIST"
    TABBAR = "TABBAR"
    TABLE = "TABLE"
    RADIO_SELECTED = "RADIO_SELECTED"
    RADIO_UNSELECTED = "RADIO_UNSELECTED"
    CHECKBOX_UNCHECKED = "CHECKBOX_UNCHECKED"
    CHECKBOX_CHECKED = "CHECKBOX_CHECKED"
    TREE = "TREE"
    IMAGE = "IMAGE"
    TEXT = "TEXT"
    LABEL_OF_TEXT_AREA = "LABEL_OF_TEXT_AREA"
    DESCRIPTION_LIST = "DESCRIPTION_LIST"
    LEGEND = "LEGEND"
    HORIZONTAL_AXIS = "HORIZONTAL_AXIS"
    CHART = "CHART"
    PLOT_TITLE = "PLOT_TITLE"
    GRAPH = "GRAPH"
    VERTICAL_AXIS = "VERTICAL_AXIS"
    DATE_AREA = "DATE_AREA"

    @classmethod
    def parse(cls, label) -> "ControlCategory":
        if isinstance(label, cls):
            return label
        try:
            return cls(label)
        except ValueError:
            raise CategoryError(f"unknown control category {label!r}") from None


@dataclass(frozen=True)
class Control:
    id: int
    bbox: BBox
    category: ControlCategory
    text: Optional[str] = None

    def __post_init__(self):
        if isinstance(self.id, bool) or not isinstance(self.id, int) or self.id < 0:
            raise SchemaError(f"control id must be a non-negative integer, got {self.id!r}")
        object.__setattr__(self, "category", ControlCategory.parse(self.category))

    @property
    def is_text(self) -> bool:
        return self.category is ControlCategory.TEXT

    def replace(self, **changes) -> "Control":
        values = {"id": self.id, "bbox": self.bbox, "category": self.category, "text": self.text}
        values.update(changes)
        return Control(**values)


@dataclass(frozen=True)
class DetectionSet:
    """
    All controls detected on one image, in detector order.

    Ids are strictly increasing and every box lies inside the image.
    """

    image_width: int
    image_height: int
    controls: Tuple[Control, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.image_width <= 0 or self.image_height <= 0:
            raise SchemaError(f"invalid image size {self.image_width}x{self.image_height}")
        controls = tuple(self.controls)
        object.__setattr__(self, "controls", controls)
        last_id = -1
        for control in controls:
            if control.id <= last_id:
                raise SchemaError(f"control ids must be strictly increasing, got {control.id} after {last_id}")
            last_id = control.id
            if not control.bbox.fits_in(self.image_width, self.image_height):
                raise BoundsError(
                    f"control {control.id} box {control.bbox.to_list()} outside "
                    f"{self.image_width}x{self.image_height} image"
                )

    def __len__(self) -> int:
        return len(self.controls)

    def __iter__(self) -> Iterator[Control]:
        return iter(self.controls)

    @property
    def size(self) -> Tuple[int, int]:
        return (self.image_width, self.image_height)

    @property
    def ids(self) -> List[int]:
        return [c.id for c in self.controls]

    def by_id(self) -> Dict[int, Control]:
        return {c.id: c for c in self.controls}

    def get(self, control_id: int) -> Control:
        for control in self.controls:
            if control.id == control_id:
                return control
        raise KeyError(control_id)

    def with_controls(self, controls, renumber: bool = False) -> "DetectionSet":
        controls = list(controls)
        if renumber:
            controls = [c.replace(id=i) for i, c in enumerate(controls)]
        return DetectionSet(self.image_width, self.image_height, tuple(controls))
