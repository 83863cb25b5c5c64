"""
Reading and writing the per-image annotation document::

    {"image": {"width": int, "height": int},
     "controls": [{"id": int?, "bbox": [x1, y1, x2, y2], "category": str, "text": str?}]}
"""
from typing import Any, Dict

from uidiff.structures import BBox, Control, ControlCategory, DegenerateBox, DetectionSet, SchemaError
from uidiff.utils.file_io import dump_json, load_json

__all__ = ["load_annotations", "dump_annotations", "read_annotation_file", "write_annotation_file"]


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _parse_control(index: int, entry: Any) -> Control:
    if not isinstance(entry, dict):
        raise SchemaError(f"controls[{index}] must be an object")
    for key in ("bbox", "category"):
        if key not in entry:
            raise SchemaError(f"controls[{index}] is missing {key!r}")

    control_id = entry.get("id", index)
    if control_id is None:
        control_id = index
    if not _is_int(control_id) or control_id < 0:
        raise SchemaError(f"controls[{index}].id must be a non-negative integer")

    bbox = entry["bbox"]
    if not isinstance(bbox, (list, tuple)) or len(bbox) != 4 or not all(_is_int(v) for v in bbox):
        raise SchemaError(f"controls[{index}].bbox must be a list of 4 integers")
    try:
        box = BBox(*bbox)
    except DegenerateBox as e:
        raise SchemaError(f"controls[{index}].bbox: {e}") from None

    category = entry["category"]
    if not isinstance(category, str):
        raise SchemaError(f"controls[{index}].category must be a string")

    text = entry.get("text")
    if text is not None and not isinstance(text, str):
        raise SchemaError(f"controls[{index}].text must be a string")

    return Control(id=control_id, bbox=box, category=ControlCategory.parse(category), text=text)


def load_annotations(document: Dict[str, Any]) -> DetectionSet:
    """
    Build a DetectionSet from an annotation document.

    Controls keep their input order. A control without ``id`` takes its position in
    the list. Any violation raises before a set is returned:
    :class:`SchemaError` for a malformed document, :class:`BoundsError` for a box
    outside the image and :class:`CategoryError` for an unknown label.
    """
    if not isinstance(document, dict):
        raise SchemaError("annotation document must be an object")
    image = document.get("image")
    if not isinstance(image, dict):
        raise SchemaError("annotation document is missing 'image'")
    width, height = image.get("width"), image.get("height")
    if not _is_int(width) or not _is_int(height) or width <= 0 or height <= 0:
        raise SchemaError("image.width and image.height must be positive integers")
    controls = document.get("controls", [])
    if not isinstance(controls, list):
        raise SchemaError("'controls' must be a list")

    parsed = [_parse_control(i, entry) for i, entry in enumerate(controls)]
    return DetectionSet(width, height, tuple(parsed))


def dump_annotations(dets: DetectionSet) -> Dict[str, Any]:
    controls = []
    for c in dets.controls:
        entry = {"id": c.id, "bbox": c.bbox.to_list(), "category": c.category.value}
        if c.text is not None:
            entry["text"] = c.text
        controls.append(entry)
    return {"image": {"width": dets.image_width, "height": dets.image_height}, "controls": controls}


def read_annotation_file(path: str) -> DetectionSet:
    try:
        document = load_json(path)
    except ValueError as e:
        # json.JSONDecodeError
        raise SchemaError(f"{path}: not valid JSON ({e})") from None
    return load_annotations(document)


def write_annotation_file(dets: DetectionSet, path: str) -> None:
    dump_json(dump_annotations(dets), path)
