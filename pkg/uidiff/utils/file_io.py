"""
Path handling and the deterministic JSON/CSV/PNG writers every output goes through.
"""
import csv
import io
import json
import os
from typing import Any, Iterable, List, Sequence

import numpy as np
from iopath.common.file_io import HTTPURLHandler, OneDrivePathHandler
from iopath.common.file_io import PathManager as PathManagerBase
from PIL import Image

__all__ = [
    "PathManager",
    "load_json",
    "dump_json",
    "to_jsonable",
    "write_csv",
    "read_csv",
    "read_image",
    "save_png",
]

PathManager = PathManagerBase()
"""
A project-wide PathManager, so that local paths and URLs are handled the same way.
"""
PathManager.register_handler(HTTPURLHandler())
PathManager.register_handler(OneDrivePathHandler())

FLOAT_DECIMALS = 6


def to_jsonable(obj: Any) -> Any:
    """
    Convert numpy scalars/arrays and tuples to plain JSON types and round floats,
    so repeated runs serialize to the same bytes.
    """
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = round(float(obj), FLOAT_DECIMALS)
        # avoid "-0.0"
        return 0.0 if value == 0 else value
    return obj


def dumps_json(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def dump_json(obj: Any, path: str) -> None:
    parent = os.path.dirname(path)
    if parent:
        PathManager.mkdirs(parent)
    with PathManager.open(path, "w", encoding="utf-8") as f:
        f.write(dumps_json(obj))


def load_json(path: str) -> Any:
    with PathManager.open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    parent = os.path.dirname(path)
    if parent:
        PathManager.mkdirs(parent)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(v) for v in row])
    with PathManager.open(path, "w", encoding="utf-8") as f:
        f.write(buf.getvalue())


def read_csv(path: str) -> List[dict]:
    with PathManager.open(path, "r", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def _csv_cell(value):
    value = to_jsonable(value)
    if isinstance(value, float):
        return f"{value:.6f}"
    return value


def read_image(path: str) -> np.ndarray:
    """Read an image as an (H, W, 3) uint8 RGB array."""
    with PathManager.open(path, "rb") as f:
        image = Image.open(f)
        image.load()
    return np.asarray(image.convert("RGB"))


def save_png(array: np.ndarray, path: str) -> None:
    """
    Write an RGB or grayscale uint8 array as PNG with fixed encoder settings and no
    metadata, so identical arrays give identical files.
    """
    parent = os.path.dirname(path)
    if parent:
        PathManager.mkdirs(parent)
    array = np.asarray(array, dtype=np.uint8)
    image = Image.fromarray(array)
    with PathManager.open(path, "wb") as f:
        image.save(f, format="PNG", optimize=False, compress_level=6)
