import os
from typing import Dict

import numpy as np
from PIL import ImageDraw

from uidiff.modeling.report import ChangeReport, Heatmap
from uidiff.structures import Raster

from .file_io import dump_json, save_png

__all__ = ["heatmap_to_image", "draw_change_regions", "render_outputs"]

_RED = (255, 0, 0)
BORDER_WIDTH = 3


def heatmap_to_image(heatmap: Heatmap) -> np.ndarray:
    """Grayscale uint8 image: changed cells white, the rest black."""
    return (heatmap.cells * 255).astype(np.uint8)


def draw_change_regions(img: Raster, boxes, width: int = BORDER_WIDTH) -> np.ndarray:
    image = img.to_pil()
    draw = ImageDraw.Draw(image)
    for box in boxes:
        # borders are drawn inside the box
        draw.rectangle([box.x1, box.y1, box.x2 - 1, box.y2 - 1], outline=_RED, width=width)
    return np.asarray(image)


def render_outputs(report: ChangeReport, img_a: Raster, img_b: Raster, out_dir: str) -> Dict[str, str]:
    """
    Write heatmap_a/b.png, overlay_a/b.png and report.json into ``out_dir``.

    Returns:
        dict: artifact name -> written path
    """
    paths = {
        name: os.path.join(out_dir, name)
        for name in ("heatmap_a.png", "heatmap_b.png", "overlay_a.png", "overlay_b.png", "report.json")
    }
    save_png(heatmap_to_image(report.heatmap_original), paths["heatmap_a.png"])
    save_png(heatmap_to_image(report.heatmap_changed), paths["heatmap_b.png"])
    save_png(draw_change_regions(img_a, report.boxes_original), paths["overlay_a.png"])
    save_png(draw_change_regions(img_b, report.boxes_changed), paths["overlay_b.png"])
    dump_json(report.to_dict(), paths["report.json"])
    return paths
