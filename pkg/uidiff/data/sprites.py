"""
A small built-in bank of control sprites and a procedural layout synthesizer that
arranges them into flat-background screenshots with exact annotations.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from fvcore.common.registry import Registry
from PIL import Image, ImageDraw, ImageFont

from uidiff.structures import BBox, Control, ControlCategory, DetectionSet, Raster

__all__ = ["SPRITE_REGISTRY", "Sprite", "paint_sprite", "random_sprite", "synthesize_layout", "WORDS"]

logger = logging.getLogger(__name__)

SPRITE_REGISTRY = Registry("SPRITE")
SPRITE_REGISTRY.__doc__ = """
Registry for control sprite painters, keyed by ControlCategory value.

A painter is called as ``painter(rng)`` and returns ``(pixels, text)`` where pixels
is an (h, w, 3) uint8 array fully covering the control's box.
"""

# tinted so that no sprite colour or grey text blend equals the page colour
BACKGROUNDS = [(240, 244, 248), (250, 248, 240), (236, 240, 241), (244, 247, 252), (248, 244, 236)]
FILLS = [
    (52, 152, 219),
    (46, 204, 113),
    (231, 76, 60),
    (155, 89, 182),
    (241, 196, 15),
    (230, 126, 34),
    (26, 188, 156),
    (149, 165, 166),
    (41, 128, 185),
    (192, 57, 43),
    (127, 140, 141),
    (211, 84, 0),
]
OUTLINES = [(44, 62, 80), (20, 20, 20), (90, 90, 90), (0, 70, 140), (120, 30, 30)]
INKS = [(0, 0, 0), (33, 33, 33), (60, 60, 60)]
PAPERS = [(255, 255, 255), (250, 250, 250), (232, 232, 232)]

WORDS = [
    "Submit", "Cancel", "Save", "Open", "Close", "Search", "Login", "Logout", "Next", "Back",
    "Home", "Profile", "Settings", "Help", "Delete", "Edit", "Upload", "Share", "Export", "Print",
    "Name", "Email", "Address", "Password", "Total", "Price", "Orders", "Reports", "Filter", "Apply",
    "Account", "Billing", "Contact", "About", "Download", "Refresh", "Details", "Summary", "Status", "Notes",
]

# relative frequency of each category in procedural layouts
LAYOUT_WEIGHTS = {
    ControlCategory.BUTTON: 4,
    ControlCategory.TEXT: 5,
    ControlCategory.INPUT: 3,
    ControlCategory.ICON: 3,
    ControlCategory.IMAGE: 2,
    ControlCategory.CHECKBOX_CHECKED: 1,
    ControlCategory.CHECKBOX_UNCHECKED: 1,
    ControlCategory.RADIO_SELECTED: 1,
    ControlCategory.RADIO_UNSELECTED: 1,
    ControlCategory.DROPDOWN: 2,
    ControlCategory.MENU: 1,
    ControlCategory.TABBAR: 1,
    ControlCategory.LIST: 1,
    ControlCategory.TABLE: 1,
    ControlCategory.CHART: 1,
}

_FONT = None


def _font():
    global _FONT
    if _FONT is None:
        _FONT = ImageFont.load_default()
    return _FONT


def _pick(rng: np.random.Generator, seq: Sequence):
    return seq[int(rng.integers(len(seq)))]


def _words(rng: np.random.Generator, lo: int, hi: int) -> str:
    n = int(rng.integers(lo, hi + 1))
    return " ".join(_pick(rng, WORDS) for _ in range(n))


def _text_size(text: str) -> Tuple[int, int]:
    draw = ImageDraw.Draw(Image.new("RGB", (1, 1)))
    x1, y1, x2, y2 = draw.textbbox((0, 0), text, font=_font())
    return x2, y2


def _canvas(w: int, h: int, fill) -> Tuple[Image.Image, ImageDraw.ImageDraw]:
    image = Image.new("RGB", (int(w), int(h)), tuple(fill))
    return image, ImageDraw.Draw(image)


def _accent(draw: ImageDraw.ImageDraw, w: int, h: int, rng: np.random.Generator):
    # a randomly placed block so sprites of one category hash differently
    aw = max(3, int(w * rng.uniform(0.1, 0.3)))
    ax = int(rng.integers(2, max(3, w - aw - 2)))
    draw.rectangle([ax, 2, ax + aw, h - 3], fill=_pick(rng, OUTLINES))


def _grid_pattern(w: int, h: int, cells: int, rng: np.random.Generator) -> np.ndarray:
    colors = np.array(FILLS + OUTLINES + PAPERS, dtype=np.uint8)
    grid = colors[rng.integers(len(colors), size=(cells, cells))]
    image = Image.fromarray(grid).resize((w, h), resample=Image.Resampling.NEAREST)
    return np.asarray(image)


@SPRITE_REGISTRY.register()
def BUTTON(rng):
    text = _pick(rng, WORDS)
    tw, th = _text_size(text)
    w, h = tw + int(rng.integers(40, 80)), max(th + 12, int(rng.integers(28, 40)))
    image, draw = _canvas(w, h, _pick(rng, FILLS))
    _accent(draw, w, h, rng)
    draw.rectangle([0, 0, w - 1, h - 1], outline=_pick(rng, OUTLINES), width=2)
    draw.text(((w - tw) // 2, (h - th) // 2), text, fill=(255, 255, 255), font=_font())
    return np.asarray(image), text


@SPRITE_REGISTRY.register()
def TEXT(rng):
    text = _words(rng, 1, 4)
    tw, th = _text_size(text)
    w, h = tw + 6, th + 6
    image, draw = _canvas(w, h, _pick(rng, PAPERS))
    draw.text((3, 3), text, fill=_pick(rng, INKS), font=_font())
    # underline on half of them
    if rng.random() < 0.5:
        draw.line([3, h - 2, w - 4, h - 2], fill=_pick(rng, FILLS), width=1)
    return np.asarray(image), text


@SPRITE_REGISTRY.register()
def INPUT(rng):
    w, h = int(rng.integers(160, 300)), int(rng.integers(28, 36))
    image, draw = _canvas(w, h, _pick(rng, PAPERS))
    draw.rectangle([0, 0, w - 1, h - 1], outline=_pick(rng, OUTLINES), width=1)
    hint = _pick(rng, WORDS)
    _, th = _text_size(hint)
    draw.text((6, (h - th) // 2), hint, fill=(150, 150, 150), font=_font())
    cx = int(rng.integers(w // 2, w - 8))
    draw.line([cx, 5, cx, h - 6], fill=_pick(rng, INKS), width=2)
    return np.asarray(image), None


@SPRITE_REGISTRY.register()
def ICON(rng):
    s = int(rng.integers(24, 48))
    return _grid_pattern(s, s, int(rng.integers(3, 6)), rng), None


@SPRITE_REGISTRY.register()
def IMAGE(rng):
    w, h = int(rng.integers(80, 200)), int(rng.integers(60, 150))
    return _grid_pattern(w, h, int(rng.integers(4, 9)), rng), None


def _check_box(rng, checked: bool, round_: bool):
    s = int(rng.integers(16, 22))
    image, draw = _canvas(s, s, _pick(rng, PAPERS))
    outline = _pick(rng, OUTLINES)
    if round_:
        draw.ellipse([0, 0, s - 1, s - 1], outline=outline, width=2)
        if checked:
            draw.ellipse([5, 5, s - 6, s - 6], fill=_pick(rng, FILLS))
    else:
        draw.rectangle([0, 0, s - 1, s - 1], outline=outline, width=2)
        if checked:
            draw.line([4, s // 2, s // 2 - 1, s - 5, s - 4, 4], fill=_pick(rng, FILLS), width=3)
    return np.asarray(image), None


@SPRITE_REGISTRY.register()
def CHECKBOX_CHECKED(rng):
    return _check_box(rng, True, False)


@SPRITE_REGISTRY.register()
def CHECKBOX_UNCHECKED(rng):
    return _check_box(rng, False, False)


@SPRITE_REGISTRY.register()
def RADIO_SELECTED(rng):
    return _check_box(rng, True, True)


@SPRITE_REGISTRY.register()
def RADIO_UNSELECTED(rng):
    return _check_box(rng, False, True)


@SPRITE_REGISTRY.register()
def DROPDOWN(rng):
    w, h = int(rng.integers(120, 220)), int(rng.integers(28, 36))
    image, draw = _canvas(w, h, _pick(rng, PAPERS))
    draw.rectangle([0, 0, w - 1, h - 1], outline=_pick(rng, OUTLINES), width=1)
    label = _pick(rng, WORDS)
    _, th = _text_size(label)
    draw.text((6, (h - th) // 2), label, fill=_pick(rng, INKS), font=_font())
    ax = w - 22
    draw.rectangle([ax, 1, w - 2, h - 2], fill=_pick(rng, FILLS))
    draw.polygon([(ax + 5, h // 2 - 3), (ax + 15, h // 2 - 3), (ax + 10, h // 2 + 4)], fill=(255, 255, 255))
    return np.asarray(image), None


def _strip(rng, n_items: int, w: int, h: int, horizontal: bool):
    image, draw = _canvas(w, h, _pick(rng, PAPERS))
    outline = _pick(rng, OUTLINES)
    draw.rectangle([0, 0, w - 1, h - 1], outline=outline, width=1)
    active = int(rng.integers(n_items))
    step = (w if horizontal else h) / n_items
    for i in range(n_items):
        a, b = int(i * step), int((i + 1) * step) - 1
        box = [a, 0, b, h - 1] if horizontal else [0, a, w - 1, b]
        if i == active:
            draw.rectangle(box, fill=_pick(rng, FILLS), outline=outline)
        else:
            draw.rectangle(box, outline=outline)
        label = _pick(rng, WORDS)
        tw, th = _text_size(label)
        tx = box[0] + 4
        ty = box[1] + max(1, ((box[3] - box[1]) - th) // 2)
        if tx + tw < box[2] and ty + th < box[3]:
            draw.text((tx, ty), label, fill=_pick(rng, INKS), font=_font())
    return np.asarray(image), None


@SPRITE_REGISTRY.register()
def TABBAR(rng):
    n = int(rng.integers(3, 6))
    return _strip(rng, n, int(rng.integers(240, 420)), int(rng.integers(30, 40)), True)


@SPRITE_REGISTRY.register()
def MENU(rng):
    n = int(rng.integers(2, 4))
    return _strip(rng, n, int(rng.integers(150, 240)), int(rng.integers(24, 32)), True)


@SPRITE_REGISTRY.register()
def LIST(rng):
    n = int(rng.integers(3, 7))
    return _strip(rng, n, int(rng.integers(120, 220)), 20 * n, False)


@SPRITE_REGISTRY.register()
def TABLE(rng):
    rows, cols = int(rng.integers(3, 7)), int(rng.integers(2, 5))
    w, h = 70 * cols, 22 * rows
    image, draw = _canvas(w, h, _pick(rng, PAPERS))
    outline = _pick(rng, OUTLINES)
    draw.rectangle([0, 0, w - 1, 21], fill=_pick(rng, FILLS))
    for r in range(1, rows):
        draw.line([0, 22 * r, w - 1, 22 * r], fill=outline)
    for c in range(1, cols):
        draw.line([70 * c, 0, 70 * c, h - 1], fill=outline)
    draw.rectangle([0, 0, w - 1, h - 1], outline=outline)
    for r in range(rows):
        for c in range(cols):
            if rng.random() < 0.6:
                draw.text((70 * c + 4, 22 * r + 5), _pick(rng, WORDS)[:8], fill=_pick(rng, INKS), font=_font())
    return np.asarray(image), None


@SPRITE_REGISTRY.register()
def CHART(rng):
    w, h = int(rng.integers(160, 300)), int(rng.integers(120, 200))
    image, draw = _canvas(w, h, _pick(rng, PAPERS))
    ink = _pick(rng, INKS)
    draw.line([8, 4, 8, h - 8, w - 4, h - 8], fill=ink, width=2)
    n = int(rng.integers(4, 9))
    bw = (w - 20) // n
    for i in range(n):
        bh = int(rng.integers(10, h - 16))
        x = 12 + i * bw
        draw.rectangle([x, h - 9 - bh, x + bw - 4, h - 10], fill=_pick(rng, FILLS))
    return np.asarray(image), None


@dataclass(frozen=True)
class Sprite:
    category: ControlCategory
    pixels: np.ndarray
    text: Optional[str] = None

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])


def paint_sprite(category: ControlCategory, rng: np.random.Generator) -> Sprite:
    pixels, text = SPRITE_REGISTRY.get(category.value)(rng)
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8)
    return Sprite(category, pixels, text if category is ControlCategory.TEXT else None)


def random_sprite(rng: np.random.Generator) -> Sprite:
    categories = list(LAYOUT_WEIGHTS.keys())
    weights = np.array([LAYOUT_WEIGHTS[c] for c in categories], dtype=np.float64)
    category = categories[int(rng.choice(len(categories), p=weights / weights.sum()))]
    return paint_sprite(category, rng)


def synthesize_layout(
    rng: np.random.Generator,
    width: int = 1920,
    height: int = 1080,
    min_controls: int = 20,
    max_controls: int = 40,
    gap: int = 8,
) -> Tuple[Raster, DetectionSet]:
    """
    Lay sprites out row by row on a flat background.

    Consecutive controls are separated by at least ``gap`` pixels, with a random
    extra offset per control so rows do not line up perfectly.
    """
    target = int(rng.integers(min_controls, max_controls + 1))
    background = _pick(rng, BACKGROUNDS)
    pixels = np.empty((height, width, 3), dtype=np.uint8)
    pixels[...] = np.asarray(background, dtype=np.uint8)

    controls: List[Control] = []
    y = gap + int(rng.integers(0, 3 * gap))
    empty_rows = 0
    while len(controls) < target and empty_rows < 3 and y < height - gap:
        x = gap + int(rng.integers(0, 4 * gap))
        row_height = 0
        misses = 0
        while len(controls) < target and misses < 6:
            sprite = random_sprite(rng)
            dy = int(rng.integers(0, gap))
            if x + sprite.width + gap > width or y + dy + sprite.height + gap > height:
                misses += 1
                continue
            box = BBox(x, y + dy, x + sprite.width, y + dy + sprite.height)
            pixels[box.y1 : box.y2, box.x1 : box.x2] = sprite.pixels
            controls.append(Control(len(controls), box, sprite.category, sprite.text))
            row_height = max(row_height, dy + sprite.height)
            x = box.x2 + gap + int(rng.integers(0, 6 * gap))
        if row_height == 0:
            empty_rows += 1
            y += gap
        else:
            empty_rows = 0
            y += row_height + gap + int(rng.integers(0, 3 * gap))

    if len(controls) < min_controls:
        logger.debug("Layout holds {} controls, fewer than the requested {}".format(len(controls), min_controls))
    # ids follow placement order, which is row-major
    return Raster(pixels), DetectionSet(width, height, tuple(controls))
