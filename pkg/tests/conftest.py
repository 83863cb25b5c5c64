import os

import numpy as np
import pytest

from uidiff.config import get_cfg
from uidiff.data.build import generate_dataset, synthetic_bases
from uidiff.data.sprites import synthesize_layout
from uidiff.structures import BBox, Control, DetectionSet, Raster


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run dataset-level tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: dataset-level runs, enabled with --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def small_cfg(**overrides):
    """Default config with small procedural canvases."""
    cfg = get_cfg()
    cfg.DATAGEN.SYNTHETIC.WIDTH = 640
    cfg.DATAGEN.SYNTHETIC.HEIGHT = 400
    cfg.DATAGEN.SYNTHETIC.MIN_CONTROLS = 10
    cfg.DATAGEN.SYNTHETIC.MAX_CONTROLS = 16
    cfg.DATAGEN.CUT.AMOUNTS = (40, 80, 120)
    cfg.merge_from_list([item for kv in overrides.items() for item in kv])
    return cfg


def make_dets(width, height, boxes, categories=None, texts=None):
    controls = []
    for i, box in enumerate(boxes):
        category = categories[i] if categories else "BUTTON"
        text = texts[i] if texts else None
        controls.append(Control(i, BBox(*box), category, text))
    return DetectionSet(width, height, tuple(controls))


@pytest.fixture
def cfg():
    return small_cfg()


@pytest.fixture
def layout():
    """A 640x400 procedural screenshot and its controls."""
    return synthesize_layout(np.random.default_rng(7), 640, 400, 10, 16, 8)


@pytest.fixture
def blank():
    return Raster.blank(480, 320, color=(240, 244, 248))


@pytest.fixture(scope="session")
def mini_dataset(tmp_path_factory):
    """Four bases x three variants, same canvas."""
    cfg = small_cfg()
    out = str(tmp_path_factory.mktemp("mini"))
    bases = synthetic_bases(4, 0, cfg)
    generate_dataset(bases, 3, False, 0, out, cfg)
    return os.path.join(out, "manifest.json")


@pytest.fixture(scope="session")
def mini_cut_dataset(tmp_path_factory):
    """Same bases, changed side cropped so image sizes differ."""
    cfg = small_cfg()
    cfg.DATAGEN.CUT.KEEP_CANVAS = False
    out = str(tmp_path_factory.mktemp("mini_cut"))
    bases = synthetic_bases(3, 0, cfg)
    generate_dataset(bases, 2, True, 0, out, cfg)
    return os.path.join(out, "manifest.json")


def checker_raster(flipped=0):
    """
    8x8 grey checkerboard of 200/50 cells; the first ``flipped`` bright cells are
    darkened, which flips exactly that many bits of its average hash.
    """
    cells = np.where((np.indices((8, 8)).sum(0) % 2) == 0, 200, 50).astype(np.uint8)
    for y, x in np.argwhere(cells == 200)[:flipped]:
        cells[y, x] = 50
    return Raster(np.repeat(cells[:, :, None], 3, axis=2))
