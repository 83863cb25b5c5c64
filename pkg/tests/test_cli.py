import json
import os

import pytest

from uidiff import __version__
from uidiff.cli import get_parser, run, setup_cfg
from uidiff.data.annotations import write_annotation_file
from uidiff.utils.file_io import load_json, save_png

SMALL_LAYOUT = ["DATAGEN.SYNTHETIC.WIDTH", "640", "DATAGEN.SYNTHETIC.HEIGHT", "400"]
SMALL_LAYOUT += ["DATAGEN.SYNTHETIC.MIN_CONTROLS", "10", "DATAGEN.SYNTHETIC.MAX_CONTROLS", "16"]


@pytest.fixture
def screenshot(tmp_path, layout):
    img, dets = layout
    png, annots = str(tmp_path / "home.png"), str(tmp_path / "home.json")
    save_png(img.pixels, png)
    write_annotation_file(dets, annots)
    return png, annots


def _diff_args(screenshot, out, *extra):
    png, annots = screenshot
    return ["diff", "--image-a", png, "--image-b", png, "--annots-a", annots, "--annots-b", annots, "--out", out] + list(
        extra
    )


def test_diff_self_pair(screenshot, tmp_path):
    out = str(tmp_path / "out")
    assert run(_diff_args(screenshot, out, "--dump-graphs")) == 0
    report = load_json(os.path.join(out, "report.json"))
    assert report["changes_in_original"] == [] and report["changes_in_changed"] == []
    assert report["params"]["K"] == 8
    for name in ("heatmap_a.png", "heatmap_b.png", "overlay_a.png", "overlay_b.png", "graph_a.json", "graph_b.json"):
        assert os.path.isfile(os.path.join(out, name))


def test_diff_pixel_wise_needs_no_annotations(screenshot, tmp_path):
    png, _ = screenshot
    out = str(tmp_path / "out")
    assert run(["diff", "--image-a", png, "--image-b", png, "--method", "pwc", "--out", out]) == 0
    assert load_json(os.path.join(out, "report.json"))["method"] == "pwc"


def test_diff_requires_annotations_for_gvcd(screenshot, tmp_path):
    png, _ = screenshot
    assert run(["diff", "--image-a", png, "--image-b", png, "--out", str(tmp_path / "out")]) == 2


@pytest.mark.parametrize(
    "extra",
    [["--ns", "1.5"], ["--k", "0"], ["MODEL.UNKNOWN", "1"], ["MODEL.GRAPH.K", "eight"]],
)
def test_invalid_configuration_exits_2(screenshot, tmp_path, extra):
    assert run(_diff_args(screenshot, str(tmp_path / "out"), *extra)) == 2


def test_malformed_annotations_exit_2(screenshot, tmp_path):
    png, _ = screenshot
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps({"image": {"width": 640, "height": 400}, "controls": [{"bbox": [0, 0, 5]}]}))
    args = ["diff", "--image-a", png, "--image-b", png, "--annots-a", str(broken), "--annots-b", str(broken)]
    assert run(args + ["--out", str(tmp_path / "out")]) == 2


def test_version(capsys):
    assert run(["--version"]) == 0
    assert __version__ in capsys.readouterr().out


def test_no_command():
    assert run([]) == 2


def test_config_precedence(tmp_path):
    config = tmp_path / "k.yaml"
    config.write_text("MODEL:\n  GRAPH:\n    K: 3\n  SIMILARITY:\n    H: 12\n")
    args = get_parser().parse_args(
        ["eval", "--manifest", "m.json", "--out", "o.json", "--profile", "mobile", "--config-file", str(config)]
        + ["--k", "4", "MODEL.SIMILARITY.H", "14"]
    )
    cfg = setup_cfg(args)
    assert cfg.MODEL.GRAPH.K == 4 and cfg.MODEL.SIMILARITY.H == 14
    args = get_parser().parse_args(["eval", "--manifest", "m.json", "--out", "o.json", "--profile", "mobile"])
    assert setup_cfg(args).MODEL.GRAPH.K == 5


def test_generate_eval_and_sweep(tmp_path):
    data = str(tmp_path / "data")
    assert run(["generate", "--synthetic", "2", "--variants", "2", "--out", data] + SMALL_LAYOUT) == 0
    manifest = os.path.join(data, "manifest.json")
    assert len(load_json(manifest)["pairs"]) == 4

    outputs = []
    for name in ("a", "b"):
        out, csv_path = str(tmp_path / f"{name}.json"), str(tmp_path / f"{name}.csv")
        assert run(["eval", "--manifest", manifest, "--method", "all", "--out", out, "--csv", csv_path]) == 0
        with open(out, "rb") as f, open(csv_path, "rb") as g:
            outputs.append((f.read(), g.read()))
    assert outputs[0] == outputs[1]
    assert sorted(json.loads(outputs[0][0])["methods"]) == ["gvcd", "pwc", "rcd"]

    sweep_csv = str(tmp_path / "sweep.csv")
    assert run(["sweep", "--manifest", manifest, "--param", "k", "--values", "2..3", "--out", sweep_csv]) == 0
    with open(sweep_csv) as f:
        assert len(f.read().splitlines()) == 3


def test_eval_cut_dataset_flags_mismatches(mini_cut_dataset, tmp_path):
    out = str(tmp_path / "scores.json")
    assert run(["eval", "--manifest", mini_cut_dataset, "--method", "pwc", "--out", out]) == 0
    result = load_json(out)
    assert result["methods"]["pwc"]["dimension_mismatch"] == len(load_json(mini_cut_dataset)["pairs"])


def test_missing_manifest_is_an_error(tmp_path):
    with pytest.raises(FileNotFoundError):
        run(["eval", "--manifest", str(tmp_path / "none.json"), "--out", str(tmp_path / "o.json")])


@pytest.mark.parametrize("flag", ["--synthetic", "--num-bases"])
def test_generate_synthetic_bases(tmp_path, flag):
    data = str(tmp_path / "data")
    assert run(["generate", flag, "2", "--variants", "1", "--seed", "0", "--out", data] + SMALL_LAYOUT) == 0
    assert len(load_json(os.path.join(data, "manifest.json"))["pairs"]) == 2


def test_generate_sources_are_exclusive(tmp_path):
    args = ["generate", "--bases", str(tmp_path), "--synthetic", "2", "--out", str(tmp_path / "data")]
    assert run(args) == 2


def test_generate_rejects_empty_synthetic(tmp_path):
    assert run(["generate", "--synthetic", "0", "--out", str(tmp_path / "data")]) == 2


def test_generate_cut_from_config_file(tmp_path):
    data = str(tmp_path / "data")
    config = os.path.join(os.path.dirname(__file__), "..", "configs", "uidiff", "cut.yaml")
    args = ["generate", "--config-file", config, "--synthetic", "2", "--variants", "1", "--out", data]
    assert run(args + SMALL_LAYOUT + ["DATAGEN.CUT.AMOUNTS", "(100, 200)"]) == 0
    manifest = load_json(os.path.join(data, "manifest.json"))
    assert manifest["cut"] is True
    assert all(pair["cut"] is not None for pair in manifest["pairs"])


def test_generate_without_cut_flag_keeps_default(tmp_path):
    data = str(tmp_path / "data")
    assert run(["generate", "--synthetic", "1", "--variants", "2", "--out", data] + SMALL_LAYOUT) == 0
    manifest = load_json(os.path.join(data, "manifest.json"))
    assert manifest["cut"] is False
    assert all(pair["cut"] is None for pair in manifest["pairs"])
