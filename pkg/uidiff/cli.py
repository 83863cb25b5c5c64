# -*- coding: utf-8 -*-
"""
uidiff command line: ``diff``, ``generate``, ``eval`` and ``sweep``.

Configuration is merged in this order, later sources winning: built-in defaults,
``--profile``, ``--config-file``, explicit flags, trailing ``KEY VALUE`` opts.
"""
import argparse
import logging
import os
import sys
from typing import List, Optional

import numpy as np

from uidiff import __version__
from uidiff.change_detector import build_change_detector
from uidiff.config import METHODS, PROFILES, apply_profile, get_cfg, validate_cfg
from uidiff.data.build import generate_dataset, load_bases, synthetic_bases
from uidiff.data.detection import AnnotationFile, DetectorNoise, load_detections
from uidiff.data.manifest import load_manifest
from uidiff.evaluation import evaluate_dataset, parse_fixed, parse_values, sweep
from uidiff.modeling.graph import GraphParams, build_graph, dump_graph
from uidiff.structures import ConfigError, Raster, SchemaError, UiDiffError
from uidiff.utils.file_io import dump_json, read_image
from uidiff.utils.logger import setup_logger
from uidiff.utils.visualizer import render_outputs

__all__ = ["get_parser", "setup_cfg", "run", "main"]

logger = logging.getLogger("uidiff.cli")

DEFAULT_SYNTHETIC_BASES = 20

# flag -> (config key, type)
_FLAG_KEYS = {
    "method": ("MODEL.METHOD", str),
    "k": ("MODEL.GRAPH.K", int),
    "h": ("MODEL.SIMILARITY.H", int),
    "ts": ("MODEL.SIMILARITY.TS", float),
    "ns": ("MODEL.SIMILARITY.NS", float),
    "jobs": ("JOBS", int),
    "seed": ("SEED", int),
}


def _common_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config-file", default="", metavar="FILE", help="path to a YAML config file")
    parser.add_argument("--profile", choices=sorted(PROFILES), help="per-modality defaults (K = 8/6/5)")
    parser.add_argument("--jobs", type=int, help="worker processes for per-pair work")
    parser.add_argument("--log-file", metavar="FILE", help="also write the full log to this file")
    parser.add_argument("-v", "--verbose", action="store_true", help="log debug messages to the console")
    return parser


def _add_params(parser: argparse.ArgumentParser):
    parser.add_argument("--k", type=int, help="number of nearest neighbours per control")
    parser.add_argument("--h", type=int, help="maximum hash difference of matched controls")
    parser.add_argument("--ts", type=float, help="minimum text similarity of matched TEXT controls")
    parser.add_argument("--ns", type=float, help="minimum pair score of a match")


def _add_opts(parser: argparse.ArgumentParser):
    parser.add_argument(
        "opts",
        help="Modify config options using the command-line 'KEY VALUE' pairs",
        default=None,
        nargs=argparse.REMAINDER,
    )


def get_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uidiff", description="Graph-based change detection between UI screenshots")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    common = _common_parser()

    p = sub.add_parser("diff", parents=[common], help="detect changes between two screenshots")
    p.add_argument("--image-a", required=True, metavar="PNG", help="original screenshot")
    p.add_argument("--image-b", required=True, metavar="PNG", help="changed screenshot")
    p.add_argument("--annots-a", metavar="JSON", help="controls of the original screenshot")
    p.add_argument("--annots-b", metavar="JSON", help="controls of the changed screenshot")
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--out", required=True, metavar="DIR", help="output directory")
    p.add_argument("--dump-graphs", action="store_true", help="also write graph_a.json and graph_b.json")
    _add_params(p)
    _add_opts(p)

    p = sub.add_parser("generate", parents=[common], help="generate a synthetic benchmark")
    source = p.add_mutually_exclusive_group()
    source.add_argument("--bases", metavar="DIR", help="directory of base screenshots (*.png with *.json)")
    source.add_argument(
        "--synthetic", "--num-bases", dest="synthetic", type=int, metavar="N", help="procedural base layouts (default 20)"
    )
    p.add_argument("--variants", type=int, help="pairs per base image")
    p.add_argument(
        "--cut", action="store_true", default=None, help="also apply a random cut-and-shift (DATAGEN.CUT.ENABLED)"
    )
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, metavar="DIR", help="dataset directory")
    _add_opts(p)

    p = sub.add_parser("eval", parents=[common], help="score a change detector on a benchmark")
    p.add_argument("--manifest", required=True, metavar="JSON")
    p.add_argument("--method", choices=METHODS + ("all",))
    p.add_argument("--split", choices=("all", "tune", "test"))
    p.add_argument("--out", required=True, metavar="JSON", help="aggregate scores")
    p.add_argument("--csv", metavar="CSV", help="per-pair breakdown")
    _add_params(p)
    _add_opts(p)

    p = sub.add_parser("sweep", parents=[common], help="sweep one hyperparameter on the tuning split")
    p.add_argument("--manifest", required=True, metavar="JSON")
    p.add_argument("--param", required=True, choices=("k", "h", "ts", "ns"))
    p.add_argument("--values", required=True, help="e.g. 1..10 or 0.6,0.7,0.8")
    p.add_argument("--fixed", help="other parameters, e.g. h=10,ts=0.7,ns=0.8")
    p.add_argument("--out", required=True, metavar="CSV")
    _add_opts(p)
    return parser


def setup_cfg(args):
    cfg = get_cfg()
    if args.profile:
        apply_profile(cfg, args.profile)
    if args.config_file:
        cfg.merge_from_file(args.config_file)
    flags = []
    for name, (key, kind) in _FLAG_KEYS.items():
        value = getattr(args, name, None)
        if value is not None and not (name == "method" and value == "all"):
            flags += [key, kind(value)]
    cfg.merge_from_list(flags)
    cfg.merge_from_list(args.opts or [])
    validate_cfg(cfg)
    cfg.freeze()
    return cfg


def _load_side(image_path: str, annots_path: Optional[str], cfg, side_index: int):
    img = Raster(read_image(image_path))
    if annots_path is None:
        return img, None
    noise = DetectorNoise.from_config(cfg)
    rng = np.random.default_rng([cfg.SEED, side_index]) if noise is not None else None
    dets = load_detections(AnnotationFile(annots_path), noise, rng)
    if dets.size != img.size:
        raise SchemaError(
            "{} describes a {}x{} image but {} is {}x{}".format(annots_path, *dets.size, image_path, *img.size)
        )
    return img, dets


def do_diff(args, cfg) -> int:
    detector = build_change_detector(cfg)
    if detector.needs_detections and (args.annots_a is None or args.annots_b is None):
        raise ConfigError(f"method {cfg.MODEL.METHOD} needs --annots-a and --annots-b")
    img_a, dets_a = _load_side(args.image_a, args.annots_a, cfg, 0)
    img_b, dets_b = _load_side(args.image_b, args.annots_b, cfg, 1)
    report = detector(img_a, dets_a, img_b, dets_b)
    render_outputs(report, img_a, img_b, args.out)
    if args.dump_graphs and dets_a is not None and dets_b is not None:
        params = GraphParams.from_config(cfg)
        dump_json(dump_graph(build_graph(dets_a, params)), os.path.join(args.out, "graph_a.json"))
        dump_json(dump_graph(build_graph(dets_b, params)), os.path.join(args.out, "graph_b.json"))
    if report.dimension_mismatch:
        logger.warning("Images differ in size; {} reported no regions".format(cfg.MODEL.METHOD))
    print(
        "{}: {} changes in original, {} in changed -> {}".format(
            cfg.MODEL.METHOD, len(report.changes_in_original), len(report.changes_in_changed), args.out
        )
    )
    return 0


def do_generate(args, cfg) -> int:
    if args.bases:
        bases = load_bases(args.bases)
        if not bases:
            raise ConfigError(f"no base screenshots (*.png with a matching *.json) in {args.bases}")
    else:
        n = DEFAULT_SYNTHETIC_BASES if args.synthetic is None else args.synthetic
        if n < 1:
            raise ConfigError(f"--synthetic must be >= 1, got {n}")
        bases = synthetic_bases(n, cfg.SEED, cfg)
    variants = args.variants or cfg.DATAGEN.VARIANTS
    manifest = generate_dataset(bases, variants, args.cut, cfg.SEED, args.out, cfg, jobs=cfg.JOBS)
    print("generated {} pairs -> {}".format(len(manifest), os.path.join(args.out, "manifest.json")))
    return 0


def do_eval(args, cfg) -> int:
    manifest = load_manifest(args.manifest)
    result = evaluate_dataset(manifest, args.method or cfg.MODEL.METHOD, cfg, split=args.split)
    result.save(args.out, args.csv)
    print(result.table())
    return 0


def do_sweep(args, cfg) -> int:
    manifest = load_manifest(args.manifest)
    values = parse_values(args.values, args.param)
    table = sweep(manifest, args.param, values, cfg, fixed=parse_fixed(args.fixed))
    table.save(args.out)
    print(table.table())
    print("best {} = {}".format(args.param, table.best[0]))
    return 0


_COMMANDS = {"diff": do_diff, "generate": do_generate, "eval": do_eval, "sweep": do_sweep}


def run(argv: Optional[List[str]] = None) -> int:
    """
    Run one command and return the process exit status: 0 on success, 2 on
    invalid arguments, configuration or input data.
    """
    parser = get_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.command is None:
        parser.print_help()
        return 2

    setup_logger(args.log_file, name="uidiff", level=logging.DEBUG if args.verbose else logging.INFO)
    try:
        try:
            cfg = setup_cfg(args)
        except (KeyError, ValueError, AssertionError) as e:
            # unknown keys or mistyped values in config files and opts
            raise ConfigError("invalid configuration: {}".format(e)) from e
        logger.debug("Running {} with config:\n{}".format(args.command, cfg.dump()))
        return _COMMANDS[args.command](args, cfg)
    except UiDiffError as e:
        logger.error(str(e))
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
