"""Command-line interface.

Subcommands::

    roadstereo match     --ref L.pgm --tar R.pgm --output disp.pfm
    roadstereo transform --input disp.pfm --output flat.pfm [--mask m.png]
    roadstereo evaluate  --est disp.pfm --gt gt.png [--json]
    roadstereo synth     --output-dir scene/
    roadstereo pipeline  --ref L.pgm --tar R.pgm --output-dir out/ [--gt gt.pfm]

Every command accepts ``--config FILE`` (flat ``key = value`` lines) and
repeatable ``--set key=value`` overrides; flags win over file values. Exit
status is 0 only when every requested artifact was written; diagnostics go
to stderr, reports to stdout. Numeric report output uses 6 significant
digits.
"""

import argparse
import json
import os
import sys
import time

from . import __version__
from .config import build_config, load_config_file
from .errors import RoadStereoError
from .fileio import (
    load_disparity,
    load_gray_image,
    save_disparity,
    save_gray_image,
    save_disparity_pfm,
)
from .metrics import evaluate, mde_per_second
from .pipeline import flatten_disparity, match_stereo_pair
from .synthetic import ground_truth_disparity, render_stereo_pair

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2


def _fmt(x):
    return format(float(x), ".6g")


def _fail(stage, exc, code=EXIT_ERROR):
    print(f"error in stage {stage}: {exc}", file=sys.stderr)
    return code


def _load_config(args):
    file_values = load_config_file(args.config) if args.config else {}
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise ValueError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    return build_config(file_values, overrides)


def _load_mask(cfg, args):
    path = getattr(args, "mask", None) or cfg.mask_path
    if not path:
        return None
    return load_gray_image(path) > 0


def _ext_for(fmt):
    return {"png16": ".png", "pfm": ".pfm", "csv": ".csv"}[fmt]


def _print_timings(timings):
    for stage, seconds in timings.items():
        print(f"stage_ms.{stage} = {_fmt(seconds * 1000.0)}")


def cmd_match(args):
    try:
        cfg = _load_config(args)
    except (OSError, ValueError) as exc:
        return _fail("config", exc, EXIT_USAGE)
    try:
        ref = load_gray_image(args.ref)
        tar = load_gray_image(args.tar)
    except (OSError, RoadStereoError) as exc:
        return _fail("load", exc, EXIT_USAGE)
    if ref.shape != tar.shape:
        return _fail(
            "load",
            f"image sizes differ: {args.ref} is {ref.shape[1]}x{ref.shape[0]}, "
            f"{args.tar} is {tar.shape[1]}x{tar.shape[0]}",
            EXIT_USAGE,
        )
    try:
        outcome = match_stereo_pair(
            ref,
            tar,
            params=cfg.matcher,
            window=cfg.window,
            max_shift=cfg.max_shift,
            response_threshold=cfg.response_threshold,
            workers=cfg.workers,
        )
    except (RoadStereoError, ValueError) as exc:
        return _fail("matching", exc)
    try:
        save_disparity(outcome.disparity, args.output, cfg.output_format)
    except (OSError, RoadStereoError, ValueError) as exc:
        return _fail("write", exc)
    if cfg.timing or args.timing:
        _print_timings(outcome.timings)
        h, w = ref.shape
        print(
            "mde_per_s = "
            + _fmt(mde_per_second(w, h, cfg.matcher.d_max, outcome.timings["matching"]))
        )
    return EXIT_OK


def cmd_transform(args):
    try:
        cfg = _load_config(args)
    except (OSError, ValueError) as exc:
        return _fail("config", exc, EXIT_USAGE)
    try:
        disp = load_disparity(args.input)
        mask = _load_mask(cfg, args)
    except (OSError, RoadStereoError) as exc:
        return _fail("load", exc, EXIT_USAGE)
    try:
        outcome = flatten_disparity(
            disp,
            mask=mask,
            opts=cfg.roll,
            delta_t=cfg.delta_t,
            trim_3sigma=cfg.trim_3sigma,
        )
    except (RoadStereoError, ValueError) as exc:
        return _fail("transform", exc)
    try:
        save_disparity(outcome.transformed, args.output, cfg.output_format)
    except (OSError, RoadStereoError, ValueError) as exc:
        return _fail("write", exc)
    fit = outcome.fit
    report = {
        "psi": fit.psi,
        "alpha0": fit.alpha0,
        "alpha1": fit.alpha1,
        "e_min": fit.e_min,
        "sigma_d": outcome.sigma_d,
    }
    if args.json:
        print(json.dumps({k: float(v) for k, v in report.items()}))
    else:
        for key, value in report.items():
            print(f"{key} = {_fmt(value)}")
    return EXIT_OK


def cmd_evaluate(args):
    try:
        cfg = _load_config(args)
    except (OSError, ValueError) as exc:
        return _fail("config", exc, EXIT_USAGE)
    try:
        est = load_disparity(args.est)
        gt = load_disparity(args.gt)
        mask = _load_mask(cfg, args)
    except (OSError, RoadStereoError) as exc:
        return _fail("load", exc, EXIT_USAGE)
    try:
        report = evaluate(est, gt, mask=mask, epsilon_d=args.epsilon_d)
    except (RoadStereoError, ValueError) as exc:
        return _fail("evaluate", exc)
    print(report.to_json() if args.json else report.to_kv_text())
    return EXIT_OK


def cmd_synth(args):
    try:
        cfg = _load_config(args)
    except (OSError, ValueError) as exc:
        return _fail("config", exc, EXIT_USAGE)
    try:
        ref, tar = render_stereo_pair(cfg.scene)
        gt = ground_truth_disparity(cfg.scene)
    except RoadStereoError as exc:
        return _fail("synth", exc)
    try:
        os.makedirs(args.output_dir, exist_ok=True)
        save_gray_image(ref, os.path.join(args.output_dir, "ref.pgm"))
        save_gray_image(tar, os.path.join(args.output_dir, "tar.pgm"))
        save_disparity_pfm(gt, os.path.join(args.output_dir, "gt.pfm"))
    except OSError as exc:
        return _fail("write", exc)
    return EXIT_OK


def cmd_pipeline(args):
    try:
        cfg = _load_config(args)
    except (OSError, ValueError) as exc:
        return _fail("config", exc, EXIT_USAGE)
    try:
        ref = load_gray_image(args.ref)
        tar = load_gray_image(args.tar)
        gt = load_disparity(args.gt) if args.gt else None
        mask = _load_mask(cfg, args)
    except (OSError, RoadStereoError) as exc:
        return _fail("load", exc, EXIT_USAGE)
    if ref.shape != tar.shape:
        return _fail(
            "load",
            f"image sizes differ: {args.ref} is {ref.shape[1]}x{ref.shape[0]}, "
            f"{args.tar} is {tar.shape[1]}x{tar.shape[0]}",
            EXIT_USAGE,
        )
    os.makedirs(args.output_dir, exist_ok=True)
    ext = _ext_for(cfg.output_format)
    try:
        matched = match_stereo_pair(
            ref,
            tar,
            params=cfg.matcher,
            window=cfg.window,
            max_shift=cfg.max_shift,
            response_threshold=cfg.response_threshold,
            workers=cfg.workers,
        )
        save_disparity(
            matched.disparity, os.path.join(args.output_dir, "disparity" + ext),
            cfg.output_format,
        )
    except (OSError, RoadStereoError, ValueError) as exc:
        return _fail("matching", exc)
    try:
        t0 = time.perf_counter()
        flat = flatten_disparity(
            matched.disparity,
            mask=mask,
            opts=cfg.roll,
            delta_t=cfg.delta_t,
            trim_3sigma=cfg.trim_3sigma,
        )
        matched.timings["transform"] = time.perf_counter() - t0
        save_disparity(
            flat.transformed, os.path.join(args.output_dir, "transformed" + ext),
            cfg.output_format,
        )
    except (OSError, RoadStereoError, ValueError) as exc:
        return _fail("transform", exc)
    fit = flat.fit
    for key, value in (
        ("psi", fit.psi),
        ("alpha0", fit.alpha0),
        ("alpha1", fit.alpha1),
        ("e_min", fit.e_min),
        ("sigma_d", flat.sigma_d),
    ):
        print(f"{key} = {_fmt(value)}")
    if gt is not None:
        try:
            report = evaluate(matched.disparity, gt, mask=mask, epsilon_d=args.epsilon_d)
        except (RoadStereoError, ValueError) as exc:
            return _fail("evaluate", exc)
        print(report.to_kv_text())
    if cfg.timing or args.timing:
        _print_timings(matched.timings)
        h, w = ref.shape
        print(
            "mde_per_s = "
            + _fmt(mde_per_second(w, h, cfg.matcher.d_max, matched.timings["matching"]))
        )
    return EXIT_OK


def _add_common(p):
    p.add_argument("--help", action="help", help="show this help message and exit")
    p.add_argument("--config", help="flat key=value configuration file")
    p.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override one configuration value (repeatable)",
    )


def build_parser():
    # long-form flags only, so help is registered explicitly without -h
    parser = argparse.ArgumentParser(
        prog="roadstereo",
        description="Dense stereo matching and road flattening for road inspection",
        add_help=False,
    )
    parser.add_argument("--help", action="help", help="show this help message and exit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_parser(name, **kw):
        return sub.add_parser(name, add_help=False, **kw)

    p = add_parser("match", help="dense disparity map from a stereo pair")
    p.add_argument("--ref", required=True, help="reference (left) image")
    p.add_argument("--tar", required=True, help="target (right) image")
    p.add_argument("--output", required=True, help="disparity artifact path")
    p.add_argument("--timing", action="store_true", help="print per-stage timings")
    _add_common(p)
    p.set_defaults(func=cmd_match)

    p = add_parser("transform", help="flatten a disparity map via the road model")
    p.add_argument("--input", required=True, help="disparity map (.pfm or .png)")
    p.add_argument("--output", required=True, help="transformed disparity path")
    p.add_argument("--mask", help="road mask image (non-zero = road)")
    p.add_argument("--json", action="store_true", help="report as JSON")
    _add_common(p)
    p.set_defaults(func=cmd_transform)

    p = add_parser("evaluate", help="accuracy metrics against ground truth")
    p.add_argument("--est", required=True, help="estimated disparity map")
    p.add_argument("--gt", required=True, help="ground-truth disparity map")
    p.add_argument("--mask", help="road mask image (non-zero = road)")
    p.add_argument("--epsilon-d", type=float, default=2.0, help="error tolerance (px)")
    p.add_argument("--json", action="store_true", help="report as JSON")
    _add_common(p)
    p.set_defaults(func=cmd_evaluate)

    p = add_parser("synth", help="render a synthetic scene with ground truth")
    p.add_argument("--output-dir", required=True, help="directory for ref/tar/gt")
    _add_common(p)
    p.set_defaults(func=cmd_synth)

    p = add_parser("pipeline", help="match + transform (+ evaluate) in one run")
    p.add_argument("--ref", required=True)
    p.add_argument("--tar", required=True)
    p.add_argument("--gt", help="optional ground truth for evaluation")
    p.add_argument("--mask", help="road mask image (non-zero = road)")
    p.add_argument("--output-dir", required=True)
    p.add_argument("--epsilon-d", type=float, default=2.0)
    p.add_argument("--timing", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
