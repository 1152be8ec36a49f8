"""Command-line interface: ``cvorient <subcommand> ...``.

Global options (``--seed``, ``--config``, ``--jobs``) may appear before or
after the subcommand.  Exit status is 0 on success, 1 on runtime failure and
2 on usage errors.
"""

import argparse
import json
import sys

import numpy as np

from . import __version__
from .config import load_config
from .correlation import METHODS, estimate
from .dataset import load_scene_dir, save_scenes
from .evaluation import emit_report, records_from_dicts
from .features import extract_features, read_fmap, write_fmap
from .imaging import load_png, polar_transform, random_shift, save_png, shift_and_crop
from .losses import LossConfig, gradcheck, make_toy_pairs, toy_fit
from .retrieval import narrow_query, retrieve
from .synth import generate_scenes

GRADCHECK_TOL = 1e-4


def _global_options(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--seed", type=int, default=default,
                        help="random seed (default: $CVO_SEED or 0)")
    parser.add_argument("--config", default=default, help="TOML file with a [retrieval] table")
    parser.add_argument("--jobs", type=int, default=default, help="worker threads for retrieval")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cvorient",
        description="Fine-grained orientation estimation for cross-view image matching.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_options(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("synth", parents=[common], help="generate synthetic scenes")
    p.add_argument("outdir")
    p.add_argument("--n", type=int, default=None, help="number of scenes (default: pool_size or 8)")
    p.add_argument("--side", type=int, default=512, help="overhead image side in pixels")
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--width", type=int, default=512)
    p.add_argument("--fov", type=float, default=360.0)

    p = sub.add_parser("polar", parents=[common], help="polar-transform an overhead image")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--width", type=int, default=512)

    p = sub.add_parser("augment", parents=[common], help="shift and crop a street panorama")
    p.add_argument("input")
    p.add_argument("output", nargs="?")
    p.add_argument("--shift", type=int, default=None, help="pixel shift (random if omitted)")
    p.add_argument("--fov", type=float, default=360.0)
    p.add_argument("--feature-width", type=int, default=64)

    p = sub.add_parser("extract", parents=[common], help="image to FMAP1 feature file")
    p.add_argument("input")
    p.add_argument("output")

    p = sub.add_parser("estimate", parents=[common], help="orientation between two FMAP1 files")
    p.add_argument("street", help="street-view features (FMAP1)")
    p.add_argument("satellite", help="satellite features (FMAP1)")
    p.add_argument("--method", choices=METHODS, default="fi")
    p.add_argument("--scale", type=int, default=10)

    p = sub.add_parser("retrieve", parents=[common], help="rank a scene directory")
    p.add_argument("scene_dir")
    p.add_argument("--out", required=True, help="records JSON path")
    p.add_argument("--method", choices=METHODS, default=None)
    p.add_argument("--scale", type=int, default=None)
    p.add_argument("--orientation", choices=("known", "unknown"), default=None)
    p.add_argument("--pool-size", type=int, default=None)
    p.add_argument("--pano-width", type=int, default=None,
                   help="candidate panorama width (default: inferred from the streets and their fov)")

    p = sub.add_parser("evaluate", parents=[common], help="records JSON to report + histogram")
    p.add_argument("records")
    p.add_argument("--report", required=True)
    p.add_argument("--histogram", required=True)

    p = sub.add_parser("gradcheck", parents=[common], help="verify loss gradients")
    p.add_argument("--trials", type=int, default=100)

    p = sub.add_parser("fit-toy", parents=[common], help="toy optimizer demo")
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--batch", type=int, default=8)
    p.add_argument("--init", choices=("identity", "random"), default="random")
    return parser


def _config(args):
    cfg = load_config(getattr(args, "config", None))
    return cfg.updated(
        seed=args.seed,
        jobs=args.jobs,
        method=getattr(args, "method", None),
        scale=getattr(args, "scale", None),
        orientation=getattr(args, "orientation", None),
        pool_size=getattr(args, "pool_size", None),
    )


def _print_json(doc):
    print(json.dumps(doc, indent=2, sort_keys=True))


def cmd_synth(args, cfg):
    n = args.n or cfg.pool_size or 8
    scenes = generate_scenes(cfg.seed, n, args.side, args.height, args.width, args.fov)
    save_scenes(scenes, args.outdir)
    print(f"wrote {n} scenes to {args.outdir}")


def cmd_polar(args, cfg):
    save_png(args.output, polar_transform(load_png(args.input), args.height, args.width))


def cmd_augment(args, cfg):
    img = load_png(args.input)
    if args.shift is None:
        res = random_shift(img, cfg.seed, args.fov, args.feature_width)
    else:
        res = shift_and_crop(img, args.shift, args.fov, args.feature_width)
    if args.output:
        save_png(args.output, res.image)
    print(f"x_shift={res.x_shift}")
    print(f"w_gt={res.w_gt:g}")
    print(f"theta_gt={res.theta_gt:g}")


def cmd_extract(args, cfg):
    write_fmap(extract_features(load_png(args.input)), args.output)


def cmd_estimate(args, cfg):
    fg = read_fmap(args.street).astype(np.float64)
    fs = read_fmap(args.satellite).astype(np.float64)
    _print_json(estimate(fg, fs, args.method, args.scale).to_dict())


def cmd_retrieve(args, cfg):
    queries, candidates = load_scene_dir(args.scene_dir)
    if cfg.pool_size is not None:
        queries, candidates = queries[: cfg.pool_size], candidates[: cfg.pool_size]
    queries = [narrow_query(q, min(cfg.fov, q.fov)) for q in queries]
    records = retrieve(queries, candidates, cfg, pano_width=args.pano_width)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump([r.to_dict() for r in records], fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {len(records)} records to {args.out}")


def cmd_evaluate(args, cfg):
    with open(args.records, encoding="utf-8") as fh:
        records = records_from_dicts(json.load(fh))
    report = emit_report(records, args.report, args.histogram, cfg.to_dict(), cfg.seed)
    _print_json(report["metrics"])


def cmd_gradcheck(args, cfg):
    result = gradcheck(args.trials, seed=cfg.seed)
    result["tolerance"] = GRADCHECK_TOL
    result["passed"] = max(result["cosine_distance"], result["triplet_loss"]) <= GRADCHECK_TOL
    _print_json(result)
    return 0 if result["passed"] else 1


def cmd_fit_toy(args, cfg):
    street, sat, w_gt = make_toy_pairs(cfg.seed, args.batch)
    res = toy_fit(street, sat, w_gt, args.steps, args.lr, LossConfig(), args.init, cfg.seed)
    _print_json({
        "steps": args.steps,
        "lr": args.lr,
        "initial_combined": float(res.combined_trace[0]),
        "final_combined": float(res.combined_trace[-1]),
        "initial_triplet": float(res.triplet_trace[0]),
        "final_triplet": float(res.triplet_trace[-1]),
        "final_angle": float(res.angle_trace[-1]),
    })


COMMANDS = {
    "synth": cmd_synth,
    "polar": cmd_polar,
    "augment": cmd_augment,
    "extract": cmd_extract,
    "estimate": cmd_estimate,
    "retrieve": cmd_retrieve,
    "evaluate": cmd_evaluate,
    "gradcheck": cmd_gradcheck,
    "fit-toy": cmd_fit_toy,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config(args)
        status = COMMANDS[args.command](args, cfg)
    except Exception as exc:  # reported as a diagnostic, not a traceback
        print(f"cvorient {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return status or 0


if __name__ == "__main__":
    sys.exit(main())
