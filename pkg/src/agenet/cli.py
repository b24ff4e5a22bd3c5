"""``agenet`` command line.

Exit codes: 0 success, 1 validation/config error, 2 I/O error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import os
import sys

import numpy as np

from . import __version__
from .config import RunConfig
from .data.bins import get_scheme
from .data.imageio import read_ppm, write_pgm
from .data.manifest import (
    Manifest,
    filter_mislabelled,
    adjacent_mass,
    load_images,
    read_manifest,
    split,
    stats_by_source,
    write_manifest,
)
from .data.pipeline import preprocess
from .data.transforms import resize_bilinear
from .errors import AgeNetIOError, ConfigError, NumericalError, ValidationError
from .fileio import write_text
from .metrics import MidpointTable, cross_bin_eval, evaluate, expected_age
from .model import build, feature_maps
from .sweep import SweepSpace, parse_space, sweep, write_results
from .tensor import make_rng
from .train import train, write_epoch_log
from .weights import load_weights, save_weights

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _csv(rows, meta=None) -> str:
    buf = io.StringIO()
    for k, v in (meta or {}).items():
        buf.write(f"# {k}={v}\n")
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _meta(cfg):
    return {"seed": cfg["seed"]}


def _load_image(path, net):
    try:
        img = read_ppm(path)
    except AgeNetIOError:
        raise
    except OSError as exc:
        raise AgeNetIOError(f"cannot read image {path}: {exc.strerror}") from None
    c, h, w = net.config.input_shape
    if img.shape[0] != c:
        raise ValidationError(f"image has {img.shape[0]} channels, network expects {c}")
    x = img.astype(np.float64)
    if img.shape[1:] != (h, w):
        x = resize_bilinear(x, (h, w))
    return (x / 255.0)[None]


def _dataset(manifest: Manifest, net_cfg, scheme, dtype):
    x = load_images(manifest, net_cfg.input_shape, dtype)
    return x, manifest.labels(scheme)


def _weights(path):
    try:
        return load_weights(path)
    except AgeNetIOError:
        raise
    except OSError as exc:
        raise AgeNetIOError(f"cannot read weights {path}: {exc.strerror}") from None


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_stats(args, cfg):
    scheme = get_scheme(cfg["scheme"])
    table = stats_by_source(read_manifest(args.manifest), scheme)
    print(f"{'Dataset':<12}{'Images':>8}{'Mean':>8}{'STD':>8}")
    rows = [["dataset", "images", "mean", "std"]]
    for name, s in table.items():
        print(f"{name:<12}{s['count']:>8}{s['mean']:>8.1f}{s['std']:>8.1f}")
        rows.append([name, s["count"], repr(s["mean"]), repr(s["std"])])
    hist = [["bin", "count"]] + [[n, c] for n, c in zip(scheme.names, table["Aggregated"]["histogram"])]
    write_text(os.path.join(args.out_dir, "stats.csv"), _csv(rows, _meta(cfg)))
    write_text(os.path.join(args.out_dir, "bin_histogram.csv"), _csv(hist, _meta(cfg)))
    for n, c in hist[1:]:
        print(f"  {n:>6}: {c}")
    return EXIT_OK


def cmd_preprocess(args, cfg):
    manifest = read_manifest(args.manifest)
    out = preprocess(manifest, args.outdir, cfg["margin"], cfg["image_size"], get_scheme(cfg["scheme"]),
                     jobs=args.jobs, meta=_meta(cfg))
    print(f"processed {len(out)} images into {args.outdir}")
    return EXIT_OK


def cmd_split(args, cfg):
    manifest = read_manifest(args.manifest)
    frac = cfg["train_frac"] if args.train_frac is None else args.train_frac
    tr, ho = split(manifest, frac, cfg["seed"])
    write_manifest(tr, os.path.join(args.out_dir, "train.csv"), _meta(cfg))
    write_manifest(ho, os.path.join(args.out_dir, "holdout.csv"), _meta(cfg))
    print(f"train={len(tr)} holdout={len(ho)}")
    return EXIT_OK


def cmd_train(args, cfg):
    model_cfg = cfg.model_config()
    train_cfg = cfg.train_config()
    scheme = get_scheme(cfg["scheme"])
    net = build(model_cfg, make_rng(cfg["seed"]), cfg["dtype"])
    tx, ty = _dataset(read_manifest(args.train_manifest), model_cfg, scheme, net.dtype)
    vx, vy = _dataset(read_manifest(args.val_manifest), model_cfg, scheme, net.dtype)

    def report(log):
        print(f"epoch {log.epoch:3d}  loss {log.train_loss:.4f}  acc {log.train_acc:.3f}  "
              f"val_loss {log.val_loss:.4f}  val_acc {log.val_acc:.3f}", file=sys.stderr)

    res = train(net, tx, ty, vx, vy, train_cfg, on_epoch=report)
    save_weights(net, os.path.join(args.out_dir, "weights.bin"), _meta(cfg))
    write_epoch_log(os.path.join(args.out_dir, "epoch_log.csv"), res.logs, _meta(cfg))
    best = res.logs[res.best_epoch - 1]
    print(f"best_epoch={res.best_epoch} val_loss={best.val_loss:.6f} val_acc={best.val_acc:.6f} "
          f"stop={res.stop_reason}")
    return EXIT_OK


def cmd_sweep(args, cfg):
    space = SweepSpace()
    if args.space:
        try:
            with open(args.space, encoding="utf-8") as fh:
                space = parse_space(fh.read())
        except OSError as exc:
            raise AgeNetIOError(f"cannot read sweep space {args.space}: {exc.strerror}") from None
    model_cfg = cfg.model_config()
    scheme = get_scheme(cfg["scheme"])
    dtype = np.float64 if cfg["dtype"] == "f64" else np.float32
    tx, ty = _dataset(read_manifest(args.train_manifest), model_cfg, scheme, dtype)
    vx, vy = _dataset(read_manifest(args.val_manifest), model_cfg, scheme, dtype)
    results = sweep(space, args.budget, (tx, ty, vx, vy), cfg["seed"], model_cfg, cfg.train_config(),
                    jobs=args.jobs, log_dir=os.path.join(args.out_dir, "logs"))
    write_results(os.path.join(args.out_dir, "sweep_results.csv"), results, _meta(cfg))
    for rank, r in enumerate(results[:5], start=1):
        print(f"#{rank} trial {r.trial}: val_acc={r.best_val_acc:.4f} {r.draw} [{r.status}]")
    return EXIT_OK


def cmd_filter(args, cfg):
    net = _weights(args.weights)
    scheme = get_scheme(cfg["scheme"])
    manifest = read_manifest(args.manifest)
    x, y = _dataset(manifest, net.config, scheme, net.dtype)
    probs = net.predict(x)
    threshold = cfg["filter_threshold"] if args.threshold is None else args.threshold
    keep = filter_mislabelled(probs, y, scheme, threshold)
    mass = adjacent_mass(probs, y)
    kept = manifest.subset(np.flatnonzero(keep))
    removed = manifest.subset(np.flatnonzero(~keep))
    write_manifest(kept, os.path.join(args.out_dir, "kept.csv"), _meta(cfg))
    write_manifest(removed, os.path.join(args.out_dir, "removed.csv"), _meta(cfg))
    for r, m in zip(manifest.records, mass):
        if m < threshold:
            print(f"removed {r.path} (adjacent mass {m:.3f})", file=sys.stderr)
    print(f"kept={len(kept)} removed={len(removed)}")
    return EXIT_OK


def cmd_evaluate(args, cfg):
    net = _weights(args.weights)
    scheme = get_scheme(cfg["scheme"])
    manifest = read_manifest(args.manifest)
    x, y = _dataset(manifest, net.config, scheme, net.dtype)
    probs = net.predict(x).astype(np.float64)
    acc, cm = evaluate(probs, y)
    rows = [["metric", "value"], ["n", len(y)], ["accuracy", repr(acc)]]
    print(f"accuracy={acc:.6f} n={len(y)}")
    target_name = args.scheme or cfg["scheme"]
    target = get_scheme(target_name)
    if target is not scheme:
        ages = expected_age(probs, MidpointTable.from_scheme(scheme, cfg["open_bin_age"]))
        idx, labels = [], []
        for i, r in enumerate(manifest.records):
            if any(b.contains(r.age) for b in target):
                idx.append(i)
                labels.append(target.assign(r.age))
        skipped = len(manifest) - len(idx)
        if not idx:
            raise ValidationError(f"no manifest ages fall inside any {target.name} bin")
        res = cross_bin_eval(ages[idx], labels, target)
        rows += [["scheme", target.name], ["scored", res["n"]], ["skipped", skipped],
                 ["exact", repr(res["exact"])], ["one_off", repr(res["one_off"])]]
        print(f"scheme={target.name} exact={res['exact']:.3f} one_off={res['one_off']:.3f} "
              f"scored={res['n']} skipped={skipped}")
    write_text(os.path.join(args.out_dir, "metrics.csv"), _csv(rows, _meta(cfg)))
    write_text(os.path.join(args.out_dir, "confusion.csv"), _csv([scheme.names] + cm.tolist(), _meta(cfg)))
    return EXIT_OK


def cmd_predict(args, cfg):
    net = _weights(args.weights)
    scheme = get_scheme(cfg["scheme"])
    probs = net.predict(_load_image(args.image, net)).astype(np.float64)[0]
    age = expected_age(probs[None], MidpointTable.from_scheme(scheme, cfg["open_bin_age"]))[0]
    print("bin,probability")
    for name, p in zip(scheme.names, probs):
        print(f"{name},{p:.9f}")
    print(f"expected_age={age:.2f}")
    return EXIT_OK


def cmd_feature_maps(args, cfg):
    net = _weights(args.weights)
    maps = feature_maps(net, _load_image(args.image, net), args.layer)
    for j, m in enumerate(maps):
        write_pgm(os.path.join(args.out_dir, f"layer{args.layer}_ch{j}.pgm"), m)
    print(f"wrote {len(maps)} maps of {maps[0].shape[0]}x{maps[0].shape[1]} to {args.out_dir}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def _default_jobs():
    try:
        return max(1, int(os.environ.get("AGENET_JOBS", "1")))
    except ValueError:
        return 1


def make_parser():
    p = _Parser(prog="agenet", description="Age-bin CNN toolkit.")
    p.add_argument("--version", action="version", version=f"agenet {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key=value run configuration file")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config value (repeatable)")
    common.add_argument("--seed", type=int, help="master seed (default 42)")
    common.add_argument("--jobs", type=int, default=None, help="worker processes (env AGENET_JOBS)")
    common.add_argument("--out-dir", default=".", help="directory for output files")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("stats", parents=[common], help="dataset statistics")
    s.add_argument("manifest")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("preprocess", parents=[common], help="crop, resize and bin images")
    s.add_argument("manifest")
    s.add_argument("outdir")
    s.set_defaults(func=cmd_preprocess)

    s = sub.add_parser("split", parents=[common], help="seeded train/holdout split")
    s.add_argument("manifest")
    s.add_argument("--train-frac", type=float)
    s.set_defaults(func=cmd_split)

    s = sub.add_parser("train", parents=[common], help="train a network")
    s.add_argument("train_manifest")
    s.add_argument("val_manifest")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("sweep", parents=[common], help="random hyperparameter search")
    s.add_argument("train_manifest")
    s.add_argument("val_manifest")
    s.add_argument("--budget", type=int, default=10)
    s.add_argument("--space", help="sweep space file")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("filter", parents=[common], help="drop likely mislabelled samples")
    s.add_argument("weights")
    s.add_argument("manifest")
    s.add_argument("--threshold", type=float)
    s.set_defaults(func=cmd_filter)

    s = sub.add_parser("evaluate", parents=[common], help="accuracy, confusion matrix, cross-scheme metrics")
    s.add_argument("weights")
    s.add_argument("manifest")
    s.add_argument("--scheme", choices=["agenet", "adience"])
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("predict", parents=[common], help="bin probabilities and expected age for one image")
    s.add_argument("weights")
    s.add_argument("image")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("feature-maps", parents=[common], help="dump conv feature maps as PGM")
    s.add_argument("weights")
    s.add_argument("image")
    s.add_argument("layer", type=int)
    s.set_defaults(func=cmd_feature_maps)
    return p


def main(argv=None) -> int:
    try:
        args = make_parser().parse_args(argv)
        overrides = list(args.set)
        if args.seed is not None:
            overrides.append(f"seed={args.seed}")
        cfg = RunConfig.load(args.config, overrides)
        if args.jobs is None:
            args.jobs = _default_jobs()
        return args.func(args, cfg)
    except ValidationError as exc:
        print(f"agenet: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"agenet: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"agenet: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
