"""Random hyperparameter search.

Each trial draws every axis independently (learning rate log-uniform,
everything else uniform over its candidates), builds a fresh network and
trains it with its own derived seed.
"""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, ValidationError
from .fileio import write_text
from .model import ModelConfig, build
from .tensor import make_rng, spawn_seeds
from .train import TrainConfig, train, write_epoch_log


@dataclass(frozen=True)
class SweepSpace:
    learning_rate: tuple = (3e-5, 1e-2)
    conv_layers: tuple = (3, 4, 5)
    conv_filters: tuple = (16, 32, 64)  # filters of the first layer, doubled per layer
    conv_kernel_size: tuple = (3, 5)
    dense_units: tuple = ((256, 128), (128,), (512, 256))  # hidden widths
    dropout_rate: tuple = (0.0, 0.187, 0.3)

    def __post_init__(self):
        for name in ("conv_layers", "conv_filters", "conv_kernel_size", "dense_units", "dropout_rate"):
            if not getattr(self, name):
                raise ValidationError(f"sweep axis {name} is empty")
        lo, hi = self.learning_rate
        if not 0 < lo <= hi:
            raise ValidationError(f"learning_rate range must satisfy 0 < lo <= hi, got {self.learning_rate}")


def sample(space: SweepSpace, rng: np.random.Generator) -> dict:
    lo, hi = space.learning_rate
    lr = lo if lo == hi else float(math.exp(rng.uniform(math.log(lo), math.log(hi))))

    def pick(axis):
        return axis[int(rng.integers(len(axis)))]

    return {
        "learning_rate": lr,
        "conv_layers": int(pick(space.conv_layers)),
        "conv_filters": int(pick(space.conv_filters)),
        "conv_kernel_size": int(pick(space.conv_kernel_size)),
        "dense_units": tuple(pick(space.dense_units)),
        "dropout_rate": float(pick(space.dropout_rate)),
    }


def trial_configs(draw: dict, base_model: ModelConfig, base_train: TrainConfig, seed: int):
    """Turn one draw into a (ModelConfig, TrainConfig) pair.

    Pools follow every conv block but the last; dropout follows all of
    them; only the first conv keeps the base config's stride.
    """
    n = draw["conv_layers"]
    first_stride = base_model.conv_strides[0] if base_model.conv_strides else 1
    model = replace(
        base_model,
        conv_layers=n,
        conv_filters=tuple(draw["conv_filters"] * 2**i for i in range(n)),
        conv_kernel_size=draw["conv_kernel_size"],
        conv_strides=(first_stride,) + (1,) * (n - 1) if n else (),
        pool_layers=tuple(range(1, n)),
        dropout_layers=tuple(range(1, n + 1)),
        dropout_rate=draw["dropout_rate"],
        dense_units=tuple(draw["dense_units"]) + (base_model.num_classes,),
    )
    return model, replace(base_train, learning_rate=draw["learning_rate"], seed=seed)


@dataclass
class TrialResult:
    trial: int
    seed: int
    draw: dict
    best_val_acc: float
    best_val_loss: float
    epochs: int
    stop_reason: str
    status: str
    logs: list


def _run_trial(args):
    trial, seed, draw, base_model, base_train, data = args
    train_x, train_y, val_x, val_y = data
    try:
        model_cfg, train_cfg = trial_configs(draw, base_model, base_train, seed)
        net = build(model_cfg, make_rng(seed))
    except ConfigError as exc:
        return TrialResult(trial, seed, draw, math.nan, math.nan, 0, "", f"invalid: {exc}", [])
    res = train(net, train_x, train_y, val_x, val_y, train_cfg)
    best = res.logs[res.best_epoch - 1]
    return TrialResult(trial, seed, draw, best.val_acc, best.val_loss, len(res.logs), res.stop_reason, "ok", res.logs)


def sweep(space: SweepSpace, budget: int, data, seed: int = 42, base_model: ModelConfig | None = None,
          base_train: TrainConfig | None = None, jobs: int = 1, log_dir=None) -> list:
    """Run ``budget`` trials; return them sorted by best validation accuracy.

    ``data`` is ``(train_x, train_y, val_x, val_y)``. Ties and invalid
    trials keep trial order; results never depend on ``jobs``.
    """
    if budget < 1:
        raise ValidationError("sweep budget must be >= 1")
    base_model = base_model or ModelConfig()
    base_train = base_train or TrainConfig()
    rng = make_rng(seed)
    draws = [sample(space, rng) for _ in range(budget)]
    seeds = spawn_seeds(seed, budget)
    tasks = [(i, seeds[i], draws[i], base_model, base_train, data) for i in range(budget)]
    if jobs > 1 and budget > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_trial, tasks))
    else:
        results = [_run_trial(t) for t in tasks]
    if log_dir is not None:
        for r in results:
            if r.logs:
                write_epoch_log(os.path.join(log_dir, f"trial_{r.trial:03d}_log.csv"), r.logs, {"seed": r.seed})
    return sorted(results, key=lambda r: (math.isnan(r.best_val_acc), -np.nan_to_num(r.best_val_acc), r.trial))


RESULT_COLUMNS = [
    "rank", "trial", "seed", "learning_rate", "conv_layers", "conv_filters", "conv_kernel_size",
    "dense_units", "dropout_rate", "best_val_acc", "best_val_loss", "epochs", "stop_reason", "status",
]


def format_results(results, meta=None) -> str:
    buf = io.StringIO()
    for k, v in (meta or {}).items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for rank, r in enumerate(results, start=1):
        d = r.draw
        w.writerow([
            rank, r.trial, r.seed, repr(d["learning_rate"]), d["conv_layers"], d["conv_filters"],
            d["conv_kernel_size"], ";".join(str(u) for u in d["dense_units"]), d["dropout_rate"],
            repr(r.best_val_acc), repr(r.best_val_loss), r.epochs, r.stop_reason, r.status,
        ])
    return buf.getvalue()


def write_results(path, results, meta=None) -> None:
    write_text(path, format_results(results, meta))


def parse_space(text: str) -> SweepSpace:
    """Read a sweep space from ``key=value`` lines.

    ``learning_rate=lo:hi`` gives the log-uniform range; other axes list
    candidates separated by ``|``; ``dense_units`` candidates are
    comma-separated hidden widths (``256,128|128``).
    """
    kw = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep:
            raise ConfigError(f"expected key=value, got {line!r}")
        try:
            if key == "learning_rate":
                lo, _, hi = raw.partition(":")
                kw[key] = (float(lo), float(hi or lo))
            elif key == "dense_units":
                kw[key] = tuple(tuple(int(u) for u in c.split(",") if u.strip()) for c in raw.split("|"))
            elif key == "dropout_rate":
                kw[key] = tuple(float(c) for c in raw.split("|") if c.strip())
            elif key in ("conv_layers", "conv_filters", "conv_kernel_size"):
                kw[key] = tuple(int(c) for c in raw.split("|") if c.strip())
            else:
                raise ConfigError(f"unknown sweep axis {key!r}")
        except ValueError:
            raise ConfigError(f"bad value for sweep axis {key}: {raw!r}") from None
    return SweepSpace(**kw)
