"""Mini-batch training with early stopping."""
from __future__ import annotations

import csv
import io
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .data.transforms import AugmentConfig, augment_batch
from .errors import ConfigError, NumericalError, ValidationError
from .fileio import write_text
from .losses import cross_entropy, one_hot
from .model import Network
from .optim import make_optimizer
from .tensor import make_rng, spawn_seeds

OPTIMIZERS = ("adam", "sgd", "rmsprop")
MONITORS = ("val_loss", "val_acc")


@dataclass
class TrainConfig:
    batch_size: int = 32
    learning_rate: float = 0.0003
    optimizer: str = "adam"
    max_epochs: int = 50
    patience: int | None = 4  # None disables early stopping
    seed: int = 42
    monitor: str = "val_loss"
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    adam_eps_inside_sqrt: bool = False
    rmsprop_rho: float = 0.9
    augment: AugmentConfig | None = None

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}")
        if self.max_epochs < 1:
            raise ConfigError("max_epochs must be >= 1")
        if self.patience is not None and self.patience < 1:
            raise ConfigError("patience must be >= 1 (or None to disable)")
        if self.monitor not in MONITORS:
            raise ConfigError(f"monitor must be one of {MONITORS}")

    def make_optimizer(self):
        return make_optimizer(
            self.optimizer,
            self.learning_rate,
            beta1=self.beta1,
            beta2=self.beta2,
            eps=self.epsilon,
            eps_inside_sqrt=self.adam_eps_inside_sqrt,
            rho=self.rmsprop_rho,
        )


@dataclass
class EpochLog:
    epoch: int
    train_loss: float
    train_acc: float
    val_loss: float
    val_acc: float
    wall_seconds: float


@dataclass
class TrainResult:
    best_params: list
    logs: list = field(default_factory=list)
    stop_reason: str = "max_epochs"
    best_epoch: int = 0


def early_stop(history, patience: int | None = 4, mode: str = "min") -> bool:
    """True once ``patience`` epochs have passed without a strict improvement."""
    if patience is None or len(history) <= patience:
        return False
    h = np.asarray(history, dtype=np.float64)
    best = int(np.argmin(h) if mode == "min" else np.argmax(h))
    return len(h) - 1 - best >= patience


def _is_better(value, best, mode):
    if best is None:
        return True
    return value < best if mode == "min" else value > best


def eval_loss_acc(net: Network, x, y, batch_size=64):
    probs = net.predict(x, batch_size)
    loss, _ = cross_entropy(probs.astype(np.float64), one_hot(y, probs.shape[1]))
    acc = float(np.mean(np.argmax(probs, axis=1) == y))
    return loss, acc


def train(net: Network, train_x, train_y, val_x, val_y, cfg: TrainConfig, validate=None, on_epoch=None):
    """Train ``net`` in place and leave it holding the best-epoch weights.

    ``validate(net) -> (val_loss, val_acc)`` replaces the default eval-mode
    pass over ``val_x``/``val_y``; ``on_epoch(log)`` is called after each
    epoch.
    """
    n = len(train_x)
    if n == 0 or (validate is None and len(val_x) == 0):
        raise ValidationError("training and validation sets must be non-empty")
    if cfg.batch_size > n:
        raise ValidationError(f"batch_size {cfg.batch_size} exceeds training set size {n}")
    train_y = np.asarray(train_y, dtype=np.int64)
    k = net.config.num_classes
    if validate is None:
        val_y = np.asarray(val_y, dtype=np.int64)

        def validate(model):
            return eval_loss_acc(model, val_x, val_y, cfg.batch_size)

    shuffle_rng, dropout_rng, aug_rng = (make_rng(s) for s in spawn_seeds(cfg.seed, 3))
    opt = cfg.make_optimizer()
    params = net.parameters()
    mode = "min" if cfg.monitor == "val_loss" else "max"
    history, logs = [], []
    best, best_epoch, best_params = None, 0, net.get_params()
    reason = "max_epochs"

    for epoch in range(1, cfg.max_epochs + 1):
        t0 = time.perf_counter()
        order = shuffle_rng.permutation(n)
        loss_sum, correct = 0.0, 0
        for b, start in enumerate(range(0, n, cfg.batch_size), start=1):
            idx = order[start : start + cfg.batch_size]
            xb = train_x[idx]
            if cfg.augment is not None:
                xb = augment_batch(xb.astype(np.float64), cfg.augment, aug_rng).astype(net.dtype)
            probs, caches = net.forward(xb, training=True, rng=dropout_rng)
            loss, grad = cross_entropy(probs, one_hot(train_y[idx], k, probs.dtype))
            if not np.isfinite(loss):
                raise NumericalError(f"loss is {loss} at epoch {epoch}, batch {b}")
            grads = net.backward(caches, grad)
            try:
                opt.step(params, grads)
            except NumericalError as exc:
                raise NumericalError(f"{exc} at epoch {epoch}, batch {b}") from None
            loss_sum += loss * len(idx)
            correct += int(np.sum(np.argmax(probs, axis=1) == train_y[idx]))
        val_loss, val_acc = validate(net)
        if not np.isfinite(val_loss):
            raise NumericalError(f"validation loss is {val_loss} at epoch {epoch}")
        log = EpochLog(epoch, loss_sum / n, correct / n, float(val_loss), float(val_acc), time.perf_counter() - t0)
        logs.append(log)
        if on_epoch is not None:
            on_epoch(log)
        monitored = log.val_loss if mode == "min" else log.val_acc
        history.append(monitored)
        if _is_better(monitored, best, mode):
            best, best_epoch, best_params = monitored, epoch, net.get_params()
        if early_stop(history, cfg.patience, mode):
            reason = "early_stop"
            break

    net.set_params(best_params)
    return TrainResult(best_params, logs, reason, best_epoch)


LOG_COLUMNS = ["epoch", "train_loss", "train_acc", "val_loss", "val_acc", "wall_seconds"]


def format_epoch_log(logs, meta=None) -> str:
    buf = io.StringIO()
    for k, v in (meta or {}).items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(LOG_COLUMNS)
    for log in logs:
        d = asdict(log)
        w.writerow([d["epoch"]] + [repr(float(d[c])) for c in LOG_COLUMNS[1:]])
    return buf.getvalue()


def write_epoch_log(path, logs, meta=None) -> None:
    write_text(path, format_epoch_log(logs, meta))
