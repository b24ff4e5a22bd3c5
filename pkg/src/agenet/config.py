"""Flat ``key=value`` run configuration shared by every CLI subcommand.

One file covers model, training, augmentation and pipeline settings.
Unknown keys are rejected and every value is validated up front, before
any subcommand does work.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .data.bins import get_scheme
from .data.transforms import AugmentConfig
from .errors import AgeNetIOError, ConfigError, ValidationError
from .model import ModelConfig
from .train import TrainConfig


def _bool(raw):
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(raw)


def _ints(raw):
    return tuple(int(x) for x in raw.split(",") if x.strip())


def _shape(raw):
    return tuple(int(x) for x in raw.lower().replace(",", "x").split("x"))


def _patience(raw):
    return None if raw.strip().lower() in ("none", "inf", "off") else int(raw)


_m, _t, _a = ModelConfig(), TrainConfig(), AugmentConfig()

# key -> (parser, default)
FIELDS = {
    # model
    "conv_layers": (int, _m.conv_layers),
    "conv_filters": (_ints, _m.conv_filters),
    "conv_kernel_size": (int, _m.conv_kernel_size),
    "conv_strides": (_ints, _m.conv_strides),
    "pool_layers": (_ints, _m.pool_layers),
    "dropout_layers": (_ints, _m.dropout_layers),
    "dropout_rate": (float, _m.dropout_rate),
    "dense_units": (_ints, _m.dense_units),
    "input_shape": (_shape, _m.input_shape),
    "padding": (str, _m.padding),
    "pool_size": (int, _m.pool_size),
    # training
    "batch_size": (int, _t.batch_size),
    "learning_rate": (float, _t.learning_rate),
    "optimizer": (str, _t.optimizer),
    "max_epochs": (int, _t.max_epochs),
    "patience": (_patience, _t.patience),
    "seed": (int, _t.seed),
    "monitor": (str, _t.monitor),
    "beta1": (float, _t.beta1),
    "beta2": (float, _t.beta2),
    "epsilon": (float, _t.epsilon),
    "adam_eps_inside_sqrt": (_bool, _t.adam_eps_inside_sqrt),
    "rmsprop_rho": (float, _t.rmsprop_rho),
    # augmentation
    "augment": (_bool, True),
    "flip_prob": (float, _a.flip_prob),
    "max_rotation_deg": (float, _a.max_rotation_deg),
    "zoom_min": (float, _a.zoom_range[0]),
    "zoom_max": (float, _a.zoom_range[1]),
    "fill": (float, _a.fill),
    # pipeline / evaluation
    "margin": (float, 0.40),
    "image_size": (int, 256),
    "train_frac": (float, 0.8),
    "filter_threshold": (float, 0.40),
    "open_bin_age": (float, 70.0),
    "dtype": (str, "f32"),
    "scheme": (str, "agenet"),
}

_MODEL_KEYS = [k for k in FIELDS if k in ModelConfig.__dataclass_fields__]
_TRAIN_KEYS = [k for k in FIELDS if k in TrainConfig.__dataclass_fields__ and k != "augment"]


@dataclass
class RunConfig:
    values: dict = field(default_factory=lambda: {k: d for k, (_, d) in FIELDS.items()})

    def __getitem__(self, key):
        return self.values[key]

    def set(self, key: str, raw: str) -> None:
        key = key.strip()
        if key not in FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        parser, _ = FIELDS[key]
        try:
            self.values[key] = parser(raw.strip())
        except ValueError:
            raise ConfigError(f"bad value for {key}: {raw.strip()!r}") from None

    def update_text(self, text: str, origin="config") -> None:
        for n, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, raw = line.partition("=")
            if not sep:
                raise ConfigError(f"{origin}:{n}: expected key=value, got {line!r}")
            self.set(key, raw)

    @classmethod
    def load(cls, path=None, overrides=()) -> "RunConfig":
        cfg = cls()
        if path is not None:
            try:
                with open(path, encoding="utf-8") as fh:
                    cfg.update_text(fh.read(), str(path))
            except OSError as exc:
                raise AgeNetIOError(f"cannot read config {path}: {exc.strerror}") from None
        for item in overrides:
            key, sep, raw = item.partition("=")
            if not sep:
                raise ConfigError(f"override must be key=value, got {item!r}")
            cfg.set(key, raw)
        cfg.validate()
        return cfg

    def model_config(self) -> ModelConfig:
        return ModelConfig(**{k: self.values[k] for k in _MODEL_KEYS})

    def augment_config(self) -> AugmentConfig | None:
        if not self.values["augment"]:
            return None
        v = self.values
        return AugmentConfig(v["flip_prob"], v["max_rotation_deg"], (v["zoom_min"], v["zoom_max"]), v["fill"])

    def train_config(self) -> TrainConfig:
        return TrainConfig(**{k: self.values[k] for k in _TRAIN_KEYS}, augment=self.augment_config())

    def validate(self) -> None:
        v = self.values
        model = self.model_config()
        self.train_config()
        try:
            scheme = get_scheme(v["scheme"])
        except ValidationError as exc:
            raise ConfigError(str(exc)) from None
        if model.num_classes != len(scheme):
            raise ConfigError(
                f"last dense layer has {model.num_classes} units but the {scheme.name} scheme has {len(scheme)} bins"
            )
        if v["dtype"] not in ("f32", "f64"):
            raise ConfigError(f"dtype must be f32 or f64, got {v['dtype']!r}")
        if v["margin"] < 0 or v["image_size"] < 1:
            raise ConfigError("margin must be >= 0 and image_size >= 1")
        if not 0.0 <= v["train_frac"] <= 1.0:
            raise ConfigError("train_frac must lie in [0, 1]")
        if not 0.0 <= v["filter_threshold"] <= 1.0:
            raise ConfigError("filter_threshold must lie in [0, 1]")
        if v["seed"] < 0 or v["seed"] >= 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
