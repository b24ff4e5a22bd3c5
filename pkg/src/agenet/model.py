"""Configurable CNN: conv blocks, a flatten, and a dense stack ending in softmax.

A conv block is ``conv -> ReLU -> [max-pool] -> [dropout]``; hidden dense
layers are followed by ReLU. ``ModelConfig`` is the only source of
architecture; :func:`agenet_default` fills it with the published AgeNet
values.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import ConfigError, DimensionError, ShapeError
from .layers import Conv2D, Dense, Dropout, Flatten, MaxPool2D, ReLU, softmax
from .tensor import as_dtype, random_init, zeros_bias


@dataclass(frozen=True)
class ModelConfig:
    conv_layers: int = 5
    conv_filters: tuple = (64, 128, 256, 512, 1024)
    conv_kernel_size: int = 3
    conv_strides: tuple = (2, 1, 1, 1, 1)
    pool_layers: tuple = (1, 2, 3, 4)
    dropout_layers: tuple = (1, 2, 3, 4, 5)
    dropout_rate: float = 0.187
    dense_units: tuple = (256, 128, 10)
    input_shape: tuple = (3, 256, 256)
    padding: str = "same"
    pool_size: int = 2

    def __post_init__(self):
        for name in ("conv_filters", "conv_strides", "pool_layers", "dropout_layers", "dense_units", "input_shape"):
            object.__setattr__(self, name, tuple(int(v) for v in getattr(self, name)))
        n = self.conv_layers
        if n < 0:
            raise ConfigError("conv_layers must be >= 0")
        if len(self.conv_filters) != n:
            raise ConfigError(f"conv_filters has {len(self.conv_filters)} entries, conv_layers is {n}")
        if len(self.conv_strides) != n:
            raise ConfigError(f"conv_strides has {len(self.conv_strides)} entries, conv_layers is {n}")
        if any(f < 1 for f in self.conv_filters) or any(s < 1 for s in self.conv_strides):
            raise ConfigError("conv filters and strides must be >= 1")
        if self.conv_kernel_size < 1 or self.pool_size < 1:
            raise ConfigError("kernel and pool sizes must be >= 1")
        for name in ("pool_layers", "dropout_layers"):
            bad = [i for i in getattr(self, name) if not 1 <= i <= n]
            if bad:
                raise ConfigError(f"{name} refers to conv layers {bad}, only 1..{n} exist")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
        if not self.dense_units or any(u < 1 for u in self.dense_units):
            raise ConfigError("dense_units needs at least one positive width")
        if len(self.input_shape) != 3 or any(d < 1 for d in self.input_shape):
            raise ConfigError(f"input_shape must be C x H x W, got {self.input_shape}")
        if self.padding not in ("same", "valid"):
            raise ConfigError(f"padding must be 'same' or 'valid', got {self.padding!r}")

    @property
    def num_classes(self) -> int:
        return self.dense_units[-1]

    def to_dict(self) -> dict:
        return asdict(self)

    def to_text(self) -> str:
        return "".join(f"{k}={format_value(v)}\n" for k, v in self.to_dict().items())

    @classmethod
    def from_text(cls, text: str) -> "ModelConfig":
        known = {f.name for f in fields(cls)}
        values = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, raw = line.partition("=")
            if key in known:
                values[key] = parse_field(key, raw)
        return cls(**values)


_LIST_FIELDS = {"conv_filters", "conv_strides", "pool_layers", "dropout_layers", "dense_units"}


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (tuple, list)):
        return ",".join(str(x) for x in v)
    return str(v)


def parse_field(key: str, raw: str):
    raw = raw.strip()
    try:
        if key in _LIST_FIELDS:
            return tuple(int(x) for x in raw.split(",") if x.strip())
        if key == "input_shape":
            return tuple(int(x) for x in raw.lower().replace(",", "x").split("x"))
        if key == "dropout_rate":
            return float(raw)
        if key == "padding":
            return raw
        return int(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def agenet_default() -> ModelConfig:
    """Five conv blocks (64..1024 filters, 3x3, first stride 2), dense 256/128/10."""
    return ModelConfig()


class Network:
    """Ordered layers plus the config that produced them."""

    def __init__(self, config: ModelConfig, layers, shapes, dtype, relu_index):
        self.config = config
        self.layers = layers
        # (layer description, input shape, output shape) per layer
        self.shapes = shapes
        self.dtype = dtype
        self._relu_index = relu_index

    # -- parameters --------------------------------------------------------

    def parameters(self) -> list:
        return [p for layer in self.layers for p in layer.params.values()]

    def named_parameters(self):
        for i, layer in enumerate(self.layers):
            for name, p in layer.params.items():
                yield i, name, p

    def get_params(self) -> list:
        return [p.copy() for p in self.parameters()]

    def set_params(self, values) -> None:
        params = self.parameters()
        if len(values) != len(params):
            raise DimensionError(f"expected {len(params)} arrays, got {len(values)}")
        for p, v in zip(params, values):
            if p.shape != v.shape:
                raise DimensionError(f"parameter shape {p.shape} vs {v.shape}")
            p[...] = v

    # -- passes ------------------------------------------------------------

    def _check_input(self, x):
        if x.ndim != 4 or x.shape[1:] != self.config.input_shape:
            raise DimensionError(f"network expects N x {self.config.input_shape}, got {x.shape}")

    def logits(self, x, training=False, rng=None):
        self._check_input(x)
        x = np.ascontiguousarray(x, dtype=self.dtype)
        if training and rng is None and self.config.dropout_layers and self.config.dropout_rate > 0:
            raise ConfigError("training-mode forward needs an rng for dropout")
        caches = []
        for layer in self.layers:
            x, cache = layer.forward(x, training=training, rng=rng)
            caches.append(cache)
        return x, caches

    def forward(self, x, training=False, rng=None):
        """Return ``(probs, caches)``; caches feed :meth:`backward`."""
        z, caches = self.logits(x, training, rng)
        return softmax(z), caches

    def backward(self, caches, grad_logits) -> list:
        """Gradients aligned with :meth:`parameters`."""
        if len(caches) != len(self.layers):
            raise DimensionError(f"{len(caches)} caches for {len(self.layers)} layers")
        g = np.asarray(grad_logits, dtype=self.dtype)
        per_layer = []
        for layer, cache in zip(reversed(self.layers), reversed(caches)):
            g, grads = layer.backward(g, cache)
            per_layer.append(grads)
        per_layer.reverse()
        return [grads[name] for layer, grads in zip(self.layers, per_layer) for name in layer.params]

    def predict(self, x, batch_size=64):
        """Eval-mode probabilities, computed in batches."""
        out = []
        for i in range(0, len(x), batch_size):
            probs, _ = self.forward(x[i : i + batch_size])
            out.append(probs)
        if not out:
            return np.zeros((0, self.config.num_classes), dtype=self.dtype)
        return np.concatenate(out)

    def __repr__(self):
        return "Network(\n" + "".join(f"  {s[0]}: {s[1]} -> {s[2]}\n" for s in self.shapes) + ")"


def build(config: ModelConfig, rng: np.random.Generator, dtype=np.float32) -> Network:
    dtype = as_dtype(dtype)
    layers, shapes, relu_index = [], [], []
    shape = config.input_shape
    k = config.conv_kernel_size

    def add(layer, label):
        nonlocal shape
        try:
            out = layer.output_shape(shape)
        except (ShapeError, DimensionError) as exc:
            raise ConfigError(f"{label}: {exc}") from None
        if any(d < 1 for d in out):
            raise ConfigError(f"{label}: spatial size underflows to {out}")
        shapes.append((label, shape, out))
        layers.append(layer)
        shape = out

    for i in range(1, config.conv_layers + 1):
        in_c = shape[0]
        out_c = config.conv_filters[i - 1]
        w = random_init((out_c, in_c, k, k), in_c * k * k, rng, dtype)
        add(Conv2D(w, zeros_bias(out_c, dtype), config.conv_strides[i - 1], config.padding), f"conv{i}")
        add(ReLU(), f"conv{i}.relu")
        relu_index.append(len(layers) - 1)
        if i in config.pool_layers:
            add(MaxPool2D(config.pool_size, config.pool_size), f"conv{i}.pool")
        if i in config.dropout_layers:
            add(Dropout(config.dropout_rate), f"conv{i}.dropout")
    add(Flatten(), "flatten")
    for j, units in enumerate(config.dense_units, start=1):
        fan_in = shape[0]
        w = random_init((fan_in, units), fan_in, rng, dtype)
        add(Dense(w, zeros_bias(units, dtype)), f"dense{j}")
        if j < len(config.dense_units):
            add(ReLU(), f"dense{j}.relu")
    return Network(config, layers, shapes, dtype, relu_index)


def param_count(net: Network | None) -> int:
    if net is None:
        return 0
    return sum(p.size for p in net.parameters())


def analytic_param_count(config: ModelConfig) -> int:
    """Closed-form count: (k*k*C_in + 1)*C_out per conv, (in + 1)*out per dense."""
    c, h, w = config.input_shape
    k = config.conv_kernel_size
    total = 0
    for i in range(1, config.conv_layers + 1):
        f = config.conv_filters[i - 1]
        s = config.conv_strides[i - 1]
        total += (k * k * c + 1) * f
        c = f
        if config.padding == "same":
            h, w = -(-h // s), -(-w // s)
        else:
            h, w = (h - k) // s + 1, (w - k) // s + 1
        if i in config.pool_layers:
            p = config.pool_size
            h, w = (h - p) // p + 1, (w - p) // p + 1
    width = c * h * w
    for units in config.dense_units:
        total += (width + 1) * units
        width = units
    return total


def feature_maps(net: Network, image, layer_index: int) -> list:
    """Post-ReLU channels of conv block ``layer_index`` (1-based) as uint8 images.

    Each channel is min-max scaled to 0..255; a constant channel maps to 0.
    """
    n_blocks = len(net._relu_index)
    if not 1 <= layer_index <= n_blocks:
        raise ShapeError(f"layer {layer_index} out of range 1..{n_blocks}")
    x = np.asarray(image, dtype=net.dtype)
    if x.ndim == 3:
        x = x[None]
    net._check_input(x)
    stop = net._relu_index[layer_index - 1]
    for layer in net.layers[: stop + 1]:
        x, _ = layer.forward(x)
    maps = []
    for ch in x[0].astype(np.float64):
        lo, hi = ch.min(), ch.max()
        if hi > lo:
            scaled = np.rint((ch - lo) / (hi - lo) * 255.0)
        else:
            scaled = np.zeros_like(ch)
        maps.append(scaled.astype(np.uint8))
    return maps
