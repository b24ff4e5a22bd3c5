"""Constant-colour synthetic set: one colour per class, 4 samples each."""
import numpy as np

from agenet.model import ModelConfig

TOY_NET = ModelConfig(conv_layers=1, conv_filters=(8,), conv_strides=(1,), pool_layers=(1,), dropout_layers=(),
                      dropout_rate=0.0, dense_units=(32, 10), input_shape=(3, 8, 8))


def colour_set(per_class=4, size=8):
    dirs = np.random.default_rng(0).normal(size=(10, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    colours = 0.5 + 0.4 * dirs
    x = np.repeat(colours, per_class, axis=0)[:, :, None, None] * np.ones((1, 1, size, size))
    y = np.repeat(np.arange(10), per_class)
    return x.astype(np.float32), y
