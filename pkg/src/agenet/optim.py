"""SGD, RMSprop and Adam.

Optimizers update parameter arrays in place. Each keeps its per-parameter
state in lists aligned with the parameter list passed to ``step``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericalError


@dataclass
class AdamConfig:
    eta: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    # True reproduces w -= eta * m_hat / sqrt(v_hat + eps) literally.
    eps_inside_sqrt: bool = False

    def __post_init__(self):
        if self.eta <= 0 or self.epsilon <= 0:
            raise ConfigError("Adam needs eta > 0 and epsilon > 0")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError("Adam betas must lie in [0, 1)")


@dataclass
class AdamState:
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)
    t: int = 0

    @classmethod
    def zeros_like(cls, params):
        return cls([np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params], 0)


def _check_finite(grads, t):
    for i, g in enumerate(grads):
        if not np.all(np.isfinite(g)):
            raise NumericalError(f"non-finite gradient in parameter {i} at step {t}")


def adam_step(params, grads, state: AdamState, cfg: AdamConfig):
    """One Adam update, in place on ``params`` and ``state``."""
    if len(params) != len(grads):
        raise ConfigError(f"{len(params)} parameters but {len(grads)} gradients")
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    _check_finite(grads, state.t + 1)
    state.t += 1
    b1, b2, t = cfg.beta1, cfg.beta2, state.t
    c1 = 1.0 - b1**t
    c2 = 1.0 - b2**t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        m_hat = m / c1
        v_hat = v / c2
        if cfg.eps_inside_sqrt:
            denom = np.sqrt(v_hat + cfg.epsilon)
        else:
            denom = np.sqrt(v_hat) + cfg.epsilon
        p -= (cfg.eta * m_hat / denom).astype(p.dtype, copy=False)
    return params, state


def sgd_step(params, grads, lr):
    _check_finite(grads, 0)
    for p, g in zip(params, grads):
        p -= (lr * g).astype(p.dtype, copy=False)
    return params


def rmsprop_step(params, grads, v_list, lr, rho=0.9, eps=1e-8):
    _check_finite(grads, 0)
    for p, g, v in zip(params, grads, v_list):
        v *= rho
        v += (1.0 - rho) * (g * g)
        p -= (lr * g / (np.sqrt(v) + eps)).astype(p.dtype, copy=False)
    return params


def baseline_step(params, grads, variant, lr, state=None, rho=0.9, eps=1e-8):
    """SGD or RMSprop update. RMSprop keeps its running mean in ``state``."""
    if variant == "sgd":
        return sgd_step(params, grads, lr)
    if variant == "rmsprop":
        if state is None:
            raise ConfigError("rmsprop needs a state list")
        if not state:
            state.extend(np.zeros_like(p) for p in params)
        return rmsprop_step(params, grads, state, lr, rho, eps)
    raise ConfigError(f"unknown optimizer variant {variant!r}")


class Optimizer:
    def __init__(self, lr):
        if lr <= 0:
            raise ConfigError(f"learning rate must be positive, got {lr}")
        self.lr = lr
        self.steps = 0

    def step(self, params, grads):
        self.steps += 1
        try:
            self._update(params, grads)
        except NumericalError as exc:
            raise NumericalError(f"{exc} (optimizer step {self.steps})") from None

    def _update(self, params, grads):
        raise NotImplementedError


class SGD(Optimizer):
    def _update(self, params, grads):
        sgd_step(params, grads, self.lr)


class RMSprop(Optimizer):
    def __init__(self, lr, rho=0.9, eps=1e-8):
        super().__init__(lr)
        self.rho, self.eps = rho, eps
        self.v = []

    def _update(self, params, grads):
        baseline_step(params, grads, "rmsprop", self.lr, self.v, self.rho, self.eps)


class Adam(Optimizer):
    def __init__(self, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8, eps_inside_sqrt=False):
        super().__init__(lr)
        self.cfg = AdamConfig(lr, beta1, beta2, eps, eps_inside_sqrt)
        self.state = AdamState()

    def _update(self, params, grads):
        adam_step(params, grads, self.state, self.cfg)


def make_optimizer(name, lr, **kw):
    name = name.lower()
    if name == "adam":
        return Adam(lr, **{k: kw[k] for k in ("beta1", "beta2", "eps", "eps_inside_sqrt") if k in kw})
    if name == "sgd":
        return SGD(lr)
    if name == "rmsprop":
        return RMSprop(lr, **{k: kw[k] for k in ("rho", "eps") if k in kw})
    raise ConfigError(f"unknown optimizer {name!r}; expected adam, sgd or rmsprop")
