"""Independent scalar reimplementations used as optimizer oracles."""
import math


def adam_scalar(w, grad_fn, steps, eta=0.001, b1=0.9, b2=0.999, eps=1e-8):
    m = v = 0.0
    out = []
    for t in range(1, steps + 1):
        g = grad_fn(w)
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mh = m / (1 - b1**t)
        vh = v / (1 - b2**t)
        w = w - eta * mh / (math.sqrt(vh) + eps)
        out.append(w)
    return out


def rmsprop_scalar(w, grad_fn, steps, eta, rho=0.9, eps=1e-8):
    v = 0.0
    out = []
    for _ in range(steps):
        g = grad_fn(w)
        v = rho * v + (1 - rho) * g * g
        w = w - eta * g / (math.sqrt(v) + eps)
        out.append(w)
    return out
