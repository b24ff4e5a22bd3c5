"""From-scratch CNN toolkit for age-bin classification."""

__version__ = "0.1.0"

from .kernels import BACKEND
from .model import ModelConfig, Network, agenet_default, build, param_count

__all__ = ["BACKEND", "ModelConfig", "Network", "agenet_default", "build", "param_count", "__version__"]
