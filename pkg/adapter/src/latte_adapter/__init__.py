"""HTTP adapter exposing vision-encoder-decoder checkpoints behind the
latte backend wire protocol (generate / localize / refine)."""

from .config import AdapterConfig, RoleConfig, load_config
from .engines import RoleEngines, attention_head_forward, build_engines
from .server import create_app

__all__ = [
    "AdapterConfig",
    "RoleConfig",
    "RoleEngines",
    "attention_head_forward",
    "build_engines",
    "create_app",
    "load_config",
]
