"""Adapter configuration: which checkpoints serve which roles.

Roles are independently optional; a request for an unconfigured role is
answered with a protocol error. Config comes from YAML, with environment
overrides for quick deployment tweaks.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import yaml


@dataclass(frozen=True)
class RoleConfig:
    checkpoint: str
    head_weights: str | None = None  # .npz with w_q/w_k, localize only


@dataclass(frozen=True)
class AdapterConfig:
    generate: RoleConfig | None = None
    localize: RoleConfig | None = None
    refine: RoleConfig | None = None
    device: str = "cpu"
    max_new_tokens: int = 512
    sampling_enabled: bool = False
    sampling_temperature: float = 0.8
    host: str = "127.0.0.1"
    port: int = 8042

    def configured_roles(self) -> list[str]:
        return [
            name
            for name in ("generate", "localize", "refine")
            if getattr(self, name) is not None
        ]


def _role_from(payload: dict | None) -> RoleConfig | None:
    if not payload:
        return None
    if "checkpoint" not in payload:
        raise ValueError("role config requires a 'checkpoint'")
    return RoleConfig(
        checkpoint=str(payload["checkpoint"]),
        head_weights=payload.get("head_weights"),
    )


def load_config(path: str | Path | None = None, env: dict | None = None) -> AdapterConfig:
    """Build the config from an optional YAML file plus environment
    overrides (LATTE_ADAPTER_DEVICE, LATTE_ADAPTER_HOST/PORT)."""
    env = dict(os.environ if env is None else env)
    doc: dict = {}
    if path is not None:
        doc = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    roles = doc.get("roles", {}) or {}
    sampling = doc.get("sampling", {}) or {}
    return AdapterConfig(
        generate=_role_from(roles.get("generate")),
        localize=_role_from(roles.get("localize")),
        refine=_role_from(roles.get("refine")),
        device=env.get("LATTE_ADAPTER_DEVICE", doc.get("device", "cpu")),
        max_new_tokens=int(doc.get("max_new_tokens", 512)),
        sampling_enabled=bool(sampling.get("enabled", False)),
        sampling_temperature=float(sampling.get("temperature", 0.8)),
        host=env.get("LATTE_ADAPTER_HOST", doc.get("host", "127.0.0.1")),
        port=int(env.get("LATTE_ADAPTER_PORT", doc.get("port", 8042))),
    )
