"""Service configuration from a JSON file with environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8787
    timezone: str = "UTC"
    token_registry_path: Optional[str] = None
    store_path: Optional[str] = None  # file-backed store root; None = in-memory
    provider: str = "live"            # "live" or "scripted:<fixture path>"
    model: str = "gpt-4o"
    template_notifications: bool = False
    token_budget: int = 3500
    response_temperature: float = 0.7

    @classmethod
    def load(cls, path: Optional[str] = None) -> "ServiceConfig":
        data = {}
        if path:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        config = cls(**{k: v for k, v in data.items() if k in cls.__dataclass_fields__})
        env = os.environ
        config.host = env.get("BLOOM_HOST", config.host)
        config.port = int(env.get("BLOOM_PORT", config.port))
        config.timezone = env.get("BLOOM_TIMEZONE", config.timezone)
        config.token_registry_path = env.get("BLOOM_TOKENS", config.token_registry_path)
        config.store_path = env.get("BLOOM_STORE", config.store_path)
        config.provider = env.get("BLOOM_PROVIDER", config.provider)
        config.model = env.get("BLOOM_MODEL", config.model)
        config.token_budget = int(env.get("BLOOM_TOKEN_BUDGET", config.token_budget))
        config.response_temperature = float(
            env.get("BLOOM_TEMPERATURE", config.response_temperature))
        return config
