"""Prompt template loading.

Templates live as plain text assets keyed by (mode, stateId) for system
prompts and by chain name for the auxiliary chains. An override directory
lets deployments swap wording without touching code.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, Optional

_BUILTIN_DIR = Path(__file__).parent / "prompts"


class PromptLibrary:
    def __init__(self, override_dir: Optional[Path] = None):
        self.override_dir = Path(override_dir) if override_dir else None
        self._cache: Dict[str, str] = {}

    def _load(self, name: str) -> str:
        if name in self._cache:
            return self._cache[name]
        filename = f"{name}.txt"
        if self.override_dir and (self.override_dir / filename).exists():
            text = (self.override_dir / filename).read_text(encoding="utf-8").strip()
        else:
            path = _BUILTIN_DIR / filename
            if not path.exists():
                raise KeyError(f"no prompt template named {name!r}")
            text = path.read_text(encoding="utf-8").strip()
        self._cache[name] = text
        return text

    def system_prompt(self, mode: str, state_id: str) -> str:
        return self._load("persona") + "\n\n" + self._load(f"{mode}.{state_id}")

    def chain_prompt(self, chain: str, **slots) -> str:
        # Plain replacement, not str.format: templates may contain literal JSON braces.
        text = self._load(f"chain.{chain}")
        for key, value in slots.items():
            text = text.replace("{" + key + "}", str(value))
        return text
