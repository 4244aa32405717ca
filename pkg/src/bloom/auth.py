"""Bearer-token authentication against a local registry.

Tokens are opaque strings mapped to user ids, optionally with an expiry.
Expired tokens are rejected with a distinct code so clients can re-enroll
instead of treating it as a bad credential.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Dict, Optional

from .errors import AuthError


@dataclass(frozen=True)
class TokenRecord:
    token: str
    user_id: str
    expires_at: Optional[datetime] = None


class TokenRegistry:
    def __init__(self, records=None):
        self._by_token: Dict[str, TokenRecord] = {}
        for record in records or []:
            self.add(record)

    def add(self, record: TokenRecord) -> None:
        self._by_token[record.token] = record

    @classmethod
    def from_file(cls, path) -> "TokenRegistry":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        records = []
        for entry in data.get("tokens", []):
            expires = entry.get("expiresAt")
            records.append(TokenRecord(
                token=entry["token"],
                user_id=entry["userId"],
                expires_at=datetime.fromisoformat(expires) if expires else None,
            ))
        return cls(records)

    def authenticate(self, authorization: Optional[str],
                     now: Optional[datetime] = None) -> str:
        """Resolve 'Bearer <token>' to a user id; raises AuthError otherwise."""
        if not authorization:
            raise AuthError("missing bearer token", code="missing")
        parts = authorization.split()
        if len(parts) != 2 or parts[0].lower() != "bearer":
            raise AuthError("malformed authorization header", code="invalid")
        record = self._by_token.get(parts[1])
        if record is None:
            raise AuthError("unknown token", code="invalid")
        if record.expires_at is not None and (now or datetime.now()) >= record.expires_at:
            raise AuthError("token expired", code="expired")
        return record.user_id

    def authenticate_token(self, token: Optional[str],
                           now: Optional[datetime] = None) -> str:
        """Raw-token variant for websocket query parameters."""
        if not token:
            raise AuthError("missing bearer token", code="missing")
        return self.authenticate(f"Bearer {token}", now)
