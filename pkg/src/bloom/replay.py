"""Scripted end-to-end replay: a full chat session against recorded exchanges.

A fixture bundles the provider scripts, the user's messages, and a fixed
starting clock; running it drives the real runtime (orchestrator, plan
engine, garden, safety, wire frames) with no live dependencies. Output is
canonical JSON, so identical fixtures replay byte-identically, which is also
the regression check for the whole pipeline.
"""

from __future__ import annotations

import json
from datetime import datetime, timedelta
from pathlib import Path
from typing import Optional

from .persistence import InMemoryStore
from .plan import canonical_json
from .provider import ScriptedProvider
from .runtime import CoachingService


def stepping_clock(start: datetime, step_seconds: float = 1.0):
    state = {"now": start}

    def clock() -> datetime:
        state["now"] = state["now"] + timedelta(seconds=step_seconds)
        return state["now"]

    return clock


def run_replay(fixture: dict, store: Optional[InMemoryStore] = None) -> dict:
    """Run one recorded conversation; returns a transcript dict."""
    user_id = fixture.get("userId", "replay-user")
    mode = fixture.get("mode", "onboarding")
    clock = stepping_clock(datetime.fromisoformat(
        fixture.get("clockStart", "2025-05-05T09:00:00")))
    service = CoachingService(
        store=store or InMemoryStore(),
        provider=ScriptedProvider(fixture["script"]),
        safety_provider=ScriptedProvider(fixture.get("safetyScript", [])),
        timezone=fixture.get("timezone", "UTC"),
        clock=clock,
    )
    if fixture.get("healthSamples"):
        service.ingest_health(user_id, fixture["healthSamples"])
    channel = service.open_channel(user_id)
    frames = []
    seq = 0

    def send(frame_type: str, payload: dict):
        nonlocal seq
        seq += 1
        session_id = channel.session.session_id if channel.session else None
        inbound = {"type": frame_type, "sessionId": session_id, "seq": seq, "payload": payload}
        frames.extend(channel.handle(inbound))

    send("sessionControl", {"action": "start", "mode": mode})
    for message in fixture.get("userMessages", []):
        send("userMessage", {"text": message})
    send("sessionControl", {"action": "end"})

    return {
        "frames": frames,
        "plan": service.current_plan(user_id),
        "garden": service.garden_descriptor(user_id),
    }


def replay_fixture_file(path, runs: int = 1) -> list:
    """Run a fixture file `runs` times; returns the canonical JSON transcripts."""
    fixture = json.loads(Path(path).read_text(encoding="utf-8"))
    return [canonical_json(run_replay(fixture)) for _ in range(runs)]
