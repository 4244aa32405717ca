"""Chat wire protocol: typed JSON frames with per-session sequence numbers.

Subprotocol version ``bloom-proto/1``. Every frame carries a type, the
session id, a per-session monotonically increasing ``seq``, and a payload
validated against the type's schema. Malformed frames produce an error frame,
never a dropped connection.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional

from .errors import FrameError

PROTOCOL_VERSION = "bloom-proto/1"


class FrameType(str, Enum):
    USER_MESSAGE = "userMessage"
    AGENT_TEXT = "agentText"
    TOOL_STATUS = "toolStatus"
    PLAN_WIDGET = "planWidget"
    CHART_WIDGET = "chartWidget"
    GARDEN_EVENT = "gardenEvent"
    ERROR = "error"
    SESSION_CONTROL = "sessionControl"


# Required payload keys per frame type.
_REQUIRED_PAYLOAD_KEYS = {
    FrameType.USER_MESSAGE: {"text"},
    FrameType.AGENT_TEXT: {"text", "safetyOutcome"},
    FrameType.TOOL_STATUS: {"tool", "status"},
    FrameType.PLAN_WIDGET: {"plan"},
    FrameType.CHART_WIDGET: {"sampleType", "buckets"},
    FrameType.GARDEN_EVENT: {"descriptor"},
    FrameType.ERROR: {"code", "message"},
    FrameType.SESSION_CONTROL: {"action"},
}


@dataclass
class WireFrame:
    type: FrameType
    session_id: Optional[str]
    seq: int
    payload: dict

    def to_dict(self) -> dict:
        return {
            "type": self.type.value,
            "sessionId": self.session_id,
            "seq": self.seq,
            "payload": self.payload,
        }


def parse_frame(data: dict) -> WireFrame:
    """Validate one inbound frame object; raises FrameError with a reason."""
    if not isinstance(data, dict):
        raise FrameError("frame must be a JSON object")
    try:
        frame_type = FrameType(data["type"])
    except (KeyError, ValueError):
        raise FrameError(f"unknown frame type: {data.get('type')!r}") from None
    seq = data.get("seq")
    if not isinstance(seq, int) or isinstance(seq, bool):
        raise FrameError("seq must be an integer")
    payload = data.get("payload")
    if not isinstance(payload, dict):
        raise FrameError("payload must be an object")
    missing = _REQUIRED_PAYLOAD_KEYS[frame_type] - payload.keys()
    if missing:
        raise FrameError(
            f"{frame_type.value} payload missing keys: {', '.join(sorted(missing))}")
    return WireFrame(frame_type, data.get("sessionId"), seq, payload)


class SessionSequencer:
    """Strictly increasing seq per session, safe across emitter threads."""

    def __init__(self):
        self._counters: Dict[str, int] = {}
        self._lock = threading.Lock()

    def next(self, session_id: str) -> int:
        with self._lock:
            value = self._counters.get(session_id, 0) + 1
            self._counters[session_id] = value
            return value


class FrameEmitter:
    """Builds outbound frames for one session and keeps a replayable log."""

    def __init__(self, session_id: str, sequencer: Optional[SessionSequencer] = None):
        self.session_id = session_id
        self.sequencer = sequencer or SessionSequencer()
        self.log: List[WireFrame] = []

    def emit(self, frame_type: FrameType, payload: dict) -> WireFrame:
        frame = WireFrame(frame_type, self.session_id,
                          self.sequencer.next(self.session_id), payload)
        self.log.append(frame)
        return frame

    def frames_after(self, last_seq: int) -> List[WireFrame]:
        return [f for f in self.log if f.seq > last_seq]
