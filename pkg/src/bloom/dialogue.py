"""Conversation modes, dialogue states, and tool permissions.

Onboarding and check-in follow a linear coaching program, so transitions are
forward-only with self-loops (skipping ahead is allowed, going back is not).
At-will chat has no dialogue-state chain: it is a single state with granular
plan-edit tools but no plan regeneration, which proved too destructive to
expose outside scheduled conversations.
"""

from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, List, Optional


class Mode(str, Enum):
    ONBOARDING = "onboarding"
    CHECKIN = "checkin"
    ATWILL = "atwill"


ONBOARDING_STATES = ["intro", "motivationHistory", "barriersResources", "goalSetting", "wrapUp"]
CHECKIN_STATES = ["progressReview", "barrierDiscussion", "planRevisionOrProgression",
                  "commitment", "wrapUp"]
ATWILL_STATES = ["chat"]

_STATE_ORDER = {
    Mode.ONBOARDING: ONBOARDING_STATES,
    Mode.CHECKIN: CHECKIN_STATES,
    Mode.ATWILL: ATWILL_STATES,
}

# Scheduled conversations may regenerate the plan; at-will chat gets granular
# edits only. query_health_data is available everywhere.
_MODE_TOOLS = {
    Mode.ONBOARDING: frozenset({"query_health_data", "generate_plan"}),
    Mode.CHECKIN: frozenset({"query_health_data", "generate_plan"}),
    Mode.ATWILL: frozenset({"query_health_data", "add_workout", "delete_workout"}),
}

GATE_PLAN_GENERATED = "planGenerated"

# States that cannot be left until generate_plan has succeeded this session.
_GATED_STATES = {(Mode.ONBOARDING, "goalSetting")}


@dataclass(frozen=True)
class DialogueState:
    mode: Mode
    state_id: str
    allowed_tools: FrozenSet[str]
    advance_gate: Optional[str] = None


def states_for(mode: Mode) -> List[str]:
    return list(_STATE_ORDER[mode])


def dialogue_state(mode: Mode, state_id: str) -> DialogueState:
    if state_id not in _STATE_ORDER[mode]:
        raise ValueError(f"{state_id!r} is not a {mode.value} state")
    gate = GATE_PLAN_GENERATED if (mode, state_id) in _GATED_STATES else None
    return DialogueState(mode, state_id, _MODE_TOOLS[mode], gate)


def first_state(mode: Mode) -> DialogueState:
    return dialogue_state(mode, _STATE_ORDER[mode][0])


def legal_next_states(mode: Mode, state_id: str) -> List[str]:
    """Current state plus everything after it (forward-only, skips allowed)."""
    order = _STATE_ORDER[mode]
    return order[order.index(state_id):]


def uses_state_chain(mode: Mode) -> bool:
    return mode is not Mode.ATWILL
