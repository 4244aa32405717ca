"""Three-mode coaching agent: dialogue-state chain, strategy chain, response
generation with tool dispatch, safety filtering, and summary memory.

Every user turn runs a fixed pipeline against the provider:

1. dialogue-state chain picks the next conversation state among the legal
   forward transitions (skipped in at-will chat);
2. the goal-setting gate blocks leaving a gated state until generate_plan
   has succeeded this session;
3. the strategy chain picks exactly one conversational-strategy code;
4. the response chain generates text, dispatching tool calls as they come
   (bounded depth, structured errors fed back, never silently repaired);
5. the safety pipeline filters the candidate text, and whatever it returns
   is what the user sees.

With a scripted provider the entire pipeline is deterministic, so recorded
conversations replay byte-identically.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import datetime
from typing import Callable, Dict, List, Optional

from .dialogue import (
    GATE_PLAN_GENERATED,
    DialogueState,
    Mode,
    dialogue_state,
    first_state,
    legal_next_states,
    uses_state_chain,
)
from .errors import ConflictError, NotFoundError, ProviderError, SessionConflictError, ValidationError
from .health import AggregationLevel, AggregationQuery, HealthStore, SampleKind, parse_reference_date, query_health_data
from .memory import MemoryStore, MemorySummary
from .plan import (
    Actor,
    WeeklyPlan,
    add_workout,
    canonical_json,
    delete_workout,
    plan_from_dict,
    plan_to_dict,
    validate_plan,
    workout_from_dict,
)
from .prompting import PromptLibrary
from .provider import CompletionRequest, LLMProvider, ToolCall
from .safety import SafetyPipeline

logger = logging.getLogger(__name__)

MI_STRATEGIES = [
    "openQuestion", "closedQuestion", "simpleReflection", "complexReflection",
    "affirm", "advise", "emphasizeControl", "support", "structure", "raiseConcern",
]

MAX_TOOL_DEPTH = 4

TOOL_SCHEMAS: Dict[str, dict] = {
    "query_health_data": {
        "name": "query_health_data",
        "description": "Fetch an aggregated summary of the user's wearable data.",
        "parameters": {
            "type": "object",
            "properties": {
                "sample_type": {"type": "string",
                                "enum": [k.value for k in SampleKind]},
                "reference_date": {"type": "string", "default": "today"},
                "aggregation_level": {"type": "string",
                                      "enum": ["day", "week", "month"],
                                      "default": "month"},
                "show_user": {"type": "boolean", "default": False},
            },
            "required": ["sample_type"],
        },
    },
    "generate_plan": {
        "name": "generate_plan",
        "description": "Generate the weekly exercise plan agreed on in this conversation.",
        "parameters": {"type": "object", "properties": {}},
    },
    "add_workout": {
        "name": "add_workout",
        "description": "Add one workout to the user's current weekly plan.",
        "parameters": {
            "type": "object",
            "properties": {
                "activity": {"type": "string"},
                "intensity": {"type": "string", "enum": ["light", "moderate", "vigorous"]},
                "scheduledStart": {"type": "string", "description": "ISO datetime"},
                "durationMin": {"type": "integer"},
            },
            "required": ["activity", "scheduledStart", "durationMin"],
        },
    },
    "delete_workout": {
        "name": "delete_workout",
        "description": "Delete one workout from the user's current weekly plan.",
        "parameters": {
            "type": "object",
            "properties": {"workoutId": {"type": "string"}},
            "required": ["workoutId"],
        },
    },
}


@dataclass
class Widget:
    kind: str  # "plan" | "chart"
    payload: dict


@dataclass
class ToolCallLog:
    name: str
    arguments_json: str
    ok: bool
    state_id: str
    allowed: bool
    error: Optional[str] = None


@dataclass
class Turn:
    role: str  # "user" | "agent"
    text: str
    strategy: Optional[str] = None
    tool_calls: List[ToolCallLog] = field(default_factory=list)
    safety_outcome: Optional[str] = None
    widgets: List[Widget] = field(default_factory=list)


@dataclass
class ChatSession:
    session_id: str
    user_id: str
    mode: Mode
    current_state: DialogueState
    started_at: datetime
    turns: List[Turn] = field(default_factory=list)
    ended_at: Optional[datetime] = None
    plan_generated: bool = False
    # (from_state, proposed, accepted) per user turn, for gate audits.
    transition_log: List[tuple] = field(default_factory=list)


@dataclass
class ToolOutcome:
    name: str
    ok: bool
    payload: dict
    widgets: List[Widget] = field(default_factory=list)


class InMemoryPlanRepository:
    """Minimal plan storage: latest plan per user."""

    def __init__(self):
        self._plans: Dict[str, WeeklyPlan] = {}

    def current(self, user_id: str) -> Optional[WeeklyPlan]:
        return self._plans.get(user_id)

    def save(self, user_id: str, plan: WeeklyPlan) -> None:
        self._plans[user_id] = plan


class CoachOrchestrator:
    """Drives chat sessions for all users against one provider.

    `plans` is any object with ``current(user_id)`` and
    ``save(user_id, plan)``; the service layer passes a store-backed one.
    """

    def __init__(self, provider: LLMProvider, safety: SafetyPipeline,
                 plans, health: HealthStore, memory: MemoryStore,
                 prompts: Optional[PromptLibrary] = None,
                 clock: Callable[[], datetime] = datetime.now,
                 response_temperature: float = 0.7,
                 max_tool_depth: int = MAX_TOOL_DEPTH):
        self.provider = provider
        self.safety = safety
        self.plans = plans
        self.health = health
        self.memory = memory
        self.prompts = prompts or PromptLibrary()
        self.clock = clock
        self.response_temperature = response_temperature
        self.max_tool_depth = max_tool_depth
        self._active: Dict[str, ChatSession] = {}
        self._session_counter = 0
        self.dispatch_log: List[ToolCallLog] = []

    # --- session lifecycle --------------------------------------------------

    def start_session(self, user_id: str, mode: Mode,
                      session_id: Optional[str] = None) -> ChatSession:
        active = self._active.get(user_id)
        if active is not None and active.ended_at is None:
            raise SessionConflictError(
                f"user {user_id!r} already has active session {active.session_id!r}")
        self._session_counter += 1
        session = ChatSession(
            session_id=session_id or f"{user_id}-{mode.value}-{self._session_counter}",
            user_id=user_id,
            mode=mode,
            current_state=first_state(mode),
            started_at=self.clock(),
        )
        self._active[user_id] = session
        return session

    def active_session(self, user_id: str) -> Optional[ChatSession]:
        session = self._active.get(user_id)
        return session if session is not None and session.ended_at is None else None

    def end_session_summarize(self, session: ChatSession) -> Optional[MemorySummary]:
        if session.ended_at is not None:
            raise ConflictError("session already ended")
        summary = None
        if any(t.role == "user" for t in session.turns):
            messages = [{"role": "system", "content": self.prompts.chain_prompt("summarize")}]
            messages += self._transcript(session)
            result = self.provider.complete(CompletionRequest(messages=messages, temperature=0.0))
            if not result.text:
                raise ProviderError("summarization returned no text")
            summary = MemorySummary(timestamp=self.clock(),
                                    session_id=session.session_id, text=result.text)
            self.memory.add(session.user_id, summary)
        session.ended_at = self.clock()
        self._active.pop(session.user_id, None)
        return summary

    # --- context ------------------------------------------------------------

    def _transcript(self, session: ChatSession, pending_user: Optional[str] = None) -> List[dict]:
        messages = [
            {"role": "user" if t.role == "user" else "assistant", "content": t.text}
            for t in session.turns
        ]
        if pending_user is not None:
            messages.append({"role": "user", "content": pending_user})
        return messages

    def build_context(self, user_id: str, session: ChatSession,
                      pending_user: Optional[str] = None) -> List[dict]:
        """System prompt, memory block, plan snapshot, then the transcript."""
        messages = [{
            "role": "system",
            "content": self.prompts.system_prompt(session.mode.value,
                                                  session.current_state.state_id),
        }]
        block = self.memory.render_block(user_id)
        if block:
            messages.append({"role": "system", "content": block})
        plan = self.plans.current(user_id)
        if plan is not None:
            messages.append({"role": "system",
                             "content": "Current weekly plan:\n" + canonical_json(plan_to_dict(plan))})
        else:
            messages.append({"role": "system", "content": "The user has no weekly plan yet."})
        messages.extend(self._transcript(session, pending_user))
        return messages

    # --- pipeline -----------------------------------------------------------

    def step(self, session: ChatSession, user_message: str) -> Turn:
        if session.ended_at is not None:
            raise ConflictError("session has ended")

        if uses_state_chain(session.mode):
            self._advance_state(session, user_message)

        strategy = self._predict_strategy(session, user_message)
        text, tool_logs, widgets = self._generate_response(session, user_message, strategy)

        history = self._transcript(session)
        filtered = self.safety.filter_message(user_message, text, history)

        session.turns.append(Turn(role="user", text=user_message))
        agent_turn = Turn(role="agent", text=filtered.text, strategy=strategy,
                          tool_calls=tool_logs, safety_outcome=filtered.outcome.value,
                          widgets=widgets)
        session.turns.append(agent_turn)
        return agent_turn

    def _advance_state(self, session: ChatSession, user_message: str) -> None:
        current = session.current_state
        legal = legal_next_states(session.mode, current.state_id)
        prompt = self.prompts.chain_prompt(
            "dialogue_state", current_state=current.state_id, legal_states=", ".join(legal))
        messages = [{"role": "system", "content": prompt}]
        messages += self._transcript(session, pending_user=user_message)
        result = self.provider.complete(CompletionRequest(messages=messages, temperature=0.0))
        proposed = (result.text or "").strip()

        accepted = proposed
        if proposed not in legal:
            logger.debug("illegal state proposal %r from %r; staying", proposed, current.state_id)
            accepted = current.state_id
        elif (proposed != current.state_id
              and current.advance_gate == GATE_PLAN_GENERATED
              and not session.plan_generated):
            # Gate: no leaving goal setting until a plan has been generated.
            accepted = current.state_id
        session.transition_log.append((current.state_id, proposed, accepted))
        if accepted != current.state_id:
            session.current_state = dialogue_state(session.mode, accepted)

    def _predict_strategy(self, session: ChatSession, user_message: str) -> str:
        prompt = self.prompts.chain_prompt("mi_strategy", strategies=", ".join(MI_STRATEGIES))
        messages = [{"role": "system", "content": prompt}]
        messages += self._transcript(session, pending_user=user_message)
        result = self.provider.complete(CompletionRequest(messages=messages, temperature=0.0))
        raw = (result.text or "").strip()
        for code in MI_STRATEGIES:
            if raw.lower() == code.lower():
                return code
        raise ProviderError(f"unrecognized strategy code: {raw!r}")

    def _generate_response(self, session: ChatSession, user_message: str, strategy: str):
        messages = self.build_context(session.user_id, session, pending_user=user_message)
        messages.append({"role": "system",
                         "content": f"Respond using the {strategy} strategy."})
        schemas = [TOOL_SCHEMAS[name] for name in sorted(session.current_state.allowed_tools)]
        tool_logs: List[ToolCallLog] = []
        widgets: List[Widget] = []
        depth = 0
        while True:
            include_tools = depth < self.max_tool_depth
            result = self.provider.complete(CompletionRequest(
                messages=messages,
                tool_schemas=schemas if include_tools else [],
                temperature=self.response_temperature,
            ))
            if result.tool_call is None:
                if result.text is None:
                    raise ProviderError("response chain produced neither text nor a tool call")
                return result.text, tool_logs, widgets
            if not include_tools:
                raise ProviderError("tool-call budget exhausted for this turn")
            outcome = self.dispatch_tool(session, result.tool_call)
            tool_logs.append(self.dispatch_log[-1])
            widgets.extend(outcome.widgets)
            messages.append({"role": "assistant", "content": canonical_json(
                {"toolCall": {"name": result.tool_call.name,
                              "arguments": result.tool_call.arguments_json}})})
            messages.append({"role": "tool", "content": canonical_json(outcome.payload)})
            depth += 1

    # --- tools --------------------------------------------------------------

    def dispatch_tool(self, session: ChatSession, call: ToolCall) -> ToolOutcome:
        """Validate and execute one tool call; errors go back to the model."""
        allowed = call.name in session.current_state.allowed_tools
        log = ToolCallLog(name=call.name, arguments_json=call.arguments_json, ok=False,
                          state_id=session.current_state.state_id, allowed=allowed)
        self.dispatch_log.append(log)
        if not allowed:
            log.error = "permission"
            return ToolOutcome(call.name, False, {
                "error": "permission",
                "message": f"tool {call.name!r} is not available in this conversation",
            })
        try:
            args = call.arguments()
        except ProviderError as exc:
            log.error = "invalid_arguments"
            return ToolOutcome(call.name, False,
                               {"error": "invalid_arguments", "message": str(exc)})
        try:
            outcome = self._execute_tool(session, call.name, args)
        except (ValidationError, NotFoundError, ValueError) as exc:
            log.error = "invalid_arguments"
            return ToolOutcome(call.name, False,
                               {"error": "invalid_arguments", "message": str(exc)})
        except ProviderError as exc:
            log.error = "tool_failed"
            return ToolOutcome(call.name, False,
                               {"error": "tool_failed", "message": str(exc)})
        log.ok = True
        return outcome

    def _execute_tool(self, session: ChatSession, name: str, args: dict) -> ToolOutcome:
        if name == "query_health_data":
            return self._tool_query_health(session, args)
        if name == "generate_plan":
            return self._tool_generate_plan(session)
        if name == "add_workout":
            return self._tool_add_workout(session, args)
        if name == "delete_workout":
            return self._tool_delete_workout(session, args)
        raise ValidationError(f"no such tool: {name!r}")

    def _tool_query_health(self, session: ChatSession, args: dict) -> ToolOutcome:
        try:
            kind = SampleKind(args["sample_type"])
        except (KeyError, ValueError):
            raise ValidationError(f"unknown sample_type: {args.get('sample_type')!r}") from None
        level = AggregationLevel(args.get("aggregation_level", "month"))
        reference = parse_reference_date(str(args.get("reference_date", "today")), self.clock())
        show_user = bool(args.get("show_user", False))
        query = AggregationQuery(kind, reference, level, show_user)
        result = query_health_data(self.health, session.user_id, query)
        widgets = [Widget("chart", result.to_dict())] if show_user else []
        return ToolOutcome("query_health_data", True, result.to_dict(), widgets)

    def _tool_generate_plan(self, session: ChatSession) -> ToolOutcome:
        current = self.plans.current(session.user_id)
        if current is not None:
            week_index = current.week_index + (1 if session.mode is Mode.CHECKIN else 0)
        else:
            week_index = 1
        from .plan import week_start_for  # local to avoid a cycle at import time
        week_start = week_start_for(self.clock().date())
        prompt = self.prompts.chain_prompt(
            "plan_generation", week_start=week_start.isoformat(), week_index=week_index)
        messages = [{"role": "system", "content": prompt}]
        messages += self._transcript(session)
        if current is not None:
            messages.append({"role": "system",
                             "content": "Previous plan:\n" + canonical_json(plan_to_dict(current))})
        result = self.provider.complete(CompletionRequest(messages=messages, temperature=0.0))
        if not result.text:
            raise ProviderError("plan generation returned no text")
        payload = result.text.strip()
        if payload.startswith("```"):
            payload = payload.strip("`\n")
            if payload.startswith("json"):
                payload = payload[4:]
        import json as _json
        try:
            data = _json.loads(payload)
        except _json.JSONDecodeError as exc:
            raise ValidationError(f"generated plan is not valid JSON: {exc}") from exc
        plan = plan_from_dict(data)
        check = validate_plan(plan)
        if not check.ok:
            rules = "; ".join(f"{v.workout_id}: {v.rule}" for v in check.violations)
            raise ValidationError(f"generated plan violates invariants: {rules}")
        self.plans.save(session.user_id, plan)
        session.plan_generated = True
        plan_payload = plan_to_dict(plan)
        return ToolOutcome("generate_plan", True, plan_payload,
                           widgets=[Widget("plan", plan_payload)])

    def _tool_add_workout(self, session: ChatSession, args: dict) -> ToolOutcome:
        plan = self.plans.current(session.user_id)
        if plan is None:
            raise ValidationError("the user has no current plan to edit")
        data = dict(args)
        data.setdefault("id", self._next_workout_id(plan))
        data.setdefault("intensity", "moderate")
        spec = workout_from_dict(data)
        add_workout(plan, spec, Actor.AGENT_TOOL, now=self.clock())
        self.plans.save(session.user_id, plan)
        payload = plan_to_dict(plan)
        return ToolOutcome("add_workout", True, payload, widgets=[Widget("plan", payload)])

    def _tool_delete_workout(self, session: ChatSession, args: dict) -> ToolOutcome:
        plan = self.plans.current(session.user_id)
        if plan is None:
            raise ValidationError("the user has no current plan to edit")
        workout_id = args.get("workoutId") or args.get("id")
        if not workout_id:
            raise ValidationError("delete_workout requires workoutId")
        delete_workout(plan, str(workout_id), Actor.AGENT_TOOL, now=self.clock())
        self.plans.save(session.user_id, plan)
        payload = plan_to_dict(plan)
        return ToolOutcome("delete_workout", True, payload, widgets=[Widget("plan", payload)])

    @staticmethod
    def _next_workout_id(plan: WeeklyPlan) -> str:
        existing = {w.id for w in plan.workouts}
        n = len(existing) + 1
        while f"w{n}" in existing:
            n += 1
        return f"w{n}"
