"""Classify-and-revise safety pipeline for outbound coach messages.

Five domain-specific harm categories each get an independent few-shot
classifier call at temperature zero. A message flagged in any category is
revised once and re-classified; if it is still flagged, a fixed fallback is
emitted instead. The pipeline fails safe throughout: unparseable classifier
output counts as harmful, and every internal failure degrades to the
fallback, never to the unfiltered candidate.

Per message that means at most 11 provider calls: 5 to classify, 1 to
revise, 5 to re-classify.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional

from .errors import ProviderError
from .provider import CompletionRequest, LLMProvider

logger = logging.getLogger(__name__)

FALLBACK_TEXT = (
    "I want to be careful here, so I'd rather not answer that directly. "
    "If this touches on pain, health worries, or how you're feeling about "
    "yourself, a medical or mental-health professional is the right person "
    "to talk to. I'm happy to keep helping with your activity plan."
)


class HarmCategory(str, Enum):
    BODILY_HARM = "bodilyHarm"
    BODY_IMAGE = "bodyImage"
    MENTAL_HEALTH = "mentalHealth"
    NEGATIVE_MINDSETS = "negativeMindsets"
    INACCURATE_ADVICE = "inaccurateAdvice"


# Decision criteria handed to each category's classifier call.
CATEGORY_DEFINITIONS: Dict[HarmCategory, str] = {
    HarmCategory.BODILY_HARM: (
        "The user may be in pain or could get hurt; a safe coach reply "
        "acknowledges the risk, advises stopping when warranted, and points "
        "to a medical professional."
    ),
    HarmCategory.BODY_IMAGE: (
        "The user shows signs of negative body image, disordered eating, or "
        "appearance- or weight-driven goals; a safe reply keeps boundaries, "
        "avoids reinforcing the pattern, and redirects toward activity and "
        "professional support."
    ),
    HarmCategory.MENTAL_HEALTH: (
        "The user shows signs of mental-health struggles beyond body image; "
        "a safe reply is supportive and non-clinical and escalates to "
        "professional help when needed."
    ),
    HarmCategory.NEGATIVE_MINDSETS: (
        "The user's motivation comes from guilt, shame, or low self-worth; "
        "a safe reply declines to validate that framing and reframes it "
        "positively."
    ),
    HarmCategory.INACCURATE_ADVICE: (
        "The coach reply gives advice or information beyond an activity "
        "coach's scope, or gets an in-scope fact wrong or leaves a user "
        "misunderstanding uncorrected."
    ),
}


@dataclass
class CategoryVerdict:
    harmful: bool
    rationale: str


@dataclass
class SafetyVerdict:
    per_category: Dict[HarmCategory, CategoryVerdict]

    @property
    def any_harmful(self) -> bool:
        return any(v.harmful for v in self.per_category.values())

    def flagged(self) -> List[HarmCategory]:
        return [c for c, v in self.per_category.items() if v.harmful]


class FilterOutcome(str, Enum):
    CLEAN = "clean"
    REVISED = "revised"
    BLOCKED = "blocked"


@dataclass
class FilterResult:
    text: str
    outcome: FilterOutcome
    verdict: SafetyVerdict
    final_verdict: Optional[SafetyVerdict] = None


def _parse_verdict(text: str) -> CategoryVerdict:
    """Parse a classifier reply; anything unusable raises for fail-safe handling."""
    try:
        data = json.loads(text)
        return CategoryVerdict(harmful=bool(data["harmful"]),
                               rationale=str(data.get("rationale", "")))
    except (json.JSONDecodeError, TypeError, KeyError):
        pass
    lowered = text.strip().lower()
    if lowered.startswith("harmful:"):
        flag = lowered.split(":", 1)[1].strip()
        if flag in ("yes", "true", "no", "false"):
            return CategoryVerdict(harmful=flag in ("yes", "true"), rationale=text)
    raise ProviderError(f"unparseable classifier output: {text[:80]!r}")


class SafetyPipeline:
    def __init__(self, provider: LLMProvider, few_shot: Optional[Dict[HarmCategory, str]] = None):
        self.provider = provider
        self.few_shot = few_shot or {}

    def _classifier_messages(self, category: HarmCategory, user_query: str,
                             agent_response: str) -> List[dict]:
        system = (
            "You review one reply from a physical-activity coach for a single "
            f"risk category.\nCategory: {category.value}\n"
            f"Criteria: {CATEGORY_DEFINITIONS[category]}\n"
            'Answer with JSON only: {"harmful": true|false, "rationale": "<why>"}'
        )
        examples = self.few_shot.get(category)
        if examples:
            system += "\n\nExamples:\n" + examples
        return [
            {"role": "system", "content": system},
            {"role": "user", "content": f"User message: {user_query}\nCoach reply: {agent_response}"},
        ]

    def classify(self, user_query: str, agent_response: str) -> SafetyVerdict:
        """Five independent category rulings; failures count as harmful."""
        verdicts: Dict[HarmCategory, CategoryVerdict] = {}
        for category in HarmCategory:
            request = CompletionRequest(
                messages=self._classifier_messages(category, user_query, agent_response),
                temperature=0.0,
            )
            try:
                result = self.provider.complete(request)
                if result.text is None:
                    raise ProviderError("classifier returned a tool call")
                verdicts[category] = _parse_verdict(result.text)
            except ProviderError as exc:
                logger.warning("classifier failed for %s, treating as harmful: %s",
                               category.value, exc)
                verdicts[category] = CategoryVerdict(
                    harmful=True, rationale=f"classification error (fail-safe): {exc}")
        return SafetyVerdict(verdicts)

    def revise(self, user_query: str, harmful_response: str, verdict: SafetyVerdict,
               history: List[dict]) -> str:
        """One revision attempt; provider failure propagates to the caller."""
        rationales = "\n".join(
            f"- {c.value}: {verdict.per_category[c].rationale}" for c in verdict.flagged())
        transcript = "\n".join(f"{m.get('role', '?')}: {m.get('content', '')}" for m in history)
        messages = [
            {"role": "system", "content": (
                "A coach reply was flagged as unsafe. Rewrite it so it is safe "
                "per the flags below while still addressing the user. Reply "
                "with the rewritten message only.\nFlags:\n" + rationales)},
            {"role": "user", "content": (
                f"Conversation so far:\n{transcript}\n\n"
                f"User message: {user_query}\nFlagged reply: {harmful_response}")},
        ]
        result = self.provider.complete(CompletionRequest(messages=messages, temperature=0.0))
        if not result.text:
            raise ProviderError("revision returned no text")
        return result.text

    def filter_message(self, user_query: str, candidate: str,
                       history: Optional[List[dict]] = None) -> FilterResult:
        """Classify, revise once if needed, re-classify; block residual harm."""
        history = history or []
        verdict = self.classify(user_query, candidate)
        if not verdict.any_harmful:
            return FilterResult(candidate, FilterOutcome.CLEAN, verdict)
        try:
            revised = self.revise(user_query, candidate, verdict, history)
        except ProviderError as exc:
            logger.warning("revision failed, blocking message: %s", exc)
            return FilterResult(FALLBACK_TEXT, FilterOutcome.BLOCKED, verdict)
        final = self.classify(user_query, revised)
        if final.any_harmful:
            return FilterResult(FALLBACK_TEXT, FilterOutcome.BLOCKED, verdict, final)
        return FilterResult(revised, FilterOutcome.REVISED, verdict, final)
