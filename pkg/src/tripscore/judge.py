"""Pluggable judge port for the three LLM-rated sub-criteria, with a
deterministic offline mock and a generic HTTP chat adapter.

The rule pipeline never waits on a judge: rule sub-scores are computed
before any judge call is issued, and judge calls for one itinerary may run
concurrently subject to a process-wide in-flight cap.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
from dataclasses import dataclass, field
from typing import Optional, Protocol

import httpx

from .errors import JudgeMalformedResponse, JudgeUnavailable, UnknownPlaceholder
from . import prompts

_PLACEHOLDER_RE = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")


def render_prompt(template: str, bindings: dict[str, str]) -> str:
    """Byte-exact substitution of ``{name}`` placeholders.

    Raises :class:`UnknownPlaceholder` when the template names a
    placeholder with no binding. Brace blocks that are not bare
    identifiers (the JSON examples in the shipped templates) pass through
    untouched.
    """
    def _sub(match: re.Match) -> str:
        key = match.group(1)
        if key not in bindings:
            raise UnknownPlaceholder(f"no binding for placeholder {{{key}}}")
        return bindings[key]

    return _PLACEHOLDER_RE.sub(_sub, template)


@dataclass(frozen=True)
class IconicRating:
    rating: int
    missing_attractions: tuple[str, ...] = ()
    explanation: str = ""
    clamped: bool = False


@dataclass(frozen=True)
class DiversityRating:
    rating: int
    diversity_issues: tuple[str, ...] = ()
    explanation: str = ""
    clamped: bool = False


@dataclass(frozen=True)
class UserRequestRating:
    final_score: int
    detailed_feedback: str = ""
    clamped: bool = False


class JudgePort(Protocol):
    def rate_iconic(self, itinerary_text: str) -> IconicRating: ...

    def rate_diversity(self, itinerary_text: str) -> DiversityRating: ...

    def rate_user_request(self, request_text: str, itinerary_text: str) -> UserRequestRating: ...


def _stable_hash(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")


class MockJudge:
    """Offline deterministic judge: rating = 1 + hash(salt, criterion, text) mod 5."""

    def __init__(self, seed_text: str = ""):
        self.seed_text = seed_text

    def _rating(self, criterion: str, text: str) -> int:
        return 1 + _stable_hash(f"{self.seed_text}\x00{criterion}\x00{text}") % 5

    def rate_iconic(self, itinerary_text: str) -> IconicRating:
        return IconicRating(rating=self._rating("iconic", itinerary_text))

    def rate_diversity(self, itinerary_text: str) -> DiversityRating:
        return DiversityRating(rating=self._rating("diversity", itinerary_text))

    def rate_user_request(self, request_text: str, itinerary_text: str) -> UserRequestRating:
        score = self._rating("user_request", request_text + "\x00" + itinerary_text)
        return UserRequestRating(final_score=score)


def mock_judge(seed_text: str = "") -> MockJudge:
    return MockJudge(seed_text)


class ConstantJudge:
    """Fixed-rating judge, handy for tests and ceiling checks."""

    def __init__(self, rating: int = 5):
        self.rating = rating

    def rate_iconic(self, itinerary_text: str) -> IconicRating:
        return IconicRating(rating=self.rating)

    def rate_diversity(self, itinerary_text: str) -> DiversityRating:
        return DiversityRating(rating=self.rating)

    def rate_user_request(self, request_text: str, itinerary_text: str) -> UserRequestRating:
        return UserRequestRating(final_score=self.rating)


@dataclass
class JudgeConfig:
    endpoint_url: str = ""
    model_name: str = ""
    api_key: str = ""
    temperature: float = 0.0
    timeout_seconds: float = 30.0
    max_retries: int = 2
    max_in_flight: int = 8
    prompt_overrides: dict = field(default_factory=dict)

    @classmethod
    def from_env(cls) -> "JudgeConfig":
        return cls(
            endpoint_url=os.environ.get("JUDGE_URL", ""),
            model_name=os.environ.get("JUDGE_MODEL", ""),
            api_key=os.environ.get("JUDGE_API_KEY", ""),
        )


def extract_json_object(text: str) -> dict:
    """First balanced JSON object inside a possibly chatty reply."""
    depth = 0
    start = None
    in_string = False
    escaped = False
    for i, ch in enumerate(text):
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "}":
            if depth > 0:
                depth -= 1
                if depth == 0 and start is not None:
                    try:
                        return json.loads(text[start : i + 1])
                    except json.JSONDecodeError:
                        start = None  # keep scanning past this candidate
    raise JudgeMalformedResponse("no parsable JSON object in judge reply")


def _clamp(value, lo: int, hi: int) -> tuple[int, bool]:
    try:
        number = int(round(float(value)))
    except (TypeError, ValueError) as exc:
        raise JudgeMalformedResponse(f"non-numeric rating {value!r}") from exc
    if number < lo:
        return lo, True
    if number > hi:
        return hi, True
    return number, False


class HttpJudge:
    """Chat-completions-style HTTP adapter.

    Sends ``{model, temperature, messages:[{role: user, content: prompt}]}``
    and reads the first textual content field out of the reply. Retries
    transport failures and malformed replies up to ``max_retries`` extra
    attempts; out-of-range ratings are clamped and flagged rather than
    rejected so batch jobs stay alive.
    """

    def __init__(self, config: JudgeConfig, client: Optional[httpx.Client] = None):
        if not config.endpoint_url:
            raise JudgeUnavailable("no judge endpoint configured")
        self.config = config
        headers = {}
        if config.api_key:
            headers["Authorization"] = f"Bearer {config.api_key}"
        self._client = client or httpx.Client(
            timeout=config.timeout_seconds, headers=headers
        )
        self._gate = threading.Semaphore(config.max_in_flight)

    def _template(self, name: str, default: str) -> str:
        return self.config.prompt_overrides.get(name, default)

    def _first_content(self, payload) -> str:
        if isinstance(payload, dict):
            for key, value in payload.items():
                if key == "content" and isinstance(value, str):
                    return value
                found = self._first_content(value)
                if found is not None:
                    return found
        elif isinstance(payload, list):
            for item in payload:
                found = self._first_content(item)
                if found is not None:
                    return found
        return None

    def _call(self, prompt: str) -> dict:
        body = {
            "model": self.config.model_name,
            "temperature": self.config.temperature,
            "messages": [{"role": "user", "content": prompt}],
        }
        last_error: Exception | None = None
        for _attempt in range(self.config.max_retries + 1):
            try:
                with self._gate:
                    response = self._client.post(self.config.endpoint_url, json=body)
                response.raise_for_status()
                content = self._first_content(response.json())
                if content is None:
                    raise JudgeMalformedResponse("reply carries no text content field")
                return extract_json_object(content)
            except (httpx.TransportError, httpx.HTTPStatusError) as exc:
                last_error = JudgeUnavailable(f"judge endpoint failed: {exc}")
            except (JudgeMalformedResponse, json.JSONDecodeError) as exc:
                last_error = (
                    exc
                    if isinstance(exc, JudgeMalformedResponse)
                    else JudgeMalformedResponse(str(exc))
                )
        raise last_error

    def rate_iconic(self, itinerary_text: str) -> IconicRating:
        prompt = render_prompt(
            self._template("iconic", prompts.ICONIC_LANDMARKS_EVALUATION_PROMPT),
            {"answer_text": itinerary_text},
        )
        reply = self._call(prompt)
        rating, clamped = _clamp(reply.get("score"), 1, 5)
        return IconicRating(
            rating=rating,
            missing_attractions=tuple(reply.get("missing_attractions", ())),
            explanation=str(reply.get("explanation", "")),
            clamped=clamped,
        )

    def rate_diversity(self, itinerary_text: str) -> DiversityRating:
        prompt = render_prompt(
            self._template("diversity", prompts.ATTRACTION_DIVERSITY_EVALUATION_PROMPT),
            {"answer_text": itinerary_text},
        )
        reply = self._call(prompt)
        rating, clamped = _clamp(reply.get("score"), 1, 5)
        return DiversityRating(
            rating=rating,
            diversity_issues=tuple(reply.get("diversity_issues", ())),
            explanation=str(reply.get("explanation", "")),
            clamped=clamped,
        )

    def rate_user_request(self, request_text: str, itinerary_text: str) -> UserRequestRating:
        prompt = render_prompt(
            self._template("user_request", prompts.USER_PREFERENCE_CONSTRAINT_PROMPT),
            {"user_request": request_text, "answer_text": itinerary_text},
        )
        reply = self._call(prompt)
        # Field naming drifts between criteria: normalize score/final_score.
        raw = reply.get("final_score", reply.get("score"))
        rating, clamped = _clamp(raw, 0, 5)
        return UserRequestRating(
            final_score=rating,
            detailed_feedback=str(reply.get("detailed_feedback", "")),
            clamped=clamped,
        )


def http_judge(config: JudgeConfig, client: Optional[httpx.Client] = None) -> HttpJudge:
    return HttpJudge(config, client=client)
