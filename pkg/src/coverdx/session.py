"""Sequential diagnostic sessions.

A session accumulates findings one answer at a time, rebuilds the
candidate hypotheses from scratch after every answer (a pure function of
knowledge base, config, and observations), picks the most discriminating
next question, and stops once the top hypothesis is convincing enough or
nothing informative is left to ask. State transitions are pure: every
operation returns a new state, and replaying a transcript reproduces the
final state exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .covering import DEFAULT_MAX_COVER_SIZE, covers_for_mode
from .errors import AlreadyObservedError, ConfigError, SessionNotInProgressError
from .kb import Finding, KnowledgeBase, present_set
from .questions import next_question
from .scoring import ScoredHypothesis, ScoringStrategy, rank_hypotheses

MODES = ("single-fault", "multiple-fault")

DEFAULT_THRESHOLD = 0.95
DEFAULT_QUESTION_BUDGET = 50


class Status(str, Enum):
    IN_PROGRESS = "in-progress"
    CONCLUDED = "concluded"
    EXHAUSTED = "exhausted"


class StoppingReason(str, Enum):
    THRESHOLD_MET = "threshold-met"
    NO_INFORMATIVE_QUESTION = "no-informative-question"
    BUDGET_SPENT = "budget-spent"
    STILL_OPEN = "still-open"


@dataclass(frozen=True)
class SessionConfig:
    mode: str = "single-fault"
    max_cover_size: int = DEFAULT_MAX_COVER_SIZE
    conclusion_threshold: float = DEFAULT_THRESHOLD
    question_budget: int = DEFAULT_QUESTION_BUDGET
    costs_enabled: bool = False
    strategy: ScoringStrategy = field(default_factory=ScoringStrategy)

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode: {self.mode}")
        if self.max_cover_size < 1:
            raise ConfigError(f"max_cover_size must be >= 1, got {self.max_cover_size}")
        if not 0.0 < self.conclusion_threshold <= 1.0:
            raise ConfigError(
                f"conclusion_threshold must be in (0, 1], got {self.conclusion_threshold}"
            )
        if self.question_budget < 1:
            raise ConfigError(f"question_budget must be >= 1, got {self.question_budget}")

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "max_cover_size": self.max_cover_size,
            "conclusion_threshold": self.conclusion_threshold,
            "question_budget": self.question_budget,
            "costs_enabled": self.costs_enabled,
            "strategy": {
                "name": self.strategy.name,
                "parameters": dict(self.strategy.parameters),
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> SessionConfig:
        strategy_doc = data.get("strategy") or {}
        config = cls(
            mode=data.get("mode", "single-fault"),
            max_cover_size=int(data.get("max_cover_size", DEFAULT_MAX_COVER_SIZE)),
            conclusion_threshold=float(data.get("conclusion_threshold", DEFAULT_THRESHOLD)),
            question_budget=int(data.get("question_budget", DEFAULT_QUESTION_BUDGET)),
            costs_enabled=bool(data.get("costs_enabled", False)),
            strategy=ScoringStrategy(
                name=strategy_doc.get("name", "bayes-noisy-or"),
                parameters=dict(strategy_doc.get("parameters") or {}),
            ),
        )
        config.validate()
        return config


@dataclass(frozen=True)
class SessionState:
    kb: KnowledgeBase
    config: SessionConfig
    observations: dict[str, Finding]
    candidates: tuple[ScoredHypothesis, ...]
    next: str | None
    status: Status
    transcript: tuple[tuple[str, Finding], ...]

    @property
    def top(self) -> ScoredHypothesis:
        return self.candidates[0]


def _coerce_finding(finding) -> Finding:
    if isinstance(finding, Finding):
        return finding
    try:
        return Finding(str(finding))
    except ValueError:
        raise ValueError(
            f"finding must be one of present/absent/unknown, got {finding!r}"
        ) from None


def _candidate_sets(kb: KnowledgeBase, config: SessionConfig, present) -> list[frozenset]:
    candidates = covers_for_mode(kb, present, config.mode, config.max_cover_size)
    # No cover within the size bound (or an unexplainable symptom): keep the
    # empty hypothesis so the session survives with all-zero posteriors and
    # the summary can report what stayed uncovered.
    return candidates or [frozenset()]


def _build_state(
    kb: KnowledgeBase,
    config: SessionConfig,
    observations: dict[str, Finding],
    transcript: tuple[tuple[str, Finding], ...],
) -> SessionState:
    present = present_set(observations)
    ranked = tuple(
        rank_hypotheses(kb, _candidate_sets(kb, config, present), observations, config.strategy)
    )
    top = ranked[0]
    answered = len(transcript)
    unobserved = [s for s in kb.symptom_ids if s not in observations]

    # A threshold conclusion needs something to explain: with no present
    # symptoms the top hypothesis is the vacuous "no fault", which must not
    # end a session that has barely started (or seen only absences).
    concluded = (
        bool(present)
        and top.posterior >= config.conclusion_threshold
        and top.covers_all
    )
    if concluded:
        question = None
        status = Status.CONCLUDED
    else:
        question = (
            next_question(kb, ranked, observations, config.costs_enabled) if unobserved else None
        )
        if answered >= config.question_budget:
            status = Status.EXHAUSTED
        elif not unobserved:
            status = Status.EXHAUSTED
        elif question is None and answered > 0:
            status = Status.EXHAUSTED
        else:
            # A fresh session stays open even when no question is informative
            # yet (degenerate candidate sets): the operator may volunteer
            # findings before the engine has anything to ask.
            status = Status.IN_PROGRESS

    return SessionState(
        kb=kb,
        config=config,
        observations=dict(observations),
        candidates=ranked,
        next=question,
        status=status,
        transcript=transcript,
    )


def start_session(kb: KnowledgeBase, config: SessionConfig | None = None) -> SessionState:
    """Open a session with no findings recorded yet."""
    config = config or SessionConfig()
    config.validate()
    return _build_state(kb, config, {}, ())


def submit_answer(state: SessionState, symptom: str, finding) -> SessionState:
    """Record one finding and return the advanced session state.

    An unknown finding marks the symptom as asked-and-skipped: it will not
    be asked again but contributes nothing to the scores.
    """
    if state.status != Status.IN_PROGRESS:
        raise SessionNotInProgressError(f"session is {state.status.value}")
    state.kb.symptom(symptom)
    if symptom in state.observations:
        raise AlreadyObservedError(f"symptom {symptom} already has a recorded finding")
    finding = _coerce_finding(finding)

    observations = dict(state.observations)
    observations[symptom] = finding
    transcript = state.transcript + ((symptom, finding),)
    return _build_state(state.kb, state.config, observations, transcript)


def what_if(state: SessionState, symptom: str, finding) -> SessionState:
    """Preview the state submit_answer would produce; the input is untouched."""
    return submit_answer(state, symptom, finding)


def replay_transcript(
    kb: KnowledgeBase,
    config: SessionConfig | None,
    entries: Iterable[tuple[str, Finding | str]],
) -> SessionState:
    """Rebuild a session by replaying answers in order."""
    state = start_session(kb, config)
    for symptom, finding in entries:
        state = submit_answer(state, symptom, finding)
    return state


def stopping_reason(state: SessionState) -> StoppingReason:
    if state.status == Status.CONCLUDED:
        return StoppingReason.THRESHOLD_MET
    if state.status == Status.EXHAUSTED:
        if len(state.transcript) >= state.config.question_budget:
            return StoppingReason.BUDGET_SPENT
        return StoppingReason.NO_INFORMATIVE_QUESTION
    return StoppingReason.STILL_OPEN


@dataclass(frozen=True)
class SessionSummary:
    status: Status
    reason: StoppingReason
    explanations: tuple[ScoredHypothesis, ...]
    uncovered: tuple[str, ...]
    transcript: tuple[tuple[str, Finding], ...]
    note: str

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "stopping_reason": self.reason.value,
            "explanations": [h.to_dict() for h in self.explanations],
            "uncovered_symptoms": list(self.uncovered),
            "transcript": [
                {"symptom": s, "finding": f.value} for s, f in self.transcript
            ],
            "note": self.note,
        }


NORMALIZATION_NOTE = (
    "posteriors are normalized over the enumerated candidate set only, "
    "not over all possible fault sets"
)


def summary(state: SessionState) -> SessionSummary:
    """Deterministic closing report for any session state."""
    present = present_set(state.observations)
    top = state.top
    uncovered = tuple(sorted(s for s in present if not (state.kb.causes(s) & top.faults)))
    return SessionSummary(
        status=state.status,
        reason=stopping_reason(state),
        explanations=state.candidates,
        uncovered=uncovered,
        transcript=state.transcript,
        note=NORMALIZATION_NOTE,
    )


# -- transcript persistence ------------------------------------------------


def transcript_to_json(transcript: Sequence[tuple[str, Finding]]) -> str:
    return json.dumps([{"symptom": s, "finding": f.value} for s, f in transcript]) + "\n"


def transcript_from_json(text: str) -> list[tuple[str, Finding]]:
    entries = json.loads(text)
    return [(e["symptom"], Finding(e["finding"])) for e in entries]
