"""Measure of fit between fault hypotheses and the observation state.

Two strategies are implemented: a Bayesian score built on per-link causal
strengths combined by noisy-OR (faults produce symptoms independently, no
leak by default), and a heuristic weighted-match ratio for settings where
priors are unavailable or untrusted. Dempster-Shafer and fuzzy strategies
are recognized names but not implemented.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import ConfigError, NoCauseError
from .kb import Finding, KnowledgeBase, ObservationState, present_set, validate_observations

STRATEGY_NAMES = ("bayes-noisy-or", "heuristic-match", "dempster-shafer", "fuzzy")

FaultSet = frozenset[str]


@dataclass(frozen=True)
class ScoringStrategy:
    """Named scoring strategy plus free-form numeric parameters.

    Recognized parameters: "leak" (background probability that a symptom
    appears with no cause in the hypothesis; defaults to 0).
    """

    name: str = "bayes-noisy-or"
    parameters: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in STRATEGY_NAMES:
            raise ConfigError(f"unknown scoring strategy: {self.name}")

    @property
    def leak(self) -> float:
        return float(self.parameters.get("leak", 0.0))


@dataclass(frozen=True)
class ScoredHypothesis:
    faults: FaultSet
    raw_score: float
    posterior: float
    covers_all: bool

    def to_dict(self) -> dict:
        return {
            "faults": sorted(self.faults),
            "raw_score": self.raw_score,
            "posterior": self.posterior,
            "covers_all": self.covers_all,
        }


def symptom_probability(
    kb: KnowledgeBase, faults: Iterable[str], symptom: str, leak: float = 0.0
) -> float:
    """P(symptom present | exactly the given faults), noisy-OR combined.

    Each fault in the hypothesis independently produces the symptom with
    its link's causal strength; an unlinked fault contributes nothing. With
    no leak, the empty hypothesis gives probability 0.
    """
    kb.symptom(symptom)
    miss = 1.0 - leak
    for f in frozenset(faults):
        miss *= 1.0 - kb.strength(f, symptom)
        kb.fault(f)
    return 1.0 - miss


def hypothesis_score(
    kb: KnowledgeBase,
    faults: Iterable[str],
    obs: ObservationState,
    leak: float = 0.0,
) -> float:
    """Unnormalized posterior mass of the hypothesis given the observations.

    Product of the fault-set prior (independent per-fault priors) and the
    likelihood of every recorded present/absent finding under noisy-OR.
    Unknown findings contribute nothing.
    """
    fault_set = frozenset(faults)
    for f in fault_set:
        kb.fault(f)
    validate_observations(kb, obs)

    score = 1.0
    for f in kb.faults:
        score *= f.prior if f.id in fault_set else 1.0 - f.prior
    for symptom_id, finding in obs.items():
        if finding == Finding.PRESENT:
            score *= symptom_probability(kb, fault_set, symptom_id, leak)
        elif finding == Finding.ABSENT:
            score *= 1.0 - symptom_probability(kb, fault_set, symptom_id, leak)
    return score


def heuristic_match_score(
    kb: KnowledgeBase, faults: Iterable[str], obs: ObservationState
) -> float:
    """Weighted-match ratio in [0, 1]: strength mass on covered present
    symptoms over the hypothesis's total strength mass, with a unit penalty
    per uncovered present symptom. 1.0 for the vacuous empty case."""
    fault_set = frozenset(faults)
    for f in fault_set:
        kb.fault(f)
    validate_observations(kb, obs)
    present = present_set(obs)

    covered_mass = 0.0
    total_mass = 0.0
    for f in fault_set:
        for s in kb.effects(f):
            w = kb.strength(f, s)
            total_mass += w
            if s in present:
                covered_mass += w
    uncovered = sum(1 for s in present if not (kb.causes(s) & fault_set))
    denominator = total_mass + uncovered
    if denominator == 0.0:
        return 1.0
    return covered_mass / denominator


def score_hypothesis(
    kb: KnowledgeBase,
    faults: Iterable[str],
    obs: ObservationState,
    strategy: ScoringStrategy | None = None,
) -> float:
    """Dispatch to the strategy's raw score."""
    strategy = strategy or ScoringStrategy()
    if strategy.name == "bayes-noisy-or":
        return hypothesis_score(kb, faults, obs, leak=strategy.leak)
    if strategy.name == "heuristic-match":
        return heuristic_match_score(kb, faults, obs)
    raise NotImplementedError(f"scoring strategy {strategy.name!r} is not implemented")


def rank_hypotheses(
    kb: KnowledgeBase,
    candidates: Iterable[FaultSet],
    obs: ObservationState,
    strategy: ScoringStrategy | None = None,
) -> list[ScoredHypothesis]:
    """Score and rank candidate fault sets against the observations.

    Posteriors are normalized over the supplied candidate set only (the
    covers produced upstream), not over the full joint. Order: posterior
    descending, then cardinality, then sorted fault ids; an all-zero score
    vector yields all-zero posteriors with coverage still reported.
    """
    candidate_list = [frozenset(c) for c in candidates]
    if not candidate_list:
        raise ValueError("candidates must be nonempty")
    present = present_set(obs)

    raw = [score_hypothesis(kb, c, obs, strategy) for c in candidate_list]
    total = sum(raw)
    scored = [
        ScoredHypothesis(
            faults=c,
            raw_score=r,
            posterior=(r / total) if total > 0.0 else 0.0,
            covers_all=all(kb.causes(s) & c for s in present),
        )
        for c, r in zip(candidate_list, raw)
    ]
    scored.sort(key=lambda h: (-h.posterior, len(h.faults), tuple(sorted(h.faults))))
    return scored


def derive_evoking_strength(kb: KnowledgeBase, symptom: str, fault: str) -> float:
    """Probability of the fault given the symptom, under a single-fault
    reading: prior-weighted share of the symptom's causal strength mass.

    A stored evoking strength on the link takes precedence over the
    derived value.
    """
    kb.fault(fault)
    link = kb.link(fault, symptom)
    if link is not None and link.evoking_strength is not None:
        return link.evoking_strength
    cause_ids = kb.causes(symptom)
    if not cause_ids:
        raise NoCauseError(f"symptom {symptom} has no causes; inversion undefined")
    total = sum(kb.fault(g).prior * kb.strength(g, symptom) for g in cause_ids)
    if total <= 0.0:
        raise NoCauseError(f"symptom {symptom} has zero total causal mass; inversion undefined")
    return kb.fault(fault).prior * kb.strength(fault, symptom) / total


def entropy_bits(probabilities: Iterable[float]) -> float:
    """Shannon entropy in bits over the positive entries."""
    return -sum(p * math.log2(p) for p in probabilities if p > 0.0)
