"""Next-question selection: rank unobserved symptoms by how much one
answer is expected to shrink the uncertainty over the ranked hypotheses.

The gain is myopic (one question ahead) with a binary present/absent
outcome model; an unknown answer carries no information and is handled by
the session layer, not here.
"""

from __future__ import annotations

import math
from typing import Sequence

from .errors import AlreadyObservedError
from .kb import KnowledgeBase, ObservationState
from .scoring import ScoredHypothesis, entropy_bits, symptom_probability

# Gains at or below this are treated as zero information: never worth a question.
GAIN_EPSILON = 1e-12


def posterior_entropy(ranked: Sequence[ScoredHypothesis]) -> float:
    """Shannon entropy (bits) of the normalized posteriors."""
    return entropy_bits(h.posterior for h in ranked)


def information_gain(
    kb: KnowledgeBase,
    ranked: Sequence[ScoredHypothesis],
    symptom: str,
    obs: ObservationState | None = None,
) -> float:
    """Expected entropy reduction from observing one symptom.

    Both outcomes are weighted by their predictive probability under the
    current posterior; each outcome's entropy is taken after a Bayes
    update over the same candidate set. Zero-probability outcomes are
    skipped.
    """
    kb.symptom(symptom)
    if obs is not None and symptom in obs:
        raise AlreadyObservedError(f"symptom {symptom} already has a recorded finding")

    before = posterior_entropy(ranked)
    p_present = [symptom_probability(kb, h.faults, symptom) for h in ranked]

    expected_after = 0.0
    for outcome_probs in (p_present, [1.0 - p for p in p_present]):
        mass = [h.posterior * p for h, p in zip(ranked, outcome_probs)]
        p_outcome = sum(mass)
        if p_outcome <= 0.0:
            continue
        expected_after += p_outcome * entropy_bits(m / p_outcome for m in mass)
    return before - expected_after


def next_question(
    kb: KnowledgeBase,
    ranked: Sequence[ScoredHypothesis],
    obs: ObservationState,
    costs_enabled: bool = False,
) -> str | None:
    """Best unobserved symptom to ask about, or None when nothing helps.

    Maximizes information gain, or gain per unit cost when costs are
    enabled (zero-cost symptoms rank above any finite ratio). Ties break
    to the lexicographically smallest symptom id; returns None when every
    unobserved symptom's raw gain is within epsilon of zero.
    """
    best_id: str | None = None
    best_utility = -math.inf

    # kb.symptom_ids is sorted, so first-wins comparison breaks ties toward
    # the lexicographically smallest id.
    for symptom_id in kb.symptom_ids:
        if symptom_id in obs:
            continue
        gain = information_gain(kb, ranked, symptom_id)
        if gain <= GAIN_EPSILON:
            continue
        if costs_enabled:
            cost = kb.symptom(symptom_id).cost
            utility = math.inf if cost == 0.0 else gain / cost
        else:
            utility = gain
        if utility > best_utility:
            best_utility = utility
            best_id = symptom_id

    return best_id
