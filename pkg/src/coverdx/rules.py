"""Compile the fault->symptoms relation into forward rules.

For each fault, the minimal symptom combinations that no other fault can
produce become antecedents of symptoms => fault rules. Confidence is the
single-fault posterior of the consequent given the antecedent, so the
rules stay consistent with the Bayesian scorer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .kb import Finding, KnowledgeBase
from .scoring import hypothesis_score

DEFAULT_MAX_ANTECEDENT = 3


@dataclass(frozen=True)
class DeductiveRule:
    antecedent: frozenset[str]
    consequent: str
    confidence: float

    def to_dict(self) -> dict:
        return {
            "antecedent": sorted(self.antecedent),
            "consequent": self.consequent,
            "confidence": self.confidence,
        }

    def __str__(self) -> str:
        return f"{{{', '.join(sorted(self.antecedent))}}} => {self.consequent}"


@dataclass(frozen=True)
class RuleViolation:
    rule: DeductiveRule
    message: str


@dataclass(frozen=True)
class RuleGenReport:
    rules: tuple[DeductiveRule, ...]
    # faults with no discriminating symptom set within the antecedent bound
    undiscriminated: tuple[str, ...]


def discriminating_sets(
    kb: KnowledgeBase, fault: str, max_antecedent: int = DEFAULT_MAX_ANTECEDENT
) -> list[frozenset[str]]:
    """Minimal effect subsets of the fault that no other fault also produces.

    Enumerated in order of size then sorted symptom ids; a set is skipped
    when any smaller discriminating subset is contained in it (uniqueness
    is monotone under supersets).
    """
    if max_antecedent < 1:
        raise ValueError(f"max_antecedent must be >= 1, got {max_antecedent}")
    effect_ids = sorted(kb.effects(fault))
    rival_effects = [kb.effects(g) for g in kb.fault_ids if g != fault]

    found: list[frozenset[str]] = []
    for size in range(1, min(max_antecedent, len(effect_ids)) + 1):
        for combo in combinations(effect_ids, size):
            candidate = frozenset(combo)
            if any(prior <= candidate for prior in found):
                continue
            if not any(candidate <= rival for rival in rival_effects):
                found.append(candidate)
    return sorted(found, key=lambda a: (len(a), tuple(sorted(a))))


def rule_confidence(kb: KnowledgeBase, antecedent: Iterable[str], fault: str) -> float:
    """Posterior of the fault given the antecedent symptoms, normalized over
    single-fault hypotheses plus the empty hypothesis."""
    obs = {s: Finding.PRESENT for s in antecedent}
    candidates = [frozenset()] + [frozenset({g}) for g in kb.fault_ids]
    scores = {c: hypothesis_score(kb, c, obs) for c in candidates}
    total = sum(scores.values())
    if total <= 0.0:
        return 0.0
    return scores[frozenset({fault})] / total


def generate_rules(
    kb: KnowledgeBase, max_antecedent: int = DEFAULT_MAX_ANTECEDENT
) -> list[DeductiveRule]:
    """One rule per discriminating set of every fault, in fault-id order."""
    return list(rule_generation_report(kb, max_antecedent).rules)


def rule_generation_report(
    kb: KnowledgeBase, max_antecedent: int = DEFAULT_MAX_ANTECEDENT
) -> RuleGenReport:
    rules: list[DeductiveRule] = []
    undiscriminated: list[str] = []
    for fault in kb.fault_ids:
        antecedents = discriminating_sets(kb, fault, max_antecedent)
        if not antecedents:
            undiscriminated.append(fault)
            continue
        for antecedent in antecedents:
            rules.append(
                DeductiveRule(
                    antecedent=antecedent,
                    consequent=fault,
                    confidence=rule_confidence(kb, antecedent, fault),
                )
            )
    return RuleGenReport(rules=tuple(rules), undiscriminated=tuple(undiscriminated))


def verify_rules(kb: KnowledgeBase, rules: Sequence[DeductiveRule]) -> list[RuleViolation]:
    """Soundness check under the single-fault closed-world reading.

    A rule is violated when its antecedent is empty, not produced by its
    own consequent, or also fully producible by some other single fault.
    """
    violations: list[RuleViolation] = []
    for rule in rules:
        if not rule.antecedent:
            violations.append(RuleViolation(rule, "empty antecedent"))
            continue
        consequent_effects = kb.effects(rule.consequent)
        if not rule.antecedent <= consequent_effects:
            missing = sorted(rule.antecedent - consequent_effects)
            violations.append(
                RuleViolation(rule, f"consequent does not produce {', '.join(missing)}")
            )
        for g in kb.fault_ids:
            if g == rule.consequent:
                continue
            if rule.antecedent <= kb.effects(g):
                violations.append(
                    RuleViolation(rule, f"fault {g} also explains the antecedent")
                )
    return violations


def rules_to_json(rules: Sequence[DeductiveRule]) -> str:
    return json.dumps([r.to_dict() for r in rules], indent=2) + "\n"
