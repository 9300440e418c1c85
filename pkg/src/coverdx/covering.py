"""Set-covering abduction: enumerate the fault sets that explain the
present symptoms.

A fault set D covers a symptom set M iff every symptom in M has at least
one cause in D. The engine enumerates irredundant covers (no proper subset
still covers), which are exactly the minimal hitting sets of the family
{causes(s) : s in M}. Scoring and ranking happen elsewhere; this module is
purely combinatorial.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable

from .kb import KnowledgeBase

DEFAULT_MAX_COVER_SIZE = 4

FaultSet = frozenset[str]


def _as_fault_set(kb: KnowledgeBase, faults: Iterable[str]) -> FaultSet:
    fault_set = frozenset(faults)
    for f in fault_set:
        kb.fault(f)
    return fault_set


def _as_symptom_set(kb: KnowledgeBase, symptoms: Iterable[str]) -> frozenset[str]:
    symptom_set = frozenset(symptoms)
    for s in symptom_set:
        kb.symptom(s)
    return symptom_set


def cover_sort_key(cover: FaultSet) -> tuple:
    return (len(cover), tuple(sorted(cover)))


def is_cover(kb: KnowledgeBase, faults: Iterable[str], present: Iterable[str]) -> bool:
    """True iff every present symptom has at least one cause in the fault set."""
    fault_set = _as_fault_set(kb, faults)
    symptom_set = _as_symptom_set(kb, present)
    return all(kb.causes(s) & fault_set for s in symptom_set)


def irredundant_covers(
    kb: KnowledgeBase,
    present: Iterable[str],
    max_size: int = DEFAULT_MAX_COVER_SIZE,
) -> list[FaultSet]:
    """All covers of the present set, up to max_size faults, such that no
    proper subset is still a cover.

    Deterministic order: by cardinality, then lexicographically on the
    sorted fault ids. The empty symptom set has the single irredundant
    cover {} (nothing to explain).
    """
    if max_size < 1:
        raise ValueError(f"max_size must be >= 1, got {max_size}")
    symptom_set = _as_symptom_set(kb, present)
    if not symptom_set:
        return [frozenset()]

    cause_sets = {s: kb.causes(s) for s in symptom_set}
    if any(not fs for fs in cause_sets.values()):
        return []  # some present symptom is unexplainable

    found: set[FaultSet] = set()
    visited: set[FaultSet] = set()

    def uncovered(chosen: FaultSet) -> list[str]:
        return [s for s in symptom_set if not (cause_sets[s] & chosen)]

    def search(chosen: FaultSet) -> None:
        if chosen in visited:
            return
        visited.add(chosen)
        missing = uncovered(chosen)
        if not missing:
            # chosen covers; irredundancy needs only single-removal checks
            # because coverage is monotone.
            if all(uncovered(chosen - {f}) for f in chosen):
                found.add(chosen)
            return
        if len(chosen) >= max_size:
            return
        # Branch on the most constrained uncovered symptom: every cover of
        # the full set must contain one of its causes.
        branch_symptom = min(missing, key=lambda s: (len(cause_sets[s]), s))
        for f in sorted(cause_sets[branch_symptom]):
            search(chosen | {f})

    search(frozenset())
    return sorted(found, key=cover_sort_key)


def single_fault_candidates(kb: KnowledgeBase, present: Iterable[str]) -> list[str]:
    """Faults that individually cover every present symptom, in id order."""
    symptom_set = _as_symptom_set(kb, present)
    return [f for f in kb.fault_ids if symptom_set <= kb.effects(f)]


@dataclass(frozen=True)
class GeneratorSet:
    """Compact product form of a family of irredundant covers.

    Each generator is a tuple of pairwise-disjoint nonempty fault-id sets;
    picking exactly one fault from each set yields a cover. The union of
    all generators' expansions, de-duplicated, is exactly the family the
    set was compiled from.
    """

    generators: tuple[tuple[FaultSet, ...], ...]
    max_size: int

    def expand(self) -> list[FaultSet]:
        covers: set[FaultSet] = set()
        for components in self.generators:
            if not components:
                covers.add(frozenset())
                continue
            for choice in product(*[sorted(c) for c in components]):
                covers.add(frozenset(choice))
        return sorted(covers, key=cover_sort_key)


def compile_generators(
    kb: KnowledgeBase,
    present: Iterable[str],
    max_size: int = DEFAULT_MAX_COVER_SIZE,
) -> GeneratorSet:
    """Compile the irredundant covers of the present set into product form."""
    covers = irredundant_covers(kb, present, max_size)
    generators: list[tuple[FaultSet, ...]] = []
    for size in sorted({len(c) for c in covers}):
        family = [c for c in covers if len(c) == size]
        generators.extend(_factor_uniform(family))
    return GeneratorSet(generators=tuple(generators), max_size=max_size)


def _factor_uniform(family: list[FaultSet]) -> list[tuple[FaultSet, ...]]:
    """Greedy product factorization of same-cardinality covers.

    Grows one generator at a time: starting from a single cover's
    singleton components, absorbs any remaining cover that extends exactly
    one component, provided every new expansion member is itself in the
    family (so the expansion never leaves it).
    """
    if family and not next(iter(family)):
        return [()]  # the lone empty cover

    remaining = set(family)
    ordered = sorted(family, key=cover_sort_key)
    generators: list[tuple[FaultSet, ...]] = []

    for seed in ordered:
        if seed not in remaining:
            continue
        components: list[set[str]] = [{f} for f in sorted(seed)]
        expansion = {seed}
        changed = True
        while changed:
            changed = False
            placed = set().union(*components)
            for candidate in ordered:
                if candidate not in remaining or candidate in expansion:
                    continue
                new = candidate - placed
                if len(new) != 1:
                    continue
                (x,) = new
                slots = sorted(
                    i for i, comp in enumerate(components) if not (candidate & comp)
                )
                if len(slots) != 1:
                    continue  # old elements must occupy all components but one
                i = slots[0]
                grown = [set(c) for c in components]
                grown[i].add(x)
                trial = {frozenset(choice) for choice in product(*grown)}
                if trial <= remaining | expansion:
                    components = grown
                    expansion = trial
                    changed = True
                    break
        generators.append(tuple(frozenset(c) for c in components))
        remaining -= expansion

    return generators


def covers_for_mode(
    kb: KnowledgeBase,
    present: Iterable[str],
    mode: str,
    max_size: int = DEFAULT_MAX_COVER_SIZE,
) -> list[FaultSet]:
    """Candidate hypothesis sets for a diagnostic mode.

    multiple-fault: the irredundant covers of the present set.
    single-fault: every single fault that covers the present set, plus the
    empty hypothesis (no fault).
    """
    if mode == "multiple-fault":
        return irredundant_covers(kb, present, max_size)
    if mode == "single-fault":
        singles = [frozenset({f}) for f in single_fault_candidates(kb, present)]
        return [frozenset()] + singles
    raise ValueError(f"unknown mode: {mode}")
