"""Similarity-based structuring of the fault and symptom sets.

Faults are compared by their weighted effect profiles (weighted Jaccard),
symptoms by their weighted cause profiles; agglomerative average-linkage
merging turns either into a dendrogram that can seed a taxonomy. For the
multiple-fault case, the present symptoms are partitioned into
independently coverable clusters through shared causes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .kb import KnowledgeBase

Cluster = tuple[str, ...]


def _weighted_jaccard(profile_a: dict[str, float], profile_b: dict[str, float]) -> float:
    keys = set(profile_a) | set(profile_b)
    if not keys:
        return 1.0
    low = sum(min(profile_a.get(k, 0.0), profile_b.get(k, 0.0)) for k in keys)
    high = sum(max(profile_a.get(k, 0.0), profile_b.get(k, 0.0)) for k in keys)
    return low / high if high > 0.0 else 1.0


def fault_similarity(kb: KnowledgeBase, fault_a: str, fault_b: str) -> float:
    """Weighted Jaccard of the two faults' effect strength profiles."""
    profiles = [
        {s: kb.strength(f, s) for s in kb.effects(f)} for f in (fault_a, fault_b)
    ]
    return _weighted_jaccard(*profiles)


def symptom_similarity(kb: KnowledgeBase, symptom_a: str, symptom_b: str) -> float:
    """Weighted Jaccard of the two symptoms' cause strength profiles."""
    profiles = [
        {f: kb.strength(f, s) for f in kb.causes(s)} for s in (symptom_a, symptom_b)
    ]
    return _weighted_jaccard(*profiles)


@dataclass(frozen=True)
class Dendrogram:
    """Agglomerative merge history: leaves plus ordered (left, right, height)
    steps at nondecreasing heights."""

    leaves: tuple[str, ...]
    merges: tuple[tuple[Cluster, Cluster, float], ...]

    def cut(self, height: float) -> list[Cluster]:
        """Partition of the leaves using only merges at or below the height."""
        clusters = {(leaf,): None for leaf in self.leaves}
        for left, right, h in self.merges:
            if h > height:
                break
            del clusters[left]
            del clusters[right]
            clusters[tuple(sorted(left + right))] = None
        return sorted(clusters)

    def to_newick(self) -> str:
        """Newick text with branch lengths derived from merge heights."""
        heights: dict[Cluster, float] = {(leaf,): 0.0 for leaf in self.leaves}
        rendered: dict[Cluster, str] = {(leaf,): leaf for leaf in self.leaves}
        root: Cluster | None = None
        for left, right, h in self.merges:
            merged = tuple(sorted(left + right))
            parts = ",".join(
                f"{rendered[child]}:{_fmt(h - heights[child])}" for child in (left, right)
            )
            rendered[merged] = f"({parts})"
            heights[merged] = h
            root = merged
        if root is None:
            root = (self.leaves[0],)
        return rendered[root] + ";"


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def agglomerate(
    items: Sequence[str],
    similarity: Callable[[str, str], float],
    linkage: str = "average",
) -> Dendrogram:
    """Average-linkage agglomerative clustering at height = 1 - similarity.

    Merge ties break to the pair with the lexicographically smallest member
    ids, so identical inputs always give identical dendrograms.
    """
    if not items:
        raise ValueError("cannot cluster an empty item list")
    if len(set(items)) != len(items):
        raise ValueError("duplicate item ids")
    if linkage != "average":
        raise ValueError(f"unsupported linkage: {linkage}")

    distance = {
        (a, b): 1.0 - similarity(a, b)
        for i, a in enumerate(items)
        for b in list(items)[i + 1 :]
    }

    def item_distance(a: str, b: str) -> float:
        return distance[(a, b)] if (a, b) in distance else distance[(b, a)]

    clusters: list[Cluster] = sorted((item,) for item in items)
    merges: list[tuple[Cluster, Cluster, float]] = []

    while len(clusters) > 1:
        best: tuple[float, str, str] | None = None
        best_pair: tuple[Cluster, Cluster] | None = None
        for i, left in enumerate(clusters):
            for right in clusters[i + 1 :]:
                d = sum(item_distance(a, b) for a in left for b in right) / (
                    len(left) * len(right)
                )
                lo, hi = sorted((left[0], right[0]))
                key = (d, lo, hi)
                if best is None or key < best:
                    best = key
                    best_pair = (left, right) if left[0] == lo else (right, left)
        assert best is not None and best_pair is not None
        left, right = best_pair
        clusters.remove(left)
        clusters.remove(right)
        clusters.append(tuple(sorted(left + right)))
        clusters.sort()
        merges.append((left, right, best[0]))

    return Dendrogram(leaves=tuple(sorted(items)), merges=tuple(merges))


def cluster_faults(kb: KnowledgeBase) -> Dendrogram:
    return agglomerate(kb.fault_ids, lambda a, b: fault_similarity(kb, a, b))


def cluster_symptoms(kb: KnowledgeBase) -> Dendrogram:
    return agglomerate(kb.symptom_ids, lambda a, b: symptom_similarity(kb, a, b))


def partition_present(kb: KnowledgeBase, present: Iterable[str]) -> list[frozenset[str]]:
    """Split present symptoms into connected components under shared causes.

    Two symptoms land in one cluster iff a chain of overlapping cause sets
    links them; each cluster can then be covered independently. Ordered by
    smallest member id.
    """
    present_ids = sorted(frozenset(present))
    for s in present_ids:
        kb.symptom(s)

    clusters: list[frozenset[str]] = []
    unassigned = list(present_ids)
    while unassigned:
        seed = unassigned.pop(0)
        component = {seed}
        frontier = [seed]
        while frontier:
            current = frontier.pop()
            current_causes = kb.causes(current)
            still_out = []
            for other in unassigned:
                if kb.causes(other) & current_causes:
                    component.add(other)
                    frontier.append(other)
                else:
                    still_out.append(other)
            unassigned = still_out
        clusters.append(frozenset(component))
    return clusters
