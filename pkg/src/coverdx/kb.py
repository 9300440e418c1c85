"""Knowledge-base model: faults, symptoms, weighted causal links, taxonomies.

The knowledge base is a bipartite relation between faults and symptoms with
per-link causal strengths, loaded from a JSON document and immutable after
load. All accessors are pure, so concurrent reads are safe.
"""

from __future__ import annotations

import io
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Iterable, Mapping

from .errors import KBParseError, KBValidationError, UnknownIdError

log = logging.getLogger(__name__)

DEFAULT_PRIOR = 0.05
DEFAULT_COST = 1.0

# Tolerance for flagging stored evoking strengths that disagree with the
# value implied by priors and causal strengths (warning only).
EVOKING_MISMATCH_TOL = 1e-6


class Finding(str, Enum):
    """Recorded state of one symptom: observed present, observed absent,
    or unknown (never observed, or answered as unknown)."""

    PRESENT = "present"
    ABSENT = "absent"
    UNKNOWN = "unknown"


# Observation state: symptom id -> Finding; unlisted symptoms are unknown.
ObservationState = Mapping[str, Finding]


@dataclass(frozen=True)
class FaultNode:
    id: str
    label: str
    prior: float = DEFAULT_PRIOR
    category: str | None = None


@dataclass(frozen=True)
class SymptomNode:
    id: str
    label: str
    question: str = ""
    cost: float = DEFAULT_COST
    category: str | None = None


@dataclass(frozen=True)
class CausalLink:
    """Directed weighted edge fault -> symptom.

    causal_strength is the probability the fault produces the symptom;
    evoking_strength (optional) is the stored probability of the fault
    given the symptom. When absent it is derived on demand.
    """

    fault: str
    symptom: str
    causal_strength: float
    evoking_strength: float | None = None


@dataclass(frozen=True)
class TaxonomyNode:
    id: str
    label: str
    kind: str  # "fault-category" | "symptom-category"
    parent: str | None = None
    weight: float | None = None


@dataclass(frozen=True)
class KBMeta:
    name: str = ""
    version: str = ""


@dataclass(frozen=True)
class Violation:
    severity: str  # "error" | "warning"
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.location}: {self.message}"


def _error(location: str, message: str) -> Violation:
    return Violation("error", location, message)


def _warning(location: str, message: str) -> Violation:
    return Violation("warning", location, message)


@dataclass(frozen=True)
class KnowledgeBase:
    """Immutable fault/symptom relation with weights and taxonomies.

    Node and link tuples are kept in canonical (id-sorted) order so that
    serialize/load round-trips compare equal field for field.
    """

    faults: tuple[FaultNode, ...]
    symptoms: tuple[SymptomNode, ...]
    links: tuple[CausalLink, ...]
    taxonomy: tuple[TaxonomyNode, ...] = ()
    meta: KBMeta = KBMeta()

    # Derived indexes, rebuilt per instance; excluded from init/equality so
    # dataclasses.replace never shares them between instances.
    _fault_index: dict = field(default_factory=dict, init=False, compare=False, repr=False)
    _symptom_index: dict = field(default_factory=dict, init=False, compare=False, repr=False)
    _effects: dict = field(default_factory=dict, init=False, compare=False, repr=False)
    _causes: dict = field(default_factory=dict, init=False, compare=False, repr=False)
    _link_index: dict = field(default_factory=dict, init=False, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "faults", tuple(sorted(self.faults, key=lambda f: f.id)))
        object.__setattr__(self, "symptoms", tuple(sorted(self.symptoms, key=lambda s: s.id)))
        object.__setattr__(self, "links", tuple(sorted(self.links, key=lambda l: (l.fault, l.symptom))))
        object.__setattr__(self, "taxonomy", tuple(sorted(self.taxonomy, key=lambda t: t.id)))

        self._fault_index.update({f.id: f for f in self.faults})
        self._symptom_index.update({s.id: s for s in self.symptoms})
        effects: dict[str, set[str]] = {f.id: set() for f in self.faults}
        causes: dict[str, set[str]] = {s.id: set() for s in self.symptoms}
        for link in self.links:
            self._link_index[(link.fault, link.symptom)] = link
            if link.fault in effects:
                effects[link.fault].add(link.symptom)
            if link.symptom in causes:
                causes[link.symptom].add(link.fault)
        self._effects.update({f: frozenset(ss) for f, ss in effects.items()})
        self._causes.update({s: frozenset(fs) for s, fs in causes.items()})

    # -- accessors -------------------------------------------------------

    @property
    def fault_ids(self) -> tuple[str, ...]:
        return tuple(f.id for f in self.faults)

    @property
    def symptom_ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.symptoms)

    def fault(self, fault_id: str) -> FaultNode:
        try:
            return self._fault_index[fault_id]
        except KeyError:
            raise UnknownIdError("fault", fault_id) from None

    def symptom(self, symptom_id: str) -> SymptomNode:
        try:
            return self._symptom_index[symptom_id]
        except KeyError:
            raise UnknownIdError("symptom", symptom_id) from None

    def has_fault(self, fault_id: str) -> bool:
        return fault_id in self._fault_index

    def has_symptom(self, symptom_id: str) -> bool:
        return symptom_id in self._symptom_index

    def effects(self, fault_id: str) -> frozenset[str]:
        """Symptoms the fault can produce."""
        self.fault(fault_id)
        return self._effects[fault_id]

    def causes(self, symptom_id: str) -> frozenset[str]:
        """Faults that can produce the symptom."""
        self.symptom(symptom_id)
        return self._causes[symptom_id]

    def link(self, fault_id: str, symptom_id: str) -> CausalLink | None:
        return self._link_index.get((fault_id, symptom_id))

    def strength(self, fault_id: str, symptom_id: str) -> float:
        """Causal strength of the (fault, symptom) link, 0 if unlinked."""
        link = self._link_index.get((fault_id, symptom_id))
        return link.causal_strength if link is not None else 0.0


def effects(kb: KnowledgeBase, fault_id: str) -> frozenset[str]:
    return kb.effects(fault_id)


def causes(kb: KnowledgeBase, symptom_id: str) -> frozenset[str]:
    return kb.causes(symptom_id)


def present_set(obs: ObservationState) -> frozenset[str]:
    return frozenset(s for s, f in obs.items() if f == Finding.PRESENT)


def absent_set(obs: ObservationState) -> frozenset[str]:
    return frozenset(s for s, f in obs.items() if f == Finding.ABSENT)


def validate_observations(kb: KnowledgeBase, obs: ObservationState) -> None:
    """Raise UnknownIdError if any observation key is not a KB symptom."""
    for symptom_id in obs:
        kb.symptom(symptom_id)


# -- validation ----------------------------------------------------------


def validate_kb(kb: KnowledgeBase) -> list[Violation]:
    """Check every invariant of an in-memory knowledge base.

    Returns an empty list iff all hard invariants hold. Warn-level entries
    (orphan symptoms, unreachable taxonomy nodes, evoking-strength
    mismatches) never block loading.
    """
    out: list[Violation] = []

    seen: set[str] = set()
    for f in kb.faults:
        if f.id in seen:
            out.append(_error(f"fault {f.id}", "duplicate fault id"))
        seen.add(f.id)
        if not 0.0 <= f.prior <= 1.0:
            out.append(_error(f"fault {f.id}", f"prior out of range: {f.prior}"))

    seen = set()
    for s in kb.symptoms:
        if s.id in seen:
            out.append(_error(f"symptom {s.id}", "duplicate symptom id"))
        seen.add(s.id)
        if s.id in kb._fault_index:
            out.append(_error(f"symptom {s.id}", "id collides with a fault id"))
        if s.cost < 0:
            out.append(_error(f"symptom {s.id}", f"cost out of range: {s.cost}"))

    seen_pairs: set[tuple[str, str]] = set()
    for link in kb.links:
        loc = f"link {link.fault}->{link.symptom}"
        if not kb.has_fault(link.fault):
            out.append(_error(loc, f"link references unknown fault id {link.fault}"))
        if not kb.has_symptom(link.symptom):
            out.append(_error(loc, f"link references unknown symptom id {link.symptom}"))
        if (link.fault, link.symptom) in seen_pairs:
            out.append(_error(loc, "duplicate link"))
        seen_pairs.add((link.fault, link.symptom))
        if not 0.0 < link.causal_strength <= 1.0:
            out.append(_error(loc, f"strength out of range: {link.causal_strength}"))
        if link.evoking_strength is not None and not 0.0 <= link.evoking_strength <= 1.0:
            out.append(_error(loc, f"evoking strength out of range: {link.evoking_strength}"))

    out.extend(_validate_taxonomy(kb))
    out.extend(_validate_categories(kb))

    for s in kb.symptoms:
        if not kb._causes.get(s.id):
            out.append(_warning(f"symptom {s.id}", f"orphan symptom {s.id}: no fault produces it"))

    out.extend(_evoking_mismatches(kb))
    return out


def _validate_taxonomy(kb: KnowledgeBase) -> list[Violation]:
    out: list[Violation] = []
    nodes = {t.id: t for t in kb.taxonomy}
    if len(nodes) < len(kb.taxonomy):
        counted: set[str] = set()
        for t in kb.taxonomy:
            if t.id in counted:
                out.append(_error(f"taxonomy {t.id}", "duplicate taxonomy id"))
            counted.add(t.id)

    for t in kb.taxonomy:
        loc = f"taxonomy {t.id}"
        if t.kind not in ("fault-category", "symptom-category"):
            out.append(_error(loc, f"unknown taxonomy kind: {t.kind}"))
        if t.parent is not None:
            parent = nodes.get(t.parent)
            if parent is None:
                out.append(_error(loc, f"unknown parent node {t.parent}"))
            elif parent.kind != t.kind:
                out.append(_error(loc, "mixed member kinds along taxonomy tree"))
        if t.weight is not None and not 0.0 <= t.weight <= 1.0:
            out.append(_error(loc, f"arc weight out of range: {t.weight}"))

    # Parent links must form a forest: walking up from any node terminates.
    for t in kb.taxonomy:
        visited = {t.id}
        current = t.parent
        while current is not None and current in nodes:
            if current in visited:
                out.append(_error(f"taxonomy {t.id}", "taxonomy cycle"))
                break
            visited.add(current)
            current = nodes[current].parent

    # Unreachable = not an ancestor of any categorized fault/symptom.
    referenced = {f.category for f in kb.faults if f.category}
    referenced |= {s.category for s in kb.symptoms if s.category}
    reachable: set[str] = set()
    for start in referenced:
        current: str | None = start
        guard = 0
        while current is not None and current in nodes and guard <= len(nodes):
            reachable.add(current)
            current = nodes[current].parent
            guard += 1
    for t in kb.taxonomy:
        if t.id not in reachable:
            out.append(_warning(f"taxonomy {t.id}", f"unreachable taxonomy node {t.id}"))
    return out


def _validate_categories(kb: KnowledgeBase) -> list[Violation]:
    out: list[Violation] = []
    nodes = {t.id: t for t in kb.taxonomy}
    for f in kb.faults:
        if f.category is not None:
            node = nodes.get(f.category)
            if node is None:
                out.append(_error(f"fault {f.id}", f"unknown category node {f.category}"))
            elif node.kind != "fault-category":
                out.append(_error(f"fault {f.id}", f"category {f.category} is not a fault-category"))
    for s in kb.symptoms:
        if s.category is not None:
            node = nodes.get(s.category)
            if node is None:
                out.append(_error(f"symptom {s.id}", f"unknown category node {s.category}"))
            elif node.kind != "symptom-category":
                out.append(_error(f"symptom {s.id}", f"category {s.category} is not a symptom-category"))
    return out


def _evoking_mismatches(kb: KnowledgeBase) -> list[Violation]:
    # Stored evoking strengths need not be Bayes-consistent with priors and
    # causal strengths; disagreement is reported as a warning only.
    out: list[Violation] = []
    for link in kb.links:
        if link.evoking_strength is None:
            continue
        if not (kb.has_fault(link.fault) and kb.has_symptom(link.symptom)):
            continue
        total = sum(
            kb.fault(g).prior * kb.strength(g, link.symptom) for g in kb.causes(link.symptom)
        )
        if total <= 0.0:
            continue
        derived = kb.fault(link.fault).prior * link.causal_strength / total
        if abs(derived - link.evoking_strength) > EVOKING_MISMATCH_TOL:
            out.append(
                _warning(
                    f"link {link.fault}->{link.symptom}",
                    f"stored evoking strength {link.evoking_strength} disagrees with "
                    f"derived value {derived:.6f}",
                )
            )
    return out


def hard_violations(violations: Iterable[Violation]) -> list[Violation]:
    return [v for v in violations if v.severity == "error"]


# -- document parsing and serialization ----------------------------------

_FAULT_KEYS = {"id", "label", "prior", "category"}
_SYMPTOM_KEYS = {"id", "label", "question", "cost", "category"}
_LINK_KEYS = {"fault", "symptom", "causal_strength", "evoking_strength"}
_TAXONOMY_KEYS = {"id", "label", "parent", "kind", "weight"}
_TOP_KEYS = {"meta", "faults", "symptoms", "links", "taxonomy"}
_META_KEYS = {"name", "version"}


def _read_source(source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def _check_keys(obj: dict, allowed: set[str], loc: str, strict: bool, out: list[Violation]):
    unknown = sorted(set(obj) - allowed)
    for key in unknown:
        if strict:
            out.append(_error(loc, f"unknown key {key!r}"))
        else:
            out.append(_warning(loc, f"ignoring unknown key {key!r}"))


def _parse_document(doc, strict: bool) -> tuple[KnowledgeBase | None, list[Violation]]:
    out: list[Violation] = []
    if not isinstance(doc, dict):
        return None, [_error("document", "top level must be a JSON object")]
    _check_keys(doc, _TOP_KEYS, "document", strict, out)

    meta_doc = doc.get("meta", {})
    if not isinstance(meta_doc, dict):
        out.append(_error("meta", "meta must be an object"))
        meta_doc = {}
    _check_keys(meta_doc, _META_KEYS, "meta", strict, out)
    meta = KBMeta(name=str(meta_doc.get("name", "")), version=str(meta_doc.get("version", "")))

    faults: list[FaultNode] = []
    for i, entry in enumerate(doc.get("faults", [])):
        loc = f"faults[{i}]"
        if not isinstance(entry, dict) or "id" not in entry:
            out.append(_error(loc, "fault entry must be an object with an 'id'"))
            continue
        _check_keys(entry, _FAULT_KEYS, loc, strict, out)
        prior = entry.get("prior")
        if prior is None:
            prior = DEFAULT_PRIOR
            out.append(_warning(loc, f"fault {entry['id']}: no prior given, defaulting to {DEFAULT_PRIOR}"))
        try:
            faults.append(
                FaultNode(
                    id=str(entry["id"]),
                    label=str(entry.get("label", entry["id"])),
                    prior=float(prior),
                    category=entry.get("category"),
                )
            )
        except (TypeError, ValueError) as exc:
            out.append(_error(loc, f"bad fault field: {exc}"))

    symptoms: list[SymptomNode] = []
    for i, entry in enumerate(doc.get("symptoms", [])):
        loc = f"symptoms[{i}]"
        if not isinstance(entry, dict) or "id" not in entry:
            out.append(_error(loc, "symptom entry must be an object with an 'id'"))
            continue
        _check_keys(entry, _SYMPTOM_KEYS, loc, strict, out)
        label = str(entry.get("label", entry["id"]))
        try:
            symptoms.append(
                SymptomNode(
                    id=str(entry["id"]),
                    label=label,
                    question=str(entry.get("question", label)),
                    cost=float(entry.get("cost", DEFAULT_COST)),
                    category=entry.get("category"),
                )
            )
        except (TypeError, ValueError) as exc:
            out.append(_error(loc, f"bad symptom field: {exc}"))

    links: list[CausalLink] = []
    for i, entry in enumerate(doc.get("links", [])):
        loc = f"links[{i}]"
        if not isinstance(entry, dict) or "fault" not in entry or "symptom" not in entry:
            out.append(_error(loc, "link entry must be an object with 'fault' and 'symptom'"))
            continue
        _check_keys(entry, _LINK_KEYS, loc, strict, out)
        if "causal_strength" not in entry:
            out.append(_error(loc, "link has no causal_strength"))
            continue
        evoking = entry.get("evoking_strength")
        try:
            links.append(
                CausalLink(
                    fault=str(entry["fault"]),
                    symptom=str(entry["symptom"]),
                    causal_strength=float(entry["causal_strength"]),
                    evoking_strength=None if evoking is None else float(evoking),
                )
            )
        except (TypeError, ValueError) as exc:
            out.append(_error(loc, f"bad link field: {exc}"))

    taxonomy: list[TaxonomyNode] = []
    for i, entry in enumerate(doc.get("taxonomy", [])):
        loc = f"taxonomy[{i}]"
        if not isinstance(entry, dict) or "id" not in entry or "kind" not in entry:
            out.append(_error(loc, "taxonomy entry must be an object with 'id' and 'kind'"))
            continue
        _check_keys(entry, _TAXONOMY_KEYS, loc, strict, out)
        try:
            weight = entry.get("weight")
            taxonomy.append(
                TaxonomyNode(
                    id=str(entry["id"]),
                    label=str(entry.get("label", entry["id"])),
                    kind=str(entry["kind"]),
                    parent=entry.get("parent"),
                    weight=None if weight is None else float(weight),
                )
            )
        except (TypeError, ValueError) as exc:
            out.append(_error(loc, f"bad taxonomy field: {exc}"))

    if hard_violations(out):
        return None, out

    kb = KnowledgeBase(
        faults=tuple(faults),
        symptoms=tuple(symptoms),
        links=tuple(links),
        taxonomy=tuple(taxonomy),
        meta=meta,
    )
    out.extend(validate_kb(kb))
    if hard_violations(out):
        return None, out
    return kb, out


def check_document(source, strict: bool = True) -> tuple[KnowledgeBase | None, list[Violation]]:
    """Parse and fully validate a KB document without raising.

    Returns (kb, violations); kb is None when a parse failure or hard
    violation prevented construction.
    """
    try:
        doc = json.loads(_read_source(source))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        return None, [_error("document", f"not valid JSON: {exc}")]
    return _parse_document(doc, strict)


def load_kb(source, strict: bool = True) -> KnowledgeBase:
    """Load and validate a KB document from a str, bytes, or file-like source.

    Raises KBParseError on malformed JSON and KBValidationError when any
    hard invariant is violated. Warn-level findings are logged.
    """
    try:
        doc = json.loads(_read_source(source))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise KBParseError(f"not valid JSON: {exc}") from exc
    kb, violations = _parse_document(doc, strict)
    hard = hard_violations(violations)
    if kb is None or hard:
        raise KBValidationError(hard or violations)
    for v in violations:
        log.warning("%s", v)
    return kb


def load_kb_path(path, strict: bool = True) -> KnowledgeBase:
    with io.open(path, "rb") as fh:
        return load_kb(fh, strict=strict)


def kb_to_document(kb: KnowledgeBase) -> dict:
    """Serialize to the canonical document shape (dict of plain JSON types)."""
    doc: dict = {
        "meta": {"name": kb.meta.name, "version": kb.meta.version},
        "faults": [
            _drop_none({"id": f.id, "label": f.label, "prior": f.prior, "category": f.category})
            for f in kb.faults
        ],
        "symptoms": [
            _drop_none(
                {
                    "id": s.id,
                    "label": s.label,
                    "question": s.question,
                    "cost": s.cost,
                    "category": s.category,
                }
            )
            for s in kb.symptoms
        ],
        "links": [
            _drop_none(
                {
                    "fault": l.fault,
                    "symptom": l.symptom,
                    "causal_strength": l.causal_strength,
                    "evoking_strength": l.evoking_strength,
                }
            )
            for l in kb.links
        ],
        "taxonomy": [
            _drop_none(
                {"id": t.id, "label": t.label, "kind": t.kind, "parent": t.parent, "weight": t.weight}
            )
            for t in kb.taxonomy
        ],
    }
    return doc


def serialize_kb(kb: KnowledgeBase) -> str:
    return json.dumps(kb_to_document(kb), indent=2) + "\n"


def _drop_none(d: dict) -> dict:
    return {k: v for k, v in d.items() if v is not None}
