"""Weight estimation from labeled case data.

Causal strengths are re-estimated per link from cases where the link's
fault is the only labeled fault (isolating the link from other causes),
with Laplace smoothing. Priors are estimated from marginal fault counts.
Multi-fault cases are skipped for strength counting and tallied in the
report rather than silently confounding the estimates.
"""

from __future__ import annotations

import csv
import io
import random
from dataclasses import dataclass, replace

from .errors import EstimationError
from .kb import Finding, KnowledgeBase

SMOOTHING_ALPHA = 1.0


@dataclass(frozen=True)
class CaseRecord:
    faults: frozenset[str]
    findings: dict[str, Finding]
    case_id: str = ""


@dataclass(frozen=True)
class EstimationReport:
    total_cases: int
    isolated_cases: int
    multi_fault_skipped: int
    # links with zero isolated support, estimated at the smoothing midpoint
    no_support: tuple[tuple[str, str], ...]
    isolated_counts: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "total_cases": self.total_cases,
            "isolated_cases": self.isolated_cases,
            "multi_fault_skipped": self.multi_fault_skipped,
            "no_support": [list(pair) for pair in self.no_support],
            "isolated_counts": dict(self.isolated_counts),
        }


def _validate_cases(kb: KnowledgeBase, cases: list[CaseRecord]) -> None:
    for case in cases:
        for f in case.faults:
            kb.fault(f)
        for s in case.findings:
            kb.symptom(s)


def estimate_weights(
    cases: list[CaseRecord],
    kb: KnowledgeBase,
    alpha: float = SMOOTHING_ALPHA,
) -> tuple[KnowledgeBase, EstimationReport]:
    """Re-estimate causal strengths and priors from cases.

    strength(f, s) <- (isolated cases of f with s present + alpha)
                      / (isolated cases of f + 2 alpha)
    prior(f) <- (cases labeled with f + alpha) / (total cases + 2 alpha)

    Returns a new knowledge base (the input is untouched) and a report
    listing links with no isolated support.
    """
    if not cases:
        raise EstimationError("no cases supplied")
    _validate_cases(kb, cases)

    marginal: dict[str, int] = {f: 0 for f in kb.fault_ids}
    isolated: dict[str, int] = {f: 0 for f in kb.fault_ids}
    present_given: dict[tuple[str, str], int] = {}
    multi_fault = 0

    for case in cases:
        for f in case.faults:
            marginal[f] += 1
        if len(case.faults) != 1:
            if len(case.faults) > 1:
                multi_fault += 1
            continue
        (f,) = case.faults
        isolated[f] += 1
        for s, finding in case.findings.items():
            if finding == Finding.PRESENT:
                present_given[(f, s)] = present_given.get((f, s), 0) + 1

    total = len(cases)
    no_support: list[tuple[str, str]] = []
    new_links = []
    for link in kb.links:
        n_f = isolated[link.fault]
        n_fs = present_given.get((link.fault, link.symptom), 0)
        strength = (n_fs + alpha) / (n_f + 2 * alpha)
        if n_f == 0:
            no_support.append((link.fault, link.symptom))
        new_links.append(replace(link, causal_strength=strength))
    new_faults = [
        replace(f, prior=(marginal[f.id] + alpha) / (total + 2 * alpha)) for f in kb.faults
    ]

    new_kb = replace(kb, faults=tuple(new_faults), links=tuple(new_links))
    report = EstimationReport(
        total_cases=total,
        isolated_cases=sum(isolated.values()),
        multi_fault_skipped=multi_fault,
        no_support=tuple(sorted(no_support)),
        isolated_counts=isolated,
    )
    return new_kb, report


def sample_single_fault_cases(
    kb: KnowledgeBase, n: int, seed: int | None = None
) -> list[CaseRecord]:
    """Draw synthetic single-fault cases from the KB's generative model.

    The fault is drawn proportionally to priors; each of its effect
    symptoms turns up present with the link's causal strength, everything
    else absent. Useful for calibration checks of the estimator.
    """
    rng = random.Random(seed)
    fault_ids = list(kb.fault_ids)
    if not fault_ids:
        raise EstimationError("knowledge base has no faults to sample from")
    weights = [kb.fault(f).prior for f in fault_ids]
    if sum(weights) <= 0.0:
        weights = [1.0] * len(fault_ids)

    cases = []
    for i in range(n):
        (f,) = rng.choices(fault_ids, weights=weights, k=1)
        findings: dict[str, Finding] = {}
        for s in kb.symptom_ids:
            if s in kb.effects(f) and rng.random() < kb.strength(f, s):
                findings[s] = Finding.PRESENT
            else:
                findings[s] = Finding.ABSENT
        cases.append(CaseRecord(faults=frozenset({f}), findings=findings, case_id=f"case{i}"))
    return cases


# -- case file format -----------------------------------------------------
# CSV with header: case_id, faults (semicolon-separated ids), then one
# column per symptom id with values 1/0/blank = present/absent/unknown.


def read_cases_csv(source, kb: KnowledgeBase) -> list[CaseRecord]:
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.DictReader(source)
    if reader.fieldnames is None or "case_id" not in reader.fieldnames or "faults" not in reader.fieldnames:
        raise EstimationError("case file needs a header with case_id and faults columns")
    symptom_cols = [c for c in reader.fieldnames if c not in ("case_id", "faults")]
    for s in symptom_cols:
        kb.symptom(s)

    cases = []
    for row in reader:
        labels = frozenset(x for x in (row.get("faults") or "").split(";") if x)
        findings: dict[str, Finding] = {}
        for s in symptom_cols:
            value = (row.get(s) or "").strip()
            if value == "1":
                findings[s] = Finding.PRESENT
            elif value == "0":
                findings[s] = Finding.ABSENT
            elif value != "":
                raise EstimationError(f"bad finding value {value!r} for symptom {s}")
        cases.append(CaseRecord(faults=labels, findings=findings, case_id=row.get("case_id") or ""))
    _validate_cases(kb, cases)
    return cases


def write_cases_csv(cases: list[CaseRecord], kb: KnowledgeBase) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["case_id", "faults", *kb.symptom_ids])
    for case in cases:
        row = [case.case_id, ";".join(sorted(case.faults))]
        for s in kb.symptom_ids:
            finding = case.findings.get(s, Finding.UNKNOWN)
            row.append({Finding.PRESENT: "1", Finding.ABSENT: "0", Finding.UNKNOWN: ""}[finding])
        writer.writerow(row)
    return buffer.getvalue()
