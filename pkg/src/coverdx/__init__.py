"""coverdx: set-covering diagnostic engine.

Matches sequentially acquired symptoms to fault hypotheses via irredundant
covers, scores them with a noisy-OR Bayesian model, picks the most
discriminating next question, compiles the fault/symptom relation into
forward rules, clusters faults and symptoms, and estimates link weights
from case data. Shipped with a CLI, an HTTP session service, and a browser
console.
"""

from .clustering import (
    Dendrogram,
    agglomerate,
    cluster_faults,
    cluster_symptoms,
    fault_similarity,
    partition_present,
    symptom_similarity,
)
from .covering import (
    GeneratorSet,
    compile_generators,
    covers_for_mode,
    irredundant_covers,
    is_cover,
    single_fault_candidates,
)
from .errors import (
    AlreadyObservedError,
    ConfigError,
    CoverdxError,
    EstimationError,
    KBParseError,
    KBValidationError,
    NoCauseError,
    SessionNotInProgressError,
    UnknownIdError,
)
from .estimation import (
    CaseRecord,
    EstimationReport,
    estimate_weights,
    read_cases_csv,
    sample_single_fault_cases,
    write_cases_csv,
)
from .kb import (
    CausalLink,
    FaultNode,
    Finding,
    KBMeta,
    KnowledgeBase,
    ObservationState,
    SymptomNode,
    TaxonomyNode,
    Violation,
    causes,
    check_document,
    effects,
    kb_to_document,
    load_kb,
    load_kb_path,
    serialize_kb,
    validate_kb,
)
from .questions import information_gain, next_question, posterior_entropy
from .rules import (
    DeductiveRule,
    RuleGenReport,
    RuleViolation,
    discriminating_sets,
    generate_rules,
    rule_generation_report,
    rules_to_json,
    verify_rules,
)
from .scoring import (
    ScoredHypothesis,
    ScoringStrategy,
    derive_evoking_strength,
    heuristic_match_score,
    hypothesis_score,
    rank_hypotheses,
    symptom_probability,
)
from .session import (
    SessionConfig,
    SessionState,
    SessionSummary,
    Status,
    StoppingReason,
    replay_transcript,
    start_session,
    submit_answer,
    summary,
    transcript_from_json,
    transcript_to_json,
    what_if,
)

__version__ = "0.1.0"
