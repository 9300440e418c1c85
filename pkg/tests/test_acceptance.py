"""Acceptance suite: every primary criterion at its stated tolerance.

Each test prints one PASS/FAIL line (visible with -s or on failure) and
checks the engine against independent brute-force oracles at desk scale.
Run with: pytest tests/test_acceptance.py -v -s
"""

from __future__ import annotations

import random
import socket
import threading
import time
from itertools import combinations

import httpx
import pytest
import uvicorn

from coverdx import (
    Finding,
    SessionConfig,
    Status,
    fault_similarity,
    generate_rules,
    hypothesis_score,
    information_gain,
    irredundant_covers,
    rank_hypotheses,
    replay_transcript,
    sample_single_fault_cases,
    estimate_weights,
    start_session,
    submit_answer,
    symptom_probability,
    verify_rules,
)
from coverdx.service import ServiceConfig, create_app

from oracles import (
    brute_force_irredundant_covers,
    joint_mass,
    noisy_or,
    oracle_information_gain,
    oracle_posteriors,
    random_kb,
    random_observations,
)

CORPUS_SEED = 20260810
CORPUS_SIZE = 200


def report(criterion: str, ok: bool, detail: str = "") -> None:
    line = f"{'PASS' if ok else 'FAIL'}: {criterion}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


@pytest.fixture(scope="module")
def corpus():
    rng = random.Random(CORPUS_SEED)
    return [random_kb(rng, max_faults=10, max_symptoms=12) for _ in range(CORPUS_SIZE)]


def test_covering_oracle_equivalence(corpus):
    rng = random.Random(1)
    started = time.perf_counter()
    checked = 0
    for kb in corpus:
        present = frozenset(s for s in kb.symptom_ids if rng.random() < 0.4)
        max_size = rng.choice([1, 2, 3, 4, len(kb.faults)])
        got = irredundant_covers(kb, present, max_size)
        expected = brute_force_irredundant_covers(kb, present, max_size)
        assert got == expected, f"cover mismatch on corpus KB (|F|={len(kb.faults)})"
        checked += 1
    elapsed = time.perf_counter() - started
    report(
        "covering oracle equivalence",
        checked == CORPUS_SIZE and elapsed < 10.0,
        f"{checked} KBs in {elapsed:.2f}s",
    )


def test_scoring_oracle_equivalence(corpus):
    rng = random.Random(2)
    worst = 0.0
    for kb in corpus:
        obs = random_observations(rng, kb)
        fault_ids = list(kb.fault_ids)
        subsets = [frozenset()] + [
            frozenset(rng.sample(fault_ids, rng.randint(1, min(4, len(fault_ids)))))
            for _ in range(6)
        ]
        for d in subsets:
            worst = max(worst, abs(hypothesis_score(kb, d, obs) - joint_mass(kb, d, obs)))
        ranked = rank_hypotheses(kb, subsets, obs)
        expected = dict(
            zip([tuple(sorted(c)) for c in subsets], oracle_posteriors(kb, subsets, obs))
        )
        for h in ranked:
            worst = max(worst, abs(h.posterior - expected[tuple(sorted(h.faults))]))
    report("scoring oracle equivalence", worst <= 1e-9, f"worst deviation {worst:.2e}")


def test_fixture_regression(kb3):
    ok = True

    covers = irredundant_covers(kb3, {"s1", "s3"}, 4)
    ok &= covers == brute_force_irredundant_covers(kb3, frozenset({"s1", "s3"}), 4)
    ok &= covers == [frozenset({"f1", "f2"})]

    p = symptom_probability(kb3, {"f1", "f2"}, "s2")
    ok &= abs(p - noisy_or(kb3, frozenset({"f1", "f2"}), "s2")) <= 1e-12
    ok &= abs(p - 0.92) <= 1e-12

    score = hypothesis_score(kb3, {"f3"}, {"s4": Finding.PRESENT})
    ok &= abs(score - joint_mass(kb3, frozenset({"f3"}), {"s4": Finding.PRESENT})) <= 1e-12
    ok &= abs(score - 0.0384750) <= 1e-9

    ranked = rank_hypotheses(kb3, [frozenset({"f1"}), frozenset({"f2"})], {})
    gain = information_gain(kb3, ranked, "s1")
    oracle_gain = oracle_information_gain(
        kb3, [frozenset({"f1"}), frozenset({"f2"})], [0.5, 0.5], "s1"
    )
    ok &= abs(gain - oracle_gain) <= 1e-12
    ok &= abs(gain - 0.758) <= 1e-3

    rules = {(tuple(sorted(r.antecedent)), r.consequent) for r in generate_rules(kb3, 1)}
    ok &= rules == {(("s1",), "f1"), (("s3",), "f2"), (("s4",), "f3")}

    # weighted-Jaccard by hand: shared s2 mass min(.6,.8) over .9+max(.6,.8)+.7
    similarity = fault_similarity(kb3, "f1", "f2")
    ok &= abs(similarity - 0.6 / 2.4) <= 1e-12
    ok &= abs(similarity - 0.25) <= 1e-12

    report("fixture regression", ok)


def test_information_gain_properties(corpus):
    rng = random.Random(3)
    min_gain = 0.0
    coincident_checked = 0
    for kb in corpus[:100]:
        obs = random_observations(rng, kb, rate=0.3)
        fault_ids = list(kb.fault_ids)
        candidates = [frozenset()] + [
            frozenset(rng.sample(fault_ids, rng.randint(1, min(3, len(fault_ids)))))
            for _ in range(4)
        ]
        ranked = rank_hypotheses(kb, candidates, obs)
        for s in kb.symptom_ids:
            if s in obs:
                continue
            gain = information_gain(kb, ranked, s)
            min_gain = min(min_gain, gain)
            live = [h for h in ranked if h.posterior > 0]
            predictive = {round(symptom_probability(kb, h.faults, s), 15) for h in live}
            if len(predictive) <= 1:
                coincident_checked += 1
                assert abs(gain) <= 1e-12, f"expected zero gain, got {gain}"
    report(
        "information-gain properties",
        min_gain >= -1e-12 and coincident_checked > 0,
        f"min gain {min_gain:.2e}, {coincident_checked} coincident cases",
    )


def test_rule_soundness_and_minimality(corpus):
    checked_rules = 0
    for kb in corpus:
        rules = generate_rules(kb, 3)
        assert verify_rules(kb, rules) == []
        by_fault: dict[str, list[frozenset[str]]] = {}
        for rule in rules:
            by_fault.setdefault(rule.consequent, []).append(rule.antecedent)
        for fault in kb.fault_ids:
            expected = _brute_force_discriminating(kb, fault, 3)
            got = sorted(by_fault.get(fault, []), key=lambda a: (len(a), tuple(sorted(a))))
            assert got == expected, f"rule sets differ for {fault}"
        checked_rules += len(rules)
    report("rule soundness and minimality", True, f"{checked_rules} rules verified")


def _brute_force_discriminating(kb, fault, bound):
    effect_ids = sorted(kb.effects(fault))
    others = [kb.effects(g) for g in kb.fault_ids if g != fault]
    unique = [
        frozenset(c)
        for size in range(1, bound + 1)
        for c in combinations(effect_ids, size)
        if not any(frozenset(c) <= eff for eff in others)
    ]
    minimal = [a for a in unique if not any(b < a for b in unique)]
    return sorted(minimal, key=lambda a: (len(a), tuple(sorted(a))))


def test_session_replay_determinism(corpus):
    rng = random.Random(4)
    replays = 0
    while replays < 1000:
        kb = corpus[rng.randrange(len(corpus))]
        config = SessionConfig(
            mode=rng.choice(["single-fault", "multiple-fault"]),
            max_cover_size=3,
            conclusion_threshold=rng.choice([0.8, 0.95]),
            question_budget=rng.randint(1, 8),
        )
        state = start_session(kb, config)
        transcript = []
        while state.status == Status.IN_PROGRESS:
            unobserved = [s for s in kb.symptom_ids if s not in state.observations]
            if not unobserved:
                break
            symptom = (
                state.next
                if state.next is not None and rng.random() < 0.7
                else rng.choice(unobserved)
            )
            finding = rng.choice(["present", "absent", "unknown"])
            state = submit_answer(state, symptom, finding)
            transcript.append((symptom, finding))
        assert len(transcript) <= config.question_budget
        assert replay_transcript(kb, config, transcript) == state
        replays += 1
    report("session replay determinism", replays == 1000, f"{replays} transcripts")


def test_estimation_recovery(kb3):
    passes = 0
    for seed in range(100):
        cases = sample_single_fault_cases(kb3, 10_000, seed=seed)
        estimated, est_report = estimate_weights(cases, kb3)
        seed_ok = True
        for link in kb3.links:
            if est_report.isolated_counts[link.fault] >= 200:
                error = abs(estimated.strength(link.fault, link.symptom) - link.causal_strength)
                seed_ok &= error <= 0.05
        passes += seed_ok
    report("estimation recovery", passes >= 99, f"{passes}/100 seeds within 0.05")


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def _start_server(app, port: int):
    server = uvicorn.Server(
        uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    )
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 15
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("service did not start")
        time.sleep(0.02)
    return server, thread


def test_service_round_trip_and_recovery(tmp_path, kb3_path):
    import shutil

    kb_dir = tmp_path / "kb"
    kb_dir.mkdir()
    shutil.copy(kb3_path, kb_dir / "kb3.json")
    store = tmp_path / "sessions"
    config = ServiceConfig(kb_dir=kb_dir, session_store=store)

    port = _free_port()
    server, thread = _start_server(create_app(config), port)
    base = f"http://127.0.0.1:{port}"
    try:
        created = httpx.post(f"{base}/sessions", json={"kb": "kb3"}, timeout=10)
        assert created.status_code == 201
        session_id = created.json()["id"]

        answered = httpx.post(
            f"{base}/sessions/{session_id}/answers",
            json={"symptom": "s4", "finding": "present"},
            timeout=10,
        )
        assert answered.status_code == 200
        view = answered.json()
        concluded = view["status"] == "concluded" and view["candidates"][0]["faults"] == ["f3"]
        final_view = httpx.get(f"{base}/sessions/{session_id}", timeout=10).json()
        final_summary = httpx.get(f"{base}/sessions/{session_id}/summary", timeout=10).json()
    finally:
        server.should_exit = True
        thread.join(timeout=10)

    # crash recovery: a fresh instance over the same store replays the session
    port2 = _free_port()
    server2, thread2 = _start_server(create_app(config), port2)
    base2 = f"http://127.0.0.1:{port2}"
    try:
        recovered_view = httpx.get(f"{base2}/sessions/{session_id}", timeout=10).json()
        recovered_summary = httpx.get(f"{base2}/sessions/{session_id}/summary", timeout=10).json()
    finally:
        server2.should_exit = True
        thread2.join(timeout=10)

    recovered = recovered_view == final_view and recovered_summary == final_summary
    report("service round-trip and crash recovery", concluded and recovered)
