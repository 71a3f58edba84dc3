import math

import numpy as np
import pytest
import sympy as sp

from conftest import REFERENCE_AXIS
from qdcsim.adversary import (
    FixedAxisMeasure,
    InterceptResend,
    PassiveOff,
    TomographyInterleave,
    WalkGuesser,
    bob_flip_probability,
    eve_guess_walk,
    eve_information_leakage,
    make_strategy,
)
from qdcsim.basis_walk import arc_between, walk_init, walk_step
from qdcsim.errors import SpanMismatch
from qdcsim.protocol import QuantumChannel, Session, SessionConfig, random_payloads
from qdcsim.qubit import BlochVector, Carrier, Detector, measure
from qdcsim.rng import rng_stream

N = BlochVector(*REFERENCE_AXIS)
DISTURBANCE_CASES = [0, sp.Rational(1, 2), 1 / sp.sqrt(2), 1]


def exact_flip_probability(c):
    """Sum over Eve outcome x Bob outcome paths with exact arithmetic (Alice sends bit 1)."""
    total = 0
    for eve in (+1, -1):
        p_eve = (1 + eve * c) / 2
        for bob in (+1, -1):
            p_bob = (1 + eve * bob * c) / 2
            if bob == -1:
                total += p_eve * p_bob
    return sp.simplify(total)


def axis_at(c):
    """Unit vector with dot product c against REFERENCE_AXIS."""
    n = np.array(REFERENCE_AXIS)
    t = np.cross(n, [0, 0, 1.0])
    t /= np.linalg.norm(t)
    return tuple(c * n + math.sqrt(max(0.0, 1 - c * c)) * t)


@pytest.mark.parametrize("c", DISTURBANCE_CASES)
def test_disturbance_law_exact(c):
    exact = exact_flip_probability(c)
    assert sp.simplify(exact - (1 - c**2) / 2) == 0
    assert bob_flip_probability(axis_at(float(c)), REFERENCE_AXIS) == pytest.approx(float(exact), abs=1e-15)
    assert bob_flip_probability(axis_at(float(c)), REFERENCE_AXIS, 0) == pytest.approx(float(exact), abs=1e-15)


def simulate_flips(eve_axis, n_qubits, seed, strategy_cls=FixedAxisMeasure):
    eve = strategy_cls(eve_axis)
    channel = QuantumChannel(eve, rng_stream(seed, "eve"))
    alice_bits = rng_stream(seed, "alice").integers(0, 2, size=n_qubits).tolist()
    channel.send(Carrier(b, N) for b in alice_bits)
    bob = Detector(N)
    rng = rng_stream(seed, "bob")
    got = [measure(bob, c.bit, c.axis, rng)[0] for c in channel.receive(n_qubits)]
    return eve, alice_bits, got


@pytest.mark.parametrize("c", [0.0, 0.5, 1 / math.sqrt(2), 1.0])
def test_disturbance_law_monte_carlo(c):
    n = 20000
    _, sent, got = simulate_flips(axis_at(c), n, 11)
    flips = np.mean(np.array(sent) != np.array(got))
    p = (1 - c * c) / 2
    assert abs(flips - p) <= 3 * math.sqrt(max(p * (1 - p), 1e-12) / n) + 1e-12


def test_matched_axis_is_invisible():
    eve, sent, got = simulate_flips(N, 2000, 1)
    assert got == sent
    assert eve.record.guessed_bits == sent
    assert eve_information_leakage(eve.record, sent) == 1.0


def test_orthogonal_axis():
    n = 20000
    eve, sent, got = simulate_flips(axis_at(0.0), n, 2)
    acc = eve_information_leakage(eve.record, sent)
    assert abs(acc - 0.5) <= 3 / math.sqrt(n)
    assert abs(np.mean(np.array(sent) != np.array(got)) - 0.5) <= 3 * 0.5 / math.sqrt(n)


def test_leakage_one_missed_step():
    c = math.cos(0.75)
    n = 20000
    eve, sent, _ = simulate_flips(axis_at(c), n, 3)
    expected = (1 + c) / 2
    assert expected == pytest.approx(0.8659, abs=1e-4)
    acc = eve_information_leakage(eve.record, sent)
    assert abs(acc - expected) <= 3 * math.sqrt(expected * (1 - expected) / n)


def test_leakage_span_mismatch():
    eve, sent, _ = simulate_flips(N, 10, 4)
    with pytest.raises(SpanMismatch):
        eve_information_leakage(eve.record, sent[:-1])


def test_intercept_resend_matches_fixed_axis_but_is_flagged():
    axis = axis_at(0.3)
    eve_a, sent_a, got_a = simulate_flips(axis, 500, 5, FixedAxisMeasure)
    eve_b, sent_b, got_b = simulate_flips(axis, 500, 5, InterceptResend)
    assert got_a == got_b and eve_a.record.guessed_bits == eve_b.record.guessed_bits
    assert eve_b.record.delayed == 500
    channel = QuantumChannel(InterceptResend(N), rng_stream(0, "eve"))
    channel.send([Carrier(1, N)] * 3)
    assert all(c.delayed for c in channel.receive(3))


def test_passive_eve_forwards_untouched():
    eve = PassiveOff()
    carriers = [Carrier(i % 2, N) for i in range(10)]
    rng = rng_stream(0, "eve")
    assert [eve.intercept(c, rng) for c in carriers] == carriers
    assert rng.random() == rng_stream(0, "eve").random()


def test_passive_session_is_bit_identical():
    cfg = SessionConfig(shared_secret_seed=3)
    payloads = random_payloads(cfg.scheme, 100, rng_stream(0, "m"))
    a = Session(cfg, 9)
    a.run(payloads)
    b = Session(cfg, 9, PassiveOff())
    b.run(payloads)
    assert a.transcript.to_jsonl() == b.transcript.to_jsonl()


def test_tomography_eve_on_balanced_traffic():
    eve = TomographyInterleave()
    channel = QuantumChannel(eve, rng_stream(1, "eve"))
    channel.send(Carrier(i % 2, N) for i in range(30000))
    est = eve.record.tomography_estimate()
    assert est.sample_sizes == (10000,) * 3
    assert all(abs(m) <= 3 * se for m, se in zip(est.mean, est.std_error))


def test_walk_guess_single_step_is_fair():
    seeds = 4000
    hits = 0
    for seed in range(seeds):
        g = WalkGuesser(seed)
        true_bit = int(rng_stream(seed, "truth").integers(0, 2))
        eve_guess_walk(g, true_bit)
        hits += g.record.guess_matches[0]
    assert abs(hits / seeds - 0.5) <= 3 * 0.5 / math.sqrt(seeds)


def test_walk_guess_tracks_true_walk_when_right():
    g = WalkGuesser(0)
    truth = walk_init()
    for _ in range(8):
        before = g.walk
        eve_guess_walk(g, None)
        bit = 1 if g.walk == walk_step(before, 1) else 0
        truth = walk_step(truth, bit)
        assert g.basis == truth.current
    assert g.record.guess_matches == []


def test_one_wrong_guess_separates_bases():
    start = walk_init()
    right, wrong = walk_step(start, 1), walk_step(start, 0)
    sep = arc_between(right.current, wrong.current)
    assert sep == pytest.approx(2 * 0.75, abs=1e-12)
    c = math.cos(sep)
    # Bob's error per carrier once Eve measures on the wrong basis
    assert bob_flip_probability(wrong.current, right.current) == pytest.approx((1 - c * c) / 2, abs=1e-15)
    assert (1 - c * c) / 2 > 0.49


def test_wrong_guess_session_aborts():
    cfg = SessionConfig(shared_secret_seed=0, basis_change_period=16)
    aborted = 0
    guessed_all = 0
    for seed in range(60):
        eve = WalkGuesser(seed, cfg.initial_basis)
        s = Session(cfg, seed, eve, record=False)
        r = s.run(random_payloads(cfg.scheme, 3 * 16 + 100, rng_stream(seed, "m")))
        if all(eve.record.guess_matches):
            assert not r.aborted
            guessed_all += 1
        else:
            assert r.aborted
            aborted += 1
    assert aborted > 40


def test_make_strategy():
    assert isinstance(make_strategy("fixed_axis", axis=(0, 0, 1)), FixedAxisMeasure)
    assert isinstance(make_strategy("passive"), PassiveOff)
    with pytest.raises(ValueError):
        make_strategy("quantum_memory")


def test_record_exports_transcript_lines():
    eve, _, _ = simulate_flips(N, 5, 6)
    lines = eve.record.to_events()
    assert [l["index"] for l in lines] == list(range(5))
    assert all(l["payload"]["strategy"] == "fixed_axis" for l in lines)
