import numpy as np
import pytest

from qsslab import protocol, qss, search, states
from qsslab.errors import BadParameters
from conftest import eq10_source, eq11_ancilla


def test_score_cnot_example_is_success():
    score = search.score_round(
        eq10_source(), eq11_ancilla(), protocol.named_round("bilateral-cnot")
    )
    assert score >= 1.0 - 1e-9


def test_score_identity_on_werner_pair_below_one():
    w = states.werner(0.9)
    score = search.score_round(w, w, protocol.named_round("identity"))
    assert score < 1.0 - 1e-3


def test_score_swap_case():
    rho_s = states.pure_state(states.basis_ket((0, 0), (2, 2)))
    rho_a = states.pure_state(states.PHI_PLUS)
    score = search.score_round(rho_s, rho_a, protocol.named_round("swap"))
    assert score >= 1.0 - 1e-9


def test_optimize_finds_cnot_via_seed():
    rep = search.optimize_protocol(
        eq10_source(), eq11_ancilla(), restarts=4, iters=50, seed=0
    )
    assert rep.success
    assert rep.best_outcome.probability >= 0.12
    assert abs(rep.best_outcome.probability - 0.125) <= 1e-6
    assert states.fidelity_pure(rep.best_outcome.post_state, states.PHI_PLUS) >= 1 - 1e-9


def test_optimize_finds_swap_via_seed():
    rho_s = states.pure_state(states.basis_ket((0, 0), (2, 2)))
    rho_a = states.pure_state(states.PHI_PLUS)
    rep = search.optimize_protocol(rho_s, rho_a, restarts=4, iters=50, seed=0)
    assert rep.success
    assert abs(rep.best_outcome.probability - 1.0) <= 1e-6


def test_optimize_rejects_bad_restarts():
    with pytest.raises(BadParameters):
        search.optimize_protocol(states.werner(0.9), states.werner(0.9), restarts=0)


def test_optimize_deterministic_and_worker_independent():
    rho_s = states.werner(0.85)
    rho_a = states.werner(0.85)
    rep1 = search.optimize_protocol(rho_s, rho_a, restarts=4, iters=60, seed=7)
    rep2 = search.optimize_protocol(rho_s, rho_a, restarts=4, iters=60, seed=7)
    rep3 = search.optimize_protocol(
        rho_s, rho_a, restarts=4, iters=60, seed=7, workers=2
    )
    assert rep1.trace == rep2.trace == rep3.trace
    assert rep1.best_score == rep2.best_score == rep3.best_score
    assert np.array_equal(rep1.best_round.u_alice, rep3.best_round.u_alice)
    assert np.array_equal(rep1.best_round.u_bob, rep3.best_round.u_bob)


def test_trace_has_one_entry_per_restart():
    rep = search.optimize_protocol(
        states.werner(0.9), states.werner(0.9), restarts=5, iters=30, seed=1
    )
    assert len(rep.trace) == 5
    assert rep.restarts_used == 5
    assert all(0.0 <= t <= 1.0 for t in rep.trace)
    assert rep.best_score == max(rep.trace)


def test_impossibility_probe_werner_pair():
    w = states.werner(0.9)
    result = search.impossibility_probe(w, w, budget=2000, seed=0)
    assert result.verdict_source.status == qss.QSS
    assert result.verdict_ancilla.status == qss.QSS
    assert not result.report.success
    assert not result.violation


def test_impossibility_probe_eq10_eq11_positive():
    result = search.impossibility_probe(
        eq10_source(), eq11_ancilla(), budget=2000, seed=0
    )
    assert result.verdict_source.status == qss.NOT_QSS_CANDIDATE
    assert result.verdict_ancilla.status == qss.NOT_QSS_CANDIDATE
    assert result.report.success
    assert not result.violation


def test_report_serialization():
    rep = search.optimize_protocol(
        eq10_source(), eq11_ancilla(), restarts=3, iters=20, seed=0
    )
    import json

    data = rep.to_dict()
    text = json.dumps(data, sort_keys=True)
    assert json.loads(text) == data
    assert data["success"] is True
