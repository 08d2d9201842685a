"""Derivative-free search over protocol rounds.

Scores a round by the best outcome's simultaneous probability / purity /
entanglement margins, climbs the score with a seeded coordinate pattern
search around Haar-random and named starting rounds, and juxtaposes the
result with QSS verdicts to probe the impossibility statements: a verified
(QSS, QSS) pair together with a successful search would be a theorem
violation and must never occur.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field

import numpy as np

from . import entanglement, linalg, protocol, qss, states
from .config import TOLERANCES
from .errors import BadParameters

_P_PROB = TOLERANCES["success_probability"]
_P_PURITY = TOLERANCES["success_purity"]
_P_ENT = TOLERANCES["success_entanglement"]


def outcome_score(prob, post_matrix, dims):
    """Product of probability, purity, and entanglement margins in [0, 1].

    Equals 1 exactly when the outcome meets the success predicate
    (probability > 1e-6, purity >= 1 - 1e-6, entanglement >= 1e-3).
    """
    if prob <= 0.0 or post_matrix is None:
        return 0.0
    m_p = min(1.0, prob / _P_PROB)
    purity = float(np.real(np.trace(post_matrix @ post_matrix)))
    floor = 1.0 / post_matrix.shape[0]  # maximally mixed
    m_pure = min(1.0, max(0.0, (purity - floor) / (1.0 - _P_PURITY - floor)))
    m_ent = min(1.0, _entanglement_witness(post_matrix, dims) / _P_ENT)
    return m_p * m_pure * m_ent


def _entanglement_witness(post_matrix, dims):
    """Concurrence for two qubits; second Schmidt coefficient of the
    principal eigenvector otherwise."""
    if tuple(dims) == (2, 2):
        return entanglement.concurrence_matrix(post_matrix)
    vals, vecs = np.linalg.eigh(post_matrix)
    coeffs = entanglement.schmidt_coefficients(vecs[:, -1], dims)
    return float(coeffs[1]) if len(coeffs) > 1 else 0.0


def outcome_success(prob, post_state: states.QuantumState) -> bool:
    """The exact success predicate, with the careful concurrence route."""
    if post_state is None or prob <= _P_PROB:
        return False
    if states.purity(post_state) < 1.0 - _P_PURITY:
        return False
    if tuple(post_state.dims) == (2, 2):
        ent = entanglement.concurrence(post_state)
    else:
        vals, vecs = np.linalg.eigh(post_state.matrix)
        coeffs = entanglement.schmidt_coefficients(vecs[:, -1], post_state.dims)
        ent = float(coeffs[1]) if len(coeffs) > 1 else 0.0
    return ent >= _P_ENT


def score_round(rho_s, rho_a, rnd) -> float:
    """Best outcome score of a round (see outcome_score)."""
    best = 0.0
    for _, prob, block in protocol.run_round_raw(rho_s, rho_a, rnd):
        if prob <= TOLERANCES["probability_floor"]:
            continue
        best = max(best, outcome_score(prob, block / prob, rho_s.dims))
    return best


@dataclass(frozen=True)
class SearchReport:
    best_score: float
    best_round: protocol.ProtocolRound
    best_outcome: protocol.RoundOutcome | None
    restarts_used: int
    success: bool
    trace: tuple = ()

    def to_dict(self):
        best_outcome = None
        if self.best_outcome is not None:
            post = self.best_outcome.post_state
            best_outcome = {
                "outcome": self.best_outcome.outcome_index,
                "probability": self.best_outcome.probability,
                "post_state": states.state_to_dict(post) if post else None,
            }
        return {
            "best_score": self.best_score,
            "best_round": {
                "u_alice": states.complex_to_pairs(self.best_round.u_alice),
                "u_bob": states.complex_to_pairs(self.best_round.u_bob),
            },
            "best_outcome": best_outcome,
            "restarts_used": self.restarts_used,
            "success": self.success,
            "trace": list(self.trace),
        }


class _RoundScorer:
    """Shared fast path: caches the factor permutation and dimensions."""

    def __init__(self, rho_s, rho_a):
        self.rho_s = rho_s
        self.rho_a = rho_a
        dsa, dsb = rho_s.dims
        daa, dab = rho_a.dims
        self.da = dsa * daa
        self.db = dsb * dab
        self.perm = protocol.permutation_matrix(
            [dsa, dsb, daa, dab], (0, 2, 1, 3)
        )
        self.total = np.kron(rho_s.matrix, rho_a.matrix)
        self.shape = (dsa, dsb, daa, dab)

    def score(self, u_alice, u_bob):
        dsa, dsb, daa, dab = self.shape
        u = self.perm.T @ np.kron(u_alice, u_bob) @ self.perm
        out = u @ self.total @ np.conj(u.T)
        t = out.reshape(self.shape + self.shape)
        best = 0.0
        for ma in range(daa):
            for mb in range(dab):
                block = t[:, :, ma, mb, :, :, ma, mb].reshape(
                    dsa * dsb, dsa * dsb
                )
                prob = float(np.real(np.trace(block)))
                if prob <= TOLERANCES["probability_floor"]:
                    continue
                best = max(
                    best, outcome_score(prob, block / prob, self.rho_s.dims)
                )
        return best


def _restart_seeds(rho_s, rho_a, seeds_in):
    """Named protocols first, then caller-provided rounds."""
    dsa, dsb = rho_s.dims
    daa, dab = rho_a.dims
    rounds = [protocol.named_round("identity", rho_s.dims, rho_a.dims)]
    if (dsa, dsb) == (daa, dab):
        rounds.append(protocol.named_round("swap", rho_s.dims, rho_a.dims))
    if (dsa, dsb, daa, dab) == (2, 2, 2, 2):
        rounds.append(protocol.named_round("bilateral-cnot"))
    rounds.extend(seeds_in or [])
    return rounds


def _run_restart(scorer, base_ua, base_ub, iters):
    """Pattern search around a base round; returns (score, uA, uB, evals)."""
    da, db = scorer.da, scorer.db
    na, nb = da * da, db * db

    def evaluate(theta):
        ua = base_ua @ linalg.parameterized_unitary(theta[:na], da)
        ub = base_ub @ linalg.parameterized_unitary(theta[na:], db)
        return scorer.score(ua, ub), ua, ub

    theta = np.zeros(na + nb)
    best, ua, ub = evaluate(theta)
    evals = 1
    step = 0.3
    while step > 1e-4 and evals < iters and best < 1.0:
        improved = False
        for i in range(na + nb):
            if evals >= iters:
                break
            for sgn in (1.0, -1.0):
                cand = theta.copy()
                cand[i] += sgn * step
                val, cua, cub = evaluate(cand)
                evals += 1
                if val > best:
                    theta, best, ua, ub = cand, val, cua, cub
                    improved = True
                    break
                if evals >= iters:
                    break
        if not improved:
            step *= 0.5
    return best, ua, ub, evals


def _restart_task(args):
    rho_s, rho_a, seed, index, iters, seed_rounds = args
    scorer = _RoundScorer(rho_s, rho_a)
    if index < len(seed_rounds):
        base = seed_rounds[index]
        base_ua, base_ub = base.u_alice, base.u_bob
    else:
        rng = np.random.default_rng([seed, index])
        base_ua = linalg.haar_unitary_from_rng(scorer.da, rng)
        base_ub = linalg.haar_unitary_from_rng(scorer.db, rng)
    best, ua, ub, _ = _run_restart(scorer, base_ua, base_ub, iters)
    return index, best, ua, ub


def optimize_protocol(
    rho_s,
    rho_a,
    restarts=16,
    iters=500,
    seed=0,
    seeds_in=None,
    workers=1,
) -> SearchReport:
    """Best protocol round found over seeded restarts.

    Each restart runs a coordinate pattern search (initial step 0.3 rad,
    halved on failed sweeps, floor 1e-4) in the unitary parameters around
    its starting round, with at most `iters` objective evaluations. Named
    protocol rounds are always among the starting points. Fully
    deterministic for fixed (inputs, seed, restarts, iters), independent of
    worker count.
    """
    if restarts < 1:
        raise BadParameters("restarts must be >= 1")
    seed_rounds = _restart_seeds(rho_s, rho_a, seeds_in)
    tasks = [
        (rho_s, rho_a, seed, r, iters, seed_rounds) for r in range(restarts)
    ]
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_restart_task, tasks))
    else:
        results = [_restart_task(t) for t in tasks]
    results.sort(key=lambda r: r[0])
    trace = tuple(float(r[1]) for r in results)
    best_index, best_score, best_ua, best_ub = max(
        results, key=lambda r: (r[1], -r[0])
    )
    best_round = protocol.ProtocolRound(best_ua, best_ub)
    outcomes = protocol.run_round(rho_s, rho_a, best_round)
    live = [o for o in outcomes if o.post_state is not None]
    best_outcome = None
    if live:
        best_outcome = max(
            live,
            key=lambda o: outcome_score(
                o.probability, o.post_state.matrix, rho_s.dims
            ),
        )
    success = best_outcome is not None and outcome_success(
        best_outcome.probability, best_outcome.post_state
    )
    return SearchReport(
        best_score=float(best_score),
        best_round=best_round,
        best_outcome=best_outcome,
        restarts_used=restarts,
        success=success,
        trace=trace,
    )


@dataclass(frozen=True)
class ProbeResult:
    verdict_source: qss.QssVerdict
    verdict_ancilla: qss.QssVerdict
    report: SearchReport
    violation: bool

    def to_dict(self):
        return {
            "verdict_source": self.verdict_source.to_dict(),
            "verdict_ancilla": self.verdict_ancilla.to_dict(),
            "report": self.report.to_dict(),
            "violation": self.violation,
        }


def impossibility_probe(
    rho_s, rho_a, budget=32000, seed=0, workers=1
) -> ProbeResult:
    """Classify both inputs, then search for a purifying round.

    A (QSS, QSS, success=true) result would contradict the impossibility
    theorem; the flag is surfaced so any occurrence fails loudly in the
    acceptance suite. The probe covers single rounds only and is evidence,
    never proof.
    """
    verdict_s = qss.classify(rho_s, budget=budget, seed=seed)
    verdict_a = qss.classify(rho_a, budget=budget, seed=seed)
    iters = 500
    restarts = max(1, budget // iters)
    report = optimize_protocol(
        rho_s, rho_a, restarts=restarts, iters=iters, seed=seed, workers=workers
    )
    violation = (
        verdict_s.status == qss.QSS
        and verdict_a.status == qss.QSS
        and report.success
    )
    return ProbeResult(verdict_s, verdict_a, report, violation)
