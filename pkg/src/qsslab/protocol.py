"""One round of the purification protocol class, and compositions of rounds.

A round is: attach a fresh ancilla pair, apply local unitaries (Alice on
her source+ancilla factors, Bob on his), measure every ancilla particle in
the computational product basis, and keep the postselected source state.

Storage order for the joint state is [SS_A, SS_B, AS_A, AS_B] (the plain
kron of source and ancilla); the local unitaries act in the order
[SS_A, AS_A, SS_B, AS_B]. The reordering is an explicit permutation
matrix, the single most error-prone spot in this module.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import linalg, states
from .config import TOLERANCES
from .errors import (
    BadParameters,
    DimensionMismatch,
    NonUnitary,
    ZeroProbability,
)


@dataclass(frozen=True)
class ProtocolRound:
    """Local unitaries for one round; measurement is fixed to the
    computational product basis of the ancilla."""

    u_alice: np.ndarray
    u_bob: np.ndarray

    def __post_init__(self):
        ua = np.asarray(self.u_alice, dtype=complex)
        ub = np.asarray(self.u_bob, dtype=complex)
        object.__setattr__(self, "u_alice", ua)
        object.__setattr__(self, "u_bob", ub)
        for u, name in ((ua, "u_alice"), (ub, "u_bob")):
            if u.ndim != 2 or u.shape[0] != u.shape[1]:
                raise DimensionMismatch(f"{name} is not square: {u.shape}")
            if not linalg.is_unitary(u):
                raise NonUnitary(f"{name} is not unitary within tolerance")


@dataclass(frozen=True)
class RoundOutcome:
    outcome_index: str
    probability: float
    post_state: states.QuantumState | None


def permutation_matrix(dims, perm):
    """Matrix sending |i_0 ... i_{k-1}> (factor dims `dims`) to the ket with
    factors reordered as perm."""
    dims = list(dims)
    n = int(np.prod(dims))
    p = np.zeros((n, n))
    new_dims = [dims[j] for j in perm]
    for idx in itertools.product(*[range(d) for d in dims]):
        src = 0
        for i, d in zip(idx, dims):
            src = src * d + i
        dst = 0
        for j, d in zip(perm, new_dims):
            dst = dst * d + idx[j]
        p[dst, src] = 1.0
    return p


def _round_operator(rho_s, rho_a, rnd):
    """Full-space unitary in storage order, plus sanity on dimensions."""
    dsa, dsb = rho_s.dims
    daa, dab = rho_a.dims
    if rnd.u_alice.shape[0] != dsa * daa or rnd.u_bob.shape[0] != dsb * dab:
        raise DimensionMismatch(
            "round unitaries do not match source/ancilla dimensions"
        )
    p = permutation_matrix([dsa, dsb, daa, dab], (0, 2, 1, 3))
    u_act = np.kron(rnd.u_alice, rnd.u_bob)
    return p.T @ u_act @ p


def run_round_raw(rho_s, rho_a, rnd):
    """Outcome labels, probabilities, and unnormalized post matrices.

    Fast path shared by run_round and the protocol search; skips
    QuantumState validation on the outputs.
    """
    u = _round_operator(rho_s, rho_a, rnd)
    total = np.kron(rho_s.matrix, rho_a.matrix)
    total = u @ total @ np.conj(u.T)
    dsa, dsb = rho_s.dims
    daa, dab = rho_a.dims
    t = total.reshape(dsa, dsb, daa, dab, dsa, dsb, daa, dab)
    results = []
    for ma in range(daa):
        for mb in range(dab):
            block = t[:, :, ma, mb, :, :, ma, mb].reshape(dsa * dsb, dsa * dsb)
            prob = float(np.real(np.trace(block)))
            results.append((f"{ma}{mb}", prob, block))
    return results


def run_round(rho_s, rho_a, rnd) -> list[RoundOutcome]:
    """Simulate one round and return every measurement branch."""
    outcomes = []
    for label, prob, block in run_round_raw(rho_s, rho_a, rnd):
        if prob <= TOLERANCES["probability_floor"]:
            outcomes.append(RoundOutcome(label, max(prob, 0.0), None))
            continue
        m = block / prob
        m = (m + np.conj(m.T)) / 2
        outcomes.append(
            RoundOutcome(label, prob, states.QuantumState(m, rho_s.dims))
        )
    return outcomes


def apply_local_filter(rho_s, a, b):
    """Individual-measurement filter A (x) B, normalized, with its
    success probability."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    dsa, dsb = rho_s.dims
    if a.shape != (dsa, dsa) or b.shape != (dsb, dsb):
        raise DimensionMismatch("filter shapes do not match source dims")
    return apply_global_filter(rho_s, np.kron(a, b))


def apply_global_filter(rho_s, c):
    """Collective-measurement filter C on the whole source space."""
    c = np.asarray(c, dtype=complex)
    if c.shape != (rho_s.dim, rho_s.dim):
        raise DimensionMismatch("filter shape does not match source dimension")
    m = c @ rho_s.matrix @ np.conj(c.T)
    prob = float(np.real(np.trace(m)))
    if prob <= 1e-12:
        raise ZeroProbability(f"filter annihilates the state (trace {prob})")
    m = m / prob
    m = (m + np.conj(m.T)) / 2
    return states.QuantumState(m, rho_s.dims), prob


# ---------------------------------------------------------------------------
# named protocols

CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def swap_matrix(d):
    s = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            s[j * d + i, i * d + j] = 1.0
    return s


def named_round(name, dims_s=(2, 2), dims_a=(2, 2)) -> ProtocolRound:
    """Built-in rounds: "identity", "swap", "bilateral-cnot"."""
    dsa, dsb = dims_s
    daa, dab = dims_a
    if name == "identity":
        return ProtocolRound(np.eye(dsa * daa), np.eye(dsb * dab))
    if name == "swap":
        if dsa != daa or dsb != dab:
            raise BadParameters("swap needs matching source/ancilla dims")
        return ProtocolRound(swap_matrix(dsa), swap_matrix(dsb))
    if name == "bilateral-cnot":
        if (dsa, dsb, daa, dab) != (2, 2, 2, 2):
            raise BadParameters("bilateral-cnot is a two-qubit protocol")
        return ProtocolRound(CNOT, CNOT)
    raise BadParameters(f"unknown protocol name {name!r}")


def cnot_example(p1, lambda2) -> list[RoundOutcome]:
    """Bilateral CNOT on p1*Phi+ + (1-p1)*|01><01| with ancilla
    (1-lambda2)*|11><11| + lambda2*Psi+.

    Outcome "01" carries probability p1*lambda2/2 and a pure Phi+ source.
    """
    if not (0.0 < p1 < 1.0 and 0.0 < lambda2 < 1.0):
        raise BadParameters("p1 and lambda2 must lie in (0, 1)")
    rho_s = states.QuantumState(
        p1 * np.outer(states.PHI_PLUS, np.conj(states.PHI_PLUS))
        + (1 - p1) * np.outer(states.basis_ket((0, 1), (2, 2)),
                              np.conj(states.basis_ket((0, 1), (2, 2)))),
        (2, 2),
    )
    rho_a = states.QuantumState(
        (1 - lambda2) * np.outer(states.basis_ket((1, 1), (2, 2)),
                                 np.conj(states.basis_ket((1, 1), (2, 2))))
        + lambda2 * np.outer(states.PSI_PLUS, np.conj(states.PSI_PLUS)),
        (2, 2),
    )
    return run_round(rho_s, rho_a, named_round("bilateral-cnot"))


# ---------------------------------------------------------------------------
# multi-round chaining

@dataclass(frozen=True)
class Branch:
    """One leaf of the branch tree: outcome labels per round, cumulative
    probability, and the final source state (None if the branch died)."""

    labels: tuple
    probability: float
    post_state: states.QuantumState | None


def run_sequence(rho_s, rounds, policy="all-branches") -> list[Branch]:
    """Chain rounds, each consuming a fresh ancilla.

    policy "all-branches" expands every outcome; "postselect-best-score"
    keeps only the best-scoring surviving outcome per round.
    """
    if policy not in ("all-branches", "postselect-best-score"):
        raise BadParameters(f"unknown policy {policy!r}")
    branches = [Branch((), 1.0, rho_s)]
    for rho_a, rnd in rounds:
        nxt = []
        for br in branches:
            if br.post_state is None:
                nxt.append(br)
                continue
            outcomes = run_round(br.post_state, rho_a, rnd)
            live = [
                Branch(br.labels + (o.outcome_index,),
                       br.probability * o.probability, o.post_state)
                for o in outcomes
            ]
            if policy == "postselect-best-score":
                from .search import outcome_score

                scored = [
                    (outcome_score(o.probability, o.post_state.matrix,
                                   o.post_state.dims), i)
                    for i, o in enumerate(outcomes)
                    if o.post_state is not None
                ]
                if scored:
                    best = max(scored)[1]
                    live = [live[best]]
            nxt.extend(live)
        branches = nxt
    return branches
