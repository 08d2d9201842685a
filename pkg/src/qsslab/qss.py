"""Quasi-separability classification.

A state is quasi-separable (QSS) when some reweighting of one of its
pure-state decompositions is separable. Full-rank states always are (the
uniform reweighting of the eigenbasis is maximally mixed); rank-deficient
two-qubit states are decided through the diagonal spin-flip decomposition;
everything else gets a budgeted derivative-free search.

A QSS verdict always carries a certificate that is re-verified before it
is returned. NOT_QSS_CANDIDATE is a candidate status, never a proof.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import entanglement, linalg, states
from .config import TOLERANCES
from .errors import DimensionMismatch, QsslabError

QSS = "QSS"
NOT_QSS_CANDIDATE = "NOT_QSS_CANDIDATE"
UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class QssVerdict:
    status: str
    certificate: tuple | None = None  # (Ensemble, weights)
    evidence: dict = field(default_factory=dict)

    def to_dict(self):
        cert = None
        if self.certificate is not None:
            ens, w = self.certificate
            cert = {
                "ensemble": states.ensemble_to_dict(ens),
                "weights": list(np.asarray(w, dtype=float)),
            }
        evidence = {}
        for k, v in self.evidence.items():
            if isinstance(v, np.ndarray):
                evidence[k] = v.tolist()
            else:
                evidence[k] = v
        return {"status": self.status, "certificate": cert, "evidence": evidence}


def verify_certificate(rho: states.QuantumState, ensemble, weights) -> bool:
    """Independent check: the ensemble decomposes rho and its reweighting
    is separable.

    Separability is checked by PPT; exact for d_A*d_B <= 6, and a uniform
    reweighting that lands exactly on I/d is accepted at any dimension
    (explicit product decomposition of the identity).
    """
    recon = states.from_ensemble(ensemble)
    if np.max(np.abs(recon.matrix - rho.matrix)) > TOLERANCES["reconstruction"]:
        return False
    new_state = states.reweight(ensemble, weights)
    d = new_state.dim
    if np.max(np.abs(new_state.matrix - np.eye(d) / d)) <= 1e-10:
        return True
    if tuple(rho.dims) == (2, 2):
        # both exact tests must agree; the concurrence gate stops
        # reweightings that push the PT eigenvalue just above threshold by
        # starving one member's weight while staying entangled
        return entanglement.ppt_separable(new_state) and \
            entanglement.concurrence(new_state) <= TOLERANCES["concurrence_zero"]
    if len(rho.dims) == 2 and rho.dims[0] * rho.dims[1] <= 6:
        return entanglement.ppt_separable(new_state)
    # beyond the PPT-exact dimensions this is a necessary condition only
    return entanglement.min_pt_eigenvalue(
        new_state.matrix, (rho.dims[0], int(np.prod(rho.dims[1:])))
    ) >= TOLERANCES["ppt_min_eig"]


def _verified(rho, ensemble, weights, evidence):
    if not verify_certificate(rho, ensemble, weights):
        raise QsslabError("internal: QSS certificate failed verification")
    return QssVerdict(QSS, (ensemble, np.asarray(weights, dtype=float)), evidence)


def full_rank_certificate(rho: states.QuantumState) -> QssVerdict:
    """Theorem-2 route: full rank means the uniform reweighting of the
    eigenbasis is I/d, which is separable."""
    vals, _ = rho.eigensystem()
    rank = linalg.numerical_rank(vals)
    d = rho.dim
    if rank < d:
        return QssVerdict(UNKNOWN, evidence={"rank": rank})
    ens = states.spectral_ensemble(rho)
    w = np.full(len(ens), 1.0 / len(ens))
    return _verified(rho, ens, w, {"rank": rank, "route": "full-rank"})


def _reweighted_matrix(ensemble, weights):
    return states.reweight(ensemble, weights).matrix


def reweight_certificate_2q(rho: states.QuantumState) -> QssVerdict:
    """Rank-deficient two-qubit criterion.

    Uses the diagonal spin-flip decomposition {|z_i>}: shrinking the weight
    on z_1 rescales the lambda' spectrum, so a separable reweighting exists
    whenever any of lambda'_2..4 is nonzero. If they all vanish while
    lambda'_1 > 0, the state is flagged as a non-QSS candidate.
    """
    if tuple(rho.dims) != (2, 2):
        raise DimensionMismatch(f"expected a 2x2 system, got dims {rho.dims}")
    rank = rho.rank()
    if entanglement.concurrence(rho) <= TOLERANCES["concurrence_zero"]:
        ens = states.spectral_ensemble(rho)
        return _verified(rho, ens, ens.weights,
                         {"rank": rank, "route": "already-separable"})
    md = entanglement.magic_decomposition(rho)
    lam = md.lambda_primes
    evidence = {"lambda_primes": lam, "rank": rank}
    if np.all(lam[1:] <= TOLERANCES["concurrence_zero"]):
        return QssVerdict(NOT_QSS_CANDIDATE, evidence=evidence)

    ens = md.ensemble(rho.dims)
    w = ens.weights
    q_lo = TOLERANCES["min_certificate_weight"]
    q_hi = float(w[0])

    def weights_at(q):
        out = np.array(w, dtype=float)
        out[0] = q
        out[1:] *= (1.0 - q) / (1.0 - w[0])
        return out

    def conc_at(q):
        return entanglement.concurrence_matrix(
            _reweighted_matrix(ens, weights_at(q))
        )

    q = _golden_section(conc_at, q_lo, q_hi, iters=200)
    if conc_at(q) > TOLERANCES["concurrence_zero"]:
        # monotonicity of the concurrence in q is unproven; fall back to a grid
        grid = np.linspace(q_lo, q_hi, 1000)
        q = min(grid, key=conc_at)

    # polish: push the candidate into the interior of the separable region by
    # maximizing the minimum partial-transpose eigenvalue locally
    def neg_pt_at(q):
        return -entanglement.min_pt_eigenvalue(
            _reweighted_matrix(ens, weights_at(q)), rho.dims
        )

    lo = max(q_lo, q - 0.05 * (q_hi - q_lo))
    hi = min(q_hi, q + 0.05 * (q_hi - q_lo))
    q = _golden_section(neg_pt_at, lo, hi, iters=200)
    wq = weights_at(q)
    if conc_at(q) <= TOLERANCES["concurrence_zero"] and entanglement.ppt_separable(
        states.reweight(ens, wq)
    ):
        evidence["route"] = "z1-reweighting"
        evidence["z1_weight"] = float(q)
        return _verified(rho, ens, wq, evidence)
    evidence["best_concurrence"] = conc_at(q)
    return QssVerdict(UNKNOWN, evidence=evidence)


def _golden_section(f, lo, hi, iters=200):
    """Golden-section minimizer for a unimodal scalar function."""
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - phi * (b - a)
    d = a + phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
        if b - a < 1e-15:
            break
    return c if fc <= fd else d


def heuristic_search(rho: states.QuantumState, budget=10000, seed=0) -> QssVerdict:
    """General-dimension fallback: search decompositions and weights for a
    reweighting whose partial transpose is positive.

    Maximizes the minimum partial-transpose eigenvalue over (unitary mixing
    of the spectral ensemble, weight simplex) by seeded pattern search.
    Deterministic for a fixed seed.
    """
    if len(rho.dims) < 2:
        raise DimensionMismatch("need an explicit bipartition")
    pt_dims = (rho.dims[0], int(np.prod(rho.dims[1:])))
    rank = rho.rank()
    d = rho.dim
    ens = states.spectral_ensemble(rho)
    l = len(ens)
    evidence = {"rank": rank, "budget": budget}

    if entanglement.min_pt_eigenvalue(rho.matrix, pt_dims) >= TOLERANCES["ppt_min_eig"]:
        evidence["route"] = "already-ppt"
        if rho.dims[0] * pt_dims[1] > 6:
            evidence["separability"] = "PPT-only (necessary condition)"
        return _verified(rho, ens, ens.weights, evidence)
    if rank == d:
        return full_rank_certificate(rho)
    if l == 1:
        evidence["route"] = "rank-1"
        evidence["best_pt_eigenvalue"] = entanglement.min_pt_eigenvalue(
            rho.matrix, pt_dims
        )
        return QssVerdict(UNKNOWN, evidence=evidence)

    x = np.array([np.sqrt(w) * v for w, v in ens.members])
    floor = TOLERANCES["min_certificate_weight"]

    def objective(params):
        theta = params[: l * l]
        raw = params[l * l:]
        u = linalg.parameterized_unitary(theta, l)
        z = u @ x
        norms = np.real(np.einsum("ij,ij->i", np.conj(z), z))
        weights = raw * raw + floor
        weights /= weights.sum()
        m = np.zeros((d, d), dtype=complex)
        for wi, zi, ni in zip(weights, z, norms):
            if ni > 1e-14:
                m += (wi / ni) * np.outer(zi, np.conj(zi))
        m /= np.real(np.trace(m))
        return entanglement.min_pt_eigenvalue(m, pt_dims), (u, weights)

    n_params = l * l + l
    best_val, best_aux = -np.inf, None
    evals = 0
    restart = 0
    while evals < budget:
        r_rng = np.random.default_rng([seed, restart])
        if restart == 0:
            p = np.concatenate([np.zeros(l * l), np.ones(l)])
        else:
            p = np.concatenate([
                r_rng.uniform(-np.pi, np.pi, l * l),
                r_rng.uniform(0.2, 1.0, l),
            ])
        val, aux = objective(p)
        evals += 1
        step = 0.3
        while step > 1e-4 and evals < budget:
            improved = False
            for i in range(n_params):
                for sgn in (1.0, -1.0):
                    q = p.copy()
                    q[i] += sgn * step
                    v, a = objective(q)
                    evals += 1
                    if v > val:
                        p, val, aux = q, v, a
                        improved = True
                        break
                    if evals >= budget:
                        break
                if evals >= budget:
                    break
            if val >= TOLERANCES["ppt_min_eig"]:
                break
            if not improved:
                step *= 0.5
        if val > best_val:
            best_val, best_aux = val, aux
        if best_val >= TOLERANCES["ppt_min_eig"]:
            break
        restart += 1

    evidence["best_pt_eigenvalue"] = float(best_val)
    evidence["evaluations"] = evals
    if best_val >= TOLERANCES["ppt_min_eig"] and best_aux is not None:
        u, weights = best_aux
        z_ens = states.transform_ensemble(ens, u)
        if len(z_ens) == len(weights):
            evidence["route"] = "heuristic-search"
            if rho.dims[0] * int(np.prod(rho.dims[1:])) > 6:
                evidence["separability"] = "PPT-only (necessary condition)"
            try:
                return _verified(rho, z_ens, weights / weights.sum(), evidence)
            except QsslabError:
                pass
    return QssVerdict(UNKNOWN, evidence=evidence)


def classify(rho: states.QuantumState, budget=10000, seed=0) -> QssVerdict:
    """Full pipeline: full rank -> separable -> two-qubit criterion ->
    heuristic search.

    The full-rank route runs first so full-rank states always get the
    canonical uniform-weights certificate (reweighting to I/d), whether or
    not they happen to be separable already.
    """
    verdict = full_rank_certificate(rho)
    if verdict.status == QSS:
        return verdict
    pt_dims = (rho.dims[0], int(np.prod(rho.dims[1:])))
    if entanglement.min_pt_eigenvalue(rho.matrix, pt_dims) >= TOLERANCES["ppt_min_eig"]:
        if rho.dims[0] * pt_dims[1] <= 6:
            ens = states.spectral_ensemble(rho)
            return _verified(rho, ens, ens.weights, {"route": "already-separable",
                                                     "rank": rho.rank()})
    if tuple(rho.dims) == (2, 2):
        return reweight_certificate_2q(rho)
    return heuristic_search(rho, budget=budget, seed=seed)
