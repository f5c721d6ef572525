"""Steering plus a probabilistic cloner gives a one-bit signal.

Alice steers Bob's half of a purification into one of two ensembles with the
same average. Quantum mechanics keeps every linear statistic of Bob's state
blind to her choice; a cloner that succeeds on some ensemble members but not
others is not linear in that way, and its success rate leaks the choice.

Tensor order is always Alice first, Bob second. Measuring Alice with an
element ``M`` leaves Bob in ``S M^T S^dag`` where ``S`` is the transpose of
the coefficient matrix of the purification; the steering construction inverts
that transpose convention.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import stats

from raylab.channels import KrausChannel, apply
from raylab.hilbert import as_vector, check_density, eigvalsh_sym, fidelity, trace_distance


@dataclass(frozen=True, eq=False)
class Ensemble:
    weights: np.ndarray
    states: tuple

    def __init__(self, weights: Sequence[float], states: Sequence):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size != len(states) or w.size == 0:
            raise ValueError("need one weight per state")
        if np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
            raise ValueError("ensemble weights must be a probability vector")
        vs = tuple(as_vector(v) for v in states)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "states", vs)

    @property
    def dim(self) -> int:
        return self.states[0].size

    def average(self) -> np.ndarray:
        return sum(q * np.outer(v, v.conj()) for q, v in zip(self.weights, self.states))


def purify(rho_b, tol: float = 1e-12) -> np.ndarray:
    """``sum_i sqrt(l_i) |i>_A |e_i>_B`` over the support of ``rho_b``."""
    rho_b = check_density(rho_b)
    lam, vecs = np.linalg.eigh(0.5 * (rho_b + rho_b.conj().T))
    keep = lam > tol
    lam, vecs = lam[keep][::-1], vecs[:, keep][:, ::-1]
    dim_a = lam.size
    omega = sum(np.sqrt(l) * np.kron(np.eye(dim_a)[i], vecs[:, i]) for i, l in enumerate(lam))
    return np.asarray(omega, dtype=complex)


def _steering_map(purification, dim_b: int) -> np.ndarray:
    omega = np.asarray(purification, dtype=complex)
    if omega.size % dim_b:
        raise ValueError("purification length is not a multiple of Bob's dimension")
    return omega.reshape(omega.size // dim_b, dim_b).T


def bob_marginal(purification, dim_b: int) -> np.ndarray:
    s = _steering_map(purification, dim_b)
    return s @ s.conj().T


def steering_measurement(purification, target: Ensemble, tol: float = 1e-9) -> list[np.ndarray]:
    """Alice POVM whose outcomes steer Bob into ``target``."""
    s = _steering_map(purification, target.dim)
    rho_b = s @ s.conj().T
    if np.abs(target.average() - rho_b).max() > tol:
        raise ValueError("target ensemble does not average to Bob's marginal")
    s_inv = np.linalg.pinv(s, rcond=1e-12)
    elements = []
    for q, v in zip(target.weights, target.states):
        m_t = q * s_inv @ np.outer(v, v.conj()) @ s_inv.conj().T
        elements.append(m_t.T)
    dim_a = s.shape[1]
    # off-support remainder annihilates the purification; fold it into outcome 0
    elements[0] = elements[0] + (np.eye(dim_a) - sum(elements))
    return elements


def conditional_states(purification, povm: Sequence[np.ndarray], dim_b: int) -> list[np.ndarray]:
    """Unnormalized Bob states left by each Alice outcome."""
    s = _steering_map(purification, dim_b)
    return [s @ m.T @ s.conj().T for m in povm]


def _check_povm(povm, tol: float = 1e-10) -> None:
    total = sum(povm)
    if np.abs(total - np.eye(total.shape[0])).max() > tol:
        raise ValueError("POVM elements do not sum to the identity")
    if any(eigvalsh_sym(m)[0] < -tol for m in povm):
        raise ValueError("POVM element is not PSD")


def _check_steering(purification, povm, target: Ensemble, tol: float = 1e-9) -> None:
    for sigma, q, v in zip(conditional_states(purification, povm, target.dim),
                           target.weights, target.states):
        weight = np.trace(sigma).real
        if abs(weight - q) > tol:
            raise ValueError(f"steered weight {weight!r} differs from target {q!r}")
        if q > tol and np.vdot(v, sigma @ v).real / weight < 1 - tol:
            raise ValueError("steered state differs from the target member")


@dataclass(frozen=True, eq=False)
class SteeringScenario:
    rho_b: np.ndarray
    ensemble0: Ensemble
    ensemble1: Ensemble
    purification: np.ndarray
    alice_povm0: tuple
    alice_povm1: tuple

    def __post_init__(self):
        for ens in (self.ensemble0, self.ensemble1):
            if np.abs(ens.average() - self.rho_b).max() > 1e-10:
                raise ValueError("ensemble does not average to rho_B")
        for povm, ens in ((self.alice_povm0, self.ensemble0), (self.alice_povm1, self.ensemble1)):
            _check_povm(povm)
            _check_steering(self.purification, povm, ens)

    @property
    def dim_b(self) -> int:
        return self.rho_b.shape[0]

    def povm(self, bit: int) -> tuple:
        return self.alice_povm0 if bit == 0 else self.alice_povm1

    def ensemble(self, bit: int) -> Ensemble:
        return self.ensemble0 if bit == 0 else self.ensemble1

    @classmethod
    def from_ensembles(cls, ensemble0: Ensemble, ensemble1: Ensemble) -> "SteeringScenario":
        rho_b = ensemble0.average()
        omega = purify(rho_b)
        return cls(rho_b, ensemble0, ensemble1, omega,
                   tuple(steering_measurement(omega, ensemble0)),
                   tuple(steering_measurement(omega, ensemble1)))


def canonical_scenario() -> SteeringScenario:
    """Computational versus conjugate basis halves of the maximally mixed qubit."""
    r = 2 ** -0.5
    e0 = Ensemble([0.5, 0.5], [[1, 0], [0, 1]])
    e1 = Ensemble([0.5, 0.5], [[r, r], [r, -r]])
    return SteeringScenario.from_ensembles(e0, e1)


@dataclass(frozen=True, eq=False)
class CloneOracle:
    """Counterfactual cloner that succeeds with probability ``p_j`` on member ``j``.

    ``off_set_policy`` fixes what happens on states outside the set: ``"zero"``
    never succeeds, ``"overlap_weighted"`` succeeds with ``max_j p_j |<s_j|v>|^2``.
    """

    states: tuple
    success_probs: tuple
    off_set_policy: str = "zero"

    def __init__(self, states: Sequence, success_probs, off_set_policy: str = "zero"):
        vs = tuple(as_vector(v) for v in states)
        if not vs:
            raise ValueError("clone oracle needs a nonempty state set")
        probs = np.broadcast_to(np.asarray(success_probs, dtype=float), (len(vs),))
        if np.any(probs <= 0) or np.any(probs > 1):
            raise ValueError("success probabilities must lie in (0, 1]")
        if off_set_policy not in ("zero", "overlap_weighted"):
            raise ValueError(f"unknown off-set policy {off_set_policy!r}")
        object.__setattr__(self, "states", vs)
        object.__setattr__(self, "success_probs", tuple(float(p) for p in probs))
        object.__setattr__(self, "off_set_policy", off_set_policy)

    def success_probability(self, state) -> float:
        v = np.asarray(state, dtype=complex)
        fids = np.array([fidelity(s, v) for s in self.states])
        member = int(np.argmax(fids))
        if fids[member] > 1 - 1e-9:
            return self.success_probs[member]
        if self.off_set_policy == "zero":
            return 0.0
        return float(np.max(np.asarray(self.success_probs) * fids))


class CloneResult(NamedTuple):
    success: bool
    output: np.ndarray | None


def clone_attempt(oracle: CloneOracle, state, seed=None) -> CloneResult:
    rng = np.random.default_rng(seed)
    v = np.asarray(state, dtype=complex)
    if v.ndim == 2:
        w, vecs = np.linalg.eigh(v)
        v = vecs[:, -1]
    if rng.random() < oracle.success_probability(v):
        return CloneResult(True, np.kron(v, v))
    return CloneResult(False, None)


def steered_ensemble(scenario: SteeringScenario, bit: int) -> tuple[np.ndarray, list]:
    """Weights and normalized Bob states produced by Alice's measurement ``bit``."""
    sigmas = conditional_states(scenario.purification, scenario.povm(bit), scenario.dim_b)
    weights, states = [], []
    for sigma in sigmas:
        q = np.trace(sigma).real
        weights.append(q)
        _, vecs = np.linalg.eigh(0.5 * (sigma + sigma.conj().T))
        states.append(vecs[:, -1])
    return np.array(weights), states


class SignalingGap(NamedTuple):
    p0: float
    p1: float
    bob_state_distance: float


def signaling_gap(scenario: SteeringScenario, oracle: CloneOracle) -> SignalingGap:
    rates, averages = [], []
    for bit in (0, 1):
        weights, states = steered_ensemble(scenario, bit)
        rates.append(float(sum(q * oracle.success_probability(v) for q, v in zip(weights, states))))
        averages.append(sum(conditional_states(scenario.purification, scenario.povm(bit), scenario.dim_b)))
    dist = trace_distance(*averages)
    if dist >= 1e-12:
        raise AssertionError(f"Bob's unconditional state depends on Alice's choice ({dist:.3e})")
    return SignalingGap(rates[0], rates[1], dist)


def chernoff_bound(p0: float, p1: float, repetitions: int) -> float:
    return float(np.exp(-repetitions * (p0 - p1) ** 2 / 2))


def exact_decode_error(p0: float, p1: float, repetitions: int) -> float:
    """Error of midpoint thresholding with a fair coin on ties, uniform hidden bit."""
    if p0 == p1:
        raise ValueError("zero gap: nothing to decode")
    hi, lo = max(p0, p1), min(p0, p1)
    thr = repetitions * (p0 + p1) / 2
    k = np.arange(repetitions + 1)
    tie = np.isclose(k, thr)
    f_hi = stats.binom.pmf(k, repetitions, hi)
    f_lo = stats.binom.pmf(k, repetitions, lo)
    err_hi = f_hi[(k < thr) & ~tie].sum() + 0.5 * f_hi[tie].sum()
    err_lo = f_lo[(k > thr) & ~tie].sum() + 0.5 * f_lo[tie].sum()
    return float(0.5 * (err_hi + err_lo))


CHUNK = 100


def _decode_chunk(weights, member_probs, repetitions, p_mid_sign, thr, n, seed) -> int:
    rng = np.random.default_rng(seed)
    errors = 0
    for _ in range(n):
        bit = int(rng.integers(2))
        members = rng.choice(len(weights[bit]), size=repetitions, p=weights[bit])
        clicks = int(np.sum(rng.random(repetitions) < member_probs[bit][members]))
        if np.isclose(clicks, thr):
            guess = int(rng.integers(2))
        else:
            says_high = clicks > thr
            guess = 0 if says_high == (p_mid_sign > 0) else 1
        errors += guess != bit
    return errors


def decode_bit(scenario: SteeringScenario, oracle: CloneOracle, repetitions: int,
               seed, trials: int = 1000, workers: int = 1) -> float:
    """Empirical error of reading Alice's bit from ``repetitions`` cloning attempts.

    Trials run in fixed-size chunks with seeds spawned from ``seed``, so the
    result does not depend on ``workers``.
    """
    p0, p1, _ = signaling_gap(scenario, oracle)
    if p0 == p1:
        raise ValueError("zero gap: nothing to decode")
    weights, member_probs = [], []
    for bit in (0, 1):
        w, states = steered_ensemble(scenario, bit)
        w = np.clip(w, 0, None)
        weights.append(w / w.sum())
        member_probs.append(np.array([oracle.success_probability(v) for v in states]))
    thr = repetitions * (p0 + p1) / 2
    sizes = [min(CHUNK, trials - i) for i in range(0, trials, CHUNK)]
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    args = [(weights, member_probs, repetitions, p0 - p1, thr, n, s) for n, s in zip(sizes, seeds)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            errors = list(pool.map(lambda a: _decode_chunk(*a), args))
    else:
        errors = [_decode_chunk(*a) for a in args]
    return sum(errors) / trials


def random_povm(dim: int, outcomes: int, seed=None) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((outcomes, dim, dim)) + 1j * rng.standard_normal((outcomes, dim, dim))
    raw = [x.conj().T @ x for x in g]
    w, u = np.linalg.eigh(sum(raw))
    inv_sqrt = u @ np.diag(w ** -0.5) @ u.conj().T
    return [inv_sqrt @ r @ inv_sqrt for r in raw]


def bob_statistics(scenario: SteeringScenario, bit: int, channel: KrausChannel,
                   bob_povm: Sequence[np.ndarray]) -> np.ndarray:
    """Joint probability of (channel success, Bob outcome), marginal over Alice's outcome."""
    sigmas = conditional_states(scenario.purification, scenario.povm(bit), scenario.dim_b)
    out = sum(apply(channel, s) for s in sigmas)
    return np.array([np.trace(e @ out).real for e in bob_povm])
