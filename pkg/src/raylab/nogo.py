"""Discrimination-theoretic no-go machinery.

Unambiguous discrimination (UD) of a pure-state family is possible exactly
when the family is linearly independent, and no CP preprocessing can turn
a dependent family into an independent one. A superposition device that
ignored the phase gauge of its inputs would do exactly that; the functions
here build the objects that make the contradiction numerical.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from raylab.channels import KrausChannel, apply
from raylab.hilbert import (
    TOL, Ray, eigvalsh_sym, gram_matrix, linear_independence, normalize, null_vector,
)
from raylab.superposer import SuperpositionWeights

DEPENDENCE_THRESHOLD = 1e-8


class DependentFamilyError(ValueError):
    def __init__(self, smallest_singular_value: float):
        super().__init__(
            f"family is linearly dependent (smallest singular value {smallest_singular_value:.3e})")
        self.smallest_singular_value = smallest_singular_value


def _sigma_min(vectors) -> float:
    return linear_independence(vectors).smallest_singular_value


def reciprocal_family(vectors: Sequence) -> list[np.ndarray]:
    """Vectors ``r_i`` with ``<r_i|v_j> = delta_ij`` inside the span of the family."""
    smin = _sigma_min(vectors)
    if smin <= DEPENDENCE_THRESHOLD:
        raise DependentFamilyError(smin)
    cols = np.stack([np.asarray(v, dtype=complex) for v in vectors], axis=1)
    g = cols.conj().T @ cols
    recip = cols @ np.linalg.inv(g)
    return [recip[:, i] for i in range(recip.shape[1])]


@dataclass(frozen=True, eq=False)
class UdPovm:
    elements: tuple
    inconclusive: np.ndarray
    lambdas: tuple

    @property
    def m(self) -> int:
        return len(self.elements)

    @property
    def dim(self) -> int:
        return self.inconclusive.shape[0]

    def completeness_error(self) -> float:
        total = sum(self.elements) + self.inconclusive
        return float(np.abs(total - np.eye(self.dim)).max())

    def cross_terms(self, vectors: Sequence) -> np.ndarray:
        """``T[i, j] = <v_j|E_i|v_j>``; off-diagonal entries must vanish."""
        return np.array([[np.vdot(v, e @ v).real for v in vectors] for e in self.elements])


@dataclass(frozen=True)
class Infeasible:
    """UD impossible; ``dependency`` satisfies ``sum_i x_i |v_i> ~ 0``."""

    dependency: np.ndarray
    residual: float
    smallest_singular_value: float
    feasible: bool = field(default=False, init=False)


def build_ud_povm(vectors: Sequence) -> UdPovm | Infeasible:
    """UD POVM with the largest uniform weight that keeps the inconclusive element PSD."""
    smin = _sigma_min(vectors)
    if smin <= DEPENDENCE_THRESHOLD:
        x = null_vector(vectors)
        cols = np.stack([np.asarray(v, dtype=complex) for v in vectors], axis=1)
        return Infeasible(x, float(np.linalg.norm(cols @ x)), smin)
    recip = reciprocal_family(vectors)
    outers = [np.outer(r, r.conj()) for r in recip]
    lam = 1.0 / eigvalsh_sym(sum(outers))[-1]
    elements = tuple(lam * o for o in outers)
    dim = outers[0].shape[0]
    inconclusive = np.eye(dim) - sum(elements)
    return UdPovm(elements, inconclusive, tuple([lam] * len(elements)))


def ud_outcome_distribution(povm: UdPovm, state) -> np.ndarray:
    rho = np.asarray(state, dtype=complex)
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    if rho.shape != (povm.dim, povm.dim):
        raise ValueError(f"state shape {rho.shape} does not match POVM dimension {povm.dim}")
    probs = [np.trace(e @ rho).real for e in povm.elements]
    probs.append(np.trace(povm.inconclusive @ rho).real)
    return np.array(probs)


@dataclass(frozen=True, eq=False)
class LdliScenario:
    """Dependent input triple ``psi, psi_perp, a psi + b psi_perp`` with partner ``phi``."""

    a: complex
    b: complex
    theta1: float
    theta2: float
    theta3: float
    weights: SuperpositionWeights
    psi: np.ndarray = None
    psi_perp: np.ndarray = None
    phi: np.ndarray = None

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        if abs(a) < 1e-12 or abs(b) < 1e-12:
            raise ValueError("decomposition coefficients a and b must both be nonzero")
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1) > 1e-10:
            raise ValueError("|a|^2 + |b|^2 must equal 1")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        basis = [self.psi, self.psi_perp, self.phi]
        if any(v is None for v in basis):
            basis = [np.eye(3, dtype=complex)[i] for i in range(3)]
        basis = [np.asarray(v, dtype=complex) for v in basis]
        if basis[0].size < 3:
            raise ValueError("the construction needs dimension >= 3")
        if np.abs(gram_matrix(basis) - np.eye(3)).max() > TOL:
            raise ValueError("psi, psi_perp, phi must be orthonormal")
        for name, v in zip(("psi", "psi_perp", "phi"), basis):
            object.__setattr__(self, name, v)

    @property
    def psi3(self) -> np.ndarray:
        return self.a * self.psi + self.b * self.psi_perp

    def inputs(self) -> list[np.ndarray]:
        return [self.psi, self.psi_perp, self.psi3]

    def gauge_shifted(self, gamma1: float, gamma2: float = 0.0) -> "LdliScenario":
        """Coefficients after rephasing ``psi`` by ``gamma1`` and ``psi_perp`` by ``gamma2``.

        The input rays do not change, but ``a`` and ``b`` pick up opposite phases
        while the output phases ``theta`` stay put.
        """
        return LdliScenario(
            np.exp(-1j * gamma1) * self.a, np.exp(-1j * gamma2) * self.b,
            self.theta1, self.theta2, self.theta3, self.weights,
            np.exp(1j * gamma1) * self.psi, np.exp(1j * gamma2) * self.psi_perp, self.phi)


class LdliOutputs(NamedTuple):
    outputs: list
    gram_det: float
    smallest_singular_value: float


def construct_ldli(scenario: LdliScenario) -> LdliOutputs:
    w = scenario.weights
    thetas = (scenario.theta1, scenario.theta2, scenario.theta3)
    outs = [normalize(w.alpha * v + w.beta * np.exp(1j * t) * scenario.phi)
            for v, t in zip(scenario.inputs(), thetas)]
    basis = np.stack([scenario.psi, scenario.psi_perp, scenario.phi], axis=1)
    coeffs = basis.conj().T @ np.stack(outs, axis=1)
    sv = np.linalg.svd(np.stack(outs, axis=1), compute_uv=False)
    return LdliOutputs(outs, float(abs(np.linalg.det(coeffs))), float(sv[-1]))


def phase_condition_residual(scenario: LdliScenario) -> float:
    s = scenario
    return float(abs(np.exp(1j * s.theta3) - s.a * np.exp(1j * s.theta1) - s.b * np.exp(1j * s.theta2)))


def random_ldli_scenario(rng: np.random.Generator, on_condition: bool = False,
                         dim: int = 3) -> LdliScenario:
    """Random scenario; with ``on_condition`` the thetas satisfy the phase condition."""
    t = rng.uniform(0.05, np.pi / 2 - 0.05)
    a = np.cos(t) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    b = np.sin(t) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    u = rng.uniform(0.05, np.pi / 2 - 0.05)
    weights = SuperpositionWeights(np.cos(u) * np.exp(1j * rng.uniform(0, 2 * np.pi)),
                                   np.sin(u) * np.exp(1j * rng.uniform(0, 2 * np.pi)))
    theta1 = rng.uniform(0, 2 * np.pi)
    if on_condition:
        # |a e^{i t1} + b e^{i t2}| = 1 requires Re(conj(a) b e^{i(t2 - t1)}) = 0
        sign = 1 if rng.random() < 0.5 else -1
        theta2 = theta1 + sign * np.pi / 2 - np.angle(np.conj(a) * b)
        theta3 = float(np.angle(a * np.exp(1j * theta1) + b * np.exp(1j * theta2)))
    else:
        theta2 = rng.uniform(0, 2 * np.pi)
        theta3 = rng.uniform(0, 2 * np.pi)
    if dim == 3:
        basis = [None, None, None]
    else:
        g = rng.standard_normal((dim, 3)) + 1j * rng.standard_normal((dim, 3))
        q, _ = np.linalg.qr(g)
        basis = [q[:, i] for i in range(3)]
    return LdliScenario(a, b, theta1, theta2, theta3, weights, *basis)


@dataclass(frozen=True, eq=False)
class CounterfactualBranch:
    """A success branch defined only on a finite list of input rays.

    No Kraus operator can realize it when the inputs are dependent and the
    outputs independent; it exists so the pipeline can show what such a device
    would imply.
    """

    inputs: tuple
    outputs: tuple
    success: float = 1.0

    def apply_ray(self, ray: Ray) -> np.ndarray:
        for v, out in zip(self.inputs, self.outputs):
            if abs(np.vdot(v, ray.projector @ v).real - 1) < 1e-9:
                o = normalize(out)
                return self.success * np.outer(o, o.conj())
        raise ValueError("counterfactual branch is undefined on this input")


def hypothetical_superposer_branch(scenario: LdliScenario) -> CounterfactualBranch:
    """Branch sending each dependent input (paired with ``phi``) to its LD->LI output."""
    outs = construct_ldli(scenario).outputs
    return CounterfactualBranch(tuple(scenario.inputs()), tuple(outs))


def restricted_map(ch: KrausChannel, partner) -> KrausChannel:
    """``rho -> ch(rho (x) |partner><partner|)`` as a Kraus channel on the first factor."""
    partner = np.asarray(partner, dtype=complex)
    d = partner.size
    embed = np.kron(np.eye(ch.dim_in // d), partner[:, None])
    return KrausChannel([k @ embed for k in ch.kraus_ops])


@dataclass(frozen=True, eq=False)
class PipelineResult:
    confusion: np.ndarray
    unambiguous: bool
    inputs_independent: bool
    success_probabilities: np.ndarray
    povm: UdPovm | None

    @property
    def violation(self) -> bool:
        return self.unambiguous and not self.inputs_independent

    def witness_record(self) -> dict:
        return {
            "kind": "no-go violation witness" if self.violation else "no violation",
            "violation": self.violation,
            "inputs_independent": self.inputs_independent,
            "unambiguous": self.unambiguous,
            "success_probabilities": [float(p) for p in self.success_probabilities],
            "confusion": [[float(x) for x in row] for row in self.confusion],
        }


RANK_RATIO = 1e6


def discrimination_pipeline(ch: KrausChannel | CounterfactualBranch | Callable,
                            inputs: Sequence[Ray]) -> PipelineResult:
    """Preprocess with ``ch``, then try to discriminate the outputs unambiguously.

    Row ``i`` of the confusion matrix holds the end-to-end outcome
    probabilities for input ``i`` (outcomes ``0..m-1`` then inconclusive).
    A channel failure counts as inconclusive.
    """
    outs = []
    for ray in inputs:
        if isinstance(ch, KrausChannel):
            outs.append(apply(ch, ray.projector))
        elif isinstance(ch, CounterfactualBranch):
            outs.append(ch.apply_ray(ray))
        else:
            outs.append(np.asarray(ch(ray), dtype=complex))
    m = len(inputs)
    probs = np.array([np.trace(o).real for o in outs])
    vectors = []
    for o, p in zip(outs, probs):
        if p <= 1e-14:
            vectors.append(None)
            continue
        ev, vecs = np.linalg.eigh(0.5 * (o + o.conj().T))
        if ev.size > 1 and ev[-2] * RANK_RATIO > ev[-1]:
            raise ValueError(f"channel output is not rank one (eigenvalues {ev[-1]:.3e}, {ev[-2]:.3e})")
        vectors.append(vecs[:, -1])
    in_vecs = [r.representative() for r in inputs]
    inputs_independent = linear_independence(in_vecs).smallest_singular_value > DEPENDENCE_THRESHOLD
    confusion = np.zeros((m, m + 1))
    confusion[:, m] = 1.0
    if any(v is None for v in vectors):
        return PipelineResult(confusion, False, inputs_independent, probs, None)
    povm = build_ud_povm(vectors)
    if isinstance(povm, Infeasible):
        return PipelineResult(confusion, False, inputs_independent, probs, None)
    for i, o in enumerate(outs):
        confusion[i] = ud_outcome_distribution(povm, o)
        confusion[i, m] += 1.0 - probs[i]
    off = confusion[:, :m] - np.diag(np.diag(confusion[:, :m]))
    unambiguous = bool(np.abs(off).max() < 1e-10 and np.all(np.diag(confusion) > 1e-12))
    return PipelineResult(confusion, unambiguous, inputs_independent, probs, povm)


def isometry_gram_witness(iso, in_states: Sequence, out_states: Sequence | None = None) -> float:
    """Largest change of any pairwise inner product between the two families."""
    ins = [np.asarray(v, dtype=complex) for v in in_states]
    if out_states is None:
        outs = [np.asarray(iso) @ v for v in ins]
    else:
        outs = [np.asarray(v, dtype=complex) for v in out_states]
    if len(ins) != len(outs):
        raise ValueError("input and output families differ in length")
    gi = np.array([[np.vdot(u, v) for v in ins] for u in ins])
    go = np.array([[np.vdot(u, v) for v in outs] for u in outs])
    return float(np.abs(gi - go).max())


def deleting_targets(psi, phi) -> tuple[list, list]:
    """``|v>|v> -> |v>|0>`` for ``v`` in ``{psi, phi}``."""
    psi, phi = np.asarray(psi, dtype=complex), np.asarray(phi, dtype=complex)
    blank = np.zeros(psi.size, dtype=complex)
    blank[0] = 1
    ins = [np.kron(psi, psi), np.kron(phi, phi)]
    outs = [np.kron(psi, blank), np.kron(phi, blank)]
    return ins, outs


def two_state_masking_targets(overlap: complex) -> list[np.ndarray]:
    """Two-qubit targets with identical maximally mixed marginals and the given overlap.

    ``(e^{i u}|00> + e^{i v}|11>)/sqrt(2)`` against ``(|00> + |11>)/sqrt(2)``
    has inner product ``(e^{i u} + e^{i v})/2``, which reaches any ``|s| <= 1``.
    """
    s = complex(overlap)
    if abs(s) > 1 + 1e-12:
        raise ValueError("overlap modulus exceeds 1")
    mu = np.angle(s) if abs(s) > 0 else 0.0
    spread = math.acos(min(1.0, abs(s)))
    bell = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    other = np.array([np.exp(1j * (mu + spread)), 0, 0, np.exp(1j * (mu - spread))]) / np.sqrt(2)
    return [bell, other]


def clone_feasibility(vectors: Sequence) -> bool:
    return _sigma_min(vectors) > DEPENDENCE_THRESHOLD
