"""Coherent superposition of rays.

Two routes are implemented side by side. The bare family
``alpha|psi> + beta e^{i theta}|phi>`` depends on the representatives picked
for each ray and so needs an explicit ``theta``. The reference-calibrated
superposition fixes the relative phase through overlaps with a known state
``chi`` and is a genuine function of the three rays.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from raylab.channels import KrausChannel, success_probability
from raylab.hilbert import Ray, as_vector, ray_from_vector

REF_THRESHOLD = 1e-12
PROMISE_TOL = 1e-9


@dataclass(frozen=True)
class SuperpositionWeights:
    alpha: complex
    beta: complex

    def __post_init__(self):
        a, b = complex(self.alpha), complex(self.beta)
        if abs(a) < REF_THRESHOLD or abs(b) < REF_THRESHOLD:
            raise ValueError("superposition weights must both be nonzero")
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1) > 1e-10:
            raise ValueError("superposition weights must satisfy |alpha|^2 + |beta|^2 = 1")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @classmethod
    def balanced(cls) -> "SuperpositionWeights":
        return cls(2 ** -0.5, 2 ** -0.5)


@dataclass(frozen=True)
class OverlapPromise:
    """Known overlaps ``|<chi|psi>|^2 = c1`` and ``|<chi|phi>|^2 = c2``."""

    c1: float
    c2: float

    def __post_init__(self):
        for name in ("c1", "c2"):
            c = getattr(self, name)
            if not (REF_THRESHOLD < c <= 1 + 1e-12):
                raise ValueError(f"promise overlap {name}={c!r} must lie in (0, 1]")

    def check(self, chi, psi, phi, tol: float = PROMISE_TOL) -> None:
        got1 = abs(np.vdot(chi, psi)) ** 2
        got2 = abs(np.vdot(chi, phi)) ** 2
        if abs(got1 - self.c1) > tol or abs(got2 - self.c2) > tol:
            raise ValueError(
                f"inputs violate the promise: overlaps ({got1:.12g}, {got2:.12g}) "
                f"vs promised ({self.c1:.12g}, {self.c2:.12g})")


def superposition_family_member(p: Ray, q: Ray, w: SuperpositionWeights, theta: float) -> Ray:
    psi, phi = p.representative(), q.representative()
    v = w.alpha * psi + w.beta * np.exp(1j * theta) * phi
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        raise ValueError("degenerate superposition: normalization vanishes")
    return ray_from_vector(v / norm)


class InterferenceTerms(NamedTuple):
    diagonal: np.ndarray
    cross: np.ndarray
    norm_sq: float


def interference_expansion(psi, phi, w: SuperpositionWeights, theta: float) -> InterferenceTerms:
    """Split ``|v><v|`` for ``v = alpha psi + beta e^{i theta} phi`` into parts.

    The diagonal part carries no phase information; the cross term is the
    only place the relative phase enters.
    """
    psi = as_vector(psi)
    phi = as_vector(phi)
    a, b = w.alpha, w.beta
    diagonal = abs(a) ** 2 * np.outer(psi, psi.conj()) + abs(b) ** 2 * np.outer(phi, phi.conj())
    half = a * np.conj(b) * np.exp(-1j * theta) * np.outer(psi, phi.conj())
    cross = half + half.conj().T
    norm_sq = 1 + 2 * (np.conj(a) * b * np.exp(1j * theta) * np.vdot(psi, phi)).real
    return InterferenceTerms(diagonal, cross, float(norm_sq))


@dataclass(frozen=True, eq=False)
class PhaseConvention:
    """Lift rays to vectors by making their overlap with ``chi`` real positive."""

    chi: np.ndarray
    threshold: float = REF_THRESHOLD

    def __post_init__(self):
        object.__setattr__(self, "chi", as_vector(self.chi))

    def lift(self, rho: Ray) -> np.ndarray:
        v = rho.projector @ self.chi
        weight = np.vdot(self.chi, v).real
        if weight <= self.threshold:
            raise ValueError(f"ray has vanishing overlap {weight!r} with the reference")
        return v / np.sqrt(weight)

    def overlap(self, rho1: Ray, rho2: Ray) -> complex:
        return complex(np.vdot(self.lift(rho1), self.lift(rho2)))


def lift(conv: PhaseConvention, rho: Ray) -> np.ndarray:
    return conv.lift(rho)


def convention_overlap(conv: PhaseConvention, rho1: Ray, rho2: Ray) -> complex:
    return conv.overlap(rho1, rho2)


def _phase_factor(chi, v) -> complex:
    z = np.vdot(chi, v)
    if abs(z) < REF_THRESHOLD:
        raise ValueError("vanishing overlap with the reference state")
    return z / abs(z)


class ReferenceSuperposition(NamedTuple):
    ray: Ray
    unnormalized_vector: np.ndarray


def reference_superposition(chi, psi, phi, w: SuperpositionWeights) -> ReferenceSuperposition:
    """``alpha kappa_phi |psi> + beta kappa_psi |phi>`` and its ray.

    ``kappa_v = <chi|v>/|<chi|v>|``; swapping the phases across branches is
    what cancels independent rephasings of the inputs.
    """
    chi, psi, phi = as_vector(chi), as_vector(psi), as_vector(phi)
    k_psi = _phase_factor(chi, psi)
    k_phi = _phase_factor(chi, phi)
    vec = w.alpha * k_phi * psi + w.beta * k_psi * phi
    norm = np.linalg.norm(vec)
    if norm < 1e-12:
        raise ValueError("reference superposition vanishes")
    return ReferenceSuperposition(ray_from_vector(vec / norm), vec)


def reference_superposition_projector(chi: Ray, p: Ray, q: Ray, w: SuperpositionWeights) -> np.ndarray:
    """Unnormalized output projector written with projectors only."""
    pc, pp, pq = chi.projector, p.projector, q.projector
    t1 = np.trace(pp @ pc).real
    t2 = np.trace(pq @ pc).real
    if t1 <= REF_THRESHOLD or t2 <= REF_THRESHOLD:
        raise ValueError("vanishing overlap with the reference ray")
    half = w.alpha * np.conj(w.beta) * (pp @ pc @ pq) / np.sqrt(t1 * t2)
    return abs(w.alpha) ** 2 * pp + abs(w.beta) ** 2 * pq + half + half.conj().T


def protocol_kraus_operator(chi, promise: OverlapPromise, w: SuperpositionWeights) -> np.ndarray:
    """Single success operator on ``H (x) H -> H``.

    ``K |psi>|phi> = s (alpha kappa_phi |psi> + beta kappa_psi |phi>)`` on the
    promise set, with ``s^2 = c1 c2 / (c1 + c2)``. The bound
    ``||K||^2 <= (|alpha| sqrt(c1) + |beta| sqrt(c2))^2 / (c1 + c2) <= 1``
    makes the branch trace non-increasing.
    """
    chi = as_vector(chi)
    d = chi.size
    eye = np.eye(d)
    bra = chi.conj()[None, :]
    c1, c2 = promise.c1, promise.c2
    s = np.sqrt(c1 * c2 / (c1 + c2))
    return s * (w.alpha / np.sqrt(c2) * np.kron(eye, bra) + w.beta / np.sqrt(c1) * np.kron(bra, eye))


def build_reference_protocol(chi, promise: OverlapPromise, w: SuperpositionWeights) -> KrausChannel:
    return KrausChannel([protocol_kraus_operator(chi, promise, w)])


def protocol_bound(promise: OverlapPromise, w: SuperpositionWeights) -> float:
    """Closed-form upper bound on the largest eigenvalue of ``K^dag K``."""
    c1, c2 = promise.c1, promise.c2
    return (abs(w.alpha) * np.sqrt(c1) + abs(w.beta) * np.sqrt(c2)) ** 2 / (c1 + c2)


class SuccessComparison(NamedTuple):
    simulated: float
    formula: float


def protocol_success_probability(ch: KrausChannel, chi, psi, phi, promise: OverlapPromise,
                                 w: SuperpositionWeights) -> SuccessComparison:
    chi, psi, phi = as_vector(chi), as_vector(psi), as_vector(phi)
    promise.check(chi, psi, phi)
    product = np.kron(psi, phi)
    simulated = success_probability(ch, np.outer(product, product.conj()))
    vec = reference_superposition(chi, psi, phi, w).unnormalized_vector
    formula = promise.c1 * promise.c2 / (promise.c1 + promise.c2) * np.vdot(vec, vec).real
    return SuccessComparison(simulated, float(formula))


def promise_state(chi, c: float, seed=None, dim: int | None = None) -> np.ndarray:
    """Random unit vector with ``|<chi|v>|^2 = c`` exactly (up to rounding)."""
    chi = as_vector(chi)
    rng = np.random.default_rng(seed)
    d = chi.size if dim is None else dim
    g = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    perp = g - np.vdot(chi, g) * chi
    perp /= np.linalg.norm(perp)
    phase = np.exp(1j * rng.uniform(0, 2 * np.pi))
    return phase * (np.sqrt(c) * chi + np.sqrt(1 - c) * perp)
