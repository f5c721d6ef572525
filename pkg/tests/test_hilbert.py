import numpy as np
import pytest
from hypothesis import given, strategies as st

from raylab import hilbert
from raylab.hilbert import Ray, ray_from_vector

seeds = st.integers(0, 2 ** 32 - 1)
dims = st.integers(2, 6)


def test_ray_rejects_non_projectors():
    with pytest.raises(ValueError):
        Ray(np.diag([1.0, 1.0]))
    with pytest.raises(ValueError):
        Ray(np.array([[1.0, 1.0], [0.0, 0.0]]))


def test_representative_is_phase_fixed():
    v = np.exp(0.7j) * np.array([0.6, 0.8j])
    rep = ray_from_vector(v).representative()
    assert rep[0].imag == 0 and rep[0].real > 0
    assert hilbert.fidelity(rep, v) == pytest.approx(1.0, abs=1e-12)


@given(seeds, dims, st.floats(0, 2 * np.pi))
def test_ray_ignores_global_phase(seed, d, g):
    v = hilbert.random_state(d, seed)
    a, b = ray_from_vector(v), ray_from_vector(hilbert.rephase(v, g))
    assert np.abs(a.projector - b.projector).max() < 1e-12


@given(seeds, dims)
def test_overlap_probability_matches_vectors(seed, d):
    rng = np.random.default_rng(seed)
    u, v = hilbert.random_state(d, rng), hilbert.random_state(d, rng)
    p = hilbert.overlap_probability(ray_from_vector(u), ray_from_vector(v))
    assert p == pytest.approx(abs(np.vdot(u, v)) ** 2, abs=1e-12)
    assert 0.0 <= p <= 1.0


def test_linear_independence_examples():
    e0, e1 = np.eye(2)
    plus = (e0 + e1) / np.sqrt(2)
    assert hilbert.linear_independence([e0, plus]).independent
    dep = hilbert.linear_independence([e0, e1, plus])
    assert not dep.independent and dep.rank == 2
    assert dep.smallest_singular_value < 1e-12


@given(seeds)
def test_null_vector_annihilates_dependent_family(seed):
    rng = np.random.default_rng(seed)
    a, b = hilbert.random_state(3, rng), hilbert.random_state(3, rng)
    fam = [a, b, hilbert.normalize(a - 2j * b)]
    x = hilbert.null_vector(fam)
    assert np.linalg.norm(np.stack(fam, axis=1) @ x) < 1e-10
    assert np.linalg.norm(x) == pytest.approx(1.0)


@given(seeds, dims)
def test_random_density_is_valid(seed, d):
    rho = hilbert.random_density(d, seed)
    hilbert.check_density(rho)
    assert np.trace(rho).real == pytest.approx(1.0)


def test_check_density_rejects_bad_input():
    with pytest.raises(ValueError):
        hilbert.check_density(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        hilbert.check_density(np.diag([0.5, 0.2]))
    hilbert.check_density(np.diag([0.5, 0.2]), subnormalized=True)


def test_partial_trace_of_product(rng):
    a = hilbert.random_density(2, rng)
    b = hilbert.random_density(3, rng)
    rho = np.kron(a, b)
    assert np.abs(hilbert.partial_trace(rho, (2, 3), keep=0) - a).max() < 1e-12
    assert np.abs(hilbert.partial_trace(rho, (2, 3), keep=1) - b).max() < 1e-12


def test_random_unitary_is_unitary(rng):
    u = hilbert.random_unitary(4, rng)
    assert np.abs(u.conj().T @ u - np.eye(4)).max() < 1e-12
