import numpy as np
import pytest
from hypothesis import given, strategies as st

from raylab import geometry, hilbert, superposer
from raylab.geometry import CircleConstraint
from raylab.superposer import OverlapPromise, SuperpositionWeights

xs = st.floats(0, np.pi)
ys = st.floats(0, 2 * np.pi, exclude_max=True)


@given(xs, ys)
def test_embedding_is_a_relabelled_bloch_vector(x, y):
    bx, by, bz = geometry.bloch_vector(geometry.bloch_state(x, y))
    assert np.allclose(geometry.embedding(x, y), [bz, bx, -by], atol=1e-12)


def test_bloch_state_range_checks():
    with pytest.raises(ValueError):
        geometry.bloch_state(-0.1, 0)
    with pytest.raises(ValueError):
        geometry.bloch_state(1.0, 2 * np.pi)


@given(st.integers(0, 2 ** 32 - 1), st.floats(0.05, 0.95))
def test_fixed_overlap_circle_contains_its_states(seed, c):
    rng = np.random.default_rng(seed)
    chi = hilbert.random_state(2, rng)
    circle = geometry.fixed_overlap_circle(chi, c)
    for _ in range(5):
        v = superposer.promise_state(chi, c, rng)
        v = v * np.exp(-1j * np.angle(v[0]))
        x = 2 * np.arccos(min(1.0, abs(v[0])))
        y = float(np.mod(-np.angle(v[1]), 2 * np.pi))
        assert abs(circle.residuals([(x, y)])[0]) < 1e-9


def test_fixed_overlap_example_is_the_equator():
    assert geometry.fixed_overlap_circle([1, 0], 0.5) == CircleConstraint(1.0, 0.0, 0.0, 0.0)


def test_fit_recovers_a_tilted_circle():
    normal = np.array([0.3, -0.5, 0.8])
    normal /= np.linalg.norm(normal)
    # sample the sphere and keep the band near the plane r . n = 0.2, then project onto it exactly
    u, v = np.linalg.svd(normal[None, :])[2][1:]
    centre = 0.2 * normal
    rad = np.sqrt(1 - 0.2 ** 2)
    t = np.linspace(0, 2 * np.pi, 50, endpoint=False)
    r = centre + rad * (np.cos(t)[:, None] * u + np.sin(t)[:, None] * v)
    x = np.arccos(np.clip(r[:, 0], -1, 1))
    y = np.mod(np.arctan2(r[:, 2], r[:, 1]), 2 * np.pi)
    fit, resid = geometry.fit_circle_constraint(np.column_stack([x, y]))
    assert resid < 1e-10
    assert np.allclose([fit.A, fit.B, fit.C], normal, atol=1e-10)
    assert fit.D == pytest.approx(-0.2, abs=1e-10)


def test_fit_rejects_degenerate_input():
    with pytest.raises(ValueError):
        geometry.fit_circle_constraint([(1.0, 1.0)] * 3)
    with pytest.raises(ValueError):
        geometry.fit_circle_constraint([(1.0, 1.0)] * 5)


def test_haar_points_do_not_fit_a_circle(rng):
    pts = [(np.arccos(rng.uniform(-1, 1)), rng.uniform(0, 2 * np.pi)) for _ in range(200)]
    assert geometry.fit_circle_constraint(pts)[1] > 0.1


def test_scan_grid_excludes_poles():
    gx, gy = geometry.scan_grid(4, 8)
    assert np.allclose(gx, [np.pi / 4, np.pi / 2, 3 * np.pi / 4])
    assert gy.size == 8 and gy[0] == 0


def test_coarse_scan_of_the_reference_protocol_lands_on_the_equator():
    chi = np.array([1, 0], dtype=complex)
    ch = superposer.build_reference_protocol(chi, OverlapPromise(0.5, 1.0), SuperpositionWeights.balanced())
    points = geometry.success_set_scan(ch, chi, grid=(40, 80))
    assert len(points) == 80
    assert all(abs(p.x - np.pi / 2) < 1e-12 for p in points)
    fit, resid = geometry.fit_circle_constraint(points)
    assert resid < 1e-6
    assert np.allclose(fit, (1, 0, 0, 0), atol=1e-6)


def test_scan_requires_a_qubit_pair_channel():
    ch = superposer.build_reference_protocol([1, 0, 0], OverlapPromise(0.5, 1.0),
                                             SuperpositionWeights.balanced())
    with pytest.raises(ValueError):
        geometry.success_set_scan(ch)
