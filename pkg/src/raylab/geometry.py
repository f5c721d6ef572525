"""Bloch-sphere geometry of known-plus-unknown qubit superposers.

A qubit is ``cos(x/2)|0> + e^{-iy} sin(x/2)|1>``. Its Bloch coordinates
enter planar constraints through ``(cos x, sin x cos y, sin x sin y)``, i.e.
``(Z, X, -Y)`` with this azimuth sign.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from raylab.channels import KrausChannel
from raylab.hilbert import as_vector
from raylab.superposer import SuperpositionWeights


class BlochPoint(NamedTuple):
    x: float
    y: float


def bloch_state(x: float, y: float) -> np.ndarray:
    if not (0 <= x <= np.pi) or not (0 <= y < 2 * np.pi):
        raise ValueError(f"Bloch angles out of range: x={x!r}, y={y!r}")
    return np.array([np.cos(x / 2), np.exp(-1j * y) * np.sin(x / 2)])


def embedding(x, y) -> np.ndarray:
    """``(cos x, sin x cos y, sin x sin y)`` stacked on the last axis."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return np.stack([np.cos(x), np.sin(x) * np.cos(y), np.sin(x) * np.sin(y)], axis=-1)


class CircleConstraint(NamedTuple):
    """``A cos x + B sin x cos y + C sin x sin y + D = 0`` with ``A^2+B^2+C^2 = 1``."""

    A: float
    B: float
    C: float
    D: float

    def residuals(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        return embedding(pts[:, 0], pts[:, 1]) @ np.array([self.A, self.B, self.C]) + self.D


def _canonical(normal: np.ndarray, offset: float) -> CircleConstraint:
    norm = np.linalg.norm(normal)
    if norm < 1e-12:
        raise ValueError("degenerate constraint: A = B = C = 0")
    normal, offset = normal / norm, offset / norm
    lead = normal[np.argmax(np.abs(normal) > 1e-9)]
    if lead < 0:
        normal, offset = -normal, -offset
    normal = np.where(np.abs(normal) < 1e-15, 0.0, normal)
    return CircleConstraint(*(float(c) for c in normal), float(offset))


def scan_grid(nx: int, ny: int) -> tuple[np.ndarray, np.ndarray]:
    """Polar rows ``i pi / nx`` for ``0 < i < nx`` and azimuth columns ``j 2 pi / ny``.

    The poles are left out: their azimuth is meaningless, and they would show
    up as ``ny`` copies of one point.
    """
    xs = np.pi * np.arange(1, nx) / nx
    ys = 2 * np.pi * np.arange(ny) / ny
    return xs, ys


def _family_fidelity(out_psi, out_anchor, psi_anchor, alpha, beta, theta):
    """Fidelity of a unit output with ``alpha psi + beta e^{i theta} anchor``.

    Takes the inner products ``<out|psi>``, ``<out|anchor>`` and
    ``<psi|anchor>`` (unit vectors throughout) so it broadcasts cheaply.
    """
    phase = np.exp(1j * theta)
    num = np.abs(alpha * out_psi + beta * phase * out_anchor) ** 2
    den = abs(alpha) ** 2 + abs(beta) ** 2 + 2 * (np.conj(alpha) * beta * phase * psi_anchor).real
    return num / den


def _best_family_fidelity(out, psi, anchor, alpha, beta, n_theta: int = 64, zooms: int = 8):
    """Maximize the family fidelity over ``theta`` by repeatedly zooming a grid on the best point."""
    n = out.shape[0]
    o_p = np.sum(out.conj() * psi, axis=-1)[:, None]
    o_a = (out.conj() @ anchor)[:, None]
    p_a = (psi.conj() @ anchor)[:, None]
    centre = np.zeros(n)
    width = 2 * np.pi
    offsets = np.linspace(-0.5, 0.5, n_theta, endpoint=False)
    best = np.zeros(n)
    live = np.arange(n)
    for level in range(zooms):
        thetas = centre[live, None] + width * offsets[None, :]
        fid = _family_fidelity(o_p[live], o_a[live], p_a[live], alpha, beta, thetas)
        k = np.argmax(fid, axis=1)
        rows = np.arange(live.size)
        centre[live] = thetas[rows, k]
        best[live] = np.maximum(best[live], fid[rows, k])
        if level == 0:
            # a grid step of 2 pi / 64 costs at most a few 1e-3 in fidelity
            live = live[best[live] > 0.9]
        width *= 4.0 / n_theta
    return best


def success_set_scan(ch: KrausChannel, anchor=(1, 0), w: SuperpositionWeights | None = None,
                     grid: tuple[int, int] = (400, 800), tol: float = 1e-9,
                     rank_tol: float = 1e-9) -> list[BlochPoint]:
    """Grid points where ``ch`` acting on ``|psi(x,y)> (x) |anchor>`` lands in the superposition family.

    A point counts when the output is nonzero (trace above ``tol``), rank one
    (second eigenvalue below ``rank_tol`` times the first), and within
    infidelity ``tol`` of ``alpha|psi> + beta e^{i theta}|anchor>`` for some
    ``theta``.
    """
    if (ch.dim_in, ch.dim_out) != (4, 2):
        raise ValueError(f"scan needs a channel from 4 to 2 dimensions, got {ch.dim_in} -> {ch.dim_out}")
    w = SuperpositionWeights.balanced() if w is None else w
    anchor = as_vector(anchor)
    xs, ys = scan_grid(*grid)
    kraus = np.stack(ch.kraus_ops)
    # K (psi (x) anchor) = K_anchor psi, with K_anchor[k] = K[k] reshaped and contracted on the anchor
    k_anchor = np.einsum("koij,j->koi", kraus.reshape(kraus.shape[0], 2, 2, 2), anchor)
    points = []
    for x in xs:
        psi = np.stack([np.full(ys.size, np.cos(x / 2), dtype=complex),
                        np.exp(-1j * ys) * np.sin(x / 2)], axis=1)
        branch = np.einsum("koi,ni->nko", k_anchor, psi)
        rho = np.einsum("nka,nkb->nab", branch, branch.conj())
        ev, vecs = np.linalg.eigh(rho)
        trace = ev.sum(axis=1)
        ok = (trace > tol) & (ev[:, 0] <= rank_tol * np.maximum(ev[:, 1], 1e-300))
        if not np.any(ok):
            continue
        idx = np.nonzero(ok)[0]
        out = vecs[idx, :, 1]
        fid = _best_family_fidelity(out, psi[idx], anchor, w.alpha, w.beta)
        for j in idx[fid > 1 - tol]:
            points.append(BlochPoint(float(x), float(ys[j])))
    return points


def fit_circle_constraint(points) -> tuple[CircleConstraint, float]:
    """Total-least-squares plane through the embedded points."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if pts.shape[0] < 4:
        raise ValueError("need at least 4 points to fit a circle")
    r = embedding(pts[:, 0], pts[:, 1])
    centre = r.mean(axis=0)
    if np.abs(r - centre).max() < 1e-12:
        raise ValueError("degenerate fit: all points coincide")
    _, _, vh = np.linalg.svd(r - centre)
    normal = vh[-1]
    constraint = _canonical(normal, -float(normal @ centre))
    return constraint, float(np.abs(constraint.residuals(pts)).max())


def bloch_vector(v) -> np.ndarray:
    v = as_vector(v)
    if v.size != 2:
        raise ValueError("Bloch vectors are defined for qubits only")
    c0, c1 = v
    return np.array([2 * (np.conj(c0) * c1).real, 2 * (np.conj(c0) * c1).imag,
                     abs(c0) ** 2 - abs(c1) ** 2])


def fixed_overlap_circle(chi, c: float) -> CircleConstraint:
    """Circle of qubits ``psi`` with ``|<chi|psi>|^2 = c``: ``r_chi . r_psi = 2c - 1``."""
    if not 0 < c < 1:
        raise ValueError("overlap must lie strictly between 0 and 1 for a proper circle")
    bx, by, bz = bloch_vector(chi)
    return _canonical(np.array([bz, bx, -by]), -(2 * c - 1))
