"""Dense linear algebra on finite-dimensional Hilbert spaces.

State vectors and density operators are plain complex numpy arrays. A
:class:`Ray` wraps the rank-one projector of a pure state and is the only
object here that carries no phase information.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

TOL = 1e-10


def as_vector(v, normalized: bool = True, tol: float = TOL) -> np.ndarray:
    """Coerce ``v`` to a 1-D complex array, checking the norm if requested."""
    arr = np.asarray(v, dtype=complex)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"state vector must be a non-empty 1-D array, got shape {arr.shape}")
    if normalized:
        norm = np.linalg.norm(arr)
        if abs(norm - 1.0) > tol:
            raise ValueError(f"state vector not normalized: norm = {norm!r}")
    return arr


def normalize(v) -> np.ndarray:
    arr = np.asarray(v, dtype=complex)
    norm = np.linalg.norm(arr)
    if norm < 1e-300:
        raise ValueError("cannot normalize the zero vector")
    return arr / norm


def ket(index: int, dim: int) -> np.ndarray:
    out = np.zeros(dim, dtype=complex)
    out[index] = 1.0
    return out


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def eigvalsh_sym(a: np.ndarray) -> np.ndarray:
    """Eigenvalues of ``a`` after symmetrizing away floating asymmetry."""
    return np.linalg.eigvalsh(hermitian_part(np.asarray(a, dtype=complex)))


def is_psd(a: np.ndarray, tol: float = TOL) -> bool:
    return bool(eigvalsh_sym(a)[0] >= -tol)


@dataclass(frozen=True, eq=False)
class Ray:
    """A pure state as a rank-one projector."""

    projector: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.projector, dtype=complex)
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ValueError(f"projector must be square, got shape {p.shape}")
        scale = max(1.0, float(np.abs(p).max()))
        if np.abs(p - p.conj().T).max() > TOL * scale:
            raise ValueError("projector is not Hermitian")
        if np.abs(p @ p - p).max() > 1e-9 * scale:
            raise ValueError("projector is not idempotent")
        if abs(np.trace(p) - 1.0) > 1e-9:
            raise ValueError(f"projector trace {np.trace(p).real!r} != 1")
        p.setflags(write=False)
        object.__setattr__(self, "projector", p)

    @property
    def dim(self) -> int:
        return self.projector.shape[0]

    def representative(self) -> np.ndarray:
        """Deterministic unit vector for this ray.

        Top eigenvector with its first non-negligible amplitude rotated to be
        real and positive.
        """
        _, vecs = np.linalg.eigh(hermitian_part(self.projector))
        v = vecs[:, -1]
        idx = int(np.argmax(np.abs(v) > 1e-8))
        v = v * (abs(v[idx]) / v[idx])
        return v / np.linalg.norm(v)

    def __array__(self, dtype=None, copy=None):
        return self.projector if dtype is None else self.projector.astype(dtype)


def ray_from_vector(v, tol: float = TOL) -> Ray:
    v = as_vector(v, normalized=True, tol=tol)
    return Ray(np.outer(v, v.conj()))


def overlap_probability(p: Ray, q: Ray) -> float:
    if p.dim != q.dim:
        raise ValueError(f"dimension mismatch: {p.dim} vs {q.dim}")
    val = np.trace(p.projector @ q.projector).real
    return float(min(1.0, max(0.0, val)))


def fidelity(u, v) -> float:
    """|<u|v>|^2 / (|u|^2 |v|^2) for two nonzero vectors."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    return float(abs(np.vdot(u, v)) ** 2 / (np.vdot(u, u).real * np.vdot(v, v).real))


def rephase(v, gamma: float) -> np.ndarray:
    return np.exp(1j * gamma) * np.asarray(v, dtype=complex)


def _column_matrix(vectors: Sequence) -> np.ndarray:
    if len(vectors) == 0:
        raise ValueError("empty family of vectors")
    cols = [np.asarray(v, dtype=complex) for v in vectors]
    dims = {c.shape for c in cols}
    if len(dims) != 1 or cols[0].ndim != 1:
        raise ValueError(f"vectors must share one 1-D shape, got {sorted(dims)}")
    return np.stack(cols, axis=1)


def gram_matrix(vectors: Sequence, tol: float = TOL) -> np.ndarray:
    """Entries ``G[i, j] = <v_i|v_j>``."""
    for v in vectors:
        as_vector(v, normalized=True, tol=tol)
    m = _column_matrix(vectors)
    return m.conj().T @ m


class Independence(NamedTuple):
    independent: bool
    rank: int
    smallest_singular_value: float


def linear_independence(vectors: Sequence, tol: float = TOL) -> Independence:
    """Rank test on the matrix whose columns are ``vectors``.

    Singular values below ``tol * max(sigma)`` count as zero. When there are
    more vectors than dimensions the missing singular values are zero.
    """
    m = _column_matrix(vectors)
    count = m.shape[1]
    sv = np.linalg.svd(m, compute_uv=False)
    if sv.size < count:
        sv = np.concatenate([sv, np.zeros(count - sv.size)])
    smax = sv[0] if sv[0] > 0 else 1.0
    rank = int(np.sum(sv > tol * smax))
    smallest = float(sv[-1])
    return Independence(rank == count, rank, smallest)


def null_vector(vectors: Sequence) -> np.ndarray:
    """Unit coefficient vector ``x`` minimising ``|sum_i x_i v_i|``."""
    m = _column_matrix(vectors)
    _, _, vh = np.linalg.svd(m, full_matrices=True)
    x = vh[-1].conj()
    idx = int(np.argmax(np.abs(x)))
    return x * (abs(x[idx]) / x[idx])


def random_state(dim: int, seed=None) -> np.ndarray:
    """Haar-random unit vector from normalized complex Gaussian amplitudes."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    return normalize(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))


def random_density(dim: int, seed=None, rank: int | None = None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    k = dim if rank is None else rank
    g = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(dim: int, seed=None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def check_density(rho, subnormalized: bool = False, tol: float = TOL) -> np.ndarray:
    """Validate a (possibly subnormalized) density operator and return it."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density operator must be square, got {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > tol:
        raise ValueError("density operator is not Hermitian")
    if eigvalsh_sym(rho)[0] < -tol:
        raise ValueError("density operator has a negative eigenvalue")
    tr = np.trace(rho).real
    if tr > 1 + tol or (not subnormalized and abs(tr - 1) > tol):
        raise ValueError(f"density operator trace {tr!r} out of range")
    return rho


def partial_trace(rho: np.ndarray, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Trace out one factor of a bipartite operator on ``dims[0] x dims[1]``."""
    da, db = dims
    r = np.asarray(rho).reshape(da, db, da, db)
    if keep == 0:
        return np.einsum("ijkj->ik", r)
    if keep == 1:
        return np.einsum("ijil->jl", r)
    raise ValueError("keep must be 0 or 1")


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(0.5 * np.abs(eigvalsh_sym(np.asarray(a) - np.asarray(b))).sum())
