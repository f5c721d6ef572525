"""Kraus-form CP maps with postselection semantics.

A :class:`KrausChannel` is one outcome branch of an instrument: the trace of
its output is the probability that the branch fires. The Kraus list is kept
exactly as given (no canonicalization), because arguments about individual
branches refer to individual operators.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from raylab.hilbert import TOL, eigvalsh_sym


@dataclass(frozen=True, eq=False)
class KrausChannel:
    kraus_ops: tuple

    def __init__(self, kraus_ops: Sequence):
        ops = [np.array(k, dtype=complex) for k in kraus_ops]
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        if any(k.ndim != 2 for k in ops):
            raise ValueError("Kraus operators must be matrices")
        if len({k.shape for k in ops}) != 1:
            raise ValueError("Kraus operators must share one shape")
        if all(not np.any(k) for k in ops):
            raise ValueError("all Kraus operators are zero")
        for k in ops:
            k.setflags(write=False)
        object.__setattr__(self, "kraus_ops", tuple(ops))

    @property
    def dim_out(self) -> int:
        return self.kraus_ops[0].shape[0]

    @property
    def dim_in(self) -> int:
        return self.kraus_ops[0].shape[1]

    def effect(self) -> np.ndarray:
        """``sum_k M_k^dag M_k``, the success effect of the branch."""
        return sum(k.conj().T @ k for k in self.kraus_ops)

    @classmethod
    def identity(cls, dim: int) -> "KrausChannel":
        return cls([np.eye(dim)])


def _check_input(ch: KrausChannel, rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (ch.dim_in, ch.dim_in):
        raise ValueError(f"input shape {rho.shape} does not match channel dim_in {ch.dim_in}")
    return rho


def apply(ch: KrausChannel, rho) -> np.ndarray:
    """``sum_k M_k rho M_k^dag``; linear, so ``rho`` need not be normalized."""
    rho = _check_input(ch, rho)
    return sum(k @ rho @ k.conj().T for k in ch.kraus_ops)


def apply_pure(ch: KrausChannel, v) -> np.ndarray:
    """Channel output on the pure input ``|v><v|`` without forming it."""
    v = np.asarray(v, dtype=complex)
    if v.shape != (ch.dim_in,):
        raise ValueError(f"input length {v.shape} does not match channel dim_in {ch.dim_in}")
    outs = [k @ v for k in ch.kraus_ops]
    return sum(np.outer(o, o.conj()) for o in outs)


def success_probability(ch: KrausChannel, rho) -> float:
    return float(np.trace(apply(ch, rho)).real)


class CptniCheck(NamedTuple):
    ok: bool
    max_eigenvalue: float


def is_cptni(ch: KrausChannel, tol: float = TOL) -> CptniCheck:
    lam = float(eigvalsh_sym(ch.effect())[-1])
    return CptniCheck(lam <= 1 + tol, lam)


def choi_matrix(ch: KrausChannel) -> np.ndarray:
    """Choi matrix ``sum_ij |i><j| (x) L(|i><j|)`` on ``H_in (x) H_out``.

    Input factor first. PSD exactly when the map is completely positive.
    """
    din, dout = ch.dim_in, ch.dim_out
    choi = np.zeros((din * dout, din * dout), dtype=complex)
    for k in ch.kraus_ops:
        # vec of K in input-major order: sum_i |i> (x) K|i>
        v = k.T.reshape(-1)
        choi += np.outer(v, v.conj())
    return choi


def apply_choi(choi: np.ndarray, rho, dim_in: int, dim_out: int) -> np.ndarray:
    """Channel action recovered from its Choi matrix: ``tr_in[(rho^T (x) I) J]``."""
    j = np.asarray(choi).reshape(dim_in, dim_out, dim_in, dim_out)
    rho = np.asarray(rho, dtype=complex)
    return np.einsum("ij,iajb->ab", rho, j)


def tensor(ch_a: KrausChannel, ch_b: KrausChannel) -> KrausChannel:
    return KrausChannel([np.kron(a, b) for a in ch_a.kraus_ops for b in ch_b.kraus_ops])


def compose(ch_2: KrausChannel, ch_1: KrausChannel) -> KrausChannel:
    """Apply ``ch_1`` first, then ``ch_2``."""
    if ch_1.dim_out != ch_2.dim_in:
        raise ValueError(f"cannot compose: {ch_1.dim_out} outputs into {ch_2.dim_in} inputs")
    return KrausChannel([b @ a for b in ch_2.kraus_ops for a in ch_1.kraus_ops])


def random_channel(dim_in: int, dim_out: int, n_kraus: int, seed=None,
                   trace_preserving: bool = False) -> KrausChannel:
    """Random CPTNI channel from a Gaussian Kraus list.

    The list is rescaled so that its effect is at most the identity; with
    ``trace_preserving`` it is orthonormalized to equal the identity.
    """
    if trace_preserving and n_kraus * dim_out < dim_in:
        raise ValueError("a trace-preserving map needs n_kraus * dim_out >= dim_in")
    rng = np.random.default_rng(seed)
    shape = (n_kraus, dim_out, dim_in)
    ops = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    effect = np.einsum("kai,kaj->ij", ops.conj(), ops)
    if trace_preserving:
        w, u = np.linalg.eigh(effect)
        inv_sqrt = u @ np.diag(w ** -0.5) @ u.conj().T
        ops = ops @ inv_sqrt
    else:
        lam = np.linalg.eigvalsh(effect)[-1]
        ops = ops * (rng.uniform(0.2, 1.0) / np.sqrt(lam))
    return KrausChannel(list(ops))
