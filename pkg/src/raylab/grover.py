"""Grover search and the reflection-about-the-current-state variant.

Only oracle calls are metered. Reflections, including the counterfactual
reflection about the unknown current state, are treated as free.

Both algorithms keep the state in the plane spanned by the marked basis
vector and the uniform superposition of unmarked entries, so every run can
be carried out either on the full ``N``-entry statevector or on the two
plane coordinates ``(a, b)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# the current state drifts off the unit sphere by round-off as the rounds go on
NORM_TOL = 1e-9


@dataclass(frozen=True)
class GroverInstance:
    n: int
    w: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one qubit")
        if not 0 <= self.w < self.size:
            raise ValueError(f"marked index {self.w} outside [0, {self.size})")

    @property
    def size(self) -> int:
        return 2 ** self.n

    @classmethod
    def of_size(cls, size: int, w: int = 0) -> "GroverInstance":
        n = int(size).bit_length() - 1
        if size < 2 or 2 ** n != size:
            raise ValueError(f"search-space size {size} is not a power of two >= 2")
        return cls(n, w)


class TwoDimState(NamedTuple):
    """Amplitude ``a`` on the marked entry, ``b`` on the normalized unmarked-uniform vector."""

    a: complex
    b: complex

    @classmethod
    def uniform(cls, size: int) -> "TwoDimState":
        return cls(complex(1 / math.sqrt(size)), complex(math.sqrt((size - 1) / size)))

    @property
    def p(self) -> float:
        return abs(self.a) ** 2

    def norm(self) -> float:
        return math.sqrt(abs(self.a) ** 2 + abs(self.b) ** 2)


class PhaseOracle:
    """``|x> -> (-1)^{[x = w]} |x>`` with a query counter."""

    def __init__(self, inst: GroverInstance):
        self.inst = inst
        self.queries = 0

    def __call__(self, state):
        self.queries += 1
        if isinstance(state, TwoDimState):
            return TwoDimState(-state.a, state.b)
        v = np.asarray(state, dtype=complex)
        if v.shape != (self.inst.size,):
            raise ValueError(f"state of length {v.shape} applied to an oracle of size {self.inst.size}")
        out = v.copy()
        out[self.inst.w] = -out[self.inst.w]
        return out


def apply_oracle(oracle: PhaseOracle, state):
    return oracle(state)


def uniform_state(size: int) -> np.ndarray:
    return np.full(size, 1 / math.sqrt(size), dtype=complex)


def reflect_about(psi, target):
    """``(2|psi><psi| - I)|target> = 2<psi|target>|psi> - |target>``."""
    if isinstance(psi, TwoDimState):
        if abs(psi.norm() - 1) > NORM_TOL:
            raise ValueError("reflection axis must be normalized")
        ov = np.conj(psi.a) * target.a + np.conj(psi.b) * target.b
        return TwoDimState(2 * ov * psi.a - target.a, 2 * ov * psi.b - target.b)
    psi = np.asarray(psi, dtype=complex)
    if abs(np.linalg.norm(psi) - 1) > NORM_TOL:
        raise ValueError("reflection axis must be normalized")
    t = np.asarray(target, dtype=complex)
    return 2 * np.vdot(psi, t) * psi - t


def reflection_operator(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if abs(np.linalg.norm(psi) - 1) > NORM_TOL:
        raise ValueError("reflection axis must be normalized")
    return 2 * np.outer(psi, psi.conj()) - np.eye(psi.size)


def grover_iterate(oracle: PhaseOracle, state):
    """One standard Grover step: oracle, then reflection about the uniform state."""
    size = oracle.inst.size
    axis = TwoDimState.uniform(size) if isinstance(state, TwoDimState) else uniform_state(size)
    return reflect_about(axis, oracle(state))


def marked_amplitude(inst: GroverInstance, state) -> complex:
    if isinstance(state, TwoDimState):
        return complex(state.a)
    return complex(np.asarray(state)[inst.w])


def standard_success(size: int, rounds: int) -> float:
    return math.sin((2 * rounds + 1) * math.asin(1 / math.sqrt(size))) ** 2


def overlap_recursion_step(a: complex) -> complex:
    if abs(a) > 1 + 1e-12:
        raise ValueError("overlap amplitude exceeds 1 in modulus")
    return (3 - 4 * abs(a) ** 2) * a


def probability_step(p: float) -> float:
    return p * (3 - 4 * p) ** 2


def round_bound(size: int) -> int:
    """Rounds after which the reflection iterate has first reached ``p >= 1/4``.

    ``ceil(log4(N/4))`` computed in integers so powers of four are exact.
    """
    if size < 4:
        raise ValueError("round bound needs N >= 4")
    r, reach = 0, 4
    while reach < size:
        reach *= 4
        r += 1
    return r


def round_cap(size: int) -> int:
    return max(1, math.ceil(10 * math.log(size, 4)))


class Trace(NamedTuple):
    rounds: list
    amplitudes: list
    probabilities: list
    queries: int


def super_grover_run(inst: GroverInstance, target_p: float, mode: str = "subspace",
                     max_rounds: int | None = None) -> Trace:
    """Iterate ``psi <- R_psi O_f psi`` from the uniform state until ``p >= target_p``."""
    size = inst.size
    if not 0 < target_p <= 1:
        raise ValueError(f"target probability must lie in (0, 1], got {target_p!r}")
    cap = round_cap(size) if max_rounds is None else max_rounds
    oracle = PhaseOracle(inst)
    if mode == "subspace":
        state = TwoDimState.uniform(size)
    elif mode == "statevector":
        state = uniform_state(size)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    amps = [marked_amplitude(inst, state)]
    r = 0
    while abs(amps[-1]) ** 2 < target_p:
        if r >= cap:
            raise RuntimeError(f"target p={target_p} not reached within {cap} rounds")
        state = reflect_about(state, oracle(state))
        amps.append(marked_amplitude(inst, state))
        r += 1
    return Trace(list(range(r + 1)), amps, [abs(a) ** 2 for a in amps], oracle.queries)


def fixed_rounds(inst: GroverInstance, rounds: int, algorithm: str = "super",
                 mode: str = "subspace") -> Trace:
    """Run exactly ``rounds`` rounds of either algorithm and record every step."""
    size = inst.size
    oracle = PhaseOracle(inst)
    state = TwoDimState.uniform(size) if mode == "subspace" else uniform_state(size)
    amps = [marked_amplitude(inst, state)]
    for _ in range(rounds):
        if algorithm == "super":
            state = reflect_about(state, oracle(state))
        elif algorithm == "standard":
            state = grover_iterate(oracle, state)
        else:
            raise ValueError(f"unknown algorithm {algorithm!r}")
        amps.append(marked_amplitude(inst, state))
    return Trace(list(range(rounds + 1)), amps, [abs(a) ** 2 for a in amps], oracle.queries)


def standard_queries_to(inst: GroverInstance, threshold: float, mode: str = "subspace",
                        strict: bool = True) -> int:
    """Instrumented count of standard Grover queries until ``p`` first passes ``threshold``."""
    oracle = PhaseOracle(inst)
    state = TwoDimState.uniform(inst.size) if mode == "subspace" else uniform_state(inst.size)
    limit = 4 * math.isqrt(inst.size) + 4

    def passed(p):
        return p > threshold if strict else p >= threshold

    while not passed(abs(marked_amplitude(inst, state)) ** 2):
        if oracle.queries > limit:
            raise RuntimeError("standard Grover did not pass the threshold")
        state = grover_iterate(oracle, state)
    return oracle.queries


class QueryComparison(NamedTuple):
    size: int
    standard_to_half: int
    super_to_quarter: int
    super_to_half: int
    round_bound: int


def query_comparison(inst: GroverInstance) -> QueryComparison:
    size = inst.size
    std = standard_queries_to(inst, 0.5)
    quarter = super_grover_run(inst, 0.25).queries
    half = super_grover_run(inst, 0.5 + 1e-15).queries
    return QueryComparison(size, std, quarter, half, round_bound(size) if size >= 4 else 0)
