"""Binomial code states, logical operators and Knill-Laflamme checks."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Literal, Mapping, Sequence

import numpy as np

from .fock import HilbertSpec, Operator, StateVector, annihilation, number, single_mode


@dataclass(frozen=True)
class BinomialCode:
    N: int
    S: int
    cutoff: int
    logical_zero: StateVector
    logical_one: StateVector

    @property
    def spacing(self) -> int:
        return self.S + 1

    @property
    def basis(self) -> np.ndarray:
        """``(cutoff, 2)`` isometry whose columns are ``|0~>`` and ``|1~>``."""
        return np.column_stack([self.logical_zero.amplitudes, self.logical_one.amplitudes])

    @property
    def projector(self) -> np.ndarray:
        b = self.basis
        return b @ b.conj().T

    def encode(self, qubit: Sequence[complex]) -> StateVector:
        return StateVector(self.basis @ np.asarray(qubit, dtype=complex), single_mode(self.cutoff))

    def truncated(self, cutoff: int) -> "BinomialCode":
        return make_code(self.N, self.S, cutoff)


def make_code(N: int = 1, S: int = 1, cutoff: int = 6) -> BinomialCode:
    """Binomial code of order ``N`` and spacing ``S + 1``.

    Amplitudes are ``sqrt(binom(N+1, p) / 2^N)`` on ``|p(S+1)>``; even ``p``
    build ``|0~>``, odd ``p`` build ``|1~>``.
    """
    if N < 0 or S < 0:
        raise ValueError("N and S must be non-negative")
    top = (N + 1) * (S + 1)
    if top >= cutoff:
        raise ValueError(f"cutoff {cutoff} too small: the code reaches Fock level {top}")
    zero = np.zeros(cutoff, dtype=complex)
    one = np.zeros(cutoff, dtype=complex)
    for p in range(N + 2):
        amp = np.sqrt(comb(N + 1, p) / 2**N)
        (zero if p % 2 == 0 else one)[p * (S + 1)] = amp
    spec = single_mode(cutoff)
    return BinomialCode(N, S, cutoff, StateVector(zero, spec), StateVector(one, spec))


def loss_code(cutoff: int = 6) -> BinomialCode:
    """Lowest-order loss code ``|0~> = (|0>+|4>)/sqrt2``, ``|1~> = |2>``."""
    return make_code(1, 1, cutoff)


@dataclass(frozen=True)
class TwoModeCode:
    logical_zero: StateVector
    logical_one: StateVector


def make_two_mode_dephasing_code(cutoff: int = 6) -> TwoModeCode:
    """``|0~> = (|04> + |40>)/sqrt2``, ``|1~> = |22>`` on two modes."""
    if cutoff < 5:
        raise ValueError(f"cutoff must be >= 5, got {cutoff}")
    spec = HilbertSpec((cutoff, cutoff))
    zero = np.zeros((cutoff, cutoff), dtype=complex)
    zero[0, 4] = zero[4, 0] = 1 / np.sqrt(2)
    one = np.zeros((cutoff, cutoff), dtype=complex)
    one[2, 2] = 1.0
    return TwoModeCode(StateVector(zero.ravel(), spec), StateVector(one.ravel(), spec))


@dataclass(frozen=True)
class LogicalState:
    theta: float
    phi: float
    vector: StateVector

    @property
    def qubit(self) -> np.ndarray:
        return qubit_amplitudes(self.theta, self.phi)


def qubit_amplitudes(theta: float, phi: float) -> np.ndarray:
    return np.array([np.cos(theta), np.exp(1j * phi) * np.sin(theta)], dtype=complex)


def logical_state(code: BinomialCode, theta: float, phi: float = 0.0) -> LogicalState:
    """``cos(theta)|0~> + exp(i phi) sin(theta)|1~>``."""
    return LogicalState(theta, phi, code.encode(qubit_amplitudes(theta, phi)))


PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def logical_pauli(code: BinomialCode, which: Literal["I", "X", "Y", "Z"]) -> Operator:
    """Pauli operator on the code space, zero on its orthogonal complement.

    ``Y = iXZ``.
    """
    if which not in PAULI:
        raise ValueError(f"unknown Pauli {which!r}")
    b = code.basis
    return Operator(b @ PAULI[which] @ b.conj().T, single_mode(code.cutoff))


@dataclass(frozen=True)
class KLReport:
    """Knill-Laflamme data for an error set ``{E_k}``.

    ``alpha[k, l] = <0~|E_k^dag E_l|0~>``; ``off_logical[k, l]`` holds
    ``|<0~|E_k^dag E_l|1~>|`` and ``diagonal_mismatch[k, l]`` holds
    ``|<0~|E_k^dag E_l|0~> - <1~|E_k^dag E_l|1~>|``.
    """

    labels: tuple[str, ...]
    alpha: np.ndarray
    off_logical: np.ndarray
    diagonal_mismatch: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(max(self.off_logical.max(), self.diagonal_mismatch.max()))

    def passes(self, tol: float = 1e-10) -> bool:
        return self.max_residual < tol


def error_operators(cutoff: int, names: Sequence[str]) -> dict[str, np.ndarray]:
    """Common error operators by name: ``I, a, a2, ad, n`` (``a2 = a^2``, ``ad = a^dag``)."""
    a = annihilation(cutoff)
    table = {
        "I": np.eye(cutoff, dtype=complex),
        "a": a,
        "a2": a @ a,
        "ad": a.conj().T,
        "n": number(cutoff),
        "n2": number(cutoff) @ number(cutoff),
    }
    missing = [n for n in names if n not in table]
    if missing:
        raise ValueError(f"unknown error operators {missing}")
    return {n: table[n] for n in names}


def kl_check(code: BinomialCode, errors: Mapping[str, np.ndarray] | Sequence[np.ndarray]) -> KLReport:
    """Residuals of the Knill-Laflamme conditions; valid iff all are below 1e-10."""
    if isinstance(errors, Mapping):
        labels = tuple(errors)
        ops = [np.asarray(errors[k]) for k in labels]
    else:
        ops = [np.asarray(e) for e in errors]
        labels = tuple(f"E{i}" for i in range(len(ops)))
    zero = code.logical_zero.amplitudes
    one = code.logical_one.amplitudes
    ez = [e @ zero for e in ops]
    eo = [e @ one for e in ops]
    m = len(ops)
    alpha = np.zeros((m, m), dtype=complex)
    off = np.zeros((m, m))
    diag = np.zeros((m, m))
    for k in range(m):
        for l in range(m):
            alpha[k, l] = np.vdot(ez[k], ez[l])
            off[k, l] = abs(np.vdot(ez[k], eo[l]))
            diag[k, l] = abs(alpha[k, l] - np.vdot(eo[k], eo[l]))
    return KLReport(labels, alpha, off, diag)
