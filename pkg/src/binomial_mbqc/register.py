"""Two interchangeable state containers for multi-mode circuits.

``DenseRegister`` stores a density matrix and suits up to three modes.
``BranchRegister`` stores the mixture ``sum_k |v_k><v_k|`` as columns of
sub-normalized pure branches; each Kraus operator spawns new columns and the
set is periodically re-diagonalized so that its size never exceeds the rank
of the mixture. Both expose the same small set of operations so that gate
sequences are written once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fock import (
    DensityMatrix,
    HilbertSpec,
    StateVector,
    apply_local,
    atom_state,
    conjugate_local,
    reduce_matrix,
)

BRANCH_WEIGHT_CUTOFF = 1e-8
COMPRESS_EIG_CUTOFF = 1e-14


class DenseRegister:
    def __init__(self, matrix: np.ndarray, spec: HilbertSpec):
        self.matrix = np.asarray(matrix, dtype=complex)
        self.spec = spec

    @classmethod
    def from_state(cls, state: StateVector | DensityMatrix) -> "DenseRegister":
        if isinstance(state, StateVector):
            state = state.to_density()
        return cls(np.array(state.matrix), state.spec)

    def copy(self) -> "DenseRegister":
        return DenseRegister(self.matrix.copy(), self.spec)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def attach_atom(self) -> None:
        plus = atom_state("+").amplitudes
        self.matrix = np.kron(self.matrix, np.outer(plus, plus.conj()))
        self.spec = self.spec.with_atom()

    def apply(self, op: np.ndarray, targets: Sequence[int]) -> None:
        self.matrix = conjugate_local(self.matrix, op, targets, self.spec.dims)

    def channel(self, operators: Sequence[np.ndarray], targets: Sequence[int]) -> None:
        dims = self.spec.dims
        out = np.zeros_like(self.matrix)
        for k in operators:
            out += conjugate_local(self.matrix, k, targets, dims)
        self.matrix = out

    def project_atom(self, outcome: int) -> "DenseRegister":
        n = self.spec.without_atom().size
        block = self.matrix.reshape(n, 2, n, 2)[:, outcome, :, outcome]
        return DenseRegister(block.copy(), self.spec.without_atom())

    def add(self, other: "DenseRegister") -> None:
        self.matrix = self.matrix + other.matrix

    def expectation(self, op: np.ndarray, targets: Sequence[int]) -> complex:
        return complex(np.trace(apply_local(self.matrix, op, targets, self.spec.dims)))

    def reduced(self, keep: Sequence[int]) -> np.ndarray:
        return reduce_matrix(self.matrix, self.spec.dims, keep)

    def density(self) -> DensityMatrix:
        return DensityMatrix(self.matrix, self.spec)

    def scale(self, factor: float) -> None:
        self.matrix = self.matrix * factor


@dataclass
class BranchStats:
    discarded_weight: float = 0.0
    max_branches: int = 0


class BranchRegister:
    def __init__(
        self,
        vectors: np.ndarray,
        spec: HilbertSpec,
        weight_cutoff: float = BRANCH_WEIGHT_CUTOFF,
        stats: BranchStats | None = None,
    ):
        v = np.asarray(vectors, dtype=complex)
        self.vectors = v[:, None] if v.ndim == 1 else v
        self.spec = spec
        self.weight_cutoff = weight_cutoff
        self.stats = stats if stats is not None else BranchStats()

    @classmethod
    def from_state(cls, state: StateVector | DensityMatrix, **kw) -> "BranchRegister":
        if isinstance(state, StateVector):
            return cls(np.array(state.amplitudes), state.spec, **kw)
        w, v = np.linalg.eigh(0.5 * (state.matrix + state.matrix.conj().T))
        keep = w > COMPRESS_EIG_CUTOFF
        return cls(v[:, keep] * np.sqrt(w[keep]), state.spec, **kw)

    def copy(self) -> "BranchRegister":
        return BranchRegister(self.vectors.copy(), self.spec, self.weight_cutoff, self.stats)

    @property
    def n_branches(self) -> int:
        return self.vectors.shape[1]

    @property
    def trace(self) -> float:
        return float(np.sum(np.abs(self.vectors) ** 2))

    def attach_atom(self) -> None:
        plus = atom_state("+").amplitudes
        k = self.n_branches
        v = np.einsum("ik,a->iak", self.vectors, plus)
        self.vectors = v.reshape(-1, k)
        self.spec = self.spec.with_atom()

    def apply(self, op: np.ndarray, targets: Sequence[int]) -> None:
        self.vectors = apply_local(self.vectors, op, targets, self.spec.dims)

    def channel(self, operators: Sequence[np.ndarray], targets: Sequence[int]) -> None:
        dims = self.spec.dims
        parts = [apply_local(self.vectors, k, targets, dims) for k in operators]
        self.vectors = np.concatenate(parts, axis=1)
        self._prune()
        self.compress()

    def _prune(self) -> None:
        w = np.sum(np.abs(self.vectors) ** 2, axis=0)
        keep = w >= self.weight_cutoff
        self.stats.discarded_weight += float(w[~keep].sum())
        self.vectors = self.vectors[:, keep]
        self.stats.max_branches = max(self.stats.max_branches, self.n_branches)

    def compress(self) -> None:
        """Replace the branches by the eigenvectors of the mixture they represent."""
        v = self.vectors
        if v.shape[1] <= 1:
            return
        gram = v.conj().T @ v
        w, u = np.linalg.eigh(0.5 * (gram + gram.conj().T))
        keep = w > COMPRESS_EIG_CUTOFF * max(1.0, w.max())
        self.stats.discarded_weight += float(w[~keep].clip(min=0).sum())
        self.vectors = v @ u[:, keep]

    def project_atom(self, outcome: int) -> "BranchRegister":
        n = self.spec.without_atom().size
        k = self.n_branches
        block = self.vectors.reshape(n, 2, k)[:, outcome, :]
        out = BranchRegister(block.copy(), self.spec.without_atom(), self.weight_cutoff, self.stats)
        out._prune()
        return out

    def add(self, other: "BranchRegister") -> None:
        self.vectors = np.concatenate([self.vectors, other.vectors], axis=1)
        self.compress()

    def expectation(self, op: np.ndarray, targets: Sequence[int]) -> complex:
        ov = apply_local(self.vectors, op, targets, self.spec.dims)
        return complex(np.sum(self.vectors.conj() * ov))

    def reduced(self, keep: Sequence[int]) -> np.ndarray:
        dims = self.spec.dims
        keep = sorted(keep)
        k = self.n_branches
        t = self.vectors.reshape(tuple(dims) + (k,))
        t = np.moveaxis(t, keep, list(range(len(keep))))
        kd = int(np.prod([dims[i] for i in keep]))
        m = t.reshape(kd, -1)
        return m @ m.conj().T

    def density(self) -> DensityMatrix:
        return DensityMatrix(self.vectors @ self.vectors.conj().T, self.spec)

    def scale(self, factor: float) -> None:
        self.vectors = self.vectors * np.sqrt(factor)
