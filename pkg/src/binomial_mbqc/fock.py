"""Dense linear algebra over truncated Fock spaces.

Composite spaces are ordered ``[mode_1, ..., mode_k, atom]``; the two-level
atom, when present, is always the last tensor factor with basis ``(|g>, |s>)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import expm

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-8
MAX_NORM_DEFICIT = 1e-4

# working dimension used to build displacement/squeezing before truncation
_PAD_DIM = 220


class TruncationError(ValueError):
    """Raised when a Fock cutoff discards more norm than allowed."""


@dataclass(frozen=True)
class HilbertSpec:
    mode_dims: tuple[int, ...]
    atom_present: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mode_dims", tuple(int(d) for d in self.mode_dims))
        if any(d < 1 for d in self.mode_dims):
            raise ValueError(f"mode dimensions must be >= 1, got {self.mode_dims}")
        if not self.mode_dims and not self.atom_present:
            raise ValueError("empty Hilbert space")

    @property
    def dims(self) -> tuple[int, ...]:
        return self.mode_dims + ((2,) if self.atom_present else ())

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_modes(self) -> int:
        return len(self.mode_dims)

    @property
    def n_subsystems(self) -> int:
        return len(self.dims)

    @property
    def atom_index(self) -> int:
        if not self.atom_present:
            raise ValueError("no atom in this space")
        return self.n_modes

    def with_atom(self) -> "HilbertSpec":
        return HilbertSpec(self.mode_dims, True)

    def without_atom(self) -> "HilbertSpec":
        return HilbertSpec(self.mode_dims, False)

    def keep(self, indices: Sequence[int]) -> "HilbertSpec":
        indices = sorted(set(indices))
        modes = tuple(self.mode_dims[i] for i in indices if i < self.n_modes)
        atom = self.atom_present and self.n_modes in indices
        return HilbertSpec(modes, atom)


def single_mode(cutoff: int) -> HilbertSpec:
    return HilbertSpec((cutoff,))


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    spec: HilbertSpec

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != self.spec.size:
            raise ValueError(f"{amps.size} amplitudes for a space of size {self.spec.size}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm
        if n == 0:
            raise ZeroDivisionError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / n, self.spec)

    def to_density(self) -> "DensityMatrix":
        v = self.amplitudes
        return DensityMatrix(np.outer(v, v.conj()), self.spec)

    def overlap(self, other: "StateVector") -> complex:
        """``<self|other>``."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    matrix: np.ndarray
    spec: HilbertSpec

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.spec.size, self.spec.size):
            raise ValueError(f"matrix shape {m.shape} does not match space size {self.spec.size}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def normalized(self) -> "DensityMatrix":
        t = self.trace
        if t <= 0:
            raise ZeroDivisionError("density matrix has zero trace")
        return DensityMatrix(self.matrix / t, self.spec)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(hermitian_part(self.matrix))

    def check(self, psd_tol: float = PSD_TOL) -> None:
        """Raise ``ValueError`` unless Hermitian, PSD and of trace in (0, 1]."""
        m = self.matrix
        herm = np.max(np.abs(m - m.conj().T)) if m.size else 0.0
        if herm > HERMITIAN_TOL:
            raise ValueError(f"not Hermitian (defect {herm:.2e})")
        lo = self.eigenvalues().min()
        if lo < -psd_tol:
            raise ValueError(f"not positive semidefinite (min eigenvalue {lo:.2e})")
        t = self.trace
        if not 0 < t <= 1 + 1e-9:
            raise ValueError(f"trace {t} outside (0, 1]")

    def expectation(self, op: "Operator | np.ndarray") -> complex:
        m = op.matrix if isinstance(op, Operator) else op
        return complex(np.trace(m @ self.matrix))


@dataclass(frozen=True)
class Operator:
    matrix: np.ndarray
    spec: HilbertSpec

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.spec.size, self.spec.size):
            raise ValueError(f"operator shape {m.shape} does not match space size {self.spec.size}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            _same_spec(self.spec, other.spec)
            return Operator(self.matrix @ other.matrix, self.spec)
        if isinstance(other, StateVector):
            _same_spec(self.spec, other.spec)
            return StateVector(self.matrix @ other.amplitudes, self.spec)
        if isinstance(other, DensityMatrix):
            _same_spec(self.spec, other.spec)
            return DensityMatrix(self.matrix @ other.matrix, self.spec)
        return NotImplemented

    @property
    def dag(self) -> "Operator":
        return Operator(self.matrix.conj().T, self.spec)

    def conjugate(self, rho: DensityMatrix) -> DensityMatrix:
        """``O rho O^dagger``."""
        _same_spec(self.spec, rho.spec)
        return DensityMatrix(self.matrix @ rho.matrix @ self.matrix.conj().T, rho.spec)


def _same_spec(a: HilbertSpec, b: HilbertSpec) -> None:
    if a != b:
        raise ValueError(f"incompatible spaces {a} and {b}")


def hermitian_part(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


# ---------------------------------------------------------------------------
# single-mode building blocks


@lru_cache(maxsize=64)
def _annihilation(cutoff: int) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), 1).astype(complex)
    a.setflags(write=False)
    return a


def annihilation(cutoff: int) -> np.ndarray:
    return _annihilation(int(cutoff)).copy()


def number(cutoff: int) -> np.ndarray:
    return np.diag(np.arange(cutoff, dtype=float)).astype(complex)


def fock(n: int, cutoff: int) -> StateVector:
    if not 0 <= n < cutoff:
        raise ValueError(f"Fock level {n} outside cutoff {cutoff}")
    v = np.zeros(cutoff, dtype=complex)
    v[n] = 1.0
    return StateVector(v, single_mode(cutoff))


def number_phase(phi: float, cutoff: int) -> Operator:
    """Diagonal rotation ``exp(i phi n)``."""
    return Operator(np.diag(np.exp(1j * phi * np.arange(cutoff))), single_mode(cutoff))


def displacement(alpha: complex, cutoff: int) -> Operator:
    a = _annihilation(_PAD_DIM)
    d = expm(alpha * a.conj().T - np.conj(alpha) * a)
    return Operator(d[:cutoff, :cutoff], single_mode(cutoff))


def squeezing(r: float, cutoff: int) -> Operator:
    """``S(r) = exp[(r/2)(a^2 - a^dag^2)]``; ``r > 0`` squeezes the position quadrature."""
    a = _annihilation(_PAD_DIM)
    ad = a.conj().T
    s = expm(0.5 * r * (a @ a - ad @ ad))
    return Operator(s[:cutoff, :cutoff], single_mode(cutoff))


def displaced_squeezed_amplitudes(alpha: complex, r: float, nmax: int) -> np.ndarray:
    """Exact Fock amplitudes ``<n|D(alpha)S(r)|0>`` for ``n = 0..nmax-1``.

    Uses the three-term recurrence obtained from the state being annihilated
    by ``(a - alpha) cosh r + (a^dag - alpha*) sinh r``.
    """
    ch, sh, th = np.cosh(r), np.sinh(r), np.tanh(r)
    gamma = alpha * ch + np.conj(alpha) * sh
    c = np.zeros(nmax, dtype=complex)
    c[0] = np.exp(-0.5 * abs(alpha) ** 2 - 0.5 * np.conj(alpha) ** 2 * th) / np.sqrt(ch)
    if nmax > 1:
        c[1] = gamma * c[0] / ch
    for n in range(1, nmax - 1):
        c[n + 1] = (gamma * c[n] - sh * np.sqrt(n) * c[n - 1]) / (ch * np.sqrt(n + 1))
    return c


def displaced_squeezed_state(alpha: complex, r: float, cutoff: int = 16) -> StateVector:
    """``D(alpha) S(r) |0>`` truncated to ``cutoff`` levels and renormalized."""
    if cutoff < 8:
        raise ValueError(f"cutoff must be >= 8, got {cutoff}")
    if abs(alpha) > 3 or abs(r) > 1.5:
        raise ValueError(f"(alpha={alpha}, r={r}) outside the supported range |alpha|<=3, |r|<=1.5")
    a = _annihilation(_PAD_DIM)
    ad = a.conj().T
    vac_sq = expm(0.5 * r * (a @ a - ad @ ad))[:, 0]
    full = expm(alpha * ad - np.conj(alpha) * a) @ vac_sq
    kept = full[:cutoff]
    deficit = 1.0 - float(np.vdot(kept, kept).real)
    if deficit > MAX_NORM_DEFICIT:
        raise TruncationError(
            f"cutoff {cutoff} discards {deficit:.2e} of the norm (limit {MAX_NORM_DEFICIT})"
        )
    return StateVector(kept / np.linalg.norm(kept), single_mode(cutoff))


def truncation_deficit(alpha: complex, r: float, cutoff: int) -> float:
    c = displaced_squeezed_amplitudes(alpha, r, cutoff)
    return 1.0 - float(np.sum(np.abs(c) ** 2))


def beamsplitter(cutoff: int) -> Operator:
    """Balanced beamsplitter ``exp[i pi/4 (a^dag b + a b^dag)]`` on two equal modes."""
    a = _annihilation(cutoff)
    eye = np.eye(cutoff)
    A = np.kron(a, eye)
    B = np.kron(eye, a)
    gen = A.conj().T @ B + A @ B.conj().T
    return Operator(expm(1j * np.pi / 4 * gen), HilbertSpec((cutoff, cutoff)))


# ---------------------------------------------------------------------------
# composition


def _merge_specs(specs: Sequence[HilbertSpec]) -> HilbertSpec:
    modes: list[int] = []
    atom = False
    for i, s in enumerate(specs):
        if atom:
            raise ValueError("the atom must be the last tensor factor")
        modes.extend(s.mode_dims)
        atom = s.atom_present
    return HilbertSpec(tuple(modes), atom)


def tensor(*items):
    """Kronecker product of states, density matrices or operators, in order."""
    if len(items) == 1 and isinstance(items[0], (list, tuple)):
        items = tuple(items[0])
    if not items:
        raise ValueError("nothing to tensor")
    kinds = {type(x) for x in items}
    if len(kinds) != 1:
        raise TypeError(f"cannot mix {sorted(k.__name__ for k in kinds)} in a tensor product")
    kind = kinds.pop()
    spec = _merge_specs([x.spec for x in items])
    if kind is StateVector:
        out = items[0].amplitudes
        for x in items[1:]:
            out = np.kron(out, x.amplitudes)
        return StateVector(out, spec)
    out = items[0].matrix
    for x in items[1:]:
        out = np.kron(out, x.matrix)
    return kind(out, spec)


def atom_state(label: str) -> StateVector:
    """Atomic basis or ``A+ = (|g> + |s>)/sqrt(2)`` states."""
    vecs = {
        "g": [1, 0],
        "s": [0, 1],
        "+": [1 / np.sqrt(2), 1 / np.sqrt(2)],
    }
    return StateVector(np.array(vecs[label], dtype=complex), HilbertSpec((), True))


def partial_trace(rho: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Trace out every subsystem whose index is not in ``keep``."""
    dims = rho.spec.dims
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must be non-empty")
    if keep[0] < 0 or keep[-1] >= len(dims):
        raise IndexError(f"subsystem indices {keep} out of range for {len(dims)} subsystems")
    m = reduce_matrix(rho.matrix, dims, keep)
    return DensityMatrix(m, rho.spec.keep(keep))


def reduce_matrix(m: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    n = len(dims)
    t = m.reshape(tuple(dims) * 2)
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for i in range(n):
        if i not in keep:
            col[i] = row[i]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    t = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    k = int(np.prod([dims[i] for i in keep]))
    return t.reshape(k, k)


def apply_local(vectors: np.ndarray, op: np.ndarray, targets: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Apply ``op`` (acting on subsystems ``targets``) to the columns of ``vectors``.

    ``vectors`` has shape ``(prod(dims),)`` or ``(prod(dims), k)``.
    """
    single = vectors.ndim == 1
    v = vectors[:, None] if single else vectors
    k = v.shape[1]
    targets = list(targets)
    t = v.reshape(tuple(dims) + (k,))
    t = np.moveaxis(t, targets, list(range(len(targets))))
    rest = t.shape[len(targets) :]
    tdim = int(np.prod([dims[i] for i in targets]))
    t = (op @ t.reshape(tdim, -1)).reshape(tuple(dims[i] for i in targets) + rest)
    t = np.moveaxis(t, list(range(len(targets))), targets)
    out = t.reshape(-1, k)
    return out[:, 0] if single else out


def conjugate_local(m: np.ndarray, op: np.ndarray, targets: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """``op m op^dagger`` with ``op`` acting on ``targets``; ``m`` Hermitian."""
    x = apply_local(m, op, targets, dims)
    return apply_local(x.conj().T, op, targets, dims).conj().T


def embed(op: np.ndarray, targets: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Full-space matrix of ``op`` acting on ``targets`` (identity elsewhere)."""
    size = int(np.prod(dims))
    return apply_local(np.eye(size, dtype=complex), op, targets, dims)


# ---------------------------------------------------------------------------
# fidelity


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(hermitian_part(m))
    # eigenvalues at rounding level would otherwise contribute sqrt(eps) each
    w = np.where(w > 1e-13 * max(1.0, w.max()), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho1, rho2) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2``.

    Accepts ``StateVector`` or ``DensityMatrix``; pure inputs use the overlap
    shortcut. Inputs are not renormalized.
    """
    if rho1.spec != rho2.spec:
        raise ValueError(f"incompatible spaces {rho1.spec} and {rho2.spec}")
    if isinstance(rho1, StateVector) and isinstance(rho2, StateVector):
        return float(min(1.0, abs(np.vdot(rho1.amplitudes, rho2.amplitudes)) ** 2))
    if isinstance(rho1, StateVector):
        rho1, rho2 = rho2, rho1
    if isinstance(rho2, StateVector):
        _require_psd(rho1)
        v = rho2.amplitudes
        return float(np.clip(np.vdot(v, rho1.matrix @ v).real, 0.0, 1.0))
    _require_psd(rho1)
    _require_psd(rho2)
    # nuclear norm of sqrt(rho1) sqrt(rho2), symmetric in the arguments
    sv = np.linalg.svd(_psd_sqrt(rho1.matrix) @ _psd_sqrt(rho2.matrix), compute_uv=False)
    return float(np.clip(np.sum(sv) ** 2, 0.0, 1.0))


def _require_psd(rho: DensityMatrix) -> None:
    lo = rho.eigenvalues().min()
    if lo < -PSD_TOL:
        raise ValueError(f"fidelity needs a PSD input (min eigenvalue {lo:.2e})")
