"""XY-plane measurements of encoded modes with a beamsplitter and two PNR detectors.

The measured mode ``b`` meets an ancilla ``a`` on a balanced beamsplitter
``U = exp[i pi/4 (a^dag b + a b^dag)]`` and both outputs are counted. For a
fixed click pattern ``(n_a, n_b)`` the amplitude on a pure ancilla is
``<chi|psi>`` with ``|chi> = <A|_a U^dag |n_a, n_b>``. Since ``U`` conserves
the total photon number, only ancilla and mode components with at most
``n_a + n_b`` photons contribute.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial, sqrt

import numpy as np

from .cavity import CavityModel
from .codes import logical_state, loss_code
from .fock import DensityMatrix, HilbertSpec, StateVector, apply_local, beamsplitter, fidelity
from .prep import ANCILLA_THETA, PrepConfig, ancilla_target, prepare

CLICKS = (2, 2)
EIG_CUTOFF = 1e-12


@dataclass(frozen=True)
class AncillaSpec:
    """``cos(th)|0~> + sin(th) exp(-it)|1~>`` with ``tan(th) = sqrt(3/2)``."""

    t: float
    cutoff: int = 6

    @property
    def state(self) -> StateVector:
        return logical_state(loss_code(self.cutoff), ANCILLA_THETA, -self.t).vector

    def density(self) -> DensityMatrix:
        return self.state.to_density()


def target_projection(t: float, cutoff: int = 6) -> StateVector:
    """``(|0~> + exp(it)|1~>)/sqrt(2)``."""
    return logical_state(loss_code(cutoff), np.pi / 4, t).vector


# ---------------------------------------------------------------------------
# explicit operator algebra


def _poly_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for (i, j), c in p.items():
        for (k, l), d in q.items():
            key = (i + k, j + l)
            out[key] = out.get(key, 0) + c * d
    return out


def _poly_pow(p: dict, n: int) -> dict:
    out = {(0, 0): 1.0 + 0j}
    for _ in range(n):
        out = _poly_mul(out, p)
    return out


def transformed_creation_polynomial(n_a: int, n_b: int) -> dict[tuple[int, int], complex]:
    """Coefficients of ``(U^dag a^dag U)^n_a (U^dag b^dag U)^n_b`` in powers of ``a^dag, b^dag``.

    ``U^dag a^dag U = (a^dag - i b^dag)/sqrt(2)`` and
    ``U^dag b^dag U = (b^dag - i a^dag)/sqrt(2)``.
    """
    s = 1 / sqrt(2)
    pa = {(1, 0): s + 0j, (0, 1): -1j * s}
    pb = {(0, 1): s + 0j, (1, 0): -1j * s}
    return _poly_mul(_poly_pow(pa, n_a), _poly_pow(pb, n_b))


def rotated_fock_algebraic(n_a: int, n_b: int, cutoff: int) -> np.ndarray:
    """``U^dag |n_a, n_b>`` as a ``cutoff x cutoff`` amplitude array indexed ``[m_a, m_b]``."""
    if n_a + n_b >= cutoff:
        raise ValueError(f"n_a + n_b = {n_a + n_b} does not fit below cutoff {cutoff}")
    out = np.zeros((cutoff, cutoff), dtype=complex)
    norm = 1 / sqrt(factorial(n_a) * factorial(n_b))
    for (i, j), c in transformed_creation_polynomial(n_a, n_b).items():
        out[i, j] += norm * c * sqrt(factorial(i) * factorial(j))
    return out


def rotated_fock_matrix(n_a: int, n_b: int, cutoff: int) -> np.ndarray:
    """Same as :func:`rotated_fock_algebraic` from the beamsplitter matrix."""
    if n_a + n_b >= cutoff:
        raise ValueError(f"n_a + n_b = {n_a + n_b} does not fit below cutoff {cutoff}")
    u = beamsplitter(cutoff).matrix
    e = np.zeros(cutoff * cutoff)
    e[n_a * cutoff + n_b] = 1
    return (u.conj().T @ e).reshape(cutoff, cutoff)


@lru_cache(maxsize=None)
def _rotated(n_a: int, n_b: int, cutoff: int) -> np.ndarray:
    return rotated_fock_algebraic(n_a, n_b, cutoff)


def povm_element(ancilla: AncillaSpec | StateVector | np.ndarray, n_a: int = 2, n_b: int = 2) -> StateVector:
    """``|chi> = <A|_a U^dag |n_a, n_b>`` on the measured mode (unnormalized)."""
    if isinstance(ancilla, AncillaSpec):
        ancilla = ancilla.state
    amps = ancilla.amplitudes if isinstance(ancilla, StateVector) else np.asarray(ancilla, dtype=complex)
    d = len(amps)
    if n_a + n_b >= d:
        raise ValueError(f"n_a + n_b = {n_a + n_b} exceeds the ancilla cutoff {d}")
    chi = amps.conj() @ _rotated(n_a, n_b, d)
    return StateVector(chi, HilbertSpec((d,)))


def conditioned_operator(ancilla: DensityMatrix | StateVector, cutoff: int = 6, clicks=CLICKS) -> np.ndarray:
    """``M = Tr_a[rho_a U^dag |n_a,n_b><n_a,n_b| U]`` on a ``cutoff``-dimensional mode.

    The ancilla may have any cutoff; components above ``n_a + n_b`` photons
    never reach the click pattern and are dropped.
    """
    n_tot = sum(clicks)
    if n_tot >= cutoff:
        raise ValueError(f"cutoff {cutoff} too small for {clicks} clicks")
    if isinstance(ancilla, StateVector):
        ancilla = ancilla.to_density()
    rho_a = np.asarray(ancilla.matrix)
    k = min(rho_a.shape[0], n_tot + 1)
    rho_small = np.zeros((cutoff, cutoff), dtype=complex)
    rho_small[:k, :k] = rho_a[:k, :k]
    w = _rotated(clicks[0], clicks[1], cutoff)
    # M_mn = sum_ij w[i, m] rho_a[j, i] conj(w[j, n])
    m = w.T @ rho_small.T @ w.conj()
    return 0.5 * (m + m.conj().T)


@dataclass(frozen=True)
class PovmDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns

    @property
    def max_eigenvalue(self) -> float:
        return float(self.eigenvalues.max()) if len(self.eigenvalues) else 0.0

    @property
    def gap_ratio(self) -> float:
        lam = np.sort(self.eigenvalues)[::-1]
        return float(lam[0] / lam[1]) if len(lam) > 1 and lam[1] > 0 else np.inf


def decompose(m: np.ndarray) -> PovmDecomposition:
    w, v = np.linalg.eigh(m)
    keep = w > EIG_CUTOFF * max(1.0, w.max())
    order = np.argsort(w[keep])[::-1]
    return PovmDecomposition(w[keep][order], v[:, keep][:, order])


# ---------------------------------------------------------------------------
# measurement of a cluster vertex


@dataclass
class PovmOutcome:
    projector_state: StateVector
    success_prob: float
    fidelity: float
    post_branches: np.ndarray  # normalized post-state as columns of pure branches
    spec: HilbertSpec
    decomposition: PovmDecomposition

    @property
    def post_state(self) -> DensityMatrix:
        """Dense post-measurement state; memory grows as the squared register size."""
        v = self.post_branches
        return DensityMatrix(v @ v.conj().T, self.spec)


def ancilla_state(t: float, model: CavityModel | None = None, config: PrepConfig = PrepConfig()) -> DensityMatrix:
    """Ideal ancilla when ``model`` is None, otherwise the two-iteration preparation."""
    if model is None:
        return AncillaSpec(t).density()
    return prepare(ancilla_target(t), model, config).state


def _vectors_of(state) -> tuple[np.ndarray, HilbertSpec]:
    if isinstance(state, StateVector):
        return state.amplitudes[:, None], state.spec
    if isinstance(state, DensityMatrix):
        w, v = np.linalg.eigh(0.5 * (state.matrix + state.matrix.conj().T))
        keep = w > 1e-14
        return v[:, keep] * np.sqrt(w[keep]), state.spec
    if hasattr(state, "vectors"):
        return state.vectors, state.spec
    raise TypeError(f"unsupported state type {type(state).__name__}")


def measure_xy(
    state,
    vertex: int,
    t: float,
    ancilla_model: CavityModel | None = None,
    ancilla: DensityMatrix | StateVector | None = None,
    config: PrepConfig = PrepConfig(),
) -> PovmOutcome:
    """Measure mode ``vertex`` (0-based position) along ``cos t X + sin t Y`` with a (2,2) click.

    The conditioned ancilla operator ``M = sum_k lam_k |chi_k><chi_k|``
    defines the post-measurement map ``rho -> sum_k lam_k P_k rho P_k`` with
    ``P_k = |chi_k><chi_k|``; the success probability is ``Tr[M rho]``. The
    returned fidelity is against ``P_t rho P_t`` normalized, with
    ``|chi>_t = (|0~> + exp(it)|1~>)/sqrt(2)``.
    """
    vecs, spec = _vectors_of(state)
    dims = spec.dims
    if not 0 <= vertex < len(dims):
        raise ValueError(f"vertex {vertex} not in a {len(dims)}-mode register")
    d = dims[vertex]
    if ancilla is None:
        ancilla = ancilla_state(t, ancilla_model, config)
    m = conditioned_operator(ancilla, d)
    dec = decompose(m)
    prob = float(np.real(np.sum(vecs.conj() * apply_local(vecs, m, (vertex,), dims))))
    if prob <= 1e-15:
        raise ZeroDivisionError("the (2,2) click pattern has zero probability")
    parts = []
    for lam, chi in zip(dec.eigenvalues, dec.eigenvectors.T):
        proj = np.outer(chi, chi.conj())
        parts.append(np.sqrt(lam) * apply_local(vecs, proj, (vertex,), dims))
    post = np.concatenate(parts, axis=1)
    post = post / np.sqrt(np.sum(np.abs(post) ** 2))
    chi_t = target_projection(t, d).amplitudes
    p_t = np.outer(chi_t, chi_t.conj())
    ideal = apply_local(vecs, p_t, (vertex,), dims)
    ideal_norm = np.sum(np.abs(ideal) ** 2)
    if ideal.shape[1] == 1:
        phi = ideal[:, 0] / np.sqrt(ideal_norm)
        fid = float(np.sum(np.abs(phi.conj() @ post) ** 2))
    else:
        fid = fidelity(DensityMatrix(post @ post.conj().T, spec), DensityMatrix(ideal @ ideal.conj().T / ideal_norm, spec))
    return PovmOutcome(StateVector(chi_t, HilbertSpec((d,))), prob, fid, post, spec, dec)


def ideal_success_scale(cutoff: int = 6) -> float:
    """``|<chi~|chi~>|`` for the ideal ancilla: the factor between P and ``<chi_t|rho|chi_t>``."""
    return float(np.real(povm_element(AncillaSpec(0.0, cutoff)).norm ** 2))
