"""Deterministic CZ between encoded modes and its Pauli-transfer tomography.

Gate sequence (atom starts in ``A+``): reflect every mode, Hadamard on the
atom, reflect the control mode again, ``H_bar`` on the atom, measure. In the
code basis the ``g`` branch carries ``diag(1,1,1,-1)`` and the ``s`` branch
``diag(1,-1,-1,-1)``, which the feed-forward ``exp(i pi n/2)`` on every
reflected mode turns into the same gate. With more than one target mode the
same sequence produces a star of CZ gates centred on the control.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cavity import GROUND, HADAMARD, HADAMARD_BAR, STORAGE, CavityModel, cpf_channel
from .codes import PAULI, BinomialCode, logical_state, loss_code
from .fock import DensityMatrix, HilbertSpec, StateVector, fidelity, number_phase
from .register import BranchRegister, DenseRegister

CZ_PHASE = np.pi / 2


@dataclass(frozen=True)
class EntanglerRun:
    register: DenseRegister | BranchRegister
    probabilities: dict[str, float]


def entangle(
    register: DenseRegister | BranchRegister,
    model: CavityModel,
    control: int,
    targets: Sequence[int],
    feed_forward: bool = True,
    keep_branches: bool = False,
):
    """Apply CZ(control, t) for every ``t`` in ``targets`` with a single atom.

    ``register`` holds light modes only and is consumed. Returns an
    :class:`EntanglerRun` whose register is the outcome-averaged state; with
    ``keep_branches`` the unnormalized per-outcome registers are returned as
    a dict instead.
    """
    if control in targets:
        raise ValueError("control mode listed among targets")
    model = model.with_phase(CZ_PHASE)
    spec = register.spec
    reg = register
    reg.attach_atom()
    atom = reg.spec.atom_index
    dims = reg.spec.dims
    for mode in (control, *targets):
        reg.channel(cpf_channel(model, dims[mode]).operators, (mode, atom))
    reg.apply(HADAMARD.matrix, (atom,))
    reg.channel(cpf_channel(model, dims[control]).operators, (control, atom))
    reg.apply(HADAMARD_BAR.matrix, (atom,))
    g = reg.project_atom(GROUND)
    s = reg.project_atom(STORAGE)
    if feed_forward:
        for mode in (control, *targets):
            s.apply(number_phase(CZ_PHASE, spec.dims[mode]).matrix, (mode,))
    probs = {"g": g.trace, "s": s.trace}
    if keep_branches:
        return {"g": g, "s": s}, probs
    g.add(s)
    return EntanglerRun(g, probs)


@dataclass(frozen=True)
class CZOutput:
    state: DensityMatrix
    probabilities: dict[str, float]
    leakage: float


def _code_projector(code: BinomialCode, n_modes: int) -> np.ndarray:
    p = code.projector
    out = p
    for _ in range(n_modes - 1):
        out = np.kron(out, p)
    return out


def cz_gate(rho: DensityMatrix, model: CavityModel, code: BinomialCode | None = None) -> CZOutput:
    """Deterministic CZ on a two-mode state; both outcomes are feed-forward corrected.

    The returned state is trace preserving overall; ``leakage`` is the
    population left outside the two-mode code space.
    """
    if rho.spec.atom_present or rho.spec.n_modes != 2:
        raise ValueError("cz_gate expects two light modes and no atom")
    code = code or loss_code(rho.spec.mode_dims[0])
    run = entangle(DenseRegister.from_state(rho), model, 0, (1,))
    out = run.register.density()
    inside = float(np.trace(_code_projector(code, 2) @ out.matrix).real)
    return CZOutput(out, run.probabilities, out.trace - inside)


def cz_branch(rho: DensityMatrix, model: CavityModel, outcome: str, feed_forward: bool = True) -> tuple[DensityMatrix, float]:
    """Normalized two-mode state for one atomic outcome and its probability."""
    branches, probs = entangle(
        DenseRegister.from_state(rho), model, 0, (1,), feed_forward=feed_forward, keep_branches=True
    )
    p = probs[outcome]
    if p <= 1e-15:
        raise ZeroDivisionError(f"outcome {outcome!r} has zero probability")
    return DensityMatrix(branches[outcome].matrix / p, rho.spec), p


def ideal_cz(code: BinomialCode, n_modes: int = 2, control: int = 0, targets: Sequence[int] = (1,)) -> np.ndarray:
    """CZ(control, t) for all targets as an operator on the encoded modes."""
    d = code.cutoff
    zero_proj = code.logical_zero.amplitudes[:, None] @ code.logical_zero.amplitudes[None, :].conj()
    one_proj = code.logical_one.amplitudes[:, None] @ code.logical_one.amplitudes[None, :].conj()
    z = zero_proj - one_proj
    eye = np.eye(d)
    rest = eye - zero_proj - one_proj

    def kron_all(ops):
        out = ops[0]
        for o in ops[1:]:
            out = np.kron(out, o)
        return out

    a = [eye] * n_modes
    a[control] = zero_proj + rest
    b = [eye] * n_modes
    b[control] = one_proj
    for t in targets:
        b[t] = z
    return kron_all(a) + kron_all(b)


# ---------------------------------------------------------------------------
# process tomography

PAULI_LABELS = tuple(p + q for p in "IXYZ" for q in "IXYZ")
PAULI_BASIS = tuple(np.kron(PAULI[l[0]], PAULI[l[1]]) for l in PAULI_LABELS)
CZ_LOGICAL = np.diag([1, 1, 1, -1]).astype(complex)


@dataclass(frozen=True)
class ProcessMap:
    """Pauli-transfer matrix ``R`` with ``V_out = R V_in``, ``V_k = tr(sigma_k rho)``."""

    matrix: np.ndarray
    ideal: np.ndarray
    leakage: tuple[float, ...]
    labels: tuple[str, ...] = PAULI_LABELS

    @property
    def delta(self) -> float:
        return float(np.max(np.abs(self.matrix - self.ideal)))


def pauli_vector(rho4: np.ndarray) -> np.ndarray:
    return np.array([np.trace(s @ rho4).real for s in PAULI_BASIS])


def ideal_ptm(unitary: np.ndarray = CZ_LOGICAL) -> np.ndarray:
    """``R_kl = tr(sigma_k U sigma_l U^dag)/4``."""
    return np.array(
        [[np.trace(sk @ unitary @ sl @ unitary.conj().T).real / 4 for sl in PAULI_BASIS] for sk in PAULI_BASIS]
    )


def tomography_states(code: BinomialCode) -> list[np.ndarray]:
    """Single-mode probes ``|0~>, B(pi/4, 0), B(pi/4, pi/2), |1~>``."""
    return [
        code.logical_zero.amplitudes,
        logical_state(code, np.pi / 4, 0.0).vector.amplitudes,
        logical_state(code, np.pi / 4, np.pi / 2).vector.amplitudes,
        code.logical_one.amplitudes,
    ]


def tomography_inputs(code: BinomialCode | None = None) -> list[DensityMatrix]:
    """The 16 two-mode product projectors, first mode varying slowest."""
    code = code or loss_code()
    spec = HilbertSpec((code.cutoff, code.cutoff))
    out = []
    for a, b in itertools.product(tomography_states(code), repeat=2):
        v = np.kron(a, b)
        out.append(DensityMatrix(np.outer(v, v.conj()), spec))
    return out


def to_logical(rho: DensityMatrix, code: BinomialCode) -> np.ndarray:
    """Compress a two-mode density matrix onto the 4x4 code-basis block."""
    b = np.kron(code.basis, code.basis)
    return b.conj().T @ rho.matrix @ b


def process_map(model: CavityModel, code: BinomialCode | None = None, renormalize: bool = False) -> ProcessMap:
    """Pauli-transfer matrix ``[b][a]^-1`` of the cavity CZ gate.

    Outputs are restricted to the code space. With ``renormalize=False`` the
    population that leaked out of the code space stays missing from the
    output vectors and therefore shows up in ``R``; ``renormalize=True``
    rescales each restricted output to unit trace first.
    """
    code = code or loss_code()
    a_cols, b_cols, leaks = [], [], []
    for rho_in in tomography_inputs(code):
        out = cz_gate(rho_in, model, code)
        q = to_logical(out.state, code)
        t = float(np.trace(q).real)
        leaks.append(out.state.trace - t)
        if renormalize:
            q = q / t
        a_cols.append(pauli_vector(to_logical(rho_in, code)))
        b_cols.append(pauli_vector(q))
    a = np.array(a_cols).T
    b = np.array(b_cols).T
    r = b @ np.linalg.inv(a)
    return ProcessMap(r, ideal_ptm(), tuple(leaks))


def gate_fidelity_example(model: CavityModel, code: BinomialCode | None = None) -> float:
    """Fidelity of the cavity CZ output with the ideal output for a fixed product input.

    Inputs ``cos(pi/4)|1~> + exp(i pi/4) sin(pi/4)|0~>`` and
    ``cos(pi/3)|1~> + exp(i pi/5) sin(pi/3)|0~>``.
    """
    code = code or loss_code()
    z, o = code.logical_zero.amplitudes, code.logical_one.amplitudes
    psi1 = np.cos(np.pi / 4) * o + np.exp(1j * np.pi / 4) * np.sin(np.pi / 4) * z
    psi2 = np.cos(np.pi / 3) * o + np.exp(1j * np.pi / 5) * np.sin(np.pi / 3) * z
    spec = HilbertSpec((code.cutoff, code.cutoff))
    psi = StateVector(np.kron(psi1, psi2), spec)
    out = cz_gate(psi.to_density(), model, code).state
    ideal = StateVector(ideal_cz(code) @ psi.amplitudes, spec)
    return fidelity(out, ideal)
