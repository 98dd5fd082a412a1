"""Lossy controlled-phase-flip (CPF) reflections, atomic rotations and measurements.

A photon reflected from the atom-cavity system picks up the amplitude
``r_g`` (atom in ``|g>``, coupled) or ``r_s`` (atom in ``|s>``, uncoupled).
The missing norm ``1 - |r_m|^2`` is lost photon by photon, which gives the
binomial Kraus operators

    A_j^(m) = sum_{n>=j} sqrt(binom(n, j)) r_m^(n-j) (1-|r_m|^2)^(j/2) |n-j><n|

and ``K_j = A_j^(g) (x) |g><g| + A_j^(s) (x) |s><s|``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import comb
from typing import Literal, Sequence

import numpy as np
from scipy.optimize import brentq

from .fock import DensityMatrix, HilbertSpec, atom_state, conjugate_local, tensor

Variant = Literal["uniform", "input_output"]
AmplitudeConvention = Literal["sqrt", "linear"]
LossStructure = Literal["coherent", "which_path"]

GROUND, STORAGE = 0, 1
ATOM_INDEX = {"g": GROUND, "s": STORAGE}


@dataclass(frozen=True)
class CavityModel:
    """Reflection model of the atom-cavity system.

    ``beta_eff`` is the cavity efficiency ``kappa_c/kappa``; ``C`` the
    cooperativity ``g^2/(kappa gamma)``. With ``variant="uniform"`` both
    branches reflect with per-photon amplitude ``beta_eff`` (the default
    ``amplitude="linear"``; ``"sqrt"`` uses ``sqrt(beta_eff)``) and the ``|g>``
    branch picks up ``exp(i phi)``; ``C`` is then unused. ``variant="input_output"`` evaluates
    the resonant reflection formula at ``detuning`` with ``kappa = gamma = 1``.
    ``loss="which_path"`` gives lost photons separate environments per atomic
    state instead of one shared loss mode.
    """

    C: float = 1000.0
    beta_eff: float = 1.0
    phi: float = np.pi / 2
    variant: Variant = "uniform"
    detuning: float = 0.0
    amplitude: AmplitudeConvention = "linear"
    loss: LossStructure = "coherent"

    def __post_init__(self):
        if self.C < 0:
            raise ValueError(f"cooperativity must be >= 0, got {self.C}")
        if not 0 < self.beta_eff <= 1:
            raise ValueError(f"cavity efficiency must lie in (0, 1], got {self.beta_eff}")
        if self.variant not in ("uniform", "input_output"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.amplitude not in ("sqrt", "linear"):
            raise ValueError(f"unknown amplitude convention {self.amplitude!r}")
        if self.loss not in ("coherent", "which_path"):
            raise ValueError(f"unknown loss structure {self.loss!r}")

    def with_phase(self, phi: float) -> "CavityModel":
        return replace(self, phi=phi)

    @property
    def lossless(self) -> bool:
        rg, rs = reflection_amplitudes(self)
        return abs(abs(rg) - 1) < 1e-15 and abs(abs(rs) - 1) < 1e-15


def _input_output_reflection(detuning: float, coupling_sq: float, beta: float) -> complex:
    z = 0.5 + 1j * detuning
    return complex(1 - beta * z / (z * z + coupling_sq))


def reflection_amplitudes(model: CavityModel) -> tuple[complex, complex]:
    """Per-photon reflection amplitudes ``(r_g, r_s)``."""
    if model.variant == "uniform":
        amp = np.sqrt(model.beta_eff) if model.amplitude == "sqrt" else model.beta_eff
        return complex(amp * np.exp(1j * model.phi)), complex(amp)
    rg = _input_output_reflection(model.detuning, model.C, model.beta_eff)
    rs = _input_output_reflection(model.detuning, 0.0, model.beta_eff)
    return rg, rs


def detuning_for_phase(phi: float, C: float, beta_eff: float, span: float = 5.0) -> float:
    """Detuning at which the input-output model gives ``arg(r_g/r_s) = phi``.

    Among all solutions in ``[-span, span]`` the one with the least total
    reflection loss is returned.
    """

    def mismatch(d):
        rg = _input_output_reflection(d, C, beta_eff)
        rs = _input_output_reflection(d, 0.0, beta_eff)
        return float(np.angle(rg / rs * np.exp(-1j * phi)))

    grid = np.linspace(-span, span, 4001)
    vals = np.array([mismatch(d) for d in grid])
    best = None
    for i in range(len(grid) - 1):
        lo, hi = vals[i], vals[i + 1]
        # skip branch-cut jumps of the wrapped phase
        if lo == 0 or (lo * hi < 0 and abs(lo - hi) < np.pi):
            d = grid[i] if lo == 0 else brentq(mismatch, grid[i], grid[i + 1], xtol=1e-14)
            rg = _input_output_reflection(d, C, beta_eff)
            rs = _input_output_reflection(d, 0.0, beta_eff)
            score = abs(rg) ** 2 + abs(rs) ** 2
            if best is None or score > best[0]:
                best = (score, d)
    if best is None:
        raise ValueError(f"no detuning realizes phase {phi} for C={C}, beta={beta_eff}")
    return float(best[1])


def loss_kraus_mode(r: complex, j: int, cutoff: int) -> np.ndarray:
    """``A_j``: reflection with amplitude ``r`` per photon while losing ``j`` photons."""
    t = np.sqrt(max(0.0, 1.0 - abs(r) ** 2))
    out = np.zeros((cutoff, cutoff), dtype=complex)
    for n in range(j, cutoff):
        out[n - j, n] = np.sqrt(comb(n, j)) * r ** (n - j) * t**j
    return out


@dataclass(frozen=True)
class KrausChannel:
    """Kraus operators on ``mode (x) atom`` (dimension ``2 * cutoff``)."""

    operators: tuple[np.ndarray, ...]
    cutoff: int
    labels: tuple[str, ...] = field(default=())

    @property
    def dims(self) -> tuple[int, int]:
        return (self.cutoff, 2)

    def completeness_defect(self, max_level: int | None = None) -> float:
        """``max |sum K^dag K - I|`` restricted to Fock levels ``<= max_level``."""
        total = sum(k.conj().T @ k for k in self.operators)
        dev = total - np.eye(total.shape[0])
        if max_level is not None:
            keep = np.array([n <= max_level for n in range(self.cutoff) for _ in range(2)])
            dev = dev[np.ix_(keep, keep)]
        return float(np.max(np.abs(dev)))

    def apply(self, rho: np.ndarray, targets: Sequence[int], dims: Sequence[int]) -> np.ndarray:
        """Channel acting on subsystems ``targets = (mode, atom)`` of a density matrix."""
        out = np.zeros_like(rho)
        for k in self.operators:
            out += conjugate_local(rho, k, targets, dims)
        return out


def cpf_channel(model: CavityModel, cutoff: int) -> KrausChannel:
    """Lossy CPF channel on one light mode and the atom."""
    rg, rs = reflection_amplitudes(model)
    pg = np.diag([1.0, 0.0]).astype(complex)
    ps = np.diag([0.0, 1.0]).astype(complex)
    # photons lost in one reflection never exceed the mode population
    jmax = cutoff - 1 if (abs(rg) < 1 or abs(rs) < 1) else 0
    ops = []
    labels = []
    for j in range(jmax + 1):
        ag = loss_kraus_mode(rg, j, cutoff)
        as_ = loss_kraus_mode(rs, j, cutoff)
        if j == 0 or model.loss == "coherent":
            ops.append(np.kron(ag, pg) + np.kron(as_, ps))
            labels.append(f"j={j}")
        else:
            ops.append(np.kron(ag, pg))
            labels.append(f"j={j},g")
            ops.append(np.kron(as_, ps))
            labels.append(f"j={j},s")
    return KrausChannel(tuple(ops), cutoff, tuple(labels))


def ideal_cpf(phi: float, cutoff: int) -> np.ndarray:
    """``U(phi) = exp(i phi n) (x) |g><g| + I (x) |s><s|``."""
    phase = np.diag(np.exp(1j * phi * np.arange(cutoff)))
    return np.kron(phase, np.diag([1.0, 0.0])) + np.kron(np.eye(cutoff), np.diag([0.0, 1.0]))


@dataclass(frozen=True)
class AtomicRotation:
    """``R[mu, beta, zeta]`` in the ``(|g>, |s>)`` basis."""

    mu: float = 0.0
    beta_rot: float = 0.0
    zeta: float = 0.0

    @property
    def matrix(self) -> np.ndarray:
        c, s = np.cos(self.zeta), np.sin(self.zeta)
        return np.array(
            [
                [np.exp(1j * self.mu) * c, np.exp(1j * self.beta_rot) * s],
                [-np.exp(-1j * self.beta_rot) * s, np.exp(-1j * self.mu) * c],
            ],
            dtype=complex,
        )


HADAMARD = AtomicRotation(np.pi / 2, np.pi / 2, np.pi / 4)
# maps (g, s) -> ((g - s), (g + s))/sqrt2, closing the two-mode CZ sequence
HADAMARD_BAR = AtomicRotation(0.0, np.pi, np.pi / 4)
IDENTITY_ROTATION = AtomicRotation(0.0, 0.0, 0.0)


def with_atom(rho: DensityMatrix) -> DensityMatrix:
    """Append the atom prepared in ``A+``."""
    if rho.spec.atom_present:
        raise ValueError("state already carries an atom")
    return tensor(rho, atom_state("+").to_density())


def project_atom(rho: np.ndarray, spec: HilbertSpec, outcome: str) -> np.ndarray:
    """Unnormalized light block ``<m| rho |m>``."""
    k = ATOM_INDEX[outcome]
    n = spec.without_atom().size
    r = rho.reshape(n, 2, n, 2)
    return r[:, k, :, k].copy()


def iterate(
    rho: DensityMatrix,
    model: CavityModel,
    rotation: AtomicRotation,
    outcome: str | None,
    mode: int = 0,
) -> tuple[DensityMatrix, float]:
    """One atom-cavity iteration: lossy CPF, atomic rotation, atomic projection.

    A state without atom is first joined with ``A+``. For ``outcome`` in
    ``{"g", "s"}`` the renormalized light state (atom removed) and the
    outcome probability are returned; ``outcome=None`` returns the joint
    state unmeasured with probability 1.
    """
    if not rho.spec.atom_present:
        rho = with_atom(rho)
    spec = rho.spec
    dims = spec.dims
    atom = spec.atom_index
    if not 0 <= mode < spec.n_modes:
        raise IndexError(f"mode {mode} out of range")
    channel = cpf_channel(model, spec.mode_dims[mode])
    m = channel.apply(rho.matrix, (mode, atom), dims)
    m = conjugate_local(m, rotation.matrix, (atom,), dims)
    if outcome is None:
        return DensityMatrix(m, spec), 1.0
    if outcome not in ATOM_INDEX:
        raise ValueError(f"unknown atomic outcome {outcome!r}")
    light = project_atom(m, spec, outcome)
    p = float(np.trace(light).real)
    if p <= 1e-15:
        raise ZeroDivisionError(f"atomic outcome {outcome!r} has zero probability")
    return DensityMatrix(light / p, spec.without_atom()), p


def z_measurement(rho: DensityMatrix, model: CavityModel, mode: int = 0) -> dict[str, tuple[DensityMatrix | None, float]]:
    """Logical Z measurement through one iteration ``O(pi/2, H, m)``.

    In the lossless limit the outcomes realize ``K_g = (Z+I)/2`` and
    ``K_s = (Z-I)/2`` on the code space.
    """
    m = model.with_phase(np.pi / 2)
    out: dict[str, tuple[DensityMatrix | None, float]] = {}
    for label in ("g", "s"):
        try:
            out[label] = iterate(rho, m, HADAMARD, label, mode)
        except ZeroDivisionError:
            out[label] = (None, 0.0)
    return out


def z_measurement_kraus(model: CavityModel, cutoff: int) -> dict[str, list[np.ndarray]]:
    """Light-mode Kraus operators of the Z measurement for each outcome."""
    ch = cpf_channel(model.with_phase(np.pi / 2), cutoff)
    h = HADAMARD.matrix
    plus = atom_state("+").amplitudes
    out: dict[str, list[np.ndarray]] = {}
    for label, k in ATOM_INDEX.items():
        ops = []
        for K in ch.operators:
            # <m| H K |A+> as an operator on the light mode
            full = np.kron(np.eye(cutoff), h) @ K
            blk = full.reshape(cutoff, 2, cutoff, 2)[:, k, :, :] @ plus
            ops.append(blk)
        out[label] = ops
    return out
