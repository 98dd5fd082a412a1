"""Conditional preparation of binomial-code superpositions from Gaussian light.

Two atom-cavity iterations filter a displaced squeezed input: the first
(Hadamard rotation, outcome ``g``) keeps the even photon numbers and yields
approximately ``cos(t0)|0~> + sin(t0)|1~>`` with ``t0 = pi/3.3``; the second
(rotation ``R[beta_rot, zeta]``, outcome ``g``) re-weights and phases the two
logical components.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.optimize import minimize, root

from .cavity import HADAMARD, AtomicRotation, CavityModel, iterate
from .codes import LogicalState, logical_state, loss_code
from .fock import (
    DensityMatrix,
    displaced_squeezed_amplitudes,
    displaced_squeezed_state,
    displacement,
    fidelity,
    partial_trace,
    squeezing,
)

BASE_ANGLE = np.pi / 3.3


@dataclass(frozen=True)
class PrepConfig:
    alpha: float = 1.4
    r: float = 0.25
    cutoff: int = 16
    # CPF phase of the first (parity-filter) reflection and of the second one
    first_phase: float = np.pi
    second_phase: float = np.pi / 2
    base_angle: float = BASE_ANGLE
    ratio_weight: float = 1.0
    leakage_weight: float = 5.0
    alpha_range: tuple[float, float] = (0.5, 2.5)
    r_range: tuple[float, float] = (-0.8, 0.8)
    grid_step: float = 0.1


@dataclass(frozen=True)
class PrepTarget:
    name: str
    theta: float
    phi: float

    def logical(self, cutoff: int) -> LogicalState:
        return logical_state(loss_code(cutoff), self.theta, self.phi)


T2_THETA = 0.5 * np.arccos(1 / np.sqrt(3))
ANCILLA_THETA = np.arctan(np.sqrt(1.5))


def ancilla_target(t: float) -> PrepTarget:
    """POVM ancilla ``sqrt(2/5)(|0~> + sqrt(3/2) exp(-it)|1~>)``."""
    return PrepTarget(f"A({t:.6g})", ANCILLA_THETA, -t)


TARGETS: dict[str, PrepTarget] = {
    "plus": PrepTarget("plus", np.pi / 4, 0.0),
    "T1": PrepTarget("T1", np.pi / 4, np.pi / 4),
    "T2": PrepTarget("T2", T2_THETA, np.pi / 4),
    "H": PrepTarget("H", np.pi / 8, 0.0),
    "A": PrepTarget("A", ANCILLA_THETA, -np.pi / 3),
}


def get_target(name: str) -> PrepTarget:
    if name in TARGETS:
        return TARGETS[name]
    if name.startswith("ancilla(") and name.endswith(")"):
        return ancilla_target(float(name[len("ancilla(") : -1]))
    raise KeyError(f"unknown preparation target {name!r}")


# ---------------------------------------------------------------------------
# input optimization


@dataclass(frozen=True)
class InputFit:
    alpha: float
    r: float
    score: float
    ratio_residual_2: float
    ratio_residual_4: float
    leakage: float

    @property
    def ratios_matched(self) -> bool:
        return max(self.ratio_residual_2, self.ratio_residual_4) < 0.05


def input_residuals(alpha: float, r: float, theta: float) -> tuple[float, float, float]:
    """``(|c2/c0 - sqrt2 tan(theta)|, |c4/c0 - 1|, 1 - sum_{n<=5}|c_n|^2)``."""
    c = displaced_squeezed_amplitudes(alpha, r, 6)
    c0 = c[0]
    res2 = abs(c[2] / c0 - np.sqrt(2) * np.tan(theta))
    res4 = abs(c[4] / c0 - 1.0)
    leak = 1.0 - float(np.sum(np.abs(c) ** 2))
    return float(res2), float(res4), leak


def input_objective(params, theta: float, config: PrepConfig = PrepConfig()) -> float:
    alpha, r = params
    (alo, ahi), (rlo, rhi) = config.alpha_range, config.r_range
    # quadratic wall keeps Nelder-Mead inside the search box
    wall = max(0.0, alo - alpha, alpha - ahi) + max(0.0, rlo - r, r - rhi)
    res2, res4, leak = input_residuals(alpha, r, theta)
    return config.ratio_weight * (res2 + res4) + config.leakage_weight * leak + 1e3 * wall**2


def optimize_input(theta_target: float, config: PrepConfig = PrepConfig(), n_starts: int = 5) -> InputFit:
    """Best displaced-squeezed input for ``cos(t)|0~> + sin(t)|1~>``.

    A coarse grid over the search box seeds Nelder-Mead runs from its
    ``n_starts`` best points. The best point found is returned even when the
    ratios cannot be matched.
    """
    if not 0 < theta_target < np.pi / 2:
        raise ValueError("theta must lie in (0, pi/2)")
    step = config.grid_step
    alphas = np.arange(config.alpha_range[0], config.alpha_range[1] + step / 2, step)
    rs = np.arange(config.r_range[0], config.r_range[1] + step / 2, step)
    scored = sorted(
        (input_objective((a, r), theta_target, config), a, r) for a in alphas for r in rs
    )
    best = None
    for _, a0, r0 in scored[:n_starts]:
        res = minimize(
            input_objective,
            x0=[a0, r0],
            args=(theta_target, config),
            method="Nelder-Mead",
            options={"xatol": 1e-8, "fatol": 1e-12, "maxiter": 4000, "initial_simplex": [[a0, r0], [a0 + step / 2, r0], [a0, r0 + step / 2]]},
        )
        if best is None or res.fun < best.fun:
            best = res
    alpha, r = (float(x) for x in best.x)
    res2, res4, leak = input_residuals(alpha, r, theta_target)
    return InputFit(alpha, r, float(best.fun), res2, res4, leak)


# ---------------------------------------------------------------------------
# second-iteration rotation


def rotation_ratio(beta_rot: float, zeta: float, base_angle: float = BASE_ANGLE) -> complex:
    """Amplitude ratio ``c_1~/c_0~`` left after the second iteration (outcome g)."""
    e = np.exp(1j * beta_rot)
    c, s = np.cos(zeta), np.sin(zeta)
    return complex((-c + e * s) / (c + e * s) * np.tan(base_angle))


def canonical_rotation(beta_rot: float, zeta: float) -> tuple[float, float]:
    """Representative with ``zeta`` in ``(-pi, -pi/2)`` and ``beta_rot`` in ``(-pi, pi]``.

    ``(beta, zeta)``, ``(beta, zeta + pi)`` and ``(beta + pi, -zeta)`` give the
    same ratio.
    """
    if np.tan(zeta) < 0:
        beta_rot, zeta = beta_rot + np.pi, -zeta
    zeta = (zeta % np.pi) - np.pi
    beta_rot = -((-beta_rot + np.pi) % (2 * np.pi) - np.pi)
    return float(beta_rot), float(zeta)


def solve_rotation(theta: float, phi: float, base_angle: float = BASE_ANGLE, tol: float = 1e-6) -> tuple[float, float]:
    """Rotation angles ``(beta_rot, zeta)`` mapping ``t0 = base_angle`` onto ``(theta, phi)``.

    Root finding on the real and imaginary parts of
    ``rotation_ratio(beta, zeta) - tan(theta) exp(i phi)`` from a grid of seeds.
    """
    target = np.tan(theta) * np.exp(1j * phi)

    def f(x):
        d = rotation_ratio(x[0], x[1], base_angle) - target
        return [d.real, d.imag]

    for b0 in np.linspace(-np.pi, np.pi, 9):
        for z0 in np.linspace(-np.pi + 0.1, -0.1, 8):
            sol = root(f, [b0, z0], method="hybr", options={"xtol": 1e-13})
            if sol.success and np.hypot(*f(sol.x)) < tol:
                b, z = canonical_rotation(*sol.x)
                if abs(rotation_ratio(b, z, base_angle) - target) < tol:
                    return b, z
    raise ValueError(f"no rotation reaches theta={theta}, phi={phi} from base angle {base_angle}")


# ---------------------------------------------------------------------------
# pipeline


@dataclass(frozen=True)
class PrepResult:
    target: PrepTarget
    state: DensityMatrix
    fidelity: float
    fidelity_first: float
    success_prob: float
    probabilities: tuple[float, float]
    alpha: float
    r: float
    beta_rot: float
    zeta: float
    first_state: DensityMatrix = field(repr=False, default=None)


def input_state(config: PrepConfig) -> DensityMatrix:
    return displaced_squeezed_state(config.alpha, config.r, config.cutoff).to_density()


def first_iteration(model: CavityModel, config: PrepConfig = PrepConfig(), outcome: str = "g") -> tuple[DensityMatrix, float]:
    return iterate(input_state(config), model.with_phase(config.first_phase), HADAMARD, outcome)


def prepare(target: PrepTarget | str, model: CavityModel, config: PrepConfig = PrepConfig()) -> PrepResult:
    """Run both iterations (outcomes ``g``, ``g``) and score the result."""
    if isinstance(target, str):
        target = get_target(target)
    beta_rot, zeta = solve_rotation(target.theta, target.phi, config.base_angle)
    rho1, p1 = first_iteration(model, config)
    rot = AtomicRotation(0.0, beta_rot, zeta)
    rho2, p2 = iterate(rho1, model.with_phase(config.second_phase), rot, "g")
    ideal = target.logical(config.cutoff).vector
    return PrepResult(
        target=target,
        state=rho2,
        fidelity=fidelity(rho2, ideal),
        fidelity_first=fidelity(rho1, ideal),
        success_prob=p1 * p2,
        probabilities=(p1, p2),
        alpha=config.alpha,
        r=config.r,
        beta_rot=beta_rot,
        zeta=zeta,
        first_state=rho1,
    )


def traced_fidelity(model: CavityModel, config: PrepConfig = PrepConfig()) -> tuple[float, float]:
    """Fidelities to ``|+>`` after each iteration when the atom is traced out."""
    plus = TARGETS["plus"]
    ideal = plus.logical(config.cutoff).vector
    joint, _ = iterate(input_state(config), model.with_phase(config.first_phase), HADAMARD, None)
    rho1 = partial_trace(joint, [0])
    beta_rot, zeta = solve_rotation(plus.theta, plus.phi, config.base_angle)
    joint2, _ = iterate(rho1, model.with_phase(config.second_phase), AtomicRotation(0.0, beta_rot, zeta), None)
    rho2 = partial_trace(joint2, [0])
    return fidelity(rho1, ideal), fidelity(rho2, ideal)


def measured_fidelity(model: CavityModel, config: PrepConfig = PrepConfig()) -> tuple[float, float]:
    """Counterpart of :func:`traced_fidelity` with both atoms measured in ``g``."""
    res = prepare("plus", model, config)
    return res.fidelity_first, res.fidelity


# ---------------------------------------------------------------------------
# Gaussian feed-forward comparison


@dataclass(frozen=True)
class FeedForwardScan:
    alphas: np.ndarray
    rs: np.ndarray
    gap: np.ndarray  # gap[i, j] for alphas[i], rs[j]
    odd_or_high: np.ndarray  # population outside {0, 2, 4} after D S

    @property
    def min_gap(self) -> float:
        return float(self.gap.min())


def gaussian_feed_forward_fidelity(rho: DensityMatrix, alpha: float, r: float, target) -> float:
    n = rho.spec.size
    op = displacement(alpha, n).matrix @ squeezing(r, n).matrix
    moved = DensityMatrix(op @ rho.matrix @ op.conj().T, rho.spec)
    return fidelity(moved, target)


def feed_forward_gap(
    model: CavityModel,
    alphas: Iterable[float] = np.round(np.arange(0.0, 1.01, 0.1), 10),
    rs: Iterable[float] = np.round(np.arange(-0.5, 0.51, 0.1), 10),
    config: PrepConfig = PrepConfig(),
) -> FeedForwardScan:
    """``F(+, rho1) - F(+, D(alpha)S(r) rho1 S^dag D^dag)`` over a grid.

    ``rho1`` is the state after the first iteration. Also returns the weight
    that the Gaussian operation moves outside Fock levels ``{0, 2, 4}``.
    """
    alphas = np.asarray(list(alphas), dtype=float)
    rs = np.asarray(list(rs), dtype=float)
    rho1, _ = first_iteration(model, config)
    plus = TARGETS["plus"].logical(config.cutoff).vector
    base = fidelity(rho1, plus)
    n = config.cutoff
    outside = np.ones(n, dtype=bool)
    outside[[0, 2, 4]] = False
    gap = np.zeros((len(alphas), len(rs)))
    leak = np.zeros_like(gap)
    for i, a in enumerate(alphas):
        d = displacement(a, n).matrix
        for j, r in enumerate(rs):
            op = d @ squeezing(r, n).matrix
            moved = op @ rho1.matrix @ op.conj().T
            gap[i, j] = base - float(np.vdot(plus.amplitudes, moved @ plus.amplitudes).real)
            leak[i, j] = float(np.real(np.diag(moved))[outside].sum())
    return FeedForwardScan(alphas, rs, gap, leak)
