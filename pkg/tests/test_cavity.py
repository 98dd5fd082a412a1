import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from binomial_mbqc.cavity import (
    HADAMARD,
    HADAMARD_BAR,
    AtomicRotation,
    CavityModel,
    cpf_channel,
    detuning_for_phase,
    ideal_cpf,
    iterate,
    reflection_amplitudes,
    z_measurement,
    z_measurement_kraus,
)
from binomial_mbqc.codes import logical_state, loss_code
from binomial_mbqc.fock import DensityMatrix, HilbertSpec, StateVector, atom_state, fock, tensor

models = st.builds(
    CavityModel,
    beta_eff=st.floats(0.5, 1.0),
    phi=st.floats(-np.pi, np.pi),
    amplitude=st.sampled_from(["sqrt", "linear"]),
    loss=st.sampled_from(["coherent", "which_path"]),
)


def rand_density(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m = g @ g.conj().T
    return m / np.trace(m)


# ---------------------------------------------------------------------------
# reflection amplitudes


def test_lossless_amplitudes():
    rg, rs = reflection_amplitudes(CavityModel(beta_eff=1.0, phi=np.pi / 2))
    assert np.isclose(rg, 1j) and np.isclose(rs, 1)


def test_sqrt_convention():
    rg, rs = reflection_amplitudes(CavityModel(beta_eff=0.99, amplitude="sqrt"))
    assert np.isclose(abs(rg) ** 2, 0.99) and np.isclose(abs(rs) ** 2, 0.99)


def test_linear_convention_is_default():
    rg, rs = reflection_amplitudes(CavityModel(beta_eff=0.99))
    assert np.isclose(abs(rg), 0.99) and np.isclose(abs(rs), 0.99)


def test_input_output_bare_cavity():
    # r = 1 - kappa_c (1/2)/((1/2)^2) = -1 for a lossless empty resonant cavity
    _, rs = reflection_amplitudes(CavityModel(C=0, beta_eff=1.0, variant="input_output"))
    assert np.isclose(rs, -1)


def test_input_output_strong_coupling_reflects():
    rg, _ = reflection_amplitudes(CavityModel(C=1e6, beta_eff=1.0, variant="input_output"))
    assert abs(rg - 1) < 1e-5


def test_detuning_for_phase():
    C, beta = 10.0, 0.95
    d = detuning_for_phase(np.pi / 2, C, beta)
    m = CavityModel(C=C, beta_eff=beta, variant="input_output", detuning=d)
    rg, rs = reflection_amplitudes(m)
    assert abs(np.angle(rg / rs) - np.pi / 2) < 1e-9
    assert abs(rg) <= 1 and abs(rs) <= 1


def test_model_validation():
    with pytest.raises(ValueError):
        CavityModel(beta_eff=0)
    with pytest.raises(ValueError):
        CavityModel(beta_eff=1.1)
    with pytest.raises(ValueError):
        CavityModel(C=-1)
    with pytest.raises(ValueError):
        CavityModel(variant="bogus")


# ---------------------------------------------------------------------------
# channel


def test_lossless_channel_is_cpf():
    for phi in (np.pi / 2, np.pi, 0.3):
        ch = cpf_channel(CavityModel(beta_eff=1.0, phi=phi), 6)
        assert len(ch.operators) == 1
        assert np.max(np.abs(ch.operators[0] - ideal_cpf(phi, 6))) < 1e-12
    ch = cpf_channel(CavityModel(beta_eff=1.0, phi=0.0), 6)
    assert np.allclose(ch.operators[0], np.eye(12))


def bs_loss_oracle(r: complex, n: int, phi_per_photon: float):
    """Photon populations and phases after mixing |n> with an empty environment mode."""
    d = n + 1
    a = np.diag(np.sqrt(np.arange(1, d)), 1)
    A, E = np.kron(a, np.eye(d)), np.kron(np.eye(d), a)
    theta = np.arccos(abs(r))
    u = expm(theta * (A.conj().T @ E - A @ E.conj().T))
    psi = np.zeros(d * d)
    psi[n * d] = 1
    out = (u @ psi).reshape(d, d)  # [system, environment]
    out = out * np.exp(1j * phi_per_photon * np.arange(d))[:, None]
    return np.einsum("ie,je->ij", out, out.conj())


def test_lossy_cpf_on_two_photons():
    m = CavityModel(beta_eff=0.99, phi=np.pi / 2, amplitude="sqrt")
    ch = cpf_channel(m, 3)
    rho = tensor(fock(2, 3), atom_state("g")).to_density().matrix
    out = ch.apply(rho, (0, 1), (3, 2)).reshape(3, 2, 3, 2)[:, 0, :, 0]
    oracle = bs_loss_oracle(np.sqrt(0.99), 2, np.pi / 2)
    assert np.max(np.abs(out - oracle)) < 1e-12
    q = 0.01
    assert np.allclose(np.diag(out).real, [q**2, 2 * q * (1 - q), (1 - q) ** 2])


@settings(max_examples=40, deadline=None)
@given(models, st.integers(3, 8))
def test_channel_completeness(model, cutoff):
    ch = cpf_channel(model, cutoff)
    assert ch.completeness_defect() < 1e-10


def test_input_output_completeness():
    m = CavityModel(C=5.0, beta_eff=0.9, variant="input_output", detuning=0.3)
    assert cpf_channel(m, 7).completeness_defect() < 1e-10


@settings(max_examples=30, deadline=None)
@given(models, st.integers(0, 2**31 - 1))
def test_channel_preserves_psd_and_trace(model, seed):
    rng = np.random.default_rng(seed)
    d = 5
    rho = rand_density(rng, 2 * d)
    out = cpf_channel(model, d).apply(rho, (0, 1), (d, 2))
    assert abs(np.trace(out) - 1) < 1e-10
    assert np.max(np.abs(out - out.conj().T)) < 1e-10
    assert np.linalg.eigvalsh(0.5 * (out + out.conj().T)).min() > -1e-10


@settings(max_examples=30, deadline=None)
@given(models, st.floats(-np.pi, np.pi), st.integers(0, 2**31 - 1))
def test_channel_commutes_with_dephasing(model, theta, seed):
    rng = np.random.default_rng(seed)
    d = 5
    rho = rand_density(rng, 2 * d)
    ph = np.kron(np.diag(np.exp(1j * theta * np.arange(d))), np.eye(2))
    ch = cpf_channel(model, d)
    a = ch.apply(ph @ rho @ ph.conj().T, (0, 1), (d, 2))
    b = ph @ ch.apply(rho, (0, 1), (d, 2)) @ ph.conj().T
    assert np.max(np.abs(a - b)) < 1e-10


# ---------------------------------------------------------------------------
# rotations and iterations


@settings(max_examples=50, deadline=None)
@given(st.floats(-7, 7), st.floats(-7, 7), st.floats(-7, 7))
def test_rotation_unitary(mu, b, z):
    r = AtomicRotation(mu, b, z).matrix
    assert np.max(np.abs(r.conj().T @ r - np.eye(2))) < 1e-12


def test_hadamard_forms():
    h = HADAMARD.matrix
    assert np.allclose(h, 1j / np.sqrt(2) * np.array([[1, 1], [1, -1]]))
    hb = HADAMARD_BAR.matrix
    assert np.allclose(hb, np.array([[1, -1], [1, 1]]) / np.sqrt(2))


def test_iterate_parity_branches():
    # hand calculation: after U(pi/2) and H, |0>|A+> -> i|0>|g> and |2>|A+> -> -i|2>|s>
    spec = HilbertSpec((6,))
    v = (fock(0, 6).amplitudes + fock(2, 6).amplitudes) / np.sqrt(2)
    rho = StateVector(v, spec).to_density()
    m = CavityModel(beta_eff=1.0, phi=np.pi / 2)
    g, pg = iterate(rho, m, HADAMARD, "g")
    s, ps = iterate(rho, m, HADAMARD, "s")
    assert abs(pg - 0.5) < 1e-12 and abs(ps - 0.5) < 1e-12
    assert np.allclose(g.matrix, fock(0, 6).to_density().matrix)
    assert np.allclose(s.matrix, fock(2, 6).to_density().matrix)


@settings(max_examples=20, deadline=None)
@given(models, st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2**31 - 1))
def test_iterate_probabilities_sum_to_one(model, b, z, seed):
    rng = np.random.default_rng(seed)
    rho = DensityMatrix(rand_density(rng, 6), HilbertSpec((6,)))
    rot = AtomicRotation(0.0, b, z)
    joint, p = iterate(rho, model, rot, None)
    assert p == 1.0 and abs(joint.trace - 1) < 1e-10
    total = 0.0
    for m in ("g", "s"):
        try:
            total += iterate(rho, model, rot, m)[1]
        except ZeroDivisionError:
            pass
    assert abs(total - 1) < 1e-10


def test_iterate_zero_probability():
    rho = fock(0, 6).to_density()
    with pytest.raises(ZeroDivisionError):
        iterate(rho, CavityModel(beta_eff=1.0, phi=np.pi / 2), HADAMARD, "s")
    with pytest.raises(ValueError):
        iterate(rho, CavityModel(), HADAMARD, "x")


def test_z_measurement_examples():
    c = loss_code(6)
    m = CavityModel(beta_eff=1.0)
    out = z_measurement(c.logical_zero.to_density(), m)
    assert abs(out["g"][1] - 1) < 1e-12 and out["s"][1] == 0
    out = z_measurement(c.logical_one.to_density(), m)
    assert abs(out["s"][1] - 1) < 1e-12 and out["g"][1] == 0
    out = z_measurement(logical_state(c, np.pi / 4).vector.to_density(), m)
    assert abs(out["g"][1] - 0.5) < 1e-12 and abs(out["s"][1] - 0.5) < 1e-12


def test_z_measurement_kraus_lossless():
    c = loss_code(6)
    b = c.basis
    ks = z_measurement_kraus(CavityModel(beta_eff=1.0), 6)
    Z = np.diag([1, -1])
    kg = b.conj().T @ ks["g"][0] @ b
    k_s = b.conj().T @ ks["s"][0] @ b
    # equal to (Z +- I)/2 up to one common global phase
    assert np.allclose(kg, 1j * (Z + np.eye(2)) / 2)
    assert np.allclose(k_s, 1j * (Z - np.eye(2)) / 2)
