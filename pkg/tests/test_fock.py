import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial.hermite import hermval
from math import factorial

from binomial_mbqc.fock import (
    DensityMatrix,
    HilbertSpec,
    Operator,
    StateVector,
    TruncationError,
    annihilation,
    atom_state,
    beamsplitter,
    displaced_squeezed_amplitudes,
    displaced_squeezed_state,
    fidelity,
    fock,
    number_phase,
    partial_trace,
    single_mode,
    tensor,
    truncation_deficit,
)


def hermite_amplitudes(alpha, r, nmax):
    """Independent closed form of <n|D(alpha)S(r)|0> with S(r) = exp[(r/2)(a^2 - a^dag^2)].

    For r < 0 use the squeeze angle pi with |r|.
    """
    rr, ph = (r, 1.0) if r >= 0 else (-r, -1.0)
    th = np.tanh(rr)
    gam = alpha * np.cosh(rr) + ph * np.conj(alpha) * np.sinh(rr)
    pref = np.exp(-0.5 * abs(alpha) ** 2 - 0.5 * ph * np.conj(alpha) ** 2 * th) / np.sqrt(np.cosh(rr))
    arg = gam / np.sqrt(ph * np.sinh(2 * rr) + 0j)
    out = []
    for n in range(nmax):
        coef = np.zeros(n + 1)
        coef[n] = 1
        out.append(pref * (0.5 * ph * th + 0j) ** (n / 2) * hermval(arg, coef) / np.sqrt(float(factorial(n))))
    return np.array(out)


def rand_density(rng, d, rank=None):
    rank = rank or d
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = g @ g.conj().T
    return m / np.trace(m)


# ---------------------------------------------------------------------------
# Gaussian states


def test_vacuum():
    psi = displaced_squeezed_state(0, 0, 16)
    assert np.allclose(psi.amplitudes, fock(0, 16).amplitudes)


def test_hermite_oracle_matches_truncated_state():
    psi = displaced_squeezed_state(0.5, 0.3, 24)
    oracle = hermite_amplitudes(0.5, 0.3, 24)
    assert np.max(np.abs(psi.amplitudes - oracle)) < 1e-8


@pytest.mark.parametrize("alpha,r", [(0.5, 0.3), (1.4, 0.25), (0.7 + 0.4j, 0.6), (1.1, -0.35), (-0.3j, -0.8)])
def test_recurrence_matches_hermite(alpha, r):
    assert np.max(np.abs(displaced_squeezed_amplitudes(alpha, r, 30) - hermite_amplitudes(alpha, r, 30))) < 1e-10


def test_default_input_low_fock_weight():
    c = displaced_squeezed_state(1.4, 0.25, 16).amplitudes
    assert np.sum(np.abs(c[:6]) ** 2) >= 1 - 1e-3
    assert truncation_deficit(1.4, 0.25, 16) < 1e-4


def test_truncation_error():
    with pytest.raises(TruncationError):
        displaced_squeezed_state(3.0, 0.0, 8)
    with pytest.raises(ValueError):
        displaced_squeezed_state(1.0, 0.0, 6)
    with pytest.raises(ValueError):
        displaced_squeezed_state(3.5, 0.0, 16)


@settings(max_examples=30, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5), st.floats(-0.7, 0.7))
def test_displaced_squeezed_normalized(ar, ai, r):
    alpha = complex(ar, ai)
    psi = displaced_squeezed_state(alpha, r, 30)
    assert abs(psi.norm - 1) < 1e-12


# ---------------------------------------------------------------------------
# operators


def test_number_phase():
    assert np.allclose(number_phase(0, 6).matrix, np.eye(6))
    out = number_phase(np.pi / 2, 6).matrix @ fock(2, 6).amplitudes
    assert np.allclose(out, -fock(2, 6).amplitudes)
    d = np.diag(number_phase(np.pi / 4, 6).matrix)
    assert np.allclose(d[:3], [1, np.exp(1j * np.pi / 4), 1j])


def test_beamsplitter_vacuum():
    u = beamsplitter(2).matrix
    assert np.allclose(u[:, 0], np.eye(4)[0])


def _bs_sector(n):
    """exp(i pi/4 G) on the n-photon sector, G = a^dag b + a b^dag built by hand."""
    from scipy.linalg import expm

    g = np.zeros((n + 1, n + 1))
    # basis |k, n-k>; a^dag b |k, n-k> = sqrt((k+1)(n-k)) |k+1, n-k-1>
    for k in range(n):
        g[k + 1, k] = np.sqrt((k + 1) * (n - k))
    g = g + g.T
    return expm(1j * np.pi / 4 * g)


def test_beamsplitter_single_photon():
    d = 4
    u = beamsplitter(d).matrix
    out = u[:, 1 * d + 0]
    expect = np.zeros(d * d, dtype=complex)
    expect[1 * d + 0] = 1 / np.sqrt(2)
    expect[0 * d + 1] = 1j / np.sqrt(2)
    assert np.allclose(out, expect, atol=1e-12)
    sector = _bs_sector(1)
    assert np.allclose(sector[:, 1], [1j / np.sqrt(2), 1 / np.sqrt(2)])


def test_beamsplitter_hong_ou_mandel():
    d = 4
    u = beamsplitter(d).matrix
    out = u[:, 1 * d + 1]
    assert abs(out[1 * d + 1]) < 1e-12
    sector = _bs_sector(2)
    assert np.allclose([out[k * d + 2 - k] for k in range(3)], sector[:, 1], atol=1e-12)


def test_beamsplitter_unitary_on_sectors():
    d = 6
    u = beamsplitter(d).matrix
    idx = [i * d + j for i in range(d) for j in range(d) if i + j < d]
    blk = u[np.ix_(idx, idx)]
    assert np.max(np.abs(blk.conj().T @ blk - np.eye(len(idx)))) < 1e-9


# ---------------------------------------------------------------------------
# composition


def test_tensor_examples():
    i2 = Operator(np.eye(3), single_mode(3))
    assert np.allclose(tensor(i2, i2).matrix, np.eye(9))
    v = tensor(fock(0, 3), atom_state("g"))
    assert np.argmax(np.abs(v.amplitudes)) == 0
    assert v.spec == HilbertSpec((3,), True)
    z = Operator(np.diag([1.0, -1.0]), single_mode(2))
    one = Operator(np.eye(2), single_mode(2))
    zi, iz = tensor(z, one).matrix, tensor(one, z).matrix
    perm = [0, 2, 1, 3]
    assert not np.allclose(zi, iz)
    assert np.allclose(zi[np.ix_(perm, perm)], iz)


def test_tensor_rejects_bad_order():
    with pytest.raises(ValueError):
        tensor(atom_state("g"), fock(0, 3))
    with pytest.raises(TypeError):
        tensor(fock(0, 3), fock(0, 3).to_density())


def test_partial_trace_bell_like():
    v = np.zeros(10, dtype=complex)
    v[0 * 2 + 0] = v[2 * 2 + 1] = 1 / np.sqrt(2)
    rho = StateVector(v, HilbertSpec((5,), True)).to_density()
    light = partial_trace(rho, [0])
    assert np.allclose(light.matrix, np.diag([0.5, 0, 0.5, 0, 0]))
    with pytest.raises(ValueError):
        partial_trace(rho, [])
    with pytest.raises(IndexError):
        partial_trace(rho, [3])


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**31 - 1))
def test_tensor_partial_trace_round_trip(da, db, seed):
    rng = np.random.default_rng(seed)
    ra = DensityMatrix(rand_density(rng, da), single_mode(da))
    rb = DensityMatrix(rand_density(rng, db), single_mode(db))
    joint = tensor(ra, rb)
    assert np.max(np.abs(partial_trace(joint, [0]).matrix - ra.matrix)) < 1e-10
    assert np.max(np.abs(partial_trace(joint, [1]).matrix - rb.matrix)) < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_partial_trace_preserves_trace_and_psd(seed):
    rng = np.random.default_rng(seed)
    rho = DensityMatrix(rand_density(rng, 12, rank=3), HilbertSpec((3, 2, 2)))
    for keep in ([0], [1, 2], [0, 2]):
        red = partial_trace(rho, keep)
        assert abs(red.trace - 1) < 1e-12
        assert red.eigenvalues().min() > -1e-12


# ---------------------------------------------------------------------------
# fidelity


def test_fidelity_trivial():
    rng = np.random.default_rng(1)
    rho = DensityMatrix(rand_density(rng, 4), single_mode(4))
    assert abs(fidelity(rho, rho) - 1) < 1e-9
    assert fidelity(fock(0, 4), fock(1, 4)) == 0
    assert fidelity(fock(0, 4).to_density(), fock(1, 4).to_density()) < 1e-12


def test_fidelity_mixed_vs_pure_oracle():
    from scipy.linalg import sqrtm

    rng = np.random.default_rng(7)
    rho = rand_density(rng, 5)
    v = rng.normal(size=5) + 1j * rng.normal(size=5)
    v /= np.linalg.norm(v)
    sig = np.outer(v, v.conj())
    s = sqrtm(rho)
    oracle = np.real(np.trace(sqrtm(s @ sig @ s))) ** 2
    spec = single_mode(5)
    assert abs(fidelity(DensityMatrix(rho, spec), DensityMatrix(sig, spec)) - oracle) < 1e-8
    assert abs(fidelity(DensityMatrix(rho, spec), StateVector(v, spec)) - oracle) < 1e-8


def test_fidelity_rejects_non_psd():
    spec = single_mode(2)
    bad = DensityMatrix(np.diag([1.2, -0.2]), spec)
    with pytest.raises(ValueError):
        fidelity(bad, DensityMatrix(np.eye(2) / 2, spec))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_fidelity_symmetric_and_monotone(seed):
    rng = np.random.default_rng(seed)
    spec = HilbertSpec((3, 3))
    a = DensityMatrix(rand_density(rng, 9), spec)
    b = DensityMatrix(rand_density(rng, 9, rank=2), spec)
    f = fidelity(a, b)
    assert 0 <= f <= 1
    assert abs(f - fidelity(b, a)) < 1e-8
    assert fidelity(partial_trace(a, [0]), partial_trace(b, [0])) >= f - 1e-9


def test_density_matrix_checks():
    spec = single_mode(2)
    with pytest.raises(ValueError):
        DensityMatrix(np.eye(3), spec)
    rho = DensityMatrix(np.array([[0.5, 0.1j], [-0.1j, 0.5]]), spec)
    rho.check()
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[0.5, 1.0], [0.0, 0.5]]), spec).check()


def test_annihilation():
    a = annihilation(4)
    assert np.allclose(a @ fock(3, 4).amplitudes, np.sqrt(3) * fock(2, 4).amplitudes)
