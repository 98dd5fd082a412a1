import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from math import comb

from binomial_mbqc.codes import (
    error_operators,
    kl_check,
    logical_pauli,
    logical_state,
    loss_code,
    make_code,
    make_two_mode_dephasing_code,
)
from binomial_mbqc.fock import fock, number_phase


def basis(cutoff, **amps):
    v = np.zeros(cutoff, dtype=complex)
    for k, a in amps.items():
        v[int(k[1:])] = a
    return v


def test_loss_code_literals():
    c = make_code(1, 1, 6)
    assert np.allclose(c.logical_zero.amplitudes, basis(6, n0=1 / np.sqrt(2), n4=1 / np.sqrt(2)))
    assert np.allclose(c.logical_one.amplitudes, basis(6, n2=1))


def test_dephasing_code_literals():
    c = make_code(2, 1, 8)
    assert np.allclose(c.logical_zero.amplitudes, basis(8, n0=0.5, n4=np.sqrt(3) / 2))
    assert np.allclose(c.logical_one.amplitudes, basis(8, n2=np.sqrt(3) / 2, n6=0.5))


def test_spacing_one_code():
    # direct evaluation of the binomial sum: sqrt(C(2, p)/2) on |p>
    c = make_code(1, 0, 4)
    assert np.allclose(c.logical_zero.amplitudes, basis(4, n0=1 / np.sqrt(2), n2=1 / np.sqrt(2)))
    assert np.allclose(c.logical_one.amplitudes, basis(4, n1=1))


def test_cutoff_too_small():
    with pytest.raises(ValueError):
        make_code(1, 1, 4)
    with pytest.raises(ValueError):
        make_two_mode_dephasing_code(4)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 4), st.integers(0, 2), st.integers(0, 4))
def test_codes_orthonormal(N, S, extra):
    cutoff = (N + 1) * (S + 1) + 1 + extra
    c = make_code(N, S, cutoff)
    z, o = c.logical_zero.amplitudes, c.logical_one.amplitudes
    assert abs(np.vdot(z, o)) < 1e-12
    assert abs(np.linalg.norm(z) - 1) < 1e-12 and abs(np.linalg.norm(o) - 1) < 1e-12
    support = np.nonzero(np.abs(z) + np.abs(o))[0]
    assert all(n % (S + 1) == 0 for n in support)
    # direct binomial-sum oracle
    for p in range(N + 2):
        amp = np.sqrt(comb(N + 1, p) / 2**N)
        vec = z if p % 2 == 0 else o
        assert abs(vec[p * (S + 1)] - amp) < 1e-12


def test_two_mode_code():
    c = make_two_mode_dephasing_code(6)
    z, o = c.logical_zero.amplitudes, c.logical_one.amplitudes
    assert abs(np.vdot(z, o)) < 1e-15
    zz = z.reshape(6, 6)
    assert np.isclose(zz[0, 4], 1 / np.sqrt(2)) and np.isclose(zz[4, 0], 1 / np.sqrt(2))
    assert np.isclose(o.reshape(6, 6)[2, 2], 1)
    n_tot = np.add.outer(np.arange(6), np.arange(6)).ravel()
    for v in (z, o):
        assert np.all(n_tot[np.abs(v) > 0] % 2 == 0)


def test_paulis():
    c = loss_code(6)
    X, Y, Z = (logical_pauli(c, k).matrix for k in "XYZ")
    P = c.projector
    z0 = c.logical_zero.amplitudes
    plus = logical_state(c, np.pi / 4, 0).vector.amplitudes
    assert np.allclose(Z @ z0, z0)
    assert np.allclose(X @ plus, plus)
    assert np.max(np.abs(X @ X - P)) < 1e-12
    assert np.max(np.abs(Z @ Z - P)) < 1e-12
    assert np.max(np.abs(X @ Z + Z @ X)) < 1e-12
    assert np.allclose(Y, 1j * X @ Z)
    # outside the code space every Pauli vanishes
    assert np.allclose(X @ fock(1, 6).amplitudes, 0)
    with pytest.raises(ValueError):
        logical_pauli(c, "W")


def test_number_phase_is_logical_z():
    c = loss_code(6)
    b = c.basis
    restricted = b.conj().T @ number_phase(np.pi / 2, 6).matrix @ b
    assert np.allclose(restricted, np.diag([1, -1]))


def test_kl_loss_code():
    c = loss_code(6)
    rep = kl_check(c, error_operators(6, ["I", "a"]))
    assert rep.passes() and rep.max_residual < 1e-10
    assert np.allclose(rep.alpha, np.diag([1, 2]))


def test_kl_dephasing_code():
    c = make_code(2, 1, 8)
    assert kl_check(c, error_operators(8, ["I", "a", "n"])).max_residual < 1e-10


def test_kl_double_loss_fails():
    c = loss_code(6)
    rep = kl_check(c, error_operators(6, ["I", "a", "a2"]))
    assert rep.max_residual > 0.1
    # a^2|2> = sqrt2 |0> overlaps |0~>
    k = rep.labels.index("a2")
    i = rep.labels.index("I")
    assert abs(rep.off_logical[k, i] - 1.0) < 1e-12 or abs(rep.off_logical[i, k] - 1.0) < 1e-12


def test_kl_with_creation_reported():
    # not claimed for the loss code: (a^dag)^2 |2> = sqrt(12)|4> overlaps |0~>
    rep = kl_check(loss_code(6), error_operators(6, ["I", "a", "ad"]))
    k, l = rep.labels.index("a"), rep.labels.index("ad")
    assert abs(rep.off_logical[k, l] - np.sqrt(6)) < 1e-12


def test_kl_sequence_labels():
    rep = kl_check(loss_code(6), [np.eye(6)])
    assert rep.labels == ("E0",)
