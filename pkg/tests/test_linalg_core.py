import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holonomy.config import DEFAULT_TOL
from holonomy.errors import PreconditionError
from holonomy.curves import PAULI
from holonomy.linalg_core import (
    dagger,
    eig_hermitian,
    hs_inner,
    matrix_exp,
    metric_G,
    polar_unitary,
    random_density,
    random_hermitian,
    random_skew_hermitian,
    random_unitary,
    solve_sylvester_pos,
    sqrtm_psd,
    symplectic_Omega,
)

SX, SY, SZ = PAULI
seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 6)


def test_hs_inner_examples(rng):
    assert hs_inner(np.eye(2), np.eye(2)) == 2
    assert hs_inner(SX, SY) == 0
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    loop = sum(np.conj(a[i, j]) * b[i, j] for i in range(3) for j in range(3))
    assert hs_inner(a, b) == pytest.approx(loop, abs=1e-13)


def test_dimension_mismatch_rejected():
    with pytest.raises(PreconditionError):
        hs_inner(np.eye(2), np.eye(3))
    with pytest.raises(PreconditionError):
        metric_G(np.eye(2), np.eye(3))


def test_metric_and_symplectic_examples(rng):
    assert metric_G(np.eye(2), np.eye(2)) == pytest.approx(4.0)
    x = random_hermitian(3, rng) + random_skew_hermitian(3, rng)
    assert metric_G(x, 1j * x, hbar=2.5) == pytest.approx(0.0, abs=1e-12)
    assert symplectic_Omega(x, x) == pytest.approx(0.0, abs=1e-12)
    assert symplectic_Omega(np.eye(2), 1j * np.eye(2)) == pytest.approx(4.0)


@given(seeds, dims, st.floats(0.1, 3.0))
def test_metric_symplectic_trace_oracles(seed, n, hbar):
    r = np.random.default_rng(seed)
    x = r.normal(size=(n, n)) + 1j * r.normal(size=(n, n))
    y = r.normal(size=(n, n)) + 1j * r.normal(size=(n, n))
    tr = np.trace(dagger(x) @ y)
    assert metric_G(x, y, hbar) == pytest.approx(2 * hbar * tr.real, rel=1e-12, abs=1e-12)
    assert symplectic_Omega(x, y, hbar) == pytest.approx(2 * hbar * tr.imag, rel=1e-12, abs=1e-12)
    assert symplectic_Omega(x, y, hbar) == pytest.approx(-symplectic_Omega(y, x, hbar), abs=1e-12)
    assert metric_G(x, y, hbar) == pytest.approx(metric_G(y, x, hbar), abs=1e-12)
    assert metric_G(x, x, hbar) > 0


def test_eig_examples():
    e = eig_hermitian(np.diag([0.7, 0.3]))
    assert np.allclose(e.values, [0.3, 0.7])
    assert e.clusters == ((0,), (1,))
    e = eig_hermitian(np.eye(2) / 2)
    assert np.allclose(e.values, [0.5, 0.5])
    assert e.clusters == ((0, 1),)
    n = np.array([1.0, 2.0, 2.0]) / 3
    rho = 0.5 * (np.eye(2) + 0.5 * (n[0] * SX + n[1] * SY + n[2] * SZ))
    assert np.allclose(eig_hermitian(rho).values, [0.25, 0.75])


def test_eig_rejects_non_hermitian():
    with pytest.raises(PreconditionError):
        eig_hermitian(np.array([[1.0, 1.0], [0.0, 1.0]]))


@given(seeds, st.integers(1, 8))
def test_eig_reconstruction(seed, n):
    m = random_hermitian(n, np.random.default_rng(seed))
    e = eig_hermitian(m)
    assert np.linalg.norm(e.matrix() - m) <= 1e-10 * np.linalg.norm(m)
    assert np.linalg.norm(dagger(e.vectors) @ e.vectors - np.eye(n)) <= DEFAULT_TOL.orthonormality_tol


def test_cluster_threshold_scales_with_spectrum():
    small = eig_hermitian(np.diag([1e-3, 1e-3 + 1e-12, 0.5]))
    assert small.clusters == ((0, 1), (2,))
    apart = eig_hermitian(np.diag([0.2, 0.2 + 1e-6, 0.6]))
    assert len(apart.clusters) == 3


def test_matrix_exp_examples(rng):
    assert np.allclose(matrix_exp(np.zeros((3, 3))), np.eye(3))
    assert np.allclose(matrix_exp(1j * np.pi * SZ / 2), np.diag([1j, -1j]), atol=1e-14)


@given(seeds, dims)
def test_matrix_exp_unitary(seed, n):
    e = matrix_exp(random_skew_hermitian(n, np.random.default_rng(seed)))
    assert np.linalg.norm(dagger(e) @ e - np.eye(n)) < 1e-12


def test_sylvester_examples():
    assert np.allclose(solve_sylvester_pos(np.eye(2) / 2, np.eye(2)), np.eye(2))
    assert np.allclose(solve_sylvester_pos(np.diag([0.6, 0.4]), np.zeros((2, 2))), 0)
    with pytest.raises(PreconditionError):
        solve_sylvester_pos(np.diag([1.0, 0.0]), np.eye(2))


@given(seeds, st.integers(1, 6))
def test_sylvester_residual(seed, n):
    r = np.random.default_rng(seed)
    rho = random_density(n, r, min_eig=0.01)
    rhs = random_hermitian(n, r)
    g = solve_sylvester_pos(rho, rhs)
    assert np.linalg.norm(g - dagger(g)) == 0 or np.linalg.norm(g - dagger(g)) < 1e-14
    assert np.linalg.norm(g @ rho + rho @ g - rhs) <= 1e-10 * np.linalg.norm(rhs)


def test_sqrt_and_polar(rng):
    rho = random_density(3, rng)
    s = sqrtm_psd(rho)
    assert np.allclose(s @ s, rho, atol=1e-13)
    assert np.allclose(s, dagger(s))
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    q = polar_unitary(m)
    assert np.allclose(dagger(q) @ q, np.eye(3), atol=1e-13)
    h = dagger(q) @ m
    assert np.allclose(h, dagger(h), atol=1e-12)
    assert np.all(np.linalg.eigvalsh((h + dagger(h)) / 2) > 0)


def test_random_unitary_is_unitary(rng):
    u = random_unitary(4, rng)
    assert np.allclose(dagger(u) @ u, np.eye(4), atol=1e-13)
