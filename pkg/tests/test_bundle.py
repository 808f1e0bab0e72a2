import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holonomy.bundle import (
    DensityOperator,
    Purification,
    Subspace,
    TangentVector,
    expected_dimension,
    isotropy_algebra_basis,
    kernel_dJ_project,
    level_q,
    mech_connection,
    momentum,
    project,
    realify,
    subspace_basis,
    subspace_rank,
    uhlmann_vertical_project,
)
from holonomy.curves import PAULI
from holonomy.errors import PreconditionError
from holonomy.linalg_core import (
    dagger,
    eig_hermitian,
    metric_G,
    random_hermitian,
    random_skew_hermitian,
    random_unitary,
)
from holonomy.randomized import random_level_tangent, random_purification

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(2, 4)


def sphere_tangent(psi, rng):
    x = rng.normal(size=psi.shape) + 1j * rng.normal(size=psi.shape)
    return x - psi * np.vdot(psi, x).real


def spec_of(psi):
    return eig_hermitian(dagger(psi) @ psi)


# -- domain types ---------------------------------------------------------

def test_density_operator_validation():
    DensityOperator(np.diag([0.7, 0.3]))
    with pytest.raises(PreconditionError, match="trace"):
        DensityOperator(np.diag([0.7, 0.4]))
    with pytest.raises(PreconditionError, match="invertible"):
        DensityOperator(np.diag([1.0, 0.0]))
    with pytest.raises(PreconditionError):
        DensityOperator(np.array([[0.5, 0.1], [0.2, 0.5]]))


def test_purification_validation():
    Purification(np.diag(np.sqrt([0.7, 0.3])))
    with pytest.raises(PreconditionError, match="norm"):
        Purification(np.eye(2))
    with pytest.raises(PreconditionError, match="invertible"):
        Purification(np.diag([1.0, 0.0]))


def test_tangent_vector_must_be_tangent_to_sphere():
    psi = Purification(np.diag(np.sqrt([0.7, 0.3])))
    with pytest.raises(PreconditionError):
        TangentVector(psi, psi.mat)
    TangentVector(psi, 1j * psi.mat)


# -- projection and momentum ------------------------------------------------

def test_project_examples(rng):
    psi = Purification(np.diag(np.sqrt([0.7, 0.3])))
    assert np.allclose(project(psi).mat, np.diag([0.7, 0.3]))
    u = random_unitary(2, rng)
    assert np.allclose(project(psi.right(u)).mat, project(psi).mat, atol=1e-14)
    m = random_purification(3, rng)
    assert np.allclose(project(Purification(m)).mat, m @ m.conj().T, atol=1e-15)


@given(seeds, dims)
def test_momentum_laws(seed, n):
    r = np.random.default_rng(seed)
    psi = Purification(random_purification(n, r))
    u = random_unitary(n, r)
    j = momentum(psi).mat
    assert np.allclose(momentum(psi.left(u)).mat, j, atol=1e-13)
    assert np.allclose(momentum(psi.right(u)).mat, dagger(u) @ j @ u, atol=1e-13)


def test_momentum_example_and_pairing():
    psi = Purification(np.diag(np.sqrt([0.6, 0.4])))
    mv = momentum(psi)
    assert np.allclose(mv.mat, np.diag([0.6, 0.4]))
    xi = 1j * np.diag([1.0, 0.0])
    assert mv.pairing(xi) == pytest.approx(-0.6)


# -- Uhlmann splitting ------------------------------------------------------

def test_vertical_project_examples(rng):
    psi = Purification(random_purification(3, rng))
    xi = random_skew_hermitian(3, rng)
    x = TangentVector(psi, psi.mat @ xi)
    assert np.allclose(uhlmann_vertical_project(x).dir, x.dir, atol=1e-12)
    g = random_hermitian(3, rng)
    g = g - np.trace(g @ psi.mat @ dagger(psi.mat)).real * np.eye(3)
    h = TangentVector(psi, g @ psi.mat)
    assert np.linalg.norm(uhlmann_vertical_project(h).dir) < 1e-12


@given(seeds, dims)
def test_vertical_projector_properties(seed, n):
    r = np.random.default_rng(seed)
    psi = Purification(random_purification(n, r))
    x = TangentVector(psi, sphere_tangent(psi.mat, r))
    p = uhlmann_vertical_project(x)
    pp = uhlmann_vertical_project(p)
    assert np.allclose(pp.dir, p.dir, atol=1e-11)
    res = x.dir - p.dir
    assert abs(metric_G(p.dir, res)) < 1e-11
    m = dagger(res) @ psi.mat
    assert np.linalg.norm(m - dagger(m)) < 1e-11


# -- Ker dJ -----------------------------------------------------------------

def test_kernel_projection_examples(rng):
    psi = Purification(random_purification(3, rng))
    k = random_skew_hermitian(3, rng)
    x = TangentVector(psi, k @ psi.mat)
    assert np.allclose(kernel_dJ_project(x).dir, x.dir, atol=1e-12)
    g = random_hermitian(3, rng)
    g = g - np.trace(g @ psi.mat @ dagger(psi.mat)).real * np.eye(3)
    y = TangentVector(psi, g @ psi.mat)
    assert np.linalg.norm(kernel_dJ_project(y).dir) < np.linalg.norm(y.dir)


@given(seeds, dims)
def test_kernel_projection_oracle(seed, n):
    r = np.random.default_rng(seed)
    psi = Purification(random_purification(n, r))
    x = TangentVector(psi, sphere_tangent(psi.mat, r))
    out = kernel_dJ_project(x).dir
    eq = dagger(out) @ psi.mat + dagger(psi.mat) @ out
    assert np.linalg.norm(eq) < 1e-10
    res = x.dir - out
    for e in subspace_basis(psi, Subspace.TangentS_psi):
        assert abs(metric_G(res, e)) < 1e-10


# -- mechanical connection --------------------------------------------------

def test_connection_reproduces_fundamental_vectors(rng):
    for n in (2, 3, 4):
        psi = Purification(random_purification(n, rng))
        spec = spec_of(psi.mat)
        basis = isotropy_algebra_basis(spec)
        coeffs = rng.normal(size=len(basis))
        eta = sum(c * b for c, b in zip(coeffs, basis))
        a = mech_connection(psi, TangentVector(psi, psi.mat @ eta), spec)
        assert np.allclose(a, eta, atol=1e-11)


def test_connection_vanishes_on_horizontal_vectors(rng):
    psi = Purification(random_purification(3, rng))
    spec = spec_of(psi.mat)
    x = TangentVector(psi, random_level_tangent(psi.mat, rng))
    a = mech_connection(psi, x, spec)
    h = TangentVector(psi, x.dir - psi.mat @ a)
    assert np.linalg.norm(mech_connection(psi, h, spec)) < 1e-12


def test_connection_easy_example():
    omega, theta, p1 = 1.3, np.pi / 3, 0.8
    phi = Purification(np.diag(np.sqrt([p1, 1 - p1])).astype(complex))
    h = -omega * (np.sin(theta) * PAULI[0] + np.cos(theta) * PAULI[2])
    a = mech_connection(phi, TangentVector(phi, -1j * h @ phi.mat), spec_of(phi.mat))
    c = omega * np.cos(theta)
    assert np.allclose(a, np.diag([1j * c, -1j * c]), atol=1e-14)


def test_connection_preconditions(rng):
    psi = Purification(random_purification(3, rng))
    spec = spec_of(psi.mat)
    other = Purification(random_purification(3, rng))
    x = TangentVector(other, random_level_tangent(other.mat, rng))
    with pytest.raises(PreconditionError, match="level set"):
        mech_connection(other, x, spec)
    g = random_hermitian(3, rng)
    g = g - np.trace(g @ psi.mat @ dagger(psi.mat)).real * np.eye(3)
    with pytest.raises(PreconditionError, match="tangent"):
        mech_connection(psi, TangentVector(psi, g @ psi.mat), spec)


@given(seeds, dims)
def test_connection_gauge_covariance(seed, n):
    r = np.random.default_rng(seed)
    phi = Purification(random_purification(n, r))
    x = TangentVector(phi, random_level_tangent(phi.mat, r))
    u = random_unitary(n, r)
    a = mech_connection(phi, x, spec_of(phi.mat))
    pu = phi.right(u)
    au = mech_connection(pu, TangentVector(pu, x.dir @ u), spec_of(pu.mat))
    assert np.linalg.norm(au - dagger(u) @ a @ u) < 1e-10


@given(seeds, dims)
def test_connection_values_in_isotropy_algebra(seed, n):
    r = np.random.default_rng(seed)
    phi = Purification(random_purification(n, r))
    spec = spec_of(phi.mat)
    a = mech_connection(phi, TangentVector(phi, random_level_tangent(phi.mat, r)), spec)
    j = spec.matrix()
    assert np.linalg.norm(a + dagger(a)) < 1e-10
    assert np.linalg.norm(a @ j - j @ a) < 1e-10


def test_uhlmann_residual_along_unitary_orbit_is_bounded_below(rng):
    # psi(t) = U(t) psi: velocity xi psi; Uhlmann defect ||psi^dag xi psi - (xi psi)^dag psi|| = 2||psi^dag xi psi||
    for _ in range(20):
        psi = random_purification(3, rng)
        xi = random_skew_hermitian(3, rng)
        x = xi @ psi
        defect = np.linalg.norm(dagger(x) @ psi - dagger(psi) @ x)
        smin = np.linalg.svd(psi, compute_uv=False)[-1]
        assert defect >= 2 * smin**2 * np.linalg.norm(xi) * (1 - 1e-12)
        assert defect > 0


# -- subspaces --------------------------------------------------------------

def dims_of(psi):
    return {w: len(subspace_basis(Purification(psi), w)) for w in Subspace}


def test_dimensions_nondegenerate_qubit():
    d = dims_of(np.diag(np.sqrt([0.7, 0.3])).astype(complex))
    assert d[Subspace.UhlmannVertical] == 4
    assert d[Subspace.MechHorizontal] == 2
    assert d[Subspace.K_perp] == 1
    assert d[Subspace.L] == 3
    assert d[Subspace.TangentSphere] == 7


def test_dimensions_maximally_mixed_qubit():
    d = dims_of(np.eye(2, dtype=complex) / np.sqrt(2))
    assert d[Subspace.MechHorizontal] == 0
    assert d[Subspace.K_perp] == 3


def test_dimension_random_qutrit(rng):
    psi = random_purification(3, rng, degenerate=False)
    assert len(subspace_basis(Purification(psi), Subspace.L)) == 8


@given(seeds, dims)
def test_subspace_bases_are_G_orthonormal_with_counted_ranks(seed, n):
    r = np.random.default_rng(seed)
    psi = Purification(random_purification(n, r))
    q = level_q(spec_of(psi.mat))
    for which in Subspace:
        basis = subspace_basis(psi, which)
        assert len(basis) == expected_dimension(which, n, q)
        if basis:
            gram = np.array([[metric_G(a, b) for b in basis] for a in basis])
            assert np.allclose(gram, np.eye(len(basis)), atol=1e-10)


def test_rank_mismatch_raises():
    psi = Purification(np.diag(np.sqrt([0.5 + 1e-7, 0.5 - 1e-7])).astype(complex))
    # clustering with a loose tolerance merges values that the rank computation separates
    loose = eig_hermitian(dagger(psi.mat) @ psi.mat, degeneracy_tol=1e-3)
    with pytest.raises(PreconditionError, match="rank"):
        subspace_basis(psi, Subspace.MechHorizontal, spectrum=loose)
    assert subspace_rank(psi, Subspace.UhlmannVertical) == 4


def test_decomposition_relations(rng):
    for n in (2, 3, 4):
        psi = Purification(random_purification(n, rng))
        b = {w: np.column_stack([realify(e) for e in subspace_basis(psi, w)]) if subspace_basis(psi, w)
             else np.zeros((2 * n * n, 0)) for w in Subspace}
        # L = H S(psi) + K is an orthogonal sum; the tangent space of the sphere is V + L, direct
        assert np.linalg.norm(b[Subspace.MechHorizontal].T @ b[Subspace.K_perp]) < 1e-10
        both = np.column_stack([b[Subspace.UhlmannVertical], b[Subspace.L]])
        assert np.linalg.matrix_rank(both, tol=1e-9) == 2 * n * n - 1


def test_sum_decomposition_of_T_Q(rng):
    for n in (2, 3, 4):
        psi = Purification(random_purification(n, rng))
        x = psi.mat @ random_skew_hermitian(n, rng) + random_skew_hermitian(n, rng) @ psi.mat
        tq = np.column_stack([realify(e) for e in subspace_basis(psi, Subspace.TangentQ)])
        v = realify(x)
        q, _ = np.linalg.qr(tq)
        assert np.linalg.norm(v - q @ (q.T @ v)) < 1e-9 * max(1.0, np.linalg.norm(v))
