import numpy as np
import pytest

from secbeam.errors import DataError, DimensionError, SingularityError
from secbeam.linalg import (
    herm_basis,
    herm_coords,
    herm_from_coords,
    hermitian_eig,
    hermitize,
    logdet_hpd,
    min_rayleigh_vec,
    solve_hpd,
    trace_inner,
)
from tutil import rand_herm, rand_hpd


def test_eig_identity():
    out = hermitian_eig(np.eye(3))
    assert np.allclose(out.eigenvalues, [1.0, 1.0, 1.0])
    u = out.eigenvectors
    assert np.linalg.norm(u.conj().T @ u - np.eye(3)) <= 1e-12


def test_eig_diagonal_sorted():
    out = hermitian_eig(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(out.eigenvalues, [1.0, 2.0, 3.0])
    # columns are the standard basis up to permutation and phase
    perm = np.abs(out.eigenvectors)
    assert np.allclose(np.sort(perm, axis=0)[-1], 1.0)


def test_eig_reconstruction_random():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a = rand_herm(rng, 8)
        out = hermitian_eig(a)
        u, w = out.eigenvectors, out.eigenvalues
        assert np.all(np.diff(w) >= 0)
        assert np.all(np.isreal(w))
        rec = np.linalg.norm(a - (u * w) @ u.conj().T)
        assert rec <= 1e-10 * max(1.0, np.linalg.norm(a))
        assert np.linalg.norm(u.conj().T @ u - np.eye(8)) <= 1e-10


def test_eig_errors():
    with pytest.raises(DimensionError):
        hermitian_eig(np.ones((2, 3)))
    bad = np.eye(2) * np.nan
    with pytest.raises(DataError):
        hermitian_eig(bad)


def test_solve_hpd_identity_and_scalar():
    b = np.arange(6, dtype=complex).reshape(3, 2)
    assert np.allclose(solve_hpd(np.eye(3), b), b)
    assert np.allclose(solve_hpd(2.0 * np.eye(3), np.eye(3)), 0.5 * np.eye(3))


def test_solve_hpd_residual_random():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a = rand_hpd(rng, 6)
        b = rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3))
        x = solve_hpd(a, b)
        res = np.linalg.norm(a @ x - b)
        assert res <= 1e-10 * max(1.0, np.linalg.norm(b)) * np.linalg.cond(a)


def test_solve_hpd_rejects_indefinite():
    with pytest.raises(SingularityError):
        solve_hpd(np.diag([1.0, -1.0]), np.eye(2))


def test_logdet_analytic():
    assert logdet_hpd(np.eye(4)) == 0.0
    assert abs(logdet_hpd(np.diag([np.e, np.e**2])) - 3.0) <= 1e-12


def test_logdet_matches_eigenvalue_sum():
    rng = np.random.default_rng(2)
    for _ in range(20):
        a = rand_hpd(rng, 5)
        w = hermitian_eig(a).eigenvalues
        assert abs(logdet_hpd(a) - np.sum(np.log(w))) <= 1e-10 * max(
            1.0, abs(np.sum(np.log(w)))
        )


def test_logdet_rejects_singular():
    with pytest.raises(SingularityError):
        logdet_hpd(np.diag([1.0, 0.0]))


def test_logdet_inverse_consistency():
    rng = np.random.default_rng(3)
    for _ in range(10):
        a = rand_hpd(rng, 4)
        inv = hermitize(solve_hpd(a, np.eye(4)))
        assert abs(logdet_hpd(a) + logdet_hpd(inv)) <= 1e-8


def test_min_rayleigh_trivial():
    u, ratio = min_rayleigh_vec(np.eye(3), np.eye(3))
    assert abs(ratio - 1.0) <= 1e-12
    assert abs(np.linalg.norm(u) - 1.0) <= 1e-12


def test_min_rayleigh_diagonal():
    u, ratio = min_rayleigh_vec(np.diag([1.0, 4.0]), np.eye(2))
    assert abs(ratio - 1.0) <= 1e-12
    assert abs(abs(u[0]) - 1.0) <= 1e-10  # e1 up to phase


def test_min_rayleigh_sampling_oracle():
    rng = np.random.default_rng(4)
    for _ in range(5):
        a = rand_herm(rng, 3)
        b = rand_hpd(rng, 3)
        u, ratio = min_rayleigh_vec(a, b)
        # the achieved quotient matches the reported ratio
        got = (u.conj() @ a @ u).real / (u.conj() @ b @ u).real
        assert abs(got - ratio) <= 1e-10 * max(1.0, abs(ratio))
        # no random direction does better
        samples = rng.standard_normal((3, 10**5)) + 1j * rng.standard_normal((3, 10**5))
        num = np.sum(np.conj(samples) * (a @ samples), axis=0).real
        den = np.sum(np.conj(samples) * (b @ samples), axis=0).real
        assert ratio <= np.min(num / den) + 1e-9 * max(1.0, abs(ratio))


def test_min_rayleigh_rejects_indefinite_b():
    with pytest.raises(SingularityError):
        min_rayleigh_vec(np.eye(2), np.diag([1.0, -1.0]))


def test_herm_basis_orthonormal_roundtrip():
    rng = np.random.default_rng(5)
    basis = herm_basis(3)
    assert len(basis) == 9
    gram = np.array([[trace_inner(e, f) for f in basis] for e in basis])
    assert np.allclose(gram, np.eye(9), atol=1e-14)
    a = rand_herm(rng, 3)
    back = herm_from_coords(herm_coords(a, basis), basis)
    assert np.linalg.norm(a - back) <= 1e-12
