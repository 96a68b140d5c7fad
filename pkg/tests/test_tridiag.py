import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specband.errors import NonConvergence
from specband.matrices import PeriodicMatrixGeneral
from specband.tridiag import (
    RealTridiag,
    bisect_eigenvalues,
    eig_endpoints,
    inverse_iteration,
    phase_reduce,
    sturm_count,
    submatrix_spectrum,
    tql_eigh,
)

R2 = 1 / np.sqrt(2)


def random_tridiag(rng, size):
    return RealTridiag(rng.uniform(-2, 2, size), rng.uniform(0.3, 1.5, size - 1))


def test_phase_reduce_examples():
    t, phases = phase_reduce(PeriodicMatrixGeneral([1, 2], [1, 2, 1j], 0))
    assert np.array_equal(phases, [1, 1]) and t.offdiag == (1.0,)

    t, phases = phase_reduce(PeriodicMatrixGeneral([0, 0], [1j, 1, 1], 0))
    assert np.allclose(phases, [1, -1j]) and t.offdiag == (1.0,)

    t, phases = phase_reduce(PeriodicMatrixGeneral([0, 0, 0], [1j, -1, 1, 1], 0))
    assert np.allclose(phases, [1, -1j, 1j]) and np.allclose(t.offdiag, [1, 1])


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=3, max_value=15), st.integers(min_value=0, max_value=2**31 - 1))
def test_phase_reduce_similarity(n, seed):
    rng = np.random.default_rng(seed)
    b = rng.uniform(0.5, 1.5, n) * np.exp(1j * rng.uniform(-np.pi, np.pi, n))
    m = PeriodicMatrixGeneral(rng.uniform(-1, 1, n - 1), b, 0.0)
    t, phases = phase_reduce(m)
    D = np.diag(phases)
    assert np.allclose(D.conj().T @ m.leading_submatrix() @ D, t.dense(), atol=1e-14)


def test_endpoints_two_by_two():
    s = eig_endpoints(RealTridiag([0, 0], [1]))
    assert np.allclose(s.mu, [-1, 1])
    assert np.allclose(s.u_first, [R2, R2])
    assert np.allclose(s.u_last, [-R2, R2])
    assert np.allclose(s.chi_prime_at_mu, [-2, 2])


def test_endpoints_single():
    s = eig_endpoints(RealTridiag([5.0], []))
    assert np.allclose(s.mu, [5]) and np.allclose(s.u_first, [1])


def test_endpoints_path_graph():
    s = eig_endpoints(RealTridiag([0, 0, 0], [1, 1]))
    assert np.allclose(s.mu, [-np.sqrt(2), 0, np.sqrt(2)], atol=1e-15)
    assert np.allclose(np.poly(s.mu), [1, 0, -2, 0], atol=1e-14)


def test_rejects_reduced_matrix():
    with pytest.raises(ValueError):
        RealTridiag([0, 0], [0])


def test_cluster_raises():
    # Wilkinson-type matrix with a nearly double pair, tiny coupling.
    with pytest.raises(NonConvergence):
        eig_endpoints(RealTridiag([0.0, 0.0, 1.0, 1.0], [1e-300, 1.0, 1e-300]))


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=40), st.integers(min_value=0, max_value=2**31 - 1))
def test_eigen_invariants(size, seed):
    t = random_tridiag(np.random.default_rng(seed), size)
    mu, vecs = tql_eigh(t.diag, t.offdiag)
    T = t.dense()
    norm = t.norm()
    for k in range(size):
        assert np.linalg.norm(T @ vecs[:, k] - mu[k] * vecs[:, k]) <= 1e-12 * (norm + abs(mu[k]))
    assert np.allclose(vecs.T @ vecs, np.eye(size), atol=1e-12)
    s = eig_endpoints(t)
    assert np.all(np.diff(s.mu) > 0)
    assert np.all(s.u_first > 0) and np.all(s.u_last != 0)
    assert abs(np.sum(s.u_first ** 2) - 1) < 1e-12 and abs(np.sum(s.u_last ** 2) - 1) < 1e-12
    n = size + 1
    expected = [(-1) ** (n - k - 1) for k in range(1, n)]
    assert list(np.sign(s.chi_prime_at_mu)) == expected
    assert np.max(np.abs(s.mu - bisect_eigenvalues(t.diag, t.offdiag))) <= 1e-12 * norm


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=3, max_value=20), st.integers(min_value=0, max_value=2**31 - 1))
def test_cauchy_interlacing(size, seed):
    t = random_tridiag(np.random.default_rng(seed), size)
    outer = eig_endpoints(t).mu
    inner = eig_endpoints(RealTridiag(t.diag[:-1], t.offdiag[:-1])).mu
    # Gaps can be smaller than roundoff when an eigenvector nearly vanishes
    # at the removed site, so strictness is only observable up to eps * norm.
    slack = 1e-12 * t.norm()
    assert np.all(outer[:-1] < inner + slack) and np.all(inner < outer[1:] + slack)


def test_sturm_count_and_inverse_iteration():
    d, e = [0.0, 0.0, 0.0], [1.0, 1.0]
    assert sturm_count(d, e, -2) == 0
    assert sturm_count(d, e, 0.5) == 2
    assert sturm_count(d, e, 2) == 3
    v = inverse_iteration(d, e, np.sqrt(2))
    assert np.allclose(v, [0.5, R2, 0.5])
    s = eig_endpoints(RealTridiag(d, e))
    assert np.isclose(s.u_first[-1], v[0]) and np.isclose(s.u_last[-1], v[-1])


def test_endpoints_match_inverse_iteration():
    rng = np.random.default_rng(11)
    t = random_tridiag(rng, 12)
    s = eig_endpoints(t)
    for k, mu in enumerate(s.mu):
        v = inverse_iteration(t.diag, t.offdiag, mu)
        assert abs(s.u_first[k] - v[0]) < 1e-10 and abs(s.u_last[k] - v[-1]) < 1e-10


def test_submatrix_spectrum_restores_complex_eigenvectors():
    rng = np.random.default_rng(4)
    n = 6
    b = rng.uniform(0.5, 1.5, n) * np.exp(1j * rng.uniform(-np.pi, np.pi, n))
    m = PeriodicMatrixGeneral(rng.uniform(-1, 1, n - 1), b, 0.0)
    s, phases = submatrix_spectrum(m)
    H = m.leading_submatrix()
    vals, vecs = np.linalg.eigh(H)
    assert np.allclose(vals, s.mu)
    # Moduli of the endpoint components are phase independent.
    assert np.allclose(np.abs(vecs[0]), np.abs(phases[0] * s.u_first))
    assert np.allclose(np.abs(vecs[-1]), np.abs(phases[-1] * s.u_last))
