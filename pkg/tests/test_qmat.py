import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfl.qmat import (
    NotHermitianError,
    NotPSDError,
    check_hermitian,
    eig_hermitian,
    eigvalsh,
    psd_sqrt,
)

from conftest import random_density, random_hermitian


@pytest.mark.parametrize("n", [1, 2, 3, 4, 6, 8, 16, 32])
def test_eig_matches_reference(rng, n):
    h = random_hermitian(rng, n)
    es = eig_hermitian(h)
    assert np.allclose(es.eigenvalues, np.linalg.eigvalsh(h), atol=1e-12)
    assert np.all(np.diff(es.eigenvalues) >= 0)
    v = es.eigenvectors
    assert np.linalg.norm(v.conj().T @ v - np.eye(n)) < 1e-12
    assert np.linalg.norm(es.reconstruct() - h) < 1e-12 * max(1.0, np.linalg.norm(h))


def test_2x2_small_eigenvalue_keeps_relative_precision():
    # eigenvalues 1 and 1e-14: the naive quadratic formula loses the small one
    v = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    h = v @ np.diag([1.0, 1e-14]) @ v.T
    w = eigvalsh(h)
    assert w[0] == pytest.approx(1e-14, rel=1e-2)


def test_degenerate_block_gets_orthonormal_vectors():
    h = np.diag([1.0, 1.0, 1.0, 2.0]).astype(complex)
    q, _ = np.linalg.qr(np.random.default_rng(1).normal(size=(4, 4)))
    h = q @ h @ q.T
    v = eig_hermitian(h).eigenvectors
    assert np.linalg.norm(v.conj().T @ v - np.eye(4)) < 1e-12


def test_rejects_non_hermitian():
    with pytest.raises(NotHermitianError, match="H - H\\^dag"):
        check_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(ValueError):
        check_hermitian(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        check_hermitian(np.array([[np.nan, 0], [0, 1]]))


def test_psd_sqrt(rng):
    rho = random_density(rng, 5)
    r = psd_sqrt(rho)
    assert np.linalg.norm(r @ r - rho) < 1e-12
    assert np.linalg.norm(r - r.conj().T) == 0
    with pytest.raises(NotPSDError):
        psd_sqrt(np.diag([1.0, -1e-3]))
    # tiny negative rounding tail is clipped
    assert np.allclose(psd_sqrt(np.diag([1.0, -1e-12])), np.diag([1.0, 0.0]))


def test_rank_deficient_sqrt(rng):
    rho = random_density(rng, 4, rank=1)
    r = psd_sqrt(rho)
    assert np.linalg.norm(r @ r - rho) < 1e-10


finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.lists(finite, min_size=72, max_size=72))
def test_eig_properties(n, raw):
    a = np.array(raw[: 2 * n * n]).reshape(2, n, n)
    h = (a[0] + 1j * a[1]) / 2
    h = h + h.conj().T
    es = eig_hermitian(h)
    scale = max(1.0, np.linalg.norm(h))
    assert np.linalg.norm(es.reconstruct() - h) <= 1e-11 * scale
    assert np.isclose(es.eigenvalues.sum(), np.trace(h).real, atol=1e-10 * scale)
