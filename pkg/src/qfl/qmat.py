"""Dense Hermitian matrix helpers for small dimensions (2 to about 64).

Basis convention used throughout the package: the qubit basis is
(|e>, |g>) with index 0 = |e>; composite spaces are ordered
qubit (x) cavity with the Fock index varying fastest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
JACOBI_TOL = 1e-14
DEGENERACY_TOL = 1e-10
_MAX_SWEEPS = 100


class NotHermitianError(ValueError):
    pass


class NotPSDError(ValueError):
    pass


@dataclass(frozen=True)
class EigenSystem:
    """Eigenvalues in ascending order with orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def dag(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def check_hermitian(h, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Return the symmetrized matrix, or raise if ``h`` is not Hermitian."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValueError("matrix has non-finite entries")
    scale = max(1.0, np.linalg.norm(h))
    dev = np.linalg.norm(h - h.conj().T)
    if dev > tol * scale:
        raise NotHermitianError(f"matrix is not Hermitian: ||H - H^dag||_F = {dev:.3e}")
    return hermitian_part(h)


def _eig_2x2(h: np.ndarray) -> EigenSystem:
    a = h[0, 0].real
    d = h[1, 1].real
    b = h[0, 1]
    mean = 0.5 * (a + d)
    half = 0.5 * (a - d)
    radius = np.hypot(half, abs(b))
    det = a * d - abs(b) ** 2
    # the eigenvalue of larger magnitude is free of cancellation; get the
    # other from the determinant
    if mean >= 0:
        big = mean + radius
        small = det / big if big != 0 else mean - radius
        lo, hi = small, big
    else:
        big = mean - radius
        small = det / big
        lo, hi = big, small

    if abs(b) == 0.0:
        if a <= d:
            vecs = np.eye(2, dtype=complex)
        else:
            vecs = np.array([[0, 1], [1, 0]], dtype=complex)
        return EigenSystem(np.array([min(a, d), max(a, d)]), vecs)

    cols = []
    for lam in (lo, hi):
        # (H - lam) v = 0: two candidate null vectors, take the better scaled
        v1 = np.array([b, lam - a], dtype=complex)
        v2 = np.array([lam - d, np.conj(b)], dtype=complex)
        v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
        cols.append(v / np.linalg.norm(v))
    return EigenSystem(np.array([lo, hi]), np.column_stack(cols))


def _jacobi(h: np.ndarray) -> EigenSystem:
    a = h.copy()
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(a), np.finfo(float).tiny)
    for _ in range(_MAX_SWEEPS):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= JACOBI_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r == 0.0:
                    continue
                phase = apq / r
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * r)
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                v[:, idx] = v[:, idx] @ g
    else:
        raise RuntimeError("Jacobi iteration did not converge")

    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    w = w[order]
    v = v[:, order]
    return EigenSystem(w, _orthonormalize_blocks(w, v))


def _orthonormalize_blocks(w: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt inside each degenerate block, left to right."""
    v = v.copy()
    n = len(w)
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and w[stop] - w[start] < DEGENERACY_TOL * max(1.0, abs(w[start])):
            stop += 1
        for j in range(start, stop):
            for k in range(start, j):
                v[:, j] -= (v[:, k].conj() @ v[:, j]) * v[:, k]
            v[:, j] /= np.linalg.norm(v[:, j])
        start = stop
    return v


def eig_hermitian(h) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    2x2 inputs use the closed-form quadratic solution; larger inputs use
    cyclic Jacobi rotations. Both are deterministic.
    """
    h = check_hermitian(h)
    if h.shape[0] == 0:
        raise ValueError("empty matrix")
    if h.shape[0] == 1:
        return EigenSystem(h.diagonal().real.copy(), np.ones((1, 1), dtype=complex))
    if h.shape[0] == 2:
        return _eig_2x2(h)
    return _jacobi(h)


def eigvalsh(h) -> np.ndarray:
    return eig_hermitian(h).eigenvalues


def psd_sqrt(p) -> np.ndarray:
    """Hermitian PSD square root; eigenvalues down to -1e-10 are clipped to 0."""
    es = eig_hermitian(p)
    if es.eigenvalues[0] < -PSD_TOL:
        raise NotPSDError(f"matrix is not PSD: min eigenvalue {es.eigenvalues[0]:.3e}")
    root = np.sqrt(np.clip(es.eigenvalues, 0.0, None))
    v = es.eigenvectors
    return hermitian_part((v * root) @ v.conj().T)


def trace(a) -> complex:
    return complex(np.trace(a))
