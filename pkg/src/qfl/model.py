"""Operators and Liouvillian generators for the feedback-controlled qubit.

Vectorization is column stacking: ``vec(rho) = rho.reshape(-1, order="F")``,
under which ``A @ rho @ B`` maps to ``kron(B.T, A) @ vec(rho)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# qubit basis (|e>, |g>)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.conj().T
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PROJ_E = np.array([[1, 0], [0, 0]], dtype=complex)
PROJ_G = np.array([[0, 0], [0, 1]], dtype=complex)


@dataclass(frozen=True)
class FeedbackParams:
    A: float = math.pi
    beta: float = 0.0
    delta_t: float = 1.0

    def __post_init__(self):
        if self.delta_t != 1.0:
            raise ValueError("delta_t is fixed to 1 (all times are in units of the feedback duration)")
        if not (math.isfinite(self.A) and math.isfinite(self.beta)):
            raise ValueError("feedback angles must be finite")


@dataclass(frozen=True)
class QubitModelParams:
    gamma: float
    omega: float = 0.0

    def __post_init__(self):
        if not (self.gamma >= 0 and self.omega >= 0):
            raise ValueError(f"gamma and omega must be >= 0, got {self.gamma}, {self.omega}")


@dataclass(frozen=True)
class CavityQubitParams:
    g: float
    kappa: float
    gamma0: float = 0.0
    omega: float = 0.0
    n_max: int = 2

    def __post_init__(self):
        if self.g < 0 or self.kappa <= 0 or self.gamma0 < 0 or self.omega < 0:
            raise ValueError("need g >= 0, kappa > 0, gamma0 >= 0, omega >= 0")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max}")

    @property
    def effective_gamma(self) -> float:
        return self.g**2 / self.kappa


@dataclass(frozen=True, eq=False)
class Liouvillian:
    """Generator acting on column-stacked density matrices.

    ``rate_scale`` is the largest physical rate entering the generator; the
    default integration step is derived from it.
    """

    dim: int
    generator: np.ndarray
    rate_scale: float | None = None

    def __post_init__(self):
        gen = np.array(self.generator, dtype=complex)
        if gen.shape != (self.dim**2, self.dim**2):
            raise ValueError(f"generator shape {gen.shape} does not match dim {self.dim}")
        gen.setflags(write=False)
        object.__setattr__(self, "generator", gen)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.generator @ vec(rho), self.dim)

    def default_step(self) -> float:
        rate = self.rate_scale
        if rate is None:
            rate = float(np.abs(self.generator).max())
        return 1e-2 * min(1.0, 1.0 / rate) if rate > 0 else 1e-2


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(v).reshape(dim, dim, order="F")


def spre(a: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> a @ rho."""
    return np.kron(np.eye(a.shape[0]), a)


def spost(b: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> rho @ b."""
    return np.kron(b.T, np.eye(b.shape[0]))


def sprepost(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Superoperator of rho -> a @ rho @ b."""
    return np.kron(b.T, a)


def commutator_generator(h: np.ndarray) -> np.ndarray:
    """-i[h, .]"""
    return -1j * (spre(h) - spost(h))


def dissipator(c: np.ndarray) -> np.ndarray:
    """D[c] rho = c rho c^dag - (c^dag c rho + rho c^dag c) / 2."""
    cdc = c.conj().T @ c
    return sprepost(c, c.conj().T) - 0.5 * (spre(cdc) + spost(cdc))


def feedback_unitary(fb: FeedbackParams) -> np.ndarray:
    """exp(i sigma.A) with A = A (sin beta, cos beta, 0), as a 2x2 matrix."""
    c = math.cos(fb.A)
    s = math.sin(fb.A)
    ph = complex(math.cos(fb.beta), math.sin(fb.beta))
    return np.array([[c, s * ph], [-s * ph.conjugate(), c]], dtype=complex)


def jump_operator(fb: FeedbackParams) -> np.ndarray:
    return feedback_unitary(fb) @ SIGMA_MINUS


def drive_hamiltonian(omega: float) -> np.ndarray:
    return 0.5 * omega * SIGMA_X


def qubit_liouvillian(m: QubitModelParams, fb: FeedbackParams) -> Liouvillian:
    """Generator of d rho/dt = -i (Omega/2)[sigma_x, rho] + gamma D[U sigma_-] rho."""
    gen = commutator_generator(drive_hamiltonian(m.omega)) + m.gamma * dissipator(jump_operator(fb))
    return Liouvillian(2, gen, rate_scale=max(m.gamma, m.omega))


def qubit_liouvillian_dgamma(m: QubitModelParams, fb: FeedbackParams) -> Liouvillian:
    """Derivative of :func:`qubit_liouvillian` with respect to gamma."""
    return Liouvillian(2, dissipator(jump_operator(fb)))


def qubit_liouvillian_domega(m: QubitModelParams, fb: FeedbackParams) -> Liouvillian:
    return Liouvillian(2, commutator_generator(drive_hamiltonian(1.0)))


def cavity_operators(n_max: int):
    """(a, sigma_-) on the qubit (x) cavity space with Fock cutoff n_max."""
    n = n_max + 1
    a = np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)
    return np.kron(np.eye(2), a), np.kron(SIGMA_MINUS, np.eye(n))


def cavity_qubit_hamiltonian(p: CavityQubitParams) -> np.ndarray:
    a, sm = cavity_operators(p.n_max)
    sx = np.kron(SIGMA_X, np.eye(p.n_max + 1))
    return 0.5 * p.omega * sx + p.g * (sm.conj().T @ a + sm @ a.conj().T)


def cavity_qubit_liouvillian(p: CavityQubitParams) -> Liouvillian:
    """Generator of -i[H, rho] + kappa D[a] rho + gamma0 D[sigma_-] rho."""
    a, sm = cavity_operators(p.n_max)
    gen = commutator_generator(cavity_qubit_hamiltonian(p)) + p.kappa * dissipator(a)
    if p.gamma0:
        gen = gen + p.gamma0 * dissipator(sm)
    rate = max(p.kappa, p.g, p.gamma0, p.omega)
    return Liouvillian(2 * (p.n_max + 1), gen, rate_scale=rate)


def excited_projector(n_max: int) -> np.ndarray:
    return np.kron(PROJ_E, np.eye(n_max + 1))


def photon_number(n_max: int) -> np.ndarray:
    a, _ = cavity_operators(n_max)
    return a.conj().T @ a
