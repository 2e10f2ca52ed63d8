"""Quantum Fisher information, SLD, classical Fisher information and
Bures distance, plus the time and drive maximizations built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dynamics import (
    InitialStateSpec,
    SensitivityPair,
    initial_state,
    propagate_with_sensitivity,
    steady_state_sensitivity,
)
from .model import (
    FeedbackParams,
    QubitModelParams,
    qubit_liouvillian,
    qubit_liouvillian_dgamma,
)
from .qmat import NotPSDError, eig_hermitian, hermitian_part, psd_sqrt

RANK_TOL = 1e-12
DET_RESOLUTION = 1e-8
DEGENERACY_GAP = 1e-10
BURES_STEP = 1e-4
FALLBACK_STEP = 1e-3
DET_FLOOR = 16 * np.finfo(float).eps
PEAK_FLOOR = 1e-3
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class QfiResult:
    value: float
    sld: np.ndarray
    method: str
    flags: tuple[str, ...] = ()

    @property
    def precision_bound(self) -> float:
        """Quantum Cramer-Rao bound 1/F on the estimator variance."""
        return math.inf if self.value <= 0 else 1.0 / self.value


@dataclass(frozen=True)
class QfiMatrix:
    entries: np.ndarray

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.entries))


@dataclass(frozen=True)
class FmResult:
    f_max: float
    t_star: float
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class DriveOptimum:
    omega_m: float
    f_max: float
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class ClassicalFiResult:
    value: float


def _sld_in_eigenbasis(lam, drho_eb, tol):
    denom = lam[:, None] + lam[None, :]
    keep = denom > tol
    out = np.zeros_like(drho_eb)
    out[keep] = 2.0 * drho_eb[keep] / denom[keep]
    return out, bool(np.any(~keep & (np.abs(drho_eb) > 0)))


def sld_with_support(pair: SensitivityPair, tol: float = RANK_TOL) -> tuple[np.ndarray, bool]:
    """SLD from the spectral formula and whether support was truncated.

    Terms with lambda_k + lambda_k' <= tol are dropped, giving the
    minimal-support solution when rho is rank deficient.
    """
    es = eig_hermitian(pair.rho)
    v = es.eigenvectors
    drho_eb = v.conj().T @ pair.drho @ v
    l_eb, truncated = _sld_in_eigenbasis(es.eigenvalues, drho_eb, tol)
    return hermitian_part(v @ l_eb @ v.conj().T), truncated


def sld(pair: SensitivityPair) -> np.ndarray:
    return sld_with_support(pair)[0]


def sld_residual(pair: SensitivityPair, L: np.ndarray) -> float:
    rho = pair.rho
    return float(np.linalg.norm(pair.drho - 0.5 * (rho @ L + L @ rho)))


def qfi_spectral(pair: SensitivityPair, tol: float = RANK_TOL) -> QfiResult:
    """QFI from the eigen-decomposition of rho.

    The classical part sums (d lambda_k)^2 / lambda_k, the quantum part
    2 (lambda_k - lambda_k')^2 / (lambda_k + lambda_k') |<k|d k'>|^2, with
    first-order perturbation theory giving d lambda_k = <k|d rho|k> and
    <k|d k'> = <k|d rho|k'> / (lambda_k' - lambda_k).
    """
    es = eig_hermitian(pair.rho)
    lam = es.eigenvalues
    v = es.eigenvectors
    d = v.conj().T @ pair.drho @ v
    n = len(lam)
    flags: list[str] = []

    classical = 0.0
    for k in range(n):
        if lam[k] > tol:
            classical += d[k, k].real ** 2 / lam[k]

    quantum = 0.0
    for k in range(n):
        for kp in range(n):
            if k == kp or lam[k] + lam[kp] <= tol:
                continue
            gap = lam[kp] - lam[k]
            if abs(gap) < DEGENERACY_GAP:
                if abs(d[k, kp]) > DEGENERACY_GAP:
                    return _qfi_bures_fallback(pair, tol)
                continue
            overlap = d[k, kp] / gap
            quantum += 2.0 * gap**2 / (lam[k] + lam[kp]) * abs(overlap) ** 2

    L, truncated = sld_with_support(pair, tol)
    if truncated:
        flags.append("rank-deficient")
    return QfiResult(classical + quantum, L, "spectral", tuple(flags))


def _qfi_bures_fallback(pair: SensitivityPair, tol: float) -> QfiResult:
    """Degenerate spectrum with coupling inside the block: use 4 D_B^2/h^2."""
    rho, drho = pair.rho, pair.drho

    def est(h):
        return bures_distance(rho - h * drho, rho + h * drho, check=False) ** 2 / h**2

    h = FALLBACK_STEP
    value = (4.0 * est(h) - est(2 * h)) / 3.0
    L, truncated = sld_with_support(pair, tol)
    flags = ("degenerate-spectrum",) + (("rank-deficient",) if truncated else ())
    return QfiResult(float(value), L, "bures-fd", flags)


def qfi_closed_2x2(pair: SensitivityPair, det_resolution: float = DET_RESOLUTION) -> QfiResult:
    """Tr[(d rho)^2] + Tr[(rho d rho)^2] / det(rho) for a qubit.

    det(rho) = rho_00 rho_11 - |rho_01|^2 is trusted only while it exceeds
    ``det_resolution`` times the size of the two cancelling products and
    sits above the rounding floor of a unit-trace matrix; otherwise rho is treated as rank deficient and the call falls back to
    :func:`qfi_spectral`, flagged "closed-form-fallback".
    """
    rho, drho = pair.rho, pair.drho
    if rho.shape != (2, 2):
        raise ValueError("closed-form QFI needs a 2x2 density matrix")
    diag = (rho[0, 0] * rho[1, 1]).real
    off = abs(rho[0, 1]) ** 2
    det = diag - off
    if det <= max(det_resolution * (abs(diag) + off), DET_FLOOR):
        res = qfi_spectral(pair)
        return QfiResult(res.value, res.sld, res.method, res.flags + ("closed-form-fallback",))
    rd = rho @ drho
    value = np.trace(drho @ drho).real + np.trace(rd @ rd).real / det
    return QfiResult(float(value), sld(pair), "closed-2x2")


def qfi(pair: SensitivityPair) -> QfiResult:
    if pair.rho.shape == (2, 2):
        return qfi_closed_2x2(pair)
    return qfi_spectral(pair)


def classical_fisher(povm: Sequence[np.ndarray], pair: SensitivityPair, tol: float = RANK_TOL) -> ClassicalFiResult:
    effects = [np.asarray(e, dtype=complex) for e in povm]
    dim = pair.rho.shape[0]
    total = sum(effects, np.zeros((dim, dim), dtype=complex))
    if np.linalg.norm(total - np.eye(dim)) > 1e-10:
        raise ValueError("POVM effects do not sum to the identity")
    value = 0.0
    for e in effects:
        if eig_hermitian(e).eigenvalues[0] < -1e-10:
            raise ValueError("POVM effect is not positive semidefinite")
        p = np.trace(e @ pair.rho).real
        if p > tol:
            value += np.trace(e @ pair.drho).real ** 2 / p
    return ClassicalFiResult(float(value))


def sld_eigenbasis_povm(L: np.ndarray) -> list[np.ndarray]:
    v = eig_hermitian(L).eigenvectors
    return [np.outer(v[:, k], v[:, k].conj()) for k in range(v.shape[1])]


def fidelity(rho: np.ndarray, sigma: np.ndarray, check: bool = True) -> float:
    """Tr sqrt(sqrt(rho) sigma sqrt(rho))."""
    r = psd_sqrt(rho)
    inner = eig_hermitian(hermitian_part(r @ sigma @ r)).eigenvalues
    if check and inner[0] < -1e-10:
        raise NotPSDError(f"sqrt(rho) sigma sqrt(rho) has eigenvalue {inner[0]:.3e}")
    return float(np.sum(np.sqrt(np.clip(inner, 0.0, None))))


def bures_distance(rho: np.ndarray, sigma: np.ndarray, check: bool = True) -> float:
    if rho.shape != sigma.shape:
        raise ValueError("states have different dimensions")
    return math.sqrt(max(0.0, 2.0 * (1.0 - fidelity(rho, sigma, check=check))))


def qfi_from_bures(family: Callable[[float], np.ndarray], theta: float, h: float = BURES_STEP,
                   richardson: bool = False) -> float:
    """Estimate the QFI as 4 D_B^2 / h^2 for states an increment h apart.

    The increment is centred on theta, which leaves an O(h^2) bias;
    ``richardson`` combines h and 2h to cancel it.
    """

    def est(step):
        return 4.0 * bures_distance(family(theta - step / 2), family(theta + step / 2)) ** 2 / step**2

    if not richardson:
        return est(h)
    return (4.0 * est(h) - est(2.0 * h)) / 3.0


# --- pipelines on the feedback qubit ---------------------------------------


def qfi_time_series(m: QubitModelParams, fb: FeedbackParams, init: InitialStateSpec,
                    times: Sequence[float], dt: float | None = None) -> list[QfiResult]:
    L = qubit_liouvillian(m, fb)
    dL = qubit_liouvillian_dgamma(m, fb)
    pairs = propagate_with_sensitivity(L, dL, initial_state(init), times, dt=dt)
    return [qfi(p) for p in pairs]


def steady_pair(gamma: float, omega: float, fb: FeedbackParams) -> SensitivityPair:
    """Steady state and its gamma-derivative for the driven feedback qubit."""
    m = QubitModelParams(gamma, omega)
    return steady_state_sensitivity(qubit_liouvillian(m, fb), qubit_liouvillian_dgamma(m, fb))


def steady_qfi(gamma: float, omega: float, fb: FeedbackParams) -> QfiResult:
    return qfi(steady_pair(gamma, omega, fb))


def qfi_matrix_steady(g: float, kappa: float, omega: float, fb: FeedbackParams) -> QfiMatrix:
    """QFI matrix over (g, kappa) for the steady state with gamma = g^2/kappa.

    F_ij = Tr[rho (L_i L_j + L_j L_i)] / 2; the sensitivities follow from
    the chain rule d/dg = (2g/kappa) d/dgamma, d/dkappa = -(g/kappa)^2 d/dgamma.
    """
    gamma = g * g / kappa
    pair = steady_pair(gamma, omega, fb)
    factors = (2.0 * g / kappa, -(g / kappa) ** 2)
    slds = [sld(SensitivityPair(pair.rho, f * pair.drho)) for f in factors]
    F = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            anti = slds[i] @ slds[j] + slds[j] @ slds[i]
            F[i, j] = 0.5 * np.trace(pair.rho @ anti).real
    return QfiMatrix(0.5 * (F + F.T))


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, xtol: float) -> tuple[float, float]:
    """Maximize a unimodal f on [lo, hi] to a bracket width of xtol."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def _grid_then_golden(f, grid: np.ndarray, xtol: float, map_fn=map):
    values = np.array(list(map_fn(f, grid)), dtype=float)
    i = int(np.argmax(values))  # first index wins ties
    flags = []
    interior = values[1:-1]
    # local maxima far below the global one are rounding ripple in decayed tails
    significant = interior > PEAK_FLOOR * values[i]
    peaks = np.sum((interior > values[:-2]) & (interior >= values[2:]) & significant)
    if peaks > 1:
        # still refine around the global grid maximum; the flag tells callers to look
        flags.append("multimodal")
    if i == 0 or i == len(grid) - 1:
        flags.append("maximum-at-window-edge")
        return float(grid[i]), float(values[i]), values, tuple(flags)
    x, fx = golden_section_max(f, grid[i - 1], grid[i + 1], xtol)
    if fx < values[i]:
        x, fx = float(grid[i]), float(values[i])
    return float(x), float(fx), values, tuple(flags)


def maximize_qfi_over_time(m: QubitModelParams, fb: FeedbackParams, init: InitialStateSpec,
                           t_window: tuple[float, float], n_grid: int = 400, xtol: float = 1e-4,
                           dt: float | None = None) -> FmResult:
    """F_M = max_t F_gamma(t): coarse grid scan refined by golden section."""
    L = qubit_liouvillian(m, fb)
    dL = qubit_liouvillian_dgamma(m, fb)
    rho0 = initial_state(init)
    grid = np.linspace(t_window[0], t_window[1], max(n_grid, 200))
    pairs = propagate_with_sensitivity(L, dL, rho0, grid, dt=dt)
    values = [qfi(p).value for p in pairs]
    cache = dict(zip(grid.tolist(), values))

    def f(t):
        t = float(t)
        if t not in cache:
            cache[t] = qfi(propagate_with_sensitivity(L, dL, rho0, [t], dt=dt)[0]).value
        return cache[t]

    t_star, f_max, _, flags = _grid_then_golden(f, grid, xtol)
    return FmResult(f_max, t_star, flags)


def optimal_drive(gamma: float, fb: FeedbackParams, omega_window: tuple[float, float] = (0.0, 1.0),
                  n_grid: int = 401, xtol: float = 1e-8) -> DriveOptimum:
    """Drive strength maximizing the steady-state QFI about gamma."""
    grid = np.linspace(omega_window[0], omega_window[1], max(n_grid, 200))

    def f(omega):
        return steady_qfi(gamma, float(omega), fb).value

    x, fx, _, flags = _grid_then_golden(f, grid, xtol)
    return DriveOptimum(x, fx, flags)
