"""Time propagation, parameter sensitivities, steady states and decay fits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import KernelError, PositivityError
from .model import (
    CavityQubitParams,
    Liouvillian,
    cavity_qubit_liouvillian,
    excited_projector,
    unvec,
    vec,
)
from .qmat import eigvalsh, hermitian_part

TRACE_TOL = 1e-12
POSITIVITY_ABORT = -1e-8
KERNEL_GAP = 1e-10


@dataclass(frozen=True)
class PureState:
    """cos(theta)|e> + sin(theta)|g>"""

    theta: float = math.pi / 4


@dataclass(frozen=True)
class MixedState:
    """epsilon |e><e| + (1 - epsilon) |g><g|"""

    epsilon: float

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in [0, 1), got {self.epsilon}")


InitialStateSpec = Union[PureState, MixedState]


@dataclass(frozen=True)
class SensitivityPair:
    rho: np.ndarray
    drho: np.ndarray


@dataclass(frozen=True)
class DecayFit:
    rate: float
    log_amplitude: float
    max_residual: float
    reliable: bool


def initial_state(spec: InitialStateSpec) -> np.ndarray:
    if isinstance(spec, PureState):
        psi = np.array([math.cos(spec.theta), math.sin(spec.theta)], dtype=complex)
        return np.outer(psi, psi.conj())
    if isinstance(spec, MixedState):
        return np.diag([spec.epsilon, 1.0 - spec.epsilon]).astype(complex)
    raise TypeError(f"unknown initial state spec {spec!r}")


def check_density_matrix(rho, tol: float = TRACE_TOL) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if np.linalg.norm(rho - rho.conj().T) > tol * max(1.0, np.linalg.norm(rho)):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValueError(f"density matrix trace is {np.trace(rho).real!r}, expected 1")
    lo = eigvalsh(rho)[0]
    if lo < -1e-10:
        raise ValueError(f"density matrix is not positive: min eigenvalue {lo:.3e}")
    return rho


def rk4_step_matrix(generator: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step for the autonomous linear ODE x' = G x.

    For a constant generator the four stages collapse to the degree-4
    Taylor polynomial of hG, so the step is a fixed matrix.
    """
    n = generator.shape[0]
    hg = h * generator
    step = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, 5):
        term = term @ hg / k
        step = step + term
    return step


class _Stepper:
    """Applies RK4 steps of at most ``dt`` between successive output times."""

    def __init__(self, generator: np.ndarray, dt: float):
        if not dt > 0:
            raise ValueError(f"step size must be positive, got {dt}")
        self.generator = generator
        self.dt = dt
        self._cache: dict[tuple[float, int], np.ndarray] = {}

    def propagator(self, span: float) -> tuple[np.ndarray, int, float]:
        n = max(1, math.ceil(span / self.dt - 1e-9))
        h = span / n
        key = (h, n)
        if key not in self._cache:
            self._cache[key] = np.linalg.matrix_power(rk4_step_matrix(self.generator, h), n)
        return self._cache[key], n, h


def _check_grid(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or len(t) == 0:
        raise ValueError("time grid must be a non-empty 1-D sequence")
    if t[0] < 0:
        raise ValueError("time grid must start at t >= 0")
    if np.any(np.diff(t) < 0):
        raise ValueError("time grid must be ascending")
    return t


def _check_positive(rho: np.ndarray, t: float, h: float) -> None:
    lo = eigvalsh(hermitian_part(rho))[0]
    if lo < POSITIVITY_ABORT:
        raise PositivityError(
            f"state lost positivity at t={t:g}: min eigenvalue {lo:.3e} (step size {h:g}); "
            "reduce dt"
        )


def _restore_trace(rho: np.ndarray, target: float) -> np.ndarray:
    """Rebuild the largest diagonal entry from the trace constraint.

    RK4 conserves the trace exactly, but the dominant population carries an
    absolute rounding error that swamps small sensitivities at long times.
    """
    return _restore_at(rho, int(np.argmax(np.abs(np.diag(rho)))), target)


def _restore_at(m: np.ndarray, k: int, target: float) -> np.ndarray:
    m = m.copy()
    m[k, k] = target - (np.trace(m) - m[k, k]).real
    return m


def _march(generator, x0, t_grid, dt, on_output):
    stepper = _Stepper(generator, dt)
    x = x0
    t_prev = 0.0
    h_used = dt
    out = []
    for t in t_grid:
        span = t - t_prev
        if span > 0:
            prop, _, h_used = stepper.propagator(span)
            x = prop @ x
        out.append(on_output(x, t, h_used))
        t_prev = t
    return out


def propagate(L: Liouvillian, rho0, t_grid: Sequence[float], dt: float | None = None) -> list[np.ndarray]:
    """Integrate d rho/dt = L(rho) with fixed-step RK4 and sample on ``t_grid``.

    Between outputs the interval is split into the fewest equal steps no
    longer than ``dt`` (default: ``L.default_step()``).
    """
    rho0 = check_density_matrix(rho0)
    if rho0.shape[0] != L.dim:
        raise ValueError("state and generator dimensions differ")
    t_grid = _check_grid(t_grid)
    dt = L.default_step() if dt is None else dt
    d = L.dim

    def emit(x, t, h):
        rho = _restore_trace(hermitian_part(unvec(x, d)), 1.0)
        if t > 0:
            _check_positive(rho, t, h)
        return rho

    return _march(L.generator, vec(rho0).copy(), t_grid, dt, emit)


def propagate_with_sensitivity(
    L: Liouvillian, dL: Liouvillian, rho0, t_grid: Sequence[float], dt: float | None = None
) -> list[SensitivityPair]:
    """Jointly integrate rho and d rho/d theta.

    The pair obeys rho' = L rho, (d rho)' = L (d rho) + (dL) rho, with
    d rho(0) = 0; both share one RK4 step sequence.
    """
    rho0 = check_density_matrix(rho0)
    t_grid = _check_grid(t_grid)
    dt = L.default_step() if dt is None else dt
    d = L.dim
    n = d * d
    joint = np.zeros((2 * n, 2 * n), dtype=complex)
    joint[:n, :n] = L.generator
    joint[n:, n:] = L.generator
    joint[n:, :n] = dL.generator
    x0 = np.concatenate([vec(rho0), np.zeros(n, dtype=complex)])

    def emit(x, t, h):
        raw = hermitian_part(unvec(x[:n], d))
        k = int(np.argmax(np.abs(np.diag(raw))))
        rho = _restore_at(raw, k, 1.0)
        if t > 0:
            _check_positive(rho, t, h)
        return SensitivityPair(rho, _restore_at(hermitian_part(unvec(x[n:], d)), k, 0.0))

    return _march(joint, x0, t_grid, dt, emit)


def _augmented(L: Liouvillian) -> np.ndarray:
    d = L.dim
    m = np.array(L.generator, dtype=complex)
    # row 0 is the d rho_00/dt equation; trace preservation makes it redundant
    m[0, :] = vec(np.eye(d))
    return m


def kernel_dimension(L: Liouvillian, rel_tol: float = KERNEL_GAP) -> int:
    s = np.linalg.svd(L.generator, compute_uv=False)
    return int(np.sum(s <= rel_tol * s[0]))


def steady_state(L: Liouvillian) -> np.ndarray:
    """Unique steady state from the trace-augmented linear system."""
    k = kernel_dimension(L)
    if k != 1:
        raise KernelError(f"Liouvillian kernel has dimension {k}; steady state is not unique")
    d = L.dim
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    rho = hermitian_part(unvec(np.linalg.solve(_augmented(L), rhs), d))
    return rho


def steady_state_sensitivity(L: Liouvillian, dL: Liouvillian) -> SensitivityPair:
    """Steady state and its derivative from L drho = -(dL) rho, Tr drho = 0."""
    rho = steady_state(L)
    rhs = -(dL.generator @ vec(rho))
    rhs[0] = 0.0
    drho = unvec(np.linalg.solve(_augmented(L), rhs), L.dim)
    return SensitivityPair(rho, hermitian_part(drho))


def fit_decay_rate(
    t,
    y,
    window: tuple[float, float],
    model: str = "pure-exponential",
    tol: float = 5e-2,
) -> DecayFit:
    """Least-squares rate of y ~ c e^{-rate t} or y ~ c t^2 e^{-rate t}.

    Only samples with ``window[0] <= t <= window[1]`` enter the fit.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    sel = (t >= window[0]) & (t <= window[1])
    ts, ys = t[sel], y[sel]
    if len(ts) < 8:
        raise ValueError(f"need at least 8 samples in the fit window, got {len(ts)}")
    if np.any(ys <= 0):
        raise ValueError("decay fit needs strictly positive samples in the window")
    if model == "pure-exponential":
        z = np.log(ys)
    elif model == "t2-exponential":
        z = np.log(ys / ts**2)
    else:
        raise ValueError(f"unknown decay model {model!r}")
    slope, intercept = np.polyfit(ts, z, 1)
    resid = float(np.max(np.abs(z - (slope * ts + intercept))))
    return DecayFit(float(-slope), float(intercept), resid, resid <= tol)


def default_horizon(gamma: float, A: float) -> float:
    """40 / (gamma cos^2 A): long enough for the slowest population decay."""
    rate = gamma * math.cos(A) ** 2
    return math.inf if rate == 0 else 40.0 / rate


def adiabatic_decay(
    p: CavityQubitParams,
    window: tuple[float, float] | None = None,
    n_points: int = 41,
    dt: float | None = None,
) -> DecayFit:
    """Fit the excited-state decay of the full qubit+cavity model.

    Starts from |e><e| (x) |0><0|. The default window spans 1/gamma to
    6/gamma with gamma = g^2/kappa.
    """
    L = cavity_qubit_liouvillian(p)
    gamma = p.effective_gamma
    if window is None:
        window = (1.0 / gamma, 6.0 / gamma)
    times = np.linspace(window[0], window[1], n_points)
    d = L.dim
    rho0 = np.zeros((d, d), dtype=complex)
    rho0[0, 0] = 1.0
    proj = excited_projector(p.n_max)
    states = propagate(L, rho0, times, dt=dt)
    pe = np.array([np.trace(proj @ s).real for s in states])
    return fit_decay_rate(times, pe, window)
