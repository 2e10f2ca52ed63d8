"""Closed-form expressions for the feedback qubit, kept verbatim.

These serve as independent cross-checks of the numerical pipeline. Two
of them (``qfi_mixed_as_printed`` and ``steady_excited_population_inline``)
are known to disagree with the master equation; they are kept verbatim so
the audit in :mod:`qfl.audit` can report the discrepancy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class ClosedFormTerms:
    gamma_q: float
    y_factor: float
    eta: tuple[float, float, float, float, float]
    zeta: float
    chi: float
    n_num: complex
    m_den: float


def rho_no_feedback(t: float, gamma: float) -> tuple[float, float]:
    """(rho_ee, rho_eg) for the equal-weight superposition without feedback."""
    return math.exp(-t * gamma) / 2, math.exp(-t * gamma / 2) / 2


def qfi_no_feedback(t: float, gamma: float) -> float:
    """t^2 e^{-t gamma} (2 e^{t gamma} - 1) / (4 (e^{t gamma} - 1)).

    Evaluated as t^2 x (2 - x) / (4 (1 - x)) with x = e^{-t gamma}.
    """
    if t == 0:
        return 0.0
    x = math.exp(-t * gamma)
    return t * t * x * (2.0 - x) / (4.0 * -math.expm1(-t * gamma))


def qfi_no_feedback_direct(t: float, gamma: float) -> float:
    """Literal form of :func:`qfi_no_feedback`, for moderate arguments only."""
    e = math.exp(t * gamma)
    return t * t * math.exp(-t * gamma) * (2 * e - 1) / (4 * (e - 1))


def qfi_short_time(t: float, gamma: float) -> float:
    return t / (4 * gamma) + t * t / 8


def qfi_long_time_no_feedback(t: float, gamma: float) -> float:
    return t * t * math.exp(-gamma * t) / 2


def y_factor(t: float, gamma: float, A: float) -> tuple[float, bool]:
    """(1 - e^{-t gamma cos 2A / 2}) tan 2A and whether the A = pi/4 limit was used.

    At cos 2A = 0 the product is replaced by its limit t gamma sin(2A) / 2.
    """
    c2 = math.cos(2 * A)
    if abs(c2) < SINGULAR_TOL:
        return t * gamma * math.sin(2 * A) / 2, True
    return -math.expm1(-t * gamma * c2 / 2) * math.tan(2 * A), False


def rho_with_feedback(t: float, gamma: float, A: float) -> tuple[float, float]:
    """(rho_ee, rho_eg) under feedback with beta = 0, no drive."""
    gq = gamma * math.cos(A) ** 2
    y, _ = y_factor(t, gamma, A)
    return math.exp(-t * gq) / 2, math.exp(-t * gamma / 2) / 2 * (1 + y)


def qfi_dephasing_case(t: float, gamma: float) -> float:
    """QFI at A = pi/2: t^2 / (4 (e^{t gamma} - 1))."""
    return t * t / (4 * math.expm1(t * gamma))


def qfi_longtime_feedback(t: float, gamma: float) -> float:
    """Long-time QFI at A = pi/3: e^{-t gamma/4} t^2 / 32."""
    return math.exp(-t * gamma / 4) * t * t / 32


def mixed_etas(t: float, gamma: float) -> tuple[float, float, float, float, float]:
    E = math.exp
    tg = t * gamma
    eta1 = -E(3 * tg / 2) * t * t / 2
    eta2 = (-12 * E(3 * tg / 4) + 6 * E(tg)) * t * t
    eta3 = 6 * E(tg / 2) * t * t
    eta4 = 8 * (E(3 * tg / 2) + 3 * (E(tg) - 2 * E(5 * tg / 4) + E(3 * tg) / 2))
    eta5 = -8 * E(7 * tg / 4)
    return eta1, eta2, eta3, eta4, eta5


def qfi_mixed_as_printed(t: float, gamma: float, epsilon: float) -> float:
    """Mixed-state QFI closed form at A = pi/3, verbatim. Negative on part of its domain."""
    e1, e2, e3, e4, e5 = mixed_etas(t, gamma)
    eps = epsilon
    return (e1 * eps + e2 * eps**2 + e3 * eps**3) / (e4 * eps + e5)


def zeta(epsilon: float) -> float:
    """Short-time enhancing factor eps (1 + 12 eps - 12 eps^2) / (16 (1 - eps))."""
    if not 0 <= epsilon < 1:
        raise ValueError(f"zeta needs epsilon in [0, 1), got {epsilon}")
    return epsilon * (1 + 12 * epsilon - 12 * epsilon**2) / (16 * (1 - epsilon))


def qfi_mixed_limits(t: float, gamma: float, epsilon: float, which: str) -> float:
    if which == "small-t":
        return zeta(epsilon) * t * t
    if which == "long-t":
        return epsilon * math.exp(-t * gamma / 4) * t * t / 16
    if which == "no-feedback":
        return epsilon * t * t / (math.exp(t * gamma) - epsilon)
    raise ValueError(f"unknown limit {which!r}")


def steady_terms(omega: float, gamma: float, A: float, beta: float) -> tuple[complex, float]:
    n = omega * complex(omega * math.sin(2 * A) * math.cos(beta), -math.cos(A) ** 2 * gamma)
    m = omega * math.sin(2 * A) * gamma * math.sin(beta) + 2 * omega**2 + math.cos(A) ** 2 * gamma**2
    return n, m


def steady_closed_form(omega: float, gamma: float, A: float, beta: float = 0.0) -> tuple[float, complex]:
    """Driven steady state (rho_ee, rho_eg) = (Omega^2 / M, N / M)."""
    n, m = steady_terms(omega, gamma, A, beta)
    if m <= 0:
        raise ValueError(f"steady-state denominator M = {m!r} is not positive")
    return omega**2 / m, n / m


def qfi_steady_closed_form(omega: float, gamma: float) -> float:
    """Steady-state QFI about gamma at A = pi/3, beta = 0."""
    w2, g2 = omega**2, gamma**2
    return 16 * w2 * (3 * g2 + w2) / ((3 * g2 + 4 * w2) * (g2 + 8 * w2) ** 2)


def chi(omega: float, gamma: float) -> float:
    return gamma**2 / 2 + 4 * omega**2


def steady_excited_population_inline(omega: float, gamma: float) -> float:
    """Inline A = pi/3 shortcut Omega^2 / chi. Off by a factor 2 from Omega^2 / M."""
    return omega**2 / chi(omega, gamma)


def steady_coherence_inline(omega: float, gamma: float) -> complex:
    return omega * complex(math.sqrt(3) * omega, -gamma / 2) / chi(omega, gamma)


def closed_form_terms(t: float, gamma: float, A: float, beta: float = 0.0, omega: float = 0.0,
                      epsilon: float = 0.5) -> ClosedFormTerms:
    n, m = steady_terms(omega, gamma, A, beta)
    return ClosedFormTerms(
        gamma_q=gamma * math.cos(A) ** 2,
        y_factor=y_factor(t, gamma, A)[0],
        eta=mixed_etas(t, gamma),
        zeta=zeta(epsilon),
        chi=chi(omega, gamma),
        n_num=n,
        m_den=m,
    )


def strong_drive_coherence(A: float, beta: float) -> complex:
    """Limit of N / M as Omega -> infinity: sin(2A) cos(beta) / 2."""
    return complex(math.sin(2 * A) * math.cos(beta) / 2, 0.0)

