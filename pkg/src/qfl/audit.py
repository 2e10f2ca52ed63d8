"""Compare each closed form with the master-equation pipeline.

Every check carries a status: ``verified`` formulas must agree with the
pipeline, ``erratum`` formulas must disagree, and ``note`` rows are
informational. The audit passes when every check meets its expectation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import oracles
from .dynamics import MixedState, PureState, initial_state, propagate, steady_state
from .metrology import qfi_time_series, steady_qfi
from .model import FeedbackParams, QubitModelParams, qubit_liouvillian

GAMMA = 0.1
PI = math.pi


@dataclass(frozen=True)
class Check:
    name: str
    status: str
    point: str
    oracle: complex
    pipeline: complex
    error: float
    tolerance: float
    relative: bool = True

    @property
    def agrees(self) -> bool:
        return self.error <= self.tolerance

    @property
    def passed(self) -> bool:
        if self.status == "verified":
            return self.agrees
        if self.status == "erratum":
            return not self.agrees
        return True


def _compare(name, status, point, oracle, pipeline, tol, relative=True) -> Check:
    diff = abs(complex(pipeline) - complex(oracle))
    err = diff / abs(complex(pipeline)) if relative else diff
    return Check(name, status, point, complex(oracle), complex(pipeline), float(err), tol, relative)


def _qfi(A, init, t, omega=0.0):
    return qfi_time_series(QubitModelParams(GAMMA, omega), FeedbackParams(A), init, [t])[0].value


def _rho(A, t):
    L = qubit_liouvillian(QubitModelParams(GAMMA), FeedbackParams(A))
    return propagate(L, initial_state(PureState()), [t])[0]


def run_audit() -> list[Check]:
    g = GAMMA
    pure = PureState()
    mixed = MixedState(0.5)
    checks: list[Check] = []
    add = checks.append

    r = _rho(PI, 10.0)
    ee, eg = oracles.rho_no_feedback(10.0, g)
    add(_compare("rho_no_feedback.ee", "verified", "t=10", ee, r[0, 0].real, 1e-6))
    add(_compare("rho_no_feedback.eg", "verified", "t=10", eg, r[0, 1], 1e-6))

    for t in (1.0, 5.0, 10.0, 20.0, 50.0):
        add(_compare("qfi_no_feedback", "verified", f"t={t:g}", oracles.qfi_no_feedback(t, g),
                     _qfi(PI, pure, t), 1e-6))
    for t in (0.01, 0.02):
        add(_compare("qfi_short_time", "verified", f"t={t:g}", oracles.qfi_short_time(t, g),
                     _qfi(PI, pure, t), 1e-2))
    add(_compare("qfi_long_time_no_feedback", "verified", "t=200",
                 oracles.qfi_long_time_no_feedback(200.0, g), _qfi(PI, pure, 200.0), 5e-2))

    r = _rho(PI / 3, 10.0)
    ee, eg = oracles.rho_with_feedback(10.0, g, PI / 3)
    add(_compare("rho_with_feedback.ee", "verified", "t=10 A=pi/3", ee, r[0, 0].real, 1e-6))
    add(_compare("rho_with_feedback.eg", "verified", "t=10 A=pi/3", eg, r[0, 1], 1e-6))

    add(_compare("qfi_dephasing_case", "verified", "t=10 A=pi/2", oracles.qfi_dephasing_case(10.0, g),
                 _qfi(PI / 2, pure, 10.0), 1e-6))
    add(_compare("qfi_longtime_feedback", "verified", "t=200 A=pi/3",
                 oracles.qfi_longtime_feedback(200.0, g), _qfi(PI / 3, pure, 200.0), 5e-2))

    add(_compare("qfi_mixed_small_t", "verified", "t=0.01 eps=0.5 A=pi/3",
                 oracles.qfi_mixed_limits(0.01, g, 0.5, "small-t"), _qfi(PI / 3, mixed, 0.01), 1e-2))
    add(_compare("qfi_mixed_long_t", "verified", "t=200 eps=0.5 A=pi/3",
                 oracles.qfi_mixed_limits(200.0, g, 0.5, "long-t"), _qfi(PI / 3, mixed, 200.0), 5e-2))
    add(_compare("qfi_mixed_no_feedback", "verified", "t=10 eps=0.5 A=pi",
                 oracles.qfi_mixed_limits(10.0, g, 0.5, "no-feedback"), _qfi(PI, mixed, 10.0), 1e-6))

    omega = 0.1
    fb = FeedbackParams(PI / 3)
    rho_s = steady_state(qubit_liouvillian(QubitModelParams(g, omega), fb))
    ee, eg = oracles.steady_closed_form(omega, g, PI / 3, 0.0)
    add(_compare("steady_closed_form.ee", "verified", "omega=0.1 A=pi/3", ee, rho_s[0, 0].real, 1e-10, False))
    add(_compare("steady_closed_form.eg", "verified", "omega=0.1 A=pi/3", eg, rho_s[0, 1], 1e-10, False))
    add(_compare("steady_coherence_inline", "verified", "omega=0.1 A=pi/3",
                 oracles.steady_coherence_inline(omega, g), rho_s[0, 1], 1e-10, False))
    add(_compare("qfi_steady_closed_form", "verified", "omega=0.1 A=pi/3",
                 oracles.qfi_steady_closed_form(omega, g), steady_qfi(g, omega, fb).value, 1e-6))

    add(_compare("qfi_mixed_as_printed", "erratum", "t=10 eps=0.5 A=pi/3",
                 oracles.qfi_mixed_as_printed(10.0, g, 0.5), _qfi(PI / 3, mixed, 10.0), 1e-2))
    add(_compare("steady_excited_population_inline", "erratum", "omega=0.1 A=pi/3",
                 oracles.steady_excited_population_inline(omega, g), rho_s[0, 0].real, 1e-10, False))

    strong = 100.0
    rho_strong = steady_state(qubit_liouvillian(QubitModelParams(g, strong), fb))
    add(_compare("strong_drive_coherence_zero_claim", "note", "omega=100 A=pi/3", 0.0,
                 rho_strong[0, 1], 1e-4, False))
    return checks


def errata(checks: list[Check]) -> list[str]:
    names = []
    for c in checks:
        if c.status == "erratum" and not c.agrees and c.name not in names:
            names.append(c.name)
    return names


def audit_passed(checks: list[Check]) -> bool:
    return all(c.passed for c in checks)


COLUMNS = ["check", "status", "point", "oracle", "pipeline", "error", "tolerance", "agrees", "outcome"]


def audit_rows(checks: list[Check]) -> list[tuple]:
    rows = []
    for c in checks:
        oracle = c.oracle if c.oracle.imag else c.oracle.real
        pipeline = c.pipeline if c.pipeline.imag else c.pipeline.real
        rows.append((c.name, c.status, c.point, oracle, pipeline, c.error, c.tolerance,
                     "yes" if c.agrees else "no", "pass" if c.passed else "FAIL"))
    return rows

