import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfl import oracles
from qfl.dynamics import PureState, SensitivityPair, initial_state, propagate
from qfl.metrology import (
    _grid_then_golden,
    bures_distance,
    classical_fisher,
    fidelity,
    golden_section_max,
    maximize_qfi_over_time,
    optimal_drive,
    qfi,
    qfi_closed_2x2,
    qfi_from_bures,
    qfi_matrix_steady,
    qfi_spectral,
    qfi_time_series,
    sld,
    sld_eigenbasis_povm,
    sld_residual,
    steady_qfi,
)
from qfl.model import FeedbackParams, QubitModelParams, qubit_liouvillian

from conftest import random_density, random_hermitian


def random_pair(rng, n, rank=None):
    rho = random_density(rng, n, rank)
    d = random_hermitian(rng, n)
    d -= np.trace(d).real / n * np.eye(n)
    return SensitivityPair(rho, d)


def pure_pair(theta):
    psi = np.array([math.cos(theta), math.sin(theta)], dtype=complex)
    dpsi = np.array([-math.sin(theta), math.cos(theta)], dtype=complex)
    return SensitivityPair(np.outer(psi, psi.conj()), np.outer(dpsi, psi.conj()) + np.outer(psi, dpsi.conj()))


def test_closed_form_and_spectral_agree_on_random_qubits(rng):
    worst = 0.0
    for _ in range(100):
        p = random_pair(rng, 2)
        a, b = qfi_closed_2x2(p), qfi_spectral(p)
        assert a.method == "closed-2x2"
        worst = max(worst, abs(a.value - b.value) / b.value)
    assert worst <= 1e-8


@pytest.mark.parametrize("n", [2, 3, 4])
def test_sld_solves_lyapunov_equation(rng, n):
    for _ in range(10):
        p = random_pair(rng, n)
        L = sld(p)
        assert sld_residual(p, L) <= 1e-9
        # F = Tr(rho L^2)
        assert qfi(p).value == pytest.approx(np.trace(p.rho @ L @ L).real, rel=1e-10)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_sld_eigenbasis_measurement_is_optimal(rng, n):
    for _ in range(10):
        p = random_pair(rng, n)
        res = qfi(p)
        cfi = classical_fisher(sld_eigenbasis_povm(res.sld), p).value
        assert cfi == pytest.approx(res.value, rel=1e-8)


def test_classical_fisher_never_exceeds_qfi(rng):
    for _ in range(20):
        p = random_pair(rng, 3)
        basis = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))[0]
        povm = [np.outer(basis[:, k], basis[:, k].conj()) for k in range(3)]
        assert classical_fisher(povm, p).value <= qfi(p).value * (1 + 1e-10)


def test_classical_fisher_validates_povm():
    p = pure_pair(0.3)
    with pytest.raises(ValueError, match="identity"):
        classical_fisher([np.diag([1.0, 0.0])], p)
    with pytest.raises(ValueError, match="positive"):
        classical_fisher([np.diag([1.5, 1.0]), np.diag([-0.5, 0.0])], p)


@pytest.mark.parametrize("theta", [0.1, math.pi / 4, 1.2])
def test_pure_state_qfi_is_four(theta):
    # |psi> = cos(t)|e> + sin(t)|g> has F = 4 (<dpsi|dpsi> - |<psi|dpsi>|^2) = 4
    res = qfi(pure_pair(theta))
    assert res.value == pytest.approx(4.0, rel=1e-10)
    assert "closed-form-fallback" in res.flags
    assert "rank-deficient" in res.flags


def test_degenerate_spectrum_uses_bures_fallback():
    d = np.zeros((3, 3), dtype=complex)
    d[0, 1] = d[1, 0] = 0.1
    res = qfi_spectral(SensitivityPair(np.eye(3) / 3, d))
    assert res.method == "bures-fd"
    # maximally mixed state: L = 3 d rho, F = 3 Tr(d rho^2)
    assert res.value == pytest.approx(3 * np.trace(d @ d).real, rel=1e-6)


def test_fidelity_and_bures_distance(rng):
    rho = random_density(rng, 3)
    assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-12)
    assert bures_distance(rho, rho) == pytest.approx(0.0, abs=1e-6)
    e, g = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    assert bures_distance(e, g) == pytest.approx(math.sqrt(2))
    with pytest.raises(ValueError):
        bures_distance(e, np.eye(3) / 3)


def test_bures_route_matches_qfi_on_pipeline():
    fb = FeedbackParams(math.pi / 3)

    def family(gamma):
        L = qubit_liouvillian(QubitModelParams(gamma, 0.0), fb)
        return propagate(L, initial_state(PureState()), [10.0])[0]

    ref = qfi_time_series(QubitModelParams(0.1), fb, PureState(), [10.0])[0].value
    est = qfi_from_bures(family, 0.1, 1e-4)
    assert est == pytest.approx(ref, rel=1e-6)
    assert qfi_from_bures(family, 0.1, 1e-4, richardson=True) == pytest.approx(ref, rel=1e-7)


def test_precision_bound():
    res = qfi(pure_pair(0.2))
    assert res.precision_bound == pytest.approx(0.25)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 3.0), st.floats(-2, 2))
def test_qfi_scales_quadratically_with_reparametrization(scale, theta):
    p = pure_pair(theta)
    base = qfi(SensitivityPair(0.9 * p.rho + 0.05 * np.eye(2), 0.9 * p.drho)).value
    scaled = qfi(SensitivityPair(0.9 * p.rho + 0.05 * np.eye(2), 0.9 * scale * p.drho)).value
    assert scaled == pytest.approx(scale**2 * base, rel=1e-9)


def test_golden_section():
    x, fx = golden_section_max(lambda x: -(x - 0.3) ** 2, -1.0, 2.0, 1e-10)
    assert x == pytest.approx(0.3, abs=1e-8)
    assert fx == pytest.approx(0.0, abs=1e-15)


def test_grid_scan_flags():
    grid = np.linspace(0, 1, 201)
    _, _, _, flags = _grid_then_golden(lambda x: x, grid, 1e-8)
    assert flags == ("maximum-at-window-edge",)
    x, fx, _, flags = _grid_then_golden(lambda x: math.sin(12 * x) + 0.1 * x, grid, 1e-10)
    assert flags == ("multimodal",)
    # the global peak near 5 pi / 24 is refined
    assert fx >= max(math.sin(12 * g) + 0.1 * g for g in grid)
    assert abs(12 * math.cos(12 * x) + 0.1) < 1e-6
    x, _, _, flags = _grid_then_golden(lambda x: -(x - 0.4321) ** 2, grid, 1e-10)
    assert flags == () and x == pytest.approx(0.4321, abs=1e-8)


def test_fm_without_feedback_matches_closed_form_maximum():
    # oracle: dense maximization of the closed-form QFI
    ts = np.linspace(1, 60, 200001)
    vals = np.array([oracles.qfi_no_feedback(t, 0.1) for t in ts])
    k = int(np.argmax(vals))
    res = maximize_qfi_over_time(QubitModelParams(0.1), FeedbackParams(math.pi), PureState(), (0, 400))
    assert res.f_max == pytest.approx(vals[k], rel=1e-8)
    assert res.t_star == pytest.approx(ts[k], abs=1e-3)
    assert res.flags == ()


def test_optimal_drive_matches_closed_form():
    ws = np.linspace(1e-4, 0.2, 200001)
    vals = np.array([oracles.qfi_steady_closed_form(w, 0.1) for w in ws])
    k = int(np.argmax(vals))
    res = optimal_drive(0.1, FeedbackParams(math.pi / 3))
    assert res.omega_m == pytest.approx(ws[k], abs=1e-5)
    assert res.f_max == pytest.approx(vals[k], rel=1e-9)
    at_zero = steady_qfi(0.1, 0.0, FeedbackParams(math.pi / 3))
    assert at_zero.value <= 1e-20
    assert "closed-form-fallback" in at_zero.flags


def test_qfim_follows_chain_rule():
    g, kappa = 0.5, 2.0
    F = qfi_matrix_steady(g, kappa, 0.1, FeedbackParams(math.pi / 3))
    f_gamma = steady_qfi(g * g / kappa, 0.1, FeedbackParams(math.pi / 3)).value
    assert F.entries[0, 0] == pytest.approx((2 * g / kappa) ** 2 * f_gamma, rel=1e-12)
    assert F.entries[1, 1] == pytest.approx((g / kappa) ** 4 * f_gamma, rel=1e-12)
    assert F.entries[0, 1] == F.entries[1, 0]
    assert abs(F.det) <= 1e-12 * F.entries[0, 0] * F.entries[1, 1]
