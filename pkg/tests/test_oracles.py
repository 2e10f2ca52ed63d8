import math

import pytest
from hypothesis import given, settings, strategies as st

from qfl import oracles

G = 0.1
PI = math.pi


@pytest.mark.parametrize("t,expected", [(1.0, 2.60329234070), (10.0, 23.7464037010), (20.0, 29.1852925986),
                                        (50.0, 8.45100119087)])
def test_no_feedback_frozen_values(t, expected):
    assert oracles.qfi_no_feedback(t, G) == pytest.approx(expected, rel=1e-11)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 200), st.floats(0.01, 1))
def test_stable_form_equals_literal_form(t, gamma):
    assert oracles.qfi_no_feedback(t, gamma) == pytest.approx(oracles.qfi_no_feedback_direct(t, gamma), rel=1e-9)


def test_no_feedback_limits():
    assert oracles.qfi_no_feedback(0.0, G) == 0.0
    t = 1e-9
    assert oracles.qfi_no_feedback(t, G) == pytest.approx(oracles.qfi_short_time(t, G), rel=1e-9)
    t = 400.0
    assert oracles.qfi_no_feedback(t, G) == pytest.approx(oracles.qfi_long_time_no_feedback(t, G), rel=1e-12)


def test_dephasing_frozen_value():
    assert oracles.qfi_dephasing_case(10.0, G) == pytest.approx(14.5494176717, rel=1e-11)


def test_feedback_state_reduces_to_no_feedback_at_pi():
    for t in (0.5, 10.0, 80.0):
        ee, eg = oracles.rho_with_feedback(t, G, PI)
        ee0, eg0 = oracles.rho_no_feedback(t, G)
        assert ee == pytest.approx(ee0, rel=1e-14)
        assert eg == pytest.approx(eg0, rel=1e-12)


def test_y_factor_is_continuous_across_quarter_turn():
    t = 7.0
    at, flagged = oracles.y_factor(t, G, PI / 4)
    assert flagged
    near, flagged = oracles.y_factor(t, G, PI / 4 + 1e-7)
    assert not flagged
    assert near == pytest.approx(at, rel=1e-5)


def test_mixed_state_forms():
    assert oracles.qfi_mixed_as_printed(10.0, G, 0.5) == pytest.approx(-5.22965663223, rel=1e-10)
    assert oracles.qfi_mixed_limits(10.0, G, 0.5, "no-feedback") == pytest.approx(22.5399673561, rel=1e-10)
    assert oracles.zeta(0.5) == pytest.approx(0.25)
    # more initial excitation means more signal
    vals = [oracles.qfi_mixed_limits(10.0, G, e, "no-feedback") for e in (0.1, 0.4, 0.8)]
    assert vals == sorted(vals)
    with pytest.raises(ValueError):
        oracles.zeta(1.0)
    with pytest.raises(ValueError):
        oracles.qfi_mixed_limits(1.0, G, 0.5, "mid-t")


def test_steady_closed_form_values():
    ee, eg = oracles.steady_closed_form(0.1, G, PI / 3)
    assert ee == pytest.approx(4 / 9, rel=1e-13)
    assert eg.real == pytest.approx(0.3849001794597505, rel=1e-12)
    assert eg.imag == pytest.approx(-1 / 9, rel=1e-12)
    assert oracles.qfi_steady_closed_form(0.1, G) == pytest.approx(11.2874779541, rel=1e-10)
    with pytest.raises(ValueError, match="not positive"):
        oracles.steady_closed_form(0.0, 0.0, PI / 3)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 2), st.floats(0.01, 2))
def test_inline_shortcuts_at_pi_over_3(omega, gamma):
    ee, eg = oracles.steady_closed_form(omega, gamma, PI / 3)
    assert oracles.steady_coherence_inline(omega, gamma) == pytest.approx(eg, rel=1e-10)
    # the inline population is exactly half of Omega^2 / M
    assert oracles.steady_excited_population_inline(omega, gamma) == pytest.approx(ee / 2, rel=1e-10)


def test_strong_drive_limit():
    big = 1e6
    _, eg = oracles.steady_closed_form(big, G, PI / 3, 0.0)
    assert eg == pytest.approx(oracles.strong_drive_coherence(PI / 3, 0.0), rel=1e-6)


def test_closed_form_terms():
    terms = oracles.closed_form_terms(10.0, G, PI / 3, omega=0.1)
    assert terms.gamma_q == pytest.approx(G / 4)
    assert terms.chi == pytest.approx(G**2 / 2 + 0.04)
    assert terms.m_den == pytest.approx(2 * 0.01 + G**2 / 4)
    assert len(terms.eta) == 5
