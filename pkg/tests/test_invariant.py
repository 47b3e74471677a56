import numpy as np
import pytest
from hypothesis import given, strategies as st

from sta_swap import ProtocolConfig
from sta_swap.dynamics import propagate_columns
from sta_swap.hilbert import HilbertSpace
from sta_swap.invariant import (
    EffectiveBasis,
    align_global_phase,
    build_invariant,
    closed_form_final_state,
    dynamical_expansion,
    expansion_final_state,
    invariant_eigenstates,
    invariant_residual,
    lr_phase_quadrature,
    projected_final_state,
    reduced_hamiltonian,
)
from sta_swap.pulses import AngleSchedule, lr_phase, protocol_pulses

EPS, T_F = 0.25, 20.0
angle = st.floats(-np.pi, np.pi)

# Frozen (phi1, mu, phi5) values at eps = 0.25.
CLOSED_FORM_FINAL = np.array([-0.01629959, -0.0005208j, -0.99986702])
PROPAGATED_FINAL = np.array([0.01629959, -0.0005208j, -0.99986702])


def test_effective_basis_orthonormal():
    B = EffectiveBasis.build(HilbertSpace()).matrix
    assert np.allclose(B.conj().T @ B, np.eye(3))


@given(angle, angle, st.floats(0.1, 10.0))
def test_invariant_spectrum(nu, beta, chi):
    I = build_invariant(nu, beta, chi)
    assert np.allclose(I, I.conj().T)
    w = np.linalg.eigvalsh(I)
    assert np.allclose(w, np.array([-1, 0, 1]) * chi / np.sqrt(2), atol=1e-12 * chi)


def test_invariant_at_right_angle():
    I = build_invariant(np.pi / 2, 0.7)
    assert abs(I[1, 0]) < 1e-16 and abs(I[1, 2]) < 1e-16
    assert I[2, 0] == pytest.approx(1j / np.sqrt(2))


def test_invariant_decoupled_row():
    I = build_invariant(0.0, 0.0)
    assert np.allclose(I @ np.array([1, 0, 0]), 0)
    assert I[1, 2] == pytest.approx(1 / np.sqrt(2))


@given(angle, angle)
def test_eigenstates_orthonormal(nu, beta):
    modes = invariant_eigenstates(nu, beta)
    M = np.column_stack([modes[k] for k in (0, 1, -1)])
    assert np.allclose(M.conj().T @ M, np.eye(3), atol=1e-12)
    I = build_invariant(nu, beta)
    for k, v in modes.items():
        assert np.allclose(I @ v, k / np.sqrt(2) * v, atol=1e-12)


def test_dark_mode_values():
    phi0 = invariant_eigenstates(EPS, 0.0)[0]
    assert np.allclose(phi0, [0.96891242, -0.24740396j, 0], atol=1e-8)


def test_residual_on_grid():
    pulses = protocol_pulses(EPS, T_F)
    angles = AngleSchedule.protocol(EPS, T_F)
    assert max(invariant_residual(t, pulses, angles) for t in np.linspace(0, T_F, 200)) < 1e-10


def test_residual_scales_with_chi():
    pulses = protocol_pulses(EPS, T_F)
    angles = AngleSchedule.protocol(EPS, T_F)
    assert invariant_residual(3.0, pulses, angles, chi=5.0) < 5e-10


def test_residual_for_static_hamiltonian():
    angles = AngleSchedule.protocol(EPS, T_F)
    r = invariant_residual(4.0, protocol_pulses(EPS, T_F).scaled(0.0), angles)
    # |dI/dt| for a beta sweep at pi/(2 t_f): eigenvalues of the derivative
    assert r > 0.05


def test_residual_detects_wrong_amplitude():
    angles = AngleSchedule.protocol(EPS, T_F)
    assert invariant_residual(10.0, protocol_pulses(EPS, T_F, 0.5), angles) > 1e-3


def test_expansion_of_mode():
    for k, idx in ((0, 0), (1, 1), (-1, 2)):
        c = dynamical_expansion(invariant_eigenstates(0.4, 1.2)[k], 0.4, 1.2)
        assert np.allclose(np.abs(c), np.eye(3)[idx], atol=1e-12)


def test_expansion_of_phi1():
    c = dynamical_expansion(np.array([1, 0, 0]), EPS, 0.0)
    assert c[0] == pytest.approx(0.96891, abs=1e-5)
    assert abs(c[1]) == pytest.approx(0.17494, abs=1e-5)
    assert abs(c[2]) == pytest.approx(0.17494, abs=1e-5)


def test_quadrature_matches_closed_form():
    quad = lr_phase_quadrature(EPS, T_F)
    closed = lr_phase(EPS)
    assert quad.alpha_plus == pytest.approx(closed.alpha_plus, abs=1e-9)
    assert quad.alpha_minus == pytest.approx(closed.alpha_minus, abs=1e-9)
    assert quad.alpha_plus == pytest.approx(-6.349115557924, abs=1e-9)


def test_closed_form_at_transfer_angle():
    assert np.allclose(closed_form_final_state(np.arcsin(0.25)), [0, 0, -1], atol=1e-14)


def test_closed_form_frozen():
    psi = closed_form_final_state(EPS)
    assert np.allclose(psi, CLOSED_FORM_FINAL, atol=1e-8)
    assert abs(psi[2]) ** 2 == pytest.approx(0.99974, abs=1e-5)
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)


def test_symmetric_model_propagation():
    pulses = protocol_pulses(EPS, T_F)
    psi = propagate_columns(lambda t: reduced_hamiltonian(pulses, t), np.array([1, 0, 0], complex),
                            T_F, T_F / 4000)
    assert np.allclose(psi, PROPAGATED_FINAL, atol=1e-7)
    assert np.allclose(psi, expansion_final_state(EPS), atol=1e-10)


def test_symmetric_model_differs_from_closed_form_in_phi1_sign():
    # same populations, opposite relative sign of the phi1 amplitude
    exp, pub = expansion_final_state(EPS), closed_form_final_state(EPS)
    assert np.allclose(np.abs(exp), np.abs(pub), atol=1e-12)
    assert exp[0].real == pytest.approx(-pub[0].real, abs=1e-12)


def test_projected_dynamics_reproduce_closed_form():
    psi = projected_final_state(ProtocolConfig())
    assert np.allclose(psi, -CLOSED_FORM_FINAL, atol=1e-7)
    assert np.allclose(align_global_phase(psi, CLOSED_FORM_FINAL), CLOSED_FORM_FINAL, atol=1e-7)


def test_expansion_perfect_transfer():
    eps = np.arcsin(0.25)
    assert np.allclose(expansion_final_state(eps), [0, 0, -1], atol=1e-12)


def test_align_global_phase():
    v = np.array([0.6, 0.8j])
    assert np.allclose(align_global_phase(np.exp(1.3j) * v, v), v)
    with pytest.raises(ValueError):
        align_global_phase(np.array([1, 0]), np.array([0, 1]))
