"""Lewis-Riesenfeld invariant of the reduced three-level dynamics.

All 3-vectors and 3x3 matrices here use the ordered basis (phi1, mu, phi5),
where phi1 = |01>|0>, phi5 = |1a>|0> and mu = (-|e1>|0> + |1e>|0>)/sqrt(2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .hilbert import AtomLevel, BasisState, HilbertSpace
from .pulses import (
    ZENO_FACTOR,
    SQRT2,
    AngleSchedule,
    PhaseRecord,
    PulseSchedule,
    lr_phase,
    protocol_pulses,
)
from .zeno import model_dark_hamiltonian

G0, G1, GA, EE, UU = AtomLevel
LABELS = ("phi1", "mu", "phi5")


@dataclass(frozen=True)
class EffectiveBasis:
    phi1: np.ndarray
    mu: np.ndarray
    phi5: np.ndarray

    labels = LABELS

    @classmethod
    def build(cls, space: HilbertSpace) -> "EffectiveBasis":
        phi2 = space.ket(BasisState(EE, G1, 0))
        phi4 = space.ket(BasisState(G1, EE, 0))
        return cls(
            phi1=space.ket(BasisState(G0, G1, 0)),
            mu=(phi4 - phi2) / SQRT2,
            phi5=space.ket(BasisState(G1, GA, 0)),
        )

    @property
    def matrix(self) -> np.ndarray:
        """dim x 3 isometry with columns (phi1, mu, phi5)."""
        return np.column_stack([self.phi1, self.mu, self.phi5])

    def embed(self, c: np.ndarray) -> np.ndarray:
        return self.matrix @ c

    def project(self, psi: np.ndarray) -> np.ndarray:
        return self.matrix.conj().T @ psi


def _invariant_from(c_mu_phi1, c_mu_phi5, c_phi5_phi1) -> np.ndarray:
    m = np.zeros((3, 3), dtype=complex)
    m[1, 0] = c_mu_phi1
    m[1, 2] = c_mu_phi5
    m[2, 0] = c_phi5_phi1
    return m + m.conj().T


def build_invariant(nu: float, beta: float, chi: float = 1.0) -> np.ndarray:
    """Hermitian invariant I(nu, beta); its spectrum is {0, +-chi/sqrt(2)}."""
    s = chi / SQRT2
    return _invariant_from(s * np.cos(nu) * np.sin(beta), s * np.cos(nu) * np.cos(beta),
                           s * 1j * np.sin(nu))


def invariant_time_derivative(nu: float, beta: float, nu_dot: float, beta_dot: float,
                              chi: float = 1.0) -> np.ndarray:
    s = chi / SQRT2
    d_mu_phi1 = s * (-np.sin(nu) * np.sin(beta) * nu_dot + np.cos(nu) * np.cos(beta) * beta_dot)
    d_mu_phi5 = s * (-np.sin(nu) * np.cos(beta) * nu_dot - np.cos(nu) * np.sin(beta) * beta_dot)
    d_phi5_phi1 = s * 1j * np.cos(nu) * nu_dot
    return _invariant_from(d_mu_phi1, d_mu_phi5, d_phi5_phi1)


def invariant_eigenstates(nu: float, beta: float) -> dict[int, np.ndarray]:
    """Eigenvectors keyed by the sign of their eigenvalue: 0, +1, -1."""
    cn, sn, cb, sb = np.cos(nu), np.sin(nu), np.cos(beta), np.sin(beta)
    states = {0: np.array([cn * cb, -1j * sn, -cn * sb])}
    for k in (1, -1):
        states[k] = np.array([sn * cb + k * 1j * sb, 1j * cn, -(sn * sb - k * 1j * cb)]) / SQRT2
    return states


def _eigenstate_derivatives(nu, beta, nu_dot, beta_dot) -> dict[int, np.ndarray]:
    cn, sn, cb, sb = np.cos(nu), np.sin(nu), np.cos(beta), np.sin(beta)
    d = {0: nu_dot * np.array([-sn * cb, -1j * cn, sn * sb])
         + beta_dot * np.array([-cn * sb, 0, -cn * cb])}
    for k in (1, -1):
        d_nu = np.array([cn * cb, -1j * sn, -cn * sb]) / SQRT2
        d_beta = np.array([-sn * sb + k * 1j * cb, 0, -(sn * cb + k * 1j * sb)]) / SQRT2
        d[k] = nu_dot * d_nu + beta_dot * d_beta
    return d


def reduced_hamiltonian(pulses: PulseSchedule, t: float) -> np.ndarray:
    om_i, om_t = pulses(t)
    return model_dark_hamiltonian(om_i, om_t)


def invariant_residual(t: float, pulses: PulseSchedule, angles: AngleSchedule,
                       chi: float = 1.0) -> float:
    """Spectral norm of i dI/dt - [H(t), I(t)] for the reduced Hamiltonian."""
    nu, beta = angles.nu(t), angles.beta(t)
    I = build_invariant(nu, beta, chi)
    dI = invariant_time_derivative(nu, beta, angles.nu_dot(t), angles.beta_dot(t), chi)
    H = reduced_hamiltonian(pulses, t)
    return float(np.linalg.norm(1j * dI - (H @ I - I @ H), 2))


def dynamical_expansion(state: np.ndarray, nu: float, beta: float) -> np.ndarray:
    """Coefficients (C0, C+, C-) of ``state`` in the instantaneous invariant eigenbasis."""
    modes = invariant_eigenstates(nu, beta)
    return np.array([np.vdot(modes[k], state) for k in (0, 1, -1)])


def lr_phase_quadrature(epsilon: float, t_f: float, pulses: PulseSchedule | None = None) -> PhaseRecord:
    """Integrate <Phi_n| i d/dt - H |Phi_n> over one step for the +- modes."""
    if pulses is None:
        pulses = protocol_pulses(epsilon, t_f, ZENO_FACTOR)
    angles = AngleSchedule.protocol(epsilon, t_f)

    def integrand(t, k):
        nu, beta = angles.nu(t), angles.beta(t)
        phi = invariant_eigenstates(nu, beta)[k]
        dphi = _eigenstate_derivatives(nu, beta, angles.nu_dot(t), angles.beta_dot(t))[k]
        return np.vdot(phi, 1j * dphi - reduced_hamiltonian(pulses, t) @ phi).real

    plus = quad(integrand, 0.0, t_f, args=(1,), epsabs=1e-12, epsrel=1e-12)[0]
    minus = quad(integrand, 0.0, t_f, args=(-1,), epsabs=1e-12, epsrel=1e-12)[0]
    return PhaseRecord(alpha_plus=plus, alpha_minus=minus)


def closed_form_final_state(epsilon: float) -> np.ndarray:
    """Closed-form step-1 state at t_f, started from phi1.

    With alpha = pi / (2 sin(epsilon)):
    (-sin e sin a, i sin e cos e (cos a - 1), -(cos^2 e + sin^2 e cos a)).
    """
    if not 0 < epsilon < np.pi / 2:
        raise ValueError(f"epsilon must lie in (0, pi/2), got {epsilon}")
    a = np.pi / (2.0 * np.sin(epsilon))
    se, ce = np.sin(epsilon), np.cos(epsilon)
    return np.array([
        -se * np.sin(a),
        1j * se * ce * (np.cos(a) - 1.0),
        -(ce ** 2 + se ** 2 * np.cos(a)),
    ])


def expansion_final_state(epsilon: float, initial: np.ndarray | None = None) -> np.ndarray:
    """State at t_f rebuilt from the dynamical-mode expansion.

    Each invariant mode keeps its amplitude and acquires its LR phase; this
    is what direct propagation under the reduced Hamiltonian produces.
    """
    if initial is None:
        initial = np.array([1.0, 0.0, 0.0], dtype=complex)
    coeffs = dynamical_expansion(initial, epsilon, 0.0)
    phases = lr_phase(epsilon)
    final_modes = invariant_eigenstates(epsilon, np.pi / 2)
    alpha = {0: 0.0, 1: phases.alpha_plus, -1: phases.alpha_minus}
    return sum(c * np.exp(1j * alpha[k]) * final_modes[k] for c, k in zip(coeffs, (0, 1, -1)))


def projected_final_state(config=None) -> np.ndarray:
    """Step-1 state at t_f, started from phi1, under the Zeno-projected dark Hamiltonian.

    Unlike :func:`reduced_hamiltonian` this uses the projection of the full
    cavity model, whose phi1 leg carries the opposite sign.  Returned in
    (phi1, mu, phi5) coordinates.
    """
    from .config import ProtocolConfig
    from .dynamics import build_step_hamiltonian
    from .zeno import dark_hamiltonian, effective_propagator

    config = config or ProtocolConfig()
    H = build_step_hamiltonian(1, config.replace(signs=((1, 1),) * 3))
    eff = dark_hamiltonian(H, BasisState(G0, G1, 0))
    U = effective_propagator(eff, config.t_f, config.dt)
    basis = EffectiveBasis.build(config.space)
    start = eff.basis.conj().T @ basis.phi1
    return basis.project(eff.basis @ (U @ start))


def align_global_phase(state: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """``state`` times the unit phase that makes its overlap with ``reference`` real and positive."""
    overlap = np.vdot(reference, state)
    if abs(overlap) < 1e-14:
        raise ValueError("states are orthogonal; global phase undefined")
    return state * (abs(overlap) / overlap)
