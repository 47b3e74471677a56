"""Invariant-based inverse engineering of the Rabi-frequency pair.

Time is measured in units of 1/g0 and frequencies in units of g0.  The
auxiliary angles (nu, beta) parametrize the invariant; the relations

    nu_dot   = (Om_i cos(beta) - Om_t sin(beta)) / sqrt(2)
    beta_dot = tan(nu) (Om_t cos(beta) + Om_i sin(beta)) / sqrt(2)

link them to the pulse on the initial-state leg (Om_i) and on the target-state
leg (Om_t).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

SQRT2 = np.sqrt(2.0)

#: Prefactor pi/(sqrt(2) t_f) cot(eps) for the Zeno-reduced steps.
ZENO_FACTOR = 1.0 / SQRT2
#: Prefactor pi/(2 t_f) cot(eps) for a directly driven Lambda system.
LAMBDA_FACTOR = 0.5


class SingularityError(ValueError):
    """cot(nu) is undefined at the requested time."""


@dataclass(frozen=True)
class AngleSchedule:
    nu: Callable[[float], float]
    beta: Callable[[float], float]
    nu_dot: Callable[[float], float]
    beta_dot: Callable[[float], float]

    @classmethod
    def protocol(cls, epsilon: float, t_f: float) -> "AngleSchedule":
        """Constant nu = epsilon and a linear beta sweep from 0 to pi/2."""
        rate = np.pi / (2.0 * t_f)
        return cls(
            nu=lambda t: epsilon + 0.0 * np.asarray(t, dtype=float),
            beta=lambda t: rate * np.asarray(t, dtype=float),
            nu_dot=lambda t: 0.0 * np.asarray(t, dtype=float),
            beta_dot=lambda t: rate + 0.0 * np.asarray(t, dtype=float),
        )

    @classmethod
    def static(cls, nu: float, beta: float) -> "AngleSchedule":
        zero = lambda t: 0.0 * np.asarray(t, dtype=float)  # noqa: E731
        return cls(nu=lambda t: nu + zero(t), beta=lambda t: beta + zero(t),
                   nu_dot=zero, beta_dot=zero)


@dataclass(frozen=True)
class PulseSchedule:
    """Sine/cosine pulse pair of a single protocol step.

    ``omega_initial`` rises from zero and drives the leg attached to the
    initial state; ``omega_target`` falls to zero and drives the target leg.
    The sign factors are laser phases and multiply the respective pulse.
    """

    amplitude: float
    t_f: float
    sign_initial: int = 1
    sign_target: int = 1

    def __post_init__(self):
        if self.t_f <= 0:
            raise ValueError("t_f must be positive")
        if self.sign_initial not in (1, -1) or self.sign_target not in (1, -1):
            raise ValueError("sign factors must be +1 or -1")

    def omega_initial(self, t):
        return self.sign_initial * self.amplitude * np.sin(np.pi * np.asarray(t) / (2.0 * self.t_f))

    def omega_target(self, t):
        return self.sign_target * self.amplitude * np.cos(np.pi * np.asarray(t) / (2.0 * self.t_f))

    def __call__(self, t):
        return self.omega_initial(t), self.omega_target(t)

    @property
    def peak(self) -> float:
        return abs(self.amplitude)

    def scaled(self, factor: float) -> "PulseSchedule":
        return PulseSchedule(self.amplitude * factor, self.t_f, self.sign_initial, self.sign_target)

    def with_signs(self, sign_initial: int, sign_target: int) -> "PulseSchedule":
        return PulseSchedule(self.amplitude, self.t_f, sign_initial, sign_target)


def _check_epsilon(epsilon: float) -> None:
    if epsilon == 0:
        raise ZeroDivisionError("cot(epsilon) is singular at epsilon = 0")
    if not 0 < epsilon < np.pi / 2:
        raise ValueError(f"epsilon must lie in (0, pi/2), got {epsilon}")


def protocol_pulses(epsilon: float, t_f: float, amplitude_factor: float = ZENO_FACTOR,
                    sign_initial: int = 1, sign_target: int = 1) -> PulseSchedule:
    """Closed-form pulse pair for nu = epsilon, beta = pi t / (2 t_f).

    The peak Rabi frequency is ``amplitude_factor * pi / t_f * cot(epsilon)``;
    ``amplitude_factor = 1/sqrt(2)`` gives the Zeno-reduced amplitude and
    ``1/2`` the one needed when the three-level system is driven directly.
    """
    _check_epsilon(epsilon)
    if t_f <= 0:
        raise ValueError("t_f must be positive")
    if amplitude_factor <= 0:
        raise ValueError("amplitude_factor must be positive")
    amplitude = amplitude_factor * np.pi / t_f / np.tan(epsilon)
    return PulseSchedule(amplitude, t_f, sign_initial, sign_target)


def inverse_engineer(angles: AngleSchedule, t):
    """Pulse pair that makes ``angles`` the auxiliary angles of the invariant."""
    nu, beta = angles.nu(t), angles.beta(t)
    nu_dot, beta_dot = angles.nu_dot(t), angles.beta_dot(t)
    s = np.sin(nu)
    if np.any(np.abs(s) < 1e-14):
        raise SingularityError(f"sin(nu) vanishes at t={t}")
    cot = np.cos(nu) / s
    om_i = SQRT2 * (beta_dot * cot * np.sin(beta) + nu_dot * np.cos(beta))
    om_t = SQRT2 * (beta_dot * cot * np.cos(beta) - nu_dot * np.sin(beta))
    return om_i, om_t


def angle_ode_residual(angles: AngleSchedule, pulses: PulseSchedule, t):
    """Residuals of the auxiliary-angle equations; zero for a consistent pair."""
    om_i, om_t = pulses(t)
    beta = angles.beta(t)
    r_nu = angles.nu_dot(t) - (om_i * np.cos(beta) - om_t * np.sin(beta)) / SQRT2
    r_beta = angles.beta_dot(t) - np.tan(angles.nu(t)) * (om_t * np.cos(beta) + om_i * np.sin(beta)) / SQRT2
    return r_nu, r_beta


@dataclass(frozen=True)
class PhaseRecord:
    alpha_plus: float
    alpha_minus: float

    @property
    def magnitude(self) -> float:
        return abs(self.alpha_plus)


def lr_phase(epsilon: float) -> PhaseRecord:
    """Lewis-Riesenfeld phases of the |Phi_+-> modes accumulated over one step.

    The magnitude is pi / (2 sin(epsilon)).  The mode with invariant
    eigenvalue +1 picks up the negative phase; see
    :func:`sta_swap.invariant.lr_phase_quadrature` for the numerical check.
    """
    if not 0 < epsilon <= np.pi / 2:
        raise ValueError(f"epsilon must lie in (0, pi/2], got {epsilon}")
    alpha = np.pi / (2.0 * np.sin(epsilon))
    return PhaseRecord(alpha_plus=-alpha, alpha_minus=alpha)


def transfer_epsilon(n: int = 1) -> float:
    """Angle for which the LR phase magnitude equals 2 pi n (perfect transfer)."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    return float(np.arcsin(1.0 / (4.0 * n)))
