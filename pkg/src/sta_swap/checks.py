"""Named verification suites run by ``sta-swap check``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import NoiseModel, ProtocolConfig
from .dynamics import propagate_columns
from .hilbert import BasisState
from .invariant import (
    align_global_phase,
    build_invariant,
    closed_form_final_state,
    expansion_final_state,
    invariant_residual,
    lr_phase_quadrature,
    projected_final_state,
    reduced_hamiltonian,
)
from .pulses import AngleSchedule, angle_ode_residual, inverse_engineer, lr_phase
from .protocol import extract_gate, rank_sign_patterns, run_protocol
from .zeno import dark_leakage, zeno_error

ZENO_COUPLINGS = (5.0, 10.0, 20.0, 50.0)
# leakage out of the dark sector, in units of (peak Rabi frequency / g)^2
LEAKAGE_CONSTANT = 0.25


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    op: str = "<"

    @property
    def passed(self) -> bool:
        if self.op == "<":
            return self.value < self.threshold
        if self.op == "<=":
            return self.value <= self.threshold
        if self.op == ">=":
            return self.value >= self.threshold
        raise ValueError(self.op)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.value:.6g} (required {self.op} {self.threshold:.6g})"


def odes(config: ProtocolConfig) -> tuple[list[Check], list[str]]:
    angles = AngleSchedule.protocol(config.epsilon, config.t_f)
    pulses = config.step_pulses(1).with_signs(1, 1)
    t = np.linspace(0.0, config.t_f, 1001)
    r_nu, r_beta = angle_ode_residual(angles, pulses, t)
    om_i, om_t = inverse_engineer(angles, t)
    ref_i, ref_t = pulses(t)
    round_trip = max(np.abs(om_i - ref_i).max(), np.abs(om_t - ref_t).max())
    return [
        Check("nu_dot residual (max over grid)", float(np.abs(r_nu).max()), 1e-12),
        Check("beta_dot residual (max over grid)", float(np.abs(r_beta).max()), 1e-12),
        Check("inverse-engineered vs closed-form pulses", float(round_trip), 1e-12),
    ], [f"peak Rabi frequency {pulses.peak:.6f} g0, peak/g = {pulses.peak / config.g:.4f}"]


def invariant(config: ProtocolConfig) -> tuple[list[Check], list[str]]:
    eps, t_f = config.epsilon, config.t_f
    angles = AngleSchedule.protocol(eps, t_f)
    pulses = config.step_pulses(1).with_signs(1, 1)
    grid = np.linspace(0.0, t_f, 1000)
    residual = max(invariant_residual(t, pulses, angles) for t in grid)

    spectrum_err = 0.0
    rng = np.random.default_rng(7)
    for nu, beta in rng.uniform(0, np.pi, size=(20, 2)):
        w = np.linalg.eigvalsh(build_invariant(nu, beta))
        spectrum_err = max(spectrum_err, np.abs(w - np.array([-1, 0, 1]) / np.sqrt(2)).max())

    quad = lr_phase_quadrature(eps, t_f, pulses)
    closed = lr_phase(eps)
    phase_err = max(abs(quad.alpha_plus - closed.alpha_plus), abs(quad.alpha_minus - closed.alpha_minus))

    psi = propagate_columns(lambda t: reduced_hamiltonian(pulses, t), np.array([1, 0, 0], complex),
                            t_f, config.dt)
    expansion = expansion_final_state(eps)
    closed = closed_form_final_state(eps)
    projected = projected_final_state(config)
    aligned = align_global_phase(projected, closed)
    checks = [
        Check("invariant-equation residual on 1000-point grid", residual, 1e-10),
        Check("invariant spectrum vs {0, +-1/sqrt(2)}", spectrum_err, 1e-12),
        Check("LR phase: quadrature vs closed form (rad)", phase_err, 1e-6),
        Check("final state: propagation vs mode expansion", float(np.abs(psi - expansion).max()), 1e-4),
        Check("final state: projected dark dynamics vs closed form (global phase removed)",
              float(np.abs(aligned - closed).max()), 1e-4),
        Check("|c_phi5|^2 deviation from 0.99974", abs(abs(projected[2]) ** 2 - 0.99974), 1e-5),
    ]
    notes = [
        f"alpha_+ = {quad.alpha_plus:.9f}, alpha_- = {quad.alpha_minus:.9f}",
        "propagated (phi1, mu, phi5) = " + ", ".join(f"{c:.6f}" for c in psi),
        "projected   (phi1, mu, phi5) = " + ", ".join(f"{c:.6f}" for c in projected),
        "closed form (phi1, mu, phi5) = " + ", ".join(f"{c:.6f}" for c in closed),
    ]
    return checks, notes


def zeno(config: ProtocolConfig) -> tuple[list[Check], list[str]]:
    start = BasisState.parse("01")
    pulses = config.step_pulses(1)
    errors = [zeno_error(start, 1, config, g=g, pulses=pulses) for g in ZENO_COUPLINGS]
    notes = [f"g = {g:>5.1f} g0: ||psi_full - psi_eff|| = {e:.6e}" for g, e in zip(ZENO_COUPLINGS, errors)]
    worst_increase = max(b - a for a, b in zip(errors, errors[1:]))
    leak = dark_leakage(start, 1, config)
    bound = LEAKAGE_CONSTANT * (pulses.peak / config.g) ** 2
    return [
        Check("error increase between successive g (must be negative)", worst_increase, 0.0),
        Check(f"error at g = {config.g:g}", zeno_error(start, 1, config), 0.15, "<="),
        Check("peak dark-sector leakage", leak, bound, "<="),
    ], notes


def gate(config: ProtocolConfig) -> tuple[list[Check], list[str]]:
    calibration = rank_sign_patterns(config)
    notes = [f"pattern {p}: gate fidelity {f:.6f}" for p, f in calibration.fidelities.items()]
    notes.append(f"calibrated relative signs {calibration.pattern}, signs {calibration.signs}")
    result = calibration.gates[calibration.pattern]
    for label, col, leak in zip(("00", "01", "10", "11"), result.matrix.T, result.leakage):
        notes.append(f"input |{label}>: column {np.round(col, 4).tolist()}, leakage {leak:.4g}")
    return [
        Check("gate fidelity to SWAP", result.gate_fidelity, 0.99, ">="),
        Check("max |G - SWAP|", result.max_deviation, 0.05, "<="),
    ], notes


def convergence(config: ProtocolConfig) -> tuple[list[Check], list[str]]:
    noisy = config.replace(noise=NoiseModel(kappa=10.0, gamma=1.0, branching=config.noise.branching))
    f1 = run_protocol(noisy, mixed=True, sample_every=noisy.n_steps).fidelity
    f2 = run_protocol(noisy.replace(dt=noisy.dt / 2), mixed=True, sample_every=2 * noisy.n_steps).fidelity
    g1 = extract_gate(config.replace(n_max=1)).gate_fidelity
    g2 = extract_gate(config.replace(n_max=2)).gate_fidelity
    return [
        Check("fidelity change when halving dt (gamma=1, kappa=10)", abs(f1 - f2), 1e-6),
        Check("gate fidelity change for n_max 1 -> 2", abs(g1 - g2), 1e-8),
    ], [f"F(dt) = {f1:.9f}, F(dt/2) = {f2:.9f}", f"gate F(n_max=1) = {g1:.12f}, (n_max=2) = {g2:.12f}"]


SUITES = {
    "invariant": invariant,
    "zeno": zeno,
    "odes": odes,
    "gate": gate,
    "convergence": convergence,
}
