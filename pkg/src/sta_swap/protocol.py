"""Three-step SWAP protocol: ideal states, sign calibration, gate extraction, noise sweeps."""

from __future__ import annotations

import csv
import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .config import BRANCHINGS, NoiseModel, ProtocolConfig
from .dynamics import (
    Trajectory,
    build_step_hamiltonian,
    density_matrix,
    lindblad_evolve,
    propagate_columns,
    schrodinger_evolve,
)
from .hilbert import AtomLevel, BasisState, HilbertSpace

G0, G1, GA, EE, UU = AtomLevel

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
SIGN_PATTERNS = tuple(itertools.product((1, -1), repeat=3))
COMPUTATIONAL_LABELS = ("00", "01", "10", "11")


class CalibrationError(RuntimeError):
    def __init__(self, calibration: "SignCalibration", threshold: float):
        self.calibration = calibration
        self.threshold = threshold
        table = ", ".join(f"{p}: {f:.6f}" for p, f in calibration.fidelities.items())
        super().__init__(
            f"no laser-phase pattern reaches gate fidelity {threshold}; best "
            f"{calibration.pattern} gives {calibration.fidelity:.6f} ({table})"
        )


def _relative_signs(signs) -> tuple[int, int, int]:
    return tuple(a * b for a, b in signs)


def ideal_states(amplitudes: Sequence[complex], space: HilbertSpace | None = None,
                 signs=((1, 1), (1, 1), (1, 1))) -> tuple[np.ndarray, ...]:
    """Target state after each step for inputs a00|00> + a01|01> + a10|10> + a11|11>.

    Steps 1 and 2 deliver |1a> and |a1> with sign ``-r`` where ``r`` is the
    relative laser phase of the step.  The last state is the exact SWAP
    output.
    """
    space = space or HilbertSpace()
    a00, a01, a10, a11 = (complex(a) for a in amplitudes)
    r1, r2, _ = _relative_signs(signs)

    def ket(text):
        return space.ket(BasisState.parse(text))

    psi0 = a00 * ket("00") + a01 * ket("01") + a10 * ket("10") + a11 * ket("11")
    psi1 = a00 * ket("00") - r1 * a01 * ket("1a") + a10 * ket("10") + a11 * ket("11")
    psi2 = a00 * ket("00") - r1 * a01 * ket("1a") - r2 * a10 * ket("a1") + a11 * ket("11")
    psi3 = a00 * ket("00") + a01 * ket("10") + a10 * ket("01") + a11 * ket("11")
    return psi0, psi1, psi2, psi3


def target_state(config: ProtocolConfig) -> np.ndarray:
    return ideal_states(config.input_amplitudes, config.space, config.signs)[3]


@lru_cache(maxsize=32)
def step_unitary(config: ProtocolConfig, step: int) -> np.ndarray:
    """Full-space closed-system propagator of one step (read-only, cached)."""
    H = build_step_hamiltonian(step, config)
    U = propagate_columns(H, np.eye(config.space.dim, dtype=complex), config.t_f, config.dt)
    U.setflags(write=False)
    return U


def protocol_unitary(config: ProtocolConfig) -> np.ndarray:
    U = np.eye(config.space.dim, dtype=complex)
    for step in (1, 2, 3):
        U = step_unitary(config, step) @ U
    return U


def propagate_inputs(config: ProtocolConfig, columns: np.ndarray, steps=(1, 2, 3)) -> np.ndarray:
    """Carry a few initial kets (columns) through the given steps, closed system."""
    for step in steps:
        H = build_step_hamiltonian(step, config)
        columns = propagate_columns(H, columns, config.t_f, config.dt)
    return columns


def _qubit_columns(space: HilbertSpace) -> np.ndarray:
    return np.eye(space.dim, dtype=complex)[:, space.qubit_indices()]


@dataclass
class GateResult:
    matrix: np.ndarray
    gate_fidelity: float
    leakage: np.ndarray

    @property
    def max_deviation(self) -> float:
        """max |G_ij - SWAP_ij|."""
        return float(np.abs(self.matrix - SWAP).max())


def gate_fidelity(matrix: np.ndarray) -> float:
    return float(abs(np.trace(SWAP.conj().T @ matrix) / 4.0) ** 2)


def gate_from_columns(finals: np.ndarray, space: HilbertSpace) -> GateResult:
    """Gate from the final states of the four qubit inputs (dim x 4)."""
    G = finals[space.qubit_indices(), :]
    leakage = 1.0 - np.sum(np.abs(G) ** 2, axis=0)
    return GateResult(G, gate_fidelity(G), leakage)


def gate_from_unitary(U: np.ndarray, space: HilbertSpace) -> GateResult:
    return gate_from_columns(U[:, space.qubit_indices()], space)


def extract_gate(config: ProtocolConfig) -> GateResult:
    """Closed-system 4x4 gate on the qubit x vacuum subspace."""
    return gate_from_columns(propagate_inputs(config, _qubit_columns(config.space)), config.space)


@dataclass
class SignCalibration:
    pattern: tuple[int, int, int]
    fidelity: float
    fidelities: dict[tuple[int, int, int], float]
    gates: dict[tuple[int, int, int], GateResult] = field(repr=False)

    @property
    def signs(self) -> tuple[tuple[int, int], ...]:
        return tuple((1, r) for r in self.pattern)


def rank_sign_patterns(config: ProtocolConfig) -> SignCalibration:
    """Gate fidelity for each relative laser-phase pattern; ties go to the earliest pattern."""
    states = {(): _qubit_columns(config.space)}
    for step in (1, 2, 3):
        for prefix in [p for p in states if len(p) == step - 1]:
            for r in (1, -1):
                pattern = prefix + (r,)
                cfg = config.with_relative_signs(pattern + (1,) * (3 - step))
                states[pattern] = propagate_inputs(cfg, states[prefix], steps=(step,))
    gates, fids = {}, {}
    for pattern in SIGN_PATTERNS:
        gates[pattern] = gate_from_columns(states[pattern], config.space)
        fids[pattern] = gates[pattern].gate_fidelity
    top = max(fids.values())
    best = next(p for p in SIGN_PATTERNS if fids[p] >= top - 1e-12)
    return SignCalibration(best, fids[best], fids, gates)


def calibrate_signs(config: ProtocolConfig, min_fidelity: float = 0.99) -> tuple[tuple[int, int], ...]:
    """Laser-phase factors maximizing the closed-system gate fidelity.

    Raises :class:`CalibrationError`, carrying every pattern's fidelity, when
    even the best pattern stays below ``min_fidelity``.
    """
    calibration = rank_sign_patterns(config)
    if calibration.fidelity < min_fidelity:
        raise CalibrationError(calibration, min_fidelity)
    return calibration.signs


@dataclass
class ProtocolRun:
    trajectory: Trajectory
    final: np.ndarray
    fidelity: float
    target: np.ndarray = field(repr=False)

    @property
    def mixed(self) -> bool:
        return self.final.ndim == 2


def state_fidelity(target: np.ndarray, state: np.ndarray) -> float:
    if state.ndim == 2:
        return float(np.real(target.conj() @ state @ target))
    return float(abs(np.vdot(target, state)) ** 2)


def run_protocol(config: ProtocolConfig, mixed: bool | None = None,
                 sample_every: int | None = None) -> ProtocolRun:
    """Propagate the configured input through the three steps.

    Uses the master equation when noise is present (or ``mixed=True``) and
    the Schroedinger equation otherwise.  Time runs continuously over
    [0, 3 t_f].
    """
    if mixed is None:
        mixed = not config.noise.is_closed
    every = sample_every or config.sample_every
    state = config.initial_state()
    if mixed:
        state = density_matrix(state)
    parts = []
    for step in (1, 2, 3):
        H = build_step_hamiltonian(step, config)
        span = (0.0, config.t_f)
        if mixed:
            traj = lindblad_evolve(H, state, config.noise, span, config.dt, every)
        else:
            traj = schrodinger_evolve(H, state, span, config.dt, every)
        parts.append(traj.shifted((step - 1) * config.t_f))
        state = traj.final
    target = target_state(config)
    return ProtocolRun(Trajectory.concatenate(parts), state, state_fidelity(target, state), target)


def _noisy_fidelity(args) -> float:
    config, kappa, gamma, branching = args
    cfg = config.replace(noise=NoiseModel(kappa=kappa, gamma=gamma, branching=branching))
    return run_protocol(cfg, mixed=True, sample_every=cfg.n_steps).fidelity


@dataclass
class SweepResult:
    """Fidelities indexed as ``fidelity[branching, kappa, gamma]``."""

    kappas: np.ndarray
    gammas: np.ndarray
    branchings: tuple[str, ...]
    fidelity: np.ndarray

    def grid(self, branching: str | None = None) -> np.ndarray:
        b = 0 if branching is None else self.branchings.index(branching)
        return self.fidelity[b]

    def rows(self) -> list[tuple[float, float, float, str]]:
        out = []
        for i, k in enumerate(self.kappas):
            for j, g in enumerate(self.gammas):
                for b, name in enumerate(self.branchings):
                    out.append((float(k), float(g), float(self.fidelity[b, i, j]), name))
        return out

    def to_csv(self, path, header: dict | None = None) -> None:
        with open(path, "w", newline="") as fh:
            if header is not None:
                fh.write("# config: " + json.dumps(header, sort_keys=True) + "\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["kappa", "gamma", "fidelity", "branching"])
            for k, g, f, name in self.rows():
                writer.writerow([f"{k:.9g}", f"{g:.9g}", f"{f:.9g}", name])


def sweep(config: ProtocolConfig, gamma_values: Iterable[float], kappa_values: Iterable[float],
          branchings: Sequence[str] | None = None, workers: int = 1) -> SweepResult:
    """Master-equation fidelity over a (kappa, gamma) grid, ascending in both."""
    gammas = np.array(sorted(set(float(g) for g in gamma_values)))
    kappas = np.array(sorted(set(float(k) for k in kappa_values)))
    if gammas.size == 0 or kappas.size == 0:
        raise ValueError("gamma and kappa lists must be non-empty")
    branchings = tuple(branchings or (config.noise.branching,))
    for b in branchings:
        if b not in BRANCHINGS:
            raise ValueError(f"unknown branching {b!r}")
    jobs = [(config, k, g, b) for b in branchings for k in kappas for g in gammas]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(_noisy_fidelity, jobs))
    else:
        values = [_noisy_fidelity(job) for job in jobs]
    grid = np.array(values).reshape(len(branchings), kappas.size, gammas.size)
    return SweepResult(kappas, gammas, branchings, grid)
