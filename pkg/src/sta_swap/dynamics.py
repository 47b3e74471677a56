"""Step Hamiltonians and fixed-step RK4 propagation (Schroedinger and Lindblad).

Each protocol step has its own clock running over ``[0, t_f]``.  Callers that
chain steps shift the sampled times with :meth:`Trajectory.shifted`.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .config import NoiseModel, ProtocolConfig
from .hilbert import EXCITED_LEVELS, GROUND_LEVELS, AtomLevel, BasisState, HilbertSpace
from .pulses import PulseSchedule

G0, G1, GA, EE, UU = AtomLevel

NORM_TOLERANCE = 1e-4
POSITIVITY_TOLERANCE = 1e-6


class IntegrationError(RuntimeError):
    """Norm, trace or positivity drifted beyond tolerance; the step is too large."""


@dataclass(frozen=True)
class LaserTerm:
    """Drive ``pulse_leg`` on ``atom`` between ``upper`` and ``lower`` (plus h.c.)."""

    atom: str
    upper: AtomLevel
    lower: AtomLevel
    leg: str  # "initial" or "target"


# Transition assignments per step: the initial leg carries the sine pulse.
STEP_LASERS: dict[int, tuple[LaserTerm, ...]] = {
    1: (LaserTerm("A", EE, G0, "initial"), LaserTerm("B", EE, GA, "target")),
    2: (LaserTerm("B", EE, G0, "initial"), LaserTerm("A", EE, GA, "target")),
    3: (
        LaserTerm("A", UU, GA, "initial"),
        LaserTerm("B", UU, GA, "initial"),
        LaserTerm("A", UU, G0, "target"),
        LaserTerm("B", UU, G0, "target"),
    ),
}


def cavity_coupling(space: HilbertSpace, g: float) -> sp.csr_matrix:
    """g (a |e><1| + h.c.) summed over both atoms."""
    a = space.annihilation()
    h = sp.csr_matrix((space.dim, space.dim), dtype=complex)
    for atom in ("A", "B"):
        h = h + g * (a @ space.atomic_operator(atom, EE, G1))
    return (h + h.getH()).tocsr()


@dataclass
class StepHamiltonian:
    """H(t) = H_c + Om_i(t) V_initial + Om_t(t) V_target for one step."""

    step: int
    space: HilbertSpace
    g: float
    pulses: PulseSchedule
    laser_terms: tuple[LaserTerm, ...]
    cavity: np.ndarray = field(init=False, repr=False)
    v_initial: np.ndarray = field(init=False, repr=False)
    v_target: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.cavity = cavity_coupling(self.space, self.g).toarray()
        legs = {"initial": np.zeros((self.space.dim,) * 2, complex),
                "target": np.zeros((self.space.dim,) * 2, complex)}
        for term in self.laser_terms:
            op = self.space.atomic_operator(term.atom, term.upper, term.lower).toarray()
            legs[term.leg] += op + op.conj().T
        self.v_initial, self.v_target = legs["initial"], legs["target"]

    def laser_part(self, t: float) -> np.ndarray:
        om_i, om_t = self.pulses(t)
        return om_i * self.v_initial + om_t * self.v_target

    def evaluate(self, t: float) -> np.ndarray:
        return self.cavity + self.laser_part(t)

    __call__ = evaluate


def build_step_hamiltonian(step: int, config: ProtocolConfig, pulses: PulseSchedule | None = None,
                           g: float | None = None) -> StepHamiltonian:
    if step not in STEP_LASERS:
        raise ValueError(f"step must be 1, 2 or 3, got {step}")
    return StepHamiltonian(
        step=step,
        space=config.space,
        g=config.g if g is None else g,
        pulses=config.step_pulses(step) if pulses is None else pulses,
        laser_terms=STEP_LASERS[step],
    )


def _as_callable(H) -> Callable[[float], np.ndarray]:
    if callable(H):
        return H
    matrix = H.toarray() if sp.issparse(H) else np.asarray(H, dtype=complex)
    return lambda t: matrix


@dataclass
class Trajectory:
    """Sampled states; ``states`` has shape (n, dim) for kets, (n, dim, dim) for density matrices."""

    times: np.ndarray
    states: np.ndarray
    space: HilbertSpace

    @property
    def mixed(self) -> bool:
        return self.states.ndim == 3

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def probabilities(self) -> np.ndarray:
        if self.mixed:
            return np.einsum("nii->ni", self.states).real
        return np.abs(self.states) ** 2

    def trace(self) -> np.ndarray:
        return self.probabilities().sum(axis=1)

    def purity(self) -> np.ndarray:
        if self.mixed:
            return np.einsum("nij,nji->n", self.states, self.states).real
        return self.trace() ** 2

    def shifted(self, offset: float) -> "Trajectory":
        return Trajectory(self.times + offset, self.states, self.space)

    @staticmethod
    def concatenate(parts: Sequence["Trajectory"]) -> "Trajectory":
        """Join consecutive runs, dropping each duplicated boundary sample."""
        times = [parts[0].times]
        states = [parts[0].states]
        for p in parts[1:]:
            times.append(p.times[1:])
            states.append(p.states[1:])
        return Trajectory(np.concatenate(times), np.concatenate(states), parts[0].space)

    def to_csv(self, path, labels: Sequence[BasisState], header: dict | None = None) -> None:
        write_trajectory_csv(self, path, labels, header)


def populations(traj: Trajectory, labels: Sequence[BasisState | str]) -> np.ndarray:
    """Population table with one row per sample and one column per label."""
    idx = [traj.space.basis_index(BasisState.parse(s) if isinstance(s, str) else s) for s in labels]
    return traj.probabilities()[:, idx]


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def write_trajectory_csv(traj: Trajectory, path, labels: Sequence[BasisState],
                         header: dict | None = None) -> None:
    labels = [BasisState.parse(s) if isinstance(s, str) else s for s in labels]
    table = populations(traj, labels)
    trace, purity = traj.trace(), traj.purity()
    with open(path, "w", newline="") as fh:
        if header is not None:
            fh.write("# config: " + json.dumps(header, sort_keys=True) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", *(s.label for s in labels), "trace", "purity"])
        for n, t in enumerate(traj.times):
            writer.writerow([_fmt(t), *(_fmt(p) for p in table[n]), _fmt(trace[n]), _fmt(purity[n])])


def _rk4(rhs, y0: np.ndarray, t0: float, dt: float, n_steps: int, sample_every: int,
         check: Callable[[np.ndarray, float], None] | None = None):
    times, samples = [t0], [y0.copy()]
    y = y0.copy()
    rhs.start(t0)
    for n in range(1, n_steps + 1):
        t = t0 + (n - 1) * dt
        k1 = rhs(0, y)
        k2 = rhs(1, y + 0.5 * dt * k1)
        k3 = rhs(1, y + 0.5 * dt * k2)
        k4 = rhs(2, y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        rhs.advance(t + dt)
        if n % sample_every == 0 or n == n_steps:
            times.append(t0 + n * dt)
            samples.append(y.copy())
            if check is not None:
                check(y, times[-1])
    return np.array(times), np.array(samples)


class _StageCache:
    """Holds H at t, t + dt/2 and t + dt; the right end is reused as the next left end."""

    def __init__(self, H, dt: float, make_rhs):
        self.H = H
        self.dt = dt
        self.make_rhs = make_rhs

    def start(self, t0: float):
        self.mats = [self.make_rhs(self.H(t0)), self.make_rhs(self.H(t0 + 0.5 * self.dt)),
                     self.make_rhs(self.H(t0 + self.dt))]

    def advance(self, t: float):
        self.mats = [self.mats[2], self.make_rhs(self.H(t + 0.5 * self.dt)),
                     self.make_rhs(self.H(t + self.dt))]

    def __call__(self, stage: int, y):
        return self.mats[stage](y)


def _resolve_steps(t_span, dt: float) -> tuple[float, int]:
    t0, t1 = t_span
    n = int(round((t1 - t0) / dt))
    if n < 1 or abs(n * dt - (t1 - t0)) > 1e-9 * max(abs(t1 - t0), 1.0):
        raise ValueError(f"dt={dt} does not divide the interval {t_span} evenly")
    return t0, n


def schrodinger_evolve(H, psi0: np.ndarray, t_span, dt: float, sample_every: int = 1,
                       space: HilbertSpace | None = None) -> Trajectory:
    """Integrate i d psi/dt = H(t) psi with classical RK4.

    ``psi0`` may also be a (dim, k) matrix of columns, in which case each
    column is propagated and ``states`` has shape (n, dim, k); use
    :func:`propagate_columns` for that case.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    t0, n = _resolve_steps(t_span, dt)
    norm0 = np.linalg.norm(psi0, axis=0)

    def check(y, t):
        drift = np.max(np.abs(np.linalg.norm(y, axis=0) - norm0))
        if drift > NORM_TOLERANCE:
            raise IntegrationError(f"norm drift {drift:.3g} at t={t:.6g}; reduce dt")

    rhs = _StageCache(_as_callable(H), dt, lambda h: (lambda y: -1j * (h @ y)))
    times, states = _rk4(rhs, psi0, t0, dt, n, sample_every, check)
    if space is None:
        space = getattr(H, "space", None)
    return Trajectory(times, states, space)


def propagate_columns(H, columns: np.ndarray, t_f: float, dt: float) -> np.ndarray:
    """Final states of several initial kets (columns) after time t_f."""
    traj = schrodinger_evolve(H, columns, (0.0, t_f), dt, sample_every=int(round(t_f / dt)))
    return traj.final


def collapse_operators(space: HilbertSpace, noise: NoiseModel) -> list[tuple[float, sp.csr_matrix]]:
    """(rate, L) pairs: cavity loss a and the decay of e, u to each ground level of both atoms."""
    ops = []
    if noise.kappa > 0:
        ops.append((noise.kappa, space.annihilation()))
    if noise.gamma > 0:
        for atom in ("A", "B"):
            for l in EXCITED_LEVELS:
                for k in GROUND_LEVELS:
                    ops.append((noise.channel_rate, space.atomic_operator(atom, k, l)))
    return ops


class _LindbladRHS:
    def __init__(self, space: HilbertSpace, noise: NoiseModel):
        dim = space.dim
        self.dim = dim
        ops = collapse_operators(space, noise)
        decay = sp.csr_matrix((dim, dim), dtype=complex)
        jump = sp.csr_matrix((dim * dim, dim * dim), dtype=complex)
        for rate, L in ops:
            decay = decay + rate * (L.getH() @ L)
            # row-major vec(L rho L^dag) = (L kron conj(L)) vec(rho)
            jump = jump + rate * sp.kron(L, L.conj())
        self.decay = 0.5j * decay.toarray()
        self.jump = jump.tocsr() if ops else None

    def __call__(self, h: np.ndarray):
        k = h - self.decay
        kd = k.conj().T
        jump, dim = self.jump, self.dim

        def rhs(rho):
            out = -1j * (k @ rho - rho @ kd)
            if jump is not None:
                out += (jump @ rho.ravel()).reshape(dim, dim)
            return out

        return rhs


def lindblad_evolve(H, rho0: np.ndarray, noise: NoiseModel, t_span, dt: float,
                    sample_every: int = 1, space: HilbertSpace | None = None) -> Trajectory:
    """Integrate the master equation with classical RK4.

    drho/dt = -i[H, rho] + sum_j rate_j (L_j rho L_j^dag - {L_j^dag L_j, rho}/2)
    """
    if space is None:
        space = getattr(H, "space", None)
    if space is None:
        raise ValueError("space is required when H carries none")
    rho0 = np.asarray(rho0, dtype=complex)
    if np.abs(rho0 - rho0.conj().T).max() > 1e-10:
        raise ValueError("rho0 is not Hermitian")
    if abs(np.trace(rho0) - 1) > NORM_TOLERANCE:
        raise ValueError("rho0 does not have unit trace")
    if np.linalg.eigvalsh(0.5 * (rho0 + rho0.conj().T)).min() < -POSITIVITY_TOLERANCE:
        raise ValueError("rho0 is not positive semidefinite")
    t0, n = _resolve_steps(t_span, dt)

    def check(rho, t):
        drift = abs(np.trace(rho).real - 1.0)
        if drift > NORM_TOLERANCE:
            raise IntegrationError(f"trace drift {drift:.3g} at t={t:.6g}; reduce dt")
        lowest = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min()
        if lowest < -POSITIVITY_TOLERANCE:
            raise IntegrationError(f"negative eigenvalue {lowest:.3g} at t={t:.6g}; reduce dt")

    rhs = _StageCache(_as_callable(H), dt, _LindbladRHS(space, noise))
    times, states = _rk4(rhs, rho0, t0, dt, n, sample_every, check)
    return Trajectory(times, states, space)


def density_matrix(psi: np.ndarray) -> np.ndarray:
    return np.outer(psi, psi.conj())


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    diff = rho - sigma
    return 0.5 * float(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))).sum())
