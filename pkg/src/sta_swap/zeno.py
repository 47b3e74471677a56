"""Zeno-subspace decomposition of the step Hamiltonians.

The strong cavity coupling plays the role of the measurement Hamiltonian and
the laser drive is the observed part.  Within the eigenvalue-zero (dark)
sector of the cavity coupling the dynamics reduces to P0 H_laser P0.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .config import ProtocolConfig
from .dynamics import (
    STEP_LASERS,
    StepHamiltonian,
    build_step_hamiltonian,
    cavity_coupling,
    propagate_columns,
    schrodinger_evolve,
)
from .hilbert import BasisState, HilbertSpace
from .pulses import SQRT2, PulseSchedule

DEGENERACY_TOLERANCE = 1e-9


def reachable_subspace(initial: BasisState, step: int, space: HilbertSpace) -> list[BasisState]:
    """Basis states connected to ``initial`` by any term of the step Hamiltonian.

    Breadth-first order from ``initial``; neighbours of one state are visited by
    ascending basis index.
    """
    if initial.photons != 0:
        raise ValueError("the initial state must have an empty cavity")
    adjacency = abs(cavity_coupling(space, 1.0))
    for term in STEP_LASERS[step]:
        op = space.atomic_operator(term.atom, term.upper, term.lower)
        adjacency = adjacency + abs(op) + abs(op.T)
    adjacency = adjacency.tocsr()

    start = space.basis_index(initial)
    seen = {start}
    order = [start]
    queue = deque([start])
    while queue:
        i = queue.popleft()
        row = adjacency.indices[adjacency.indptr[i]:adjacency.indptr[i + 1]]
        for j in sorted(int(j) for j in row):
            if j not in seen:
                seen.add(j)
                order.append(j)
                queue.append(j)
    return [space.basis_state(i) for i in order]


def embedding(states: Sequence[BasisState], space: HilbertSpace) -> np.ndarray:
    """dim x k isometry whose columns are the given basis kets."""
    E = np.zeros((space.dim, len(states)), dtype=complex)
    for col, s in enumerate(states):
        E[space.basis_index(s), col] = 1.0
    return E


@dataclass
class ZenoDecomposition:
    """Eigenprojections of the measurement Hamiltonian on a reachable subspace.

    Projectors are expressed in subspace coordinates; ``full_projector`` lifts
    one to the composite space.
    """

    eigenvalues: np.ndarray
    projectors: list[np.ndarray]
    subspace: list[BasisState]
    embedding: np.ndarray = field(repr=False)

    def index_of(self, eigenvalue: float, tol: float = 1e-6) -> int:
        hits = np.flatnonzero(np.abs(self.eigenvalues - eigenvalue) <= tol)
        if hits.size == 0:
            raise ValueError(f"eigenvalue {eigenvalue} not in spectrum {self.eigenvalues}")
        return int(hits[0])

    def full_projector(self, n: int) -> np.ndarray:
        E = self.embedding
        return E @ self.projectors[n] @ E.conj().T

    def multiplicities(self) -> list[int]:
        return [int(round(np.trace(P).real)) for P in self.projectors]


def zeno_decompose(h_meas, subspace: Sequence[BasisState], space: HilbertSpace,
                   scale: float | None = None) -> ZenoDecomposition:
    """Diagonalize ``h_meas`` restricted to ``subspace`` and group degenerate levels.

    Eigenvalues closer than ``1e-9 * scale`` are merged into one projector;
    ``scale`` defaults to the largest eigenvalue magnitude (or 1 if all vanish).
    """
    E = embedding(subspace, space)
    H = h_meas.toarray() if sp.issparse(h_meas) else np.asarray(h_meas, dtype=complex)
    h = E.conj().T @ H @ E
    if np.abs(h - h.conj().T).max() > 1e-12 * max(1.0, np.abs(h).max()):
        raise ValueError("measurement Hamiltonian is not Hermitian on the subspace")
    w, v = np.linalg.eigh(h)
    if scale is None:
        scale = max(np.abs(w).max(initial=0.0), 1.0)
    tol = DEGENERACY_TOLERANCE * scale

    groups: list[list[int]] = []
    for i in range(w.size):
        if groups and abs(w[i] - w[groups[-1][0]]) <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    eigenvalues = np.array([w[g].mean() for g in groups])
    eigenvalues[np.abs(eigenvalues) <= tol] = 0.0
    projectors = [v[:, g] @ v[:, g].conj().T for g in groups]
    return ZenoDecomposition(eigenvalues, projectors, list(subspace), E)


def _canonical_basis(P: np.ndarray, E: np.ndarray) -> np.ndarray:
    """Orthonormal basis of range(P): Gram-Schmidt over the projected subspace kets.

    Each vector's phase is fixed so its last significant coordinate is real
    and positive.
    """
    vectors = []
    for col in range(P.shape[0]):
        v = P[:, col].copy()
        for u in vectors:
            v -= u * (u.conj() @ v)
        norm = np.linalg.norm(v)
        if norm > 1e-9:
            v /= norm
            last = np.flatnonzero(np.abs(v) > 1e-9)[-1]
            v *= abs(v[last]) / v[last]
            vectors.append(v)
    return E @ np.array(vectors).T


@dataclass
class EffectiveHamiltonian:
    """P H_obs(t) P written in an orthonormal basis of one Zeno sector."""

    basis: np.ndarray = field(repr=False)
    h_obs: Callable[[float], np.ndarray] = field(repr=False)
    eigenvalue: float = 0.0

    @property
    def size(self) -> int:
        return self.basis.shape[1]

    def matrix(self, t: float) -> np.ndarray:
        B = self.basis
        return B.conj().T @ self.h_obs(t) @ B

    __call__ = matrix

    def embedded(self, t: float) -> np.ndarray:
        B = self.basis
        return B @ self.matrix(t) @ B.conj().T


def effective_hamiltonian(h_obs: Callable[[float], np.ndarray], decomposition: ZenoDecomposition,
                          select_eigenvalue: float = 0.0) -> EffectiveHamiltonian:
    n = decomposition.index_of(select_eigenvalue)
    B = _canonical_basis(decomposition.projectors[n], decomposition.embedding)
    return EffectiveHamiltonian(B, h_obs, float(decomposition.eigenvalues[n]))


def step_decomposition(initial: BasisState, step: int, config: ProtocolConfig,
                       g: float | None = None) -> ZenoDecomposition:
    space = config.space
    g = config.g if g is None else g
    sub = reachable_subspace(initial, step, space)
    return zeno_decompose(cavity_coupling(space, g), sub, space, scale=g)


def dark_hamiltonian(H: StepHamiltonian, initial: BasisState) -> EffectiveHamiltonian:
    """Effective dark-sector Hamiltonian of a step, seen from ``initial``."""
    sub = reachable_subspace(initial, H.step, H.space)
    dec = zeno_decompose(H.cavity, sub, H.space, scale=H.g)
    return effective_hamiltonian(H.laser_part, dec, 0.0)


def model_dark_hamiltonian(omega_initial: float, omega_target: float) -> np.ndarray:
    """Three-level reduced Hamiltonian in the (phi1, mu, phi5) basis.

    Both legs couple to |mu> with strength Omega/sqrt(2) and the same sign;
    laser phases enter through the signs of the pulse values.
    """
    h = np.zeros((3, 3), dtype=complex)
    h[1, 0] = omega_initial / SQRT2
    h[1, 2] = omega_target / SQRT2
    return h + h.conj().T


def zeno_error(initial: BasisState, step: int, config: ProtocolConfig, g: float | None = None,
               pulses: PulseSchedule | None = None) -> float:
    """Distance between full and dark-sector evolutions after one step (closed system)."""
    H = build_step_hamiltonian(step, config, pulses=pulses, g=g)
    eff = dark_hamiltonian(H, initial)
    psi0 = H.space.ket(initial)
    psi_full = propagate_columns(H, psi0, config.t_f, config.dt)
    c0 = eff.basis.conj().T @ psi0
    c = propagate_columns(eff.matrix, c0, config.t_f, config.dt)
    return float(np.linalg.norm(psi_full - eff.basis @ c))


def dark_leakage(initial: BasisState, step: int, config: ProtocolConfig) -> float:
    """Largest population outside the dark sector along the full closed-system run."""
    H = build_step_hamiltonian(step, config)
    eff = dark_hamiltonian(H, initial)
    traj = schrodinger_evolve(H, H.space.ket(initial), (0.0, config.t_f), config.dt,
                              sample_every=max(1, config.n_steps // 400))
    inside = np.linalg.norm(traj.states @ eff.basis.conj(), axis=1) ** 2
    return float(np.max(1.0 - inside))


def zeno_evolution_operator(H: StepHamiltonian, decomposition: ZenoDecomposition, t_f: float,
                            n_steps: int) -> np.ndarray:
    """Time-ordered product of exp[-i dt sum_n (lambda_n P_n + P_n H_obs P_n)].

    The laser part is frozen at each slice midpoint.  Returned in the
    subspace coordinates of ``decomposition``.
    """
    E = decomposition.embedding
    dt = t_f / n_steps
    static = sum(lam * P for lam, P in zip(decomposition.eigenvalues, decomposition.projectors))
    U = np.eye(E.shape[1], dtype=complex)
    for n in range(n_steps):
        h_obs = E.conj().T @ H.laser_part((n + 0.5) * dt) @ E
        gen = static + sum(P @ h_obs @ P for P in decomposition.projectors)
        U = la.expm(-1j * dt * gen) @ U
    return U


def effective_propagator(eff: EffectiveHamiltonian, t_f: float, dt: float) -> np.ndarray:
    """RK4 propagator of the effective Hamiltonian in its own basis."""
    return propagate_columns(eff.matrix, np.eye(eff.size, dtype=complex), t_f, dt)
