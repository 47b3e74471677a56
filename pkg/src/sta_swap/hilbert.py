"""Composite space of two five-level atoms and one truncated cavity mode.

Basis ordering is row-major with atom A slowest and the photon number fastest::

    index = (5 * level_A + level_B) * (n_max + 1) + photons

Operators are built as ``scipy.sparse`` CSR matrices; call ``.toarray()`` for
dense work.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, NamedTuple

import numpy as np
import scipy.sparse as sp

N_LEVELS = 5


class TruncationError(ValueError):
    """A photon number exceeds the Fock-space cutoff."""


class AtomLevel(enum.IntEnum):
    G0 = 0
    G1 = 1
    GA = 2
    EE = 3
    UU = 4

    @property
    def is_ground(self) -> bool:
        return self in (AtomLevel.G0, AtomLevel.G1, AtomLevel.GA)

    @property
    def is_excited(self) -> bool:
        return not self.is_ground

    @property
    def symbol(self) -> str:
        return "01aeu"[self.value]

    @classmethod
    def from_symbol(cls, ch: str) -> "AtomLevel":
        try:
            return cls("01aeu".index(ch))
        except ValueError:
            raise ValueError(f"unknown atomic level symbol {ch!r}") from None


GROUND_LEVELS = (AtomLevel.G0, AtomLevel.G1, AtomLevel.GA)
EXCITED_LEVELS = (AtomLevel.EE, AtomLevel.UU)


class BasisState(NamedTuple):
    level_a: AtomLevel
    level_b: AtomLevel
    photons: int = 0

    @property
    def label(self) -> str:
        """Compact CSV-safe label, e.g. ``1a_0`` for |1a>_AB |0>_C."""
        return f"{AtomLevel(self.level_a).symbol}{AtomLevel(self.level_b).symbol}_{self.photons}"

    @classmethod
    def parse(cls, text: str) -> "BasisState":
        """Parse ``"01"``, ``"1a_0"`` or ``"11,1"`` style labels."""
        text = text.strip().strip("|>")
        atoms, _, n = text.replace(",", "_").partition("_")
        if len(atoms) != 2:
            raise ValueError(f"cannot parse basis state {text!r}")
        return cls(AtomLevel.from_symbol(atoms[0]), AtomLevel.from_symbol(atoms[1]), int(n or 0))

    def __str__(self) -> str:
        return f"|{AtomLevel(self.level_a).symbol}{AtomLevel(self.level_b).symbol},{self.photons}>"


@dataclass(frozen=True)
class HilbertSpace:
    """Two atoms times a cavity truncated at ``n_max`` photons."""

    n_max: int = 1

    def __post_init__(self):
        if self.n_max < 0:
            raise ValueError("n_max must be non-negative")

    @property
    def n_fock(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return N_LEVELS * N_LEVELS * self.n_fock

    def basis_index(self, s: BasisState) -> int:
        if not 0 <= s.photons <= self.n_max:
            raise TruncationError(f"{s} exceeds the photon cutoff n_max={self.n_max}")
        return (N_LEVELS * int(s.level_a) + int(s.level_b)) * self.n_fock + s.photons

    def basis_state(self, index: int) -> BasisState:
        if not 0 <= index < self.dim:
            raise IndexError(index)
        atoms, n = divmod(index, self.n_fock)
        la, lb = divmod(atoms, N_LEVELS)
        return BasisState(AtomLevel(la), AtomLevel(lb), n)

    def states(self) -> Iterator[BasisState]:
        for i in range(self.dim):
            yield self.basis_state(i)

    def ket(self, s: BasisState | str) -> np.ndarray:
        if isinstance(s, str):
            s = BasisState.parse(s)
        v = np.zeros(self.dim, dtype=complex)
        v[self.basis_index(s)] = 1.0
        return v

    def identity(self) -> sp.csr_matrix:
        return sp.identity(self.dim, dtype=complex, format="csr")

    def atomic_operator(self, atom: str, l: AtomLevel, k: AtomLevel) -> sp.csr_matrix:
        """|l><k| on the named atom, identity on the other atom and the cavity."""
        single = sp.coo_matrix(([1.0], ([int(l)], [int(k)])), shape=(N_LEVELS, N_LEVELS))
        eye_atom = sp.identity(N_LEVELS, format="csr")
        eye_cav = sp.identity(self.n_fock, format="csr")
        if atom == "A":
            op = sp.kron(sp.kron(single, eye_atom), eye_cav)
        elif atom == "B":
            op = sp.kron(sp.kron(eye_atom, single), eye_cav)
        else:
            raise ValueError(f"atom must be 'A' or 'B', got {atom!r}")
        op = op.astype(complex).tocsr()
        op.eliminate_zeros()
        return op

    def annihilation(self) -> sp.csr_matrix:
        ladder = sp.diags(np.sqrt(np.arange(1, self.n_fock, dtype=float)), 1,
                          shape=(self.n_fock, self.n_fock))
        return sp.kron(sp.identity(N_LEVELS * N_LEVELS), ladder).astype(complex).tocsr()

    @cached_property
    def photon_numbers(self) -> np.ndarray:
        return np.arange(self.dim) % self.n_fock

    def qubit_indices(self) -> list[int]:
        """Indices of |00,0>, |01,0>, |10,0>, |11,0> in that order."""
        g0, g1 = AtomLevel.G0, AtomLevel.G1
        return [self.basis_index(BasisState(a, b, 0)) for a in (g0, g1) for b in (g0, g1)]
