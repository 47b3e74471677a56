"""Physical and numerical parameters of a protocol run (g0 = 1 units)."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .hilbert import HilbertSpace
from .pulses import LAMBDA_FACTOR, ZENO_FACTOR, PulseSchedule, protocol_pulses

BRANCHINGS = ("per_channel", "total_split")
STEP3_AMPLITUDES = {"paper_literal": ZENO_FACTOR, "exact_lambda": LAMBDA_FACTOR}

# Laser-phase factors (initial leg, target leg) for steps 1..3, as selected by
# protocol.calibrate_signs at the default parameters.
CALIBRATED_SIGNS = ((1, 1), (1, 1), (1, -1))


@dataclass(frozen=True)
class NoiseModel:
    """Cavity decay ``kappa`` and per-level atomic emission ``gamma``.

    ``per_channel`` assigns rate gamma to each of the three decay channels of
    an excited level; ``total_split`` gives each channel gamma/3.
    """

    kappa: float = 0.0
    gamma: float = 0.0
    branching: str = "per_channel"

    def __post_init__(self):
        if self.kappa < 0 or self.gamma < 0:
            raise ValueError("decay rates must be non-negative")
        if self.branching not in BRANCHINGS:
            raise ValueError(f"branching must be one of {BRANCHINGS}, got {self.branching!r}")

    @property
    def is_closed(self) -> bool:
        return self.kappa == 0 and self.gamma == 0

    @property
    def channel_rate(self) -> float:
        return self.gamma if self.branching == "per_channel" else self.gamma / 3.0


def _as_signs(signs) -> tuple[tuple[int, int], ...]:
    out = tuple((int(a), int(b)) for a, b in signs)
    if len(out) != 3 or any(s not in (1, -1) for pair in out for s in pair):
        raise ValueError(f"signs must be three (+-1, +-1) pairs, got {signs!r}")
    return out


def _as_amplitudes(values) -> tuple[complex, ...]:
    out = []
    for v in values:
        if isinstance(v, (list, tuple)):
            re, im = v
            out.append(complex(re, im))
        else:
            out.append(complex(v))
    if len(out) != 4:
        raise ValueError("input_amplitudes needs four entries (a00, a01, a10, a11)")
    return tuple(out)


@dataclass(frozen=True)
class ProtocolConfig:
    epsilon: float = 0.25
    g: float = 10.0
    t_f: float = 20.0
    n_max: int = 1
    dt: float | None = None
    noise: NoiseModel = field(default_factory=NoiseModel)
    input_amplitudes: tuple = (0.5, 0.5, 0.5, 0.5)
    signs: tuple = CALIBRATED_SIGNS
    step3_amplitude: str = "exact_lambda"
    sample_every: int = 40

    def __post_init__(self):
        object.__setattr__(self, "input_amplitudes", _as_amplitudes(self.input_amplitudes))
        object.__setattr__(self, "signs", _as_signs(self.signs))
        if self.dt is None:
            object.__setattr__(self, "dt", self.t_f / 4000)
        norm = sum(abs(a) ** 2 for a in self.input_amplitudes)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"input amplitudes are not normalized (sum |a|^2 = {norm!r})")
        if self.step3_amplitude not in STEP3_AMPLITUDES:
            raise ValueError(f"step3_amplitude must be one of {sorted(STEP3_AMPLITUDES)}")
        if self.g <= 0 or self.t_f <= 0 or self.dt <= 0:
            raise ValueError("g, t_f and dt must be positive")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")
        # fails early on a dt that does not tile the step
        self.n_steps  # noqa: B018

    @property
    def space(self) -> HilbertSpace:
        return HilbertSpace(self.n_max)

    @property
    def n_steps(self) -> int:
        n = int(round(self.t_f / self.dt))
        if n < 1 or abs(n * self.dt - self.t_f) > 1e-9 * self.t_f:
            raise ValueError(f"dt={self.dt} does not divide t_f={self.t_f} evenly")
        return n

    def step_pulses(self, step: int) -> PulseSchedule:
        factor = STEP3_AMPLITUDES[self.step3_amplitude] if step == 3 else ZENO_FACTOR
        s_i, s_t = self.signs[step - 1]
        return protocol_pulses(self.epsilon, self.t_f, factor, s_i, s_t)

    def replace(self, **changes) -> "ProtocolConfig":
        noise_keys = {k: changes.pop(k) for k in ("kappa", "gamma", "branching") if k in changes}
        if noise_keys:
            changes["noise"] = dataclasses.replace(changes.get("noise", self.noise), **noise_keys)
        if "t_f" in changes and "dt" not in changes:
            changes["dt"] = None
        return dataclasses.replace(self, **changes)

    def with_relative_signs(self, pattern) -> "ProtocolConfig":
        """Signs (1, r_k) for each step from a pattern of three relative signs."""
        return self.replace(signs=tuple((1, int(r)) for r in pattern))

    def initial_state(self) -> np.ndarray:
        space = self.space
        psi = np.zeros(space.dim, dtype=complex)
        psi[space.qubit_indices()] = self.input_amplitudes
        return psi

    def to_dict(self) -> dict[str, Any]:
        return {
            "epsilon": self.epsilon,
            "g": self.g,
            "t_f": self.t_f,
            "n_max": self.n_max,
            "dt": self.dt,
            "sample_every": self.sample_every,
            "step3_amplitude": self.step3_amplitude,
            "signs": [list(p) for p in self.signs],
            "input_amplitudes": [[a.real, a.imag] for a in self.input_amplitudes],
            "noise": dataclasses.asdict(self.noise),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ProtocolConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise KeyError(f"unknown configuration keys: {sorted(unknown)}")
        data = dict(data)
        if "noise" in data:
            noise = data["noise"]
            if not isinstance(noise, NoiseModel):
                bad = set(noise) - {"kappa", "gamma", "branching"}
                if bad:
                    raise KeyError(f"unknown noise keys: {sorted(bad)}")
                data["noise"] = NoiseModel(**noise)
        return cls(**data)
