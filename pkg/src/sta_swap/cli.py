"""Command-line front end.

All quantities are in units of g0 (rates) and 1/g0 (times).  Exit status is
0 on success, 1 on configuration or integration errors and 2 when a
verification check fails.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import checks
from .config import ProtocolConfig
from .dynamics import IntegrationError, write_trajectory_csv
from .hilbert import BasisState
from .protocol import CalibrationError, run_protocol, sweep

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

INITIAL_AMPLITUDES = {
    "00": (1, 0, 0, 0),
    "01": (0, 1, 0, 0),
    "10": (0, 0, 1, 0),
    "11": (0, 0, 0, 1),
    "superposition": None,
}
TRAJECTORY_LABELS = ("00_0", "01_0", "10_0", "11_0", "1a_0", "a1_0", "aa_0")
OUTPUT_KEYS = {"trajectory", "pulses", "sweep"}


class ConfigError(ValueError):
    pass


def load_config(path: str | None) -> tuple[ProtocolConfig, dict]:
    """Read a TOML config; returns the protocol config and the ``[output]`` table."""
    if path is None:
        return ProtocolConfig(), {}
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = tomllib.loads(p.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    output = data.pop("output", {})
    unknown = set(output) - OUTPUT_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown output keys {sorted(unknown)}")
    try:
        return ProtocolConfig.from_dict(data), output
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _out_path(args, output: dict, key: str, default: str) -> str:
    return args.out or output.get(key) or default


def cmd_run(args) -> int:
    config, output = load_config(args.config)
    amps = INITIAL_AMPLITUDES[args.initial]
    if amps is not None:
        config = config.replace(input_amplitudes=amps)
    if args.closed:
        config = config.replace(kappa=0.0, gamma=0.0)
    mixed = bool(args.open) or None
    run = run_protocol(config, mixed=mixed)
    path = _out_path(args, output, "trajectory", "trajectory.csv")
    write_trajectory_csv(run.trajectory, path, TRAJECTORY_LABELS, header=config.to_dict())
    probs = run.trajectory.probabilities()
    space = config.space
    print(f"wrote {len(run.trajectory.times)} samples to {path}")
    for label in TRAJECTORY_LABELS:
        i = space.basis_index(BasisState.parse(label))
        print(f"P({label}): final {probs[-1, i]:.6f}, min {probs[:, i].min():.6f}, max {probs[:, i].max():.6f}")
    print(f"fidelity {run.fidelity:.9f}")
    return 0


def pulse_table(config: ProtocolConfig) -> tuple[list[str], np.ndarray]:
    n = 3 * config.n_steps // config.sample_every
    t = np.linspace(0.0, 3 * config.t_f, n + 1)
    columns = ["t", "omega_0A", "omega_aB", "omega_0B", "omega_aA", "omega_a_prime", "omega_0_prime"]
    table = np.zeros((t.size, len(columns)))
    table[:, 0] = t
    for step in (1, 2, 3):
        start = (step - 1) * config.t_f
        inside = (t >= start - 1e-12) & (t <= start + config.t_f + 1e-12)
        om_i, om_t = config.step_pulses(step)(t[inside] - start)
        table[inside, 2 * step - 1] = om_i
        table[inside, 2 * step] = om_t
    return columns, table


def cmd_pulses(args) -> int:
    config, output = load_config(args.config)
    columns, table = pulse_table(config)
    path = _out_path(args, output, "pulses", "pulses.csv")
    import json

    with open(path, "w", newline="") as fh:
        fh.write("# config: " + json.dumps(config.to_dict(), sort_keys=True) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in table:
            writer.writerow([f"{x:.9g}" for x in row])
    peaks = np.abs(table[:, 1:]).max(axis=0)
    print(f"wrote {len(table)} rows to {path}")
    for name, peak in zip(columns[1:], peaks):
        print(f"peak |{name}| = {peak:.6f}")
    return 0


def parse_range(text: str) -> list[float]:
    """``start:stop:count`` (inclusive, evenly spaced) or a comma list."""
    if ":" in text:
        start, stop, count = text.split(":")
        return np.linspace(float(start), float(stop), int(count)).tolist()
    return [float(x) for x in text.split(",") if x.strip()]


def cmd_sweep(args) -> int:
    config, output = load_config(args.config)
    branchings = [b.strip() for b in args.branching.split(",")] if args.branching else None
    result = sweep(config, parse_range(args.gamma), parse_range(args.kappa), branchings,
                   workers=args.workers)
    path = _out_path(args, output, "sweep", "sweep.csv")
    result.to_csv(path, header=config.to_dict())
    rows = result.rows()
    worst = min(rows, key=lambda r: r[2])
    print(f"wrote {len(rows)} rows to {path}")
    print(f"worst fidelity {worst[2]:.9f} at kappa={worst[0]:g}, gamma={worst[1]:g} ({worst[3]})")
    return 0


def cmd_check(args) -> int:
    config, _ = load_config(args.config)
    results, notes = checks.SUITES[args.which](config)
    for note in notes:
        print(f"  {note}")
    for check in results:
        print(check.line())
    return 0 if all(c.passed for c in results) else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sta-swap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="propagate one input through the three steps")
    p.add_argument("config", nargs="?")
    p.add_argument("--initial", choices=list(INITIAL_AMPLITUDES), default="superposition")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--open", action="store_true", help="master equation with configured noise")
    mode.add_argument("--closed", action="store_true", help="noise-free Schroedinger evolution")
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("pulses", help="tabulate the six Rabi frequencies over [0, 3 t_f]")
    p.add_argument("config", nargs="?")
    p.add_argument("--out")
    p.set_defaults(func=cmd_pulses)

    p = sub.add_parser("sweep", help="fidelity over a (kappa, gamma) grid")
    p.add_argument("config", nargs="?")
    p.add_argument("--gamma", default="0:1:5", help="start:stop:count or comma list")
    p.add_argument("--kappa", default="0,1,5,10", help="start:stop:count or comma list")
    p.add_argument("--branching", help="per_channel, total_split or both (comma separated)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check", help="run a verification suite")
    p.add_argument("config", nargs="?")
    p.add_argument("--which", choices=list(checks.SUITES), required=True)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, IntegrationError, CalibrationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
