import numpy as np
import pytest

from sta_swap.dynamics import build_step_hamiltonian, cavity_coupling, propagate_columns
from sta_swap.hilbert import BasisState, HilbertSpace
from sta_swap.invariant import EffectiveBasis
from sta_swap.zeno import (
    dark_hamiltonian,
    dark_leakage,
    effective_hamiltonian,
    effective_propagator,
    reachable_subspace,
    step_decomposition,
    zeno_decompose,
    zeno_error,
    zeno_evolution_operator,
)

S01 = BasisState.parse("01")
S00 = BasisState.parse("00")
S11 = BasisState.parse("11")

# Frozen regression values, closed system, defaults.
ZENO_ERRORS = {5.0: 1.425580e-03, 10.0: 5.070054e-04, 20.0: 1.950840e-04, 50.0: 7.099715e-05}


def labels(states):
    return [s.label for s in states]


def test_reachable_01():
    sub = reachable_subspace(S01, 1, HilbertSpace())
    assert labels(sub) == ["01_0", "e1_0", "11_1", "1e_0", "1a_0"]


def test_reachable_00():
    sub = reachable_subspace(S00, 1, HilbertSpace())
    assert sorted(labels(sub)) == ["00_0", "10_1", "e0_0"]


def test_reachable_11():
    assert labels(reachable_subspace(S11, 1, HilbertSpace())) == ["11_0"]


def test_reachable_step2_mirror():
    sub = reachable_subspace(BasisState.parse("10"), 2, HilbertSpace())
    assert sorted(labels(sub)) == sorted(["10_0", "1e_0", "11_1", "e1_0", "a1_0"])


def test_spectrum_00_manifold(config):
    dec = step_decomposition(S00, 1, config)
    assert np.allclose(dec.eigenvalues, [-10, 0, 10])


def test_spectrum_01_manifold(config):
    dec = step_decomposition(S01, 1, config)
    assert np.allclose(dec.eigenvalues, [-10 * np.sqrt(2), 0, 10 * np.sqrt(2)])
    assert dec.multiplicities() == [1, 3, 1]
    total = sum(dec.projectors)
    assert np.allclose(total, np.eye(5))


def test_zero_measurement():
    space = HilbertSpace()
    sub = reachable_subspace(S01, 1, space)
    dec = zeno_decompose(cavity_coupling(space, 0.0), sub, space)
    assert np.allclose(dec.eigenvalues, [0])
    assert np.allclose(dec.projectors[0], np.eye(5))


def test_non_hermitian_rejected():
    space = HilbertSpace()
    sub = reachable_subspace(S01, 1, space)
    bad = cavity_coupling(space, 1.0).toarray()
    bad[bad != 0] *= 1j
    with pytest.raises(ValueError):
        zeno_decompose(bad, sub, space)


def test_missing_eigenvalue(config):
    H = build_step_hamiltonian(1, config)
    dec = step_decomposition(S01, 1, config)
    with pytest.raises(ValueError):
        effective_hamiltonian(H.laser_part, dec, 3.0)


def test_dark_basis_is_the_effective_basis(config):
    eff = dark_hamiltonian(build_step_hamiltonian(1, config), S01)
    B = EffectiveBasis.build(config.space).matrix
    assert np.allclose(B.conj().T @ eff.basis, np.eye(3))


def test_effective_couplings(config):
    H = build_step_hamiltonian(1, config)
    eff = dark_hamiltonian(H, S01)
    pulses = config.step_pulses(1)
    for t in (3.0, 11.0, 17.0):
        m = eff.matrix(t)
        om_i, om_t = pulses(t)
        assert m[1, 0] == pytest.approx(-om_i / np.sqrt(2), abs=1e-14)
        assert m[1, 2] == pytest.approx(om_t / np.sqrt(2), abs=1e-14)
        assert abs(m[0, 2]) < 1e-15 and abs(np.diag(m)).max() < 1e-15


def test_00_is_frozen(config):
    eff = dark_hamiltonian(build_step_hamiltonian(1, config), S00)
    assert eff.size == 1
    assert np.allclose(eff.matrix(7.0), 0)


def test_zero_pulses_zero_matrix(config):
    H = build_step_hamiltonian(1, config, pulses=config.step_pulses(1).scaled(0.0))
    assert np.allclose(dark_hamiltonian(H, S01).matrix(5.0), 0)


def test_zeno_error_frozen(config):
    assert zeno_error(S01, 1, config) == pytest.approx(ZENO_ERRORS[10.0], rel=1e-4)
    assert zeno_error(S01, 1, config) <= 0.15


def test_zeno_error_monotone_in_g(config):
    pulses = config.step_pulses(1)
    errors = [zeno_error(S01, 1, config, g=g, pulses=pulses) for g in sorted(ZENO_ERRORS)]
    assert np.allclose(errors, [ZENO_ERRORS[g] for g in sorted(ZENO_ERRORS)], rtol=1e-4)
    assert all(b < a for a, b in zip(errors, errors[1:]))


def test_zeno_error_without_pulses(config):
    pulses = config.step_pulses(1).scaled(0.0)
    assert zeno_error(S01, 1, config, pulses=pulses) < 1e-14


def test_leakage_bound(config):
    peak = config.step_pulses(1).peak
    assert dark_leakage(S01, 1, config) <= 0.25 * (peak / config.g) ** 2


def test_eq5_operator_agrees_with_dark_propagation(config):
    H = build_step_hamiltonian(1, config)
    dec = step_decomposition(S01, 1, config)
    U = zeno_evolution_operator(H, dec, config.t_f, 2000)
    eff = dark_hamiltonian(H, S01)
    V = effective_propagator(eff, config.t_f, config.dt)
    # dark block of the product formula in the effective basis
    B = dec.embedding.conj().T @ eff.basis
    assert np.allclose(B.conj().T @ U @ B, V, atol=1e-6)


def test_eq5_operator_close_to_full(config):
    H = build_step_hamiltonian(1, config)
    dec = step_decomposition(S01, 1, config)
    U = zeno_evolution_operator(H, dec, config.t_f, 2000)
    psi = propagate_columns(H, config.space.ket(S01), config.t_f, config.dt)
    sub = dec.embedding.conj().T @ psi
    assert np.linalg.norm(U[:, 0] - sub) < 0.01
