import pytest

from sta_swap import NoiseModel, ProtocolConfig
from sta_swap.config import CALIBRATED_SIGNS


def test_defaults():
    c = ProtocolConfig()
    assert (c.epsilon, c.g, c.t_f, c.n_max) == (0.25, 10.0, 20.0, 1)
    assert c.dt == pytest.approx(0.005)
    assert c.n_steps == 4000
    assert c.space.dim == 50
    assert c.signs == CALIBRATED_SIGNS
    assert c.noise.is_closed


def test_amplitudes_must_be_normalized():
    with pytest.raises(ValueError):
        ProtocolConfig(input_amplitudes=(1, 1, 0, 0))
    c = ProtocolConfig(input_amplitudes=(0, [0, 1], 0, 0))
    assert c.input_amplitudes[1] == 1j


def test_dt_must_tile_step():
    with pytest.raises(ValueError):
        ProtocolConfig(dt=0.3)


def test_replace_noise_keys():
    c = ProtocolConfig().replace(kappa=10.0, gamma=1.0, branching="total_split")
    assert c.noise == NoiseModel(10.0, 1.0, "total_split")
    assert c.noise.channel_rate == pytest.approx(1 / 3)


def test_replace_t_f_resets_dt():
    assert ProtocolConfig().replace(t_f=40.0).dt == pytest.approx(0.01)


def test_invalid_values():
    with pytest.raises(ValueError):
        NoiseModel(kappa=-1.0)
    with pytest.raises(ValueError):
        NoiseModel(branching="other")
    with pytest.raises(ValueError):
        ProtocolConfig(step3_amplitude="other")
    with pytest.raises(ValueError):
        ProtocolConfig(signs=((1, 2), (1, 1), (1, 1)))


def test_dict_round_trip():
    c = ProtocolConfig(input_amplitudes=(0, [0, 1], 0, 0)).replace(kappa=0.5, gamma=0.1)
    assert ProtocolConfig.from_dict(c.to_dict()) == c


def test_unknown_keys_rejected():
    with pytest.raises(KeyError):
        ProtocolConfig.from_dict({"epsilon": 0.2, "bogus": 1})
    with pytest.raises(KeyError):
        ProtocolConfig.from_dict({"noise": {"kappa": 1, "rate": 2}})


def test_relative_signs():
    c = ProtocolConfig().with_relative_signs((1, -1, -1))
    assert c.signs == ((1, 1), (1, -1), (1, -1))
    assert c.step_pulses(2).sign_target == -1


def test_step3_amplitude_choice():
    lam = ProtocolConfig().step_pulses(3).peak
    lit = ProtocolConfig(step3_amplitude="paper_literal").step_pulses(3).peak
    assert lit / lam == pytest.approx(2 ** 0.5)
    assert ProtocolConfig().step_pulses(1).peak == pytest.approx(lit)
